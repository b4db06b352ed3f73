"""Frontiers of L(>=,&,top) concepts: finite sets of strict weakenings that
cover every strict weakening up to subsumption."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

from dlchar.core import Concept, Signature, depth, render_concept, signature_of, size
from dlchar.reason import (
    QNF, from_qnf, irredundant_q, subsumers_within, subsumes_empty, subsumes_q, to_qnf,
)


@dataclass(frozen=True)
class Frontier:
    base: Concept
    members: tuple = ()

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def total_size(self) -> int:
        return sum(size(m) for m in self.members)


@functools.lru_cache(maxsize=None)
def frontier_q(q: QNF) -> tuple:
    """Frontier of an irredundant normal form, as irredundant normal forms."""
    out: list[QNF] = []
    for a in sorted(q.atoms):
        out.append(QNF(q.atoms - {a}, q.rests))
    for rest in sorted(q.rests, key=lambda t: (render_concept(from_qnf(QNF(frozenset(), frozenset([t])))))):
        k, r, f = rest
        rests = set(q.rests - {rest})
        if k > 1:
            rests.add((k - 1, r, f))
        rests.update((k, r, g) for g in frontier_q(f))
        out.append(QNF(q.atoms, frozenset(rests)))
    seen, members = set(), []
    for m in out:
        m = irredundant_q(m)
        if m not in seen:
            seen.add(m)
            members.append(m)
    return tuple(members)


def frontier(c: Concept) -> Frontier:
    """Frontier of ``c`` in L(>=,&,top).

    Members drop one atomic conjunct, or replace one ``>=k R.C'`` by
    ``>=(k-1) R.C'`` together with ``>=k R.D`` for every ``D`` in the frontier
    of ``C'`` (the ``>=0`` part is omitted).
    """
    q = irredundant_q(to_qnf(c))
    return Frontier(c, tuple(from_qnf(m) for m in frontier_q(q)))


def size_bound(c: Concept) -> int:
    """Upper bound on the total frontier size: ``5*dp*|C|^3``, or ``|C|^2`` at depth 0."""
    n, dp = size(c), depth(c)
    return 5 * dp * n ** 3 if dp > 0 else n * n


@dataclass
class FrontierReport:
    base: Concept
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_frontier(c: Concept, fr, dp_max: int, nr_max: int, size_max: int,
                    signature: Signature | None = None, budget: int = 100_000) -> FrontierReport:
    """Check both frontier conditions; the covering one against all subsumers within the bounds."""
    members = list(fr.members if isinstance(fr, Frontier) else fr)
    report = FrontierReport(c)
    for m in members:
        if not subsumes_empty(c, m):
            report.violations.append(("not a subsumer", m))
        elif subsumes_empty(m, c):
            report.violations.append(("not strict", m))
    sig = signature or signature_of(c)
    qc = to_qnf(c)
    qms = [to_qnf(m) for m in members]
    for d in subsumers_within(c, sig, dp_max, nr_max, size_max, budget):
        qd = to_qnf(d)
        if subsumes_q(qd, qc):
            continue
        report.checked += 1
        if not any(subsumes_q(qm, qd) for qm in qms):
            report.violations.append(("uncovered", d))
    return report


__all__ = ["Frontier", "FrontierReport", "frontier", "frontier_q", "size_bound", "verify_frontier"]
