"""Finite characterisations: builders for the fragments that admit them, a
verifier that searches for other fitting concepts, and adversarial search
for the fragments that do not."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import networkx as nx

from dlchar.core import (
    ALEQ, BOT, EL, EL_BOT, ELQ, TOP, And, AtLeast, Concept, Exists, Fragment, FragmentError, Name,
    Or, Role, Signature, conj, depth_nr_size, exists_chain, fragment_check, render_concept,
    signature_of, size,
)
from dlchar.frontier import frontier
from dlchar.interp import (
    ExampleSet, Interpretation, InterpretationBuilder, PointedInterpretation, eval_masks, fits,
    point_truth,
)
from dlchar.ontology import (
    Basic, DLLiteOntology, basics_over, canonical_model, el_subsumes_wrt, reasoner,
    satisfiable_wrt, satisfies_ontology,
)
from dlchar.reason import (
    BudgetExceeded, QNF, all_structures, elq_countermodel, elq_tree_model, enumerate_concepts,
    equivalent_empty, equivalent_in, find_model, from_qnf, irredundant_q, structure_count,
    subsumes_empty, subsumes_in, to_qnf,
)


@dataclass(frozen=True)
class Bounds:
    dp: int = 2
    nr: int = 2
    size: int = 8
    model_cap: int = 5
    budget: int = 100_000

    def __post_init__(self):
        if min(self.dp, self.nr, self.size, self.model_cap, self.budget) < 0:
            raise ValueError("bounds must be nonnegative")


@dataclass
class CharacterisationReport:
    target: Concept
    examples: ExampleSet
    mode: str
    fragment: Fragment
    ontology: Optional[DLLiteOntology] = None
    verified_bounds: tuple = ()
    violations: list = field(default_factory=list)
    checked: int = 0
    falsifiers: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fitting(self) -> list[Concept]:
        return [d for kind, d in self.violations if kind == "fits"]

    def to_json(self) -> dict:
        return {
            "target": render_concept(self.target),
            "mode": self.mode,
            "fragment": str(self.fragment),
            "ontology": self.ontology.to_text() if self.ontology is not None else None,
            "verified_bounds": list(self.verified_bounds),
            "checked": self.checked,
            "positives": len(self.examples.positives),
            "negatives": len(self.examples.negatives),
            "ok": self.ok,
            "violations": [[kind, d if isinstance(d, str) else render_concept(d)] for kind, d in self.violations],
        }

    def render(self) -> str:
        lines = [f"target: {render_concept(self.target)}",
                 f"fragment: {self.fragment}  mode: {self.mode}  bounds (dp, nr, size): {self.verified_bounds}",
                 f"examples: {len(self.examples.positives)} positive, {len(self.examples.negatives)} negative",
                 f"candidates checked: {self.checked}",
                 "result: " + ("unique within bounds" if self.ok else f"{len(self.violations)} violation(s)")]
        for kind, d in self.violations:
            lines.append(f"  {kind}: {d if isinstance(d, str) else render_concept(d)}")
        return "\n".join(lines)


def _canonical_order(pis: Iterable[PointedInterpretation]) -> list[PointedInterpretation]:
    return sorted(pis, key=lambda pi: json.dumps(pi.to_json(), sort_keys=True))


# -- shrinking --------------------------------------------------------------

def _select(interp: Interpretation, x: str, q: QNF, chosen: set, seen: set, ext) -> None:
    if (x, q) in seen:
        return
    seen.add((x, q))
    chosen.add(x)
    for k, r, f in sorted(q.rests, key=lambda t: (t[1], t[0], render_concept(from_qnf(t[2])))):
        good = [y for y in interp.successors(Role(r), x) if y in ext(f)]
        good.sort(key=lambda y: (y not in chosen, sum(len(interp.successors(Role(s), y)) for s in interp.roles), y))
        for y in good[:k]:
            _select(interp, y, f, chosen, seen, ext)


def shrink_positive_example(c: Concept, pi: PointedInterpretation,
                            keep_false: Sequence[Concept] = ()) -> PointedInterpretation:
    """A small sub-interpretation in which ``c`` still holds at the point.

    For L(>=,&,top) the point keeps, for every conjunct ``>=k R.C'``, only
    ``k`` witnesses (recursively); then single elements are dropped greedily
    as long as ``c`` holds and every concept in ``keep_false`` stays false.
    """
    def ok(cand: PointedInterpretation) -> bool:
        masks = eval_masks([c, *keep_false], cand.interp, strict=False)
        bit = cand.interp.index[cand.point]
        return bool(masks[0] >> bit & 1) and not any(m >> bit & 1 for m in masks[1:])

    if not ok(pi):
        raise ValueError("the example does not satisfy the concept (or a keep_false concept holds)")
    interp = pi.interp
    try:
        q = irredundant_q(to_qnf(c))
    except FragmentError:
        q = None
    if q is not None:
        cache: dict = {}

        def ext(f: QNF):
            if f not in cache:
                cache[f] = interp.elements(eval_masks([from_qnf(f)], interp, strict=False)[0])
            return cache[f]

        chosen: set = set()
        _select(interp, pi.point, q, chosen, set(), ext)
        cand = PointedInterpretation(interp.restrict(chosen), pi.point)
        if ok(cand):
            pi = cand
    for x in sorted(pi.interp.domain, reverse=True):
        if x == pi.point or len(pi.interp) == 1:
            continue
        cand = PointedInterpretation(pi.interp.restrict(set(pi.interp.domain) - {x}), pi.point)
        if ok(cand):
            pi = cand
    return pi


# -- L(>=,&,top) -----------------------------------------------------------

def _frontier_negatives(c: Concept, sig: Signature) -> list[PointedInterpretation]:
    out = []
    for m in frontier(c):
        w = elq_countermodel(m, c, sig)
        out.append(shrink_positive_example(m, w, keep_false=[c]))
    return out


def characterise_elq(c: Concept, mode: str = "bounded_complete", bounds: Bounds = Bounds(),
                     signature: Optional[Signature] = None, fragment: Fragment = ELQ,
                     extra: Sequence[Concept] = ()) -> ExampleSet:
    """Examples characterising ``c`` within L(>=,&,top).

    Negatives are shrunk witnesses separating each frontier member from ``c``.
    In ``paper_exact`` mode the positives are all models of ``c`` up to the
    small-model bound ``|C|^|C|``; in ``bounded_complete`` mode there is one
    positive falsifying each enumerated non-subsumer (plus ``extra``), reusing
    earlier positives where possible.
    """
    if not fragment_check(c, ELQ):
        raise FragmentError(f"{render_concept(c)} is outside L(>=,&,top)")
    sig = signature_of(c) | (signature or Signature())
    negatives = _frontier_negatives(c, sig)
    if mode == "paper_exact":
        n = size(c)
        bound = n ** n
        total = 0
        for m in range(1, bound + 1):
            total += structure_count(m, sig)
            if total > bounds.budget:
                raise BudgetExceeded(f"paper_exact needs structures up to size {bound}; budget {bounds.budget}")
        positives = [pi for m in range(1, bound + 1) for pi in all_structures(sig, m, True, c)]
    elif mode == "bounded_complete":
        cands = list(enumerate_concepts(fragment, sig, bounds.dp, bounds.nr, bounds.size, bounds.budget))
        cands += [d for d in extra if d not in cands]
        positives = [shrink_positive_example(c, elq_tree_model(c, sig))]
        table = point_truth(cands, positives)
        falsified = [not all(row) for row in table]
        for j, d in enumerate(cands):
            if falsified[j] or subsumes_empty(c, d):
                continue
            w = shrink_positive_example(c, elq_countermodel(c, d, sig), keep_false=[d])
            positives.append(w)
            row = point_truth(cands, [w])
            for i in range(len(cands)):
                if not row[i][0]:
                    falsified[i] = True
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ExampleSet(_canonical_order(positives), _canonical_order(negatives), sig,
                      {"target": render_concept(c), "mode": mode})


# -- L(forall,exists,>=,&,top) ------------------------------------------------

def _enk_one(n: int, k: int, sig: Signature, loop: bool) -> PointedInterpretation:
    atoms = sorted(sig.concepts)
    roles = sorted(sig.roles)
    b = InterpretationBuilder(sig)
    levels = [["d1"]] + [[f"d{i}_{j}" for j in range(1, k + 1)] for i in range(2, n + 1)]
    gadgets = [f"e{j}" for j in range(1, (k if n > 0 else 1) + 1)]
    for level in levels if n > 0 else []:
        for x in level:
            b.add(x, atoms)
    for g in gadgets:
        b.add(g, atoms)
        if loop:
            b.add(g + "'")
            for r in roles:
                b.edge(r, g, g)
                b.edge(r, g, g + "'")
    chain = (levels if n > 0 else []) + [gadgets]
    for upper, lower in zip(chain, chain[1:]):
        for x in upper:
            for y in lower:
                for r in roles:
                    b.edge(r, x, y)
    return PointedInterpretation(b.build(), "d1" if n > 0 else gadgets[0])


def top_examples(sig: Signature) -> ExampleSet:
    """A dead point and a loop with a dead successor, no concept names anywhere: characterises ``top``."""
    loop = InterpretationBuilder(sig)
    loop.add("d'")
    loop.add("e'")
    for r in sorted(sig.roles):
        loop.edge(r, "d'", "d'")
        loop.edge(r, "d'", "e'")
    dead = Interpretation(["d"], {}, {}, sig)
    return ExampleSet([PointedInterpretation(dead, "d"), PointedInterpretation(loop.build(), "d'")], [], sig)


def build_enk(n: int, k: int, sig: Signature, budget: int = 100_000) -> ExampleSet:
    """Two positive examples fitted exactly by concepts of depth at most ``n`` and counts at most ``k``.

    A point ``d1`` feeds ``n-1`` levels of ``k`` elements, each level fully
    connected to the next by every role, and the last level reaches ``k``
    copies of a gadget: a dead end, or a self-loop with a dead-end successor.
    All prefix and gadget points carry every concept name; the dead-end
    successor carries none.
    """
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if (n * k + 2 * k) * max(1, len(sig.concepts)) > budget:
        raise BudgetExceeded("E(n,k) exceeds the budget")
    pos = [_enk_one(n, k, sig, False), _enk_one(n, k, sig, True)]
    return ExampleSet(pos, [], sig, {"n": n, "k": k})


def characterise_aleq(c: Concept, n: Optional[int] = None, k: Optional[int] = None,
                      signature: Optional[Signature] = None, bounds: Bounds = Bounds()) -> ExampleSet:
    """E(n,k) plus distinguishing examples for the enumerated concepts.

    Every candidate true on all positives gets a positive falsifying it unless
    it subsumes ``c``; one that still fits then gets a negative.  Concepts for which no separating model is found within the model cap are
    listed in ``meta["gaps"]`` unless they are provably equivalent.
    """
    if not fragment_check(c, ALEQ):
        raise FragmentError(f"{render_concept(c)} is outside L(forall,exists,>=,&,top)")
    dp, nr, _ = depth_nr_size(c)
    n = dp if n is None else n
    k = max(nr, 1) if k is None else k
    if dp > n or nr > k:
        raise ValueError("the target exceeds the depth/count bounds")
    sig = signature_of(c) | (signature or Signature())
    if c == TOP:
        e = top_examples(sig)
        e.meta.update({"target": "top", "gaps": [], "mode": "bounded_complete"})
        return e
    e = build_enk(n, k, sig, bounds.budget)
    gaps = []
    for d in enumerate_concepts(ALEQ, sig, n, k, bounds.size, bounds.budget):
        if d == c or not all(point_truth([d], e.positives)[0]):
            continue
        if fragment_check(d, ELQ) and fragment_check(c, ELQ) and equivalent_empty(c, d):
            continue
        # a non-subsumer holding on every positive must be falsified by one, even if a
        # negative already rules it out: otherwise its conjunction with c would fit
        w = find_model([c], [d], None, bounds.model_cap, sig)
        if w is not None:
            e.positives.append(w)
            continue
        if any(point_truth([d], e.negatives)[0]):
            continue
        w = find_model([d], [c], None, bounds.model_cap, sig)
        if w is None:
            gaps.append(render_concept(d))
        else:
            e.negatives.append(w)
    e.meta.update({"target": render_concept(c), "gaps": gaps, "mode": "bounded_complete"})
    return e


# -- DL-Lite ---------------------------------------------------------------

def frontier_wrt(c: Concept, o: DLLiteOntology, bounds: Bounds = Bounds(),
                 signature: Optional[Signature] = None) -> list[Concept]:
    """Minimal strict subsumers of ``c`` under ``o`` among EL concepts within the bounds."""
    if not satisfiable_wrt(c, o):
        raise ValueError("frontier_wrt needs a satisfiable concept")
    sig = signature_of(c) | o.signature | (signature or Signature())
    strict: list[Concept] = []
    for d in enumerate_concepts(EL, sig, bounds.dp, 1, bounds.size, bounds.budget):
        if not el_subsumes_wrt(c, d, o) or el_subsumes_wrt(d, c, o):
            continue
        if any(el_subsumes_wrt(d, s, o) and el_subsumes_wrt(s, d, o) for s in strict):
            continue
        strict.append(d)
    return [d for d in strict
            if not any(s is not d and el_subsumes_wrt(s, d, o) and not el_subsumes_wrt(d, s, o) for s in strict)]


def _element_names(gammas: list[frozenset]) -> list[str]:
    out = []
    for g in gammas:
        parts = sorted(str(b).replace("exists ", "E") for b in g)
        out.append("{" + ",".join(parts) + "}")
    return out


def characterise_bot_dllite(o: DLLiteOntology, signature: Optional[Signature] = None) -> ExampleSet:
    """Negative examples for ``bot``: one point per maximal consistent set of basic concepts.

    Points are linked by ``R`` when the source contains ``exists R`` and the
    target contains ``exists R-``.
    """
    sig = o.signature | (signature or Signature())
    rs = reasoner(DLLiteOntology(o.cis, sig))
    phi = [b for b in basics_over(sig) if b not in rs.unsat]
    g = nx.Graph()
    g.add_nodes_from(range(len(phi)))
    for i, j in itertools.combinations(range(len(phi)), 2):
        if rs.consistent([phi[i], phi[j]]):
            g.add_edge(i, j)
    gammas = sorted((frozenset(phi[i] for i in clique) for clique in nx.find_cliques(g)),
                    key=lambda s: sorted(b.key() for b in s)) if phi else [frozenset()]
    names = _element_names(gammas)
    b = InterpretationBuilder(sig)
    for name, gamma in zip(names, gammas):
        b.add(name, sorted(x.atom for x in gamma if x.atom is not None))
    for r in sorted(sig.roles):
        fwd, bwd = Basic.ex(Role(r)), Basic.ex(Role(r, True))
        for x, gx in zip(names, gammas):
            if fwd not in gx:
                continue
            for y, gy in zip(names, gammas):
                if bwd in gy:
                    b.edge(r, x, y)
    interp = b.build()
    negs = [PointedInterpretation(interp, x) for x in names]
    return ExampleSet([], negs, sig, {"target": "bot", "mode": "paper_exact"})


def characterise_el_dllite(c: Concept, o: DLLiteOntology, bounds: Bounds = Bounds(),
                           signature: Optional[Signature] = None) -> ExampleSet:
    """Canonical model of ``c`` as the positive, canonical models of its frontier under ``o`` as negatives."""
    if not fragment_check(c, EL_BOT):
        raise FragmentError(f"{render_concept(c)} is outside L(exists,&,top,bot)")
    sig = signature_of(c) | o.signature | (signature or Signature())
    if not satisfiable_wrt(c, o):
        e = characterise_bot_dllite(o, sig)
        e.meta["target"] = render_concept(c)
        return e
    pos = canonical_model(c, o)
    negs = [canonical_model(m, o) for m in frontier_wrt(c, o, bounds, sig)]
    pos = PointedInterpretation(pos.interp.with_signature(sig), pos.point)
    negs = [PointedInterpretation(m.interp.with_signature(sig), m.point) for m in negs]
    return ExampleSet([pos], _canonical_order(negs), sig, {"target": render_concept(c), "mode": "bounded_complete"})


# -- verification ------------------------------------------------------------

def verify_characterisation(c: Concept, e: ExampleSet, f: Fragment, o: Optional[DLLiteOntology] = None,
                            bounds: Bounds = Bounds(), signature: Optional[Signature] = None,
                            extra: Sequence[Concept] = ()) -> CharacterisationReport:
    """Look for concepts of ``f`` within the bounds that fit ``e`` but are not equivalent to ``c``.

    For fragments with conjunction, a candidate that holds on every positive
    but does not subsume ``c`` is also a violation, since its conjunction with
    ``c`` would fit.  ``extra`` adds hand-picked candidates to the search.
    """
    sig = (e.signature or Signature()) | (signature or Signature()) | signature_of(c)
    if o is not None:
        sig = sig | o.signature
    report = CharacterisationReport(c, e, e.meta.get("mode", "given"), f, o,
                                    (bounds.dp, bounds.nr, bounds.size))
    fr = fits(c, e)
    if not fr:
        report.violations.append(("target misses example", f"{'positive' if fr.positive else 'negative'} #{fr.index}"))
    if o is not None:
        for i, (pi, pol) in enumerate(e.labelled()):
            if not satisfies_ontology(pi.interp, o):
                report.violations.append(("example violates ontology", f"#{i}"))
    cands = list(enumerate_concepts(f, sig, bounds.dp, bounds.nr, bounds.size, bounds.budget))
    cands += [d for d in extra if d not in cands]
    report.checked = len(cands)
    pos = point_truth(cands, e.positives)
    neg = point_truth(cands, e.negatives)
    with_and = "and" in f
    for j, d in enumerate(cands):
        on_pos = all(pos[j])
        if on_pos and not any(neg[j]):
            if not equivalent_in(c, d, o, bounds.model_cap, sig):
                report.violations.append(("fits", d))
        elif with_and:
            if not on_pos:
                report.falsifiers[render_concept(d)] = pos[j].index(False)
            elif not subsumes_in(c, d, o, bounds.model_cap, sig):
                report.violations.append(("unfalsified non-subsumer", d))
    return report


# -- adversarial search --------------------------------------------------------

def geq_or_family(a: str, r: str, k: int) -> Concept:
    return Or((Name(a), AtLeast(k, Role(r), Name(a))))


def geq_or_witness(a: str, r: str, k: int) -> PointedInterpretation:
    """A point outside ``a`` with ``k`` successors in ``a``: separates ``a`` from its family member."""
    b = InterpretationBuilder(Signature(frozenset([a]), frozenset([r])))
    b.add("d")
    for i in range(1, k + 1):
        b.add(f"d{i}", [a])
        b.edge(r, "d", f"d{i}")
    return PointedInterpretation(b.build(), "d")


def inverse_family(a: str, r: str, n: int) -> Concept:
    """``a & (exists r.)^n (exists r-.)^(n+1) a``."""
    chain = exists_chain([Role(r)] * n + [Role(r, True)] * (n + 1), Name(a))
    return And((Name(a), chain))


def inverse_witness(a: str, r: str, n: int) -> PointedInterpretation:
    """An ``r``-path of ``n+2`` points in ``a`` ending in a loop; the first point has no predecessor.

    The loop lies ``n+1`` steps out, so ``n`` forward steps cannot reach it and
    the ``n+1`` backward steps run off the start of the path.
    """
    b = InterpretationBuilder(Signature(frozenset([a]), frozenset([r])))
    pts = [f"e{i}" for i in range(1, n + 3)]
    for p in pts:
        b.add(p, [a])
    for x, y in zip(pts, pts[1:]):
        b.edge(r, x, y)
    b.edge(r, pts[-1], pts[-1])
    return PointedInterpretation(b.build(), pts[0])


def adversarial_fit(e: ExampleSet, f: Fragment, bounds: Bounds = Bounds(),
                    o: Optional[DLLiteOntology] = None, signature: Optional[Signature] = None) -> list[Concept]:
    """All enumerated concepts of ``f`` fitting ``e``, plus fitting members of two infinite families.

    With ``geq`` and ``or`` the family is ``A | >=k R.A`` with ``k`` one more
    than the largest example; with ``exists``, ``inv`` and ``and`` under an
    ontology it is ``A & (exists R.)^n (exists R-.)^(n+1) A``.
    """
    sig = (e.signature or Signature()) | (signature or Signature())
    for pi, _ in e.labelled():
        sig = sig | pi.interp.signature
    cands = list(enumerate_concepts(f, sig, bounds.dp, bounds.nr, bounds.size, bounds.budget))
    biggest = max((len(pi) for pi, _ in e.labelled()), default=0)
    if {"geq", "or"} <= f.ops:
        cands += [geq_or_family(a, r, biggest + 1) for a in sorted(sig.concepts) for r in sorted(sig.roles)]
    if {"exists", "inv", "and"} <= f.ops and o is not None:
        cands += [inverse_family(a, r, biggest + 1) for a in sorted(sig.concepts) for r in sorted(sig.roles)]
    pos = point_truth(cands, e.positives)
    neg = point_truth(cands, e.negatives)
    return [d for j, d in enumerate(cands) if all(pos[j]) and not any(neg[j])]


# -- lower bound family ---------------------------------------------------------

def _lb_parts(n: int):
    r = Role("R")
    def a(i, j):
        return Name(f"A{i}{j}")
    cs = {i: And((Exists(r, And((a(i, 1), a(i, 3)))), Exists(r, And((a(i, 2), a(i, 3)))))) for i in range(1, n + 1)}
    ds = {i: Exists(r, conj([a(i, 1), a(i, 2), a(i, 3)])) for i in range(1, n + 1)}
    dps = {i: AtLeast(2, r, a(i, 3)) for i in range(1, n + 1)}
    return r, cs, ds, dps


def gen_lowerbound_instance(n: int) -> tuple[Concept, Signature]:
    """The concept needing at least ``2**n`` positive examples, with its signature."""
    if n < 1:
        raise ValueError("n >= 1")
    r, cs, ds, dps = _lb_parts(n)
    parts = []
    for i in range(1, n + 1):
        inner = [cs[i]] + [x for j in range(1, n + 1) if j != i for x in (ds[j], dps[j])]
        parts.append(Exists(r, conj(inner)))
    sig = Signature(frozenset(f"A{i}{j}" for i in range(1, n + 1) for j in (1, 2, 3)), frozenset(["R"]))
    return conj(parts), sig


def lowerbound_family(n: int) -> list[Concept]:
    """The ``2**n`` concepts ``exists R.(s1 & ... & sn)`` with each ``si`` one of the two alternatives."""
    r, _, ds, dps = _lb_parts(n)
    return [Exists(r, conj(list(choice)))
            for choice in itertools.product(*[(ds[i], dps[i]) for i in range(1, n + 1)])]


__all__ = [
    "Bounds", "CharacterisationReport", "shrink_positive_example", "characterise_elq", "build_enk",
    "characterise_aleq", "frontier_wrt", "characterise_el_dllite", "characterise_bot_dllite",
    "verify_characterisation", "adversarial_fit", "top_examples", "geq_or_family", "geq_or_witness",
    "inverse_family", "inverse_witness", "gen_lowerbound_instance", "lowerbound_family",
]
