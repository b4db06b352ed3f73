"""Reasoning: subsumption for L(>=,&,top), normal forms, countermodels, enumeration.

Concepts of L(>=,&,top) are handled through :class:`QNF`, a conjunction of
atoms and number restrictions ``(k, role, filler)``.  Subsumption between such
conjunctions decomposes conjunct by conjunct, which gives the memoised
recursion in :func:`subsumes_q`.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import z3

from dlchar import kernels
from dlchar.core import (
    BOT, TOP, And, AtLeast, Bot, Concept, Exists, Forall, Fragment, FragmentError, Name, Not, Or,
    Role, Signature, Top, conj, constructors, depth_nr_size, number_size, render_concept, signature_of,
    size as concept_size,
)
from dlchar.interp import (
    Interpretation, InterpretationBuilder, PointedInterpretation, _Compiler, decode_structure,
    holds_at,
)


class BudgetExceeded(RuntimeError):
    """An enumeration or search would exceed its configured budget."""


# -- normal form for L(>=,&,top) -------------------------------------------

@dataclass(frozen=True)
class QNF:
    atoms: frozenset = frozenset()
    rests: frozenset = frozenset()  # of (k, role name, QNF)

    def depth(self) -> int:
        return max((1 + f.depth() for _, _, f in self.rests), default=0)


QTOP = QNF()


def to_qnf(c: Concept) -> QNF:
    """Normal form of a concept in L(>=,&,top); ``exists`` counts as ``>=1``."""
    if isinstance(c, Top):
        return QTOP
    if isinstance(c, Name):
        return QNF(frozenset([c.name]))
    if isinstance(c, And):
        parts = [to_qnf(a) for a in c.args]
        return QNF(frozenset().union(*(p.atoms for p in parts)),
                   frozenset().union(*(p.rests for p in parts)))
    if isinstance(c, (Exists, AtLeast)):
        if c.role.inverse:
            raise FragmentError("inverse roles are outside L(>=,&,top)")
        k = c.k if isinstance(c, AtLeast) else 1
        return QNF(frozenset(), frozenset([(k, c.role.name, to_qnf(c.arg))]))
    raise FragmentError(f"{type(c).__name__} is outside L(>=,&,top): {render_concept(c)}")


def _rest_concept(k: int, role: str, filler: QNF, use_exists: bool = True) -> Concept:
    body = from_qnf(filler)
    if k == 1 and use_exists:
        return Exists(Role(role), body)
    return AtLeast(k, Role(role), body)


@functools.lru_cache(maxsize=None)
def from_qnf(q: QNF) -> Concept:
    """Concept for a normal form; conjuncts in canonical order, ``>=1`` printed as ``exists``."""
    parts: list[Concept] = [Name(a) for a in sorted(q.atoms)]
    rests = [_rest_concept(k, r, f) for k, r, f in q.rests]
    parts.extend(sorted(rests, key=render_concept))
    return conj(parts)


@functools.lru_cache(maxsize=None)
def subsumes_q(c: QNF, d: QNF) -> bool:
    """Whether ``c`` is subsumed by ``d``, on normal forms."""
    if not d.atoms <= c.atoms:
        return False
    for k2, r2, d2 in d.rests:
        if not any(k1 >= k2 and r1 == r2 and subsumes_q(c1, d2) for k1, r1, c1 in c.rests):
            return False
    return True


def rest_subsumes(a, b) -> bool:
    """``>=k R.C`` is subsumed by ``>=k' R'.D`` when ``k >= k'``, ``R = R'`` and ``C`` is subsumed by ``D``."""
    return a[0] >= b[0] and a[1] == b[1] and subsumes_q(a[2], b[2])


def subsumes_empty(c: Concept, d: Concept) -> bool:
    """Decide whether ``c`` is subsumed by ``d`` (no ontology), both in L(>=,&,top)."""
    return subsumes_q(to_qnf(c), to_qnf(d))


def equivalent_empty(c: Concept, d: Concept) -> bool:
    qc, qd = to_qnf(c), to_qnf(d)
    return subsumes_q(qc, qd) and subsumes_q(qd, qc)


def _rest_key(rest) -> tuple:
    k, r, f = rest
    return render_concept(_rest_concept(k, r, f)), k


@functools.lru_cache(maxsize=None)
def irredundant_q(q: QNF) -> QNF:
    rests = sorted(((k, r, irredundant_q(f)) for k, r, f in q.rests), key=_rest_key)
    kept = list(rests)
    for rest in rests:
        if any(other is not rest and rest_subsumes(other, rest) for other in kept):
            kept.remove(rest)
    return QNF(q.atoms, frozenset(kept))


def irredundant(c: Concept) -> Concept:
    """An equivalent concept in which no conjunction has a conjunct implied by another."""
    return from_qnf(irredundant_q(to_qnf(c)))


def is_irredundant(c: Concept) -> bool:
    def ok(q: QNF) -> bool:
        rests = list(q.rests)
        for i, a in enumerate(rests):
            for j, b in enumerate(rests):
                if i != j and rest_subsumes(a, b):
                    return False
        return all(ok(f) for _, _, f in rests)
    return ok(to_qnf(c))


# -- models for L(>=,&,top) -------------------------------------------------

def _tree_into(b: InterpretationBuilder, q: QNF, name: str) -> str:
    b.add(name, q.atoms)
    for i, (k, r, f) in enumerate(sorted(q.rests, key=_rest_key)):
        for j in range(k):
            b.edge(r, name, _tree_into(b, f, f"{name}.{i}{'abcdefghijklmnopqrstuvwxyz'[j % 26]}{j // 26 or ''}"))
    return name


def elq_tree_model(c: Concept, signature: Optional[Signature] = None) -> PointedInterpretation:
    """Tree model of ``c``: ``k`` fresh copies of the filler model per ``>=k`` conjunct."""
    b = InterpretationBuilder(signature or signature_of(c))
    root = _tree_into(b, to_qnf(c), "d")
    return PointedInterpretation(b.build(), root)


def _counter_into(b: InterpretationBuilder, c: QNF, d: QNF, name: str) -> str:
    if not d.atoms <= c.atoms:
        return _tree_into(b, c, name)
    for k, role, dd in sorted(d.rests, key=_rest_key):
        if any(k1 >= k and r1 == role and subsumes_q(c1, dd) for k1, r1, c1 in c.rests):
            continue
        b.add(name, c.atoms)
        tag = 0
        for k1, r1, c1 in sorted(c.rests, key=_rest_key):
            if r1 == role and k1 >= k:
                for _ in range(k1):
                    b.edge(role, name, _counter_into(b, c1, dd, f"{name}.{tag}"))
                    tag += 1
            elif r1 != role:
                for _ in range(k1):
                    b.edge(r1, name, _tree_into(b, c1, f"{name}.{tag}"))
                    tag += 1
        low = [c1 for k1, r1, c1 in c.rests if r1 == role and k1 < k]
        if low:
            merged = QNF(frozenset().union(*(x.atoms for x in low)), frozenset().union(*(x.rests for x in low)))
            for _ in range(k - 1):
                b.edge(role, name, _tree_into(b, merged, f"{name}.{tag}"))
                tag += 1
        return name
    raise ValueError("no countermodel: subsumption holds")


def elq_countermodel(c: Concept, d: Concept, signature: Optional[Signature] = None) -> Optional[PointedInterpretation]:
    """A pointed model of ``c`` whose point falsifies ``d``, or ``None`` if ``c`` is subsumed by ``d``.

    Follows the case split of the subsumption characterisation: a missing atom
    is witnessed by the tree model, a missing restriction ``>=k R.D'`` by giving
    the point at most ``k-1`` ``R``-successors in ``D'``.
    """
    qc, qd = to_qnf(c), to_qnf(d)
    if subsumes_q(qc, qd):
        return None
    b = InterpretationBuilder(signature or (signature_of(c) | signature_of(d)))
    root = _counter_into(b, qc, qd, "d")
    return PointedInterpretation(b.build(), root)


# -- bounded countermodel search -------------------------------------------

@dataclass(frozen=True)
class SubsumptionVerdict:
    status: str  # "holds", "fails_with_witness" or "unknown"
    witness: Optional[PointedInterpretation] = None

    def __post_init__(self):
        if self.status not in ("holds", "fails_with_witness", "unknown"):
            raise ValueError(f"bad status {self.status!r}")
        if (self.witness is not None) != (self.status == "fails_with_witness"):
            raise ValueError("a witness comes with status fails_with_witness and only then")

    @property
    def refuted(self) -> bool:
        return self.status == "fails_with_witness"


def _ontology_parts(o):
    if o is None:
        return [], Signature()
    return list(o.cis), o.signature


class _Encoder:
    """Finite-model encoding of concept membership for a fixed domain size."""

    def __init__(self, n: int, sig: Signature):
        self.n = n
        self.lab = {a: [z3.Bool(f"{a}@{x}") for x in range(n)] for a in sorted(sig.concepts)}
        self.edge = {r: [[z3.Bool(f"{r}@{x},{y}") for y in range(n)] for x in range(n)]
                     for r in sorted(sig.roles)}
        self.memo: dict = {}

    def e(self, role: Role, x: int, y: int):
        rows = self.edge.get(role.name)
        if rows is None:
            return z3.BoolVal(False)
        return rows[y][x] if role.inverse else rows[x][y]

    def holds(self, c: Concept, x: int):
        key = (c, x)
        f = self.memo.get(key)
        if f is not None:
            return f
        if isinstance(c, Top):
            f = z3.BoolVal(True)
        elif isinstance(c, Bot):
            f = z3.BoolVal(False)
        elif isinstance(c, Name):
            f = self.lab[c.name][x] if c.name in self.lab else z3.BoolVal(False)
        elif isinstance(c, Not):
            f = z3.Not(self.holds(c.arg, x))
        elif isinstance(c, And):
            f = z3.And([self.holds(a, x) for a in c.args])
        elif isinstance(c, Or):
            f = z3.Or([self.holds(a, x) for a in c.args])
        elif isinstance(c, Exists):
            f = z3.Or([z3.And(self.e(c.role, x, y), self.holds(c.arg, y)) for y in range(self.n)])
        elif isinstance(c, Forall):
            f = z3.And([z3.Implies(self.e(c.role, x, y), self.holds(c.arg, y)) for y in range(self.n)])
        elif isinstance(c, AtLeast):
            if c.k > self.n:
                f = z3.BoolVal(False)
            else:
                f = z3.AtLeast(*[z3.And(self.e(c.role, x, y), self.holds(c.arg, y)) for y in range(self.n)], c.k)
        else:
            raise TypeError(c)
        self.memo[key] = f
        return f

    def decode(self, model, sig: Signature) -> PointedInterpretation:
        dom = [f"e{x}" for x in range(self.n)]
        concepts = {a: [dom[x] for x in range(self.n) if z3.is_true(model.eval(v[x], model_completion=True))]
                    for a, v in self.lab.items()}
        roles = {r: [(dom[x], dom[y]) for x in range(self.n) for y in range(self.n)
                     if z3.is_true(model.eval(rows[x][y], model_completion=True))]
                 for r, rows in self.edge.items()}
        return PointedInterpretation(Interpretation(dom, concepts, roles, sig), "e0")


def find_model(pos: Sequence[Concept], neg: Sequence[Concept] = (), o=None, max_size: int = 6,
               signature: Optional[Signature] = None, min_size: int = 1) -> Optional[PointedInterpretation]:
    """Smallest pointed model (up to ``max_size``) of every ``pos`` and no ``neg`` concept, satisfying ``o``."""
    cis, osig = _ontology_parts(o)
    sig = osig | (signature or Signature())
    for c in list(pos) + list(neg):
        sig = sig | signature_of(c)
    for n in range(min_size, max_size + 1):
        enc = _Encoder(n, sig)
        s = z3.Solver()
        for c in pos:
            s.add(enc.holds(c, 0))
        for c in neg:
            s.add(z3.Not(enc.holds(c, 0)))
        for ci in cis:
            lhs, rhs = ci.lhs.concept(), ci.rhs.concept()
            for x in range(n):
                r = enc.holds(rhs, x)
                s.add(z3.Implies(enc.holds(lhs, x), z3.Not(r) if ci.negated else r))
        if s.check() == z3.sat:
            return enc.decode(s.model(), sig)
    return None


def find_countermodel(c: Concept, d: Concept, o=None, max_size: int = 6,
                      signature: Optional[Signature] = None) -> SubsumptionVerdict:
    """Search domain sizes 1..max_size for a point in ``c`` but not ``d`` (in a model of ``o``).

    Each size is decided exactly by a SAT encoding, so a witness is found
    whenever one of that size exists.  Never answers ``holds``.
    """
    pi = find_model([c], [d], o, max_size, signature)
    if pi is None:
        return SubsumptionVerdict("unknown")
    return SubsumptionVerdict("fails_with_witness", pi)


def bounded_equivalent(c: Concept, d: Concept, o=None, max_size: int = 5,
                       signature: Optional[Signature] = None) -> bool:
    """No separating model up to ``max_size`` in either direction."""
    return (find_model([c], [d], o, max_size, signature) is None
            and find_model([d], [c], o, max_size, signature) is None)


# -- exhaustive sweep (the naive oracle) -----------------------------------

def _forward_only(concepts: Iterable[Concept]) -> bool:
    for c in concepts:
        if "inv" in constructors(c):
            return False
    return True


def _sweep_setup(concepts: Sequence[Concept], sig: Signature):
    labels = sorted(sig.concepts)
    roles = sorted(sig.roles)
    comp = _Compiler({a: i for i, a in enumerate(labels)}, {r: i for i, r in enumerate(roles)}, False)
    roots = [comp.add(c) for c in concepts]
    return labels, roles, comp, roots


def structure_count(n: int, sig: Signature) -> int:
    return 2 ** (len(sig.concepts) * n + len(sig.roles) * n * n)


def naive_countermodel(c: Concept, d: Concept, max_size: int = 4, o=None,
                       signature: Optional[Signature] = None) -> Optional[PointedInterpretation]:
    """Brute force: try every pointed structure of size 1..max_size, up to isomorphism."""
    sig = signature_of(c) | signature_of(d) | (signature or Signature())
    cons = []
    if o is not None:
        sig = sig | o.signature
        cons = [o_ci.as_universal() for o_ci in o.cis]
    labels, roles, comp, roots = _sweep_setup([c, d] + cons, sig)
    croot, droot, crs = roots[0], roots[1], roots[2:]
    fwd = o is None and _forward_only([c, d])
    for n in range(1, max_size + 1):
        hits = kernels.sweep(*comp.program(), [], crs, n, len(labels), len(roles), fwd,
                             [croot], [droot], 1)
        if hits:
            return decode_structure(hits[0], n, labels, roles, sig)
    return None


def semantic_types(concepts: Sequence[Concept], sig: Signature, max_size: int,
                   budget: int = 10 ** 9) -> dict[int, PointedInterpretation]:
    """All realisable truth-value vectors of ``concepts`` at a point, over structures up to ``max_size``.

    Keys have bit ``j`` set iff ``concepts[j]`` holds; values are a witness for
    each vector.  This is the brute-force oracle for subsumption checks.
    """
    labels, roles, comp, roots = _sweep_setup(concepts, sig)
    fwd = _forward_only(concepts)
    total = sum(structure_count(n, sig) for n in range(1, max_size + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} structures exceed the budget of {budget}")
    out: dict[int, PointedInterpretation] = {}
    for n in range(1, max_size + 1):
        found = kernels.sweep(*comp.program(), roots, [], n, len(labels), len(roles), fwd)
        for key, code in found.items():
            if key not in out:
                out[key] = decode_structure(code, n, labels, roles, sig)
    return out


def all_structures(sig: Signature, n: int, forward_only: bool = True, where: Optional[Concept] = None,
                   limit: int = -1) -> list[PointedInterpretation]:
    """Pointed structures of size ``n`` up to isomorphism, optionally only those whose point satisfies ``where``."""
    labels, roles, comp, roots = _sweep_setup([where or TOP], sig)
    codes = kernels.sweep(*comp.program(), [], [], n, len(labels), len(roles), forward_only,
                          [roots[0]], [], limit)
    return [decode_structure(code, n, labels, roles, sig) for code in codes]


# -- enumeration ------------------------------------------------------------

_QOPS = frozenset({"exists", "geq", "and", "top"})


def is_elq_fragment(f: Fragment) -> bool:
    return f.ops <= _QOPS | {"bot"}


def _q_size(q: QNF, use_exists: bool) -> int:
    parts = len(q.atoms) + sum(_rest_size(k, f, use_exists) for k, _, f in q.rests)
    n = len(q.atoms) + len(q.rests)
    return 1 if n == 0 else parts + n - 1


@functools.lru_cache(maxsize=None)
def _q_size_cached(q: QNF, use_exists: bool) -> int:
    return _q_size(q, use_exists)


def _rest_size(k: int, f: QNF, use_exists: bool) -> int:
    head = 2 if (k == 1 and use_exists) else 2 + number_size(k)
    return head + _q_size_cached(f, use_exists)


def _enumerate_q(f: Fragment, sig: Signature, dp_max: int, nr_max: int, size_max: int,
                 budget: int) -> list[QNF]:
    use_exists = "exists" in f
    ks = list(range(1, nr_max + 1)) if "geq" in f else ([1] if use_exists else [])
    has_top = "top" in f
    has_and = "and" in f
    classes: list[QNF] = []
    prev: list[QNF] = []
    for depth in range(dp_max + 1):
        cands = [(1, QNF(frozenset([a])), ("a", a)) for a in sorted(sig.concepts)]
        if depth > 0 and ks:
            for filler in prev:
                if filler == QTOP and not has_top:
                    continue
                fs = _q_size_cached(filler, use_exists)
                for r in sorted(sig.roles):
                    for k in ks:
                        sz = (2 if (k == 1 and use_exists) else 2 + number_size(k)) + fs
                        if sz <= size_max:
                            cands.append((sz, QNF(frozenset(), frozenset([(k, r, filler)])),
                                          ("r", render_concept(_rest_concept(k, r, filler, use_exists)))))
        cands.sort(key=lambda t: (t[0], t[2]))
        level: list[QNF] = []
        if has_top:
            level.append(QTOP)
        items = [(sz, (q.atoms, next(iter(q.rests)) if q.rests else None)) for sz, q, _ in cands]

        def grow(start: int, atoms: frozenset, rests: tuple, total: int, count: int):
            for i in range(start, len(items)):
                sz, (a, rest) = items[i]
                new_total = total + sz + (1 if count else 0)
                if new_total > size_max:
                    break
                if count and not has_and:
                    break
                if rest is not None and any(rest_subsumes(o, rest) or rest_subsumes(rest, o) for o in rests):
                    continue
                na = atoms | a
                nr = rests + ((rest,) if rest is not None else ())
                level.append(QNF(na, frozenset(nr)))
                if len(level) > budget:
                    raise BudgetExceeded(f"more than {budget} concepts at depth {depth}")
                grow(i + 1, na, nr, new_total, count + 1)

        grow(0, frozenset(), (), 0, 0)
        prev = level
        classes = level
    return classes


def _dedupe_q(qs: list[QNF]) -> list[QNF]:
    buckets: dict = {}
    out = []
    for q in qs:
        key = (q.atoms, q.depth(), tuple(sorted((k, r) for k, r, _ in q.rests)))
        group = buckets.setdefault(key, [])
        if any(subsumes_q(q, p) and subsumes_q(p, q) for p in group):
            continue
        group.append(q)
        out.append(q)
    return out


def _syntactic_enumeration(f: Fragment, sig: Signature, dp_max: int, nr_max: int, size_max: int,
                           budget: int) -> list[Concept]:
    """Size-layered generation with flattened, sorted, duplicate-free And/Or argument sets.

    Trivially reducible shapes (``top`` inside a conjunction, ``bot`` inside a
    disjunction, double negation, ``exists R.bot`` and the like) are skipped;
    the equivalent smaller concept is always generated instead.
    """
    roles = [Role(r) for r in sorted(sig.roles)]
    if "inv" in f:
        roles = roles + [Role(r, True) for r in sorted(sig.roles)]
    by_size: dict[int, list[tuple[Concept, int, int]]] = {}
    count = 0

    def push(s: int, c: Concept, dp: int, nr: int):
        nonlocal count
        if dp > dp_max or nr > nr_max:
            return
        by_size.setdefault(s, []).append((c, dp, nr))
        count += 1
        if count > budget:
            raise BudgetExceeded(f"more than {budget} concepts")

    def kind(c: Concept) -> str:
        return "and" if isinstance(c, And) else "or" if isinstance(c, Or) else "other"

    for s in range(1, size_max + 1):
        if s == 1:
            if "top" in f:
                push(1, TOP, 0, 0)
            if "bot" in f:
                push(1, BOT, 0, 0)
            for a in sorted(sig.concepts):
                push(1, Name(a), 0, 0)
            continue
        if "neg" in f:
            for c, dp, nr in by_size.get(s - 1, []):
                if isinstance(c, Not) or (isinstance(c, Top) and "bot" in f) \
                        or (isinstance(c, Bot) and "top" in f):
                    continue
                push(s, Not(c), dp, nr)
        for r in roles:
            base = 2 + int(r.inverse)
            for c, dp, nr in by_size.get(s - base, []):
                if dp + 1 > dp_max:
                    continue
                if "exists" in f and not isinstance(c, Bot):
                    push(s, Exists(r, c), dp + 1, max(nr, 1))
                if "forall" in f and not isinstance(c, Top):
                    push(s, Forall(r, c), dp + 1, nr)
            if "geq" in f:
                for k in range(1, nr_max + 1):
                    if k == 1 and "exists" in f:
                        continue
                    for c, dp, nr in by_size.get(s - base - number_size(k), []):
                        if dp + 1 <= dp_max and not isinstance(c, Bot):
                            push(s, AtLeast(k, r, c), dp + 1, max(nr, k))
        for op, cls in (("and", And), ("or", Or)):
            if op not in f:
                continue
            pool = [(sz, c, dp, nr) for sz in range(1, s - 1) for c, dp, nr in by_size.get(sz, [])
                    if kind(c) != op and not isinstance(c, (Top, Bot))]
            pool.sort(key=lambda t: (t[0], render_concept(t[1])))

            def grow(start, chosen, total, dp, nr):
                for i in range(start, len(pool)):
                    sz, c, cdp, cnr = pool[i]
                    new_total = total + sz + (1 if chosen else 0)
                    if new_total > s:
                        break
                    picked = chosen + [c]
                    if new_total == s and len(picked) >= 2:
                        push(s, cls(tuple(picked)), max(dp, cdp), max(nr, cnr))
                    elif new_total < s:
                        grow(i + 1, picked, new_total, max(dp, cdp), max(nr, cnr))

            grow(0, [], 0, 0, 0)
    out = [c for s in sorted(by_size) for c, _, _ in by_size[s]]
    return out


def enumerate_concepts(f: Fragment, sig: Signature, dp_max: int, nr_max: int, size_max: int,
                       budget: int = 100_000) -> list[Concept]:
    """Concepts of fragment ``f`` over ``sig`` within the bounds, in (size, text) order.

    Within L(>=,&,top) (optionally with ``bot``) the list has one irredundant
    representative per equivalence class.  Other fragments are enumerated
    syntactically, so semantic duplicates may remain.
    """
    if is_elq_fragment(f):
        use_exists = "exists" in f
        qs = _dedupe_q(_enumerate_q(f, sig, dp_max, nr_max, size_max, budget))
        out = [_from_qnf_style(q, use_exists) for q in qs]
        if "bot" in f:
            out.append(BOT)
    else:
        out = _syntactic_enumeration(f, sig, dp_max, nr_max, size_max, budget)
    return sorted(out, key=lambda c: (concept_size(c), render_concept(c)))


def _from_qnf_style(q: QNF, use_exists: bool) -> Concept:
    """Like :func:`from_qnf`, but spells ``>=1`` out when ``exists`` is not available."""
    if use_exists:
        return from_qnf(q)
    parts: list[Concept] = [Name(a) for a in sorted(q.atoms)]
    rests = [AtLeast(k, Role(r), _from_qnf_style(f, False)) for k, r, f in q.rests]
    parts.extend(sorted(rests, key=render_concept))
    return conj(parts)


def subsumers_within(c: Concept, sig: Signature, dp_max: int, nr_max: int, size_max: int,
                     budget: int = 100_000) -> list[Concept]:
    """All L(>=,&,top) concepts within the bounds that subsume ``c``, one per class."""
    target = irredundant_q(to_qnf(c))

    @functools.lru_cache(maxsize=None)
    def conjuncts(q: QNF, depth: int):
        out = [(1, ("a", a), frozenset([a]), None) for a in sorted(q.atoms & sig.concepts)]
        if depth > 0:
            seen = set()
            for k1, r, f in q.rests:
                if r not in sig.roles:
                    continue
                for filler in subsumer_classes(f, depth - 1):
                    for k in range(1, min(k1, nr_max) + 1):
                        rest = (k, r, filler)
                        if rest in seen:
                            continue
                        seen.add(rest)
                        sz = _rest_size(k, filler, True)
                        if sz <= size_max:
                            out.append((sz, ("r", _rest_key(rest)), frozenset(), rest))
        out.sort(key=lambda t: (t[0], t[1]))
        return tuple(out)

    @functools.lru_cache(maxsize=None)
    def subsumer_classes(q: QNF, depth: int):
        items = conjuncts(q, depth)
        found = [QTOP]

        def grow(start, atoms, rests, total, count):
            for i in range(start, len(items)):
                sz, _, a, rest = items[i]
                new_total = total + sz + (1 if count else 0)
                if new_total > size_max:
                    break
                if rest is not None and any(rest_subsumes(o, rest) or rest_subsumes(rest, o) for o in rests):
                    continue
                na, nr = atoms | a, rests + ((rest,) if rest is not None else ())
                found.append(QNF(na, frozenset(nr)))
                if len(found) > budget:
                    raise BudgetExceeded(f"more than {budget} subsumers")
                grow(i + 1, na, nr, new_total, count + 1)

        grow(0, frozenset(), (), 0, 0)
        return tuple(_dedupe_q(found))

    qs = subsumer_classes(target, dp_max)
    return sorted((from_qnf(q) for q in qs), key=lambda x: (concept_size(x), render_concept(x)))


_BOOLEAN = frozenset({"and", "or", "neg", "top", "bot"})


@functools.lru_cache(maxsize=128)
def _type_points(names: tuple, o) -> Interpretation:
    """One element per assignment to ``names`` that some point of a model of ``o`` realises."""
    rs = None
    if o is not None and o.cis:
        from dlchar.ontology import Basic, reasoner
        rs = reasoner(o)
    dom, ext = [], {a: [] for a in names}
    for bits in range(2 ** len(names)):
        true = [a for i, a in enumerate(names) if bits >> i & 1]
        if rs is not None:
            basics = [Basic.of(a) for a in true]
            if not rs.consistent(basics):
                continue
            if any(rs.entailed_by(basics, Basic.of(a)) for a in names if a not in true):
                continue
        x = f"t{bits}"
        dom.append(x)
        for a in true:
            ext[a].append(x)
    return Interpretation(dom, ext, {}, Signature(frozenset(names), frozenset()))


def _boolean_masks(c: Concept, d: Concept, o) -> tuple[int, int]:
    names = tuple(sorted(signature_of(c).concepts | signature_of(d).concepts))
    interp = _type_points(names, o)
    from dlchar.interp import eval_masks
    mc, md = eval_masks([c, d], interp, strict=False)
    return mc, md


def equivalent_in(c: Concept, d: Concept, o=None, model_cap: int = 5,
                  signature: Optional[Signature] = None) -> bool:
    """Equivalence by the best available method: exact for L(>=,&,top) without
    an ontology, for EL concepts under DL-Lite and for Boolean combinations of
    names; bounded model search otherwise."""
    cc, cd = constructors(c), constructors(d)
    if cc <= _BOOLEAN and cd <= _BOOLEAN:
        mc, md = _boolean_masks(c, d, o)
        return mc == md
    if o is None or not o.cis:
        if cc <= _QOPS and cd <= _QOPS:
            return equivalent_empty(c, d)
    if o is not None and cc <= _QOPS - {"geq"} | {"bot"} and cd <= _QOPS - {"geq"} | {"bot"}:
        from dlchar.ontology import el_equivalent_wrt
        return el_equivalent_wrt(c, d, o)
    return bounded_equivalent(c, d, o, model_cap, signature)


def subsumes_in(c: Concept, d: Concept, o=None, model_cap: int = 5,
                signature: Optional[Signature] = None) -> bool:
    """Subsumption by the best available method (bounded search as the last resort)."""
    cc, cd = constructors(c), constructors(d)
    if cc <= _BOOLEAN and cd <= _BOOLEAN:
        mc, md = _boolean_masks(c, d, o)
        return mc & ~md == 0
    if (o is None or not o.cis) and cc <= _QOPS and cd <= _QOPS:
        return subsumes_empty(c, d)
    if o is not None and cc <= _QOPS - {"geq"} | {"bot"} and cd <= _QOPS - {"geq"} | {"bot"}:
        from dlchar.ontology import el_subsumes_wrt_any
        return el_subsumes_wrt_any(c, d, o)
    return find_model([c], [d], o, model_cap, signature) is None


__all__ = [
    "BudgetExceeded", "QNF", "QTOP", "to_qnf", "from_qnf", "subsumes_q", "subsumes_empty",
    "equivalent_empty", "irredundant", "irredundant_q", "is_irredundant", "elq_tree_model",
    "elq_countermodel", "SubsumptionVerdict", "find_model", "find_countermodel",
    "bounded_equivalent", "naive_countermodel", "semantic_types", "all_structures",
    "enumerate_concepts", "subsumers_within", "equivalent_in", "subsumes_in", "is_elq_fragment",
    "structure_count",
]
