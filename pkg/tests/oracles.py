"""Independent reference implementations and hypothesis strategies shared by the tests.

Nothing here imports the evaluation or reasoning code under test; the
oracles work directly on the concept tree and plain Python sets.
"""

import itertools

from hypothesis import strategies as st

from dlchar.core import (
    BOT, TOP, And, AtLeast, Bot, Concept, Exists, Forall, Name, Not, Or, Role, Signature, Top,
)
from dlchar.interp import Interpretation, PointedInterpretation

NAMES = ("A", "B")
ROLES = ("R", "S")


# -- naive semantics ---------------------------------------------------------

def succ(interp: Interpretation, role: Role, x: str) -> set:
    pairs = interp.roles.get(role.name, ())
    if role.inverse:
        return {a for a, b in pairs if b == x}
    return {b for a, b in pairs if a == x}


def naive_eval(c: Concept, interp: Interpretation) -> set:
    dom = set(interp.domain)
    if isinstance(c, Top):
        return dom
    if isinstance(c, Bot):
        return set()
    if isinstance(c, Name):
        return set(interp.concepts.get(c.name, ()))
    if isinstance(c, Not):
        return dom - naive_eval(c.arg, interp)
    if isinstance(c, And):
        out = dom
        for a in c.args:
            out = out & naive_eval(a, interp)
        return out
    if isinstance(c, Or):
        out = set()
        for a in c.args:
            out |= naive_eval(a, interp)
        return out
    inner = naive_eval(c.arg, interp)
    if isinstance(c, Exists):
        return {x for x in dom if succ(interp, c.role, x) & inner}
    if isinstance(c, Forall):
        return {x for x in dom if succ(interp, c.role, x) <= inner}
    if isinstance(c, AtLeast):
        return {x for x in dom if len(succ(interp, c.role, x) & inner) >= c.k}
    raise TypeError(c)


def naive_holds(c: Concept, pi: PointedInterpretation) -> bool:
    return pi.point in naive_eval(c, pi.interp)


def all_small_structures(names, roles, n):
    """Every interpretation on elements 0..n-1 (no isomorphism reduction)."""
    dom = [f"x{i}" for i in range(n)]
    pairs = [(a, b) for a in dom for b in dom]
    label_slots = [(a, x) for a in names for x in dom]
    edge_slots = [(r, p) for r in roles for p in pairs]
    for lbits in range(2 ** len(label_slots)):
        concepts = {a: [] for a in names}
        for i, (a, x) in enumerate(label_slots):
            if lbits >> i & 1:
                concepts[a].append(x)
        for ebits in range(2 ** len(edge_slots)):
            rel = {r: [] for r in roles}
            for i, (r, p) in enumerate(edge_slots):
                if ebits >> i & 1:
                    rel[r].append(p)
            yield Interpretation(dom, concepts, rel, Signature(frozenset(names), frozenset(roles)))


def naive_subsumes(c: Concept, d: Concept, names, roles, max_size: int) -> bool:
    for n in range(1, max_size + 1):
        for interp in all_small_structures(names, roles, n):
            if naive_eval(c, interp) - naive_eval(d, interp):
                return False
    return True


def is_simulation(z, i1: Interpretation, i2: Interpretation) -> bool:
    for x, y in z:
        if any(x in xs and y not in i2.ext(a) for a, xs in i1.concepts.items()):
            return False
        for r, pairs in i1.roles.items():
            for a, b in pairs:
                if a == x and not any((b, y2) in z for y2 in succ(i2, Role(r), y)):
                    return False
    return True


def brute_greatest_simulation(i1: Interpretation, i2: Interpretation) -> set:
    """Union of all simulations, found by trying every relation (tiny inputs only)."""
    cells = [(x, y) for x in i1.domain for y in i2.domain]
    best = set()
    for bits in range(2 ** len(cells)):
        z = {cells[i] for i in range(len(cells)) if bits >> i & 1}
        if is_simulation(z, i1, i2):
            best |= z
    return best


# -- strategies -------------------------------------------------------------

def roles_st(inverse: bool):
    names = st.sampled_from(ROLES[:1])
    if inverse:
        return st.builds(Role, names, st.booleans())
    return st.builds(Role, names)


def concepts(ops=("exists", "forall", "geq", "and", "or", "neg", "top", "bot"), names=NAMES,
             max_leaves: int = 6, inverse: bool = False, max_k: int = 3):
    leaves = [st.sampled_from([Name(a) for a in names])]
    if "top" in ops:
        leaves.append(st.just(TOP))
    if "bot" in ops:
        leaves.append(st.just(BOT))
    base = st.one_of(*leaves)

    def extend(inner):
        opts = []
        role = roles_st(inverse)
        if "and" in ops:
            opts.append(st.lists(inner, min_size=2, max_size=3).map(lambda xs: And(tuple(xs))))
        if "or" in ops:
            opts.append(st.lists(inner, min_size=2, max_size=3).map(lambda xs: Or(tuple(xs))))
        if "neg" in ops:
            opts.append(inner.map(Not))
        if "exists" in ops:
            opts.append(st.builds(Exists, role, inner))
        if "forall" in ops:
            opts.append(st.builds(Forall, role, inner))
        if "geq" in ops:
            opts.append(st.builds(AtLeast, st.integers(1, max_k), role, inner))
        return st.one_of(*opts)

    return st.recursive(base, extend, max_leaves=max_leaves)


ELQ_OPS = ("exists", "geq", "and", "top")
EL_OPS = ("exists", "and", "top")


@st.composite
def interpretations(draw, names=NAMES, roles=ROLES[:1], min_size=1, max_size=5):
    n = draw(st.integers(min_size, max_size))
    dom = [f"x{i}" for i in range(n)]
    concepts = {a: draw(st.sets(st.sampled_from(dom))) for a in names}
    rel = {r: draw(st.sets(st.tuples(st.sampled_from(dom), st.sampled_from(dom)), max_size=n * n))
           for r in roles}
    return Interpretation(dom, concepts, rel, Signature(frozenset(names), frozenset(roles)))


@st.composite
def pointed(draw, **kw):
    interp = draw(interpretations(**kw))
    return PointedInterpretation(interp, draw(st.sampled_from(interp.domain)))


def powerset(xs):
    xs = list(xs)
    return itertools.chain.from_iterable(itertools.combinations(xs, k) for k in range(len(xs) + 1))
