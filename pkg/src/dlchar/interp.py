"""Finite interpretations, labelled examples and model checking."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from dlchar import kernels
from dlchar.core import (
    And, AtLeast, Bot, Concept, Exists, Forall, Name, Not, Or, Role, Signature, Top,
    UnknownNameError, render_concept, subconcepts,
)

INFINITY = math.inf


class Interpretation:
    """A finite structure.  Elements are strings; the value is immutable once built.

    ``signature`` lists the names the structure interprets; names in it that
    are missing from ``concepts``/``roles`` have empty extensions.
    """

    def __init__(self, domain: Iterable[str], concepts: Optional[Mapping[str, Iterable[str]]] = None,
                 roles: Optional[Mapping[str, Iterable[tuple[str, str]]]] = None,
                 signature: Optional[Signature] = None):
        self.domain = tuple(domain)
        if not self.domain:
            raise ValueError("an interpretation needs a nonempty domain")
        self.index = {d: i for i, d in enumerate(self.domain)}
        if len(self.index) != len(self.domain):
            raise ValueError("duplicate element identifiers")
        cext = {a: frozenset(xs) for a, xs in (concepts or {}).items()}
        rext = {r: frozenset((x, y) for x, y in pairs) for r, pairs in (roles or {}).items()}
        for a, xs in cext.items():
            bad = [x for x in xs if x not in self.index]
            if bad:
                raise ValueError(f"concept {a}: elements {sorted(bad)} not in domain")
        for r, pairs in rext.items():
            bad = [p for p in pairs if p[0] not in self.index or p[1] not in self.index]
            if bad:
                raise ValueError(f"role {r}: pairs {sorted(bad)} not over the domain")
        sig = Signature(frozenset(cext), frozenset(rext))
        if signature is not None:
            sig = sig | signature
        self.signature = sig
        self.concepts = {a: cext.get(a, frozenset()) for a in sorted(sig.concepts)}
        self.roles = {r: rext.get(r, frozenset()) for r in sorted(sig.roles)}
        self._labels = None
        self._succ = None

    def __len__(self) -> int:
        return len(self.domain)

    def __repr__(self) -> str:
        return f"Interpretation({len(self.domain)} elements, {sorted(self.signature.concepts)}, {sorted(self.signature.roles)})"

    def _key(self):
        return (frozenset(self.domain), tuple(sorted(self.concepts.items())), tuple(sorted(self.roles.items())))

    def __eq__(self, other) -> bool:
        return isinstance(other, Interpretation) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    # bitset views used by the kernels
    @property
    def label_masks(self) -> list[int]:
        if self._labels is None:
            self._labels = [self.mask(xs) for xs in self.concepts.values()]
        return self._labels

    @property
    def succ_rows(self) -> list[list[int]]:
        """Rows per role slot: ``2*r`` forward, ``2*r+1`` inverse, roles in sorted order."""
        if self._succ is None:
            rows = []
            n = len(self.domain)
            for pairs in self.roles.values():
                fwd, bwd = [0] * n, [0] * n
                for x, y in pairs:
                    i, j = self.index[x], self.index[y]
                    fwd[i] |= 1 << j
                    bwd[j] |= 1 << i
                rows.append(fwd)
                rows.append(bwd)
            self._succ = rows
        return self._succ

    def mask(self, elems: Iterable[str]) -> int:
        m = 0
        for x in elems:
            m |= 1 << self.index[x]
        return m

    def elements(self, mask: int) -> frozenset:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.domain[i])
            mask >>= 1
            i += 1
        return frozenset(out)

    def ext(self, name: str) -> frozenset:
        return self.concepts.get(name, frozenset())

    def successors(self, role: Role, x: str) -> frozenset:
        pairs = self.roles.get(role.name, frozenset())
        if role.inverse:
            return frozenset(a for a, b in pairs if b == x)
        return frozenset(b for a, b in pairs if a == x)

    def restrict(self, keep: Iterable[str]) -> "Interpretation":
        """The sub-interpretation induced by ``keep``."""
        keep = set(keep)
        return Interpretation(
            [d for d in self.domain if d in keep],
            {a: xs & keep for a, xs in self.concepts.items()},
            {r: {(x, y) for x, y in ps if x in keep and y in keep} for r, ps in self.roles.items()},
            self.signature)

    def with_signature(self, sig: Signature) -> "Interpretation":
        return Interpretation(self.domain, self.concepts, self.roles, self.signature | sig)

    def is_subinterpretation_of(self, other: "Interpretation") -> bool:
        if not set(self.domain) <= set(other.domain):
            return False
        if any(not xs <= other.ext(a) for a, xs in self.concepts.items()):
            return False
        return all(ps <= other.roles.get(r, frozenset()) for r, ps in self.roles.items())

    def to_json(self) -> dict:
        return {
            "domain": list(self.domain),
            "concepts": {a: sorted(xs, key=self.index.get) for a, xs in self.concepts.items()},
            "roles": {r: sorted(([x, y] for x, y in ps), key=lambda p: (self.index[p[0]], self.index[p[1]]))
                      for r, ps in self.roles.items()},
        }

    @classmethod
    def from_json(cls, data: dict, signature: Optional[Signature] = None) -> "Interpretation":
        return cls(data["domain"], data.get("concepts", {}),
                   {r: [tuple(p) for p in ps] for r, ps in data.get("roles", {}).items()}, signature)


@dataclass(frozen=True)
class PointedInterpretation:
    interp: Interpretation
    point: str

    def __post_init__(self):
        if self.point not in self.interp.index:
            raise ValueError(f"point {self.point!r} not in the domain")

    def __len__(self) -> int:
        return len(self.interp)

    def to_json(self) -> dict:
        data = self.interp.to_json()
        data["point"] = self.point
        return data

    @classmethod
    def from_json(cls, data: dict, signature: Optional[Signature] = None) -> "PointedInterpretation":
        if "point" not in data:
            raise ValueError("pointed interpretation needs a 'point'")
        return cls(Interpretation.from_json(data, signature), data["point"])


@dataclass
class ExampleSet:
    positives: list = field(default_factory=list)
    negatives: list = field(default_factory=list)
    signature: Optional[Signature] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.positives) + len(self.negatives)

    def labelled(self) -> list[tuple[PointedInterpretation, bool]]:
        return [(p, True) for p in self.positives] + [(p, False) for p in self.negatives]

    def duplicates(self) -> list[tuple[bool, int]]:
        """(polarity, index) of examples repeating an earlier one."""
        seen = set()
        out = []
        for pol, group in ((True, self.positives), (False, self.negatives)):
            for i, pi in enumerate(group):
                key = (pi.interp, pi.point)
                if key in seen:
                    out.append((pol, i))
                seen.add(key)
        return out

    def to_json(self) -> dict:
        sig = self.signature
        if sig is None:
            sig = Signature()
            for pi, _ in self.labelled():
                sig = sig | pi.interp.signature
        return {"signature": sig.to_json(),
                "positive": [p.to_json() for p in self.positives],
                "negative": [p.to_json() for p in self.negatives]}

    @classmethod
    def from_json(cls, data: dict) -> "ExampleSet":
        sig = Signature.from_json(data["signature"]) if "signature" in data else None
        return cls([PointedInterpretation.from_json(p, sig) for p in data.get("positive", [])],
                   [PointedInterpretation.from_json(p, sig) for p in data.get("negative", [])], sig)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


class InterpretationBuilder:
    """Incremental construction helper for the builders in other modules."""

    def __init__(self, signature: Optional[Signature] = None):
        self.domain: list[str] = []
        self.labels: dict[str, set] = {}
        self.edges: dict[str, set] = {}
        self.signature = signature

    def add(self, x: str, atoms: Iterable[str] = ()) -> str:
        if x not in self.labels.setdefault("\0", set()):
            self.labels["\0"].add(x)
            self.domain.append(x)
        for a in atoms:
            self.labels.setdefault(a, set()).add(x)
        return x

    def edge(self, role: str, x: str, y: str) -> None:
        self.edges.setdefault(role, set()).add((x, y))

    def copy_in(self, interp: Interpretation, prefix: str) -> dict[str, str]:
        """Add a disjoint copy of ``interp``; returns the element renaming."""
        ren = {d: prefix + d for d in interp.domain}
        for d in interp.domain:
            self.add(ren[d])
        for a, xs in interp.concepts.items():
            for x in xs:
                self.labels.setdefault(a, set()).add(ren[x])
        for r, ps in interp.roles.items():
            self.edges.setdefault(r, set())
            for x, y in ps:
                self.edges[r].add((ren[x], ren[y]))
        return ren

    def build(self) -> Interpretation:
        concepts = {a: xs for a, xs in self.labels.items() if a != "\0"}
        return Interpretation(self.domain, concepts, self.edges, self.signature)


# -- compilation to kernel programs ---------------------------------------

class _Compiler:
    def __init__(self, label_index: Mapping[str, int], role_index: Mapping[str, int], strict: bool):
        self.label_index = label_index
        self.role_index = role_index
        self.strict = strict
        self.ops: list[int] = []
        self.xs: list[int] = []
        self.ys: list[int] = []
        self.zs: list[int] = []
        self.memo: dict = {}

    def emit(self, key, op, x=0, y=0, z=0) -> int:
        i = self.memo.get(key)
        if i is None:
            i = len(self.ops)
            self.ops.append(op)
            self.xs.append(x)
            self.ys.append(y)
            self.zs.append(z)
            self.memo[key] = i
        return i

    def slot(self, role: Role) -> int:
        r = self.role_index.get(role.name)
        if r is None:
            if self.strict:
                raise UnknownNameError(role.name, "role")
            return -1
        return 2 * r + int(role.inverse)

    def add(self, c: Concept) -> int:
        # iterative post-order, so deep concepts do not hit the recursion limit
        done = self.memo
        stack = [(c, False)]
        while stack:
            node, expanded = stack.pop()
            if node in done:
                continue
            if not expanded:
                stack.append((node, True))
                stack.extend((ch, False) for ch in node.children() if ch not in done)
                continue
            self._emit_node(node)
        return done[c]

    def _emit_node(self, c: Concept) -> None:
        K = kernels
        if isinstance(c, Top):
            self.emit(c, K.TOP)
        elif isinstance(c, Bot):
            self.emit(c, K.BOT)
        elif isinstance(c, Name):
            idx = self.label_index.get(c.name)
            if idx is None and self.strict:
                raise UnknownNameError(c.name, "concept")
            self.emit(c, K.NAME, -1 if idx is None else idx)
        elif isinstance(c, Not):
            self.emit(c, K.NOT, self.memo[c.arg])
        elif isinstance(c, (And, Or)):
            op = K.AND if isinstance(c, And) else K.OR
            acc = self.memo[c.args[0]]
            for i, a in enumerate(c.args[1:], start=2):
                key = c if i == len(c.args) else ("chain", c, i)
                acc = self.emit(key, op, acc, self.memo[a])
        else:
            s = self.slot(c.role)
            child = self.memo[c.arg]
            if s < 0:
                # role with empty extension
                if isinstance(c, Forall):
                    self.emit(c, K.TOP)
                else:
                    self.emit(c, K.BOT)
            elif isinstance(c, Exists):
                self.emit(c, K.EXISTS, s, child)
            elif isinstance(c, Forall):
                self.emit(c, K.FORALL, s, child)
            else:
                self.emit(c, K.ATLEAST, s, child, c.k)

    def program(self):
        return self.ops, self.xs, self.ys, self.zs


def _index_of(interp: Interpretation):
    return ({a: i for i, a in enumerate(interp.concepts)},
            {r: i for i, r in enumerate(interp.roles)})


def eval_masks(concepts: Sequence[Concept], interp: Interpretation, strict: bool = True) -> list[int]:
    """Extensions of several concepts as bitmasks, sharing common subterms."""
    labels, roles = _index_of(interp)
    comp = _Compiler(labels, roles, strict)
    roots = [comp.add(c) for c in concepts]
    out = kernels.eval_program(*comp.program(), len(interp), interp.label_masks, interp.succ_rows)
    return [out[r] for r in roots]


def eval_concept(c: Concept, interp: Interpretation, strict: bool = True) -> frozenset:
    """``c`` evaluated bottom-up in ``interp``; returns the set of elements."""
    return interp.elements(eval_masks([c], interp, strict)[0])


def holds_at(c: Concept, pi: PointedInterpretation, strict: bool = True) -> bool:
    return bool(eval_masks([c], pi.interp, strict)[0] >> pi.interp.index[pi.point] & 1)


@dataclass(frozen=True)
class FitResult:
    ok: bool
    positive: Optional[bool] = None
    index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def _group_by_interp(examples: Sequence[PointedInterpretation]):
    groups: dict[int, list[int]] = {}
    interps: dict[int, Interpretation] = {}
    for i, pi in enumerate(examples):
        groups.setdefault(id(pi.interp), []).append(i)
        interps[id(pi.interp)] = pi.interp
    return [(interps[k], idx) for k, idx in groups.items()]


def point_truth(concepts: Sequence[Concept], examples: Sequence[PointedInterpretation],
                strict: bool = False) -> list[list[bool]]:
    """``table[j][i]`` is whether ``concepts[j]`` holds at the point of ``examples[i]``."""
    table = [[False] * len(examples) for _ in concepts]
    for interp, idx in _group_by_interp(examples):
        masks = eval_masks(concepts, interp, strict)
        for j, m in enumerate(masks):
            row = table[j]
            for i in idx:
                row[i] = bool(m >> interp.index[examples[i].point] & 1)
    return table


def fits(c: Concept, e: ExampleSet, strict: bool = False) -> FitResult:
    """Whether ``c`` holds at every positive and at no negative point."""
    pos = point_truth([c], e.positives, strict)[0]
    for i, v in enumerate(pos):
        if not v:
            return FitResult(False, True, i)
    neg = point_truth([c], e.negatives, strict)[0]
    for i, v in enumerate(neg):
        if v:
            return FitResult(False, False, i)
    return FitResult(True)


def fitting_mask(concepts: Sequence[Concept], e: ExampleSet) -> list[bool]:
    """Batch version of :func:`fits`."""
    pos = point_truth(concepts, e.positives)
    neg = point_truth(concepts, e.negatives)
    return [all(p) and not any(q) for p, q in zip(pos, neg)]


# -- simulations and heights ----------------------------------------------

def greatest_simulation(i1: Interpretation, i2: Interpretation) -> frozenset:
    """The largest simulation from ``i1`` into ``i2`` as a set of element pairs.

    Atoms of ``i1`` must be preserved, and every role edge of ``i1`` must be
    matched forward in ``i2``.
    """
    names = sorted(set(i1.concepts) | set(i2.concepts))
    lab1 = [0] * len(i1)
    lab2 = [0] * len(i2)
    for b, a in enumerate(names):
        for x in i1.ext(a):
            lab1[i1.index[x]] |= 1 << b
        for y in i2.ext(a):
            lab2[i2.index[y]] |= 1 << b
    succ1, succ2 = [], []
    roles2 = list(i2.roles)
    for r, pairs in i1.roles.items():
        if not pairs:
            continue
        succ1.append(i1.succ_rows[2 * list(i1.roles).index(r)])
        succ2.append(i2.succ_rows[2 * roles2.index(r)] if r in i2.roles else [0] * len(i2))
    z = kernels.greatest_simulation(len(i1), lab1, succ1, len(i2), lab2, succ2)
    return frozenset((x, y) for x, m in zip(i1.domain, z) for y in i2.elements(m))


def simulates(i1: Interpretation, d1: str, i2: Interpretation, d2: str) -> bool:
    return (d1, d2) in greatest_simulation(i1, i2)


def is_simulation(z: Iterable[tuple[str, str]], i1: Interpretation, i2: Interpretation) -> bool:
    z = set(z)
    for x, y in z:
        if any(x in xs and y not in i2.ext(a) for a, xs in i1.concepts.items()):
            return False
        for r, pairs in i1.roles.items():
            for x2 in (b for a, b in pairs if a == x):
                if not any((x2, y2) in z for y2 in i2.successors(Role(r), y)):
                    return False
    return True


def height_wrt_role(pi: PointedInterpretation, role: str):
    """Length of the longest ``role`` path from the point; ``INFINITY`` if a cycle is reachable."""
    interp = pi.interp
    succ = {x: [] for x in interp.domain}
    for x, y in interp.roles.get(role, ()):
        succ[x].append(y)
    height: dict[str, float] = {}
    on_stack: set[str] = set()
    # iterative DFS computing longest paths; a back edge means a reachable cycle
    stack = [(pi.point, 0)]
    on_stack.add(pi.point)
    while stack:
        x, i = stack[-1]
        if i < len(succ[x]):
            stack[-1] = (x, i + 1)
            y = succ[x][i]
            if y in on_stack:
                return INFINITY
            if y not in height:
                on_stack.add(y)
                stack.append((y, 0))
            continue
        stack.pop()
        on_stack.discard(x)
        height[x] = max((height[y] + 1 for y in succ[x]), default=0)
        if height[x] == INFINITY:
            return INFINITY
    return int(height[pi.point])


def height_concept(role: Role, n: int) -> Concept:
    """A concept true exactly at points whose ``role``-height is ``n``."""
    no_succ = Forall(role, Bot())
    bounded = Bot()
    for _ in range(n + 1):
        bounded = Forall(role, bounded)
    reach = no_succ
    for _ in range(n):
        reach = Exists(role, reach)
    return And((bounded, reach)) if bounded != reach else bounded


# -- structures produced by the exhaustive sweep --------------------------

def decode_structure(code: int, n: int, labels: Sequence[str], roles: Sequence[str],
                     signature: Optional[Signature] = None) -> PointedInterpretation:
    """Turn a sweep code back into a pointed interpretation with point ``e0``."""
    lbits = len(labels) * n
    lcode, ecode = code & ((1 << lbits) - 1), code >> lbits
    dom = [f"e{i}" for i in range(n)]
    concepts = {a: [dom[x] for x in range(n) if lcode >> (l * n + x) & 1] for l, a in enumerate(labels)}
    rel = {}
    for r, name in enumerate(roles):
        rel[name] = [(dom[x], dom[y]) for x in range(n) for y in range(n)
                     if ecode >> (r * n * n + x * n + y) & 1]
    sig = Signature(frozenset(labels), frozenset(roles))
    if signature is not None:
        sig = sig | signature
    return PointedInterpretation(Interpretation(dom, concepts, rel, sig), "e0")


def describe(pi: PointedInterpretation) -> str:
    """One-line human-readable rendering of a small pointed interpretation."""
    interp = pi.interp
    parts = []
    for d in interp.domain:
        atoms = [a for a, xs in interp.concepts.items() if d in xs]
        mark = "*" if d == pi.point else ""
        parts.append(f"{mark}{d}{{{','.join(atoms)}}}")
    edges = [f"{x}-{r}->{y}" for r, ps in interp.roles.items() for x, y in sorted(ps)]
    return " ".join(parts) + (" | " + " ".join(edges) if edges else "")


def names_used(concepts: Iterable[Concept]) -> Signature:
    cs, rs = set(), set()
    for c in concepts:
        for n in subconcepts(c):
            if isinstance(n, Name):
                cs.add(n.name)
            elif isinstance(n, (Exists, Forall, AtLeast)):
                rs.add(n.role.name)
    return Signature(frozenset(cs), frozenset(rs))


__all__ = [
    "INFINITY", "Interpretation", "PointedInterpretation", "ExampleSet", "InterpretationBuilder",
    "FitResult", "eval_concept", "eval_masks", "holds_at", "fits", "fitting_mask", "point_truth",
    "greatest_simulation", "simulates", "is_simulation", "height_wrt_role", "height_concept",
    "decode_structure", "describe", "names_used", "render_concept",
]
