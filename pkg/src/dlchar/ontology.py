"""DL-Lite ontologies: parsing, named form, reasoning over basic concepts,
satisfiability and canonical models of EL concepts."""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Iterable, Optional

from dlchar.core import (
    TOP, And, Bot, Concept, Exists, FragmentError, Name, Not, Or, ParseError, Role, Signature, Top,
    render_concept, signature_of,
)
from dlchar.interp import (
    Interpretation, InterpretationBuilder, PointedInterpretation, holds_at, simulates,
)


class UnsatisfiableError(ValueError):
    """The concept has no model of the ontology."""


@dataclass(frozen=True)
class Basic:
    """A basic concept: a concept name, or ``exists S`` for a possibly inverse role."""

    atom: Optional[str] = None
    role: Optional[Role] = None

    def __post_init__(self):
        if (self.atom is None) == (self.role is None):
            raise ValueError("a basic concept is either a name or an existential")

    @classmethod
    def of(cls, name: str) -> "Basic":
        return cls(atom=name)

    @classmethod
    def ex(cls, role: Role) -> "Basic":
        return cls(role=role)

    def concept(self) -> Concept:
        return Name(self.atom) if self.atom is not None else Exists(self.role, TOP)

    def key(self) -> tuple:
        return (0, self.atom, False) if self.atom is not None else (1, self.role.name, self.role.inverse)

    def __str__(self) -> str:
        return self.atom if self.atom is not None else f"exists {self.role}"


@dataclass(frozen=True)
class CI:
    lhs: Basic
    rhs: Basic
    negated: bool = False

    def as_universal(self) -> Concept:
        """A concept that is the whole domain exactly in models of this inclusion."""
        rhs = self.rhs.concept()
        return Or((Not(self.lhs.concept()), Not(rhs) if self.negated else rhs))

    def __str__(self) -> str:
        return f"{self.lhs} <= {'!' if self.negated else ''}{self.rhs}"


@dataclass(frozen=True)
class DLLiteOntology:
    cis: tuple = ()
    signature: Signature = Signature()

    def __post_init__(self):
        object.__setattr__(self, "cis", tuple(self.cis))
        names, roles = set(self.signature.concepts), set(self.signature.roles)
        for ci in self.cis:
            for b in (ci.lhs, ci.rhs):
                if b.atom is not None:
                    names.add(b.atom)
                else:
                    roles.add(b.role.name)
        object.__setattr__(self, "signature", Signature(frozenset(names), frozenset(roles)))

    def __len__(self) -> int:
        return len(self.cis)

    def to_text(self) -> str:
        return "".join(f"{ci}\n" for ci in self.cis)


EMPTY = DLLiteOntology()

_OTOK = re.compile(r"\s*(?:(<=)|(!)|(-)|(\.)|([A-Za-z][A-Za-z0-9_]*))")


def _parse_basic(toks: list[str], i: int, sig: Optional[Signature], where: str) -> tuple[Basic, int]:
    if i >= len(toks):
        raise ParseError(f"missing basic concept on the {where}")
    tok = toks[i]
    if tok == "exists":
        if i + 1 >= len(toks) or not re.match(r"[A-Za-z]", toks[i + 1]):
            raise ParseError("expected a role name after 'exists'")
        name = toks[i + 1]
        if sig is not None and name not in sig.roles:
            raise ParseError(f"unknown role name {name!r}")
        i += 2
        inverse = False
        if i < len(toks) and toks[i] == "-":
            inverse = True
            i += 1
        if i + 1 < len(toks) and toks[i] == "." and toks[i + 1] == "top":
            i += 2
        return Basic.ex(Role(name, inverse)), i
    if not re.match(r"[A-Za-z]", tok) or tok in ("top", "bot", "forall"):
        raise ParseError(f"unexpected {tok!r} on the {where}")
    if i + 1 < len(toks) and toks[i + 1] == "-":
        raise ParseError("role inclusions are not supported")
    if sig is not None:
        if tok in sig.roles:
            raise ParseError("role inclusions are not supported")
        if tok not in sig.concepts:
            raise ParseError(f"unknown concept name {tok!r}")
    return Basic.of(tok), i + 1


def parse_ontology(text: str, sig: Optional[Signature] = None) -> DLLiteOntology:
    """Parse one inclusion per line: ``B <= B'`` or ``B <= !B'``; ``#`` starts a comment line."""
    cis = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        toks, pos = [], 0
        while pos < len(line):
            m = _OTOK.match(line, pos)
            if m is None:
                if line[pos:].strip() == "":
                    break
                raise ParseError(f"line {lineno}: unexpected character {line[pos]!r}", pos)
            toks.append(m.group(m.lastindex))
            pos = m.end()
        try:
            lhs, i = _parse_basic(toks, 0, sig, "left")
            if i >= len(toks) or toks[i] != "<=":
                raise ParseError("expected '<='")
            negated = i + 1 < len(toks) and toks[i + 1] == "!"
            rhs, j = _parse_basic(toks, i + 1 + int(negated), sig, "right")
            if j != len(toks):
                raise ParseError(f"trailing input {' '.join(toks[j:])!r}")
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        cis.append(CI(lhs, rhs, negated))
    return DLLiteOntology(tuple(cis), sig or Signature())


def load_ontology(path: str) -> DLLiteOntology:
    with open(path, encoding="utf-8") as fh:
        return parse_ontology(fh.read())


def basics_over(sig: Signature) -> list[Basic]:
    out = [Basic.of(a) for a in sorted(sig.concepts)]
    for r in sorted(sig.roles):
        out.append(Basic.ex(Role(r)))
        out.append(Basic.ex(Role(r, True)))
    return out


# -- named form -------------------------------------------------------------

def _fresh(base: str, taken: set) -> str:
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}_{i}"
    taken.add(name)
    return name


def named_form(o: DLLiteOntology) -> tuple[DLLiteOntology, Signature]:
    """Equivalent ontology (conservative extension) where each inclusion mentions a concept name.

    Every ``exists S`` over the roles of ``o`` gets a fresh name ``A_exists_S``
    (``A_exists_S_inv`` for inverses) defined by two inclusions.
    """
    taken = set(o.signature.concepts) | set(o.signature.roles)
    fresh: dict[Role, str] = {}
    for r in sorted(o.signature.roles):
        fresh[Role(r)] = _fresh(f"A_exists_{r}", taken)
        fresh[Role(r, True)] = _fresh(f"A_exists_{r}_inv", taken)

    def rename(b: Basic) -> Basic:
        return Basic.of(fresh[b.role]) if b.role is not None else b

    cis = []
    for r in sorted(o.signature.roles):
        for s in (Role(r), Role(r, True)):
            cis.append(CI(Basic.ex(s), Basic.of(fresh[s])))
            cis.append(CI(Basic.of(fresh[s]), Basic.ex(s)))
    cis.extend(CI(rename(ci.lhs), rename(ci.rhs), ci.negated) for ci in o.cis)
    sig = o.signature | Signature(frozenset(fresh.values()), frozenset())
    return DLLiteOntology(tuple(cis), sig), sig


def is_named_form(o: DLLiteOntology) -> bool:
    return all(ci.lhs.atom is not None or ci.rhs.atom is not None for ci in o.cis)


# -- reasoning over basic concepts ----------------------------------------

class _Reasoner:
    """Closure of the inclusion graph, entailed disjointness and unsatisfiable basics."""

    def __init__(self, o: DLLiteOntology):
        self.o = o
        self.basics = basics_over(o.signature)
        graph = {b: {b} for b in self.basics}
        self.disjoint: set[frozenset] = set()
        for ci in o.cis:
            if ci.negated:
                self.disjoint.add(frozenset((ci.lhs, ci.rhs)))
            else:
                graph[ci.lhs].add(ci.rhs)
        self.up: dict[Basic, frozenset] = {}
        for b in self.basics:
            seen, todo = {b}, [b]
            while todo:
                for nxt in graph[todo.pop()]:
                    if nxt not in seen:
                        seen.add(nxt)
                        todo.append(nxt)
            self.up[b] = frozenset(seen)
        unsat: set[Basic] = set()
        changed = True
        while changed:
            changed = False
            for b in self.basics:
                if b in unsat:
                    continue
                ups = self.up[b]
                bad = bool(ups & unsat)
                if not bad and b.role is not None and Basic.ex(b.role.inv()) in unsat:
                    bad = True
                if not bad:
                    bad = any(frozenset((x, y)) in self.disjoint for x in ups for y in ups)
                if bad:
                    unsat.add(b)
                    changed = True
        self.unsat = frozenset(unsat)

    def _up(self, b: Basic) -> frozenset:
        return self.up.get(b, frozenset([b]))

    def entails(self, b1: Basic, b2: Basic, negated: bool = False) -> bool:
        if b1 in self.unsat:
            return True
        if not negated:
            return b2 in self._up(b1)
        if b2 in self.unsat:
            return True
        u1, u2 = self._up(b1), self._up(b2)
        return any(frozenset((x, y)) in self.disjoint for x in u1 for y in u2)

    def consistent(self, bs: Iterable[Basic]) -> bool:
        bs = list(bs)
        if any(b in self.unsat for b in bs):
            return False
        return not any(self.entails(x, y, True) for i, x in enumerate(bs) for y in bs[i:])

    def entailed_by(self, bs: Iterable[Basic], target: Basic) -> bool:
        """Whether a satisfiable conjunction of basics entails ``target``."""
        return any(self.entails(b, target) for b in bs)


@functools.lru_cache(maxsize=256)
def reasoner(o: DLLiteOntology) -> _Reasoner:
    return _Reasoner(o)


def basic_entails(o: DLLiteOntology, b1: Basic, b2: Basic, negated: bool = False) -> bool:
    """Decide ``O |= B1 <= B2`` (or ``O |= B1 <= !B2`` when ``negated``)."""
    return reasoner(o).entails(b1, b2, negated)


def basic_satisfiable(o: DLLiteOntology, b: Basic) -> bool:
    return b not in reasoner(o).unsat


# -- EL concepts relative to an ontology ----------------------------------

def _decompose(c: Concept) -> tuple[list[str], list[tuple[Role, Concept]], bool]:
    atoms: list[str] = []
    exs: list[tuple[Role, Concept]] = []
    bot = False
    stack = [c]
    while stack:
        x = stack.pop()
        if isinstance(x, And):
            stack.extend(reversed(x.args))
        elif isinstance(x, Top):
            pass
        elif isinstance(x, Bot):
            bot = True
        elif isinstance(x, Name):
            atoms.append(x.name)
        elif isinstance(x, Exists):
            exs.append((x.role, x.arg))
        else:
            raise FragmentError(f"{render_concept(x)} is outside L(exists,&,top,bot)")
    return atoms, exs, bot


def satisfiable_wrt(c: Concept, o: DLLiteOntology) -> bool:
    """Whether ``c`` in L(exists,&,top,bot) has a model of ``o``."""
    rs = reasoner(o)

    def sat(x: Concept, extra: Optional[Basic]) -> bool:
        atoms, exs, bot = _decompose(x)
        if bot:
            return False
        roots = [Basic.of(a) for a in atoms] + [Basic.ex(r) for r, _ in exs]
        if extra is not None:
            roots.append(extra)
        if not rs.consistent(roots):
            return False
        return all(sat(child, Basic.ex(r.inv())) for r, child in exs)

    return sat(c, None)


@dataclass
class _Node:
    ident: str
    atoms: list
    out: list  # (Role, child ident)
    incoming: Optional[Role]


def _tree_nodes(c: Concept) -> list[_Node]:
    nodes: list[_Node] = []

    def build(x: Concept, ident: str, incoming: Optional[Role]):
        atoms, exs, bot = _decompose(x)
        if bot:
            raise FragmentError("bot has no tree interpretation")
        node = _Node(ident, sorted(set(atoms)), [], incoming)
        nodes.append(node)
        for i, (r, child) in enumerate(exs):
            cid = f"{ident}.{i}"
            node.out.append((r, cid))
            build(child, cid, r)

    build(c, "d", None)
    return nodes


def tree_interpretation(c: Concept, signature: Optional[Signature] = None) -> PointedInterpretation:
    """The tree-shaped interpretation of ``c``: one node per existential subterm, root ``d``."""
    b = InterpretationBuilder(signature_of(c) | (signature or Signature()))
    for node in _tree_nodes(c):
        b.add(node.ident, node.atoms)
        for r, cid in node.out:
            if r.inverse:
                b.edge(r.name, cid, node.ident)
            else:
                b.edge(r.name, node.ident, cid)
    return PointedInterpretation(b.build(), "d")


def sig_element(s: Role) -> str:
    return f"d_exists_{s}"


@functools.lru_cache(maxsize=4096)
def canonical_model(c: Concept, o: DLLiteOntology) -> PointedInterpretation:
    """The canonical model of ``c`` and ``o``, pointed at the root ``d``.

    It extends the tree interpretation of ``c`` with one element per satisfiable
    ``exists S`` over the roles of ``o``; labels and extra edges follow from
    what ``o`` entails about each element.
    """
    if any(r.inverse for n in _iter_roles(c) for r in [n]):
        raise FragmentError("canonical models are built for concepts without inverse roles")
    if not satisfiable_wrt(c, o):
        raise UnsatisfiableError(f"{render_concept(c)} is unsatisfiable w.r.t. the ontology")
    rs = reasoner(o)
    sig = signature_of(c) | o.signature
    nodes = _tree_nodes(c)
    roots: dict[str, list[Basic]] = {}
    for node in nodes:
        bs = [Basic.of(a) for a in node.atoms] + [Basic.ex(r) for r, _ in node.out]
        if node.incoming is not None:
            bs.append(Basic.ex(node.incoming.inv()))
        roots[node.ident] = bs
    for r in sorted(o.signature.roles):
        for s in (Role(r), Role(r, True)):
            if basic_satisfiable(o, Basic.ex(s)):
                roots[sig_element(s)] = [Basic.ex(s)]
    b = InterpretationBuilder(sig)
    for ident, bs in roots.items():
        atoms = {x.atom for x in bs if x.atom is not None}
        atoms |= {a for a in sorted(sig.concepts) if rs.entailed_by(bs, Basic.of(a))}
        b.add(ident, sorted(atoms))
    for node in nodes:
        for r, cid in node.out:
            b.edge(r.name, node.ident, cid)
    for r in sorted(o.signature.roles):
        fwd, bwd = Role(r), Role(r, True)
        for ident, bs in roots.items():
            if sig_element(bwd) in roots and rs.entailed_by(bs, Basic.ex(fwd)):
                b.edge(r, ident, sig_element(bwd))
            if sig_element(fwd) in roots and rs.entailed_by(bs, Basic.ex(bwd)):
                b.edge(r, sig_element(fwd), ident)
    return PointedInterpretation(b.build(), "d")


def _iter_roles(c: Concept):
    from dlchar.core import subconcepts
    for n in subconcepts(c):
        if isinstance(n, Exists):
            yield n.role
        elif not isinstance(n, (And, Top, Bot, Name)):
            raise FragmentError(f"{render_concept(n)} is outside L(exists,&,top)")


def el_subsumes_wrt(c: Concept, d: Concept, o: DLLiteOntology, route: str = "eval") -> bool:
    """Decide ``O |= c <= d`` for satisfiable EL concepts via the canonical model of ``c``.

    ``route="eval"`` evaluates ``d`` at the root (inverse roles in ``d`` are
    fine); ``route="simulation"`` looks for a simulation of the canonical model
    of ``d`` into that of ``c``; ``route="both"`` computes both and insists
    they agree.
    """
    can_c = canonical_model(c, o)
    by_eval = by_sim = None
    if route in ("eval", "both"):
        by_eval = holds_at(d, can_c, strict=False)
    if route in ("simulation", "both"):
        can_d = canonical_model(d, o)
        by_sim = simulates(can_d.interp, can_d.point, can_c.interp, can_c.point)
    if route == "both":
        if by_eval != by_sim:
            raise AssertionError(f"routes disagree on {render_concept(c)} <= {render_concept(d)}")
        return by_eval
    if route == "eval":
        return by_eval
    if route == "simulation":
        return by_sim
    raise ValueError(f"unknown route {route!r}")


def el_subsumes_wrt_any(c: Concept, d: Concept, o: DLLiteOntology) -> bool:
    """Like :func:`el_subsumes_wrt` but also accepts unsatisfiable concepts and ``bot``."""
    if not satisfiable_wrt(c, o):
        return True
    if not satisfiable_wrt(d, o):
        return False
    return el_subsumes_wrt(c, d, o)


def el_equivalent_wrt(c: Concept, d: Concept, o: DLLiteOntology) -> bool:
    return el_subsumes_wrt_any(c, d, o) and el_subsumes_wrt_any(d, c, o)


def basic_extension(interp: Interpretation, b: Basic) -> frozenset:
    if b.atom is not None:
        return interp.ext(b.atom)
    pairs = interp.roles.get(b.role.name, frozenset())
    return frozenset(y if b.role.inverse else x for x, y in pairs)


def satisfies_ontology(interp: Interpretation, o: DLLiteOntology) -> bool:
    """Whether every inclusion of ``o`` holds in ``interp``."""
    for ci in o.cis:
        lhs, rhs = basic_extension(interp, ci.lhs), basic_extension(interp, ci.rhs)
        if ci.negated and lhs & rhs:
            return False
        if not ci.negated and not lhs <= rhs:
            return False
    return True


__all__ = [
    "Basic", "CI", "DLLiteOntology", "EMPTY", "UnsatisfiableError", "parse_ontology",
    "load_ontology", "named_form", "is_named_form", "basic_entails", "basic_satisfiable",
    "basics_over", "reasoner", "satisfiable_wrt", "tree_interpretation", "canonical_model",
    "el_subsumes_wrt", "el_subsumes_wrt_any", "el_equivalent_wrt", "satisfies_ontology",
    "basic_extension", "sig_element",
]
