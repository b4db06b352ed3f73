"""Concept syntax: roles, concept trees, signatures, fragments, parsing and printing.

Concepts are immutable trees built from the ALCQI constructors.  Equality is
structural; semantic equivalence lives in :mod:`dlchar.reason`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional


class ParseError(ValueError):
    """Malformed concept text.  ``pos`` is the character offset of the problem."""

    def __init__(self, message: str, pos: int = -1):
        super().__init__(message if pos < 0 else f"{message} (at position {pos})")
        self.pos = pos


class UnknownNameError(ValueError):
    """A concept or role name that is not part of the attached signature."""

    def __init__(self, name: str, kind: str):
        super().__init__(f"unknown {kind} name {name!r}")
        self.name = name
        self.kind = kind


class FragmentError(ValueError):
    """A concept uses a constructor the requested algorithm does not support."""


@dataclass(frozen=True, order=True)
class Role:
    name: str
    inverse: bool = False

    def inv(self) -> "Role":
        return Role(self.name, not self.inverse)

    def __str__(self) -> str:
        return self.name + ("-" if self.inverse else "")


class Concept:
    """Base class of concept nodes.  Hashes are cached since trees are used as dict keys."""

    __slots__ = ()

    def children(self) -> tuple["Concept", ...]:
        return ()

    def __str__(self) -> str:
        return render_concept(self)


def _cached_hash(obj, fields) -> int:
    h = obj.__dict__.get("_h")
    if h is None:
        h = hash((type(obj).__name__,) + fields)
        object.__setattr__(obj, "_h", h)
    return h


@dataclass(frozen=True, eq=True)
class Top(Concept):
    def __hash__(self):
        return 0x70B


@dataclass(frozen=True, eq=True)
class Bot(Concept):
    def __hash__(self):
        return 0xB07


@dataclass(frozen=True, eq=True)
class Name(Concept):
    name: str

    def __hash__(self):
        return _cached_hash(self, (self.name,))


@dataclass(frozen=True, eq=True)
class Not(Concept):
    arg: Concept

    def children(self):
        return (self.arg,)

    def __hash__(self):
        return _cached_hash(self, (self.arg,))


@dataclass(frozen=True, eq=True)
class And(Concept):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise ValueError("a conjunction needs at least two conjuncts")

    def children(self):
        return self.args

    def __hash__(self):
        return _cached_hash(self, self.args)


@dataclass(frozen=True, eq=True)
class Or(Concept):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise ValueError("a disjunction needs at least two disjuncts")

    def children(self):
        return self.args

    def __hash__(self):
        return _cached_hash(self, self.args)


@dataclass(frozen=True, eq=True)
class Exists(Concept):
    role: Role
    arg: Concept

    def children(self):
        return (self.arg,)

    def __hash__(self):
        return _cached_hash(self, (self.role, self.arg))


@dataclass(frozen=True, eq=True)
class Forall(Concept):
    role: Role
    arg: Concept

    def children(self):
        return (self.arg,)

    def __hash__(self):
        return _cached_hash(self, (self.role, self.arg))


@dataclass(frozen=True, eq=True)
class AtLeast(Concept):
    k: int
    role: Role
    arg: Concept

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"number restriction needs k >= 1, got {self.k!r}")

    def children(self):
        return (self.arg,)

    def __hash__(self):
        return _cached_hash(self, (self.k, self.role, self.arg))


TOP = Top()
BOT = Bot()


def conj(parts: Iterable[Concept]) -> Concept:
    """Conjunction of ``parts``: ``TOP`` when empty, the part itself when single."""
    parts = tuple(parts)
    if not parts:
        return TOP
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Iterable[Concept]) -> Concept:
    parts = tuple(parts)
    if not parts:
        return BOT
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def exists_chain(roles: Iterable[Role], tail: Concept) -> Concept:
    """``exists r1.exists r2. ... tail``."""
    out = tail
    for r in reversed(list(roles)):
        out = Exists(r, out)
    return out


@dataclass(frozen=True)
class Signature:
    concepts: frozenset = frozenset()
    roles: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "concepts", frozenset(self.concepts))
        object.__setattr__(self, "roles", frozenset(self.roles))
        clash = self.concepts & self.roles
        if clash:
            raise ValueError(f"names used both as concept and role: {sorted(clash)}")

    def __or__(self, other: "Signature") -> "Signature":
        return Signature(self.concepts | other.concepts, self.roles | other.roles)

    def to_json(self) -> dict:
        return {"concepts": sorted(self.concepts), "roles": sorted(self.roles)}

    @classmethod
    def from_json(cls, data: dict) -> "Signature":
        return cls(frozenset(data.get("concepts", ())), frozenset(data.get("roles", ())))


OPERATORS = ("exists", "forall", "geq", "inv", "and", "or", "top", "bot", "neg")


@dataclass(frozen=True)
class Fragment:
    """A set of licensed constructors, e.g. ``Fragment.parse("exists,and,top")``."""

    ops: frozenset

    def __post_init__(self):
        ops = frozenset(self.ops)
        bad = ops - set(OPERATORS)
        if bad:
            raise ValueError(f"unknown fragment operators: {sorted(bad)}")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def parse(cls, text: str) -> "Fragment":
        items = [t.strip() for t in text.split(",") if t.strip()]
        return cls(frozenset(items))

    def __contains__(self, op: str) -> bool:
        return op in self.ops

    def __le__(self, other: "Fragment") -> bool:
        return self.ops <= other.ops

    def __str__(self) -> str:
        return ",".join(op for op in OPERATORS if op in self.ops)


FULL = Fragment(frozenset(OPERATORS))
ELQ = Fragment(frozenset({"exists", "geq", "and", "top"}))
EL = Fragment(frozenset({"exists", "and", "top"}))
EL_BOT = Fragment(frozenset({"exists", "and", "top", "bot"}))
ALEQ = Fragment(frozenset({"forall", "exists", "geq", "and", "top"}))


def constructors(c: Concept) -> set[str]:
    """The fragment operators used anywhere in ``c``."""
    used: set[str] = set()
    stack = [c]
    while stack:
        n = stack.pop()
        if isinstance(n, Top):
            used.add("top")
        elif isinstance(n, Bot):
            used.add("bot")
        elif isinstance(n, Not):
            used.add("neg")
        elif isinstance(n, And):
            used.add("and")
        elif isinstance(n, Or):
            used.add("or")
        elif isinstance(n, (Exists, Forall, AtLeast)):
            used.add({Exists: "exists", Forall: "forall", AtLeast: "geq"}[type(n)])
            if n.role.inverse:
                used.add("inv")
        stack.extend(n.children())
    return used


def fragment_check(c: Concept, f: Fragment) -> bool:
    return constructors(c) <= f.ops


def subconcepts(c: Concept) -> Iterator[Concept]:
    """All subterm occurrences, parents before children."""
    stack = [c]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children()))


def signature_of(c: Concept) -> Signature:
    concepts, roles = set(), set()
    for n in subconcepts(c):
        if isinstance(n, Name):
            concepts.add(n.name)
        elif isinstance(n, (Exists, Forall, AtLeast)):
            roles.add(n.role.name)
    return Signature(frozenset(concepts), frozenset(roles))


def number_size(k: int) -> int:
    return math.ceil(math.log2(k + 1))


def depth_nr_size(c: Concept) -> tuple[int, int, int]:
    """Role depth, largest number restriction, and symbol count of ``c``.

    Every constructor, name and role counts one symbol (an inverse mark counts
    one more); a number ``k`` counts its binary length.
    """
    if isinstance(c, (Top, Bot, Name)):
        return 0, 0, 1
    if isinstance(c, Not):
        dp, nr, sz = depth_nr_size(c.arg)
        return dp, nr, sz + 1
    if isinstance(c, (And, Or)):
        parts = [depth_nr_size(a) for a in c.args]
        return (max(p[0] for p in parts), max(p[1] for p in parts),
                sum(p[2] for p in parts) + len(parts) - 1)
    dp, nr, sz = depth_nr_size(c.arg)
    sz += 2 + int(c.role.inverse)
    if isinstance(c, AtLeast):
        return dp + 1, max(nr, c.k), sz + number_size(c.k)
    if isinstance(c, Exists):
        return dp + 1, max(nr, 1), sz
    return dp + 1, nr, sz


def size(c: Concept) -> int:
    return depth_nr_size(c)[2]


def depth(c: Concept) -> int:
    return depth_nr_size(c)[0]


# -- surface syntax -------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<int>[0-9]+)|(?P<op>>=|[!&|().\-]))")
_KEYWORDS = {"top", "bot", "exists", "forall"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Optional[Signature]):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig

    def peek(self):
        return self.toks[self.i]

    def take(self, value: Optional[str] = None, kind: Optional[str] = None):
        tok = self.toks[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = repr(value) if value is not None else kind
            got = repr(tok[1]) if tok[0] != "end" else "end of input"
            raise ParseError(f"expected {want}, got {got}", tok[2])
        self.i += 1
        return tok

    def concept(self) -> Concept:
        parts = [self.conjunction()]
        while self.peek()[1] == "|":
            self.take("|")
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Concept:
        parts = [self.unary()]
        while self.peek()[1] == "&":
            self.take("&")
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def role(self) -> Role:
        _, name, pos = self.take(kind="name")
        if name in _KEYWORDS:
            raise ParseError(f"keyword {name!r} used as role name", pos)
        if self.sig is not None and name not in self.sig.roles:
            raise UnknownNameError(name, "role")
        inverse = False
        if self.peek()[1] == "-":
            self.take("-")
            inverse = True
        return Role(name, inverse)

    def unary(self) -> Concept:
        kind, val, pos = self.peek()
        if val == "!":
            self.take()
            return Not(self.unary())
        if val == ">=":
            self.take()
            _, num, npos = self.take(kind="int")
            if num.startswith("0"):
                raise ParseError("number restriction needs a positive integer", npos)
            r = self.role()
            self.take(".")
            return AtLeast(int(num), r, self.unary())
        if kind == "name" and val in ("exists", "forall"):
            self.take()
            r = self.role()
            self.take(".")
            body = self.unary()
            return Exists(r, body) if val == "exists" else Forall(r, body)
        if kind == "name" and val == "top":
            self.take()
            return TOP
        if kind == "name" and val == "bot":
            self.take()
            return BOT
        if kind == "name":
            self.take()
            if self.sig is not None and val not in self.sig.concepts:
                raise UnknownNameError(val, "concept")
            return Name(val)
        if val == "(":
            self.take()
            inner = self.concept()
            self.take(")")
            return inner
        got = repr(val) if kind != "end" else "end of input"
        raise ParseError(f"unexpected {got}", pos)


def parse_concept(text: str, sig: Optional[Signature] = None) -> Concept:
    """Parse surface syntax such as ``"Bicycle & exists Contains.Battery"``.

    ``!`` and the quantifiers bind tightest, then ``&``, then ``|``.  When a
    signature is given, every name must belong to it.
    """
    p = _Parser(text, sig)
    out = p.concept()
    if p.peek()[0] != "end":
        _, val, pos = p.peek()
        raise ParseError(f"trailing input {val!r}", pos)
    return out


def _wrap(c: Concept) -> str:
    s = render_concept(c)
    return f"({s})" if isinstance(c, (And, Or)) else s


def render_concept(c: Concept) -> str:
    if isinstance(c, Top):
        return "top"
    if isinstance(c, Bot):
        return "bot"
    if isinstance(c, Name):
        return c.name
    if isinstance(c, Not):
        return "!" + _wrap(c.arg)
    if isinstance(c, And):
        return " & ".join(_wrap(a) for a in c.args)
    if isinstance(c, Or):
        return " | ".join(
            f"({render_concept(a)})" if isinstance(a, Or) else render_concept(a) for a in c.args)
    if isinstance(c, Exists):
        return f"exists {c.role}.{_wrap(c.arg)}"
    if isinstance(c, Forall):
        return f"forall {c.role}.{_wrap(c.arg)}"
    if isinstance(c, AtLeast):
        return f">={c.k} {c.role}.{_wrap(c.arg)}"
    raise TypeError(f"not a concept: {c!r}")


def sort_key(c: Concept) -> tuple[int, str]:
    """Canonical ordering: by size, then by rendered text."""
    return size(c), render_concept(c)
