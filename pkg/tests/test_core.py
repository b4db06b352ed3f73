import pytest
from hypothesis import given, settings

from dlchar.core import (
    BOT, FULL, TOP, And, AtLeast, Exists, Forall, Fragment, Name, Or, ParseError, Role,
    Signature, UnknownNameError, depth, depth_nr_size, fragment_check, parse_concept, render_concept,
    size, subconcepts,
)

from oracles import concepts

R = Role("R")


def test_parse_ebike():
    c = parse_concept("Bicycle & exists Contains.Battery")
    assert c == And((Name("Bicycle"), Exists(Role("Contains"), Name("Battery"))))


def test_parse_constants_and_inverse():
    assert parse_concept("top") == TOP
    assert parse_concept("bot") == BOT
    assert parse_concept(">=2 R-.A") == AtLeast(2, Role("R", True), Name("A"))


def test_precedence():
    # ! and quantifiers bind tighter than &, which binds tighter than |
    c = parse_concept("A | B & !A")
    assert isinstance(c, Or) and isinstance(c.args[1], And)
    c = parse_concept("exists R.A & B")
    assert isinstance(c, And) and c.args[0] == Exists(R, Name("A"))


@pytest.mark.parametrize("text", ["", "A &", "exists R A", ">=0 R.A", "(A", "A B", ">=x R.A"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_concept(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_concept("A & & B")
    assert "4" in str(exc.value) or "position" in str(exc.value)


def test_unknown_names():
    sig = Signature(frozenset({"A"}), frozenset({"R"}))
    with pytest.raises(UnknownNameError, match="B"):
        parse_concept("A & B", sig)
    with pytest.raises(UnknownNameError, match="S"):
        parse_concept("exists S.A", sig)
    assert parse_concept("exists R.A", sig) == Exists(R, Name("A"))


def test_render():
    assert render_concept(And((Name("A"), Name("B")))) == "A & B"
    assert render_concept(AtLeast(1, R, TOP)) == ">=1 R.top"
    assert render_concept(Exists(R, And((Name("A"), Name("B"))))) == "exists R.(A & B)"


def test_depth_nr_size():
    assert depth_nr_size(Name("A")) == (0, 0, 1)
    dp, nr, _ = depth_nr_size(AtLeast(2, R, Exists(R, TOP)))
    assert (dp, nr) == (2, 2)
    assert depth(parse_concept("Bicycle & exists Contains.Battery")) == 1


@pytest.mark.parametrize("text,expected", [
    ("A", 1), ("!A", 2), ("A & B", 3), ("A & B & A", 5), ("exists R.A", 3), ("exists R-.A", 4),
    ("forall R.top", 3), (">=1 R.A", 4), (">=2 R.A", 5), (">=3 R.A", 5), (">=4 R.A", 6),
])
def test_size_convention(text, expected):
    assert size(parse_concept(text)) == expected


def test_nr_counts_exists_as_one():
    assert depth_nr_size(parse_concept("exists R.A"))[1] == 1
    assert depth_nr_size(parse_concept("forall R.A"))[1] == 0


def test_fragment_check():
    assert fragment_check(Exists(R, Name("A")), Fragment.parse("exists,and"))
    assert not fragment_check(AtLeast(2, R, TOP), Fragment.parse("exists,and"))
    assert fragment_check(Forall(Role("R", True), TOP), Fragment.parse("forall,inv,top"))
    assert not fragment_check(Forall(Role("R", True), TOP), Fragment.parse("forall,top"))


def test_fragment_parse_rejects_unknown():
    with pytest.raises(ValueError):
        Fragment.parse("exists,xor")


def test_constructor_invariants():
    with pytest.raises(ValueError):
        AtLeast(0, R, TOP)
    with pytest.raises(ValueError):
        And((Name("A"),))
    with pytest.raises(ValueError):
        Signature(frozenset({"A"}), frozenset({"A"}))


@settings(max_examples=200)
@given(concepts(inverse=True))
def test_render_parse_roundtrip(c):
    assert parse_concept(render_concept(c)) == c


@settings(max_examples=200)
@given(concepts(inverse=True))
def test_measures_strictly_decrease_to_children(c):
    dp, _, sz = depth_nr_size(c)
    for ch in c.children():
        cdp, _, csz = depth_nr_size(ch)
        assert cdp <= dp and csz < sz
        if isinstance(c, (Exists, Forall, AtLeast)):
            assert cdp < dp


@settings(max_examples=100)
@given(concepts(inverse=True))
def test_full_fragment_accepts_everything(c):
    assert fragment_check(c, FULL)
    assert all(s in set(subconcepts(c)) for s in c.children())
