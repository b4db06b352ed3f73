"""Small worked instances used by the demos, the CLI and the tests."""

from __future__ import annotations

from dlchar.core import Signature, parse_concept
from dlchar.interp import ExampleSet, Interpretation, PointedInterpretation
from dlchar.ontology import DLLiteOntology, parse_ontology

CATDOG_TEXT = """\
# cats and dogs are disjoint kinds of animal
Cat <= Animal
Dog <= Animal
Cat <= !Dog
"""


def catdog_ontology() -> DLLiteOntology:
    return parse_ontology(CATDOG_TEXT)


def ebike():
    """The e-bike concept with one positive and two negative examples in one shop."""
    interp = Interpretation(
        ["soltera2", "li360Wh", "px10", "b12", "teslaY", "li81kWh"],
        {"Bicycle": ["soltera2", "px10"], "Battery": ["li360Wh", "li81kWh"],
         "Basket": ["b12"], "Car": ["teslaY"]},
        {"Contains": [("soltera2", "li360Wh"), ("px10", "b12"), ("teslaY", "li81kWh")]},
    )
    e = ExampleSet([PointedInterpretation(interp, "soltera2")],
                   [PointedInterpretation(interp, "px10"), PointedInterpretation(interp, "teslaY")],
                   interp.signature)
    return parse_concept("Bicycle & exists Contains.Battery"), e


def example_two(names=("A",)):
    """Target ``exists R.A`` and the two-path interpretation; ``names`` sets the concept signature."""
    sig = Signature(frozenset(names), frozenset(["R"]))
    interp = Interpretation(
        ["d1", "d2", "d3", "d4", "d5"],
        {"A": ["d2", "d3", "d5"]},
        {"R": [("d1", "d2"), ("d3", "d4"), ("d4", "d5"), ("d5", "d5")]},
        sig,
    )
    e = ExampleSet([PointedInterpretation(interp, "d1")], [PointedInterpretation(interp, "d3")], sig)
    return parse_concept("exists R.A"), e


def example_three():
    """Target ``Cat & Red`` with eight points, one positive."""
    interp = Interpretation(
        ["a", "a'", "b", "b'", "c", "c'", "d", "d'"],
        {"Animal": ["a", "a'", "c", "c'", "d", "d'"], "Cat": ["c", "c'"],
         "Dog": ["d", "d'"], "Red": ["a", "b", "c", "d"]},
    )
    negs = ["a", "a'", "b", "b'", "c'", "d", "d'"]
    e = ExampleSet([PointedInterpretation(interp, "c")],
                   [PointedInterpretation(interp, x) for x in negs], interp.signature)
    return parse_concept("Cat & Red"), e, catdog_ontology()


INVERSE_TEXT = """\
A <= exists R
exists R- <= A
"""


def inverse_ontology() -> DLLiteOntology:
    return parse_ontology(INVERSE_TEXT)
