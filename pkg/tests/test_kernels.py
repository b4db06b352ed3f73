import os
import subprocess
import sys

import pytest
from hypothesis import given, settings

from dlchar import _kernels_py
from dlchar.core import Signature, parse_concept
from dlchar.interp import _Compiler
from dlchar.reason import _sweep_setup

from oracles import concepts, interpretations

try:
    from dlchar import _kernels
except ImportError:
    _kernels = None

needs_compiled = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def test_env_var_forces_fallback():
    env = dict(os.environ, DLCHAR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from dlchar import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
@settings(max_examples=150, deadline=None)
@given(concepts(inverse=True), interpretations(max_size=8))
def test_eval_backends_agree(c, interp):
    comp = _Compiler({a: i for i, a in enumerate(interp.concepts)},
                     {r: i for i, r in enumerate(interp.roles)}, True)
    comp.add(c)
    args = (*comp.program(), len(interp), interp.label_masks, interp.succ_rows)
    assert _kernels.eval_program(*args) == _kernels_py.eval_program(*args)


@needs_compiled
@settings(max_examples=60, deadline=None)
@given(interpretations(max_size=6), interpretations(max_size=6))
def test_simulation_backends_agree(i1, i2):
    def masks(i):
        return [sum(1 << b for b, a in enumerate("AB") if x in i.ext(a)) for x in i.domain]

    args = (len(i1), masks(i1), [i1.succ_rows[0]], len(i2), masks(i2), [i2.succ_rows[0]])
    assert _kernels.greatest_simulation(*args) == _kernels_py.greatest_simulation(*args)


@needs_compiled
@pytest.mark.parametrize("forward_only", [True, False])
def test_sweep_backends_agree(forward_only):
    sig = Signature(frozenset("A"), frozenset("R"))
    cs = [parse_concept(t) for t in ("A", "exists R.A", ">=2 R.top", "exists R-.A")]
    labels, roles, comp, roots = _sweep_setup(cs, sig)
    for n in (1, 2, 3):
        a = _kernels.sweep(*comp.program(), roots, [], n, len(labels), len(roles), forward_only)
        b = _kernels_py.sweep(*comp.program(), roots, [], n, len(labels), len(roles), forward_only)
        assert a == b
