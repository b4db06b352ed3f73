"""Kernel selection.

The compiled extension is used when it was built; otherwise the pure-Python
module.  Setting ``DLCHAR_PURE_PYTHON=1`` forces the fallback.
"""

import os

from dlchar import _kernels_py

TOP, BOT, NAME, NOT, AND, OR, EXISTS, FORALL, ATLEAST = range(9)

if os.environ.get("DLCHAR_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from dlchar import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

eval_program = _impl.eval_program
sweep = _impl.sweep
greatest_simulation = _impl.greatest_simulation
