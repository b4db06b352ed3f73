"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best wall time of each backend.
"""

import argparse
import random
import time

from dlchar import _kernels_py
from dlchar.core import Signature, parse_concept
from dlchar.interp import Interpretation, _Compiler
from dlchar.reason import _sweep_setup

try:
    from dlchar import _kernels
except ImportError:
    _kernels = None

CONCEPT = parse_concept("A & >=2 R.(B & exists R.A) & forall R.(A | exists R.B)")


def random_interp(n: int, rng: random.Random) -> Interpretation:
    dom = [f"x{i}" for i in range(n)]
    edges = [(x, y) for x in dom for y in dom if rng.random() < 3 / n]
    return Interpretation(dom, {"A": [x for x in dom if rng.random() < 0.5],
                                "B": [x for x in dom if rng.random() < 0.5]}, {"R": edges})


def eval_case(n: int, rng: random.Random):
    interp = random_interp(n, rng)
    comp = _Compiler({a: i for i, a in enumerate(interp.concepts)},
                     {r: i for i, r in enumerate(interp.roles)}, True)
    comp.add(CONCEPT)
    args = (*comp.program(), n, interp.label_masks, interp.succ_rows)
    return lambda k: k.eval_program(*args)


def sweep_case(n: int):
    sig = Signature(frozenset("AB"), frozenset("R"))
    concepts = [parse_concept(t) for t in ("A", "exists R.A", ">=2 R.B", "exists R.exists R.A")]
    labels, roles, comp, roots = _sweep_setup(concepts, sig)
    return lambda k: k.sweep(*comp.program(), roots, [], n, len(labels), len(roles), True)


def sim_case(n: int, rng: random.Random):
    i1, i2 = random_interp(n, rng), random_interp(n, rng)

    def masks(i):
        return [sum(1 << b for b, a in enumerate("AB") if x in i.ext(a)) for x in i.domain]

    args = (n, masks(i1), [i1.succ_rows[0]], n, masks(i2), [i2.succ_rows[0]])
    return lambda k: k.greatest_simulation(*args)


def best(fn, kernel, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(kernel)
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    cases = [
        ("eval n=60", eval_case(60, rng)),
        ("sweep n=3 sig=({A,B},{R})", sweep_case(3)),
        ("simulation n=60", sim_case(60, rng)),
    ]
    print(f"seed={args.seed} repeat={args.repeat}")
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    for name, fn in cases:
        py = best(fn, _kernels_py, args.repeat)
        if _kernels is None:
            print(f"{name:28s} python {py * 1e3:9.2f} ms")
            continue
        assert fn(_kernels) == fn(_kernels_py), name
        cx = best(fn, _kernels, args.repeat)
        print(f"{name:28s} python {py * 1e3:9.2f} ms  compiled {cx * 1e3:9.2f} ms  speedup {py / cx:6.1f}x")


if __name__ == "__main__":
    main()
