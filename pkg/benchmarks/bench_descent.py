"""Compare the pure-Python and compiled descent kernels.

Runs the same cube profiles through both backends, checks the outputs are
bit-identical, and reports wall time per profile. Usage:

    python3 benchmarks/bench_descent.py [system ...]
"""

import math
import sys
import time

import numpy as np

from subtiling.catalog import load, names
from subtiling.descent import DescentEngine, compiled_available
from subtiling.geometry import Domain
from subtiling.view import TilingView


def run(system, trials=60, repeat=3):
    view = TilingView.for_extent(system, 600.0 * math.sqrt(system.d))
    root = view.root
    ambient = view.covered_radius / (2.0 * system.lam)
    rng = np.random.default_rng(0)
    doms = []
    for _ in range(trials):
        r = float(rng.uniform(system.metrics().d_max, ambient))
        y = tuple(rng.uniform(-ambient, ambient, size=system.d))
        doms.append(Domain.cube(r, center=y))
    out = {}
    for backend in ("pure", "compiled") if compiled_available() else ("pure",):
        engine = DescentEngine(system, backend)
        best = math.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            profiles = [engine.cube_profile(root, dom) for dom in doms]
            best = min(best, time.perf_counter() - t0)
        out[backend] = (best / trials, profiles)
    if "compiled" in out:
        for p, q in zip(out["pure"][1], out["compiled"][1]):
            assert p.counts.tobytes() == q.counts.tobytes()
            assert p.front_vol.tobytes() == q.front_vol.tobytes()
            assert p.front_cnt.tobytes() == q.front_cnt.tobytes()
    return {k: v[0] for k, v in out.items()}


def main(argv):
    targets = argv or sorted(names())
    if not compiled_available():
        print("note: compiled kernel not importable, pure only")
    print(f"{'system':12s} {'pure':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name in targets:
        times = run(load(name))
        pure = times["pure"]
        if "compiled" in times:
            comp = times["compiled"]
            print(
                f"{name:12s} {pure * 1e3:9.3f} ms {comp * 1e3:9.3f} ms"
                f" {pure / comp:8.1f}x"
            )
        else:
            print(f"{name:12s} {pure * 1e3:9.3f} ms {'-':>12s} {'-':>9s}")


if __name__ == "__main__":
    main(sys.argv[1:])
