"""Compare the numba and numpy kernels.

Run ``python -m posmaps.bench``. With numba unavailable (or disabled through
``POSMAPS_DISABLE_NUMBA``) only the numpy column is reported.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from ._accel import NUMBA_AVAILABLE
from .kernels import SUPERSET_MOBIUS, jacobi_hermitian, lattice_transform


def _hermitian(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def _time(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def run(jacobi_dims=(4, 8, 16, 32), lattice_ns=(6, 10, 14), repeat=5, seed=0):
    rng = np.random.default_rng(seed)
    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    rows = []
    for dim in jacobi_dims:
        a = _hermitian(dim, rng)
        tol = 1e-12 * np.linalg.norm(a)
        row = {"kernel": "jacobi", "size": dim}
        for b in backends:
            row[b] = _time(lambda: jacobi_hermitian(a, tol, backend=b), repeat)
        rows.append(row)
    for n in lattice_ns:
        v = rng.random(1 << n)
        row = {"kernel": "superset_mobius", "size": n}
        for b in backends:
            row[b] = _time(lambda: lattice_transform(v, n, SUPERSET_MOBIUS, backend=b), repeat)
        rows.append(row)
    for row in rows:
        if "numba" in row:
            row["speedup"] = row["numpy"] / row["numba"]
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(prog="python -m posmaps.bench", description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", action="store_true", help="emit rows as JSON")
    args = p.parse_args(argv)
    rows = run(repeat=args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
        return 0
    print(f"{'kernel':16s} {'size':>5s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for r in rows:
        nb = f"{1e3 * r['numba']:12.3f}" if "numba" in r else f"{'n/a':>12s}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'':>8s}"
        print(f"{r['kernel']:16s} {r['size']:5d} {1e3 * r['numpy']:12.3f} {nb} {sp}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
