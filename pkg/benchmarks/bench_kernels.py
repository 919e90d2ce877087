"""Time the Cython kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --dims 2,4,8,16 --number 2000
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qcorr import _kernels_py

try:
    from qcorr import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _inputs(d: int, rng: np.random.Generator):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (x + x.conj().T)
    # Lueders instrument of a nondegenerate observable
    _, u = np.linalg.eigh(h)
    kraus = np.array([np.outer(u[:, k], u[:, k].conj()) for k in range(d)])
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    return h, x, kraus, psi


def bench(k, d: int, number: int, rng) -> dict[str, float]:
    h, x, kraus, psi = _inputs(d, rng)
    rho = np.outer(psi, psi.conj())
    cases = {
        "eigh": lambda: k.eigh(h),
        "trace_norm": lambda: k.trace_norm(x),
        "op_norm": lambda: k.op_norm(x),
        "apply_kraus": lambda: k.apply_kraus(kraus, rho),
        "invasiveness_pure": lambda: k.invasiveness_pure(psi, kraus),
    }
    return {name: min(timeit.repeat(fn, number=number, repeat=3)) / number * 1e6
            for name, fn in cases.items()}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", default="2,3,4,6,8,16")
    p.add_argument("--number", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    backends = [("python", _kernels_py)] + ([("cython", _kernels_c)] if _kernels_c else [])
    if _kernels_c is None:
        print("extension not built; timing the fallback only")
    print(f"{'kernel':<18}{'d':>4}" + "".join(f"{name + ' us':>14}" for name, _ in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for d in (int(s) for s in args.dims.split(",")):
        res = [bench(k, d, args.number, np.random.default_rng(args.seed)) for _, k in backends]
        for name in res[0]:
            row = f"{name:<18}{d:>4}" + "".join(f"{r[name]:>14.2f}" for r in res)
            if len(res) == 2:
                row += f"{res[0][name] / res[1][name]:>9.2f}x"
            print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
