"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Both backends are timed on
the same inputs and their outputs are checked for agreement.
"""
import argparse
import timeit

import numpy as np

from opencavity import _fallback

try:
    from opencavity import _kernels as compiled
except ImportError:
    compiled = None
from opencavity.dbr import concave_mirror


def stack_inputs(points):
    st = concave_mirror(20)
    wl = np.linspace(500.0, 800.0, points)
    return (np.ascontiguousarray(st.index), np.ascontiguousarray(st.thickness),
            st.ambient, st.substrate, wl)


def overlap_inputs(points, centers):
    wl = np.linspace(625.0, 850.0, points)
    dens = np.exp(-0.5 * ((wl - 637.0) / 0.17) ** 2) + 0.01
    lc = np.linspace(635.0, 639.0, centers)
    return wl, dens, lc, lc / 0.7


def bench(label, fast, slow, args, repeat):
    if fast is not None:
        a, b = fast(*args), slow(*args)
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        err = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))
        tf = min(timeit.repeat(lambda: fast(*args), number=1, repeat=repeat))
    else:
        err, tf = float("nan"), float("nan")
    ts = min(timeit.repeat(lambda: slow(*args), number=1, repeat=repeat))
    print(f"{label:<28} compiled {tf * 1e3:9.3f} ms  fallback {ts * 1e3:9.3f} ms  "
          f"speedup {ts / tf:6.1f}x  max|diff| {err:.2e}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    print(f"compiled backend available: {compiled is not None}")
    fast_stack = compiled.stack_response if compiled else None
    fast_overlap = compiled.lorentz_overlap if compiled else None
    for n in (1_000, 30_000):
        bench(f"stack_response n={n}", fast_stack, _fallback.stack_response, stack_inputs(n), args.repeat)
    for n, c in ((11_251, 31), (11_251, 401)):
        bench(f"lorentz_overlap {c} centres", fast_overlap, _fallback.lorentz_overlap,
              overlap_inputs(n, c), args.repeat)


if __name__ == "__main__":
    main()
