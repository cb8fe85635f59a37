"""Time the compiled and pure-Python centrality kernels on a preferential-attachment graph.

Recommendations point from newer to older blogs, so directed searches stay
short; the symmetrized copy makes every search span the whole network.

    python benchmarks/bench_kernels.py [--n 2000] [--m 3] [--repeat 3]
"""

import argparse
import time

import numpy as np

from blogcap import _kernels_py
from blogcap.netgen import GenParams, generate_pa_network

try:
    from blogcap import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(kernels, net, repeat):
    n = len(net)
    indptr, indices = net.csr()
    in_ptr, in_idx = net.csr_in()
    deg = np.ascontiguousarray(np.diff(indptr))
    return {
        "betweenness": best_of(lambda: kernels.betweenness_block(indptr, indices, n, 0, n), repeat),
        "closeness": best_of(lambda: kernels.closeness_block(indptr, indices, n, 0, n), repeat),
        "pagerank": best_of(lambda: kernels.pagerank(in_ptr, in_idx, deg, 0.85, 200, 1e-12), repeat),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def report(label, net, repeat):
    print(f"\n{label}: {len(net)} blogs, {len(net.edges)} edges")
    py = run(_kernels_py, net, repeat)
    cy = run(_kernels_c, net, repeat) if _kernels_c is not None else None
    print(f"{'kernel':<12} {'python s':>10} {'cython s':>10} {'speedup':>8}  identical")
    for name, (tp, outp) in py.items():
        if cy is None:
            print(f"{name:<12} {tp:>10.4f}")
            continue
        tc, outc = cy[name]
        print(f"{name:<12} {tp:>10.4f} {tc:>10.4f} {tp / tc:>7.1f}x  {same(outp, outc)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    net = generate_pa_network(GenParams(n=args.n, m=args.m, seed=0))
    if _kernels_c is None:
        print("compiled kernels not built; python timings only")
    report("directed", net, args.repeat)
    report("symmetrized", net.symmetrized(), args.repeat)

if __name__ == "__main__":
    main()
