"""Time the numba and numpy Floyd-Warshall kernels, and one batched
generation run on each.

    python benchmarks/bench_floyd_warshall.py [--sizes 100,200,400] [--repeat 3]
"""
import argparse
import time

import numpy as np

from khopsim import _kernels
from khopsim.generate import GenConfig, generate_batched
from khopsim.sbm import SbmConfig, generate_sbm


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def use_backend(name):
    if name == "numba":
        _kernels.floyd_warshall, _kernels.reach_equal = _kernels.floyd_warshall_numba, _kernels.reach_equal_numba
    else:
        _kernels.floyd_warshall, _kernels.reach_equal = _kernels.floyd_warshall_numpy, _kernels.reach_equal_numpy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100,200,400")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--gen-n", type=int, default=300)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    # compile outside the timed region
    _kernels.floyd_warshall_numba(np.zeros((2, 2), dtype=bool))

    print(f"{'n':>6} {'edges':>8} {'numba s':>10} {'numpy s':>10} {'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        g, _ = generate_sbm(SbmConfig(n=n, p_intra=0.1, p_inter=0.01, seed=0))
        t_nb = best_of(lambda: _kernels.floyd_warshall_numba(g.adj), args.repeat)
        t_np = best_of(lambda: _kernels.floyd_warshall_numpy(g.adj), args.repeat)
        assert np.array_equal(_kernels.floyd_warshall_numba(g.adj), _kernels.floyd_warshall_numpy(g.adj))
        print(f"{n:>6} {g.num_edges:>8} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f}x")

    g, _ = generate_sbm(SbmConfig(n=args.gen_n, seed=0))
    cfg = GenConfig(k=2, batch_size=5, seed=0)
    print(f"\ngenerate_batched n={g.n}, {g.num_edges} edges, batch size {cfg.batch_size}")
    outs = {}
    for name in ("numba", "numpy"):
        use_backend(name)
        t0 = time.perf_counter()
        outs[name] = generate_batched(g, cfg)
        rep = outs[name][1]
        print(f"  {name:>6}: {time.perf_counter() - t0:8.3f}s  ({rep.batches_tried} batches, "
              f"{rep.removal_count} edges removed)")
    assert outs["numba"][0] == outs["numpy"][0]


if __name__ == "__main__":
    main()
