"""Time the numba and numpy kernel backends on the workloads the package runs.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once untimed first so numba compilation is excluded.
"""
import argparse
import timeit

import numpy as np

from mdsum.numerics import column_normalize, kernels


def workloads(rng):
    # attention solves: (n+1)x(n+1) systems, n around a document set's sentence count
    systems = []
    for n in (8, 30, 120):
        a = np.eye(n) - 0.9 * column_normalize(rng.random((n, n)) + 1e-6)
        systems.append((a, rng.random(n)))
    # ED: one generated sentence against ~150 source sentences
    sent = rng.integers(0, 500, size=25)
    sources = [rng.integers(0, 500, size=int(rng.integers(5, 40))) for _ in range(150)]
    offsets = np.zeros(len(sources) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in sources], out=offsets[1:])
    flat = np.concatenate(sources)
    # extractive centrality: power iteration on a sentence graph
    graphs = {n: (column_normalize(rng.random((n, n))), np.full(n, 1 / n)) for n in (30, 200)}
    return {
        "lu_factor+solve n=8/30/120": lambda be: [be.lu_solve(*be.lu_factor(a.copy())[:2], b, False) for a, b in systems],
        "levenshtein 1x150 sentences": lambda be: be.levenshtein_many(sent, flat, offsets),
        "levenshtein pair (40x40)": lambda be: be.levenshtein(sources[0].repeat(2)[:40], sent.repeat(2)[:40]),
        "power iteration n=30": lambda be: be.power_iterate(*graphs[30], 0.85, 1e-10, 100000),
        "power iteration n=200": lambda be: be.power_iterate(*graphs[200], 0.85, 1e-10, 100000),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args()
    backends = {"numpy": kernels.numpy_backend}
    if kernels.numba_backend is not None:
        backends["numba"] = kernels.numba_backend
    jobs = workloads(np.random.default_rng(0))
    print(f"{'kernel':<30}" + "".join(f"{name + ' (ms)':>14}" for name in backends) + f"{'speedup':>10}")
    for label, job in jobs.items():
        times = {}
        for name, be in backends.items():
            job(be)
            best = min(timeit.repeat(lambda: job(be), number=args.number, repeat=args.repeat))
            times[name] = 1000 * best / args.number
        speed = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        print(f"{label:<30}" + "".join(f"{t:>14.4f}" for t in times.values()) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
