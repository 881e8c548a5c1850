"""Timing comparison of the compiled and pure-numpy scoring kernels.

Runs the window-scoring hot loops over a synthetic corpus with both
backends and reports per-document timings. The compiled side is skipped
when numba is unavailable or disabled via PASSAGERANK_NO_NUMBA=1.

Usage: python3 benchmarks/bench_kernels.py [--docs N] [--doc-len N] ...
"""

import argparse
import time

import numpy as np

from passagerank import _accel


def make_inputs(rng, n_docs, doc_len, query_len, vocab=5000):
    docs = [
        rng.integers(0, vocab, size=rng.integers(doc_len // 2, doc_len + 1)).astype(np.int32)
        for _ in range(n_docs)
    ]
    query = rng.integers(0, vocab, size=query_len).astype(np.int32)
    bias = rng.uniform(0.01, 2.0, size=query_len)
    background = rng.uniform(1e-6, 1e-2, size=query_len)
    return docs, query, bias, background


def time_pass(fn, docs, repeats):
    # one untimed pass so jit compilation stays out of the numbers
    fn(docs[0])
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for d in docs:
            fn(d)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=500)
    ap.add_argument("--doc-len", type=int, default=1200)
    ap.add_argument("--query-len", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    docs, query, bias, background = make_inputs(
        rng, args.docs, args.doc_len, args.query_len
    )
    ms = np.array([50, 150, -1], dtype=np.int64)
    taus = np.array([25, 75, 0], dtype=np.int64)

    kernels = [
        (
            "window kernel",
            lambda d: _accel.kernel_filter_scores_np(d, query, bias, ms, taus, False),
            lambda d: _accel.kernel_filter_scores(d, query, bias, ms, taus, False),
        ),
        (
            "span lm      ",
            lambda d: _accel.lm_span_scores_np(d, query, background, 0.5, 50, 25),
            lambda d: _accel.lm_span_scores(d, query, background, 0.5, 50, 25),
        ),
    ]
    if not _accel.USING_NUMBA:
        print("compiled backend unavailable (numba missing or disabled); "
              "timing numpy only")

    print(f"{args.docs} docs, mean length ~{int(np.mean([len(d) for d in docs]))}, "
          f"query length {args.query_len}, best of {args.repeats}")
    for name, np_fn, jit_fn in kernels:
        np_total = time_pass(np_fn, docs, args.repeats)
        print(f"{name}  numpy: {np_total * 1e3:8.2f} ms total  "
              f"{np_total / args.docs * 1e6:8.1f} us/doc")
        if _accel.USING_NUMBA:
            jit_total = time_pass(jit_fn, docs, args.repeats)
            print(f"{name}  numba: {jit_total * 1e3:8.2f} ms total  "
                  f"{jit_total / args.docs * 1e6:8.1f} us/doc  "
                  f"({np_total / jit_total:5.1f}x vs numpy)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
