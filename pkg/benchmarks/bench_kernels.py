"""Compare the compiled n-gram kernels against the pure-Python mirror.

The backend is fixed at import time by ``COUNTERSEL_KERNELS``, so this
script re-executes itself once per backend and prints a side-by-side
table. Run directly:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --docs 2000 --tokens 30 --repeat 5

Timings are best-of-``repeat`` wall clock. Both backends produce
identical counts; only throughput differs.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time


def build_corpus(docs: int, tokens: int, vocab: int, seed: int) -> list[list[int]]:
    rng = random.Random(seed)
    return [
        [rng.randrange(vocab) for _ in range(rng.randint(tokens // 2, tokens))]
        for _ in range(docs)
    ]


def run_benchmarks(args) -> list[tuple[str, float]]:
    from countersel import kernels
    from countersel import metrics

    corpus = build_corpus(args.docs, args.tokens, args.vocab, args.seed)
    texts = [" ".join(f"w{t}" for t in doc) for doc in corpus]
    base = args.vocab  # packed-key base: ids are < vocab

    def best_of(fn) -> float:
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    def bench_count():
        for doc in corpus:
            kernels.count_ngrams_packed(doc, 2, base)

    counted = [kernels.count_ngrams_packed(doc, 2, base) for doc in corpus]

    def bench_merge():
        acc: dict = {}
        for counts in counted:
            kernels.max_merge(acc, counts)

    merged: dict = {}
    for counts in counted:
        kernels.max_merge(merged, counts)

    def bench_clip():
        for counts in counted:
            kernels.clipped_total(counts, merged)

    def bench_selfbleu():
        metrics.self_bleu_n(texts, 2)

    return [
        ("count_ngrams_packed", best_of(bench_count)),
        ("max_merge", best_of(bench_merge)),
        ("clipped_total", best_of(bench_clip)),
        ("self_bleu_n(texts, 2)", best_of(bench_selfbleu)),
    ]


def run_child(backend: str, argv: list[str]) -> dict[str, float]:
    env = dict(os.environ, COUNTERSEL_KERNELS=backend)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), *argv, "--child"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    results = {}
    for line in out.stdout.splitlines():
        name, seconds = line.rsplit("\t", 1)
        results[name] = float(seconds)
    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=1000)
    parser.add_argument("--tokens", type=int, default=25, help="max tokens per doc")
    parser.add_argument("--vocab", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        from countersel import kernels

        for name, seconds in run_benchmarks(args):
            print(f"{name}\t{seconds!r}")
        print(f"backend\t{kernels.BACKEND}", file=sys.stderr)
        return 0

    argv = [
        "--docs", str(args.docs), "--tokens", str(args.tokens),
        "--vocab", str(args.vocab), "--seed", str(args.seed),
        "--repeat", str(args.repeat),
    ]
    py = run_child("py", argv)
    try:
        cy = run_child("cy", argv)
    except subprocess.CalledProcessError:
        print("compiled backend unavailable; pure-Python timings only\n")
        cy = None

    width = max(len(name) for name in py)
    print(f"{args.docs} docs, <= {args.tokens} tokens, vocab {args.vocab}, "
          f"best of {args.repeat}\n")
    if cy is None:
        print(f"{'benchmark':<{width}}  {'python':>10}")
        for name, seconds in py.items():
            print(f"{name:<{width}}  {seconds * 1e3:>8.2f}ms")
    else:
        print(f"{'benchmark':<{width}}  {'python':>10}  {'cython':>10}  {'speedup':>8}")
        for name in py:
            ratio = py[name] / cy[name] if cy[name] > 0 else float("inf")
            print(
                f"{name:<{width}}  {py[name] * 1e3:>8.2f}ms  "
                f"{cy[name] * 1e3:>8.2f}ms  {ratio:>7.2f}x"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
