"""Time k-NN scoring on a synthetic corpus shaped like the BPI 2014 incident log.

46,616 cases over 39 activities with right-skewed lengths (mean about 10).
Useful when the real log is not at hand.

    python scripts/bench_scale.py --k 5000 --threads 8
"""

import argparse
import time

import numpy as np

from traceknn.encoding import Alphabet, Sequence, SequenceCorpus
from traceknn.knn_scorer import KnnConfig, score_corpus
from traceknn.stats import describe


def bpi_like_corpus(n=46_616, sigma=39, seed=0, templates=400):
    rng = np.random.default_rng(seed)
    # a few hundred process paths, Zipf-distributed popularity
    bases = []
    for _ in range(templates):
        length = int(min(1 + rng.geometric(0.12), 120))
        p = rng.dirichlet(np.full(sigma, 0.3))
        bases.append(rng.choice(sigma, size=length, p=p).tolist())
    weights = 1.0 / np.arange(1, templates + 1) ** 1.1
    weights /= weights.sum()
    seqs = []
    for _ in range(n):
        s = list(bases[rng.choice(templates, p=weights)])
        for _ in range(rng.poisson(0.6)):
            op = rng.integers(3)
            if op == 0 and len(s) > 1:
                del s[rng.integers(len(s))]
            elif op == 1:
                s.insert(int(rng.integers(len(s) + 1)), int(rng.integers(sigma)))
            else:
                s[rng.integers(len(s))] = int(rng.integers(sigma))
        seqs.append(tuple(s))
    alpha = Alphabet(tuple(f"a{i}" for i in range(sigma)))
    return SequenceCorpus(alpha, tuple(Sequence(f"c{i}", s) for i, s in enumerate(seqs)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=46_616)
    ap.add_argument("--k", type=int, default=5000)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--no-prune", action="store_true")
    args = ap.parse_args()

    corpus = bpi_like_corpus(args.n)
    variants = len({s.symbols for s in corpus.sequences})
    lengths = [len(s) for s in corpus.sequences]
    print(f"cases={corpus.n} variants={variants} events={sum(lengths)} "
          f"mean_len={np.mean(lengths):.2f} max_len={max(lengths)}")
    t0 = time.perf_counter()
    scored = score_corpus(corpus, KnnConfig(args.k), threads=args.threads, prune=not args.no_prune)
    dt = time.perf_counter() - t0
    st = describe([s.anomaly_score for s in scored])
    print(f"k={args.k} threads={args.threads} prune={not args.no_prune}: {dt:.1f}s  "
          f"mean={st.mean:.4f} std={st.std_dev:.4f} min={st.min:.3f} max={st.max:.3f}")


if __name__ == "__main__":
    main()
