import numpy as np

from traceknn.encoding import Alphabet, Sequence, SequenceCorpus


def corpus_of(seqs, sigma=None):
    sigma = sigma or max(max(s) for s in seqs) + 1
    alpha = Alphabet(tuple(f"a{i}" for i in range(sigma)))
    return SequenceCorpus(alpha, tuple(Sequence(f"c{i:03d}", tuple(int(x) for x in s))
                                       for i, s in enumerate(seqs)))


def random_sequences(rng: np.random.Generator, n: int, sigma: int = 6, templates: int = 5,
                     max_len: int = 14) -> list[list[int]]:
    """Sequences drawn from a few templates with random edits, so duplicates and ties are common."""
    bases = [rng.integers(0, sigma, rng.integers(1, max_len + 1)).tolist() for _ in range(templates)]
    out = []
    for _ in range(n):
        s = list(bases[rng.integers(len(bases))])
        for _ in range(rng.integers(0, 3)):
            op = rng.integers(3)
            if op == 0 and len(s) > 1:
                del s[rng.integers(len(s))]
            elif op == 1:
                s.insert(int(rng.integers(len(s) + 1)), int(rng.integers(sigma)))
            else:
                s[rng.integers(len(s))] = int(rng.integers(sigma))
        out.append(s)
    return out
