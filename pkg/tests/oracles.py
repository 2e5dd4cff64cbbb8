"""Slow, obviously-correct reference computations used as test oracles."""

import math
from itertools import combinations

import numpy as np

from traceknn.kernel import lcs_dp


def is_subsequence(sub, seq):
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def lcs_by_enumeration(a, b):
    """Longest common subsequence length by trying subsets of the shorter input, longest first."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for size in range(len(short), 0, -1):
        seen = set()
        for idx in combinations(range(len(short)), size):
            cand = tuple(short[i] for i in idx)
            if cand in seen:
                continue
            seen.add(cand)
            if is_subsequence(cand, long_):
                return size
    return 0


def naive_knn(seqs, k, exclude_self=True):
    """(kth_similarity, kth_neighbor_index) per sequence by computing and sorting all pairs."""
    arrs = [np.asarray(s, dtype=np.int64) for s in seqs]
    n = len(arrs)
    lcs = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            lcs[i, j] = lcs[j, i] = lcs_dp(arrs[i], arrs[j])
    out = []
    for i in range(n):
        cands = []
        for j in range(n):
            if exclude_self and j == i:
                continue
            sim = int(lcs[i, j]) / math.sqrt(len(arrs[i]) * len(arrs[j]))
            cands.append((-sim, j))
        cands.sort()
        neg, j = cands[k - 1]
        out.append((-neg, j))
    return out
