"""k-th nearest neighbour anomaly scores under nLCS similarity.

Each case is scored by 1 / s_k where s_k is its nLCS similarity to its k-th
most similar other case. Neighbours are ranked by (similarity descending,
case index ascending).

The scorer works on distinct case variants: every kernel value is computed
once per pair of distinct sequences and weighted by how many cases share
each variant. Candidates for a query are visited in descending order of the
length-ratio bound sqrt(min/max); once the running k-th best similarity is
above the bound of the next candidate, all remaining candidates are skipped.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numba as nb
import numpy as np

from .encoding import SequenceCorpus
from .kernel import KernelBackend, lcs_bits_masked, lcs_dp, match_masks

class KnnConfigError(ValueError):
    pass


@dataclass(frozen=True)
class KnnConfig:
    k: int
    exclude_self: bool = True
    similarity_floor: float = 1e-9

    def validate(self, n: int) -> None:
        if self.k < 1:
            raise KnnConfigError(f"k must be >= 1, got {self.k}")
        if not self.similarity_floor > 0:
            raise KnnConfigError("similarity_floor must be positive")
        need = self.k + (1 if self.exclude_self else 0)
        if n < need:
            raise KnnConfigError(
                f"corpus has {n} cases, k={self.k} needs at least {need}"
                + (" (self excluded)" if self.exclude_self else ""))

    def to_dict(self) -> dict:
        return {"k": self.k, "exclude_self": self.exclude_self,
                "similarity_floor": self.similarity_floor}


@dataclass(frozen=True)
class ScoredCase:
    case_id: str
    kth_similarity: float
    anomaly_score: float
    kth_neighbor_id: str
    z_score: float = math.nan
    similarity_floor_hit: bool = False
    index: int = field(default=-1, compare=False)


def anomaly_score(kth_similarity: float, floor: float) -> tuple[float, bool]:
    if kth_similarity < floor:
        return 1.0 / floor, True
    return 1.0 / kth_similarity, False


@nb.njit(cache=True, nogil=True)
def _heap_push(hs, hw, size, s, w):
    i = size
    hs[i] = s
    hw[i] = w
    while i > 0:
        p = (i - 1) >> 1
        if hs[p] <= hs[i]:
            break
        hs[p], hs[i] = hs[i], hs[p]
        hw[p], hw[i] = hw[i], hw[p]
        i = p
    return size + 1


@nb.njit(cache=True, nogil=True)
def _heap_pop(hs, hw, size):
    size -= 1
    hs[0] = hs[size]
    hw[0] = hw[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < size and hs[l] < hs[m]:
            m = l
        if r < size and hs[r] < hs[m]:
            m = r
        if m == i:
            break
        hs[m], hs[i] = hs[i], hs[m]
        hw[m], hw[i] = hw[i], hw[m]
        i = m
    return size


@nb.njit(cache=True, nogil=True)
def _bound_order(q, lengths, by_len, sorted_len, order):
    """Fill `order` with all variant ids by descending sqrt(min/max) length bound vs q."""
    m = lengths[q]
    nv = by_len.shape[0]
    hi = np.searchsorted(sorted_len, m)
    lo = hi - 1
    for t in range(nv):
        if lo < 0:
            order[t] = by_len[hi]
            hi += 1
        elif hi >= nv:
            order[t] = by_len[lo]
            lo -= 1
        else:
            # shorter: sqrt(l/m); longer: sqrt(m/l). Compare l_lo/m >= m/l_hi.
            if sorted_len[lo] * sorted_len[hi] >= m * m:
                order[t] = by_len[lo]
                lo -= 1
            else:
                order[t] = by_len[hi]
                hi += 1


@nb.njit(cache=True, nogil=True)
def _score_row(q, q_weight, flat, offsets, weights, by_len, sorted_len, k, prune,
               bit_parallel, sigma, out):
    """LCS of variant q against every variant into `out` (-1 where pruned).

    Weights give how many candidate cases each variant stands for; q's own
    weight is `q_weight` (its count, minus one when the query excludes itself).
    Returns the k-th largest similarity: the root of a min-heap of weighted
    similarities trimmed to the smallest prefix still covering k cases.
    """
    nv = offsets.shape[0] - 1
    lengths = offsets[1:] - offsets[:-1]
    a = flat[offsets[q]:offsets[q + 1]]
    m = a.shape[0]
    order = np.empty(nv, np.int64)
    _bound_order(q, lengths, by_len, sorted_len, order)

    masks = match_masks(a, sigma)
    scratch = np.empty(masks.shape[1], np.uint64)
    hs = np.empty(nv, np.float64)
    hw = np.empty(nv, np.int64)
    size = 0
    total = 0
    for t in range(nv):
        out[t] = -1
    for t in range(nv):
        j = order[t]
        w = q_weight if j == q else weights[j]
        if w == 0:
            continue
        lj = lengths[j]
        if prune and total >= k:
            lo = min(m, lj)
            hi = max(m, lj)
            # same float as the similarity of a full-length match, so exact
            if lo / math.sqrt(lo * hi) < hs[0]:
                break
        b = flat[offsets[j]:offsets[j + 1]]
        if bit_parallel:
            lcs = lcs_bits_masked(masks, m, b, scratch)
        else:
            lcs = lcs_dp(a, b)
        out[j] = lcs
        s = lcs / math.sqrt(m * lj)
        size = _heap_push(hs, hw, size, s, w)
        total += w
        while total - hw[0] >= k:
            total -= hw[0]
            size = _heap_pop(hs, hw, size)
    return hs[0]


@dataclass
class _Variants:
    flat: np.ndarray
    offsets: np.ndarray
    counts: np.ndarray
    members: list  # per variant: ascending int64 array of case indices
    case_variant: np.ndarray


def _group_variants(corpus: SequenceCorpus, dedup: bool) -> _Variants:
    if dedup:
        first: dict[tuple, int] = {}
        case_variant = np.empty(corpus.n, np.int64)
        members: list[list[int]] = []
        for i, s in enumerate(corpus.sequences):
            v = first.setdefault(s.symbols, len(first))
            if v == len(members):
                members.append([])
            members[v].append(i)
            case_variant[i] = v
        seqs = list(first)
    else:
        seqs = [s.symbols for s in corpus.sequences]
        members = [[i] for i in range(corpus.n)]
        case_variant = np.arange(corpus.n, dtype=np.int64)
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    offsets = np.zeros(len(seqs) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = np.fromiter((x for s in seqs for x in s), dtype=np.int64, count=int(offsets[-1]))
    return _Variants(flat, offsets, np.array([len(m) for m in members], dtype=np.int64),
                     [np.array(m, dtype=np.int64) for m in members], case_variant)


def _select(q, s_k, lcs, var: _Variants, config: KnnConfig):
    """Each case of variant q's k-th neighbour index, given the k-th similarity s_k."""
    lengths = np.diff(var.offsets)
    weights = var.counts.copy()
    if config.exclude_self:
        weights[q] -= 1
    cand = np.flatnonzero((lcs >= 0) & (weights > 0))
    sims = lcs[cand] / np.sqrt(lengths[q] * lengths[cand])
    above = int(weights[cand][sims > s_k].sum())
    r = config.k - above  # 1-based rank inside the tie level
    level = cand[sims == s_k]
    assert level.size and r >= 1
    level_cases = np.sort(np.concatenate([var.members[v] for v in level]))
    cases = var.members[q]
    if config.exclude_self and q in level:
        # level_cases holds every case of q; drop the query itself
        nbrs = np.where(level_cases[r - 1] < cases, level_cases[r - 1], level_cases[r])
    else:
        nbrs = np.full(cases.shape, level_cases[r - 1])
    return nbrs


def score_corpus(
    corpus: SequenceCorpus,
    config: KnnConfig,
    backend: KernelBackend | str = KernelBackend.BIT_PARALLEL,
    *,
    threads: int = 1,
    prune: bool = True,
    dedup: bool = True,
    progress: Callable[[int], None] | None = None,
) -> list[ScoredCase]:
    """Score every case of `corpus`; output is in corpus order.

    The result does not depend on `threads`, `prune` or `dedup`, which only
    change how much work is done and where.
    """
    config.validate(corpus.n)
    backend = KernelBackend(backend)
    var = _group_variants(corpus, dedup)
    nv = len(var.members)
    lengths = np.diff(var.offsets)
    by_len = np.argsort(lengths, kind="stable")
    sorted_len = lengths[by_len]
    sigma = max(len(corpus.alphabet), int(var.flat.max()) + 1)
    bit_parallel = backend is KernelBackend.BIT_PARALLEL

    def row(q):
        out = np.empty(nv, np.int64)
        q_weight = var.counts[q] - (1 if config.exclude_self else 0)
        s_k = _score_row(q, q_weight, var.flat, var.offsets, var.counts, by_len, sorted_len,
                         config.k, prune, bit_parallel, sigma, out)
        nbrs = _select(q, s_k, out, var, config)
        if progress is not None:
            progress(len(var.members[q]))
        return s_k, nbrs

    if threads <= 1:
        results = [row(q) for q in range(nv)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(row, range(nv)))

    ids = [s.case_id for s in corpus.sequences]
    scored: list[ScoredCase | None] = [None] * corpus.n
    for q, (s_k, nbrs) in enumerate(results):
        s_k = float(s_k)
        score, hit = anomaly_score(s_k, config.similarity_floor)
        for i, nb_i in zip(var.members[q], nbrs):
            scored[i] = ScoredCase(ids[i], s_k, score, ids[int(nb_i)],
                                   similarity_floor_hit=hit, index=int(i))
    return scored


def top_scores(scored: list[ScoredCase], m: int) -> list[ScoredCase]:
    """The m highest anomaly scores, descending; ties by case index."""
    if m > len(scored):
        raise ValueError(f"m={m} exceeds the {len(scored)} scored cases")
    order = sorted(range(len(scored)), key=lambda i: (-scored[i].anomaly_score, _idx(scored, i)))
    return [scored[i] for i in order[:m]]


def _idx(scored, i):
    return scored[i].index if scored[i].index >= 0 else i


def write_scores(scored: list[ScoredCase], sink) -> None:
    """Score dump: `case_id;kth_similarity;anomaly_score;kth_neighbor_id`, corpus order."""
    sink.write("case_id;kth_similarity;anomaly_score;kth_neighbor_id\n")
    for s in scored:
        sink.write(f"{s.case_id};{s.kth_similarity!r};{s.anomaly_score!r};{s.kth_neighbor_id}\n")


def read_scores(source, similarity_floor: float = 1e-9) -> list[ScoredCase]:
    lines = source.read().splitlines()
    if not lines or lines[0].strip() != "case_id;kth_similarity;anomaly_score;kth_neighbor_id":
        raise ValueError("not a score dump: bad header")
    out = []
    for i, line in enumerate(lines[1:]):
        if not line.strip():
            continue
        case_id, sim, score, nbr = line.split(";")
        sim = float(sim)
        out.append(ScoredCase(case_id, sim, float(score), nbr,
                              similarity_floor_hit=sim < similarity_floor, index=i))
    return out
