"""LCS length and normalized-LCS similarity between symbol sequences.

nLCS(a, b) = |LCS(a, b)| / sqrt(|a| * |b|)

Two backends compute the LCS length and must agree exactly:

* ``reference-dp``: the textbook O(|a||b|) dynamic program, two rows of memory.
* ``bit-parallel``: one bit per position of ``a``, 64 positions per machine
  word; each symbol of ``b`` updates the whole row with one add, one and-not
  and one or per word (Hyyro's formulation; LCS = zero bits left in V).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)
_LOW6 = np.uint64(63)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


class KernelBackend(str, enum.Enum):
    REFERENCE_DP = "reference-dp"
    BIT_PARALLEL = "bit-parallel"


class KernelContractError(ValueError):
    """Raised for inputs the kernel is not defined on (empty, negative or out-of-range symbols)."""


@nb.njit(cache=True, nogil=True)
def lcs_dp(a, b):
    m = a.shape[0]
    n = b.shape[0]
    prev = np.zeros(n + 1, np.int64)
    cur = np.zeros(n + 1, np.int64)
    for i in range(m):
        ai = a[i]
        for j in range(n):
            if ai == b[j]:
                cur[j + 1] = prev[j] + 1
            elif cur[j] >= prev[j + 1]:
                cur[j + 1] = cur[j]
            else:
                cur[j + 1] = prev[j + 1]
        prev, cur = cur, prev
    return prev[n]


@nb.njit(cache=True, nogil=True)
def _popcount(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return (x * _H01) >> _S56


@nb.njit(cache=True, nogil=True)
def match_masks(a, sigma):
    """Per-symbol bitmasks of the positions of `a`, shape (sigma, words)."""
    m = a.shape[0]
    words = (m + 63) >> 6
    masks = np.zeros((sigma, words), np.uint64)
    for i in range(m):
        masks[a[i], i >> 6] |= _ONE << (np.uint64(i) & _LOW6)
    return masks


@nb.njit(cache=True, nogil=True)
def lcs_bits_masked(masks, m, b, v):
    """LCS length of the masked sequence (length m) against `b`; `v` is scratch of len words."""
    words = masks.shape[1]
    sigma = masks.shape[0]
    for w in range(words):
        v[w] = _ALL
    for j in range(b.shape[0]):
        c = b[j]
        if c >= sigma:
            continue
        carry = _ZERO
        for w in range(words):
            x = v[w]
            pm = masks[c, w]
            u = x & pm
            s1 = x + u
            s = s1 + carry
            if s1 < x or s < s1:
                carry = _ONE
            else:
                carry = _ZERO
            # x - u == x & ~pm: u is a bitwise subset of x, so no borrows
            v[w] = s | (x & ~pm)
    ones = 0
    full = m >> 6
    for w in range(full):
        ones += np.int64(_popcount(v[w]))
    rem = m & 63
    if rem:
        tail = v[full] & ((_ONE << np.uint64(rem)) - _ONE)
        ones += np.int64(_popcount(tail))
    return m - ones


@nb.njit(cache=True, nogil=True)
def lcs_bits(a, b):
    sigma = 0
    for i in range(a.shape[0]):
        if a[i] + 1 > sigma:
            sigma = a[i] + 1
    masks = match_masks(a, sigma)
    v = np.empty(masks.shape[1], np.uint64)
    return lcs_bits_masked(masks, a.shape[0], b, v)


def _as_symbols(x, alphabet_size=None) -> np.ndarray:
    arr = np.asarray(getattr(x, "symbols", x), dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise KernelContractError("sequences must be non-empty 1-d symbol lists")
    if arr.min() < 0 or (alphabet_size is not None and arr.max() >= alphabet_size):
        raise KernelContractError(
            f"symbol id out of alphabet range [0, {alphabet_size}): {arr.min()}..{arr.max()}")
    return arr


def lcs_length(a, b, backend=KernelBackend.BIT_PARALLEL, alphabet_size=None) -> int:
    """Length of the longest common subsequence of `a` and `b`."""
    a = _as_symbols(a, alphabet_size)
    b = _as_symbols(b, alphabet_size)
    if KernelBackend(backend) is KernelBackend.REFERENCE_DP:
        return int(lcs_dp(a, b))
    return int(lcs_bits(a, b))


def similarity(lcs: int, len_a: int, len_b: int) -> float:
    return lcs / math.sqrt(len_a * len_b)


def nlcs(a, b, backend=KernelBackend.BIT_PARALLEL, alphabet_size=None) -> float:
    a = _as_symbols(a, alphabet_size)
    b = _as_symbols(b, alphabet_size)
    return similarity(lcs_length(a, b, backend), a.size, b.size)


def nlcs_upper_bound(len_a: int, len_b: int) -> float:
    """sqrt(min/max): no pair of sequences with these lengths has a higher nLCS.

    Evaluated as min / sqrt(min*max), i.e. exactly the float nLCS yields when
    the LCS is as long as the shorter sequence, so the bound also holds after
    rounding.
    """
    if len_a < 1 or len_b < 1:
        raise KernelContractError("lengths must be >= 1")
    lo, hi = sorted((len_a, len_b))
    return similarity(lo, lo, hi)


@dataclass(frozen=True)
class SimilarityKernel:
    backend: KernelBackend = KernelBackend.BIT_PARALLEL
    alphabet_size: int | None = None

    def lcs_length(self, a, b) -> int:
        return lcs_length(a, b, self.backend, self.alphabet_size)

    def __call__(self, a, b) -> float:
        return nlcs(a, b, self.backend, self.alphabet_size)
