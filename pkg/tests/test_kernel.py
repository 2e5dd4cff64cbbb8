import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import lcs_by_enumeration
from traceknn.encoding import Sequence
from traceknn.kernel import (KernelBackend, KernelContractError, SimilarityKernel, lcs_dp, lcs_length, nlcs,
                             nlcs_upper_bound)

BACKENDS = list(KernelBackend)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("a, b, expected", [
    ([0, 1, 2], [0, 1, 2], 3),
    ([0, 1], [2, 3], 0),
    ([0, 1, 2, 1, 3, 0, 1], [1, 3, 2, 0, 1, 0], 4),
    ([0, 1, 2, 3], [0, 2], 2),
    ([5], [5], 1),
])
def test_lcs_examples(backend, a, b, expected):
    assert lcs_length(a, b, backend) == expected
    assert lcs_length(b, a, backend) == expected


@pytest.mark.parametrize("backend", BACKENDS)
def test_nlcs_examples(backend):
    assert nlcs([3, 1, 4, 1, 5], [3, 1, 4, 1, 5], backend) == 1.0
    assert nlcs([0, 1], [2, 3], backend) == 0.0
    assert nlcs([0, 1, 2, 3], [0, 2], backend) == pytest.approx(0.7071067811865476, abs=1e-12)
    assert nlcs(Sequence("x", (0, 1, 2, 3)), Sequence("y", (0, 2)), backend) == 2 / math.sqrt(8)


def test_upper_bound_examples():
    assert nlcs_upper_bound(5, 5) == 1.0
    assert nlcs_upper_bound(1, 4) == 0.5
    assert nlcs_upper_bound(10, 40) == 0.5
    with pytest.raises(KernelContractError):
        nlcs_upper_bound(0, 3)


def test_contract_errors():
    with pytest.raises(KernelContractError):
        lcs_length([], [1])
    with pytest.raises(KernelContractError):
        lcs_length([0, -1], [1])
    with pytest.raises(KernelContractError):
        lcs_length([0, 5], [1], alphabet_size=5)
    assert SimilarityKernel(alphabet_size=6).lcs_length([0, 5], [5]) == 1


def test_word_boundaries():
    # lengths straddling multiples of 64 exercise the carry between words
    rng = np.random.default_rng(11)
    for m in (63, 64, 65, 127, 128, 129, 191, 192, 193):
        for sigma in (1, 2, 4):
            a = rng.integers(0, sigma, m)
            b = rng.integers(0, sigma, rng.integers(1, 260))
            assert lcs_length(a, b) == lcs_dp(a, b)
    ones = np.zeros(200, np.int64)
    assert lcs_length(ones, ones) == 200


seqs = st.lists(st.integers(0, 5), min_size=1, max_size=12)


@given(seqs, seqs)
def test_dp_matches_enumeration(a, b):
    assert lcs_length(a, b, KernelBackend.REFERENCE_DP) == lcs_by_enumeration(a, b)


@given(st.lists(st.integers(0, 63), min_size=1, max_size=300),
       st.lists(st.integers(0, 63), min_size=1, max_size=300))
def test_backends_agree(a, b):
    assert lcs_length(a, b, KernelBackend.BIT_PARALLEL) == lcs_length(a, b, KernelBackend.REFERENCE_DP)


@given(seqs, seqs, st.integers(0, 5))
def test_axioms(a, b, c):
    n = lcs_length(a, b)
    assert n == lcs_length(b, a)
    assert 0 <= n <= min(len(a), len(b))
    assert lcs_length(a + [c], b + [c]) == n + 1
    s = nlcs(a, b)
    assert 0.0 <= s <= 1.0
    assert s <= nlcs_upper_bound(len(a), len(b))
    assert (s == 1.0) == (a == b)
