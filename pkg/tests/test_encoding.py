import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from carriersig.encoding import Encoding, encode, encode_amplitude, encode_l2
from carriersig.errors import DegenerateInputError, InsufficientDataError

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
fluct = arrays(np.float64, st.integers(1, 300), elements=finite)


@pytest.mark.parametrize("E, expected", [
    ([1, -1], [1, 0]),
    ([2, -2, 0], [math.sqrt(2 / 3), 0, math.sqrt(1 / 3)]),
    ([0, 0, 0, 0], [0.5, 0.5, 0.5, 0.5]),
])
def test_amplitude_examples(E, expected):
    q = encode_amplitude(np.array(E, dtype=float))
    np.testing.assert_allclose(q.values, expected, atol=1e-15)
    assert q.encoding is Encoding.AMPLITUDE


@pytest.mark.parametrize("E, expected", [
    ([1, -1], [1, 0]),
    ([2, -2, 0], np.array([1, 0, 0.5]) / math.sqrt(1.25)),
    ([0, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)]),
])
def test_l2_examples(E, expected):
    r = encode_l2(np.array(E, dtype=float))
    np.testing.assert_allclose(r.values, expected, atol=1e-15)


def test_l2_zero_vector_rejected():
    with pytest.raises(DegenerateInputError):
        encode_l2(np.array([-3.0, -3.0]))


def test_amplitude_constant_negative_is_uniform():
    q = encode_amplitude(np.array([-3.0, -3.0, -3.0, -3.0]))
    np.testing.assert_allclose(q.values, 0.5)


def test_empty_rejected():
    with pytest.raises(InsufficientDataError):
        encode_amplitude(np.array([]))


def test_dispatch():
    E = np.array([2.0, -2.0, 0.0])
    assert encode(E, "l2").encoding is Encoding.L2
    np.testing.assert_array_equal(encode(E).values, encode_amplitude(E).values)


@given(fluct)
def test_amplitude_is_probability_amplitude(E):
    q = encode_amplitude(E).values
    assert abs(np.sqrt(q @ q) - 1.0) < 1e-10
    assert np.all(q >= 0) and np.all(q <= 1)
    assert abs((q ** 2).sum() - 1.0) < 1e-10


@given(fluct)
def test_l2_unit_norm(E):
    if np.all(E == -np.max(np.abs(E))) and np.max(np.abs(E)) > 0:
        return
    r = encode_l2(E)
    assert abs(r.norm - 1.0) < 1e-10


@given(fluct, st.sampled_from([0.5, 3.0, 100.0]))
def test_scale_invariance(E, c):
    np.testing.assert_allclose(encode_amplitude(c * E).values, encode_amplitude(E).values,
                               atol=1e-12, rtol=0)


@given(fluct)
def test_monotone(E):
    if np.max(np.abs(E)) == 0:
        return
    q = encode_amplitude(E).values
    order = np.argsort(E, kind="stable")
    Es, qs = E[order], q[order]
    # strict only for gaps resolvable relative to E_max
    strictly_up = np.diff(Es) > 1e-9 * np.max(np.abs(E))
    assert np.all(np.diff(qs) >= 0)
    assert np.all(np.diff(qs)[strictly_up] > 0)
