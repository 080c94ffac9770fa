import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dftbeam import BeamSelection, analog_beamformer, beam_projection_powers, build_dft

from conftest import crandn


def direct_dft_entry(M, m, n):
    return cmath.exp(2j * math.pi * m * n / M) / math.sqrt(M)


def test_order_one():
    assert np.array_equal(build_dft(1).entries, np.array([[1.0 + 0j]]))


def test_order_two():
    U = build_dft(2).entries
    np.testing.assert_allclose(U, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)


def test_order_four_entry():
    # exp(j 2 pi 3/4) / 2 = -j / 2
    assert abs(build_dft(4).entries[1, 3] - (-0.5j)) < 1e-15


def test_rejects_zero_order():
    with pytest.raises(ValueError):
        build_dft(0)


@pytest.mark.parametrize("M", [1, 2, 3, 8, 17, 64, 256])
def test_unitary_constant_modulus(M):
    U = build_dft(M).entries
    eye = np.eye(M)
    assert np.max(np.abs(U @ U.conj().T - eye)) < 1e-12
    assert np.max(np.abs(U.conj().T @ U - eye)) < 1e-12
    assert np.max(np.abs(np.abs(U) - 1 / math.sqrt(M))) < 1e-12


def test_build_is_pure():
    assert build_dft(32).entries.tobytes() == build_dft(32).entries.tobytes()


def test_first_row_beamformer():
    F = analog_beamformer(build_dft(2), [0]).matrix
    np.testing.assert_allclose(F, [[1 / math.sqrt(2), 1 / math.sqrt(2)]], atol=1e-15)


def test_two_beam_orthonormal():
    F = analog_beamformer(build_dft(4), [0, 2]).matrix
    assert np.max(np.abs(F @ F.conj().T - np.eye(2))) < 1e-12


def test_rows_match_elementwise_formula():
    F = analog_beamformer(build_dft(8), [1, 5, 6]).matrix
    expected = np.array([[direct_dft_entry(8, m, n) for n in range(8)] for m in (1, 5, 6)])
    np.testing.assert_allclose(F, expected, atol=1e-14)


def test_selection_errors():
    cb = build_dft(4)
    with pytest.raises(ValueError, match="duplicate"):
        analog_beamformer(cb, [1, 1])
    with pytest.raises(ValueError, match="out of range"):
        analog_beamformer(cb, [0, 4])
    with pytest.raises(ValueError):
        BeamSelection([])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40).flatmap(
    lambda M: st.tuples(st.just(M), st.lists(st.integers(0, M - 1), min_size=1, max_size=M, unique=True))
))
def test_beamformer_rows_orthonormal(case):
    M, idx = case
    F = analog_beamformer(build_dft(M), idx).matrix
    assert np.max(np.abs(F @ F.conj().T - np.eye(len(idx)))) < 1e-12


def test_projection_aligned_vector():
    M = 16
    U = build_dft(M).entries
    p = beam_projection_powers(build_dft(M), np.sqrt(M) * np.conj(U[3]))
    assert p[3] == pytest.approx(M, rel=1e-12)
    assert np.max(np.delete(p, 3)) < 1e-20


def test_projection_zero_and_canonical():
    assert np.all(beam_projection_powers(build_dft(5), np.zeros(5)) == 0)
    np.testing.assert_allclose(beam_projection_powers(build_dft(4), [1, 0, 0, 0]), [0.25] * 4, atol=1e-15)


def test_projection_length_mismatch():
    with pytest.raises(ValueError):
        beam_projection_powers(build_dft(4), np.ones(3))


@pytest.mark.parametrize("M", [3, 16, 100])
def test_parseval(rng, M):
    for _ in range(20):
        v = crandn(rng, M)
        total = beam_projection_powers(build_dft(M), v).sum()
        assert abs(total - np.vdot(v, v).real) <= 1e-10 * np.vdot(v, v).real
