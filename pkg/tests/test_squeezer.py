import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ladder
from pdcsim.errors import CutoffTooSmall, ZeroGain
from pdcsim.squeezer import (
    SqueezerState,
    g2_analytic,
    gain_curve,
    mean_photon_number,
    mean_photon_to_squeezing_db,
    photon_number_distribution,
    sample_photon_numbers,
)


def _db(n):
    return float(20 * mpmath.log10(mpmath.e) * mpmath.asinh(mpmath.sqrt(n)))


@pytest.mark.parametrize("n", [0.0, 0.1, 1.0, 2.5, 10.0])
def test_squeezing_db_against_high_precision(n):
    assert mean_photon_to_squeezing_db(n) == pytest.approx(_db(n), abs=1e-10)


def test_squeezing_db_reference_values():
    assert mean_photon_to_squeezing_db(1.0) == pytest.approx(7.6555, abs=1e-4)
    assert mean_photon_to_squeezing_db(2.5) == pytest.approx(10.7613, abs=1e-4)
    with pytest.raises(ValueError):
        mean_photon_to_squeezing_db(-0.1)


def test_state_validation():
    with pytest.raises(ValueError):
        SqueezerState([], 0.1)
    with pytest.raises(ValueError):
        SqueezerState([0.5, -0.5], 0.1)
    with pytest.raises(ValueError):
        SqueezerState([1.0], -0.1)


def test_mode_photons():
    s = SqueezerState([0.8, 0.6], 0.5)
    np.testing.assert_allclose(s.mode_photons, np.sinh([0.4, 0.3]) ** 2)
    assert mean_photon_number(s) == pytest.approx(np.sinh(0.4) ** 2 + np.sinh(0.3) ** 2)


def test_single_mode_g2_is_two():
    assert g2_analytic(SqueezerState([1.0], 1.3)) == pytest.approx(2.0)


def test_g2_analytic_low_gain_limit():
    c = ladder(10, 0.7)
    k = 1 / np.sum(c**4)
    assert g2_analytic(SqueezerState(c, 1e-4)) == pytest.approx(1 + 1 / k, rel=1e-7)


def test_g2_undefined_at_zero_gain():
    with pytest.raises(ZeroGain):
        g2_analytic(SqueezerState([1.0], 0.0))


def test_gain_curve_fields():
    c = ladder(4)
    out = gain_curve(c, [0.0, 0.25, 1.0], scale=0.8)
    np.testing.assert_allclose(out["gain"], [0.0, 0.4, 0.8])
    np.testing.assert_allclose(out["n_single_mode"], np.sinh(out["gain"]) ** 2)
    np.testing.assert_allclose(out["n_linear"], out["gain"] ** 2)
    np.testing.assert_allclose(out["n_multimode"], 4 * np.sinh(out["gain"] / 2) ** 2)
    with pytest.raises(ValueError):
        gain_curve(c, [-1.0], 1.0)


def test_distribution_single_mode_is_geometric():
    s = SqueezerState([1.0], 0.6)
    n = s.mode_photons[0]
    p = photon_number_distribution(s, 200)
    k = np.arange(201)
    np.testing.assert_allclose(p, n**k / (1 + n) ** (k + 1), rtol=1e-10, atol=1e-300)


def test_distribution_two_equal_modes_is_negative_binomial():
    # sum of two iid geometrics: P(N) = (N + 1) (1 - q)^2 q^N
    s = SqueezerState(np.sqrt([0.5, 0.5]), 0.8)
    q = s.mode_photons[0] / (1 + s.mode_photons[0])
    p = photon_number_distribution(s, 150)
    k = np.arange(151)
    np.testing.assert_allclose(p, (k + 1) * (1 - q) ** 2 * q**k, rtol=1e-9)
    assert p @ k == pytest.approx(mean_photon_number(s), rel=1e-8)


def test_cutoff_too_small_reports_requirement():
    s = SqueezerState([1.0], 1.2)
    with pytest.raises(CutoffTooSmall) as info:
        photon_number_distribution(s, 5)
    need = info.value.required
    assert need > 5
    assert photon_number_distribution(s, need).sum() == pytest.approx(1.0, abs=1e-9)


def test_total_tail_checked_for_many_modes():
    s = SqueezerState(ladder(40), 1.0)
    with pytest.raises(CutoffTooSmall):
        photon_number_distribution(s, 6)


def test_samples_chunking_invariant():
    s = SqueezerState(ladder(3, 0.5), 0.9)
    full_s, full_i = sample_photon_numbers(s, 11, pulses=70000)
    np.testing.assert_array_equal(full_s, full_i)
    part, _ = sample_photon_numbers(s, 11, pulses=1000, first_pulse=65000)
    np.testing.assert_array_equal(part, full_s[65000:66000])


def test_sample_mean_matches_sinh2():
    s = SqueezerState(ladder(3, 0.5), 0.9)
    n = s.mode_photons
    sig, _ = sample_photon_numbers(s, 5, pulses=200000)
    # thermal variance n (1 + n); allow 4 standard errors
    np.testing.assert_array_less(np.abs(sig.mean(axis=0) - n), 4 * np.sqrt(n * (1 + n) / 200000))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=1, max_size=6),
       st.floats(min_value=0.01, max_value=1.0))
def test_distribution_normalized_and_mean_correct(values, gain):
    s = SqueezerState(np.array(values) / np.linalg.norm(values), gain)
    try:
        p = photon_number_distribution(s, 60)
    except CutoffTooSmall as exc:
        p = photon_number_distribution(s, exc.required)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.arange(p.size) @ p == pytest.approx(mean_photon_number(s), rel=1e-6, abs=1e-9)


def test_mean_photon_number_at_unit_power():
    s = SqueezerState([1.0], np.arcsinh(np.sqrt(2.5)))
    assert mean_photon_number(s) == pytest.approx(2.5, rel=1e-14)
    assert mean_photon_number(SqueezerState([0.3, 0.7], 0.0)) == 0.0


def test_many_equal_modes_approach_linear_gain():
    b = 0.8
    n = [mean_photon_number(SqueezerState(ladder(m), b)) for m in (1, 10, 10000)]
    assert abs(n[-1] - b**2) < 1e-4 < abs(n[0] - b**2)
    assert np.all(np.diff(n) < 0)


def test_single_mode_gain_is_superlinear():
    out = gain_curve([1.0], [0.25, 0.5, 1.0, 2.0], scale=1.0)
    n = out["n_single_mode"]
    assert n[1] > 2 * n[0] and n[2] > 2 * n[1] and n[3] > 2 * n[2]
    assert np.all(gain_curve([1.0], [0.0], 1.0)[0].tolist() == np.zeros(5))


def test_two_equal_modes_g2_is_one_and_a_half():
    for b in (1e-3, 0.5, 3.0):
        assert g2_analytic(SqueezerState(ladder(2), b)) == pytest.approx(1.5, rel=1e-12)


def test_geometric_values_at_unit_mean():
    s = SqueezerState([1.0], np.arcsinh(1.0))
    p = photon_number_distribution(s, 40)
    np.testing.assert_allclose(p[:3], [0.5, 0.25, 0.125], rtol=1e-12)
    vac = photon_number_distribution(SqueezerState([1.0], 0.0), 3)
    np.testing.assert_array_equal(vac, [1.0, 0.0, 0.0, 0.0])


def test_two_mode_distribution_is_self_convolution():
    s = SqueezerState(ladder(2), 0.9)
    single = photon_number_distribution(SqueezerState([1.0], 0.9 / np.sqrt(2)), 100)
    np.testing.assert_allclose(photon_number_distribution(s, 100), np.convolve(single, single)[:101],
                               rtol=1e-12, atol=1e-300)


def test_vacuum_samples_are_zero():
    sig, idl = sample_photon_numbers(SqueezerState(ladder(3), 0.0), 1, pulses=1000)
    assert not sig.any() and not idl.any()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=40))
def test_g2_analytic_low_gain_matches_schmidt(values):
    from pdcsim.schmidt import g2_low_gain

    c = np.array(values) / np.linalg.norm(values)
    g2 = g2_analytic(SqueezerState(c, 1e-3))
    assert abs(g2 - g2_low_gain(c)) < 1e-6
    assert 1.0 < g2 <= 2.0
