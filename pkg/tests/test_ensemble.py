import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.signal import find_peaks

from kicked_rotor import (
    InvalidParameter, KickSchedule, SourceSpec, average_incoherently, sample_source, scan_initial_momentum,
)
from kicked_rotor.ensemble import single_profile


@pytest.fixture(scope="module")
def fig6(grid, sigma_w):
    """Four kicks at T_T/2, source centred on one recoil with sigma 0.18."""
    sch = KickSchedule.from_l(4, 1, 1.0)
    return {
        eng: average_incoherently(sch, SourceSpec(1.0, 0.18), eng, grid, sigma_w)
        for eng in ("propagator", "oracle")
    }


def _order(avg, center):
    sel = np.abs(avg.momentum - center) < 1.0
    return avg.momentum[sel], avg.density[sel]


def test_sample_source_shape():
    nodes, w = sample_source(SourceSpec(0.4, 0.18, 33, 3.0))
    assert len(nodes) == 33
    assert np.argmax(w) == 16
    np.testing.assert_allclose(w, w[::-1], rtol=1e-14)
    np.testing.assert_allclose(nodes - 0.4, -(nodes - 0.4)[::-1], atol=1e-15)
    assert nodes[0] == pytest.approx(0.4 - 0.54) and nodes[-1] == pytest.approx(0.4 + 0.54)


@given(st.floats(-3, 3), st.floats(1e-6, 2), st.integers(3, 201), st.floats(0.5, 5))
def test_weights_normalized(mean, sigma, n, span):
    _, w = sample_source(SourceSpec(mean, sigma, n, span))
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(w > 0)


@pytest.mark.parametrize("kw", [dict(sigma=0.0), dict(sigma=0.1, n_samples=2), dict(sigma=0.1, span=0)])
def test_source_validation(kw):
    with pytest.raises(InvalidParameter):
        SourceSpec(0.0, **kw)


@pytest.mark.parametrize("engine", ["propagator", "oracle"])
def test_delta_source_limit(grid, engine):
    sch = KickSchedule.from_l(3, 1, 1.0)
    avg = average_incoherently(sch, SourceSpec(0.6, 1e-6, 9), engine, grid)
    single = single_profile(sch, 0.6, engine, grid)
    assert np.abs(avg.density - single.density).max() * grid.dp < 1e-6
    assert np.ptp(avg.per_sample, axis=0).max() * grid.dp < 1e-6


def test_incoherent_sum_is_linear(small_grid):
    sch = KickSchedule.from_l(2, 2, 1.0)
    avg = average_incoherently(sch, SourceSpec(0.3, 0.2, 7), "propagator", small_grid, 15.0)
    acc = sum(w * single_profile(sch, p, "propagator", small_grid, 15.0).density
              for p, w in zip(avg.nodes, avg.weights))
    np.testing.assert_allclose(avg.density, acc, rtol=0, atol=1e-12)
    assert avg.profile.integral() == pytest.approx(1.0, abs=1e-6)


def test_engine_equivalence(fig6):
    orders, a = fig6["propagator"].order_masses()
    _, b = fig6["oracle"].order_masses()
    assert np.abs(a - b).max() < 2e-3


def test_oracle_engine_needs_integer_l(grid):
    with pytest.raises(InvalidParameter):
        average_incoherently(KickSchedule.from_l(2, 1.4, 1.0), SourceSpec(0, 0.1), "oracle", grid)


def test_unknown_engine(grid):
    with pytest.raises(InvalidParameter):
        average_incoherently(KickSchedule.from_l(2, 1, 1.0), SourceSpec(0, 0.1), "magic", grid)


def test_split_order_at_one_recoil(fig6):
    p, d = _order(fig6["propagator"], 1.0)
    peaks, _ = find_peaks(d, prominence=0.05 * d.max())
    assert len(peaks) >= 2


def test_high_orders_narrower_than_source(fig6):
    for center in (-5.0, -7.0):
        p, d = _order(fig6["propagator"], center)
        mu = np.average(p, weights=d)
        assert np.sqrt(np.average((p - mu) ** 2, weights=d)) < 0.18


def test_scan_two_kick_antiresonance():
    scan, _ = scan_initial_momentum(KickSchedule.from_l(2, 1, 1.0), [0.0, 1.0, 2.0], engine="oracle")
    e = scan.energy
    assert e[1] > e[0] and e[1] > e[2]
    assert e[0] < 1e-12 and e[2] < 1e-12


def test_scan_two_kick_resonance():
    scan, _ = scan_initial_momentum(KickSchedule.from_l(2, 2, 1.0), [0.0, 0.5, 1.0], engine="oracle")
    e = scan.energy
    assert e[1] < e[0] and e[1] < e[2]


def _interior_maxima(e):
    return len(find_peaks(e)[0])


def test_scan_rate_scales_with_l():
    p = np.linspace(0, 2, 241)
    e1 = scan_initial_momentum(KickSchedule.from_l(2, 1, 1.0), p, engine="oracle")[0].energy
    e3 = scan_initial_momentum(KickSchedule.from_l(2, 3, 0.9), p, engine="oracle")[0].energy
    assert _interior_maxima(e1) == 1 and _interior_maxima(e3) == 3


def test_scan_engines_agree(grid):
    p = np.linspace(0, 2, 9)
    sch = KickSchedule.from_l(2, 3, 0.9)
    a = scan_initial_momentum(sch, p, engine="oracle")[0]
    b = scan_initial_momentum(sch, p, engine="propagator", grid=grid)[0]
    np.testing.assert_allclose(a.energy, b.energy, rtol=1e-2, atol=1e-9)


def test_scan_periodicity_survives_averaging(grid, sigma_w):
    # mean p_i = 0.2 and 0.2 + 2/l give the same averaged energy (l = 2)
    sch = KickSchedule.from_l(2, 2, 1.0)
    scan, _ = scan_initial_momentum(sch, [0.2, 1.2], SourceSpec(0, 0.18, 17), "oracle", grid, sigma_w)
    assert scan.energy[0] == pytest.approx(scan.energy[1], rel=1e-3)


def test_scan_orders_output_like_input():
    p = [1.5, 1.0, 0.25]
    scan, dists = scan_initial_momentum(KickSchedule.from_l(2, 1, 1.0), p, engine="oracle")
    np.testing.assert_array_equal(scan.values, p)
    assert len(dists) == 3


def test_scan_requires_monotone_grid():
    with pytest.raises(InvalidParameter):
        scan_initial_momentum(KickSchedule.from_l(2, 1, 1.0), [0.0, 1.0, 0.5], engine="oracle")


def test_parallel_matches_serial(small_grid):
    sch = KickSchedule.from_l(3, 2, 1.0)
    spec = SourceSpec(0.5, 0.1, 5)
    a = average_incoherently(sch, spec, "propagator", small_grid, 15.0, workers=1)
    b = average_incoherently(sch, spec, "propagator", small_grid, 15.0, workers=2)
    assert np.array_equal(a.density, b.density)
