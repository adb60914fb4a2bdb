import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kicked_rotor import (
    EnergyScan, InvalidParameter, KickSchedule, Profile, SourceSpec, average_incoherently, direct_variance,
    fit_orders, init_wavepacket, ladder_amplitudes, momentum_distribution, reduce_image, repeat_statistics,
    run_schedule, second_moment,
)
from kicked_rotor.distributions import comb_masses

AXIS = np.arange(-4096, 4097) / 128.0  # +-32 recoils at the default grid spacing


def gaussians(p, areas, centers, widths):
    out = np.zeros_like(p)
    for a, c, s in zip(areas, centers, widths):
        out += a / (math.sqrt(2 * math.pi) * s) * np.exp(-0.5 * ((p - c) / s) ** 2)
    return out


def with_spike(prof, at=20.0, mass=1e-3):
    d = prof.density.copy()
    d[np.argmin(np.abs(prof.momentum - at))] += mass / prof.spacing
    return Profile(prof.momentum, d)


@pytest.fixture(scope="module")
def clean(grid, sigma_w):
    """Two kicks on resonance from a 5 um packet at rest."""
    s = run_schedule(init_wavepacket(grid, sigma_w, 0.0), KickSchedule.from_l(2, 2, 1.0))
    return momentum_distribution(s)[1]


def test_variance_of_unkicked_packet(grid, sigma_w):
    _, prof = momentum_distribution(init_wavepacket(grid, sigma_w, 0.0))
    assert direct_variance(prof) < 1e-3


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(1, 3), st.floats(0, 2.5), st.floats(0, 1.99))
def test_variance_of_oracle_equals_second_moment(n, l, phi, beta):
    amps = ladder_amplitudes(n, l, beta, phi)
    assert direct_variance(amps.distribution()) == pytest.approx(second_moment(amps), rel=1e-9, abs=1e-12)


def test_spike_shifts_variance(clean):
    base = direct_variance(clean)
    shift = direct_variance(with_spike(clean)) - base
    # mass 1e-3 at 20 recoils adds 1e-3 * 20^2, diluted by the extra mass
    assert shift == pytest.approx((400 - base) * 1e-3 / 1.001, rel=1e-3)
    assert shift == pytest.approx(0.4, rel=0.1)


def test_window_options(clean):
    full = direct_variance(clean)
    # auto drops orders below 1e-4 beyond the margin, a ~1e-6 relative change here
    assert direct_variance(clean, window="auto") == pytest.approx(full, rel=1e-5)
    assert direct_variance(clean, window=(-100, 100)) == pytest.approx(full, rel=1e-12)
    assert direct_variance(clean, window=3.0) < full
    with pytest.raises(InvalidParameter):
        direct_variance(clean, window=(500, 600))
    with pytest.raises(InvalidParameter):
        direct_variance(clean, window="everything")


def test_variance_about_center(clean):
    assert direct_variance(clean, center=1.0) == pytest.approx(direct_variance(clean) + 1.0, rel=1e-9)


def test_fit_recovers_synthetic_gaussians():
    areas, centers, widths = [0.5, 0.3, 0.2], [-2.03, 0.02, 1.97], [0.15, 0.2, 0.12]
    prof = Profile(AXIS, gaussians(AXIS, areas, centers, widths))
    res, energy = fit_orders(prof, 0.0, 1, seed_width=0.18)
    assert res.converged
    np.testing.assert_allclose(res.areas, areas, rtol=1e-2)
    np.testing.assert_allclose(res.centers, centers, rtol=1e-2)
    np.testing.assert_allclose(res.widths, widths, rtol=1e-2)


def test_fit_of_broadened_comb():
    amps = ladder_amplitudes(3, 1, 0.15, 1.2)
    d = amps.distribution()
    prof = Profile(AXIS, gaussians(AXIS, d.probabilities, d.momenta, np.full(len(d.momenta), 0.18)))
    res, energy = fit_orders(prof, 0.15, 8, seed_width=0.18)
    assert energy == pytest.approx(second_moment(amps) + 0.18**2, rel=2e-2)


def test_fit_degenerate_orders():
    prof = Profile(AXIS, gaussians(AXIS, [0.7, 0.3], [0.0, 2.0], [0.1, 0.1]))
    res, energy = fit_orders(prof, 0.0, 10, seed_width=0.1)
    assert res.converged
    idle = np.abs(res.orders) >= 2
    assert np.all(~res.fitted[idle] | (res.areas[idle] < 1e-6))
    assert energy == pytest.approx(0.3 * 4 + 0.01, rel=1e-3)


def test_fit_invariants(clean):
    res, _ = fit_orders(clean, 0.0, 6)
    seeds = 2.0 * res.orders
    assert np.all(res.widths > 0)
    assert np.all(np.abs(res.centers - seeds) <= 0.5)


def test_fit_rejects_empty():
    with pytest.raises(InvalidParameter):
        fit_orders(Profile(AXIS, np.zeros_like(AXIS)), 0.0, 3)


def test_estimators_agree_on_clean_data(clean):
    _, fitted = fit_orders(clean, 0.0, 6)
    direct = direct_variance(clean)
    assert direct > 1
    assert abs(fitted - direct) / direct < 2e-2


def test_fit_ignores_far_spike(clean):
    _, before = fit_orders(clean, 0.0, 6)
    _, after = fit_orders(with_spike(clean), 0.0, 6)
    assert abs(after - before) / before < 5e-3


def test_energy_floor_unkicked_ensemble(grid, sigma_w):
    avg = average_incoherently(KickSchedule.from_l(0, 1, 1.0), SourceSpec(1.0, 0.18), "propagator", grid, sigma_w)
    _, energy = fit_orders(avg.profile, 0.5, 2, seed_width=0.18)
    assert energy == pytest.approx(1.0 + 0.18**2, rel=2e-2)


def test_repeat_statistics():
    a = EnergyScan("p", [0, 1], [7.0, 1.0], [0, 0])
    b = EnergyScan("p", [0, 1], [9.0, 1.0], [0, 0])
    r = repeat_statistics([a, b])
    np.testing.assert_allclose(r.energy, [8.0, 1.0])
    np.testing.assert_allclose(r.uncertainty, [math.sqrt(2), 0.0])


def test_repeat_statistics_by_hand():
    rng = np.random.default_rng(3)
    reps = [EnergyScan("p", [0, 1, 2], 5 + rng.normal(size=3), np.zeros(3)) for _ in range(3)]
    r = repeat_statistics(reps)
    e = np.array([s.energy for s in reps])
    mean = e.sum(axis=0) / 3
    std = np.sqrt(((e - mean) ** 2).sum(axis=0) / 2)
    np.testing.assert_allclose(r.energy, mean, rtol=1e-14)
    np.testing.assert_allclose(r.uncertainty, std, rtol=1e-12)


def test_repeat_statistics_errors():
    a = EnergyScan("p", [0, 1], [7.0, 1.0], [0, 0])
    with pytest.raises(InvalidParameter):
        repeat_statistics([a])
    with pytest.raises(InvalidParameter):
        repeat_statistics([a, EnergyScan("p", [0, 2], [7.0, 1.0], [0, 0])])


def test_energy_scan_validation():
    with pytest.raises(InvalidParameter):
        EnergyScan("p", [0, 1], [1.0], [0, 0])
    with pytest.raises(InvalidParameter):
        EnergyScan("p", [0], [-1.0], [0])


def test_reduce_separable():
    f = np.exp(-np.linspace(-3, 3, 50) ** 2)
    g = np.linspace(1, 2, 20)
    prof = reduce_image(np.outer(g, f), axis=0)
    np.testing.assert_allclose(prof, f / f.sum(), rtol=1e-12)


def test_reduce_transposed():
    m = np.random.default_rng(0).random((30, 40))
    np.testing.assert_array_equal(reduce_image(m, axis=0), reduce_image(m.T, axis=1))


def test_reduce_comb_blobs():
    dp = 1 / 64
    p = np.arange(-640, 641) * dp
    masses = np.array([0.1, 0.15, 0.4, 0.25, 0.1])
    centers = 2.0 * np.arange(-2, 3) + 0.5
    rows = np.linspace(0.5, 1.5, 25)
    img = np.outer(rows, gaussians(p, masses, centers, np.full(5, 0.1)))
    prof = reduce_image(img, axis=0, spacing=dp)
    assert prof.sum() * dp == pytest.approx(1.0, abs=1e-12)
    _, got = comb_masses(p, prof * dp, 0.25, np.arange(-2, 3))
    np.testing.assert_allclose(got, masses, atol=1e-6)


@pytest.mark.parametrize("m", [np.zeros((3, 3)), -np.ones((2, 2)), np.ones(4)])
def test_reduce_rejects(m):
    with pytest.raises(InvalidParameter):
        reduce_image(m)


def test_profile_window_is_profile(clean):
    sub = clean.window(-24.0, 24.0)
    assert isinstance(sub, Profile)
    assert sub.momentum.min() >= -24.0 and sub.momentum.max() <= 24.0
    assert direct_variance(sub) == pytest.approx(direct_variance(clean), rel=1e-9)
