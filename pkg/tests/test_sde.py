"""Diffusion simulation: drift catalog, stationarity, determinism."""

import numpy as np
import pytest

from sizedist import (
    ExpStretchedExponential,
    Lognormal,
    NormalMixture,
    NormalModel,
    SdeSpec,
    ShiftedExponential,
    StepSizeError,
    SupportError,
    TruncatedNormal,
    drift,
    score_identity_check,
    simulate,
    stationary_check,
)
from sizedist import _kernels_py

CATALOG = [
    ExpStretchedExponential(0.45, 2000.0),
    NormalModel(6.5, 2.0),
    ShiftedExponential(0.9, 8.0),
    TruncatedNormal(6.0, 2.5, 8.0),
    NormalMixture((7.4, 5.0), (1.9, 1.4), (0.7,)),
    NormalMixture((8.5, 6.6, 4.8), (2.2, 1.7, 1.3), (0.08, 0.52)),
]


@pytest.mark.parametrize("target", CATALOG, ids=lambda t: type(t).__name__)
def test_score_identity_holds_for_every_catalog_entry(target):
    spec = SdeSpec.for_target(target)
    assert score_identity_check(spec) < 1e-6


def test_score_identity_holds_for_any_diffusion_scale():
    # for scale-bearing drifts, 2b/a is invariant in a
    for a in (0.25, 1.0, 7.0):
        spec = SdeSpec(target=ExpStretchedExponential(0.45, 2000.0), diffusion_sq=a)
        assert score_identity_check(spec) < 1e-6


def test_normal_target_needs_matched_diffusion():
    # the mean-reverting drift has fixed amplitude: mismatched a breaks the
    # stationarity identity, which the score check must expose
    bad = SdeSpec(target=NormalModel(0.0, 2.0), diffusion_sq=1.0)
    assert score_identity_check(bad) > 0.1
    good = SdeSpec.for_target(NormalModel(0.0, 2.0))
    assert good.diffusion_sq == pytest.approx(4.0)
    assert score_identity_check(good) < 1e-6


def test_drift_values_hand_checked():
    spec = SdeSpec(target=ShiftedExponential(0.9, 8.0), diffusion_sq=2.0)
    np.testing.assert_allclose(drift(spec, [8.5, 12.0]), [-0.9, -0.9])

    spec = SdeSpec.for_target(NormalModel(3.0, 1.0))
    np.testing.assert_allclose(drift(spec, [2.0, 3.0, 5.0]), [0.5, 0.0, -1.0])

    gamma, eta = 0.5, np.e**2
    spec = SdeSpec(target=ExpStretchedExponential(gamma, eta), diffusion_sq=1.0)
    # at y = ln(eta): expm1(0) = 0 -> zero drift (the stationary mode)
    assert drift(spec, np.log(eta)) == pytest.approx(0.0, abs=1e-15)


def test_spec_rejects_uncataloged_targets():
    with pytest.raises(ValueError):
        SdeSpec.for_target(Lognormal(5.0, 1.0))  # size-space law has no drift
    with pytest.raises(ValueError):
        SdeSpec(target=NormalModel(0.0, 1.0), diffusion_sq=0.0)


def test_ou_moments_match_theory():
    spec = SdeSpec.for_target(NormalModel(1.0, 0.8))
    draws = simulate(spec, dt=0.01, n_steps=1_000_000, burn_in=100_000, thin=16, seed=42)
    assert np.mean(draws) == pytest.approx(1.0, abs=0.05)
    assert np.std(draws) == pytest.approx(0.8, abs=0.05)


def test_near_zero_noise_relaxes_to_the_fixed_point():
    # with vanishing diffusion the recursion is y <- y (1 - dt/2) toward mu
    spec = SdeSpec(target=NormalModel(0.0, 1.0), diffusion_sq=1e-18)
    draws = simulate(spec, dt=0.02, n_steps=2_000, burn_in=0, thin=1, seed=0, y0=4.0)
    expected = 4.0 * (1.0 - 0.01) ** np.arange(1, 2_001)
    np.testing.assert_allclose(draws, expected, atol=1e-6)


def test_reflecting_boundary_keeps_domain():
    spec = SdeSpec.for_target(ShiftedExponential(0.9, 8.0))
    draws = simulate(spec, n_steps=200_000, burn_in=10_000, thin=8, seed=3)
    assert draws.min() >= 8.0 - 1e-12


def test_half_line_targets_reflect_and_unbounded_do_not():
    assert SdeSpec.for_target(ShiftedExponential(1.0, 0.0)).reflecting
    assert SdeSpec.for_target(TruncatedNormal(0.0, 1.0, -1.0)).reflecting
    assert not SdeSpec.for_target(NormalModel(0.0, 1.0)).reflecting


def test_simulation_is_deterministic_per_seed():
    spec = SdeSpec.for_target(NormalModel(0.0, 1.0))
    a = simulate(spec, n_steps=50_000, burn_in=1_000, thin=4, seed=9)
    b = simulate(spec, n_steps=50_000, burn_in=1_000, thin=4, seed=9)
    c = simulate(spec, n_steps=50_000, burn_in=1_000, thin=4, seed=10)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_retained_count_formula():
    spec = SdeSpec.for_target(NormalModel(0.0, 1.0))
    n_steps, burn, thin = 10_007, 1_003, 13
    draws = simulate(spec, n_steps=n_steps, burn_in=burn, thin=thin, seed=1)
    assert draws.size == (n_steps - burn + thin - 1) // thin


def test_compiled_and_pure_paths_agree():
    spec = SdeSpec.for_target(NormalMixture((7.4, 5.0), (1.9, 1.4), (0.7,)))
    from sizedist.sde import _kernel_args

    code_c, params = _kernel_args(spec)
    n_steps, burn, thin = 30_000, 2_000, 4
    z = np.random.default_rng(12).standard_normal(n_steps)
    retained = (n_steps - burn + thin - 1) // thin
    out_py = np.empty(retained)
    kept_py = _kernels_py.euler_chain(
        code_c, params, 6.0, 0.02, np.sqrt(0.02), n_steps, burn, thin, 0.0, 0, z, out_py
    )
    from sizedist import COMPILED

    if not COMPILED:
        pytest.skip("compiled backend unavailable")
    from sizedist import _kernels

    out_c = np.empty(retained)
    kept_c = _kernels.euler_chain(
        code_c, params, 6.0, 0.02, np.sqrt(0.02), n_steps, burn, thin, 0.0, 0, z, out_c
    )
    assert kept_c == kept_py
    np.testing.assert_allclose(out_c, out_py, rtol=1e-12, atol=1e-12)


def test_step_size_guard_raises():
    # enormous dt at a distant start makes |b * dt| blow through the guard
    spec = SdeSpec.for_target(ExpStretchedExponential(0.45, 2000.0))
    with pytest.raises(StepSizeError):
        simulate(spec, dt=50.0, n_steps=2_000, burn_in=0, thin=1, seed=0, y0=40.0)


def test_config_validation():
    spec = SdeSpec.for_target(NormalModel(0.0, 1.0))
    with pytest.raises(ValueError):
        simulate(spec, dt=-0.1)
    with pytest.raises(ValueError):
        simulate(spec, n_steps=100, burn_in=200)
    with pytest.raises(ValueError):
        simulate(spec, thin=0)
    with pytest.raises(SupportError):
        simulate(SdeSpec.for_target(ShiftedExponential(1.0, 5.0)), y0=4.0)


def test_stationary_check_passes_own_target():
    spec = SdeSpec.for_target(NormalModel(6.5, 2.0))
    chk = stationary_check(spec, n_steps=1_500_000, burn_in=100_000, thin=64, seed=5)
    assert chk.passed
    assert chk.ks_distance < 0.02
    assert chk.n_retained == (1_500_000 - 100_000 + 63) // 64


def test_stationary_check_rejects_wrong_target():
    # negative control: compare the chain against a law it does not follow
    spec = SdeSpec.for_target(NormalModel(6.5, 2.0))
    chk = stationary_check(
        spec, target=NormalModel(8.0, 2.0), n_steps=1_500_000, burn_in=100_000,
        thin=64, seed=5,
    )
    assert not chk.passed
    assert chk.ks_distance > 0.1
