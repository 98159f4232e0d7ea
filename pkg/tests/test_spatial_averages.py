"""Measure-weighted spatial averages over the caustic: quadrature and closed
forms for mean sidelength, mean interior cosine, mean kappa^(2/3), and the
log-geometric mean of outer cosines.

Proves:
 Group 1 - Periodic quadrature
   - exact smooth integrals, spectral convergence, non-convergence error
 Group 2 - Normalization
   - circle closed form 2 pi (1-lambda)^(1/6)
   - dual route (quadrature vs K(s3) closed form) to 1e-11, incl. b != 1
   - independent scipy quadrature oracle, stressed near s3 -> 1
 Group 3 - Mean sidelength
   - circle value 2 sqrt(lambda); limit 2a as lambda -> b^2
   - closed form equals the K/Pi expression written out literally (b = 1)
   - dual-route agreement and N-periodic L/N matching
 Group 4 - Mean cosine and mean curvature
   - circle families 0 and 1/2; value at the ca = 0 caustic is exactly 0
   - closed form equals the printed Pi/K combination at generic lambda
   - kappa^(2/3): circle exactness, linear-identity route, discrete matching
 Group 5 - Log-geometric mean of outer cosines
   - circle families log(1/2) and the (-inf, 0) degenerate point
   - sign convention -sign(ca) across the sweep range
   - discrete product matching at lambda_5 (a = 5)
 Group 6 - Structure
   - monotonicity in lambda, range bounds, degeneracy guard, result fields
"""
from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
import scipy.integrate

import caustics.conic_geometry as cg
import caustics.spatial_averages as sa
from caustics.billiard_dynamics import find_caustic_for_period
from caustics.elliptic_integrals import complete_k, complete_pi
from caustics.errors import DomainError, NumericalError
from caustics.invariant_suite import build_periodic_orbit, evaluate_invariants

T12 = cg.BilliardTable(1.2, 1.0)
T2 = cg.BilliardTable(2.0, 1.0)
T5 = cg.BilliardTable(5.0, 1.0)
TB = cg.BilliardTable(3.0, 1.7)  # exercises every b != 1 code path
CIRCLE = cg.BilliardTable(1.0, 1.0)


def scipy_density_integral(table, caustic):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        val, _ = scipy.integrate.quad(
            lambda u: cg.measure_density(table, caustic, u),
            0.0,
            2.0 * math.pi,
            epsabs=1e-13,
            epsrel=1e-13,
            limit=400,
        )
    return val


# ----------------------------------------------------------------- group 1


def test_periodic_quadrature_exact_values():
    value, err = sa.periodic_quadrature(lambda u: np.sin(u) ** 2)
    assert value == pytest.approx(math.pi, abs=1e-13)
    assert err >= 0.0
    value, _ = sa.periodic_quadrature(lambda u: np.ones_like(u))
    assert value == pytest.approx(2.0 * math.pi, abs=1e-14)


def test_periodic_quadrature_spectral_convergence():
    # smooth periodic integrand: a handful of doublings reaches 1e-12
    value, err = sa.periodic_quadrature(lambda u: np.exp(np.cos(u)))
    bessel_i0 = 1.2660658777520084  # I_0(1), series value
    assert value == pytest.approx(2.0 * math.pi * bessel_i0, rel=1e-12)
    assert err < 1e-12


def test_periodic_quadrature_nonconvergence():
    with pytest.raises(NumericalError, match="defect"):
        sa.periodic_quadrature(lambda u: np.sign(np.cos(u)) * np.cos(u / 2.0 + 0.1))


# ----------------------------------------------------------------- group 2


def test_normalization_circle():
    for lam in (0.1, 0.5, 0.9):
        assert sa.normalization(CIRCLE, cg.CausticSpec(lam)) == pytest.approx(
            2.0 * math.pi * (1.0 - lam) ** (1.0 / 6.0), rel=1e-13
        )


def test_normalization_dual_route():
    for table in (T12, T2, T5, TB):
        for frac in (0.05, 0.5, 0.95):
            caustic = cg.CausticSpec(frac * table.b**2)
            quad, _ = sa.periodic_quadrature(lambda u: cg.measure_density(table, caustic, u))
            closed = sa.normalization(table, caustic)
            assert abs(quad - closed) / closed < 1e-11


def test_normalization_against_scipy_near_singular():
    # s3 = c^2/(a^2 - lambda) close to 1 stresses K near its log singularity
    caustic = cg.CausticSpec(0.99)
    val = sa.normalization(T5, caustic)
    assert math.isfinite(val) and val > 0.0
    assert val == pytest.approx(scipy_density_integral(T5, caustic), rel=1e-11)


# ----------------------------------------------------------------- group 3


def test_mean_sidelength_circle():
    for lam in (0.25, 0.5, 0.81):
        res = sa.mean_sidelength(CIRCLE, cg.CausticSpec(lam))
        assert res.value == pytest.approx(2.0 * math.sqrt(lam), rel=1e-13)


def test_mean_sidelength_limit_two_a():
    """As lambda -> b^2 the mean sidelength climbs toward 2a from below.
    The approach is logarithmic (the measure weight of the short focal
    chords decays like 1/K(s3)), so even at 1 - 1e-9 the gap is percents."""
    values = [
        sa.mean_sidelength(T2, cg.CausticSpec(1.0 - eps)).value
        for eps in (1e-3, 1e-6, 1e-9)
    ]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert all(v < 4.0 for v in values)
    assert values[-1] > 3.6


def test_mean_sidelength_closed_form_written_out():
    """The closed form is 2a (b^2 K + (lambda - b^2) Pi(s5, s3)) / (b sqrt(lambda) K);
    for b = 1 this is the K/Pi combination with no extra factor."""
    for lam in (0.2, 0.5, 0.8):
        s3 = 3.0 / (4.0 - lam)
        s5 = lam * s3
        k = complete_k(s3)
        literal = 2.0 * 2.0 / (math.sqrt(lam) * k) * ((lam - 1.0) * complete_pi(s5, s3) + k)
        assert sa.mean_sidelength(T2, cg.CausticSpec(lam)).value == pytest.approx(
            literal, rel=1e-13
        )


def test_mean_sidelength_dual_route():
    for table in (T12, T2, T5, TB):
        for frac in (0.1, 0.45, 0.9):
            caustic = cg.CausticSpec(frac * table.b**2)
            closed = sa.mean_sidelength(table, caustic, method="closed_form")
            quad = sa.mean_sidelength(table, caustic, method="quadrature")
            assert abs(closed.value - quad.value) / closed.value < 1e-9
            assert closed.method == "closed_form"
            assert quad.method == "quadrature"


def test_mean_sidelength_matches_five_periodic():
    caustic = find_caustic_for_period(T2, 5)
    report = evaluate_invariants(build_periodic_orbit(T2, 5))
    lbar = sa.mean_sidelength(T2, caustic).value
    assert abs(report.perimeter / 5.0 - lbar) / lbar < 1e-6


# ----------------------------------------------------------------- group 4


def test_mean_cosine_circle_families():
    assert sa.mean_cosine(CIRCLE, cg.CausticSpec(0.5)).value == pytest.approx(0.0, abs=1e-13)
    assert sa.mean_cosine(CIRCLE, cg.CausticSpec(0.75)).value == pytest.approx(0.5, rel=1e-13)


def test_mean_cosine_circle_linear_in_lambda():
    for lam in (0.1, 0.33, 0.9):
        assert sa.mean_cosine(CIRCLE, cg.CausticSpec(lam)).value == pytest.approx(
            2.0 * lam - 1.0, abs=1e-12
        )


def test_mean_cosine_zero_at_degenerate_caustic():
    # ca = a^2 b^2 - lambda (a^2 + b^2) = 0 at lambda = 0.8 exactly for a = 2
    assert sa.mean_cosine(T2, cg.CausticSpec(0.8)).value == 0.0


def test_mean_cosine_closed_form_written_out():
    """C = (r1/r3) ((s2 - s1) Pi(s2, s3) + s1 K(s3)) / (s2 K(s3)) away from
    the ca = 0 cancellation, with re-derived coefficients."""
    for table, lam in ((T2, 0.3), (T5, 0.7), (TB, 1.5)):
        caustic = cg.CausticSpec(lam)
        inputs = sa.closed_form_inputs(table, caustic)
        r1, _, r3, _ = cg.rational_coefficients(table, caustic)
        k = complete_k(inputs.s3)
        literal = (
            (r1 / r3)
            * ((inputs.s2 - inputs.s1) * complete_pi(inputs.s2, inputs.s3) + inputs.s1 * k)
            / (inputs.s2 * k)
        )
        assert sa.mean_cosine(table, caustic).value == pytest.approx(literal, rel=1e-11)


def test_mean_cosine_dual_route():
    for table in (T12, T2, T5, TB):
        for frac in (0.1, 0.45, 0.9):
            caustic = cg.CausticSpec(frac * table.b**2)
            closed = sa.mean_cosine(table, caustic, method="closed_form")
            quad = sa.mean_cosine(table, caustic, method="quadrature")
            assert abs(closed.value - quad.value) <= 1e-9 * max(1.0, abs(closed.value))


def test_mean_cosine_matches_periodic_identity():
    for n in (3, 6):
        caustic = find_caustic_for_period(T2, n)
        report = evaluate_invariants(build_periodic_orbit(T2, n))
        cbar = sa.mean_cosine(T2, caustic).value
        assert abs(report.joachimsthal * report.perimeter / n - 1.0 - cbar) < 1e-6


def test_mean_curvature23_circle_exact():
    for lam in (0.2, 0.6):
        assert sa.mean_curvature23(CIRCLE, cg.CausticSpec(lam)).value == pytest.approx(
            1.0, rel=1e-13
        )


def test_mean_curvature23_linear_identity_route():
    for table, lam in ((T2, 0.5), (T5, 0.9), (TB, 2.0)):
        caustic = cg.CausticSpec(lam)
        quad = sa.mean_curvature23(table, caustic)
        closed = sa.mean_curvature23(table, caustic, method="closed_form")
        assert abs(quad.value - closed.value) / closed.value < 1e-9
        j = cg.joachimsthal(table, caustic)
        cbar = sa.mean_cosine(table, caustic).value
        expected = (table.a * table.b) ** (-4.0 / 3.0) * (1.0 + cbar) / (2.0 * j**2)
        assert closed.value == pytest.approx(expected, rel=1e-12)


def test_mean_curvature23_matches_four_periodic():
    caustic = find_caustic_for_period(T2, 4)
    report = evaluate_invariants(build_periodic_orbit(T2, 4))
    kbar = sa.mean_curvature23(T2, caustic).value
    assert abs(report.sum_kappa23 / 4.0 - kbar) / kbar < 1e-6


# ----------------------------------------------------------------- group 5


def test_log_geomean_circle_triangle():
    log_mean, sign = sa.log_geomean_outer(CIRCLE, cg.CausticSpec(0.75))
    assert log_mean == pytest.approx(math.log(0.5), abs=1e-12)
    assert sign == 1  # ca = 1 - 1.5 < 0


def test_log_geomean_degenerate_point():
    log_mean, sign = sa.log_geomean_outer(CIRCLE, cg.CausticSpec(0.5))
    assert log_mean == -math.inf and sign == 0
    log_mean, sign = sa.log_geomean_outer(T2, cg.CausticSpec(0.8))
    assert log_mean == -math.inf and sign == 0


def test_log_geomean_circle_any_lambda():
    # constant |cos theta'| = |1 - 2 lambda| on the circle
    for lam in (0.1, 0.4, 0.9):
        log_mean, sign = sa.log_geomean_outer(CIRCLE, cg.CausticSpec(lam))
        assert log_mean == pytest.approx(math.log(abs(1.0 - 2.0 * lam)), abs=1e-12)
        assert sign == (-1 if lam < 0.5 else 1)


def test_log_geomean_sign_convention():
    for table in (T12, T2, T5, TB):
        lam_star = table.a**2 * table.b**2 / (table.a**2 + table.b**2)
        _, before = sa.log_geomean_outer(table, cg.CausticSpec(0.9 * lam_star))
        _, after = sa.log_geomean_outer(
            table, cg.CausticSpec(lam_star + 0.5 * (table.b**2 - lam_star))
        )
        assert before == -1 and after == 1


def test_log_geomean_matches_five_periodic_product():
    caustic = find_caustic_for_period(T5, 5)
    report = evaluate_invariants(build_periodic_orbit(T5, 5))
    log_mean, _ = sa.log_geomean_outer(T5, caustic)
    assert abs(abs(report.product_outer_cos) ** 0.2 - math.exp(log_mean)) < 1e-6


def test_log_geomean_quadrature_route_is_consistent():
    """The factored integrand (log|ca| + log g) agrees with brute quadrature
    of log|cos theta'| computed from the gradient formula."""
    for table, lam in ((T2, 0.5), (T5, 0.93), (TB, 1.1)):
        caustic = cg.CausticSpec(lam)
        log_mean, _ = sa.log_geomean_outer(table, caustic)
        brute, _ = sa.periodic_quadrature(
            lambda u: np.log(np.abs(cg.outer_cosine(table, caustic, u)))
            * cg.measure_density(table, caustic, u)
        )
        assert log_mean == pytest.approx(brute / sa.normalization(table, caustic), abs=1e-11)


# ----------------------------------------------------------------- group 6


def test_monotonicity_in_lambda():
    lams = np.linspace(0.01, 0.99, 50)
    lbars = [sa.mean_sidelength(T2, cg.CausticSpec(float(l))).value for l in lams]
    cbars = [sa.mean_cosine(T2, cg.CausticSpec(float(l))).value for l in lams]
    assert all(b > a for a, b in zip(lbars, lbars[1:]))
    assert all(b > a for a, b in zip(cbars, cbars[1:]))


def test_bounds():
    for table in (T12, T5, TB):
        for frac in (0.05, 0.5, 0.95):
            caustic = cg.CausticSpec(frac * table.b**2)
            assert 0.0 < sa.mean_sidelength(table, caustic).value < 2.0 * table.a
            assert -1.0 < sa.mean_cosine(table, caustic).value < 1.0
            log_mean, _ = sa.log_geomean_outer(table, caustic)
            assert 0.0 <= math.exp(log_mean) <= 1.0


def test_degeneracy_guard():
    with pytest.raises(DomainError):
        sa.mean_sidelength(T2, cg.CausticSpec(1.0 - 1e-10))
    with pytest.raises(DomainError):
        sa.normalization(T2, cg.CausticSpec(1.0))


def test_closed_form_inputs_fields():
    inputs = sa.closed_form_inputs(T2, cg.CausticSpec(0.5))
    assert inputs.s3 == pytest.approx(3.0 / 3.5, rel=1e-15)
    assert inputs.s5 == pytest.approx(0.5 * 3.0 / 3.5, rel=1e-15)
    assert 0.0 <= inputs.s3 < 1.0
    assert inputs.s5 < 1.0
    assert inputs.s2 < 1.0
    assert inputs.c1 > 0.0


def test_average_result_fields():
    res = sa.mean_sidelength(T2, cg.CausticSpec(0.5), method="quadrature")
    assert res.err_estimate >= 0.0
    assert res.lam == 0.5
    with pytest.raises(DomainError):
        sa.mean_sidelength(T2, cg.CausticSpec(0.5), method="simpson")
