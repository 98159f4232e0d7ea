"""Measure-weighted spatial averages over a confocal caustic.

For any per-chord quantity g(u) the spatial average is

    gbar = (1/Z) integral_0^{2pi} g(u) rho(u) du,   Z = integral rho du,

with rho the invariant measure density from conic_geometry.  For an aperiodic
orbit this equals the asymptotic time average of g over the bounce sequence.
Mean sidelength and mean vertex cosine also admit closed forms in the complete
elliptic integrals K and Pi; both routes are computed and cross-checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conic_geometry as cg
from .elliptic_integrals import complete_k, complete_pi, complete_pi_minus_k
from .errors import DomainError, NumericalError

__all__ = [
    "AverageResult",
    "ClosedFormInputs",
    "closed_form_inputs",
    "periodic_quadrature",
    "normalization",
    "mean_sidelength",
    "mean_cosine",
    "mean_curvature23",
    "log_geomean_outer",
]

# Beyond this fraction of b^2 the cancellation in b_c = sqrt(b^2 - lam)
# dominates the integrands; reject rather than return garbage.
_DEGENERACY_GUARD = 1.0 - 1e-9

_QUAD_TOL = 1e-12
_MAX_NODES = 2**20


@dataclass(frozen=True)
class AverageResult:
    """A scalar average, how it was obtained, and an absolute error estimate."""

    value: float
    method: str  # "quadrature" | "closed_form" | "time_average"
    err_estimate: float
    lam: float


@dataclass(frozen=True)
class ClosedFormInputs:
    """Dimensionless arguments feeding the K/Pi closed forms.

    s3 = c^2/(a^2-lam), s5 = lam s3/b^2 (sidelength), s1 = -r2/r1 and
    s2 = -r4/r3 (cosine), c1 = 2 a b sqrt(lam) (a_c b_c)^(2/3) (the constant
    factor of the sidelength integrand).  All of s3, s5, s2 must be < 1 for
    the integrals to converge.
    """

    s3: float
    s5: float
    s1: float
    s2: float
    c1: float


def _check_caustic(table, caustic):
    ac, bc = cg.caustic_axes(table, caustic)  # raises outside (0, b^2)
    if caustic.lam > _DEGENERACY_GUARD * table.b**2:
        raise DomainError(
            f"lam={caustic.lam} exceeds b^2 (1 - 1e-9) = "
            f"{_DEGENERACY_GUARD * table.b**2}; spatial averages lose all "
            "precision this close to the degenerate caustic"
        )
    return ac, bc


def closed_form_inputs(table, caustic) -> ClosedFormInputs:
    ac, bc = _check_caustic(table, caustic)
    a, b, lam, c2 = table.a, table.b, caustic.lam, table.c2
    s3 = c2 / (ac * ac)
    s5 = lam * s3 / (b * b)
    ca = a * a * b * b - lam * (a * a + b * b)
    # s1 written with the common factor ca cancelled so it stays finite at ca = 0
    s1 = c2 * (ca + 2.0 * lam * lam) / (a**4 * (b * b - lam) + lam * lam * c2)
    _, _, r3, r4 = cg.rational_coefficients(table, caustic)
    s2 = -r4 / r3
    c1 = 2.0 * a * b * math.sqrt(lam) * (ac * bc) ** (2.0 / 3.0)
    bad = [name for name, v in (("s3", s3), ("s5", s5), ("s2", s2)) if not v < 1.0]
    if bad or s3 < 0.0:
        raise DomainError(
            f"closed-form inputs out of range: s3={s3}, s5={s5}, s2={s2} "
            f"(violations: {bad or ['s3']})"
        )
    return ClosedFormInputs(s3, s5, s1, s2, c1)


def periodic_quadrature(f, tol: float = _QUAD_TOL):
    """Integrate a smooth 2pi-periodic function over one period.

    Composite trapezoid on uniform grids, doubling from 16 up to 2^20 nodes
    until successive estimates differ by less than tol (the trapezoid rule
    converges spectrally for smooth periodic integrands, so doubling is the
    whole refinement strategy).  Returns (value, last defect).

    f : vectorized callable on arrays of u in [0, 2pi)
    """
    n = 16
    value = float(np.mean(f(np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)))) * 2.0 * math.pi
    while n < _MAX_NODES:
        midpoints = np.linspace(0.0, 2.0 * math.pi, 2 * n, endpoint=False)[1::2]
        refined = 0.5 * value + float(np.mean(f(midpoints))) * math.pi
        defect = abs(refined - value)
        value, n = refined, 2 * n
        if defect < tol:
            return value, defect
    raise NumericalError(
        f"periodic quadrature did not converge at {_MAX_NODES} nodes "
        f"(last defect {defect:.3e} > tol {tol:.3e})"
    )


def normalization(table, caustic) -> float:
    """Total measure Z = integral rho du = 4 (a_c b_c)^(2/3) K(s3) / a_c.

    Both the quadrature of rho and the closed form are evaluated; they must
    agree to 1e-9 relative or a NumericalError is raised.  The closed-form
    value is returned.  On the circle (s3 = 0) this reduces to 2pi (1-lam)^(1/6).
    """
    ac, bc = _check_caustic(table, caustic)
    s3 = table.c2 / (ac * ac)
    closed = 4.0 * (ac * bc) ** (2.0 / 3.0) * complete_k(s3) / ac
    quad, _ = periodic_quadrature(lambda u: cg.measure_density(table, caustic, u))
    if abs(quad - closed) > 1e-9 * abs(closed):
        raise NumericalError(
            f"normalization routes disagree: quadrature={quad!r}, "
            f"closed={closed!r} (lam={caustic.lam})"
        )
    return closed


def _quadrature_average(table, caustic, integrand):
    norm = normalization(table, caustic)
    raw, defect = periodic_quadrature(
        lambda u: integrand(u) * cg.measure_density(table, caustic, u)
    )
    return raw / norm, defect / norm


def mean_sidelength(table, caustic, method: str = "closed_form") -> AverageResult:
    """Measure-weighted mean chord length.

    closed_form: Lbar = 2a (b^2 K(s3) + (lam - b^2) Pi(s5, s3)) / (b sqrt(lam) K(s3)).
    quadrature:  integral of chord_length(u) rho(u) du / normalization.
    The two agree to 1e-9 relative; on the circle both reduce to 2 sqrt(lam).
    """
    _check_caustic(table, caustic)
    lam = caustic.lam
    if method == "quadrature":
        value, err = _quadrature_average(
            table, caustic, lambda u: cg.chord_length(table, caustic, u)
        )
        return AverageResult(value, "quadrature", err, lam)
    if method != "closed_form":
        raise DomainError(f"unknown method {method!r}")
    inp = closed_form_inputs(table, caustic)
    a, b = table.a, table.b
    k = complete_k(inp.s3)
    value = (
        2.0 * a * (b * b * k + (lam - b * b) * complete_pi(inp.s5, inp.s3))
        / (b * math.sqrt(lam) * k)
    )
    return AverageResult(value, "closed_form", 0.0, lam)


def mean_cosine(table, caustic, method: str = "closed_form") -> AverageResult:
    """Measure-weighted mean interior vertex cosine.

    quadrature route integrates the geometric interior_cosine; the closed form

        Cbar = r1/r3 + (r2 r3 - r1 r4)/r3^2 * H(s2, s3) / K(s3),

    with H(n, m) = (Pi(n, m) - K(m))/n evaluated in its stable Carlson form,
    is an equivalent rearrangement of (r1/r3)((s2-s1) Pi(s2,s3) + s1 K)/(s2 K)
    that stays finite at ca = 0 where r1, r2, r4 all vanish (Cbar = 0 there).
    On the circle Cbar = 2 lam - 1 exactly.
    """
    _check_caustic(table, caustic)
    lam = caustic.lam
    if method == "quadrature":
        value, err = _quadrature_average(
            table, caustic, lambda u: cg.interior_cosine(table, caustic, u)
        )
        return AverageResult(value, "quadrature", err, lam)
    if method != "closed_form":
        raise DomainError(f"unknown method {method!r}")
    inp = closed_form_inputs(table, caustic)
    if not inp.s2 < 1.0:  # unreachable for valid lam; fall back rather than lie
        value, err = _quadrature_average(
            table, caustic, lambda u: cg.interior_cosine(table, caustic, u)
        )
        return AverageResult(value, "quadrature", err, lam)
    r1, r2, r3, r4 = cg.rational_coefficients(table, caustic)
    k = complete_k(inp.s3)
    value = r1 / r3 + (r2 * r3 - r1 * r4) / (r3 * r3) * complete_pi_minus_k(
        inp.s2, inp.s3
    ) / k
    return AverageResult(value, "closed_form", 0.0, lam)


def mean_curvature23(table, caustic, method: str = "quadrature") -> AverageResult:
    """Measure-weighted mean of kappa^(2/3) at the chord endpoints.

    quadrature route integrates the mean of curvature23 at the two endpoints of
    the chord at u.  closed_form uses the linear identity
    kappa23bar = (a b)^(-4/3) (1 + Cbar) / (2 J^2) with the closed-form Cbar.
    """
    _check_caustic(table, caustic)
    lam = caustic.lam
    if method == "closed_form":
        cbar = mean_cosine(table, caustic, method="closed_form")
        j = cg.joachimsthal(table, caustic)
        value = (table.a * table.b) ** (-4.0 / 3.0) * (1.0 + cbar.value) / (2.0 * j * j)
        return AverageResult(value, "closed_form", 0.0, lam)
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")

    def endpoint_mean_kappa23(u):
        x1, y1, x2, y2 = cg.endpoint_coordinates(table, caustic, u)
        k1 = cg.curvature23(table, np.stack([x1, y1], axis=-1))
        k2 = cg.curvature23(table, np.stack([x2, y2], axis=-1))
        return 0.5 * (k1 + k2)

    value, err = _quadrature_average(table, caustic, endpoint_mean_kappa23)
    return AverageResult(value, "quadrature", err, lam)


def log_geomean_outer(table, caustic) -> tuple[float, int]:
    """Log of the geometric mean of |outer cosine|, plus a sign.

    Returns (log_mean, sign) where exp(log_mean) is the measure-weighted
    geometric mean of |cos theta'| and sign = -sign(ca) with
    ca = a^2 b^2 - lam (a^2 + b^2): the outer polygon's interior angle is the
    supplement of the angle between the boundary normals, so its cosine has
    the opposite sign.  At ca = 0 the outer cosine vanishes identically and
    the result is (-inf, 0), meaning geometric mean 0.
    """
    _check_caustic(table, caustic)
    a, b, lam = table.a, table.b, caustic.lam
    ca = a * a * b * b - lam * (a * a + b * b)
    if ca == 0.0:
        return -math.inf, 0
    # cos theta'(u) = ca * g(u) with g > 0; integrating log g and adding
    # log|ca| once stays exact when ca is within roundoff of zero, where the
    # gradient-form evaluation cancels to 0.0 at isolated nodes
    ac2, c2 = a * a - lam, a * a - b * b
    _, _, r3, r4 = cg.rational_coefficients(table, caustic)

    def log_g(u):
        z = np.cos(u) ** 2
        return 0.5 * np.log((ac2 - c2 * z) / (r3 + r4 * z))

    value, _ = _quadrature_average(table, caustic, log_g)
    return math.log(abs(ca)) + value, (-1 if ca > 0.0 else 1)
