"""Pointwise geometry of a confocal ellipse pair.

The outer ellipse x^2/a^2 + y^2/b^2 = 1 is the billiard boundary; the inner
(caustic) ellipse x^2/(a^2-lam) + y^2/(b^2-lam) = 1 is confocal with it for
0 < lam < b^2.  Every chord of the billiard tangent to the caustic is described
by the angular parameter u of its tangency point.  This module computes the
chord endpoints, lengths, vertex cosines, outer-normal cosines, curvature and
the invariant measure density, all as plain functions of (table, caustic, u).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "BilliardTable",
    "CausticSpec",
    "Chord",
    "caustic_axes",
    "caustic_point",
    "joachimsthal",
    "chord_endpoints",
    "endpoint_coordinates",
    "chord_length",
    "focal_distances",
    "interior_cosine",
    "interior_cosine_rational",
    "rational_coefficients",
    "outer_cosine",
    "outer_cosine_closed",
    "measure_density",
    "curvature23",
]


@dataclass(frozen=True)
class BilliardTable:
    """Semi-axes (a, b) of the billiard boundary ellipse.  a = b (circle) is allowed."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a >= self.b > 0.0):
            raise DomainError(
                f"semi-axes must satisfy a >= b > 0; got a={self.a}, b={self.b}"
            )

    @property
    def c2(self) -> float:
        """Squared focal half-distance c^2 = a^2 - b^2 >= 0."""
        return self.a * self.a - self.b * self.b


@dataclass(frozen=True)
class CausticSpec:
    """Caustic parameter lam (length^2) selecting one confocal inner ellipse."""

    lam: float


def caustic_axes(table: BilliardTable, caustic: CausticSpec) -> tuple[float, float]:
    """Semi-axes (a_c, b_c) = (sqrt(a^2-lam), sqrt(b^2-lam)) of the caustic.

    Raises DomainError unless 0 < lam < b^2 (elliptic caustic strictly inside
    the billiard).  Note a_c^2 - b_c^2 = c^2: the pair is confocal.
    """
    lam = caustic.lam
    b2 = table.b * table.b
    if not lam > 0.0:
        raise DomainError(f"caustic parameter must satisfy lam > 0; got lam={lam}")
    if not lam < b2:
        raise DomainError(
            f"caustic parameter must satisfy lam < b^2 = {b2}; got lam={lam}"
        )
    return math.sqrt(table.a * table.a - lam), math.sqrt(b2 - lam)


def caustic_point(table, caustic, u):
    """Point (a_c cos u, b_c sin u) on the caustic.  u may be an array."""
    ac, bc = caustic_axes(table, caustic)
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        return ac * math.cos(float(u)), bc * math.sin(float(u))
    return ac * np.cos(u), bc * np.sin(u)


def joachimsthal(table: BilliardTable, caustic: CausticSpec) -> float:
    """Conserved quantity J = sqrt(lam)/(a b) of every orbit tangent to the caustic.

    Equals <A P, v> at each vertex P with unit incoming direction v, where
    A = diag(1/a^2, 1/b^2); the outgoing direction gives -J.
    """
    caustic_axes(table, caustic)  # domain check
    return math.sqrt(caustic.lam) / (table.a * table.b)


@dataclass(frozen=True, eq=False)
class Chord:
    """A billiard chord tangent to the caustic at parameter u, with endpoints p1, p2."""

    u: float
    p1: np.ndarray
    p2: np.ndarray


def endpoint_coordinates(table, caustic, u):
    """Endpoint coordinates (x1, y1, x2, y2) of the chord tangent at u; u may be an array.

    P1 is the endpoint ahead of the tangency point in the counterclockwise
    direction, P2 the one behind, so consecutive chords share P1(u) = P2(u+).
    """
    a, b = table.a, table.b
    ac, bc = caustic_axes(table, caustic)
    ac2, bc2 = ac * ac, bc * bc
    lam = caustic.lam
    u = np.asarray(u, dtype=float)
    xc, yc = ac * np.cos(u), bc * np.sin(u)
    # zeta >= 0 fixes which endpoint is labeled P1 for every u
    zeta = np.sqrt(lam * (bc2 * bc2 * xc * xc + ac2 * ac2 * yc * yc))
    psi = a * a * bc2 * bc2 * xc * xc + b * b * ac2 * ac2 * yc * yc
    if not np.all(psi > 0.0):
        raise NumericalError(f"degenerate chord denominator psi <= 0 at u={u!r}")
    x1 = ac2 * a * (a * bc2 * bc2 * xc - zeta * b * yc) / psi
    y1 = bc2 * b * (b * ac2 * ac2 * yc + zeta * a * xc) / psi
    x2 = ac2 * a * (a * bc2 * bc2 * xc + zeta * b * yc) / psi
    y2 = bc2 * b * (b * ac2 * ac2 * yc - zeta * a * xc) / psi
    return x1, y1, x2, y2


def chord_endpoints(table: BilliardTable, caustic: CausticSpec, u: float) -> Chord:
    """Chord tangent to the caustic at parameter u (scalar)."""
    x1, y1, x2, y2 = endpoint_coordinates(table, caustic, float(u))
    return Chord(float(u), np.array([x1, y1]), np.array([x2, y2]))


def chord_length(table, caustic, u):
    """Length of the chord tangent at u; u may be an array.

    Closed form 2 a b sqrt(lam) (a_c^2 - c^2 cos^2 u)/(a_c^2 b^2 - lam c^2 cos^2 u);
    both factors are strictly positive for 0 < lam < b^2.
    """
    a, b = table.a, table.b
    ac, _ = caustic_axes(table, caustic)
    ac2, c2, lam = ac * ac, table.c2, caustic.lam
    z = np.cos(np.asarray(u, dtype=float)) ** 2
    val = 2.0 * a * b * math.sqrt(lam) * (ac2 - c2 * z) / (ac2 * b * b - lam * c2 * z)
    return float(val) if val.ndim == 0 else val


def _check_on_boundary(table, x, y, tol=1e-8):
    res = np.abs(x * x / table.a**2 + y * y / table.b**2 - 1.0)
    if np.any(res > tol):
        raise DomainError(
            f"point not on the billiard boundary (residual {float(np.max(res)):.3e} > {tol})"
        )


def focal_distances(table, p):
    """Distances (d1, d2) from boundary point p to the foci (-c, 0), (c, 0).

    Satisfies d1 + d2 = 2a and d1 d2 = (b^4 x^2 + a^4 y^2)/(a^2 b^2).
    p has shape (2,) or (..., 2); raises DomainError off the boundary.
    """
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    _check_on_boundary(table, x, y)
    c = math.sqrt(table.c2)
    d1 = np.hypot(x + c, y)
    d2 = np.hypot(x - c, y)
    if p.ndim == 1:
        return float(d1), float(d2)
    return d1, d2


def _vertex_cosine(table, x, y, wx, wy):
    # Both chords through a boundary vertex make equal angles with the normal
    # n = A P, so the interior vertex cosine depends only on one chord direction
    # w and the normal: cos(theta) = 2 <w, n>^2 / (|w|^2 |n|^2) - 1.
    nx, ny = x / table.a**2, y / table.b**2
    dot = wx * nx + wy * ny
    return 2.0 * dot * dot / ((wx * wx + wy * wy) * (nx * nx + ny * ny)) - 1.0


def interior_cosine(table, caustic, u):
    """Mean of the interior vertex cosines at the two endpoints of the chord at u.

    At each endpoint the vertex angle is the angle between the rays toward the
    two neighboring vertices; its cosine is computed geometrically from the
    chord direction and the boundary normal (see _vertex_cosine).  The value
    also equals the algebraic form 2 lam/(d1 d2) - 1 at each endpoint: the
    constant 2 lam (and not lam/2) is forced by the circle degenerations
    (square family -> 0, triangle family -> 1/2) and by the periodic-orbit
    identity sum(cos theta_i) = J L - N.  u may be an array.
    """
    x1, y1, x2, y2 = endpoint_coordinates(table, caustic, u)
    wx, wy = x2 - x1, y2 - y1
    val = 0.5 * (
        _vertex_cosine(table, x1, y1, wx, wy) + _vertex_cosine(table, x2, y2, wx, wy)
    )
    return float(val) if np.ndim(val) == 0 else val


def rational_coefficients(table, caustic):
    """Coefficients (r1, r2, r3, r4) of interior_cosine as a rational function of cos^2 u.

    interior_cosine(u) = (r1 + r2 z)/(r3 + r4 z) with z = cos^2 u, where

        ca = a^2 b^2 - lam (a^2 + b^2)
        r1 = -ca (a^4 (b^2-lam) + lam^2 c^2)
        r2 =  ca c^2 (ca + 2 lam^2)
        r3 = (a^2 b^2 - lam c^2)^2 (a^2 - lam)
        r4 = -c^2 ca^2

    The denominator r3 + r4 z is strictly positive for 0 < lam < b^2.  The
    normalized form (r1/r3)(1 - s1 z)/(1 - s2 z) with s1 = -r2/r1, s2 = -r4/r3
    feeds the closed-form spatial averages.
    """
    a, b = table.a, table.b
    caustic_axes(table, caustic)  # domain check
    lam, c2 = caustic.lam, table.c2
    ca = a * a * b * b - lam * (a * a + b * b)
    r1 = -ca * (a**4 * (b * b - lam) + lam * lam * c2)
    r2 = ca * c2 * (ca + 2.0 * lam * lam)
    r3 = (a * a * b * b - lam * c2) ** 2 * (a * a - lam)
    r4 = -c2 * ca * ca
    return r1, r2, r3, r4


def interior_cosine_rational(table, caustic, u):
    """Rational closed form of interior_cosine in z = cos^2 u; u may be an array."""
    r1, r2, r3, r4 = rational_coefficients(table, caustic)
    z = np.cos(np.asarray(u, dtype=float)) ** 2
    val = (r1 + r2 * z) / (r3 + r4 * z)
    return float(val) if val.ndim == 0 else val


def outer_cosine(table, caustic, u):
    """Cosine of the angle between the boundary normals at the two chord endpoints.

    Canonical form: the normalized dot product of the gradients A P1 and A P2
    with A = diag(1/a^2, 1/b^2), so the product carries fourth powers of the
    axes.  Its sign equals sign(ca) with ca = a^2 b^2 - lam (a^2 + b^2), and it
    vanishes identically on the caustic with ca = 0.  u may be an array.
    """
    x1, y1, x2, y2 = endpoint_coordinates(table, caustic, u)
    a2, b2 = table.a**2, table.b**2
    n1x, n1y = x1 / a2, y1 / b2
    n2x, n2y = x2 / a2, y2 / b2
    val = (n1x * n2x + n1y * n2y) / np.sqrt(
        (n1x * n1x + n1y * n1y) * (n2x * n2x + n2y * n2y)
    )
    return float(val) if np.ndim(val) == 0 else val


def outer_cosine_closed(table, caustic, u):
    """Closed form of outer_cosine in u:

        cos(theta') = ca sqrt(a_c^2 - c^2 cos^2 u) / sqrt(r3 + r4 cos^2 u)

    with ca = a^2 b^2 - lam (a^2 + b^2) and r3, r4 from rational_coefficients.
    Both radicands are strictly positive for 0 < lam < b^2.
    """
    a, b = table.a, table.b
    ac, _ = caustic_axes(table, caustic)
    lam, c2 = caustic.lam, table.c2
    ca = a * a * b * b - lam * (a * a + b * b)
    _, _, r3, r4 = rational_coefficients(table, caustic)
    z = np.cos(np.asarray(u, dtype=float)) ** 2
    val = ca * np.sqrt(ac * ac - c2 * z) / np.sqrt(r3 + r4 * z)
    return float(val) if val.ndim == 0 else val


def measure_density(table, caustic, u):
    """Invariant measure density rho(u) = (a_c b_c)^(2/3) / sqrt(a_c^2 - c^2 cos^2 u).

    rho du is the asymptotic density of chord tangency points of any aperiodic
    orbit; it is 2pi-periodic and symmetric under u -> -u and u -> pi - u.
    u may be an array.
    """
    ac, bc = caustic_axes(table, caustic)
    c2 = table.c2
    z = np.cos(np.asarray(u, dtype=float)) ** 2
    val = (ac * bc) ** (2.0 / 3.0) / np.sqrt(ac * ac - c2 * z)
    return float(val) if val.ndim == 0 else val


def curvature23(table, p):
    """Boundary curvature to the power 2/3 at boundary point p:

        kappa^(2/3) = (a b)^(-4/3) (x^2/a^4 + y^2/b^4)^(-1) = (a b)^(2/3)/(d1 d2).

    The linear identity kappa^(2/3) = (a b)^(-4/3) (1 + cos theta)/(2 J^2), with
    cos theta = 2 lam/(d1 d2) - 1 the vertex cosine, holds for every caustic
    (the 2 J^2 = 2 lam/(a^2 b^2) factor cancels the lam dependence).
    p has shape (2,) or (..., 2); raises DomainError off the boundary.
    """
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    _check_on_boundary(table, x, y)
    a, b = table.a, table.b
    val = (a * b) ** (-4.0 / 3.0) / (x * x / a**4 + y * y / b**4)
    if p.ndim == 1:
        return float(val)
    return val
