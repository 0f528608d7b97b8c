"""Exact spectral objects on the round sphere S^n.

Degree-m eigenspaces have eigenvalue m(m+n-1) and an addition kernel
proportional to a Gegenbauer polynomial of the cosine of geodesic distance,
normalized here so the diagonal equals multiplicity/area.  The module also
carries the two extremizing families: zonal harmonics (concentration at a
pole) and highest-weight harmonics (concentration along a great circle).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .analytic import (
    gauss_legendre_rule,
    gegenbauer_at_one,
    gegenbauer_value_and_deriv,
    gegenbauer_zeros,
    _gegenbauer_pair,
    sphere_area,
)
from .errors import DomainError, ResourceLimitError

__all__ = [
    "SphereEigenLevel",
    "ZonalFamily",
    "HighestWeightFamily",
    "eigen_level",
    "multiplicity",
    "max_degree",
    "band_degrees",
    "addition_kernel",
    "spectral_function_sphere",
    "band_kernel_sphere",
    "zonal_eval",
    "zonal_norm",
    "zonal_gradient_sup",
    "hw_norm",
    "hw_norm_quad",
    "hw_raw_norm",
    "NodalGap",
    "nodal_gap_zonal",
    "nadirashvili_ratio",
    "sobolev_scale",
]

_QUAD_ORDER_CAP = 5000


def _check_dim(n: int) -> None:
    if n < 2:
        raise DomainError(f"sphere dimension must be >= 2, got {n}")


def multiplicity(n: int, m: int) -> int:
    """dim of the degree-m eigenspace, (2m+n-1)(m+n-2)! / (m!(n-1)!), exact."""
    _check_dim(n)
    if m < 0:
        raise DomainError(f"degree must be >= 0, got {m}")
    num = (2 * m + n - 1) * math.comb(m + n - 2, n - 2)
    if num % (n - 1):
        raise ArithmeticError("multiplicity formula did not divide exactly")
    return num // (n - 1)


@dataclass(frozen=True)
class SphereEigenLevel:
    n: int
    m: int
    eigenvalue: float  # sqrt(m(m+n-1))
    multiplicity: int


def eigen_level(n: int, m: int) -> SphereEigenLevel:
    """Degree-m eigenvalue level of S^n with exact integer multiplicity."""
    d = multiplicity(n, m)
    return SphereEigenLevel(n=n, m=m, eigenvalue=math.sqrt(m * (m + n - 1)), multiplicity=d)


def max_degree(n: int, lam: float) -> int:
    """Largest degree m with sqrt(m(m+n-1)) <= lam.

    Eigenvalue squares are integers, so lam^2 is snapped to a nearby integer
    (1e-8 relative) before the cutoff comparison; this makes grids pinned to
    exact level values include their own level despite sqrt rounding.
    """
    _check_dim(n)
    if lam < 0.0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    lam_sq = lam * lam
    nearest = round(lam_sq)
    if abs(lam_sq - nearest) <= 1e-8 * max(1.0, nearest):
        lam_sq = nearest
    m = int((-(n - 1) + math.sqrt((n - 1) ** 2 + 4.0 * lam_sq)) / 2.0)
    while (m + 1) * (m + n) <= lam_sq:
        m += 1
    while m > 0 and m * (m + n - 1) > lam_sq:
        m -= 1
    return m


def band_degrees(n: int, lam: float) -> range:
    """Degrees whose eigenvalues fall in the half-open band (lam, lam+1]."""
    return range(max_degree(n, lam) + 1, max_degree(n, lam + 1.0) + 1)


# --------------------------------------------------------------------------
# addition kernel and projector sums


def addition_kernel(n: int, m: int, cos_theta: float) -> float:
    """Degree-m reproducing kernel at geodesic-distance cosine cos_theta.

    Normalized so the diagonal value (cos_theta = 1) is multiplicity/area;
    for n = 2 this is (2m+1)/(4 pi) P_m(cos_theta).
    """
    if abs(cos_theta) > 1.0:
        raise DomainError("cos_theta must lie in [-1, 1]")
    nu = (n - 1) / 2.0
    d = multiplicity(n, m)
    val, _ = _gegenbauer_pair(m, nu, np.float64(cos_theta))
    return d / sphere_area(n) * float(val) / gegenbauer_at_one(m, nu)


def _kernel_partial_sum(n: int, cos_theta: float, m_lo: int, m_hi: int) -> float:
    if m_hi < m_lo:
        return 0.0
    if abs(cos_theta) > 1.0:
        raise DomainError("cos_theta must lie in [-1, 1]")
    nu = (n - 1) / 2.0
    area = sphere_area(n)
    t = float(cos_theta)
    c_prev, c = 0.0, 1.0  # C_{k-1}, C_k
    top_prev, top = 0.0, 1.0  # same recurrence at t = 1
    terms = []
    if m_lo == 0:
        terms.append(1.0 / area)
    for k in range(1, m_hi + 1):
        c_prev, c = c, (2.0 * t * (k + nu - 1.0) * c - (k + 2.0 * nu - 2.0) * c_prev) / k
        top_prev, top = top, (2.0 * (k + nu - 1.0) * top - (k + 2.0 * nu - 2.0) * top_prev) / k
        if k >= m_lo:
            terms.append(multiplicity(n, k) / area * (c / top))
    return math.fsum(terms)


def spectral_function_sphere(n: int, cos_theta: float, lam: float) -> float:
    """e(x, y, lambda) on S^n with cos(dist(x, y)) = cos_theta."""
    return _kernel_partial_sum(n, cos_theta, 0, max_degree(n, lam))


def band_kernel_sphere(n: int, cos_theta: float, lam: float) -> float:
    """Kernel of the unit-band projection, summed over degrees in (lam, lam+1]."""
    degs = band_degrees(n, lam)
    if len(degs) == 0:
        return 0.0
    return _kernel_partial_sum(n, cos_theta, degs.start, degs.stop - 1)


# --------------------------------------------------------------------------
# zonal family


@dataclass(frozen=True)
class ZonalFamily:
    """L_2-normalized zonal harmonic of degree m about the north pole."""

    n: int
    m: int
    scale: float  # value at the pole, sqrt(multiplicity/area)

    @classmethod
    @functools.lru_cache(maxsize=4096)
    def create(cls, n: int, m: int) -> "ZonalFamily":
        _check_dim(n)
        if m < 0:
            raise DomainError(f"degree must be >= 0, got {m}")
        return cls(n=n, m=m, scale=math.sqrt(multiplicity(n, m) / sphere_area(n)))

    @property
    def nu(self) -> float:
        return (self.n - 1) / 2.0

    def eval(self, theta):
        t = np.cos(np.asarray(theta, dtype=float))
        val, _ = _gegenbauer_pair(self.m, self.nu, t)
        out = self.scale * val / gegenbauer_at_one(self.m, self.nu)
        return float(out) if out.ndim == 0 else out

    def gradient(self, theta):
        """d/dtheta of the zonal profile; zero at the poles."""
        th = np.asarray(theta, dtype=float)
        t = np.cos(th)
        val, prev = _gegenbauer_pair(self.m, self.nu, t)
        # (1-t^2) C' = (m + 2 nu - 1) C_{m-1} - m t C_m, and dt/dtheta = -sin(theta)
        num = (self.m + 2.0 * self.nu - 1.0) * prev - self.m * t * val
        sin_th = np.sin(th)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(sin_th == 0.0, 0.0, -num / np.where(sin_th == 0.0, 1.0, sin_th))
        out = self.scale * out / gegenbauer_at_one(self.m, self.nu)
        return float(out) if out.ndim == 0 else out


def zonal_eval(n: int, m: int, theta: float) -> float:
    """L_2-normalized zonal harmonic at colatitude theta in [0, pi]."""
    if theta < 0.0 or theta > math.pi:
        raise DomainError("theta must lie in [0, pi]")
    return float(ZonalFamily.create(n, m).eval(theta))


def _zonal_quad_order(n: int, m: int, r: float) -> int:
    needed = int(math.ceil(m * max(r, 2.0) / 2.0)) + 1
    if needed > _QUAD_ORDER_CAP:
        raise ResourceLimitError(
            f"zonal L_{r} norm at degree {m} needs a quadrature order beyond {_QUAD_ORDER_CAP}"
        )
    return min(int(math.ceil(2.0 * m * max(r, 2.0))) + 16, _QUAD_ORDER_CAP)


def zonal_norm(n: int, m: int, r: float) -> float:
    """L_r norm of the zonal family member (its L_2 norm is 1 by construction).

    r = math.inf returns the pole value, which is the global maximum.
    Finite r uses Gauss-Legendre in cos(theta) for n = 2 (polynomially exact
    for even integer r) and in theta for n = 3.
    """
    fam = ZonalFamily.create(n, m)
    if math.isinf(r):
        return fam.scale
    if r < 2.0:
        raise DomainError(f"norm exponent must satisfy r >= 2, got {r}")
    if n not in (2, 3):
        raise DomainError("zonal norms are implemented for n in {2, 3}")
    rule = gauss_legendre_rule(_zonal_quad_order(n, m, r))
    if n == 2:
        vals, _ = _gegenbauer_pair(m, fam.nu, rule.nodes)
        profile = fam.scale * np.abs(vals) / gegenbauer_at_one(m, fam.nu)
        integral = rule.integrate(profile**r)
        return float((2.0 * math.pi * integral) ** (1.0 / r))
    theta, w = rule.mapped(0.0, math.pi)
    profile = np.abs(fam.eval(theta))
    integral = float(np.sum(w * profile**r * np.sin(theta) ** 2))
    return float((sphere_area(2) * integral) ** (1.0 / r))


def _golden_max(f, lo: float, hi: float, tol: float = 1e-11) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
        cand_x, cand_f = (c, fc) if fc >= fd else (d, fd)
        if cand_f > best_f:
            best_x, best_f = cand_x, cand_f
    return best_x, best_f


def _grid_then_refine(f_vec, f_scalar, m: int) -> tuple[float, float]:
    """Max of f over [0, pi]: uniform scan with >= 40m points, then golden section."""
    grid = np.linspace(0.0, math.pi, 40 * max(m, 1) + 1)
    vals = f_vec(grid)
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    x, v = _golden_max(f_scalar, lo, hi)
    if vals[i] > v:
        return float(grid[i]), float(vals[i])
    return x, v


def zonal_gradient_sup(n: int, m: int) -> float:
    """sup over theta of |d/dtheta Z_m|, by dense scan plus golden-section refinement."""
    if m < 1:
        raise DomainError("gradient sup requires degree >= 1")
    fam = ZonalFamily.create(n, m)
    _, v = _grid_then_refine(
        lambda th: np.abs(fam.gradient(th)), lambda th: abs(float(fam.gradient(th))), m
    )
    return v


# --------------------------------------------------------------------------
# highest-weight family


@dataclass(frozen=True)
class HighestWeightFamily:
    """Highest-weight harmonic of degree m: |Q_m| = sin^m(psi) up to scale.

    psi is the colatitude from the two-plane carrying the concentration great
    circle; all norms reduce to Beta functions of the exponent m r.
    """

    n: int
    m: int

    def log_raw_norm(self, r: float) -> float:
        """log of the unnormalized L_r norm of Q_m."""
        n, m = self.n, self.m
        lbeta = (
            math.lgamma((m * r + 2.0) / 2.0)
            + math.lgamma((n - 1.0) / 2.0)
            - math.lgamma((m * r + n + 1.0) / 2.0)
        )
        const = math.log(2.0 * math.pi * sphere_area(n - 2) * 0.5)
        return (const + lbeta) / r

    def norm_ratio(self, r: float) -> float:
        """||Q_m||_r / ||Q_m||_2 from the closed Beta/Gamma form, in log space."""
        return math.exp(self.log_raw_norm(r) - self.log_raw_norm(2.0))


def _check_hw_args(n: int, m: int, r: float) -> None:
    _check_dim(n)
    if m < 1:
        raise DomainError(f"degree must be >= 1, got {m}")
    if math.isinf(r) or r < 2.0:
        raise DomainError(f"highest-weight norms require finite r >= 2, got {r}")


def hw_raw_norm(n: int, m: int, r: float) -> float:
    """Unnormalized L_r norm of the highest-weight harmonic Q_m."""
    _check_hw_args(n, m, r)
    return math.exp(HighestWeightFamily(n, m).log_raw_norm(r))


def hw_norm(n: int, m: int, r: float) -> float:
    """||Q_m||_r / ||Q_m||_2 via the closed Beta/Gamma form."""
    _check_hw_args(n, m, r)
    return HighestWeightFamily(n, m).norm_ratio(r)


def hw_norm_quad(n: int, m: int, r: float) -> float:
    """Quadrature route for the highest-weight norm ratio (cross-check).

    Integrates sin^{mr+1}(psi) cos^{n-2}(psi) on [0, pi/2] through t = cos(psi),
    where the integrand is a polynomial whenever m r is even.
    """
    _check_hw_args(n, m, r)

    def log_norm(rr: float) -> float:
        order = int(math.ceil(m * rr / 2.0)) + 24
        if order > _QUAD_ORDER_CAP:
            raise ResourceLimitError("highest-weight quadrature order exceeds the cap")
        rule = gauss_legendre_rule(order)
        t, w = rule.mapped(0.0, 1.0)
        integral = float(np.sum(w * (1.0 - t * t) ** (m * rr / 2.0) * t ** (n - 2)))
        return (math.log(2.0 * math.pi * sphere_area(n - 2)) + math.log(integral)) / rr

    return math.exp(log_norm(r) - log_norm(2.0))


# --------------------------------------------------------------------------
# nodal geometry of the zonal family


@dataclass(frozen=True)
class NodalGap:
    theta_first_zero: float
    inner_radius_polar_cap: float
    product_with_eigenvalue: float


def nodal_gap_zonal(n: int, m: int) -> NodalGap:
    """First zonal zero colatitude: the polar nodal domain is the cap it bounds.

    The pole is the concentration point, so theta_1 is simultaneously the
    nodal distance from the concentrating set and the cap's inner radius.
    """
    if m < 1:
        raise DomainError("nodal gap requires degree >= 1")
    nu = (n - 1) / 2.0
    theta1 = math.acos(float(gegenbauer_zeros(m, nu)[-1]))
    lam = eigen_level(n, m).eigenvalue
    return NodalGap(
        theta_first_zero=theta1,
        inner_radius_polar_cap=theta1,
        product_with_eigenvalue=lam * theta1,
    )


def nadirashvili_ratio(n: int, m: int) -> float:
    """max Z_m / |min Z_m| over the sphere, located by scan plus refinement."""
    if m < 1:
        raise DomainError("ratio requires degree >= 1")
    fam = ZonalFamily.create(n, m)
    _, vmax = _grid_then_refine(fam.eval, lambda th: float(fam.eval(th)), m)
    _, vmin = _grid_then_refine(
        lambda th: -fam.eval(th), lambda th: -float(fam.eval(th)), m
    )
    return vmax / vmin


def sobolev_scale(lambda_j: float, s: float) -> float:
    """(1 + lambda^2)^{s/2}: the exact fractional-Sobolev multiplier on an eigenline."""
    if s < 0.0:
        raise DomainError(f"Sobolev order must be >= 0, got {s}")
    return (1.0 + lambda_j * lambda_j) ** (s / 2.0)
