"""Special functions, universal constants, and quadrature.

Everything in this module is independent of a particular manifold: the
leading Weyl constants, the radial kernel Phi_n that governs near-diagonal
projector asymptotics, Gegenbauer/Legendre evaluation and zero finding,
Gauss-Legendre rules, and the sharp L_p growth exponent.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, NumericError, RangeError

__all__ = [
    "MultiIndex",
    "QuadratureRule",
    "PhiValue",
    "gamma",
    "double_factorial",
    "ball_volume",
    "sphere_area",
    "weyl_constant",
    "deriv_weyl_constant",
    "ball_moment",
    "gegenbauer",
    "gegenbauer_value_and_deriv",
    "gegenbauer_at_one",
    "gegenbauer_zeros",
    "gauss_legendre_rule",
    "bessel_j0",
    "bessel_j1",
    "bessel_j0_zero",
    "phi_kernel",
    "phi_kernel_bessel",
    "phi_kernel_zero",
    "epsilon_exponent",
]

TWO_PI = 2.0 * math.pi

# Zero finding: absolute tolerance and bracketing grid step, used for both
# the Phi zeros and the Bessel oracle zeros.
ZERO_TOL = 1e-10
ZERO_GRID_STEP = 0.1
PHI_ZERO_TAU_MAX = 200.0


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class MultiIndex:
    """A multi-index: a fixed-length tuple of non-negative integers."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.entries) < 1:
            raise DomainError("multi-index must have length >= 1")
        if any((not isinstance(e, int)) or e < 0 for e in self.entries):
            raise DomainError(f"multi-index entries must be integers >= 0, got {self.entries}")

    @classmethod
    def of(cls, *entries: int) -> "MultiIndex":
        return cls(tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if len(self) != len(other):
            raise DomainError("multi-index lengths differ")
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    @property
    def order(self) -> int:
        return sum(self.entries)

    def same_parity(self, other: "MultiIndex") -> bool:
        """Componentwise difference even in every slot."""
        if len(self) != len(other):
            raise DomainError("multi-index lengths differ")
        return all((a - b) % 2 == 0 for a, b in zip(self.entries, other.entries))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights on (-1, 1), exact through degree 2N-1."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self) -> None:
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Affinely mapped nodes and weights for integration over [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


@dataclass(frozen=True)
class PhiValue:
    """The radial kernel Phi_n evaluated at a rescaled distance tau."""

    n: int
    tau: float
    value: float


# --------------------------------------------------------------------------
# gamma and friends

# Lanczos approximation, g = 7 with 9 coefficients.  Relative error stays
# below ~1e-15 on the positive axis, comfortably inside the 1e-13 contract.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma function on the positive axis."""
    if not x > 0.0:
        raise DomainError(f"gamma requires x > 0, got {x}")
    if x < 0.5:
        # reflection keeps the Lanczos sum in its sweet spot
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(TWO_PI) * t ** (z + 0.5) * math.exp(-t) * acc


def double_factorial(k: int) -> int:
    """k!! with the empty-product convention (-1)!! = 0!! = 1."""
    if k < -1:
        raise DomainError(f"double factorial requires k >= -1, got {k}")
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n (n >= 0)."""
    if n < 0:
        raise DomainError("ball dimension must be >= 0")
    if n == 0:
        return 1.0
    if n == 1:
        return 2.0
    if n == 2:
        return math.pi
    return math.pi ** (n / 2.0) / gamma(1.0 + n / 2.0)


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^dim embedded in R^{dim+1}."""
    if dim < 0:
        raise DomainError("sphere dimension must be >= 0")
    if dim == 0:
        return 2.0
    if dim == 1:
        return TWO_PI
    if dim == 2:
        return 4.0 * math.pi
    if dim == 3:
        return TWO_PI * math.pi
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / gamma((dim + 1) / 2.0)


def weyl_constant(n: int) -> float:
    """Leading constant of the diagonal spectral function, vol(B_n)/(2 pi)^n."""
    if n < 2:
        raise DomainError(f"dimension must be >= 2, got {n}")
    return 1.0 / (2.0 ** n * math.pi ** (n / 2.0) * gamma(1.0 + n / 2.0))


def deriv_weyl_constant(n: int, alpha: MultiIndex, beta: MultiIndex) -> float:
    """Leading constant of the (alpha, beta)-derivative diagonal sum.

    Zero when alpha and beta differ in parity; otherwise the double-factorial
    closed form of the unit-ball moment of x^(alpha+beta), with the
    alternating sign attached to (|alpha| - |beta|)/2.
    """
    if n < 2:
        raise DomainError(f"dimension must be >= 2, got {n}")
    if len(alpha) != n or len(beta) != n:
        raise DomainError("multi-index lengths must equal the dimension")
    if not alpha.same_parity(beta):
        return 0.0
    gam = alpha + beta
    num = 1.0
    for g in gam.entries:
        num *= double_factorial(g - 1)
    den = math.pi ** (n / 2.0) * 2.0 ** (n + gam.order // 2) * gamma((gam.order + n) / 2.0 + 1.0)
    half_gap = abs(alpha.order - beta.order) // 2
    sign = -1.0 if half_gap % 2 else 1.0
    return sign * num / den


def ball_moment(n: int, gam: MultiIndex) -> float:
    """Moment of x^gam over the unit ball in R^n by iterated 1-D Beta integrals.

    Independent cross-check route for deriv_weyl_constant; returns 0 whenever
    some exponent is odd.
    """
    if len(gam) != n:
        raise DomainError("multi-index length must equal the dimension")
    if any(g % 2 for g in gam.entries):
        return 0.0
    out = 1.0
    tail = gam.order
    for j, g in enumerate(gam.entries):
        tail -= g
        s = ((n - j - 1) + tail) / 2.0
        out *= gamma((g + 1) / 2.0) * gamma(s + 1.0) / gamma((g + 1) / 2.0 + s + 1.0)
    return out


# --------------------------------------------------------------------------
# Gegenbauer / Legendre machinery


def _check_gegenbauer_args(m: int, nu: float) -> None:
    if m < 0:
        raise DomainError(f"degree must be >= 0, got {m}")
    if not nu > 0.0:
        raise DomainError(f"Gegenbauer parameter must be positive, got {nu}")


def gegenbauer(m: int, nu: float, t):
    """Gegenbauer polynomial C_m^nu(t) by the three-term recurrence.

    Accepts a scalar or an ndarray for t; nu = 1/2 gives Legendre P_m.
    """
    _check_gegenbauer_args(m, nu)
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > 1.0):
        raise DomainError("argument must lie in [-1, 1]")
    val, _ = _gegenbauer_pair(m, nu, arr)
    return float(val) if np.isscalar(t) or arr.ndim == 0 else val


def _gegenbauer_pair(m: int, nu: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(C_m, C_{m-1}) evaluated elementwise at t."""
    c_prev = np.zeros_like(t)
    c = np.ones_like(t)
    for k in range(1, m + 1):
        c_prev, c = c, (2.0 * t * (k + nu - 1.0) * c - (k + 2.0 * nu - 2.0) * c_prev) / k
    return c, c_prev


def gegenbauer_value_and_deriv(m: int, nu: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """C_m^nu and d/dt C_m^nu, for t strictly inside (-1, 1)."""
    val, prev = _gegenbauer_pair(m, nu, t)
    der = ((m + 2.0 * nu - 1.0) * prev - m * t * val) / ((1.0 - t) * (1.0 + t))
    return val, der


def gegenbauer_at_one(m: int, nu: float) -> float:
    """C_m^nu(1) = (2 nu)_m / m!, the maximum of |C_m^nu| on [-1, 1]."""
    _check_gegenbauer_args(m, nu)
    out = 1.0
    for j in range(m):
        out *= (2.0 * nu + j) / (1.0 + j)
    return out


def _jacobi_matrix_zeros(m: int, nu: float) -> np.ndarray:
    """Zeros of C_m^nu as eigenvalues of the symmetric Jacobi matrix."""
    if m == 1:
        return np.zeros(1)
    j = np.arange(1, m, dtype=float)
    beta = j * (j + 2.0 * nu - 1.0) / (4.0 * (j + nu) * (j + nu - 1.0))
    return eigh_tridiagonal(np.zeros(m), np.sqrt(beta), eigvals_only=True)


@functools.lru_cache(maxsize=256)
def _gegenbauer_zeros_cached(m: int, nu: float) -> np.ndarray:
    # Brackets from the degree-(m-1) zeros: consecutive zeros of C_{m-1},
    # padded with the endpoints, straddle exactly one zero of C_m each.
    if m == 1:
        return np.zeros(1)
    inner = _jacobi_matrix_zeros(m - 1, nu)
    lo = np.concatenate(([-1.0], inner))
    hi = np.concatenate((inner, [1.0]))
    x = 0.5 * (lo + hi)
    for _ in range(100):
        val, der = gegenbauer_value_and_deriv(m, nu, x)
        step = val / der
        x = np.clip(x - step, lo, hi)
        if float(np.max(np.abs(step))) <= 1e-13:
            break
    else:
        raise NumericError(f"Newton refinement did not settle for degree {m}, nu={nu}")
    # enforce the exact symmetry of the zero set under t -> -t
    x = 0.5 * (x - x[::-1])
    x.setflags(write=False)
    return x


def gegenbauer_zeros(m: int, nu: float) -> np.ndarray:
    """All m zeros of C_m^nu in increasing order, refined by safeguarded Newton."""
    _check_gegenbauer_args(m, nu)
    if m < 1:
        raise DomainError("zero finding requires degree >= 1")
    return _gegenbauer_zeros_cached(m, float(nu))


@functools.lru_cache(maxsize=128)
def gauss_legendre_rule(order: int) -> QuadratureRule:
    """Gauss-Legendre rule of a given order on (-1, 1).

    Nodes are the Legendre zeros; weights use 2 / ((1-t^2) P_N'(t)^2).
    """
    if order < 1 or order > 5000:
        raise DomainError(f"quadrature order must lie in [1, 5000], got {order}")
    if order == 1:
        nodes = np.zeros(1)
        weights = np.full(1, 2.0)
    else:
        nodes = np.array(gegenbauer_zeros(order, 0.5))
        _, der = gegenbauer_value_and_deriv(order, 0.5, nodes)
        weights = 2.0 / ((1.0 - nodes) * (1.0 + nodes) * der * der)
        weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule(nodes=nodes, weights=weights, order=order)


# --------------------------------------------------------------------------
# Bessel functions J_0, J_1 (power series below 12, Hankel expansion beyond)

_BESSEL_SERIES_CUT = 12.0


def _j0_series(x: float) -> float:
    q = 0.25 * x * x
    term = 1.0
    out = 1.0
    for k in range(1, 60):
        term *= -q / (k * k)
        out += term
        if abs(term) < 1e-18 * abs(out) + 1e-300:
            break
    return out


def _j1_over_x_series(x: float) -> float:
    # J_1(x)/x, regular at the origin (limit 1/2)
    q = 0.25 * x * x
    term = 0.5
    out = 0.5
    for k in range(1, 60):
        term *= -q / (k * (k + 1.0))
        out += term
        if abs(term) < 1e-18 * abs(out) + 1e-300:
            break
    return out


def _hankel(nu: int, x: float) -> float:
    # Asymptotic expansion J_nu(x) ~ sqrt(2/(pi x)) (P cos w - Q sin w),
    # truncated at the smallest term; adequate beyond x ~ 12.
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    a = 1.0
    last = math.inf
    for k in range(1, 30):
        a *= (mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * x)
        if abs(a) >= last:
            break
        last = abs(a)
        r = k % 4
        if r == 0:
            p += a
        elif r == 1:
            q += a
        elif r == 2:
            p -= a
        else:
            q -= a
    w = x - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(w) - q * math.sin(w))


def bessel_j0(x: float) -> float:
    """Bessel function J_0 for x >= 0."""
    if x < 0.0:
        raise DomainError("argument must be >= 0")
    return _j0_series(x) if x < _BESSEL_SERIES_CUT else _hankel(0, x)


def bessel_j1(x: float) -> float:
    """Bessel function J_1 for x >= 0."""
    if x < 0.0:
        raise DomainError("argument must be >= 0")
    return x * _j1_over_x_series(x) if x < _BESSEL_SERIES_CUT else _hankel(1, x)


def _bisect(f, lo: float, hi: float, tol: float = ZERO_TOL) -> float:
    flo = f(lo)
    if flo == 0.0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _grid_zeros(f, count: int, tau_max: float, what: str) -> list[float]:
    zeros: list[float] = []
    lo = ZERO_GRID_STEP / 2.0
    flo = f(lo)
    t = lo
    while len(zeros) < count:
        t_next = t + ZERO_GRID_STEP
        if t_next > tau_max:
            raise RangeError(f"zero {count} of {what} lies beyond tau = {tau_max}")
        fnext = f(t_next)
        if flo == 0.0:
            zeros.append(t)
        elif (flo < 0.0) != (fnext < 0.0):
            zeros.append(_bisect(f, t, t_next))
        t, flo = t_next, fnext
    return zeros


def bessel_j0_zero(i: int) -> float:
    """i-th positive zero of J_0, bracketed on a grid and bisected."""
    if i < 1:
        raise DomainError("zero index must be >= 1")
    return _grid_zeros(bessel_j0, i, PHI_ZERO_TAU_MAX, "J_0")[-1]


# --------------------------------------------------------------------------
# the radial kernel Phi_n


def _phi_rule_order(tau: float) -> int:
    # cos(tau cos psi) needs roughly tau/2 nodes; generous margin, quantized
    # so repeated taus share cached rules.
    return 96 + 16 * int(math.ceil(tau / 8.0))


def _phi_quadrature(n: int, tau: float) -> float:
    # Phi_n(tau) = (2 pi)^{-n} vol(B_{n-1}) Int_{-1}^{1} cos(tau t)(1-t^2)^{(n-1)/2} dt,
    # evaluated after t = cos(psi), which makes the integrand entire for every n.
    rule = gauss_legendre_rule(_phi_rule_order(tau))
    psi, w = rule.mapped(0.0, math.pi)
    integrand = np.cos(tau * np.cos(psi)) * np.sin(psi) ** n
    return ball_volume(n - 1) / TWO_PI ** n * float(np.sum(w * integrand))


def phi_kernel_bessel(n: int, tau: float) -> float:
    """Closed Bessel form of Phi_n for n in {2, 3}; the independent route."""
    if n == 2:
        if tau < _BESSEL_SERIES_CUT:
            return _j1_over_x_series(tau) / TWO_PI
        return bessel_j1(tau) / (TWO_PI * tau)
    if n == 3:
        if tau < 0.5:
            # (sin t - t cos t)/t^3 = sum (-1)^k (2k+2) t^{2k} / (2k+3)!
            term = 1.0 / 3.0
            out = term
            t2 = tau * tau
            for k in range(1, 30):
                term *= -t2 * (2.0 * k + 2.0) / ((2.0 * k) * (2.0 * k + 2.0) * (2.0 * k + 3.0))
                out += term
                if abs(term) < 1e-18 * abs(out):
                    break
            return out / (2.0 * math.pi ** 2)
        return (math.sin(tau) - tau * math.cos(tau)) / (2.0 * math.pi ** 2 * tau ** 3)
    raise DomainError(f"closed Bessel form only available for n in {{2, 3}}, got n={n}")


def phi_kernel(n: int, tau: float) -> PhiValue:
    """Phi_n(tau) by quadrature, cross-checked against the Bessel form for n in {2, 3}.

    Phi_n(0) equals the diagonal Weyl constant; the zeros of Phi_n mark the
    rescaled distances where the off-diagonal leading term degenerates.
    """
    if n < 2:
        raise DomainError(f"dimension must be >= 2, got {n}")
    if tau < 0.0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    value = _phi_quadrature(n, tau)
    if n in (2, 3):
        other = phi_kernel_bessel(n, tau)
        if abs(value - other) > 1e-9:
            raise NumericError(
                f"Phi_{n}({tau}): quadrature {value!r} and Bessel {other!r} routes disagree"
            )
    return PhiValue(n=n, tau=tau, value=value)


def phi_kernel_zero(n: int, i: int) -> float:
    """i-th positive zero of Phi_n (n in {2, 3}), bracketed then bisected to 1e-10."""
    if n not in (2, 3):
        raise DomainError(f"zeros are tabulated only for n in {{2, 3}}, got n={n}")
    if i < 1:
        raise DomainError("zero index must be >= 1")
    return _grid_zeros(lambda t: _phi_quadrature(n, t), i, PHI_ZERO_TAU_MAX, f"Phi_{n}")[-1]


# --------------------------------------------------------------------------
# the sharp projector growth exponent


def epsilon_exponent(n: int, p: float) -> float:
    """max((n-1)/2 - n/p, (1/4 - 1/(2p))(n-1)) for p in [2, inf].

    The two branches cross at p = 2(n+1)/(n-1); math.inf is accepted and
    handled as a distinguished case rather than fed into arithmetic.
    """
    if n < 2:
        raise DomainError(f"dimension must be >= 2, got {n}")
    if math.isinf(p):
        return (n - 1.0) / 2.0
    if p < 2.0:
        raise DomainError(f"exponent requires p >= 2, got {p}")
    return max((n - 1.0) / 2.0 - n / p, (0.25 - 0.5 / p) * (n - 1.0))
