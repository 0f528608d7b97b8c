"""Invariant battery behind `speclab selftest`.

Each check is independent and prints one PASS/FAIL line; probe-backed checks
also persist their tables (fixed file names, timestamp-free contents) so two
selftest runs can be compared byte for byte regardless of worker count.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import output, probes, sphere, torus
from .analytic import (
    MultiIndex,
    ball_moment,
    deriv_weyl_constant,
    epsilon_exponent,
    gamma,
    gauss_legendre_rule,
    gegenbauer_zeros,
    phi_kernel,
    phi_kernel_bessel,
    phi_kernel_zero,
    weyl_constant,
    _phi_quadrature,
)

__all__ = ["run_selftest"]

TWO_PI = 2.0 * math.pi


def _all_multi_indices(n: int, max_total: int):
    if n == 1:
        for a in range(max_total + 1):
            yield (a,)
        return
    for head in range(max_total + 1):
        for tail in _all_multi_indices(n - 1, max_total - head):
            yield (head, *tail)


# ---------------------------------------------------------------- checks


def check_gamma_recursion() -> None:
    for x in np.linspace(0.5, 49.0, 195):
        x = float(x)
        assert abs(gamma(x + 1.0) / (x * gamma(x)) - 1.0) <= 1e-13


def check_phi_weyl_constant() -> None:
    for n in (2, 3, 4, 5):
        assert abs(phi_kernel(n, 0.0).value - weyl_constant(n)) <= 1e-12


def check_phi_dual_routes() -> None:
    taus = np.arange(0.0, 30.0001, 0.1)
    for n in (2, 3):
        sup = max(abs(_phi_quadrature(n, float(t)) - phi_kernel_bessel(n, float(t))) for t in taus)
        assert sup <= 1e-9, f"n={n}: sup={sup}"


def check_phi3_tan_zeros() -> None:
    for i in (1, 2, 3):
        z = phi_kernel_zero(3, i)
        # the zero solves tan(z) = z; compare against an independent bisection
        lo, hi = (2 * i - 1) * math.pi / 2.0 + 1e-9, (2 * i + 1) * math.pi / 2.0 - 1e-9
        f = lambda t: math.tan(t) - t
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (f(lo) < 0.0) == (f(mid) < 0.0):
                lo = mid
            else:
                hi = mid
        assert abs(z - 0.5 * (lo + hi)) <= 1e-9


def check_deriv_constant_routes() -> None:
    for n in (2, 3):
        for a_ent in _all_multi_indices(n, 3):
            for b_ent in _all_multi_indices(n, 3):
                alpha, beta = MultiIndex(a_ent), MultiIndex(b_ent)
                if alpha.order + beta.order > 6:
                    continue
                closed = deriv_weyl_constant(n, alpha, beta)
                if not alpha.same_parity(beta):
                    assert closed == 0.0
                    continue
                gam = alpha + beta
                half_gap = abs(alpha.order - beta.order) // 2
                sign = -1.0 if half_gap % 2 else 1.0
                moment = sign * ball_moment(n, gam) / TWO_PI ** n
                assert abs(closed - moment) <= 1e-12


def check_epsilon_branches() -> None:
    for n in (2, 3):
        p_star = 2.0 * (n + 1) / (n - 1)
        b1 = (n - 1) / 2.0 - n / p_star
        b2 = (0.25 - 0.5 / p_star) * (n - 1.0)
        assert b1 == b2
        grid = [2.0, 2.5, 3.0, p_star, 8.0, 20.0, 1e6, math.inf]
        vals = [epsilon_exponent(n, p) for p in grid]
        assert all(x <= y + 1e-15 for x, y in zip(vals, vals[1:]))


def check_gauss_legendre_moments() -> None:
    for order in (1, 2, 3, 5, 8, 13, 40):
        rule = gauss_legendre_rule(order)
        assert abs(float(np.sum(rule.weights)) - 2.0) <= 1e-12
        for k in range(2 * order):
            exact = 0.0 if k % 2 else 2.0 / (k + 1)
            assert abs(rule.integrate(rule.nodes ** k) - exact) <= 1e-12


def check_gegenbauer_interlacing() -> None:
    for nu in (0.5, 1.0):
        for m in (1, 2, 3, 5, 8, 21, 55, 144, 377, 500):
            z_lo = gegenbauer_zeros(m, nu)
            z_hi = gegenbauer_zeros(m + 1, nu)
            assert z_hi[0] < z_lo[0] and z_lo[-1] < z_hi[-1]
            assert all(z_hi[i] < z_lo[i] < z_hi[i + 1] for i in range(m))


def check_torus_count_bruteforce() -> None:
    for n, lam_max in ((2, 20), (3, 12)):
        top = lam_max + 1
        counts = {}
        rng = range(-top, top + 1)
        for a in rng:
            for b in rng:
                if n == 2:
                    counts[a * a + b * b] = counts.get(a * a + b * b, 0) + 1
                else:
                    for c in rng:
                        q = a * a + b * b + c * c
                        counts[q] = counts.get(q, 0) + 1
        running = np.cumsum([counts.get(q, 0) for q in range(lam_max * lam_max + 1)])
        for lam in range(lam_max + 1):
            assert torus.eigenvalue_count(n, float(lam)) == int(running[lam * lam])


def check_torus_cache_roundtrip() -> None:
    first = torus.enumerate_lattice(2, 12.0)
    again = torus.enumerate_lattice(2, 12.0)
    assert np.array_equal(first.points, again.points)
    pts = first.points
    assert (pts == 0).all(axis=1).any()
    as_set = {tuple(row) for row in pts.tolist()}
    assert all(tuple(-v for v in row) in as_set for row in as_set)


def check_torus_spectral_bounds() -> None:
    enum = torus.enumerate_lattice(2, 40.0)
    diag = torus.Displacement.from_vector([0.0, 0.0])
    prev = -1.0
    for lam in (5.0, 10.0, 20.0, 40.0):
        e0 = torus.spectral_function_torus(2, diag, lam, enum)
        assert e0 >= prev
        prev = e0
        for scale in (0.01, 0.3, 1.5):
            u = torus.Displacement.from_vector(torus.default_direction(2) * scale)
            eu = torus.spectral_function_torus(2, u, lam, enum)
            assert abs(eu) <= e0
            assert 2.0 * (e0 - eu) >= 0.0


def check_torus_parity_zero() -> None:
    enum = torus.enumerate_lattice(2, 30.0)
    a, b = MultiIndex.of(1, 0), MultiIndex.of(0, 0)
    for lam in (5.0, 17.0, 30.0):
        assert torus.derivative_diagonal_sum(2, a, b, lam, enum) == 0.0
        ab = torus.derivative_diagonal_sum(2, a, a, lam, enum)
        ba = torus.derivative_diagonal_sum(2, a, a, lam, enum)
        assert ab == ba


def check_sphere_multiplicities() -> None:
    for n in (2, 3, 4):
        for big_m in range(9):
            total = sum(sphere.multiplicity(n, m) for m in range(big_m + 1))
            poly_dim = math.comb(big_m + n + 1, n + 1)
            if big_m >= 2:
                poly_dim -= math.comb(big_m + n - 1, n + 1)
            assert total == poly_dim


def check_sphere_kernel_bounds() -> None:
    cs = np.linspace(-1.0, 1.0, 401)
    for n in (2, 3):
        for m in (0, 1, 4, 9, 25):
            diag = sphere.addition_kernel(n, m, 1.0)
            assert all(abs(sphere.addition_kernel(n, m, float(c))) <= diag * (1 + 1e-12) for c in cs)


def check_sphere_band_additivity() -> None:
    for lam in (3.0, 7.5, 12.0, 20.0):
        for c in (-0.4, 0.2, 1.0):
            gap = (
                sphere.spectral_function_sphere(2, c, lam + 1.0)
                - sphere.spectral_function_sphere(2, c, lam)
                - sphere.band_kernel_sphere(2, c, lam)
            )
            assert abs(gap) <= 1e-13 * max(1.0, sphere.spectral_function_sphere(2, 1.0, lam + 1.0))


def check_zonal_l2_normalization() -> None:
    for n, ms in ((2, (1, 7, 40, 200)), (3, (1, 7, 40))):
        for m in ms:
            assert abs(sphere.zonal_norm(n, m, 2.0) - 1.0) <= 1e-10
            assert abs(sphere.hw_norm(n, m, 2.0) - 1.0) <= 1e-10


def check_hw_norm_routes() -> None:
    for m in (1, 3, 10, 80, 250):
        for r in (2.0, 4.0, 6.0):
            closed, quad = sphere.hw_norm(2, m, r), sphere.hw_norm_quad(2, m, r)
            assert abs(closed / quad - 1.0) <= 1e-8


def check_odd_nadirashvili() -> None:
    for m in (1, 3, 11, 99):
        assert abs(sphere.nadirashvili_ratio(2, m) - 1.0) <= 1e-10


# ------------------------------------------------------- probe-backed checks


def _write_probe(result, fit, out_dir: Path, name: str) -> None:
    output.write_csv(result, out_dir / f"selftest_{name}.csv")
    output.write_json(result, out_dir / f"selftest_{name}.json")
    output.write_summary(result, fit, out_dir / f"selftest_{name}_summary.json")


def make_probe_checks(out_dir: Path, threads: int):
    def probe_weyl_torus() -> None:
        res = probes.probe_weyl("torus", 2, [50.0, 75.0, 100.0, 125.0, 150.0], workers=threads)
        fit = probes.scaling_fit(res)
        _write_probe(res, fit, out_dir, "weyl_torus")
        assert abs(res.rows[-1].ratio / weyl_constant(2) - 1.0) <= 0.05
        assert abs(fit.exponent - 2.0) <= 0.05

    def probe_weyl_sphere() -> None:
        res = probes.probe_weyl("sphere", 2, list(range(20, 201, 20)), workers=threads)
        fit = probes.scaling_fit(res)
        _write_probe(res, fit, out_dir, "weyl_sphere")
        assert abs(res.rows[-1].ratio / weyl_constant(2) - 1.0) <= 0.05

    def probe_offdiag_consistency() -> None:
        grid = [50.0, 75.0, 100.0]
        w = probes.probe_weyl("torus", 2, grid, workers=threads)
        o = probes.probe_offdiag("torus", 2, 0.0, grid, workers=threads)
        assert [r.raw for r in w.rows] == [r.raw for r in o.rows]
        d = probes.probe_difference("torus", 2, 1.5, grid, workers=threads)
        o15 = probes.probe_offdiag("torus", 2, 1.5, grid, workers=threads)
        _write_probe(o15, probes.scaling_fit(o15), out_dir, "offdiag_torus")
        assert all(
            dr.raw == 2.0 * (wr.raw - orow.raw)
            for dr, wr, orow in zip(d.rows, w.rows, o15.rows)
        )

    def probe_band_sphere() -> None:
        res = probes.probe_band("sphere", 2, [float(v) for v in range(20, 201, 20)], workers=threads)
        fit = probes.scaling_fit(res)
        _write_probe(res, fit, out_dir, "band_sphere")
        assert abs(fit.exponent - 1.0) <= 0.2

    def probe_lp_zonal() -> None:
        res = probes.probe_lp("zonal", math.inf, 0.0, list(range(20, 201, 20)), workers=threads)
        fit = probes.scaling_fit(res)
        _write_probe(res, fit, out_dir, "lp_zonal")
        assert abs(fit.exponent - 0.5) <= 0.02

    def probe_nodal_gap() -> None:
        res = probes.probe_nodal(list(range(20, 121, 20)), workers=threads)
        fit = None
        _write_probe(res, fit, out_dir, "nodal")
        assert abs(res.rows[-1].raw / res.predicted_limit - 1.0) <= 0.01

    def probe_worker_determinism() -> None:
        grid = [50.0, 75.0, 100.0]
        assert probes.probe_weyl("torus", 2, grid, workers=1) == probes.probe_weyl(
            "torus", 2, grid, workers=4
        )

    return [
        ("probe_weyl_torus", probe_weyl_torus),
        ("probe_weyl_sphere", probe_weyl_sphere),
        ("probe_offdiag_consistency", probe_offdiag_consistency),
        ("probe_band_sphere", probe_band_sphere),
        ("probe_lp_zonal", probe_lp_zonal),
        ("probe_nodal_gap", probe_nodal_gap),
        ("probe_worker_determinism", probe_worker_determinism),
    ]


def run_selftest(out_dir: Path, threads: int = 1) -> int:
    """Run every invariant check; returns the number of failures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checks = [
        ("gamma_recursion", check_gamma_recursion),
        ("phi_equals_weyl_constant", check_phi_weyl_constant),
        ("phi_dual_routes", check_phi_dual_routes),
        ("phi3_tan_zeros", check_phi3_tan_zeros),
        ("deriv_constant_routes", check_deriv_constant_routes),
        ("epsilon_branches", check_epsilon_branches),
        ("gauss_legendre_moments", check_gauss_legendre_moments),
        ("gegenbauer_interlacing", check_gegenbauer_interlacing),
        ("torus_count_bruteforce", check_torus_count_bruteforce),
        ("torus_cache_roundtrip", check_torus_cache_roundtrip),
        ("torus_spectral_bounds", check_torus_spectral_bounds),
        ("torus_parity_zero", check_torus_parity_zero),
        ("sphere_multiplicities", check_sphere_multiplicities),
        ("sphere_kernel_bounds", check_sphere_kernel_bounds),
        ("sphere_band_additivity", check_sphere_band_additivity),
        ("zonal_l2_normalization", check_zonal_l2_normalization),
        ("hw_norm_routes", check_hw_norm_routes),
        ("odd_nadirashvili", check_odd_nadirashvili),
    ]
    checks.extend(make_probe_checks(out_dir, threads))
    failures = 0
    for name, fn in checks:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")
    print(f"{len(checks) - failures}/{len(checks)} invariants passed")
    return failures
