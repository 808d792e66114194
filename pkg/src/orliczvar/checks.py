"""Seeded numerical audits of the N-function and norm inequalities."""
from dataclasses import dataclass

import numpy as np

from . import norms
from .mesh import DiscreteField, make_rect_mesh
from .nfunction import IndexOutOfRange, sobolev_conjugate, zeta_bounds_check


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: worst={self.worst:.3e} {self.detail}".rstrip()


def _rel_excess(report):
    """Largest relative amount by which the middle term leaves its bounds."""
    lo = np.atleast_1d(report.lower)
    mid = np.atleast_1d(report.middle)
    hi = np.atleast_1d(report.upper)
    with np.errstate(divide="ignore", invalid="ignore"):
        below = np.where(lo > 0, (lo - mid) / lo, lo - mid)
        above = np.where(hi > 0, (mid - hi) / hi, mid - hi)
    return float(np.max(np.maximum(below, above)))


def index_certificate(nf):
    q = nf.index_quotient(nf.probe_grid)
    worst = float(max(nf.ell - q.min(), q.max() - nf.em))
    return CheckResult("index certificate", worst <= 0, worst,
                       f"ell={nf.ell:.9g} m={nf.em:.9g} over {q.size} probes")


def delta2(nf):
    t = nf.probe_grid
    ratio = nf.potential(2 * t) / nf.potential(t)
    worst = float(ratio.max() - nf.delta2_constant)
    return CheckResult("delta2", worst <= 1e-12 * nf.delta2_constant, worst, f"K={nf.delta2_constant:.6g}")


def convexity(nf, rng, n=10_000):
    t = nf.probe_grid
    a = rng.choice(t, n)
    b = rng.choice(t, n)
    mid = nf.potential(0.5 * (a + b))
    chord = 0.5 * (nf.potential(a) + nf.potential(b))
    worst = float(np.max((mid - chord) / chord))
    return CheckResult("midpoint convexity", worst <= 1e-12, worst, f"{n} pairs")


def sample_log_uniform(rng, lo, hi, n):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), n))


def zeta_sandwich(nf, rng, n=10_000, rel_tol=1e-8):
    """rho and rho*t are drawn inside the probe range, where the indices are certified."""
    lo, hi = nf.probe_grid[0], nf.probe_grid[-1]
    rho = sample_log_uniform(rng, lo, hi, n)
    target = sample_log_uniform(rng, lo, hi, n)
    rep = zeta_bounds_check(nf, rho, target / rho)
    worst = _rel_excess(rep)
    return CheckResult("zeta sandwich", rep.holds(rel_tol), worst, f"{n} pairs, slack {rel_tol:g}")


def young(nf, rng, n=10_000, bound=10.0, tol=1e-9):
    s = rng.uniform(0.0, bound, n)
    t = rng.uniform(0.0, bound, n)
    gap = nf.young_gap(s, t)
    worst = float(-gap.min())
    return CheckResult("young inequality", worst <= tol, worst, f"{n} pairs in (0,{bound:g})^2")


def involution_values(nf, t, n_grid=2000, iters=80):
    """max_s (s t - Phi~(s)) by a log grid search refined with golden sections."""
    t = np.asarray(t, dtype=float)
    grid = nf.probe_grid
    flux = nf.flux(grid)
    s = np.geomspace(flux[0] / 4, flux[-1] * 4, n_grid)
    comp = nf.complementary(s)
    k = np.argmax(np.outer(t, s) - comp, axis=1)
    a = np.log(s[np.maximum(k - 1, 0)])
    b = np.log(s[np.minimum(k + 1, n_grid - 1)])
    obj = lambda x: t * np.exp(x) - nf.complementary(np.exp(x))
    r = (np.sqrt(5) - 1) / 2
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = obj(c), obj(d)
    for _ in range(iters):
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new = np.where(left, b - r * (b - a), a + r * (b - a))
        fnew = obj(new)
        c, d, fc, fd = (np.where(left, new, d), np.where(left, c, new),
                        np.where(left, fnew, fd), np.where(left, fc, fnew))
    return np.maximum(np.maximum(fc, fd), obj(np.log(s[k])))


def involution(nf, tol=1e-6):
    t = nf.probe_grid
    back = involution_values(nf, t)
    phi = nf.potential(t)
    err = float(np.max(np.abs(back - phi) / phi))
    return CheckResult("involution", err < tol, err, "relative, probe grid")


def complementary_flux_bound(nf, rel_tol=1e-12):
    t = nf.probe_grid
    lhs = nf.complementary(nf.flux(t))
    rhs = nf.potential(2 * t)
    worst = float(np.max((lhs - rhs) / rhs))
    return CheckResult("complementary bound", worst <= rel_tol, worst, "Phi~(t phi(t)) <= Phi(2t)")


def random_fields(mesh, rng, n, scale_range=(1e-2, 1e2)):
    out = []
    for _ in range(n):
        scale = sample_log_uniform(rng, *scale_range, 1)[0]
        out.append(DiscreteField.from_interior(mesh, scale * rng.normal(size=len(mesh.interior))))
    return out


def luxemburg_suite(nf, rng, n=100, mesh=None, tol=1e-10, alg_tol=1e-9):
    mesh = mesh or make_rect_mesh(8, 8)
    fields = random_fields(mesh, rng, n)
    unit = 0.0
    homog = 0.0
    tri = -np.inf
    for u in fields:
        nu = norms.luxemburg_norm(nf, u)
        unit = max(unit, abs(norms.modular(nf, u * (1.0 / nu)) - 1.0))
        alpha = rng.uniform(-10, 10)
        homog = max(homog, abs(norms.luxemburg_norm(nf, u * alpha) - abs(alpha) * nu) / (abs(alpha) * nu))
        v = fields[rng.integers(len(fields))]
        tri = max(tri, (norms.luxemburg_norm(nf, u + v) - nu - norms.luxemburg_norm(nf, v))
                  / (nu + norms.luxemburg_norm(nf, v)))
    return [
        CheckResult("luxemburg unit modular", unit <= tol, unit, f"{n} fields"),
        CheckResult("luxemburg homogeneity", homog <= alg_tol, homog, f"{n} fields"),
        CheckResult("luxemburg triangle", tri <= alg_tol, tri, f"{n} triples"),
    ]


def norm_modular(nf, rng, n=200, mesh=None, rel_tol=1e-8):
    mesh = mesh or make_rect_mesh(8, 8)
    worst = -np.inf
    ok = True
    for u in random_fields(mesh, rng, n):
        rep = norms.norm_modular_sandwich(nf, u)
        worst = max(worst, _rel_excess(rep))
        ok &= rep.holds(rel_tol)
    return CheckResult("norm-modular sandwich", ok, worst, f"{n} fields")


def holder(nf, rng, n=50, mesh=None, tol=1e-9):
    mesh = mesh or make_rect_mesh(6, 6)
    fields = random_fields(mesh, rng, 2 * n, scale_range=(1e-1, 1e1))
    worst = max(-norms.holder_check(nf, fields[2 * i], fields[2 * i + 1])
                / max(np.abs(fields[2 * i].values).max() * np.abs(fields[2 * i + 1].values).max(), 1e-300)
                for i in range(n))
    return CheckResult("orlicz-holder", worst <= tol, worst, f"{n} pairs")


def conjugate_sandwich(nf, dimension, rng, n=10_000, rel_tol=1e-8):
    try:
        sc = sobolev_conjugate(nf, dimension)
    except IndexOutOfRange as exc:
        return CheckResult("conjugate sandwich", True, 0.0, f"skipped: {exc}")
    lo, hi = sc.certified_domain
    rho = sample_log_uniform(rng, lo, hi, n)
    target = sample_log_uniform(rng, lo, hi, n)
    rep = zeta_bounds_check(sc, rho, target / rho)
    return CheckResult("conjugate sandwich", rep.holds(rel_tol), _rel_excess(rep),
                       f"N={dimension}, ell*={sc.ell_star:.6g}, m*={sc.em_star:.6g}, {n} pairs")


def run_suite(nf, seed=0, dimension=None, n_pairs=10_000, n_fields=100):
    rng = np.random.default_rng(seed)
    results = [
        index_certificate(nf),
        delta2(nf),
        convexity(nf, rng, n_pairs),
        zeta_sandwich(nf, rng, n_pairs),
        young(nf, rng, n_pairs),
        involution(nf),
        complementary_flux_bound(nf),
        *luxemburg_suite(nf, rng, n_fields),
        norm_modular(nf, rng, n_fields),
        holder(nf, rng, max(n_fields // 4, 1)),
    ]
    if dimension is not None:
        results.append(conjugate_sandwich(nf, dimension, rng, n_pairs))
    return results
