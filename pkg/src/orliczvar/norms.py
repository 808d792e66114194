"""Modulars and Luxemburg norms of P1 fields, plus the classical inequalities.

All integrals use the one-point barycentric rule on each triangle, so every
inequality below is tested for the same discrete measure on both sides.
"""
import numpy as np

from .mesh import DiscreteField, MeshMismatch, _values_and_mesh, check_same_mesh
from .nfunction import BoundReport, BracketFailure, _solve_increasing


class Complementary:
    """Phi~ wrapped so it can be used wherever an N-function is expected."""

    def __init__(self, nf):
        self.base = nf
        # conjugate exponents swap and invert
        self.ell = nf.em / (nf.em - 1)
        self.em = nf.ell / (nf.ell - 1)

    def potential(self, t):
        return self.base.complementary(np.abs(np.asarray(t, dtype=float)))

    __call__ = potential


def _samples(field, mesh=None):
    values, mesh = _values_and_mesh(field, mesh)
    return np.abs(mesh.centroid_values(values)), mesh.element_areas


def weighted_modular(nf, samples, weights):
    return float(np.dot(nf.potential(samples), weights))


def weighted_luxemburg(nf, samples, weights, rel_tol=1e-12, max_iter=200):
    """Luxemburg norm of the discrete measure sum_k weights_k * delta(samples_k)."""
    samples = np.abs(np.asarray(samples, dtype=float))
    if not np.any(samples > 0):
        return 0.0
    # mu = 1/lambda; the modular of mu*u increases strictly in mu
    fun = lambda mu: np.array([weighted_modular(nf, mu[0] * samples, weights)])
    lo = np.array([1.0])
    hi = np.array([1.0])
    for _ in range(2000):
        if fun(lo)[0] <= 1.0:
            break
        lo = lo / 2
    else:
        raise BracketFailure("could not bracket the Luxemburg norm from below")
    for _ in range(2000):
        val = fun(hi)[0]
        if not np.isfinite(val):
            raise BracketFailure("modular overflowed before bracketing the Luxemburg norm")
        if val >= 1.0:
            break
        hi = hi * 2
    else:
        raise BracketFailure("could not bracket the Luxemburg norm from above")
    mu = _solve_increasing(fun, np.array([1.0]), lo, hi, max_iter=max_iter)
    return float(1.0 / mu[0])


def modular(nf, field, mesh=None):
    """Integral of Phi(|u|) by barycentric quadrature."""
    s, w = _samples(field, mesh)
    return weighted_modular(nf, s, w)


def luxemburg_norm(nf, field, mesh=None):
    """inf{lambda > 0 : int Phi(u/lambda) <= 1}; zero for the zero field."""
    s, w = _samples(field, mesh)
    return weighted_luxemburg(nf, s, w)


def gradient_luxemburg_norm(nf, field, mesh=None):
    """Luxemburg norm of |grad u| (elementwise constant, so the rule is exact)."""
    values, mesh = _values_and_mesh(field, mesh)
    g = mesh.gradients(values)
    return weighted_luxemburg(nf, np.hypot(g[:, 0], g[:, 1]), mesh.element_areas)


def lebesgue_norm(field, p, mesh=None):
    s, w = _samples(field, mesh)
    return float(np.dot(s ** p, w) ** (1.0 / p))


def norm_modular_sandwich(nf, field, mesh=None):
    """(zeta0(|u|_Phi), int Phi(u), zeta1(|u|_Phi))."""
    s, w = _samples(field, mesh)
    norm = weighted_luxemburg(nf, s, w)
    lo = min(norm ** nf.ell, norm ** nf.em)
    hi = max(norm ** nf.ell, norm ** nf.em)
    return BoundReport(np.float64(lo), np.float64(weighted_modular(nf, s, w)), np.float64(hi))


def holder_check(nf, u, v, mesh=None):
    """2 |u|_Phi |v|_Phi~ - int |u v|; nonnegative by the Orlicz-Hölder inequality."""
    if isinstance(u, DiscreteField) and isinstance(v, DiscreteField):
        check_same_mesh(u, v)
    su, w = _samples(u, mesh)
    sv, _ = _samples(v, mesh if mesh is not None else getattr(u, "mesh", None))
    if su.shape != sv.shape:
        raise MeshMismatch("u and v have different sizes")
    product = float(np.dot(su * sv, w))
    if product == 0.0:
        return 0.0
    return 2.0 * weighted_luxemburg(nf, su, w) * weighted_luxemburg(Complementary(nf), sv, w) - product


def poincare_ratio(nf, field, mesh=None):
    """|u|_Phi / |grad u|_Phi, the empirical discrete Poincaré ratio."""
    return luxemburg_norm(nf, field, mesh) / gradient_luxemburg_norm(nf, field, mesh)


def embedding_ratio(nf, field, mesh=None):
    """(int |u|^ell)^(1/ell) / |u|_Phi for the lower index ell."""
    n = luxemburg_norm(nf, field, mesh)
    return lebesgue_norm(field, nf.ell, mesh) / n if n > 0 else 0.0
