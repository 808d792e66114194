"""N-functions built from a flux density phi, and the scalar objects derived from them.

Given phi > 0 with t -> t*phi(t) nondecreasing, the potential is

    Phi(t) = int_0^|t| s*phi(s) ds,

an even convex function.  This module certifies the growth indices
``ell <= t^2 phi(t) / Phi(t) <= em`` on a log-spaced probe grid and evaluates
the complementary function, inverse, and the Sobolev conjugate Phi_*.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import quadrature
from .expr import compile_expression
from .quadrature import QuadratureFailure

__all__ = [
    "PhiSpec", "NFunction", "SobolevConjugate", "BoundReport",
    "NFunctionError", "InvalidPhi", "NonMonotone", "IndexOutOfRange", "BracketFailure",
    "QuadratureFailure", "build_nfunction", "builtin", "from_expression",
    "potential", "complementary", "young_gap", "zeta_bounds_check", "sobolev_conjugate",
    "BUILTINS",
]


class NFunctionError(ValueError):
    pass


class InvalidPhi(NFunctionError):
    pass


class NonMonotone(NFunctionError):
    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"t*phi(t) decreases near t={self.t:.6g}")


class IndexOutOfRange(NFunctionError):
    pass


class BracketFailure(NFunctionError):
    pass


@dataclass(frozen=True)
class PhiSpec:
    """User-facing description of phi.

    ``phi``, ``potential`` and ``flux_derivative`` must accept ndarrays of
    positive reals.  ``potential`` is used instead of quadrature when given.
    """

    phi: Callable
    potential: Optional[Callable] = None
    flux_derivative: Optional[Callable] = None
    t_max: float = 1e6
    name: str = "custom"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundReport:
    lower: np.ndarray
    middle: np.ndarray
    upper: np.ndarray

    def violations(self, rel_tol=1e-8, abs_tol=0.0):
        slack_lo = rel_tol * np.abs(self.lower) + abs_tol
        slack_hi = rel_tol * np.abs(self.upper) + abs_tol
        bad = (self.middle < self.lower - slack_lo) | (self.middle > self.upper + slack_hi)
        return np.flatnonzero(np.atleast_1d(bad))

    def holds(self, rel_tol=1e-8, abs_tol=0.0):
        return self.violations(rel_tol, abs_tol).size == 0


def _solve_increasing(fun, target, lo, hi, max_iter=200):
    """Vectorised root of increasing ``fun(x) = target`` on brackets [lo, hi].

    Works on log(fun) against log(x), where N-function-like maps are close to
    straight lines, with the Illinois variant of false position; a bisection
    step replaces any non-finite or out-of-bracket proposal.
    """
    lt = np.log(target)
    a = np.log(lo)
    b = np.log(hi)

    def resid(x):
        with np.errstate(divide="ignore"):
            return np.log(fun(np.exp(x))) - lt

    fa = np.minimum(resid(a), 0.0)
    fb = np.maximum(resid(b), 0.0)
    side = np.zeros_like(a)
    x = 0.5 * (a + b)
    tol = 2e-16 * np.maximum(1.0, np.abs(lt))
    for _ in range(max_iter):
        with np.errstate(invalid="ignore", divide="ignore"):
            c = b - fb * (b - a) / (fb - fa)
        bisect = ~np.isfinite(c) | (c <= a) | (c >= b)
        c = np.where(bisect, 0.5 * (a + b), c)
        fc = resid(c)
        fc = np.where(np.isnan(fc), -np.inf, fc)
        x = c
        neg = fc < 0
        fb = np.where(neg & (side == -1), 0.5 * fb, fb)
        fa = np.where(~neg & (side == 1), 0.5 * fa, fa)
        a = np.where(neg, c, a)
        fa = np.where(neg, fc, fa)
        b = np.where(neg, b, c)
        fb = np.where(neg, fb, fc)
        side = np.where(neg, -1.0, 1.0)
        if np.all((np.abs(fc) <= tol) | (b - a <= 4e-16 * np.maximum(1.0, np.abs(c)))):
            break
    return np.exp(x)


def _grow_bracket(fun, target, lo, hi, factor=2.0, max_steps=400):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(max_steps):
        low_bad = fun(lo) > target
        high_bad = fun(hi) < target
        if not (low_bad.any() or high_bad.any()):
            return lo, hi
        lo = np.where(low_bad, lo / factor, lo)
        hi = np.where(high_bad, hi * factor, hi)
        if np.any(lo < 1e-300) or np.any(~np.isfinite(hi)) or np.any(hi > 1e300):
            break
    raise BracketFailure("could not bracket the root within the floating-point range")


class NFunction:
    """A validated N-function; immutable after construction."""

    def __init__(self, spec, probe_grid, potential_table, ell, em, delta2_constant):
        self.spec = spec
        self.probe_grid = probe_grid
        self._table_t = probe_grid
        self._table_phi = potential_table
        self.ell = float(ell)
        self.em = float(em)
        self.delta2_constant = float(delta2_constant)

    def __repr__(self):
        return (f"NFunction({self.spec.name!r}, ell={self.ell:.6g}, em={self.em:.6g}, "
                f"K={self.delta2_constant:.6g})")

    @property
    def name(self):
        return self.spec.name

    # -- pointwise quantities -------------------------------------------------
    def phi(self, t):
        return np.asarray(self.spec.phi(np.asarray(t, dtype=float)), dtype=float)

    def flux(self, t):
        """s*phi(s) extended oddly; zero at the origin."""
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(a > 0, a * self.phi(np.where(a > 0, a, 1.0)), 0.0)
        return np.sign(t) * out

    def potential(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        pos = t > 0
        if pos.any():
            if self.spec.potential is not None:
                out[pos] = self.spec.potential(t[pos])
            else:
                out[pos] = _quadrature_potential(self.spec.phi, self._table_t, self._table_phi, t[pos])
        return float(out[0]) if scalar else out

    __call__ = potential

    def index_quotient(self, t):
        """t^2 phi(t) / Phi(t), i.e. t Phi'(t) / Phi(t)."""
        t = np.asarray(t, dtype=float)
        return t * self.flux(t) / self.potential(t)

    # -- inverses -------------------------------------------------------------
    def inverse(self, s):
        """Phi^{-1}(s) for s >= 0 by log-space bisection."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        if np.any(s < 0):
            raise ValueError("Phi^{-1} is defined for s >= 0 only")
        out = np.zeros_like(s)
        pos = s > 0
        if pos.any():
            lo, hi = self._inverse_bracket(s[pos])
            out[pos] = _solve_increasing(self.potential, s[pos], lo, hi)
        return float(out[0]) if scalar else out

    def _inverse_bracket(self, s):
        T, P = self._table_t, self._table_phi
        k = np.clip(np.searchsorted(P, s), 1, len(P) - 1)
        lo = T[k - 1].copy()
        hi = T[k].copy()
        below = s < P[0]
        above = s > P[-1]
        # power-law bracket with slightly widened exponents
        l, m = self.ell * 0.99, self.em * 1.01
        with np.errstate(divide="ignore", over="ignore"):
            r0 = s[below] / P[0]
            lo[below] = T[0] * r0 ** (1 / l) * 0.5
            hi[below] = T[0] * r0 ** (1 / m) * 2.0
            r1 = s[above] / P[-1]
            lo[above] = T[-1] * r1 ** (1 / m) * 0.5
            hi[above] = T[-1] * r1 ** (1 / l) * 2.0
        lo = np.clip(lo, 1e-300, None)
        hi = np.clip(hi, None, 1e300)
        return _grow_bracket(self.potential, s, lo, hi)

    def flux_inverse(self, t):
        """Smallest-ish s >= 0 with s*phi(s) = t (bisection on the monotone flux)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < 0):
            raise ValueError("flux inverse needs t >= 0")
        out = np.zeros_like(t)
        pos = t > 0
        if pos.any():
            T = self._table_t
            F = self.flux(T)
            k = np.clip(np.searchsorted(F, t[pos]), 1, len(F) - 1)
            lo = T[k - 1].copy()
            hi = T[k].copy()
            lo = np.where(t[pos] < F[0], T[0], lo)
            hi = np.where(t[pos] > F[-1], T[-1], hi)
            lo, hi = _grow_bracket(self.flux, t[pos], lo, hi)
            out[pos] = _solve_increasing(self.flux, t[pos], lo, hi)
        return float(out[0]) if scalar else out

    def complementary(self, t):
        """Phi~(t) = max_{s>=0} (s t - Phi(s)), attained where s*phi(s) = t."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("complementary function is evaluated for t >= 0")
        s = self.flux_inverse(t)
        val = s * t - self.potential(s)
        return np.maximum(val, 0.0) if np.ndim(val) else max(float(val), 0.0)

    def young_gap(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return self.potential(s) + self.complementary(t) - s * t

    def zeta_bounds(self, rho, t):
        return zeta_bounds_check(self, rho, t)


def _quadrature_potential(phi, table_t, table_vals, t):
    k = np.searchsorted(table_t, t, side="right")
    start = np.where(k > 0, table_t[np.maximum(k - 1, 0)], 0.0)
    base = np.where(k > 0, table_vals[np.maximum(k - 1, 0)], 0.0)
    piece, _ = quadrature.integrate(lambda s: s * phi(s), start, t, rel_tol=1e-12, abs_tol=1e-300)
    return base + piece


DEFAULT_PROBE = dict(t_min=1e-6, t_max=1e6, n=512)
DEFAULT_TOL = dict(index=1e-6, monotone=1e-12, convexity=1e-12)


def build_nfunction(spec, probe=None, tol=None):
    """Validate ``spec`` on the probe grid and certify its growth indices.

    ``probe`` is a dict with ``t_min``, ``t_max``, ``n``; ``tol`` a dict with
    ``index`` (absolute widening of ell/em), ``monotone`` and ``convexity``.
    """
    probe = {**DEFAULT_PROBE, **(probe or {})}
    tol = {**DEFAULT_TOL, **(tol or {})}
    grid = np.geomspace(probe["t_min"], min(probe["t_max"], spec.t_max), int(probe["n"]))

    with np.errstate(all="ignore"):
        phi = np.asarray(spec.phi(grid), dtype=float)
    if phi.shape != grid.shape:
        phi = np.broadcast_to(phi, grid.shape).astype(float)
    bad = ~np.isfinite(phi) | (phi <= 0)
    if bad.any():
        raise InvalidPhi(f"phi must be finite and positive; fails at t={grid[bad][0]:.6g}")
    flux = grid * phi
    drop = np.diff(flux) < -tol["monotone"] * np.abs(flux[1:])
    if drop.any():
        raise NonMonotone(grid[1:][drop][0])
    if not flux[-1] > flux[0]:
        raise InvalidPhi("t*phi(t) does not grow between the probe endpoints")

    if spec.potential is not None:
        with np.errstate(all="ignore"):
            table = np.asarray(spec.potential(grid), dtype=float)
    else:
        left = np.concatenate([[0.0], grid[:-1]])
        pieces, _ = quadrature.integrate(lambda s: s * spec.phi(s), left, grid, rel_tol=1e-12, abs_tol=1e-300)
        table = np.cumsum(pieces)
    if not np.all(np.isfinite(table)) or np.any(table <= 0):
        raise QuadratureFailure("potential is not finite and positive on the probe grid")
    if np.any(np.diff(table) <= 0):
        raise InvalidPhi("potential is not strictly increasing on the probe grid")

    quotient = grid * flux / table
    # absolute widening keeps the certificate within tol of the sampled range
    ell = quotient.min() - tol["index"]
    em = quotient.max() + tol["index"]
    if ell <= 1 + tol["index"]:
        raise IndexOutOfRange(f"lower index {ell:.6g} <= 1: Delta2 for the complementary function fails")

    nf = NFunction(spec, grid, table, ell, em, 1.0)
    doubled = nf.potential(2 * grid)
    if not np.all(np.isfinite(doubled)):
        raise IndexOutOfRange("Phi(2t) overflowed; Delta2 cannot be certified")
    nf.delta2_constant = float(max(1.0, np.max(doubled / table)))

    # midpoint convexity along the grid
    mid = nf.potential(0.5 * (grid[:-1] + grid[1:]))
    chord = 0.5 * (table[:-1] + table[1:])
    if np.any(mid > chord * (1 + tol["convexity"])):
        raise InvalidPhi("potential fails midpoint convexity on the probe grid")
    return nf


# -- built-in registry -------------------------------------------------------

def _linear(c=2.0):
    c = float(c)
    if c <= 0:
        raise InvalidPhi("linear phi needs c > 0")
    return PhiSpec(
        phi=lambda t: np.full_like(np.asarray(t, dtype=float), c),
        potential=lambda t: 0.5 * c * np.asarray(t, dtype=float) ** 2,
        flux_derivative=lambda t: np.full_like(np.asarray(t, dtype=float), c),
        name="linear", params={"c": c},
    )


def _power(p=2.0):
    p = float(p)
    if p <= 1:
        raise IndexOutOfRange("power phi needs p > 1")
    return PhiSpec(
        phi=lambda t: np.asarray(t, dtype=float) ** (p - 2),
        potential=lambda t: np.asarray(t, dtype=float) ** p / p,
        flux_derivative=lambda t: (p - 1) * np.asarray(t, dtype=float) ** (p - 2),
        name="power", params={"p": p},
    )


def _model_gamma(gamma=2.0):
    g = float(gamma)
    if g < 1:
        raise InvalidPhi("model-gamma needs gamma >= 1")

    def w(t):
        # sqrt(1+t^2) - 1 without cancellation
        t = np.asarray(t, dtype=float)
        return t * t / (np.sqrt(1 + t * t) + 1)

    def phi(t):
        t = np.asarray(t, dtype=float)
        return g * w(t) ** (g - 1) / np.sqrt(1 + t * t)

    return PhiSpec(phi=phi, potential=lambda t: w(t) ** g, name="model-gamma", params={"gamma": g})


def _log_power(p=2.0):
    p = float(p)
    if p <= 1:
        raise IndexOutOfRange("log-power phi needs p > 1")

    def phi(t):
        t = np.asarray(t, dtype=float)
        return p * t ** (p - 2) * np.log1p(t) + t ** (p - 1) / (t + 1)

    return PhiSpec(phi=phi, potential=lambda t: np.asarray(t, dtype=float) ** p * np.log1p(t),
                   name="log-power", params={"p": p})


BUILTINS = {
    "linear": _linear,
    "power": _power,
    "model-gamma": _model_gamma,
    "log-power": _log_power,
}


def builtin(name, **params):
    """PhiSpec for a registry entry, e.g. ``builtin("model-gamma", gamma=2)``."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise InvalidPhi(f"unknown phi {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(**params)


def from_expression(text, t_max=1e6):
    expr = compile_expression(text, ("t",))
    return PhiSpec(phi=lambda t: np.asarray(expr(t=np.asarray(t, dtype=float)), dtype=float),
                   t_max=t_max, name=f"expr:{text}")


# -- operations as free functions ------------------------------------------------

def potential(nf, t):
    return nf.potential(t)


def complementary(nf, t):
    return nf.complementary(t)


def young_gap(nf, s, t):
    return nf.young_gap(s, t)


def _zeta(t, lo_exp, hi_exp):
    t = np.asarray(t, dtype=float)
    a = t ** lo_exp
    b = t ** hi_exp
    return np.minimum(a, b), np.maximum(a, b)


def zeta_bounds_check(nf, rho, t):
    """(zeta0(t) Phi(rho), Phi(rho t), zeta1(t) Phi(rho)) with zeta from the indices.

    Works for any object exposing ``potential`` (or ``__call__``), ``ell`` and ``em``.
    """
    rho = np.asarray(rho, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(rho <= 0) or np.any(t <= 0):
        raise ValueError("rho and t must be positive")
    z0, z1 = _zeta(t, nf.ell, nf.em)
    base = nf.potential(rho)
    return BoundReport(z0 * base, nf.potential(rho * t), z1 * base)


# -- Sobolev conjugate --------------------------------------------------------------

class SobolevConjugate:
    """Phi_* defined through Phi_*^{-1}(s) = int_0^s Phi^{-1}(r) / r^{(N+1)/N} dr.

    The inverse is tabulated on a log-spaced s-grid; Phi_* itself is obtained by
    safeguarded Newton iteration on the tabulated inverse (whose derivative is
    known in closed form).
    """

    def __init__(self, nf, dimension, s_range=(1e-30, 1e30), n_table=1200):
        N = int(dimension)
        if N < 2:
            raise ValueError("dimension must be >= 2")
        if not (1 < nf.ell <= nf.em < N):
            raise IndexOutOfRange(
                f"need 1 < ell <= m < N; got ell={nf.ell:.6g}, m={nf.em:.6g}, N={N}")
        self.nfunction = nf
        self.dimension = N
        self.ell_star = N * nf.ell / (N - nf.ell)
        self.em_star = N * nf.em / (N - nf.em)
        self._power = (N + 1) / N

        s_nodes = np.geomspace(s_range[0], s_range[1], int(n_table))
        head = self._singular_head(s_nodes[0])
        pieces, _ = quadrature.integrate(self._integrand, s_nodes[:-1], s_nodes[1:], rel_tol=1e-12)
        values = head + np.concatenate([[0.0], np.cumsum(pieces)])
        if not np.all(np.diff(values) > 0):
            raise QuadratureFailure("tabulated Phi_*^{-1} is not strictly increasing")
        self.s_table = s_nodes
        self.inverse_table = values

    # ell/em aliases let the zeta sandwich helpers treat Phi_* like Phi
    @property
    def ell(self):
        return self.ell_star

    @property
    def em(self):
        return self.em_star

    @property
    def domain(self):
        """Range of arguments t for which Phi_*(t) can be evaluated."""
        return float(self.inverse_table[0]), float(self.inverse_table[-1])

    @property
    def certified_domain(self):
        """Arguments whose preimage lies inside the N-function's probe grid.

        The grid-estimated indices only certify Phi there, so the ell_*/m_*
        sandwich is only claimed on this sub-range.
        """
        grid = self.nfunction.probe_grid
        s_lo, s_hi = self.nfunction.potential(grid[[0, -1]])
        s_lo = max(s_lo, self.s_table[0])
        s_hi = min(s_hi, self.s_table[-1])
        return float(self.inverse(s_lo)), float(self.inverse(s_hi))

    def _integrand(self, s):
        s = np.asarray(s, dtype=float)
        return self.nfunction.inverse(s) * s ** (-self._power)

    def _singular_head(self, s0):
        # s = sigma^k with k = m_* leaves a bounded integrand near sigma = 0
        k = self.em_star
        N = self.dimension

        def g(sigma):
            inv = self.nfunction.inverse(sigma ** k)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                val = k * inv * sigma ** (-1.0 - k / N)
            return np.where(inv > 0, val, 0.0)

        value, _ = quadrature.integrate(g, 0.0, s0 ** (1.0 / k), rel_tol=1e-12)
        return value

    def inverse(self, s):
        """Phi_*^{-1}(s) for s inside the tabulated range (0 maps to 0)."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.zeros_like(s)
        pos = s > 0
        if np.any(s[pos] < self.s_table[0]) or np.any(s[pos] > self.s_table[-1]):
            raise BracketFailure("argument outside the tabulated range of Phi_*^{-1}")
        if pos.any():
            sp = s[pos]
            k = np.clip(np.searchsorted(self.s_table, sp, side="right") - 1, 0, len(self.s_table) - 2)
            piece, _ = quadrature.integrate(self._integrand, self.s_table[k], sp, rel_tol=1e-13, abs_tol=1e-300)
            out[pos] = self.inverse_table[k] + piece
        return float(out[0]) if scalar else out

    def potential(self, y):
        """Phi_*(y) by monotone inversion of the tabulated inverse."""
        y = np.abs(np.asarray(y, dtype=float))
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        out = np.zeros_like(y)
        pos = y > 0
        if pos.any():
            out[pos] = self._invert(y[pos])
        return float(out[0]) if scalar else out

    __call__ = potential

    def _invert(self, y):
        Y, S = self.inverse_table, self.s_table
        if np.any(y < Y[0]) or np.any(y > Y[-1]):
            raise BracketFailure(f"Phi_* argument outside tabulated domain [{Y[0]:.3g}, {Y[-1]:.3g}]")
        k = np.clip(np.searchsorted(Y, y, side="right") - 1, 0, len(Y) - 2)
        lo = np.log(S[k])
        hi = np.log(S[k + 1])
        # log-log interpolation as the starting point
        w = (np.log(y) - np.log(Y[k])) / (np.log(Y[k + 1]) - np.log(Y[k]))
        x = lo + w * (hi - lo)
        base_s, base_y = S[k], Y[k]
        for _ in range(60):
            s = np.exp(x)
            piece, _ = quadrature.integrate(self._integrand, base_s, s, rel_tol=1e-13, abs_tol=1e-300)
            g = base_y + piece - y
            hit = np.abs(g) <= 4 * np.finfo(float).eps * y
            lo = np.where(g < 0, x, lo)
            hi = np.where(g > 0, x, hi)
            slope = self.nfunction.inverse(s) * s ** (-1.0 / self.dimension)
            x_new = x - g / slope
            outside = (x_new < lo) | (x_new > hi) | ~np.isfinite(x_new)
            x_new = np.where(outside, 0.5 * (lo + hi), x_new)
            x_new = np.where(hit, x, x_new)
            done = hit | (np.abs(x_new - x) <= 1e-15 * np.maximum(1.0, np.abs(x)))
            x = x_new
            if np.all(done):
                break
        return np.exp(x)

    def index_quotient(self, y, rel_step=1e-5):
        """t Phi_*'(t) / Phi_*(t) with a central finite difference."""
        y = np.asarray(y, dtype=float)
        h = rel_step * y
        d = (self.potential(y + h) - self.potential(y - h)) / (2 * h)
        return y * d / self.potential(y)


def sobolev_conjugate(nf, dimension, **kwargs):
    return SobolevConjugate(nf, dimension, **kwargs)
