"""Discrete energy minimisation for -div(phi(|grad u|) grad u) = f(x, u) + h.

The energy of a trace-zero P1 field is

    I(u) = int Phi(|grad u|) - int F(x, u) - int h u,

with the gradient term exact per element (gradients are constant) and the
other two terms by one-point barycentric quadrature.  ``weak_gradient`` is the
exact derivative of that discrete energy with respect to the interior nodal
values, i.e. the P1 weak-form residual.
"""
from dataclasses import dataclass, field as dc_field, replace
import json
import logging
from typing import Callable, Optional

import numpy as np

from .mesh import BoundaryViolation, DiscreteField, MeshMismatch
from .norms import weighted_luxemburg

log = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _as_field_fn(value):
    """Constant or callable(x, y) -> callable(x, y) returning arrays."""
    if callable(value):
        return value
    c = float(value)
    return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, c)


@dataclass(frozen=True)
class Reaction:
    """Nonlinearity f(x, y, s) with its potential and declared growth data.

    ``F`` defaults to Gauss-Legendre quadrature of ``f`` on [0, s].  Growth
    data left as ``None`` is undeclared and skipped by the audit.
    """

    f: Callable
    F: Optional[Callable] = None
    A: Optional[float] = None
    B: object = 0.0
    a: Optional[float] = None
    b: object = 0.0
    A_infinity: object = None
    ell: Optional[float] = None

    @classmethod
    def zero(cls):
        return cls(f=lambda x, y, s: np.zeros_like(np.asarray(s, dtype=float)),
                   F=lambda x, y, s: np.zeros_like(np.asarray(s, dtype=float)),
                   A=0.0, a=0.0, A_infinity=0.0)

    def value(self, x, y, s):
        s = np.asarray(s, dtype=float)
        return np.asarray(self.f(x, y, s), dtype=float) * np.ones_like(s)

    def potential(self, x, y, s):
        s = np.asarray(s, dtype=float)
        if self.F is not None:
            return np.asarray(self.F(x, y, s), dtype=float) * np.ones_like(s)
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        nodes = 0.5 * s[..., None] * (1 + _GL_NODES)
        return 0.5 * s * (self.value(x, y, nodes) @ _GL_WEIGHTS)

    def a_infinity(self, x, y):
        if self.A_infinity is None:
            raise ValueError("reaction has no A_infinity")
        return _as_field_fn(self.A_infinity)(x, y)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 10_000
    method: str = "lbfgs"
    memory: int = 10
    c1: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    energy_floor: float = -1e10
    regularization: float = 0.0
    initial: str = "zero"
    seed: int = 0


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    nfunction: object
    mesh: object
    reaction: Reaction = dc_field(default_factory=Reaction.zero)
    h: object = 0.0
    options: SolverOptions = SolverOptions()

    def with_options(self, **changes):
        return replace(self, options=replace(self.options, **changes))


@dataclass(eq=False)
class SolveReport:
    minimizer: DiscreteField
    energy_trace: list
    residual_trace: list
    residual_norm: float
    iterations: int
    status: str
    message: str = ""
    coercivity_estimate: Optional[float] = None
    growth_violations: list = dc_field(default_factory=list)

    @property
    def converged(self):
        return self.status == "converged"

    def to_dict(self):
        return {
            "status": self.status,
            "message": self.message,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "energy": self.energy_trace[-1] if self.energy_trace else None,
            "coercivity_estimate": self.coercivity_estimate,
            "growth_violations": [v.to_dict() for v in self.growth_violations],
            "energy_trace": list(self.energy_trace),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


# -- assembly -------------------------------------------------------------------

class _Assembler:
    """Precomputed geometry for one problem; works on interior nodal vectors."""

    def __init__(self, spec):
        self.spec = spec
        m = spec.mesh
        self.mesh = m
        self.nf = spec.nfunction
        self.cx, self.cy = m.centroids.T
        self.h_vals = _as_field_fn(spec.h)(self.cx, self.cy)
        self.eps = spec.options.regularization

    def full(self, x):
        return self.mesh.expand(x)

    def _grad_term(self, u):
        g = self.mesh.gradients(u)
        r = np.hypot(g[:, 0], g[:, 1])
        if self.eps:
            r = np.sqrt(r * r + self.eps ** 2)
        return g, r

    def energy(self, u):
        m = self.mesh
        _, r = self._grad_term(u)
        phi_term = self.nf.potential(r)
        if self.eps:
            phi_term = phi_term - self.nf.potential(self.eps)
        uc = m.centroid_values(u)
        F = self.spec.reaction.potential(self.cx, self.cy, uc)
        return float(np.dot(phi_term - F - self.h_vals * uc, m.element_areas))

    def flux_vectors(self, g, r):
        # phi(r) * grad u, with the flux set to 0 where the gradient vanishes
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(r > 0, self.nf.flux(r) / np.where(r > 0, r, 1.0), 0.0)
        return scale[:, None] * g

    def gradient(self, u):
        m = self.mesh
        g, r = self._grad_term(u)
        q = self.flux_vectors(g, r)
        local = np.einsum("ki,kij->kj", q, m.gradient_operators) * m.element_areas[:, None]
        uc = m.centroid_values(u)
        load = (self.spec.reaction.value(self.cx, self.cy, uc) + self.h_vals) * m.element_areas / 3.0
        local = local - load[:, None]
        return m.scatter(local)[m.interior]


def _check_field(spec, field):
    if isinstance(field, DiscreteField):
        if field.mesh is not spec.mesh:
            raise MeshMismatch("field does not live on the problem mesh")
        values = field.values
    else:
        values = np.asarray(field, dtype=float)
        if values.shape != (spec.mesh.n_vertices,):
            raise MeshMismatch("nodal vector has the wrong length")
    if np.any(values[spec.mesh.boundary_mask] != 0):
        raise BoundaryViolation("energy is defined on trace-zero fields only")
    return values


def energy(spec, field):
    """Discrete energy I(u) of a trace-zero field."""
    return _Assembler(spec).energy(_check_field(spec, field))


def weak_gradient(spec, field):
    """Residual vector (one entry per interior vertex) of the P1 weak form."""
    return _Assembler(spec).gradient(_check_field(spec, field))


# -- minimisation ---------------------------------------------------------------

def _lbfgs_direction(g, pairs):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * np.dot(s, q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= np.dot(s, y) / np.dot(y, y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return -q


def minimize(spec, initial=None):
    """Minimise the discrete energy over trace-zero fields.

    Steepest descent or L-BFGS, both with Armijo backtracking; the first trial
    step after iteration one is the Barzilai-Borwein estimate (steepest) or the
    unit quasi-Newton step (L-BFGS).  Returns a SolveReport whose ``status`` is
    one of ``converged``, ``max_iter``, ``stalled`` or ``non_coercive``.
    """
    opts = spec.options
    asm = _Assembler(spec)
    mesh = spec.mesh
    n = len(mesh.interior)
    if initial is not None:
        x = _check_field(spec, initial)[mesh.interior].copy()
    elif opts.initial == "random":
        x = np.random.default_rng(opts.seed).uniform(-1.0, 1.0, n)
    else:
        x = np.zeros(n)

    E = asm.energy(asm.full(x))
    g = asm.gradient(asm.full(x))
    energies = [E]
    residuals = [float(np.abs(g).max()) if n else 0.0]
    pairs = []
    prev = None
    status, message = "max_iter", f"no convergence in {opts.max_iter} iterations"
    it = 0
    start_norm = np.abs(x).max() if n else 0.0

    for it in range(1, opts.max_iter + 1):
        if residuals[-1] < opts.tol:
            status, message = "converged", "residual below tolerance"
            it -= 1
            break
        if opts.method == "lbfgs" and pairs:
            d = _lbfgs_direction(g, pairs)
            step = 1.0
            if np.dot(d, g) >= 0:
                pairs.clear()
                d = -g
                step = 1.0 / max(np.linalg.norm(g), 1e-300)
        else:
            d = -g
            if prev is not None and prev[0] > 0:
                step = prev[0]
            else:
                step = min(1.0, 1.0 / max(np.linalg.norm(g), 1e-300))
        slope = float(np.dot(g, d))
        accepted = False
        for _ in range(opts.max_backtracks):
            x_new = x + step * d
            E_new = asm.energy(asm.full(x_new))
            if np.isfinite(E_new) and E_new <= E + opts.c1 * step * slope:
                accepted = True
                break
            step *= opts.backtrack
        if not accepted:
            if pairs:
                # retry from a steepest-descent step
                pairs.clear()
                continue
            status, message = "stalled", "line search found no decrease at the minimum step"
            break
        g_new = asm.gradient(asm.full(x_new))
        s_vec, y_vec = x_new - x, g_new - g
        sy = float(np.dot(s_vec, y_vec))
        if opts.method == "lbfgs":
            if sy > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
                pairs.append((s_vec, y_vec, 1.0 / sy))
                if len(pairs) > opts.memory:
                    pairs.pop(0)
            prev = None
        else:
            prev = (float(np.dot(s_vec, s_vec)) / sy if sy > 0 else -1.0,)
        x, g, E = x_new, g_new, E_new
        energies.append(E)
        residuals.append(float(np.abs(g).max()))
        if E < opts.energy_floor and np.abs(x).max() > start_norm:
            status = "non_coercive"
            message = f"energy {E:.3e} fell below the floor {opts.energy_floor:.3e} with growing iterate"
            break
        if not np.all(np.isfinite(x)):
            status, message = "non_coercive", "iterate diverged"
            break
    else:
        it = opts.max_iter
    if status == "max_iter" and residuals[-1] < opts.tol:
        status, message = "converged", "residual below tolerance"

    log.info("minimize: %s after %d iterations, residual %.3e", status, it, residuals[-1])
    return SolveReport(
        minimizer=DiscreteField(mesh, asm.full(x)),
        energy_trace=energies,
        residual_trace=residuals,
        residual_norm=residuals[-1],
        iterations=it,
        status=status,
        message=message,
    )


# -- coercivity -----------------------------------------------------------------

def coercivity_estimate(spec, samples=8, descent_steps=200, seed=None, ell=None):
    """Smallest value found of Q(v) = int Phi(|grad v|) - int A_inf |v|^ell on |v|_Phi = 1.

    Projected gradient descent (projection = division by the Luxemburg norm)
    from ``samples`` seeded random starts.  The result is an upper bound on the
    discrete infimum: a negative value shows the condition fails on this
    mesh, a positive one is only evidence that it holds.
    """
    mesh = spec.mesh
    nf = spec.nfunction
    ell = nf.ell if ell is None else ell
    cx, cy = mesh.centroids.T
    a_inf = spec.reaction.a_infinity(cx, cy) * np.ones(mesh.n_triangles)
    areas = mesh.element_areas
    asm = _Assembler(spec.with_options(regularization=0.0))
    rng = np.random.default_rng(spec.options.seed if seed is None else seed)

    def project(x):
        u = mesh.expand(x)
        n = weighted_luxemburg(nf, np.abs(mesh.centroid_values(u)), areas)
        return x / n

    def Q(x):
        u = mesh.expand(x)
        g, r = asm._grad_term(u)
        uc = mesh.centroid_values(u)
        return float(np.dot(nf.potential(r) - a_inf * np.abs(uc) ** ell, areas))

    def dQ(x):
        u = mesh.expand(x)
        g, r = asm._grad_term(u)
        q = asm.flux_vectors(g, r)
        local = np.einsum("ki,kij->kj", q, mesh.gradient_operators) * areas[:, None]
        uc = mesh.centroid_values(u)
        react = ell * a_inf * np.abs(uc) ** (ell - 1) * np.sign(uc) * areas / 3.0
        return mesh.scatter(local - react[:, None])[mesh.interior]

    best = np.inf
    n = len(mesh.interior)
    for _ in range(samples):
        x = project(rng.uniform(-1.0, 1.0, n))
        q = Q(x)
        grad = dQ(x)
        step = 1.0 / max(np.linalg.norm(grad), 1e-300)
        for _ in range(descent_steps):
            for _ in range(40):
                x_new = project(x - step * grad)
                q_new = Q(x_new)
                if q_new < q:
                    break
                step *= 0.5
            else:
                break
            g_new = dQ(x_new)
            s_vec, y_vec = x_new - x, g_new - grad
            sy = float(np.dot(s_vec, y_vec))
            x, q, grad = x_new, q_new, g_new
            step = float(np.dot(s_vec, s_vec)) / sy if sy > 0 else 2.0 * step
        best = min(best, q)
    return float(best)


# -- growth audit ---------------------------------------------------------------

@dataclass(frozen=True)
class GrowthViolation:
    condition: str
    x: float
    y: float
    s: float
    lhs: float
    rhs: float

    def to_dict(self):
        return {k: (float(v) if not isinstance(v, str) else v) for k, v in self.__dict__.items()}


def power_critical(gamma, dimension):
    """s -> |s|^gamma_* with gamma_* = N gamma / (N - gamma)."""
    gs = dimension * gamma / (dimension - gamma)
    fn = lambda s: np.abs(np.asarray(s, dtype=float)) ** gs
    fn.exponent = gs
    return fn


def growth_audit(reaction, s_range=(1e-3, 1e3), points=((0.5, 0.5),), phi_star=None,
                 n_samples=10_000, seed=0, conditions=("potential", "weak"), ell=None,
                 rel_tol=1e-12, abs_tol=1e-300):
    """Sample (x, s) and report violations of the declared growth inequalities.

    ``conditions`` picks among ``potential`` (F <= A|s|^ell + B),
    ``distributional`` (|f| <= a Phi_*(s) + b) and ``weak``
    (|f s| <= a Phi_*(s) + b|s|).  ``phi_star`` is a SobolevConjugate or any
    callable critical function.  An empty list only means no counterexample
    was found.
    """
    rng = np.random.default_rng(seed)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    lo, hi = s_range
    if phi_star is not None and hasattr(phi_star, "domain"):
        d_lo, d_hi = phi_star.domain
        lo, hi = max(lo, d_lo * (1 + 1e-9)), min(hi, d_hi * (1 - 1e-9))
    mag = np.exp(rng.uniform(np.log(lo), np.log(hi), n_samples))
    s = mag * rng.choice([-1.0, 1.0], n_samples)
    which = rng.integers(0, len(pts), n_samples)
    x, y = pts[which, 0], pts[which, 1]

    out = []

    def record(name, bad, lhs, rhs):
        for i in np.flatnonzero(bad):
            out.append(GrowthViolation(name, x[i], y[i], s[i], lhs[i], rhs[i]))

    def exceeds(lhs, rhs):
        return lhs > rhs * (1 + rel_tol) + abs_tol

    ell = reaction.ell if ell is None else ell
    if "potential" in conditions and reaction.A is not None:
        if ell is None:
            raise ValueError("the potential growth check needs ell")
        lhs = reaction.potential(x, y, s)
        rhs = reaction.A * np.abs(s) ** ell + _as_field_fn(reaction.B)(x, y)
        record("potential", exceeds(lhs, rhs), lhs, rhs)
    f_forms = [c for c in conditions if c in ("distributional", "weak")]
    if f_forms and reaction.a is not None:
        if phi_star is None:
            raise ValueError("f growth checks need a critical function phi_star")
        crit = np.asarray(phi_star(np.abs(s)), dtype=float)
        fv = reaction.value(x, y, s)
        b = _as_field_fn(reaction.b)(x, y)
        if "distributional" in f_forms:
            lhs, rhs = np.abs(fv), reaction.a * crit + b
            record("distributional", exceeds(lhs, rhs), lhs, rhs)
        if "weak" in f_forms:
            lhs, rhs = np.abs(fv * s), reaction.a * crit + b * np.abs(s)
            record("weak", exceeds(lhs, rhs), lhs, rhs)
    if "a_infinity" in conditions and reaction.A_infinity is not None and ell is not None:
        big = np.repeat([1e3, 1e4], len(pts))
        px, py = np.tile(pts[:, 0], 2), np.tile(pts[:, 1], 2)
        ratio = reaction.potential(px, py, big) / big ** ell
        bound = reaction.a_infinity(px, py) * np.ones_like(ratio)
        bad = ratio > bound * 1.05 + 0.05
        for i in np.flatnonzero(bad):
            out.append(GrowthViolation("a_infinity", px[i], py[i], big[i], ratio[i], bound[i]))
    return out
