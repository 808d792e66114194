"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run as a script.
"""
import time

import numpy as np
import pytest

from orliczvar import (DiscreteField, ProblemSpec, Reaction, SolverOptions, build_nfunction, builtin,
                       coercivity_estimate, energy, growth_audit, lebesgue_norm, luxemburg_norm,
                       make_rect_mesh, minimize, power_critical, sobolev_conjugate, weak_gradient)
from orliczvar import checks

from oracles import dirichlet_eigenvalue_fd, poisson_fd

RESULTS = {}

# built-in registry entries with a dimension N > m for the conjugate sandwich
CASES = [
    ("linear", {"c": 2.0}, 3),
    ("power", {"p": 1.5}, 3),
    ("power", {"p": 3.0}, 4),
    ("model-gamma", {"gamma": 1.5}, 4),
    ("model-gamma", {"gamma": 2.0}, 5),
    ("model-gamma", {"gamma": 3.0}, 7),
    ("log-power", {"p": 2.0}, 4),
]


def _label(name, params):
    return name + "(" + ",".join(f"{k}={v:g}" for k, v in params.items()) + ")"


def record(number, title, passed, detail):
    RESULTS[number] = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title}: {detail}"
    assert passed, RESULTS[number]


def test_criterion_01_index_certificate():
    start = time.perf_counter()
    worst = []
    ok = True
    for gamma in (1.5, 2.0, 3.0):
        nf = build_nfunction(builtin("model-gamma", gamma=gamma))
        q = nf.index_quotient(nf.probe_grid)
        ok &= (gamma - 1e-6 <= nf.ell) and (nf.em <= 2 * gamma + 1e-6)
        ok &= bool(q.size == 512 and q.min() >= gamma and q.max() <= 2 * gamma)
        worst.append(f"g={gamma}: ell={nf.ell:.7f} m={nf.em:.7f}")
    elapsed = time.perf_counter() - start
    record(1, "model-gamma index certificate", ok and elapsed < 1.0, f"{'; '.join(worst)}; {elapsed:.3f}s")


def test_criterion_02_conjugate_exponent():
    start = time.perf_counter()
    sc = sobolev_conjugate(build_nfunction(builtin("linear", c=2.0)), 3)
    t = np.geomspace(10.0, 1e3, 41)
    slope = np.polyfit(np.log(t), np.log(sc(t)), 1)[0]
    elapsed = time.perf_counter() - start
    ok = abs(slope - 6.0) <= 0.06 and elapsed < 5.0
    record(2, "Phi_* log-log slope for phi=2, N=3", ok, f"slope={slope:.8f} (target 6), {elapsed:.2f}s")


def test_criterion_03_sandwiches():
    rng = np.random.default_rng(2024)
    failures = 0
    parts = []
    for name, params, N in CASES:
        nf = build_nfunction(builtin(name, **params))
        res = [checks.zeta_sandwich(nf, rng, 10_000, 1e-8),
               checks.conjugate_sandwich(nf, N, rng, 10_000, 1e-8),
               checks.norm_modular(nf, rng, 100, rel_tol=1e-8)]
        failures += sum(not r.passed for r in res)
        parts.append(f"{_label(name, params)} worst={max(r.worst for r in res):.1e}")
    record(3, "zeta, conjugate and norm-modular sandwiches", failures == 0,
           f"{failures} failing suites; " + "; ".join(parts))


def test_criterion_04_duality():
    rng = np.random.default_rng(7)
    ok = True
    worst_gap = worst_inv = worst_fb = -np.inf
    for name, params, _ in CASES:
        nf = build_nfunction(builtin(name, **params))
        y, inv, fb = checks.young(nf, rng, 10_000), checks.involution(nf), checks.complementary_flux_bound(nf)
        ok &= y.passed and inv.passed and fb.passed
        worst_gap = max(worst_gap, y.worst)
        worst_inv = max(worst_inv, inv.worst)
        worst_fb = max(worst_fb, fb.worst)
    record(4, "Young, involution, complementary flux bound", ok,
           f"min Young gap={-worst_gap:.2e}, involution err={worst_inv:.2e}, "
           f"max (Phi~(t phi)-Phi(2t))/Phi(2t)={worst_fb:.2e}")


def test_criterion_05_luxemburg():
    rng = np.random.default_rng(11)
    ok = True
    details = []
    for name, params, _ in CASES:
        nf = build_nfunction(builtin(name, **params))
        res = checks.luxemburg_suite(nf, rng, 100, tol=1e-10, alg_tol=1e-9)
        ok &= all(r.passed for r in res)
        details.append(f"{_label(name, params)} unit={res[0].worst:.1e}")
    nf = build_nfunction(builtin("model-gamma", gamma=2.0))
    mesh = make_rect_mesh(8, 8)
    worst_embed = max(luxemburg_norm(nf, u) / lebesgue_norm(u, 2.0)
                      for u in checks.random_fields(mesh, rng, 100))
    ok &= worst_embed <= 1.0
    record(5, "Luxemburg unit modular, homogeneity, triangle, embedding", ok,
           "; ".join(details) + f"; max |u|_Phi/|u|_2 = {worst_embed:.6f}")


def test_criterion_06_gateaux():
    # random fields follow the solver's convention for random starts: uniform nodal values in [-1, 1];
    # the reaction is the model-problem f(s) = s/4 with h = 0.1
    rng = np.random.default_rng(3)
    mesh = make_rect_mesh(8, 8)
    reaction = Reaction(f=lambda x, y, s: 0.25 * s, F=lambda x, y, s: s ** 2 / 8)
    t = 1e-6
    errors, central = [], []
    for name, params, _ in CASES:
        spec = ProblemSpec(build_nfunction(builtin(name, **params)), mesh, reaction, 0.1)
        for _ in range(20):
            u = DiscreteField.from_interior(mesh, rng.uniform(-1, 1, len(mesh.interior)))
            v = DiscreteField.from_interior(mesh, rng.uniform(-1, 1, len(mesh.interior)))
            pairing = float(np.dot(weak_gradient(spec, u), v.values[mesh.interior]))
            base = energy(spec, u)
            fd = (energy(spec, u + v * t) - base) / t
            errors.append(abs(fd - pairing) / abs(pairing))
            # diagnostic only: the symmetric quotient removes the O(t) truncation term
            cd = (energy(spec, u + v * t) - energy(spec, u - v * t)) / (2 * t)
            central.append(abs(cd - pairing) / abs(pairing))
    errors = np.array(errors)
    record(6, "one-sided directional derivative vs weak gradient at t=1e-6", errors.max() < 1e-4,
           f"max relative error {errors.max():.2e}, {np.sum(errors >= 1e-4)}/{errors.size} pairs at or above 1e-4, "
           f"median {np.median(errors):.1e}; central-difference max {max(central):.1e}")


def test_criterion_07_poisson_oracle():
    start = time.perf_counter()
    mesh = make_rect_mesh(64, 64)
    spec = ProblemSpec(build_nfunction(builtin("linear", c=2.0)), mesh, Reaction.zero(), 1.0,
                       SolverOptions(tol=1e-8))
    rep = minimize(spec)
    elapsed = time.perf_counter() - start
    ref = poisson_fd(64).ravel()  # row-major in y, same order as the mesh vertices
    l2 = float(np.sqrt(np.mean((rep.minimizer.values - ref) ** 2)))
    monotone = bool(np.all(np.diff(rep.energy_trace) <= 0))
    ok = rep.status == "converged" and rep.residual_norm < 1e-8 and l2 < 1e-3 and monotone and elapsed < 30
    record(7, "Poisson vs five-point FD on 64x64", ok,
           f"L2 diff={l2:.2e}, residual={rep.residual_norm:.2e}, monotone={monotone}, "
           f"{rep.iterations} iters, {elapsed:.2f}s")


def test_criterion_08_coercivity_sign():
    lam = dirichlet_eigenvalue_fd(64)
    mesh = make_rect_mesh(16, 16)
    nf = build_nfunction(builtin("linear", c=2.0))
    est = {}
    for k in (1, 3):
        r = Reaction(f=lambda x, y, s: 0.0 * s, A_infinity=k * np.pi ** 2)
        est[k] = coercivity_estimate(ProblemSpec(nf, mesh, r, options=SolverOptions(seed=0)),
                                     samples=4, descent_steps=200, ell=2.0)
    # Q changes sign where A_inf crosses the first Dirichlet eigenvalue of -Laplace
    consistent = (np.sign(est[1]) == np.sign(lam - np.pi ** 2)) and (np.sign(est[3]) == np.sign(lam - 3 * np.pi ** 2))
    ok = bool(consistent and est[1] > 0 > est[3] and abs(lam - 2 * np.pi ** 2) < 0.01 * 2 * np.pi ** 2)
    record(8, "coercivity estimate sign vs FD eigenvalue", ok,
           f"lambda1_FD={lam:.4f} (2pi^2={2 * np.pi ** 2:.4f}), Q(pi^2)={est[1]:.3f}, Q(3pi^2)={est[3]:.3f}")


def test_criterion_09_model_problem():
    nf = build_nfunction(builtin("model-gamma", gamma=2.0))
    reaction = Reaction(f=lambda x, y, s: 0.25 * s, F=lambda x, y, s: s ** 2 / 8)
    reps = {}
    for n in (32, 64):
        reps[n] = minimize(ProblemSpec(nf, make_rect_mesh(n, n), reaction, 0.1, SolverOptions(tol=1e-6)))
    e32, e64 = reps[32].energy_trace[-1], reps[64].energy_trace[-1]
    change = abs(e64 - e32) / abs(e64)
    ok = reps[32].status == "converged" and reps[32].residual_norm < 1e-6 and change < 0.02
    record(9, "model problem residual and mesh doubling", ok,
           f"residual={reps[32].residual_norm:.2e}, E32={e32:.8f}, E64={e64:.8f}, change={change:.3%}")


def test_criterion_10_growth_audit():
    parts = []
    ok = True
    pts = make_rect_mesh(8, 8).centroids
    for gamma, N in ((2.0, 3), (1.5, 3)):
        crit = power_critical(gamma, N)
        gs = crit.exponent
        f = lambda x, y, s, gs=gs: np.abs(s) ** (gs - 2) * s
        good = growth_audit(Reaction(f=f, a=1.0, b=0.0), phi_star=crit, points=pts, n_samples=10_000,
                            conditions=("weak",), seed=1)
        # the same bound read as |f| <= a |s|^(gamma_* - 1) + b
        direct = growth_audit(Reaction(f=f, a=1.0, b=0.0), phi_star=lambda s, gs=gs: np.abs(s) ** (gs - 1),
                              points=pts, n_samples=10_000, conditions=("distributional",), seed=1)
        bad = growth_audit(Reaction(f=f, a=0.5, b=0.0), phi_star=crit, points=pts, n_samples=10_000,
                           conditions=("weak",), seed=1)
        ok &= not good and not direct and len(bad) > 0
        parts.append(f"gamma*={gs:g}: a=1 -> {len(good)}+{len(direct)} violations, a=0.5 -> {len(bad)} flagged")
    record(10, "critical growth audit on 1e4 samples", ok, "; ".join(parts))


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    for k in sorted(RESULTS):
        print(RESULTS[k])
