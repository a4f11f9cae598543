"""The ten acceptance criteria, each at its stated tolerance.

Every test records one ``[PASS]``/``[FAIL]`` line, printed in the terminal summary.
"""
import time

import numpy as np
import pytest

from vqeconv import ansatz as az
from vqeconv.landscape import LandscapeProblem
from vqeconv.linalg import gellmann_basis, seeded_random_hermitian, seeded_random_state
from vqeconv.linalg import unitary_algebra_basis
from vqeconv.optimizer import GdConfig, InitDistribution, basin_statistics, lipschitz_estimate
from vqeconv.repro import gimbal_lock, hessian_table, overparam_witness, poe_determinant, u1_escape
from vqeconv.surjectivity import (
    AgreementSummary,
    ansatz_rank,
    cayley_rank_check,
    compare_predictor,
    diagonal_resonance_patterns,
    engineered_resonance,
    heavy_tailed_samples,
    omega_uniform_bound,
    resonant_theta,
)

from conftest import ACCEPTANCE_LINES
from variants import ALL, variants


def record(n, title, passed, detail, started):
    line = f"[{'PASS' if passed else 'FAIL'}] {n:>2}. {title}: {detail} ({time.perf_counter() - started:.1f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def fd_grad(problem, theta, h=1e-5):
    g = np.empty(len(theta))
    for j in range(len(theta)):
        e = np.zeros(len(theta))
        e[j] = h
        g[j] = (problem.cost(theta + e) - problem.cost(theta - e)) / (2 * h)
    return g


def test_01_gradient_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, count = 0.0, 0
    for d, name in ALL:
        ans = variants(d)[name]
        for _ in range(50):
            seed = int(rng.integers(2**31))
            p = LandscapeProblem(seeded_random_hermitian(d, seed),
                                 seeded_random_state(d, seed + 1), ans)
            th = rng.normal(scale=2.0, size=ans.param_count)
            g, ref = p.grad(th), fd_grad(p, th, 1e-5)
            worst = max(worst, np.linalg.norm(g - ref) / np.linalg.norm(ref))
            count += 1
    variants_seen = sorted({n for _, n in ALL})
    record(1, "gradient oracle", worst <= 1e-6,
           f"{count} instances over {len(variants_seen)} variants, max relative error {worst:.2e} <= 1e-6",
           t0)


def _repro_detail(res):
    return "; ".join(f"{c.name} = {c.value}" for c in res.checks if c.value is not None)


def test_02_gimbal_lock():
    t0 = time.perf_counter()
    res = gimbal_lock(seed=0, n=20)
    record(2, "gimbal lock", res.passed, _repro_detail(res), t0)


def test_03_poe_determinant():
    t0 = time.perf_counter()
    res = poe_determinant(seed=0, n=100)
    record(3, "SU(2) PoE determinant = -cos(2 phi_2)", res.passed, _repro_detail(res), t0)


def _predictor_sample(b, rng, i):
    k = i % 20
    if k < 5:
        return engineered_resonance(b, rng)
    if k < 7:
        return engineered_resonance(b, rng, jitter=float(rng.choice([1e-12, 1e-9, 1e-7, 1e-5, 1e-2])))
    if k == 7:
        pats = diagonal_resonance_patterns(b.dim)
        return resonant_theta(b, pats[i % len(pats)], rng=rng if i % 2 else None)
    if k < 14:
        return rng.normal(scale=3.0, size=len(b))
    return heavy_tailed_samples(len(b), 1, rng)[0]


def test_04_predictor_vs_rank_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    details, ok = [], True
    for d in (2, 3):
        b = gellmann_basis(d)
        s = AgreementSummary()
        for i in range(10_000):
            compare_predictor(_predictor_sample(b, rng, i), b, s)
        ok &= s.perfect and s.predicted_singular > 0
        details.append(f"d={d}: {s.agree} agree, {s.disagree} disagree, {s.direction_mismatch} "
                       f"direction-count mismatches, {s.inconclusive} inconclusive, "
                       f"{s.predicted_singular} singular")
    record(4, "singular-point predictor vs rank oracle", ok, "; ".join(details), t0)


def test_05_local_surjectivity_of_constructions():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    details, ok = [], True
    for d, n in ((2, 10_000), (3, 10_000), (4, 1_000)):
        comp = az.make_composite(az.generalized_euler(d), "sud_gate", gellmann_basis(d))
        pts = heavy_tailed_samples(comp.param_count, n, rng, tail_norm=1e3)
        low = min(ansatz_rank(comp, th).rank for th in pts)
        ok &= low == d * d - 1
        details.append(f"composite d={d} min rank {low}/{d * d - 1} over {n}")
    for d in (2, 3, 4):
        b = unitary_algebra_basis(d)
        pts = heavy_tailed_samples(d * d, 1_000, rng, tail_norm=1e3)
        low = min(cayley_rank_check(b, th).rank for th in pts)
        ok &= low == d * d
        details.append(f"Cayley d={d} min rank {low}/{d * d} over 1000")
    record(5, "local surjectivity of constructions", ok, "; ".join(details), t0)


def test_06_hessian_sign_table():
    t0 = time.perf_counter()
    res = hessian_table((0.0, 1.0, 2.0))
    detail = "; ".join(f"{c.name}{'' if c.value is None else f' = {c.value:.1e}'}"
                       for c in res.checks)
    record(6, "Hessian sign table for diag(0,1,2)", res.passed, detail, t0)


def test_07_convergence_statistics():
    t0 = time.perf_counter()
    ans = az.make_composite(az.generalized_euler(3), "sud_gate", gellmann_basis(3))
    p = LandscapeProblem(seeded_random_hermitian(3, 7), np.eye(3)[0], ans)
    est = lipschitz_estimate(p, seed=0)
    cfg = GdConfig(gamma=est["gamma"], seed=0)
    s = basin_statistics(p, 200, InitDistribution("gaussian", sigma=1.0), cfg, master_seed=0)
    frac = s["ground_fraction_of_terminated"]
    exc = [(e["start"], e["critical_point"]["classification"], e["final_energy"])
           for e in s["exceptions"]]
    ok = frac is not None and frac >= 0.95
    record(7, "convergence statistics", ok,
           f"gamma = 0.99/L = {est['gamma']:.4f}, {s['terminated']}/200 terminated, ground "
           f"fraction {frac:.4f} >= 0.95, counts {s['counts']}, exceptions {exc}", t0)


def test_08_escape_to_infinity():
    t0 = time.perf_counter()
    res = u1_escape(theta0=10.0, gamma=0.1)
    record(8, "escape to infinity", res.passed,
           f"{_repro_detail(res)}; {res.extra['iterations']} iterations (line_search=wolfe)", t0)


def test_09_overparameterization_witness():
    t0 = time.perf_counter()
    res = overparam_witness(seed=0, n=20)
    record(9, "overparameterization witness", res.passed, _repro_detail(res), t0)


def test_10_bound_certificates():
    t0 = time.perf_counter()
    ok, details = True, []
    poes = [az.ProductOfExponentials(gellmann_basis(3)),
            az.ProductOfExponentials(az.pauli_generators(n_qubits=2)), az.generalized_euler(4)]
    for ans in poes:
        for norm in ("operator", "frobenius"):
            out = omega_uniform_bound(ans, n_samples=1000, norm=norm, seed=1)
            ok &= out["sampled_max"] <= out["analytic_bound"] + 1e-9
            details.append(f"PoE {ans.name} d={ans.dim} {norm}: {out['sampled_max']:.6f} <= "
                           f"{out['analytic_bound']:.6f}")
    for d in (2, 3, 4):
        out = omega_uniform_bound(az.Cayley(dim=d), n_samples=1000, norm="operator", seed=2)
        ok &= out["sampled_max"] <= out["analytic_bound"] + 1e-9
        details.append(f"Cayley d={d}: {out['sampled_max']:.6f} <= {out['analytic_bound']:.6f}")
    record(10, "bound certificates", ok, "; ".join(details), t0)
