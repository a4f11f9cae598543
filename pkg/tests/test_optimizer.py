import csv

import numpy as np
import pytest

from vqeconv import ansatz as az
from vqeconv.landscape import LandscapeProblem, U1EscapeProblem
from vqeconv.linalg import PAULI, gellmann_basis, seeded_random_hermitian
from vqeconv.optimizer import (
    GdConfig,
    InitDistribution,
    Outcome,
    Regularization,
    basin_statistics,
    gd_run,
    lipschitz_estimate,
    start_seeds,
)

SX, SY, SZ = PAULI["X"], PAULI["Y"], PAULI["Z"]
KET0 = np.array([1, 0], dtype=complex)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


@pytest.fixture(scope="module")
def d3_problem():
    ans = az.make_composite(az.generalized_euler(3), "sud_gate", gellmann_basis(3))
    return LandscapeProblem(seeded_random_hermitian(3, 7), np.eye(3)[0], ans)


@pytest.mark.parametrize("kwargs", [
    {"gamma": 0}, {"gamma": -1}, {"grad_tol": 0}, {"diverge_norm": 1.0},
    {"line_search": "armijo"}, {"record_stride": 0},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        GdConfig(**kwargs)


def test_regularization_validation():
    with pytest.raises(ValueError):
        Regularization(-1.0)
    with pytest.raises(ValueError):
        Regularization(0.1, alpha=3)
    r = Regularization(0.5, alpha=1)
    assert np.array_equal(r.grad(np.array([-2.0, 0.0, 3.0])), [-0.5, 0.0, 0.5])
    cfg = GdConfig(regularization={"lam": 0.1, "alpha": 2})
    assert isinstance(cfg.regularization, Regularization)


def test_composite_sigma_z_reaches_ground():
    ans = az.make_composite(az.euler_xyx(), "sud_gate", gellmann_basis(2))
    p = LandscapeProblem(SZ, KET0, ans)
    cfg = GdConfig(gamma=lipschitz_estimate(p)["gamma"], seed=0)
    theta0 = InitDistribution().sample(6, np.random.default_rng(start_seeds(0, 1)[0]))
    traj = gd_run(p, theta0, cfg)
    assert traj.outcome == Outcome.CONVERGED
    assert traj.final.energy == pytest.approx(-1, abs=1e-6)
    assert traj.final.grad_norm < cfg.grad_tol


def test_u1_escape_fixed_step_is_monotone():
    traj = gd_run(U1EscapeProblem(), [10.0], GdConfig(gamma=0.1, max_iter=5000, grad_tol=1e-15))
    th = traj.thetas[:, 0]
    assert np.all(np.diff(th) > 0)
    assert traj.outcome == Outcome.MAX_ITER


def test_u1_escape_wolfe_diverges():
    cfg = GdConfig(gamma=0.1, grad_tol=1e-15, line_search="wolfe")
    traj = gd_run(U1EscapeProblem(), [10.0], cfg)
    th = traj.thetas[:, 0]
    assert traj.outcome == Outcome.DIVERGED
    assert np.all(np.diff(th) > 0) and th[-1] >= 1e6
    assert np.linalg.norm(traj.final.theta) >= cfg.diverge_norm


def test_start_at_critical_point_converges_immediately():
    p = LandscapeProblem(SZ, KET0, az.euler_xyx())
    traj = gd_run(p, [0.0, 0.0, 0.0], GdConfig())
    assert traj.outcome == Outcome.CONVERGED and traj.iterations == 0
    assert len(traj.points) == 1


class _NanAfter:
    param_count = 1

    def __init__(self, k):
        self.calls, self.k = 0, k

    def cost_and_grad(self, theta):
        self.calls += 1
        g = np.nan if self.calls > self.k else 1.0
        return float(theta[0]), np.array([g])


def test_nan_gradient_aborts():
    traj = gd_run(_NanAfter(3), [0.0], GdConfig(gamma=0.1))
    assert traj.outcome == Outcome.ABORTED
    assert "non-finite" in traj.message and traj.iterations == 3


def test_parameter_length_checked():
    with pytest.raises(ValueError):
        gd_run(U1EscapeProblem(), [1.0, 2.0], GdConfig())


def test_record_stride_and_csv(tmp_path, d3_problem):
    cfg = GdConfig(gamma=0.1, record_stride=10, max_iter=95)
    traj = gd_run(d3_problem, np.full(16, 0.3), cfg)
    ks = [p.k for p in traj.points]
    assert ks[:3] == [0, 10, 20] and ks[-1] == traj.iterations
    path = tmp_path / "t.csv"
    traj.write_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["k"] + [f"theta_{j}" for j in range(1, 17)] + ["J", "grad_norm"]
    assert len(rows) == len(traj.points) + 1
    assert float(rows[-1][-2]) == traj.final.energy


def test_monotone_descent_with_safe_step(d3_problem):
    est = lipschitz_estimate(d3_problem, seed=0)
    cfg = GdConfig(gamma=est["gamma"], max_iter=2000)
    for seed in range(5):
        th0 = np.random.default_rng(seed).normal(size=16)
        e = gd_run(d3_problem, th0, cfg).energies
        assert np.all(np.diff(e) <= 1e-10)


def test_lipschitz_zero_hamiltonian():
    p = LandscapeProblem(np.zeros((2, 2)), KET0, az.euler_xyx())
    est = lipschitz_estimate(p, n_samples=20, gamma_max=0.5)
    assert est["lipschitz"] == 0 and est["gamma"] == 0.5
    with pytest.raises(ValueError):
        lipschitz_estimate(p, n_samples=1)


def test_lipschitz_scales_with_hamiltonian(d3_problem):
    h = d3_problem.hamiltonian
    doubled = LandscapeProblem(2 * h, d3_problem.initial_state, d3_problem.ansatz)
    a = lipschitz_estimate(d3_problem, n_samples=50, seed=3)
    b = lipschitz_estimate(doubled, n_samples=50, seed=3)
    assert b["raw_max_ratio"] == pytest.approx(2 * a["raw_max_ratio"], rel=1e-9)


def test_lipschitz_stable_across_seeds(d3_problem):
    vals = [lipschitz_estimate(d3_problem, seed=s)["lipschitz"] for s in range(4)]
    assert np.isfinite(vals).all()
    assert max(vals) / min(vals) < 1.2 / 0.8


def test_regularized_fixed_point(d3_problem):
    lam = 0.05
    cfg = GdConfig(gamma=0.1, grad_tol=1e-10, regularization=Regularization(lam, 2))
    traj = gd_run(d3_problem, np.random.default_rng(0).normal(size=16), cfg)
    assert traj.outcome == Outcome.CONVERGED
    th = traj.final.theta
    assert np.linalg.norm(d3_problem.grad(th) + 2 * lam * th) < 1e-10


def test_init_distributions():
    rng = np.random.default_rng(0)
    th = InitDistribution("uniform", low=-1, high=2, fixed={1: 5.0}).sample(4, rng)
    assert -1 <= th[0] < 2 and th[1] == 5.0
    with pytest.raises(ValueError):
        InitDistribution("cauchy").sample(3, rng)


def test_single_start_matches_single_run(d3_problem):
    cfg = GdConfig(gamma=0.15, seed=11)
    init = InitDistribution("gaussian", sigma=1.0)
    summary = basin_statistics(d3_problem, 1, init, cfg)
    th0 = init.sample(16, np.random.default_rng(start_seeds(11, 1)[0]))
    traj = gd_run(d3_problem, th0, cfg)
    start = summary["starts"][0]
    assert start["theta0"] == list(th0)
    assert start["final_theta"] == [float(x) for x in traj.final.theta]
    assert start["iterations"] == traj.iterations
    with pytest.raises(ValueError):
        basin_statistics(d3_problem, 0, init, cfg)


def test_basins_deterministic_across_workers(d3_problem):
    cfg = GdConfig(gamma=0.15)
    init = InitDistribution()
    a = basin_statistics(d3_problem, 8, init, cfg, master_seed=3, n_jobs=1)
    b = basin_statistics(d3_problem, 8, init, cfg, master_seed=3, n_jobs=2)
    strip = lambda s: [(x["start"], x["final_theta"], x["final_energy"], x["outcome"])
                       for x in s["starts"]]
    assert strip(a) == strip(b)
    assert a["counts"] == b["counts"]


def test_basins_composite_mostly_ground(d3_problem):
    gamma = lipschitz_estimate(d3_problem)["gamma"]
    s = basin_statistics(d3_problem, 30, InitDistribution(), GdConfig(gamma=gamma), master_seed=0)
    assert s["terminated"] > 0
    assert s["ground_fraction_of_terminated"] >= 0.95
    hist = s["energy_histogram"]
    assert sum(hist["counts"]) == 30 and len(hist["edges"]) == 21


def test_gimbal_slice_basins():
    p = LandscapeProblem(-SY, MINUS, az.euler_xyx())
    cfg = GdConfig(gamma=0.1)
    # theta_2 = pi/2 and theta_3 = 0: every start is gimbal-locked at energy 0
    locked = basin_statistics(p, 20, InitDistribution("uniform", fixed={1: np.pi / 2, 2: 0.0}),
                              cfg, master_seed=0)
    assert locked["counts"]["other_critical"] == 20
    assert all(s["critical_point"]["classification"] == "StrictSaddle" for s in locked["starts"])
    assert all(s["final_energy"] > -1 + 0.5 for s in locked["starts"])
    # only theta_2 pinned: dJ/dtheta_2 is generically nonzero there, so starts escape
    slice_only = basin_statistics(p, 40, InitDistribution("uniform", fixed={1: np.pi / 2}),
                                  cfg, master_seed=0)
    assert slice_only["counts"]["ground"] == 40
