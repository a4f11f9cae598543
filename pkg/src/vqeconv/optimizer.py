"""Gradient descent ``theta_{k+1} = theta_k - gamma grad J(theta_k)`` and basin sweeps."""
from __future__ import annotations

import csv
import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .landscape import Classification, LandscapeProblem, classify_critical


class Outcome(str, enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    MAX_ITER = "MaxIterReached"
    ABORTED = "Aborted"


@dataclass
class Regularization:
    lam: float
    alpha: int = 2

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("regularization lambda must be >= 0")
        if self.alpha not in (1, 2):
            raise ValueError("regularization order alpha must be 1 or 2")

    def value(self, theta):
        return self.lam * float(np.sum(np.abs(theta) ** self.alpha))

    def grad(self, theta):
        # subgradient of |t| at 0 taken as 0
        return self.lam * self.alpha * np.sign(theta) * np.abs(theta) ** (self.alpha - 1)


@dataclass
class GdConfig:
    gamma: float = 0.1
    max_iter: int = 100_000
    grad_tol: float = 1e-8
    diverge_norm: float = 1e6
    seed: int = 0
    regularization: Regularization | None = None
    line_search: str = "fixed"  # or "wolfe"; gamma is then the initial trial step
    record_stride: int = 1
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")
        if not self.diverge_norm > 1:
            raise ValueError("diverge_norm must be > 1")
        if self.line_search not in ("fixed", "wolfe"):
            raise ValueError(f"unknown line search {self.line_search!r}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if isinstance(self.regularization, dict):
            self.regularization = Regularization(**self.regularization)

    def to_dict(self):
        out = asdict(self)
        return out


@dataclass
class TrajectoryPoint:
    k: int
    theta: np.ndarray
    energy: float
    grad_norm: float


@dataclass
class Trajectory:
    points: list = field(default_factory=list)
    outcome: Outcome = Outcome.MAX_ITER
    iterations: int = 0
    message: str = ""

    @property
    def final(self):
        return self.points[-1]

    @property
    def thetas(self):
        return np.array([p.theta for p in self.points])

    @property
    def energies(self):
        return np.array([p.energy for p in self.points])

    def summary(self):
        f = self.final
        return {
            "outcome": self.outcome.value,
            "iterations": self.iterations,
            "final_energy": f.energy,
            "final_grad_norm": f.grad_norm,
            "final_theta_norm": float(np.linalg.norm(f.theta)),
            "final_theta": [float(x) for x in f.theta],
            "message": self.message,
        }

    def write_csv(self, path):
        m = len(self.points[0].theta)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k"] + [f"theta_{j + 1}" for j in range(m)] + ["J", "grad_norm"])
            for p in self.points:
                w.writerow([p.k] + [repr(float(x)) for x in p.theta]
                           + [repr(p.energy), repr(p.grad_norm)])


def _objective(problem, reg):
    def f(theta):
        e, g = problem.cost_and_grad(theta)
        if reg is not None:
            e += reg.value(theta)
            g = g + reg.grad(theta)
        return e, g

    return f


def _wolfe_step(f, theta, e, g, alpha, c1, c2, max_trials=200):
    """Weak-Wolfe bisection/expansion along ``-g`` starting from trial step ``alpha``."""
    p = -g
    slope = float(g @ p)
    lo, hi = 0.0, np.inf
    for _ in range(max_trials):
        trial = theta + alpha * p
        e_new, g_new = f(trial)
        if not np.isfinite(e_new) or e_new > e + c1 * alpha * slope:
            hi = alpha
        elif float(g_new @ p) < c2 * slope:
            lo = alpha
        else:
            return alpha, trial, e_new, g_new
        alpha = (lo + hi) / 2 if np.isfinite(hi) else 2 * alpha
    return alpha, trial, e_new, g_new


def gd_run(problem, theta0, config):
    """Run gradient descent until ``grad_tol``, ``diverge_norm`` or ``max_iter``."""
    theta = np.array(theta0, dtype=float).reshape(-1)
    if theta.size != problem.param_count:
        raise ValueError(f"theta0 has {theta.size} entries, expected {problem.param_count}")
    f = _objective(problem, config.regularization)
    traj = Trajectory()
    e, g = f(theta)
    alpha = config.gamma
    k = 0
    while True:
        gnorm = float(np.linalg.norm(g))
        if not (np.isfinite(gnorm) and np.isfinite(e)):
            traj.points.append(TrajectoryPoint(k, theta.copy(), e, gnorm))
            traj.outcome = Outcome.ABORTED
            traj.message = f"non-finite energy or gradient at iteration {k}"
            break
        done = None
        if gnorm < config.grad_tol:
            done = Outcome.CONVERGED
        elif np.linalg.norm(theta) >= config.diverge_norm:
            done = Outcome.DIVERGED
        elif k >= config.max_iter:
            done = Outcome.MAX_ITER
        if done is not None or k % config.record_stride == 0:
            traj.points.append(TrajectoryPoint(k, theta.copy(), e, gnorm))
        if done is not None:
            traj.outcome = done
            break
        if config.line_search == "wolfe":
            alpha, theta, e, g = _wolfe_step(
                f, theta, e, g, alpha, config.wolfe_c1, config.wolfe_c2
            )
        else:
            theta = theta - config.gamma * g
            e, g = f(theta)
        k += 1
    traj.iterations = k
    return traj


def _curvature(problem, theta, u, gap, steps):
    """Largest ``||grad(theta + gap u) - grad(theta)|| / gap`` along power-iterated ``u``."""
    g0 = problem.grad(theta)
    best = 0.0
    for _ in range(steps):
        diff = problem.grad(theta + gap * u) - g0
        norm = float(np.linalg.norm(diff))
        best = max(best, norm / gap)
        if norm == 0:
            break
        u = diff / norm
    return best, u


def lipschitz_estimate(problem, n_samples=200, seed=0, sigma=2.0, gap=1e-3,
                       safety=2.0, gamma_max=1.0, power_steps=4, refine=5, climb_steps=30):
    """Empirical Lipschitz constant of ``grad J`` and the step ``0.99 / L``.

    Every sample contributes an independent pair and a close pair (separation ``gap``)
    whose direction is power-iterated towards the top Hessian eigenvector. The
    ``refine`` most curved samples are then hill-climbed. The largest ratio found is
    inflated by ``safety``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    rng = np.random.default_rng(seed)
    m = problem.param_count
    best = 0.0
    local = []
    for _ in range(n_samples):
        a = rng.normal(scale=sigma, size=m)
        b = rng.normal(scale=sigma, size=m)
        far = np.linalg.norm(problem.grad(a) - problem.grad(b)) / np.linalg.norm(a - b)
        u = rng.normal(size=m)
        c, u = _curvature(problem, a, u / np.linalg.norm(u), gap, power_steps)
        local.append((c, a, u))
        best = max(best, float(far), c)
    local.sort(key=lambda t: -t[0])
    for c, a, u in local[:refine]:
        step = 0.3
        for _ in range(climb_steps):
            trial = a + step * rng.normal(size=m)
            ct, ut = _curvature(problem, trial, u, gap, power_steps)
            if ct > c:
                c, a, u = ct, trial, ut
            else:
                step *= 0.85
        best = max(best, c)
    lhat = safety * best
    gamma = min(gamma_max, 0.99 / lhat) if lhat > 0 else gamma_max
    return {"lipschitz": lhat, "raw_max_ratio": best, "gamma": gamma, "samples": n_samples}


@dataclass
class InitDistribution:
    kind: str = "gaussian"  # or "uniform"
    sigma: float = 1.0
    low: float = -np.pi
    high: float = np.pi
    fixed: dict = field(default_factory=dict)  # parameter index -> pinned value

    def sample(self, m, rng):
        if self.kind == "gaussian":
            theta = rng.normal(scale=self.sigma, size=m)
        elif self.kind == "uniform":
            theta = rng.uniform(self.low, self.high, size=m)
        else:
            raise ValueError(f"unknown init distribution {self.kind!r}")
        for idx, val in self.fixed.items():
            theta[int(idx)] = val
        return theta


def start_seeds(master_seed, n_starts):
    return np.random.SeedSequence(master_seed).spawn(n_starts)


def _run_start(args):
    problem, idx, seed_seq, init, config, classify_tol = args
    rng = np.random.default_rng(seed_seq)
    theta0 = init.sample(problem.param_count, rng)
    traj = gd_run(problem, theta0, config)
    report = None
    if isinstance(problem, LandscapeProblem) and traj.outcome != Outcome.ABORTED:
        report = classify_critical(problem, traj.final.theta, grad_tol=config.grad_tol,
                                   tol=classify_tol)
    return idx, theta0, traj.summary(), report


def basin_statistics(problem, n_starts, init, config, master_seed=None, n_jobs=1,
                     classify_tol=1e-6, energy_tol=1e-6, bins=20):
    """Seeded multi-start gradient descent with per-start terminal classification.

    Results are keyed by start index, so the summary does not depend on ``n_jobs``.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    master = config.seed if master_seed is None else master_seed
    seeds = start_seeds(master, n_starts)
    jobs = [(problem, i, s, init, config, classify_tol) for i, s in enumerate(seeds)]
    if n_jobs == 1:
        results = [_run_start(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_start, jobs))
    results.sort(key=lambda r: r[0])
    e_min = float(problem.spectrum.values[0])
    counts = {"ground": 0, "excited_eigenstate": 0, "other_critical": 0,
              "not_critical": 0, "diverged": 0, "max_iter": 0, "aborted": 0}
    starts = []
    for idx, theta0, summary, report in results:
        outcome = summary["outcome"]
        entry = {"start": idx, "theta0": [float(x) for x in theta0], **summary}
        if report is not None:
            entry["critical_point"] = report.to_dict()
        if outcome == Outcome.DIVERGED.value:
            counts["diverged"] += 1
        elif outcome == Outcome.MAX_ITER.value:
            counts["max_iter"] += 1
        elif outcome == Outcome.ABORTED.value:
            counts["aborted"] += 1
        else:
            cls = report.classification
            if cls == Classification.GROUND_STATE:
                counts["ground"] += 1
            elif cls == Classification.MAX_EIGENSTATE or _is_eigenstate(report, classify_tol):
                counts["excited_eigenstate"] += 1
            elif cls == Classification.NOT_CRITICAL:
                counts["not_critical"] += 1
            else:
                counts["other_critical"] += 1
        starts.append(entry)
    terminated = [s for s in starts if s["outcome"] == Outcome.CONVERGED.value]
    near = sum(1 for s in terminated if s["final_energy"] - e_min <= energy_tol)
    energies = np.array([s["final_energy"] for s in starts])
    lo, hi = float(energies.min()), float(energies.max())
    if hi - lo < 1e-9 * max(1.0, abs(lo)):
        # all starts at one level (typical); a degenerate range breaks np.histogram
        lo, hi = lo - 1e-6, hi + 1e-6
    hist, edges = np.histogram(energies, bins=bins, range=(lo, hi))
    return {
        "n_starts": n_starts,
        "master_seed": int(master),
        "ground_energy": e_min,
        "counts": counts,
        "terminated": len(terminated),
        "ground_fraction_of_terminated": near / len(terminated) if terminated else None,
        "energy_histogram": {"counts": hist.tolist(), "edges": edges.tolist()},
        "exceptions": [s for s in terminated if s["final_energy"] - e_min > energy_tol],
        "starts": starts,
    }


def _is_eigenstate(report, tol):
    return float(np.max(report.eigenstate_overlaps)) >= 1 - tol
