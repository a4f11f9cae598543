"""Implementations behind the CLI verbs. Each writes its files and returns a report dict."""
from __future__ import annotations

import copy
import csv
import json
import os
import platform
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import SUdGate
from .config import ConfigError, build_problem
from .landscape import LandscapeProblem, U1EscapeProblem, classify_critical
from .optimizer import Outcome, basin_statistics, gd_run, lipschitz_estimate, start_seeds
from .repro import run_repro
from .surjectivity import (
    AgreementSummary,
    compare_predictor,
    engineered_resonance,
    heavy_tailed_samples,
    omega_rank,
)


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, payload):
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, default=_jsonable)
        fh.write("\n")
    os.replace(tmp, path)
    return str(path)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return str(path)


def prepare_out(out):
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def with_seed(cfg, seed):
    """Copy of ``cfg`` with the optimizer seed overridden (``None`` keeps it)."""
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg.optimizer["seed"] = int(seed)
    return cfg


def _provenance(cfg, started):
    return {
        "library_version": __version__,
        "numpy_version": np.__version__,
        "python": platform.python_version(),
        "master_seed": cfg.optimizer["seed"],
        "wall_time_s": time.perf_counter() - started,
        "config": cfg.to_dict(),
    }


def resolve_gamma(cfg, problem):
    gamma = cfg.optimizer["gamma"]
    if gamma != "auto":
        return float(gamma), None
    est = lipschitz_estimate(problem, seed=cfg.optimizer["seed"])
    return est["gamma"], est


def sample_points(cfg, ansatz, n, rng):
    """Parameter samples following ``cfg.sampling``."""
    smp = cfg.sampling
    m = ansatz.param_count
    kind = smp["distribution"]
    if kind == "heavy":
        pts = heavy_tailed_samples(m, n, rng)
    elif kind == "gaussian":
        pts = rng.normal(scale=smp["sigma"], size=(n, m))
    elif kind == "uniform":
        pts = rng.uniform(-np.pi, np.pi, size=(n, m))
    else:
        g = rng.normal(size=(n, m))
        pts = smp["radius"] * g / np.linalg.norm(g, axis=1, keepdims=True)
    n_res = int(round(smp["resonant_fraction"] * n))
    if n_res and isinstance(ansatz, SUdGate):
        basis = _sudgate_basis(ansatz)
        for i in range(n_res):
            pts[i] = engineered_resonance(basis, rng)
    for idx, val in smp["fixed"].items():
        pts[:, int(idx)] = val
    return pts


def _sudgate_basis(ansatz):
    from .linalg import LieBasis

    gens = ansatz.generators
    b = LieBasis(ansatz.dim, "su", gens)
    gram = np.einsum("kij,lij->kl", gens.conj(), gens).real
    if len(gens) != ansatz.dim**2 - 1 or np.abs(gram - np.eye(len(gens))).max() > 1e-12:
        raise ConfigError("ansatz.generators",
                          "singular-point predictor needs an orthonormal su(d) basis")
    return b


def cmd_check_surjectivity(cfg, n_samples, out, seed=None, figures=True):
    started = time.perf_counter()
    cfg = with_seed(cfg, seed)
    if cfg.kind != "vqe":
        raise ConfigError("kind", "check-surjectivity needs a vqe problem")
    problem = build_problem(cfg)
    ansatz = problem.ansatz
    rng = np.random.default_rng(cfg.optimizer["seed"])
    points = sample_points(cfg, ansatz, n_samples, rng)
    predictor = isinstance(ansatz, SUdGate)
    basis = _sudgate_basis(ansatz) if predictor else None
    agreement = AgreementSummary() if predictor else None
    rows, ranks, ratios, witnesses = [], [], [], []
    required = None
    for i, theta in enumerate(points):
        if predictor:
            check, rep, _ = compare_predictor(theta, basis, agreement)
        else:
            rep = omega_rank(ansatz.omegas(theta), ansatz.ambient, point=theta)
            check = None
        required = rep.required_rank
        ratio = float(rep.singular_values[-1] / rep.singular_values[0]) if len(
            rep.singular_values) >= required else 0.0
        ranks.append(rep.rank)
        ratios.append(ratio)
        row = [i, *theta, rep.rank, ratio]
        if check is not None:
            missing = 0 if check.witness is None else len(check.witness.missing_directions)
            row += [int(check.singular), int(check.inconclusive), check.min_distance, missing]
        rows.append(row)
        if rep.rank < required and len(witnesses) < 50:
            w = rep.to_dict()
            if check is not None and check.witness is not None:
                w["predictor"] = check.witness.to_dict()
            witnesses.append(w)
    out = prepare_out(out)
    header = ["i"] + [f"theta_{j + 1}" for j in range(ansatz.param_count)] + ["rank", "sv_ratio"]
    if predictor:
        header += ["predicted_singular", "inconclusive", "resonance_distance",
                   "missing_directions"]
    files = {"samples": write_csv(out / "surjectivity.csv", header, rows)}
    vals, counts = np.unique(ranks, return_counts=True)
    report = {
        "command": "check-surjectivity",
        "ansatz": repr(ansatz),
        "samples": n_samples,
        "required_rank": required,
        "min_rank": int(min(ranks)),
        "rank_histogram": {str(int(v)): int(c) for v, c in zip(vals, counts)},
        "singular_samples": int(sum(r < required for r in ranks)),
        "witnesses": witnesses,
        "predictor_agreement": agreement.to_dict() if agreement else None,
        "passed": agreement.perfect if agreement else True,
    }
    if figures:
        from .plotting import rank_figure

        files["figure"] = rank_figure(ranks, ratios, required, out / "surjectivity.png")
    report["files"] = files
    report.update(_provenance(cfg, started))
    write_json(out / "surjectivity.json", report)
    return report


@dataclass
class RunReport:
    outcome: str
    iterations: int
    theta0: list
    gamma: float
    terminal: dict
    lipschitz: dict | None
    provenance: dict
    files: dict

    def to_dict(self):
        return {"command": "run", "outcome": self.outcome, "iterations": self.iterations,
                "theta0": self.theta0, "gamma_resolved": self.gamma,
                "terminal": self.terminal, "lipschitz": self.lipschitz,
                "files": self.files, **self.provenance}


def initial_point(cfg, problem):
    if cfg.theta0 is not None:
        if len(cfg.theta0) != problem.param_count:
            raise ConfigError("theta0", f"expected {problem.param_count} entries, got "
                                        f"{len(cfg.theta0)}")
        return np.array(cfg.theta0, dtype=float)
    # same stream as start 0 of a basin sweep with this seed
    rng = np.random.default_rng(start_seeds(cfg.optimizer["seed"], 1)[0])
    return cfg.init_distribution().sample(problem.param_count, rng)


def cmd_run(cfg, out, seed=None, figures=True):
    started = time.perf_counter()
    cfg = with_seed(cfg, seed)
    problem = build_problem(cfg)
    gamma, est = resolve_gamma(cfg, problem)
    theta0 = initial_point(cfg, problem)
    traj = gd_run(problem, theta0, cfg.gd_config(gamma=gamma))
    final = traj.final
    if isinstance(problem, LandscapeProblem) and traj.outcome != Outcome.ABORTED:
        terminal = classify_critical(problem, final.theta, grad_tol=cfg.optimizer["grad_tol"])
        terminal = terminal.to_dict()
        ground = terminal["ground_energy"]
    else:
        terminal = {"theta": [float(x) for x in final.theta], "energy": final.energy,
                    "gradient_norm": final.grad_norm}
        ground = 0.0 if isinstance(problem, U1EscapeProblem) else None
    out = prepare_out(out)
    files = {"trajectory": str(out / "trajectory.csv")}
    traj.write_csv(out / "trajectory.csv")
    if figures:
        from .plotting import trajectory_figure

        files["figure"] = trajectory_figure(traj, out / "trajectory.png", ground)
    report = RunReport(traj.outcome.value, traj.iterations, [float(x) for x in theta0],
                       gamma, terminal, est, _provenance(cfg, started), files)
    payload = report.to_dict()
    write_json(out / "report.json", payload)
    return payload


def cmd_basins(cfg, n_starts, out, seed=None, n_jobs=1, figures=True):
    started = time.perf_counter()
    cfg = with_seed(cfg, seed)
    if cfg.kind != "vqe":
        raise ConfigError("kind", "basins needs a vqe problem with a Hamiltonian spectrum")
    problem = build_problem(cfg)
    gamma, est = resolve_gamma(cfg, problem)
    summary = basin_statistics(problem, n_starts, cfg.init_distribution(),
                               cfg.gd_config(gamma=gamma), master_seed=cfg.optimizer["seed"],
                               n_jobs=n_jobs)
    out = prepare_out(out)
    m = problem.param_count
    header = ["start", "seed_entropy", "spawn_key", "outcome", "iterations", "final_energy",
              "energy_gap", "classification"] + [f"theta0_{j + 1}" for j in range(m)]
    rows = []
    for s in summary["starts"]:
        s["seed"] = {"entropy": summary["master_seed"], "spawn_key": [s["start"]]}
        cls = s.get("critical_point", {}).get("classification", "")
        rows.append([s["start"], summary["master_seed"], s["start"], s["outcome"],
                     s["iterations"], s["final_energy"],
                     s["final_energy"] - summary["ground_energy"], cls, *s["theta0"]])
    files = {"starts": write_csv(out / "basins.csv", header, rows)}
    if figures:
        from .plotting import basins_figure

        files["figure"] = basins_figure(summary, out / "basins.png")
    payload = {"command": "basins", "gamma_resolved": gamma, "lipschitz": est,
               "n_jobs": n_jobs, **summary, "files": files, **_provenance(cfg, started)}
    write_json(out / "basins.json", payload)
    return payload


def cmd_repro(tag, out, seed=0, figures=True):
    started = time.perf_counter()
    result = run_repro(tag, seed=seed)
    out = prepare_out(out)
    stem = tag.replace("-", "_")
    files = {"data": write_csv(out / f"{stem}.csv", result.header, result.rows)}
    if figures:
        from .plotting import repro_figure

        files["figure"] = repro_figure(result, out / f"{stem}.png")
    payload = {"command": "repro", **result.to_dict(), "seed": seed, "files": files,
               "library_version": __version__, "wall_time_s": time.perf_counter() - started}
    write_json(out / f"{stem}.json", payload)
    return payload


