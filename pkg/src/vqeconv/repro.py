"""Self-judging reproductions: each returns a data table plus pass/fail checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ansatz import Product, SUdGate, euler_xyx, pauli_generators, ProductOfExponentials
from .landscape import LandscapeProblem, U1EscapeProblem, gellmann_frame_hessian
from .linalg import PAULI, gellmann_basis, seeded_random_hermitian
from .optimizer import GdConfig, gd_run
from .surjectivity import (
    ansatz_rank,
    overparam_singular_witness,
    poe_su2_determinant,
    resonant_theta,
    sudgate_is_singular,
)

MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


@dataclass
class Check:
    name: str
    passed: bool
    value: float | int | None = None
    threshold: float | int | None = None

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "value": self.value,
                "threshold": self.threshold}


@dataclass
class ReproResult:
    tag: str
    header: list
    rows: list
    checks: list
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {"tag": self.tag, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "rows": len(self.rows),
                **self.extra}


def gimbal_lock(seed=0, n=20):
    """Euler X-Y-X with psi0 = |->: on the slice theta2 = pi/2, dJ/dtheta1 = dJ/dtheta3 = 0."""
    rng = np.random.default_rng(seed)
    ans = euler_xyx()
    rows = []
    worst = 0.0
    for i in range(n):
        h = seeded_random_hermitian(2, int(rng.integers(2**31)))
        t1, t3 = rng.uniform(-np.pi, np.pi, size=2)
        g = LandscapeProblem(h, MINUS, ans).grad([t1, np.pi / 2, t3])
        worst = max(worst, abs(g[0]), abs(g[2]))
        rows.append([i, t1, t3, g[0], g[1], g[2]])
    oms = ans.omegas([0.0, np.pi / 2, 0.0])
    expected = np.array([-1j * PAULI["X"], -1j * PAULI["Y"], 1j * PAULI["X"]])
    om_err = float(np.abs(oms - expected).max())
    rank = ansatz_rank(ans, [0.0, np.pi / 2, 0.0]).rank
    checks = [
        Check("max |dJ/dtheta_1|, |dJ/dtheta_3| on slice", worst < 1e-10, worst, 1e-10),
        Check("Omega(0, pi/2, 0) = {-i sx, -i sy, i sx}", om_err < 1e-12, om_err, 1e-12),
        Check("omega rank at (0, pi/2, 0)", rank == 2, rank, 2),
    ]
    return ReproResult("gimbal-lock", ["i", "theta_1", "theta_3", "dJ_1", "dJ_2", "dJ_3"],
                       rows, checks)


def u1_escape(theta0=10.0, gamma=0.1, max_iter=100_000):
    cfg = GdConfig(gamma=gamma, max_iter=max_iter, grad_tol=1e-15, line_search="wolfe")
    traj = gd_run(U1EscapeProblem(), [theta0], cfg)
    th = traj.thetas[:, 0]
    rows = [[p.k, p.theta[0], p.energy, p.grad_norm] for p in traj.points]
    increasing = bool(np.all(np.diff(th) > 0))
    checks = [
        Check("outcome is Diverged", traj.outcome.value == "Diverged", traj.outcome.value,
              "Diverged"),
        Check("iterates strictly increasing", increasing),
        Check("final theta exceeds 1e6", th[-1] > 1e6, float(th[-1]), 1e6),
    ]
    return ReproResult("u1-escape", ["k", "theta", "J", "grad_norm"], rows, checks,
                       {"iterations": traj.iterations, "line_search": "wolfe"})


def poe_determinant(seed=0, n=100):
    """exp(-i sx p3) exp(-i sy p2) exp(-i sz p1): coefficient determinant vs -cos(2 p2)."""
    ans = ProductOfExponentials(pauli_generators(labels=["Z", "Y", "X"]), name="poe_zyx")
    rng = np.random.default_rng(seed)
    rows = []
    for phi in rng.uniform(-np.pi, np.pi, size=(n, 3)):
        det = poe_su2_determinant(ans, phi)
        ref = -np.cos(2 * phi[1])
        rows.append([*phi, det, ref, abs(det - ref)])
    worst = max(r[-1] for r in rows)
    checks = [Check("max |det + cos(2 phi_2)|", worst < 1e-9, worst, 1e-9)]
    return ReproResult("poe-determinant",
                       ["phi_1", "phi_2", "phi_3", "det", "minus_cos_2phi2", "abs_diff"],
                       rows, checks)


def overparam_witness(seed=0, n=20):
    """exp(X(theta)) exp(X(phi)) loses rank at (phi_s, phi_s) where X(phi_s) = i pi sz."""
    basis = gellmann_basis(2)
    phi_s = resonant_theta(basis, [np.pi, -np.pi])
    singular = overparam_singular_witness(basis, phi_s)
    rows = [["singular", *phi_s, singular.rank, singular.required_rank,
             float(singular.singular_values[-1] / singular.singular_values[0])]]
    doubled = Product(SUdGate(basis), SUdGate(basis))
    rng = np.random.default_rng(seed)
    full = 0
    while len(rows) < n + 1:
        phi = rng.normal(size=3)
        if sudgate_is_singular(phi, basis).singular:
            continue
        rep = ansatz_rank(doubled, np.concatenate([phi, phi]))
        full += rep.rank == rep.required_rank
        rows.append(["random", *phi, rep.rank, rep.required_rank,
                     float(rep.singular_values[-1] / rep.singular_values[0])])
    checks = [
        Check("rank deficient at (phi_s, phi_s)", singular.rank < singular.required_rank,
              singular.rank, singular.required_rank),
        Check("full rank at random non-singular (phi, phi)", full == n, full, n),
    ]
    return ReproResult("overparam-witness",
                       ["point", "phi_1", "phi_2", "phi_3", "rank", "required", "sv_ratio"],
                       rows, checks)


def hessian_table(energies=(0.0, 1.0, 2.0)):
    """Gell-Mann-frame curvatures at every eigenstate of a diagonal Hamiltonian."""
    e = np.asarray(energies, dtype=float)
    if np.any(np.diff(e) <= 0):
        raise ValueError("energies must be strictly increasing")
    h = np.diag(e).astype(complex)
    d = len(e)
    rows = []
    worst = 0.0
    sign_ok = []
    for m in range(d):
        fh = gellmann_frame_hessian(h, np.eye(d)[m])
        worst = max(worst, fh.max_discrepancy)
        for (kind, k, l), tv, cf in zip(fh.labels, fh.taylor, fh.closed_form):
            rows.append([m + 1, kind, k, l, tv, cf, abs(tv - cf), int(np.sign(np.round(tv, 12)))])
        vals = fh.taylor
        if m == 0:
            sign_ok.append(("ground state: all entries >= 0", bool(np.all(vals >= -1e-12))))
        elif m == d - 1:
            sign_ok.append(("top state: all entries <= 0", bool(np.all(vals <= 1e-12))))
        else:
            sign_ok.append((f"eigenstate {m + 1}: some entry < 0", bool(np.any(vals < -1e-12))))
    checks = [Check("max |trace formula - closed form|", worst < 1e-10, worst, 1e-10)]
    checks += [Check(name, ok) for name, ok in sign_ok]
    return ReproResult("hessian-table",
                       ["eigenstate", "kind", "k", "l", "trace_formula", "closed_form",
                        "abs_diff", "sign"], rows, checks)


REPRO_TAGS = {
    "gimbal-lock": gimbal_lock,
    "u1-escape": u1_escape,
    "poe-determinant": poe_determinant,
    "overparam-witness": overparam_witness,
    "hessian-table": hessian_table,
}


def run_repro(tag, seed=0):
    if tag not in REPRO_TAGS:
        raise KeyError(f"unknown reproduction {tag!r}; one of {sorted(REPRO_TAGS)}")
    fn = REPRO_TAGS[tag]
    if tag in ("u1-escape", "hessian-table"):
        return fn()
    return fn(seed=seed)
