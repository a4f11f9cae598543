"""VQE cost, gradients, Hessians and classification of critical points.

The Lie-algebra elements ``Omega_j = U^dagger dU/dtheta_j`` live in the body frame,
while the Riemannian gradient ``[H, |psi><psi|]`` lives in the spatial frame. The
Euclidean gradient pairs them after transporting ``Omega_j`` to ``U Omega_j U^dagger``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .ansatz import u1_escape_derivative, u1_escape_map
from .linalg import TOL, as_square, commutator, eig_hermitian, gellmann_basis, is_hermitian


class Classification(str, enum.Enum):
    GROUND_STATE = "GroundState"
    MAX_EIGENSTATE = "MaxEigenstate"
    STRICT_SADDLE = "StrictSaddle"
    DEGENERATE_FLAT = "DegenerateFlat"
    NOT_CRITICAL = "NotCritical"


class LandscapeProblem:
    """Hamiltonian, initial state and ansatz defining ``J(theta) = <psi0|U^+ H U|psi0>``."""

    def __init__(self, hamiltonian, initial_state, ansatz):
        h = as_square(hamiltonian, "hamiltonian")
        if not is_hermitian(h, TOL.structure * max(1.0, np.abs(h).max())):
            raise ValueError("hamiltonian must be Hermitian")
        psi0 = np.asarray(initial_state, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(psi0) - 1) > 1e-12:
            raise ValueError(f"initial state must be normalized, norm={np.linalg.norm(psi0)}")
        if not (h.shape[0] == psi0.size == ansatz.dim):
            raise ValueError(
                f"dimension mismatch: H {h.shape[0]}, state {psi0.size}, ansatz {ansatz.dim}"
            )
        self.hamiltonian = (h + h.conj().T) / 2
        self.initial_state = psi0
        self.ansatz = ansatz
        self.spectrum = eig_hermitian(self.hamiltonian)

    @property
    def param_count(self):
        return self.ansatz.param_count

    @property
    def dim(self):
        return self.ansatz.dim

    def state(self, theta):
        return self.ansatz.unitary(theta) @ self.initial_state

    def cost(self, theta):
        psi = self.state(theta)
        return float(np.vdot(psi, self.hamiltonian @ psi).real)

    def cost_and_grad(self, theta):
        u, oms = self.ansatz.unitary_and_omegas(theta)
        psi = u @ self.initial_state
        hpsi = self.hamiltonian @ psi
        energy = float(np.vdot(psi, hpsi).real)
        return energy, _grad_from(u, oms, self.hamiltonian, psi)

    def grad(self, theta):
        return self.cost_and_grad(theta)[1]


def _grad_from(u, oms, h, psi):
    rho = np.outer(psi, psi.conj())
    g_spatial = h @ rho - rho @ h
    g_body = u.conj().T @ g_spatial @ u
    comps = np.einsum("ij,mij->m", g_body.conj(), oms)
    scale = max(1.0, float(np.abs(comps).max()))
    if np.abs(comps.imag).max() > TOL.imag_part * scale:
        raise ArithmeticError(
            f"gradient has imaginary residue {np.abs(comps.imag).max():.3e}; "
            "Omegas or Hamiltonian lost their structure"
        )
    return comps.real


def cost(problem, theta):
    return problem.cost(theta)


def riemannian_grad(problem, theta):
    """``[H, |psi(theta)><psi(theta)|]`` (skew-Hermitian)."""
    psi = problem.state(theta)
    rho = np.outer(psi, psi.conj())
    return commutator(problem.hamiltonian, rho)


def euclidean_grad(problem, theta):
    return problem.grad(theta)


def spatial_omegas(problem, theta):
    u, oms = problem.ansatz.unitary_and_omegas(theta)
    return u @ oms @ u.conj().T


def hessian_fd(problem, theta, h=1e-4, return_defect=False):
    """Central differences of the analytic gradient, symmetrized."""
    if not h > 0:
        raise ValueError("step must be positive")
    theta = np.asarray(theta, dtype=float)
    m = theta.size
    hess = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        hess[:, j] = (problem.grad(theta + e) - problem.grad(theta - e)) / (2 * h)
    defect = float(np.abs(hess - hess.T).max())
    sym = (hess + hess.T) / 2
    return (sym, defect) if return_defect else sym


class NotCriticalError(ValueError):
    pass


def hessian_at_critical(problem, theta, tol=TOL.criticality):
    """Analytic Hessian ``Tr([Omega_j, [Omega_i, rho]] H)`` at a critical point.

    Valid only where the Riemannian gradient vanishes; elsewhere the terms carrying
    derivatives of the Omegas are missing, so the call is refused.
    """
    grad_norm = float(np.linalg.norm(problem.grad(theta)))
    rgrad_norm = float(np.linalg.norm(riemannian_grad(problem, theta)))
    if grad_norm > tol or rgrad_norm > tol:
        raise NotCriticalError(
            f"not a critical point: ||grad J|| = {grad_norm:.3e}, "
            f"||[H, rho]|| = {rgrad_norm:.3e} (tol {tol:.1e})"
        )
    psi = problem.state(theta)
    rho = np.outer(psi, psi.conj())
    oms = spatial_omegas(problem, theta)
    inner = oms @ rho - rho @ oms  # [Omega_i, rho]
    h = problem.hamiltonian
    # Tr([Oj, C_i] H) = Tr(C_i [H, Oj])
    h_om = h @ oms - oms @ h
    hess = np.einsum("iab,jba->ij", inner, h_om).real
    return (hess + hess.T) / 2


@dataclass
class FrameHessian:
    """Curvature of the energy along the Gell-Mann frame built on the eigenbasis of H.

    ``taylor`` holds ``Tr(B^2 rho H) - Tr(B rho B H)``, the coefficient of ``x^2`` in
    ``J(exp(x B) U)``; ``closed_form`` the matching expression in eigen-overlaps;
    ``second_derivative`` is twice ``taylor``. ``labels`` names each entry as
    ``('sym'|'anti'|'diag', k, l)`` with 1-based eigen-indices.
    """

    labels: list
    taylor: np.ndarray
    closed_form: np.ndarray
    energies: np.ndarray
    overlaps: np.ndarray

    @property
    def second_derivative(self):
        return 2 * self.taylor

    @property
    def max_discrepancy(self):
        return float(np.abs(self.taylor - self.closed_form).max())


def gellmann_frame_hessian(hamiltonian, psi, tol=TOL.classification):
    h = as_square(hamiltonian, "hamiltonian")
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    if np.abs(commutator(h, rho)).max() > tol * max(1.0, np.abs(h).max()):
        raise ValueError("psi is not an eigenstate of the Hamiltonian")
    spec = eig_hermitian(h)
    d = spec.dim
    basis = gellmann_basis(d, frame=spec.vectors)
    overlaps = np.abs(spec.vectors.conj().T @ psi) ** 2
    pairs = list(combinations(range(d), 2))
    labels = [("sym", k + 1, l + 1) for k, l in pairs] + [("anti", k + 1, l + 1) for k, l in pairs]
    labels += [("diag", s, s + 1) for s in range(1, d)]
    taylor = np.array([
        (np.trace(b @ b @ rho @ h) - np.trace(b @ rho @ b @ h)).real for b in basis
    ])
    e, p = spec.values, overlaps
    closed = [0.5 * (e[k] - e[l]) * (p[l] - p[k]) for k, l in pairs] * 2
    closed += [0.0] * (d - 1)
    return FrameHessian(labels, taylor, np.array(closed), e, overlaps)


def eigenspace_mass(problem, psi, which="ground"):
    spec = problem.spectrum
    overlaps = np.abs(spec.vectors.conj().T @ psi) ** 2
    scale = max(1.0, float(np.abs(spec.values).max()))
    target = spec.values[0] if which == "ground" else spec.values[-1]
    mask = np.abs(spec.values - target) <= 1e-9 * scale
    return float(overlaps[mask].sum()), overlaps


@dataclass
class CriticalPointReport:
    theta: np.ndarray
    energy: float
    gradient_norm: float
    riemannian_grad_norm: float
    eigenstate_overlaps: np.ndarray
    classification: Classification
    hessian_min_eigenvalue: float
    ground_energy: float

    def to_dict(self):
        return {
            "theta": [float(x) for x in self.theta],
            "energy": self.energy,
            "ground_energy": self.ground_energy,
            "energy_gap_to_ground": self.energy - self.ground_energy,
            "gradient_norm": self.gradient_norm,
            "riemannian_grad_norm": self.riemannian_grad_norm,
            "eigenstate_overlaps": [float(x) for x in self.eigenstate_overlaps],
            "classification": self.classification.value,
            "hessian_min_eigenvalue": self.hessian_min_eigenvalue,
        }


def classify_critical(problem, theta, grad_tol=TOL.criticality, tol=TOL.classification,
                      hessian=True):
    """Classify ``theta`` as ground / top eigenstate, strict saddle, flat, or not critical."""
    theta = np.asarray(theta, dtype=float)
    energy, grad = problem.cost_and_grad(theta)
    gnorm = float(np.linalg.norm(grad))
    psi = problem.state(theta)
    rnorm = float(np.linalg.norm(riemannian_grad(problem, theta)))
    ground_mass, overlaps = eigenspace_mass(problem, psi, "ground")
    top_mass, _ = eigenspace_mass(problem, psi, "top")
    min_eig = float(np.linalg.eigvalsh(hessian_fd(problem, theta)).min()) if hessian else float("nan")
    if gnorm > grad_tol:
        label = Classification.NOT_CRITICAL
    elif ground_mass >= 1 - tol:
        label = Classification.GROUND_STATE
    elif top_mass >= 1 - tol:
        label = Classification.MAX_EIGENSTATE
    elif hessian and min_eig < -tol:
        label = Classification.STRICT_SADDLE
    else:
        label = Classification.DEGENERATE_FLAT
    return CriticalPointReport(
        theta, energy, gnorm, rnorm, overlaps, label, min_eig, float(problem.spectrum.values[0])
    )


class U1EscapeProblem:
    """Cost ``1 - Re U(theta)`` for the circle map ``exp(i(5/2 arctan theta + pi/4))``.

    The optimum ``U = 1`` is reachable, but from the third quadrant the gradient
    keeps pushing ``theta`` towards ``+inf``.
    """

    param_count = 1

    def cost(self, theta):
        return float(1 - u1_escape_map(np.asarray(theta, dtype=float)[0]).real)

    def grad(self, theta):
        t = np.asarray(theta, dtype=float)[0]
        return np.array([-u1_escape_derivative(t).real])

    def cost_and_grad(self, theta):
        return self.cost(theta), self.grad(theta)
