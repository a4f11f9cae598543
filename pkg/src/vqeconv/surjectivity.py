"""Rank analysis of the Lie-algebra elements and singular points of parameterizations."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .ansatz import (
    Cayley,
    Composite,
    Product,
    ProductOfExponentials,
    SUdGate,
)
from .linalg import TOL, LieBasis, PAULI, gellmann_basis, unitary_algebra_basis


@dataclass
class RankReport:
    point: np.ndarray
    singular_values: np.ndarray
    rank: int
    required_rank: int
    locally_surjective: bool
    extra: dict = field(default_factory=dict)

    @property
    def deficit(self):
        return max(self.required_rank - self.rank, 0)

    def to_dict(self):
        out = {
            "point": [float(x) for x in self.point],
            "singular_values": [float(s) for s in self.singular_values],
            "rank": self.rank,
            "required_rank": self.required_rank,
            "locally_surjective": self.locally_surjective,
        }
        out.update(self.extra)
        return out


@dataclass
class SingularWitness:
    point: np.ndarray
    resonant_pairs: list  # (i, j, lambda_i - lambda_j), the difference purely imaginary
    missing_directions: np.ndarray  # (k, d, d) skew-Hermitian, HS-orthonormal

    def to_dict(self):
        return {
            "point": [float(x) for x in self.point],
            "resonant_pairs": [
                {"i": int(i), "j": int(j), "difference": [float(z.real), float(z.imag)]}
                for i, j, z in self.resonant_pairs
            ],
            "missing_direction_count": int(len(self.missing_directions)),
        }


@dataclass
class SingularityCheck:
    singular: bool
    inconclusive: bool
    min_distance: float  # distance of the closest eigenvalue gap to 2*pi*Z \ {0}
    witness: SingularWitness | None


_BASES: dict = {}


def ambient_basis(d, ambient="su"):
    key = (d, ambient)
    if key not in _BASES:
        _BASES[key] = gellmann_basis(d) if ambient == "su" else unitary_algebra_basis(d)
    return _BASES[key]


def omega_rank(omegas, ambient="su", point=None, rel_tol=TOL.rank_rel, basis=None):
    """Rank of the span of ``omegas`` inside su(d) or u(d).

    Each matrix is realified against an HS-orthonormal basis; the rank counts the
    singular values of the resulting coefficient matrix above ``rel_tol`` times the
    largest one.
    """
    omegas = np.asarray(omegas, dtype=complex)
    if omegas.ndim != 3 or len(omegas) == 0:
        raise ValueError("omega_rank needs a non-empty list of square matrices")
    d = omegas.shape[1]
    if omegas.shape[2] != d:
        raise ValueError("mixed or non-square dimensions")
    if basis is None:
        basis = ambient_basis(d, ambient)
    coeffs = basis.coefficients(omegas)
    sv = np.linalg.svd(coeffs, compute_uv=False)
    rank = int(np.sum(sv > rel_tol * sv[0])) if sv[0] > 0 else 0
    required = d * d - 1 if ambient == "su" else d * d
    pt = np.array([]) if point is None else np.asarray(point, dtype=float)
    return RankReport(pt, sv, rank, required, rank >= required)


def ansatz_rank(ansatz, theta, ambient=None):
    return omega_rank(ansatz.omegas(theta), ambient or ansatz.ambient, point=theta)


def _gap_distance(delta):
    """Distance of a real gap ``delta`` to the nearest nonzero multiple of 2*pi."""
    k = np.round(delta / (2 * np.pi))
    k = np.where(k == 0, np.sign(delta) + (delta == 0), k)
    return np.abs(delta - 2 * np.pi * k), k


def sudgate_is_singular(theta, basis, tol=TOL.resonance, band=TOL.resonance_band):
    """Predict whether the SU(d)-gate ansatz is singular at ``theta``.

    Singular iff two eigenvalues of ``X(theta)`` differ by a nonzero multiple of
    ``2 pi i``. Gaps closer than ``tol`` count as resonant. A closest gap in
    ``(tol/100, band]`` straddles the resonance edge and is flagged inconclusive.
    """
    if isinstance(basis, LieBasis):
        gens = basis.elements
    else:
        gens = np.asarray(basis, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    x = np.tensordot(theta, gens, axes=1)
    mu, vecs = np.linalg.eigh(1j * x)  # eigenvalues of X are -i mu
    d = len(mu)
    pairs = []
    min_dist = np.inf
    for i, j in combinations(range(d), 2):
        delta = mu[j] - mu[i]
        dist, _ = _gap_distance(delta)
        min_dist = min(min_dist, float(dist))
        if dist <= tol:
            pairs.append((i, j, complex(-1j * (mu[i] - mu[j]))))
    # the rank oracle (relative threshold 1e-10) only resolves gaps below ~1e-10
    inconclusive = bool(tol * 1e-2 < min_dist <= band)
    if not pairs:
        return SingularityCheck(False, inconclusive, min_dist, None)
    directions = []
    for i, j, _ in pairs:
        ei, ej = vecs[:, i], vecs[:, j]
        outer_ij = np.outer(ei, ej.conj())
        sym = 1j * (outer_ij + outer_ij.conj().T) / np.sqrt(2)
        anti = (outer_ij - outer_ij.conj().T) / np.sqrt(2)
        directions += [sym, anti]
    witness = SingularWitness(theta, pairs, np.array(directions))
    return SingularityCheck(True, inconclusive, min_dist, witness)


def resonant_theta(basis, eigenphases, rng=None, unitary=None):
    """Coordinates of ``X = W diag(i * eigenphases) W^dagger`` in ``basis``.

    Used to engineer points of prescribed spectrum, e.g. ``X = i pi sigma_z``.
    """
    d = basis.dim
    mu = np.asarray(eigenphases, dtype=float)
    if unitary is None:
        unitary = np.eye(d) if rng is None else _haar(d, rng)
    x = (unitary * (1j * mu)) @ unitary.conj().T
    return basis.coefficients(x)[0]


def _haar(d, rng):
    from .linalg import haar_unitary

    return haar_unitary(d, rng)


@dataclass
class RadiusCertificate:
    radius: float
    method: str
    samples: int = 0

    def to_dict(self):
        return {"radius": self.radius, "method": self.method, "samples": self.samples}


def _ray_directions(m, n_random, rng):
    dirs = [np.eye(m)[i] * s for i in range(m) for s in (1, -1)]
    for i, j in combinations(range(m), 2):
        for si in (1, -1):
            for sj in (1, -1):
                v = np.zeros(m)
                v[i], v[j] = si, sj
                dirs.append(v / np.sqrt(2))
    g = rng.normal(size=(n_random, m))
    dirs += list(g / np.linalg.norm(g, axis=1, keepdims=True))
    return np.array(dirs)


def _conditioning(ansatz, theta, basis):
    c = basis.coefficients(ansatz.omegas(theta))
    sv = np.linalg.svd(c, compute_uv=False)
    sign = np.sign(np.linalg.det(c)) if c.shape[0] == c.shape[1] else 1.0
    return sign, sv[-1] / sv[0]


def singularity_free_radius(ansatz, n_random=64, t_max=None, n_grid=200, seed=0):
    """Largest l2 radius around the origin free of singular points.

    SU(d)-gate with an HS-orthonormal basis: ``pi`` (every eigenvalue of ``X`` has
    modulus at most ``||theta||_2``). Product of exponentials: sampled certificate.
    Rays (coordinate axes, pairwise diagonals, random directions) are scanned for
    the first sign change of the coefficient determinant or collapse of the
    conditioning; each crossing is bisected and the minimum, shrunk by ``1e-3``, is
    returned.
    """
    if isinstance(ansatz, SUdGate):
        basis = ambient_basis(ansatz.dim, "su")
        gram = np.einsum("aij,bij->ab", ansatz.generators.conj(), ansatz.generators).real
        if ansatz.param_count != len(basis) or not np.allclose(gram, np.eye(len(gram)), atol=1e-10):
            raise ValueError("radius certificate needs an HS-orthonormal SU(d)-gate basis")
        return RadiusCertificate(float(np.pi), "spectral bound |lambda_i| <= ||theta||_2")
    if not isinstance(ansatz, ProductOfExponentials):
        raise ValueError(f"no singularity-free radius for {type(ansatz).__name__}")
    basis = ambient_basis(ansatz.dim, ansatz.ambient)
    rng = np.random.default_rng(seed)
    m = ansatz.param_count
    if t_max is None:
        norms = np.sqrt(np.einsum("jab,jab->j", ansatz.generators.conj(), ansatz.generators).real)
        t_max = 2 * np.pi / norms.min() * np.sqrt(ansatz.dim)
    dirs = _ray_directions(m, n_random, rng)
    ts = np.linspace(0, t_max, n_grid + 1)[1:]
    sign0, _ = _conditioning(ansatz, np.zeros(m), basis)
    best = t_max
    evaluated = 0

    def broken(t, u):
        s, c = _conditioning(ansatz, t * u, basis)
        return s != sign0 or c < 1e-8

    for u in dirs:
        prev = 0.0
        for t in ts:
            if t >= best:
                break
            evaluated += 1
            if broken(t, u):
                lo, hi = prev, t
                for _ in range(50):
                    mid = (lo + hi) / 2
                    if broken(mid, u):
                        hi = mid
                    else:
                        lo = mid
                best = min(best, lo)
                break
            prev = t
    return RadiusCertificate(
        float(best * (1 - 1e-3)),
        f"sampled ray scan ({len(dirs)} rays, det sign / conditioning), not a proof",
        evaluated,
    )


def poe_su2_determinant(ansatz, phi):
    """Determinant of the Omega coefficients against ``(-i sx, -i sy, -i sz)``.

    Columns are ``Omega_1..Omega_3``; rows the ``sx, sy, sz`` components. For
    ``exp(-i sx p3) exp(-i sy p2) exp(-i sz p1)`` this equals ``-cos(2 p2)``.
    """
    oms = ansatz.omegas(phi)
    frame = np.array([-1j * PAULI[k] for k in "XYZ"])
    coeffs = np.einsum("kij,mij->km", frame.conj(), oms).real / 2
    return float(np.linalg.det(coeffs))


def heavy_tailed_samples(m, n, rng, tail_norm=None):
    """Student-t (df=1) scaled draws; optionally rescale a quarter of them to ``tail_norm``."""
    thetas = rng.standard_t(1, size=(n, m)) * rng.choice([0.3, 1.0, 3.0, 10.0], size=(n, 1))
    if tail_norm is not None:
        k = max(1, n // 4)
        g = rng.normal(size=(k, m))
        thetas[:k] = tail_norm * g / np.linalg.norm(g, axis=1, keepdims=True)
    return thetas


def _opnorm(mats):
    return np.linalg.norm(mats, ord=2, axis=(-2, -1))


def _frobenius(mats):
    return np.linalg.norm(mats, axis=(-2, -1))


def omega_uniform_bound(ansatz, n_samples=1000, norm="operator", seed=0, tail_norm=1e3):
    """Sampled ``max_j ||Omega_j(theta)||`` plus the analytic bound where one exists."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    fn = _opnorm if norm == "operator" else _frobenius
    rng = np.random.default_rng(seed)
    thetas = heavy_tailed_samples(ansatz.param_count, n_samples, rng, tail_norm)
    sampled = max(float(fn(ansatz.omegas(t)).max()) for t in thetas)
    analytic = None
    if isinstance(ansatz, ProductOfExponentials):
        analytic = float(fn(ansatz.generators).max())
    elif isinstance(ansatz, Cayley):
        analytic = 2 * float(_opnorm(ansatz.generators).max()) if norm == "operator" else None
    elif isinstance(ansatz, Composite):
        analytic = _composite_bound(ansatz, fn)
    return {"sampled_max": sampled, "analytic_bound": analytic, "norm": norm,
            "samples": int(n_samples)}


def _composite_bound(ansatz, fn):
    """Componentwise certificate: squashed V part and unitarily-conjugated W part."""
    squashed = ansatz.inner
    v = squashed.inner
    w = ansatz.outer
    parts = []
    if isinstance(v, ProductOfExponentials):
        parts.append(squashed._scale * float(fn(v.generators).max()))
    else:
        # |dexp kernel| <= 1 on imaginary arguments, so ||Omega_j|| <= ||X_j|| (Frobenius)
        parts.append(squashed._scale * float(_frobenius(v.generators).max()))
    if isinstance(w, ProductOfExponentials):
        parts.append(float(fn(w.generators).max()))
    else:
        return None
    return max(parts)


def overparam_singular_witness(basis, phi_s):
    """Rank of ``exp(X(theta)) exp(X(phi))`` at ``(phi_s, phi_s)``."""
    check = sudgate_is_singular(phi_s, basis)
    if not check.singular:
        raise ValueError("phi_s is not a singular point of the SU(d)-gate ansatz")
    doubled = Product(SUdGate(basis), SUdGate(basis), name="doubled_sud_gate")
    phi_s = np.asarray(phi_s, dtype=float)
    return ansatz_rank(doubled, np.concatenate([phi_s, phi_s]))


def cayley_rank_check(basis_u, theta):
    """Rank of the ``d^2`` Cayley Omegas in u(d), plus the rank modulo the phase direction."""
    ans = Cayley(basis_u)
    oms = ans.omegas(theta)
    report = omega_rank(oms, "u", point=theta)
    d = ans.dim
    traceless = oms - np.trace(oms, axis1=1, axis2=2)[:, None, None] * np.eye(d) / d
    quotient = omega_rank(traceless, "su")
    report.extra["phase_quotient_rank"] = quotient.rank
    return report



def engineered_resonance(basis, rng, jitter=0.0, multiple=None):
    """Random SU(d)-gate coordinates whose ``X`` has one eigenvalue gap ``2 pi k + jitter``."""
    d = basis.dim
    mu = rng.normal(size=d)
    i, j = rng.choice(d, size=2, replace=False)
    k = multiple if multiple is not None else int(rng.choice([-2, -1, 1, 2]))
    mu[i] = mu[j] + 2 * np.pi * k + jitter
    mu -= mu.mean()
    return resonant_theta(basis, mu, rng=rng)


def diagonal_resonance_patterns(d):
    """``X = i pi diag(...)`` points: +pi and -pi on one pair, the rest zero."""
    out = []
    for i, j in combinations(range(d), 2):
        mu = np.zeros(d)
        mu[i], mu[j] = np.pi, -np.pi
        out.append(mu)
    return out


@dataclass
class AgreementSummary:
    total: int = 0
    inconclusive: int = 0
    agree: int = 0
    disagree: int = 0
    direction_mismatch: int = 0
    predicted_singular: int = 0
    rank_deficient: int = 0
    disagreements: list = field(default_factory=list)

    @property
    def perfect(self):
        return self.disagree == 0 and self.direction_mismatch == 0

    def to_dict(self):
        out = {k: getattr(self, k) for k in ("total", "inconclusive", "agree", "disagree",
                                             "direction_mismatch", "predicted_singular",
                                             "rank_deficient")}
        out["disagreements"] = self.disagreements[:20]
        return out


def compare_predictor(theta, basis, summary=None):
    """Run predictor and rank oracle at one point; update ``summary`` in place."""
    summary = AgreementSummary() if summary is None else summary
    ans = SUdGate(basis)
    check = sudgate_is_singular(theta, basis)
    report = omega_rank(ans.omegas(theta), "su", point=theta)
    summary.total += 1
    deficient = report.rank < report.required_rank
    summary.rank_deficient += deficient
    summary.predicted_singular += check.singular
    if check.inconclusive:
        summary.inconclusive += 1
        return check, report, summary
    missing = 0 if check.witness is None else len(check.witness.missing_directions)
    if check.singular != deficient:
        summary.disagree += 1
        summary.disagreements.append({**report.to_dict(), "predicted_singular": check.singular,
                                      "min_distance": check.min_distance})
    elif missing != report.deficit:
        summary.direction_mismatch += 1
        summary.disagreements.append({**report.to_dict(), "missing_directions": missing})
    else:
        summary.agree += 1
    return check, report, summary
