"""Dense complex linear algebra and Lie-algebra bases.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; the
helpers here validate shape and structure and build the bases used by every
other module.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Default numerical tolerances, shared across the package."""

    structure: float = 1e-10      # hermitian / skew / unitary / traceless predicates
    orthonormal: float = 1e-12    # HS-orthonormality of generated bases
    rank_rel: float = 1e-10       # singular-value threshold relative to the largest
    resonance: float = 1e-8       # membership in 2*pi*i*Z \ {0}
    resonance_band: float = 1e-6  # upper edge of the inconclusive band
    criticality: float = 1e-8     # ||grad J||_2 for a critical point
    classification: float = 1e-6  # overlap mass and Hessian eigenvalue tolerance
    imag_part: float = 1e-10      # allowed imaginary residue of real HS products


TOL = Tolerances()

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def as_square(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def _maxabs(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a, tol=TOL.structure):
    a = as_square(a)
    return _maxabs(a - a.conj().T) <= tol


def is_skew_hermitian(a, tol=TOL.structure):
    a = as_square(a)
    return _maxabs(a + a.conj().T) <= tol


def is_unitary(a, tol=TOL.structure):
    a = as_square(a)
    return _maxabs(a.conj().T @ a - np.eye(a.shape[0])) <= tol


def is_traceless(a, tol=TOL.structure):
    a = as_square(a)
    return abs(np.trace(a)) <= tol


def commutator(a, b):
    return a @ b - b @ a


def hs_inner(a, b):
    """Hilbert-Schmidt inner product ``Tr(A^dagger B)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray   # ascending, real for Hermitian input
    vectors: np.ndarray  # columns are the eigenvectors

    @property
    def dim(self):
        return len(self.values)


def eig_hermitian(h, tol=TOL.structure):
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix."""
    h = as_square(h, "hamiltonian")
    scale = max(1.0, _maxabs(h))
    if not is_hermitian(h, tol * scale):
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    values, vectors = np.linalg.eigh((h + h.conj().T) / 2)
    return EigenSystem(values, vectors)


def expm_skew(x, tol=TOL.structure):
    """Exponential of a skew-Hermitian matrix.

    ``iX`` is Hermitian, so ``X = V diag(-i mu) V^dagger`` with ``iX = V diag(mu) V^dagger``
    and ``exp(X) = V diag(exp(-i mu)) V^dagger``. The result is unitary to machine
    precision.
    """
    x = as_square(x)
    scale = max(1.0, _maxabs(x))
    if not is_skew_hermitian(x, tol * scale):
        raise ValueError("expm_skew requires a skew-Hermitian matrix")
    mu, v = np.linalg.eigh(1j * x)
    return (v * np.exp(-1j * mu)) @ v.conj().T


@dataclass(frozen=True)
class LieBasis:
    """HS-orthonormal basis of su(d) (``kind='su'``) or u(d) (``kind='u'``)."""

    dim: int
    kind: str
    elements: np.ndarray  # shape (n, d, d)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def coefficients(self, mats):
        """Real coordinates of skew-Hermitian matrices, one row per matrix."""
        mats = np.asarray(mats, dtype=complex)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.shape[1:] != (self.dim, self.dim):
            raise ValueError(f"expected {self.dim}x{self.dim} matrices, got {mats.shape[1:]}")
        return np.einsum("kij,mij->mk", self.elements.conj(), mats).real

    def combine(self, coeffs):
        return np.tensordot(np.asarray(coeffs, dtype=float), self.elements, axes=1)


def gellmann_basis(d, frame=None):
    """Skew-Hermitian generalized Gell-Mann basis of su(d).

    Ordering: the symmetric pairs ``i(|k><l| + |l><k|)/sqrt2`` for ``k<l`` in
    lexicographic order, then the antisymmetric pairs ``(|k><l| - |l><k|)/sqrt2``,
    then the diagonal elements
    ``i(sum_{r<=s} |r><r| - s|s+1><s+1|)/sqrt(s(s+1))``.

    ``frame`` optionally supplies a unitary whose columns replace the computational
    basis kets (e.g. the eigenbasis of a Hamiltonian).
    """
    if int(d) != d or d < 2:
        raise ValueError(f"gellmann_basis requires d >= 2, got {d}")
    d = int(d)
    pairs = list(combinations(range(d), 2))
    elements = []
    for k, l in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[k, l] = m[l, k] = 1j / np.sqrt(2)
        elements.append(m)
    for k, l in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[k, l] = 1 / np.sqrt(2)
        m[l, k] = -1 / np.sqrt(2)
        elements.append(m)
    for s in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:s] = 1
        diag[s] = -s
        elements.append(np.diag(1j * diag / np.sqrt(s * (s + 1))))
    elements = np.array(elements)
    if frame is not None:
        v = as_square(frame, "frame")
        elements = np.einsum("ia,kab,jb->kij", v, elements, v.conj())
    return LieBasis(d, "su", elements)


def unitary_algebra_basis(d):
    """Gell-Mann basis of su(d) extended by ``i*1/sqrt(d)``: a basis of u(d)."""
    su = gellmann_basis(d)
    phase = 1j * np.eye(su.dim, dtype=complex) / np.sqrt(su.dim)
    return LieBasis(su.dim, "u", np.concatenate([su.elements, phase[None]]))


def pauli_string(label):
    """Dense matrix of a Pauli string such as ``'XZY'`` (leftmost factor first)."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label.upper():
        if ch not in PAULI:
            raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}")
        out = np.kron(out, PAULI[ch])
    return out


def _rng(seed):
    return np.random.default_rng(seed)


def seeded_random_hermitian(d, seed):
    """GUE-style Hermitian matrix, exactly symmetric by construction."""
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = _rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def seeded_random_state(d, seed):
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = _rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_skew_hermitian(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a - a.conj().T) / 2


def haar_unitary(d, rng):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
