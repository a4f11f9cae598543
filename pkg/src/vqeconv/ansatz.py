"""Parameterized unitary families.

Every ansatz exposes ``unitary(theta)`` and ``omegas(theta)``, where the latter
returns the ``M`` Lie-algebra elements ``Omega_j = U^dagger dU/dtheta_j`` stacked
in an array of shape ``(M, d, d)``. All evaluations are pure.
"""
from __future__ import annotations

import numpy as np

from .linalg import (
    TOL,
    LieBasis,
    as_square,
    gellmann_basis,
    is_skew_hermitian,
    pauli_string,
    unitary_algebra_basis,
)

# below this |z| the divided-difference kernel uses its Taylor series
_DEXP_SERIES_CUTOFF = 1e-8


def _as_generators(generators):
    if isinstance(generators, LieBasis):
        generators = generators.elements
    gens = np.array([as_square(g, "generator") for g in generators], dtype=complex)
    if gens.ndim != 3 or len(gens) == 0:
        raise ValueError("need at least one generator")
    for g in gens:
        if not is_skew_hermitian(g, TOL.structure * max(1.0, np.abs(g).max())):
            raise ValueError("generators must be skew-Hermitian")
    return gens


def dexp_kernel(z):
    """``(1 - exp(-z)) / z`` elementwise, with the removable singularity at 0 filled."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _DEXP_SERIES_CUTOFF
    zs = z[small]
    out[small] = 1 - zs / 2 + zs**2 / 6
    zl = z[~small]
    out[~small] = -np.expm1(-zl) / zl
    return out


class Ansatz:
    """Base class: subclasses set ``dim``, ``param_count`` and implement ``_evaluate``."""

    name = "ansatz"
    dim: int
    param_count: int
    # True when every unitary has unit determinant (Omegas traceless)
    special: bool = True

    @property
    def ambient(self):
        return "su" if self.special else "u"

    def check_theta(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape != (self.param_count,):
            raise ValueError(
                f"{self.name}: expected {self.param_count} parameters, got {theta.size}"
            )
        if not np.all(np.isfinite(theta)):
            raise ValueError(f"{self.name}: parameters must be finite")
        return theta

    def unitary(self, theta):
        return self._evaluate(self.check_theta(theta), want_omegas=False)[0]

    def omegas(self, theta):
        return self._evaluate(self.check_theta(theta), want_omegas=True)[1]

    def unitary_and_omegas(self, theta):
        return self._evaluate(self.check_theta(theta), want_omegas=True)

    def _evaluate(self, theta, want_omegas):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, M={self.param_count})"


class SUdGate(Ansatz):
    """``U(theta) = exp(sum_j theta_j X_j)`` over a basis or an overcomplete frame."""

    name = "sud_gate"

    def __init__(self, generators):
        self.generators = _as_generators(generators)
        self.param_count, self.dim, _ = self.generators.shape
        self.special = bool(np.all(np.abs(np.trace(self.generators, axis1=1, axis2=2)) < 1e-12))

    def algebra_element(self, theta):
        return np.tensordot(self.check_theta(theta), self.generators, axes=1)

    def _evaluate(self, theta, want_omegas):
        x = np.tensordot(theta, self.generators, axes=1)
        mu, v = np.linalg.eigh(1j * x)  # X = V diag(-i mu) V^dagger
        u = (v * np.exp(-1j * mu)) @ v.conj().T
        if not want_omegas:
            return u, None
        lam = -1j * mu
        kernel = dexp_kernel(lam[:, None] - lam[None, :])
        local = v.conj().T @ self.generators @ v
        return u, v @ (kernel * local) @ v.conj().T


class ProductOfExponentials(Ansatz):
    """``U(theta) = exp(theta_M X_M) ... exp(theta_1 X_1)``; index 1 acts first."""

    name = "poe"

    def __init__(self, generators, name=None):
        self.generators = _as_generators(generators)
        self.param_count, self.dim, _ = self.generators.shape
        self.special = bool(np.all(np.abs(np.trace(self.generators, axis1=1, axis2=2)) < 1e-12))
        if name:
            self.name = name
        # i X_j = P_j diag(m_j) P_j^dagger
        self._m, self._p = np.linalg.eigh(1j * self.generators)

    def factors(self, theta):
        phases = np.exp(-1j * theta[:, None] * self._m)
        return np.einsum("jab,jb,jcb->jac", self._p, phases, self._p.conj())

    def _evaluate(self, theta, want_omegas):
        facs = self.factors(theta)
        u = np.eye(self.dim, dtype=complex)
        oms = np.empty_like(self.generators) if want_omegas else None
        for j in range(self.param_count):
            if want_omegas:
                oms[j] = u.conj().T @ self.generators[j] @ u
            u = facs[j] @ u
        return u, oms


class Cayley(Ansatz):
    """``U(theta) = (1 - X)^{-1} (1 + X)`` with ``X = sum_j theta_j X_j`` in u(d)."""

    name = "cayley"
    special = False

    def __init__(self, generators=None, dim=None):
        if generators is None:
            generators = unitary_algebra_basis(dim)
        self.generators = _as_generators(generators)
        self.param_count, self.dim, _ = self.generators.shape

    def _evaluate(self, theta, want_omegas):
        x = np.tensordot(theta, self.generators, axes=1)
        eye = np.eye(self.dim)
        minus, plus = eye - x, eye + x
        if np.linalg.cond(minus) > 1e12:
            raise np.linalg.LinAlgError("Cayley transform: 1 - X is numerically singular")
        u = np.linalg.solve(minus, plus)
        if not want_omegas:
            return u, None
        # d cay_X(Y) = 2 (1-X)^{-1} Y (1-X)^{-1}, and cay(X)^dagger = (1+X)^{-1}(1-X)
        left = np.linalg.inv(plus)
        right = np.linalg.inv(minus)
        return u, 2 * left @ self.generators @ right


class ArctanSquashed(Ansatz):
    """``inner((2 R c / pi) * arctan(phi))`` with componentwise arctan.

    ``scaling='ball'`` sets ``c = 1/sqrt(M)`` so that the image of the open box lies
    inside the l2 ball of radius ``R``; ``scaling='box'`` sets ``c = 1`` and bounds
    each component by ``R``.
    """

    name = "arctan_squashed"

    def __init__(self, inner, radius, scaling="ball"):
        if not radius > 0:
            raise ValueError(f"radius must be strictly positive, got {radius}")
        if scaling not in ("ball", "box"):
            raise ValueError(f"unknown scaling {scaling!r}")
        self.inner = inner
        self.radius = float(radius)
        self.scaling = scaling
        self.dim = inner.dim
        self.param_count = inner.param_count
        self.special = inner.special
        c = 1 / np.sqrt(self.param_count) if scaling == "ball" else 1.0
        self.component_bound = self.radius * c
        self._scale = 2 * self.component_bound / np.pi

    def squash(self, phi):
        return self._scale * np.arctan(phi)

    def _evaluate(self, theta, want_omegas):
        u, oms = self.inner._evaluate(self.squash(theta), want_omegas)
        if want_omegas:
            oms = oms * (self._scale / (1 + theta**2))[:, None, None]
        return u, oms


class Product(Ansatz):
    """``U = outer(theta_outer) inner(theta_inner)`` with the inner parameters first."""

    name = "product"

    def __init__(self, outer, inner, name=None):
        if outer.dim != inner.dim:
            raise ValueError("factor dimensions differ")
        self.outer, self.inner = outer, inner
        self.dim = inner.dim
        self.param_count = inner.param_count + outer.param_count
        self.special = outer.special and inner.special
        if name:
            self.name = name

    def split(self, theta):
        k = self.inner.param_count
        return theta[k:], theta[:k]

    def _evaluate(self, theta, want_omegas):
        t_out, t_in = self.split(theta)
        w, om_w = self.outer._evaluate(t_out, want_omegas)
        v, om_v = self.inner._evaluate(t_in, want_omegas)
        u = w @ v
        if not want_omegas:
            return u, None
        return u, np.concatenate([om_v, v.conj().T @ om_w @ v])


class Composite(Product):
    """Surjective ``W`` times a singularity-free squashed ``V``."""

    name = "composite"

    def __init__(self, w, v, radius, scaling="ball"):
        super().__init__(w, ArctanSquashed(v, radius, scaling))
        self.radius = float(radius)
        self.scaling = scaling

    @property
    def w(self):
        return self.outer

    @property
    def v(self):
        return self.inner.inner


def pauli_generators(n_qubits=None, dim=None, labels=None):
    """``-i P`` for Pauli strings ``P``: all non-identity strings, or ``labels`` in order."""
    if labels is None:
        if n_qubits is None:
            n_qubits = int(round(np.log2(dim)))
            if 2**n_qubits != dim:
                raise ValueError(f"Pauli generators need d = 2^n, got {dim}")
        labels = _all_pauli_labels(n_qubits)[1:]
    return np.array([-1j * pauli_string(lab) for lab in labels])


def _all_pauli_labels(n):
    labels = [""]
    for _ in range(n):
        labels = [a + b for a in labels for b in "IXYZ"]
    return labels


def euler_xyx():
    """``exp(-i sx t3) exp(-i sy t2) exp(-i sx t1)``."""
    return ProductOfExponentials(pauli_generators(labels=["X", "Y", "X"]), name="euler_xyx")


def generalized_euler_generators(d):
    """Generator sequence of the generalized Euler angles for SU(d), first-applied first.

    The written product is ``prod_{k=2..d} A(k) * prod_{m=2..d} exp(i lam_{m^2-1} a)``
    with ``A(k) = prod_{j=k..2} exp(i lam_3 a) exp(i lam_{(j-1)^2+1} a)``, where
    ``lam_3`` is ``diag(1,-1,0,...)``, ``lam_{(j-1)^2+1}`` the sigma_y-like element on
    levels ``(1, j)`` and ``lam_{m^2-1}`` the ``(m-1)``-th diagonal Gell-Mann matrix.
    """
    def offdiag_y(j):
        m = np.zeros((d, d), dtype=complex)
        m[0, j - 1], m[j - 1, 0] = -1j, 1j
        return m

    def diag(s):
        v = np.zeros(d)
        v[:s] = 1
        v[s] = -s
        return np.diag(v * np.sqrt(2 / (s * (s + 1)))).astype(complex)

    written = []
    for k in range(2, d + 1):
        for j in range(k, 1, -1):
            written += [diag(1), offdiag_y(j)]
    written += [diag(m - 1) for m in range(2, d + 1)]
    # rightmost factor of the written product acts first
    return np.array([1j * h for h in reversed(written)])


def generalized_euler(d):
    return ProductOfExponentials(generalized_euler_generators(d), name="generalized_euler")


def sud_gate(d):
    return SUdGate(gellmann_basis(d))


def finite_difference_omegas(ansatz, theta, h=1e-5):
    """Central-difference estimate ``U^dagger (U(t + h e_j) - U(t - h e_j)) / 2h``."""
    if not h > 0:
        raise ValueError("step must be positive")
    theta = ansatz.check_theta(theta)
    u_dag = ansatz.unitary(theta).conj().T
    out = np.empty((ansatz.param_count, ansatz.dim, ansatz.dim), dtype=complex)
    for j in range(ansatz.param_count):
        e = np.zeros_like(theta)
        e[j] = h
        out[j] = u_dag @ (ansatz.unitary(theta + e) - ansatz.unitary(theta - e)) / (2 * h)
    return out


def make_composite(w, v_kind="sud_gate", basis=None, radius="auto", scaling="ball",
                   certify=True):
    """Build ``W(theta) V((2R/pi) arctan(phi))`` with the ``V`` parameters listed first.

    ``radius='auto'`` resolves to the certified singularity-free radius of ``V``. An
    explicit radius whose squashed image may leave the certified ball is rejected
    unless ``certify=False``.
    """
    from .surjectivity import singularity_free_radius

    if basis is None:
        basis = gellmann_basis(w.dim)
    if isinstance(basis, LieBasis) and basis.dim != w.dim:
        raise ValueError("W and basis dimensions differ")
    if v_kind in ("sud_gate", "SUdGate"):
        v = SUdGate(basis)
    elif v_kind in ("poe", "ProductOfExponentials"):
        v = ProductOfExponentials(basis)
    else:
        raise ValueError(f"unknown V kind {v_kind!r}")
    if v.dim != w.dim:
        raise ValueError("W and V dimensions differ")
    if certify or radius == "auto":
        cert = singularity_free_radius(v)
    if radius == "auto":
        radius = cert.radius
    radius = float(radius)
    if not radius > 0:
        raise ValueError(f"radius must be strictly positive, got {radius}")
    if certify:
        reach = radius if scaling == "ball" else radius * np.sqrt(v.param_count)
        if reach > cert.radius * (1 + 1e-12):
            raise ValueError(
                f"radius {radius:.6g} ({scaling} scaling) reaches {reach:.6g}, beyond the "
                f"certified singularity-free radius {cert.radius:.6g} ({cert.method})"
            )
    return Composite(w, v, radius, scaling)


def u1_escape_phase(theta):
    return 2.5 * np.arctan(theta) + np.pi / 4


def u1_escape_map(theta):
    """``exp(i (5/2 arctan(theta) + pi/4))`` on the unit circle."""
    return np.exp(1j * u1_escape_phase(theta))


def u1_escape_derivative(theta):
    return 1j * 2.5 / (1 + theta**2) * u1_escape_map(theta)
