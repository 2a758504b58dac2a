"""
Hermitian operator algebra on small Hilbert spaces.

Density matrices, traceless observable bases, expectation values, spectral
matrix functions and the quantum relative entropy. Operators are plain complex
``numpy`` arrays; :class:`DensityMatrix` and :class:`ObservableBasis` wrap them
with their invariants checked once, at construction.
"""

from __future__ import annotations

import numpy as np

from .errors import BoundaryStateError, DimensionMismatchError, ValidationError

#: Smallest eigenvalue a state must exceed to count as full rank.
RANK_FLOOR = 1e-12
#: Tolerances for validating inputs.
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
NEGATIVITY_TOL = 1e-10
#: Hilbert-Schmidt normalization of every basis: Tr[F_a F_b] = 2 delta_ab.
BASIS_NORMALIZATION = 2.0

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_hermitian(a, tol=HERMITIAN_TOL):
    """Validate a square Hermitian matrix and return a read-only copy.

    The returned array is exactly Hermitian (the anti-Hermitian round-off
    within `tol` is discarded).
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValidationError("operator dimension must be at least 2")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValidationError("matrix is not Hermitian")
    return _frozen((a + a.conj().T) / 2)


def traceless_part(a):
    """Remove the multiple of the identity from a square matrix."""
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    return a - (np.trace(a) / d) * np.eye(d)


class DensityMatrix:
    """Positive, unit-trace Hermitian operator.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero and the trace is
    renormalized; anything more negative is rejected.

    Parameters
    ----------
    matrix : array_like, shape (d, d)
        Complex matrix with ``d >= 2``.

    Attributes
    ----------
    matrix : ndarray
        Read-only complex matrix.
    eigenvalues, eigenvectors : ndarray
        Spectral decomposition, eigenvalues ascending.
    """

    __slots__ = ("matrix", "eigenvalues", "eigenvectors")

    def __init__(self, matrix):
        a = as_hermitian(matrix)
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace {tr!r} differs from 1")
        p, u = np.linalg.eigh(a)
        if p[0] < -NEGATIVITY_TOL:
            raise ValidationError(f"negative eigenvalue {p[0]!r}")
        if p[0] < 0:
            p = np.clip(p, 0.0, None)
            p = p / p.sum()
            a = (u * p) @ u.conj().T
            a = (a + a.conj().T) / 2
        self.matrix = _frozen(a)
        p.setflags(write=False)
        u.setflags(write=False)
        self.eigenvalues = p
        self.eigenvectors = u

    @classmethod
    def maximally_mixed(cls, dim):
        return cls(np.eye(dim) / dim)

    @classmethod
    def from_diagonal(cls, probs):
        return cls(np.diag(np.asarray(probs, dtype=float)))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def is_full_rank(self):
        return bool(self.eigenvalues[0] > RANK_FLOOR)

    def require_full_rank(self, what="state"):
        if not self.is_full_rank:
            raise BoundaryStateError(
                f"{what} lies on the boundary of state space "
                f"(smallest eigenvalue {self.eigenvalues[0]:.3e})"
            )

    def mix(self, eps):
        """Return ``(1 - eps) * rho + eps * I/d``."""
        d = self.dim
        return DensityMatrix((1 - eps) * self.matrix + eps * np.eye(d) / d)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, spectrum={np.round(self.eigenvalues, 6)})"


class ObservableBasis:
    """Ordered set of ``d**2 - 1`` traceless Hermitian observables.

    Orthonormal under ``Tr[F_a F_b] = 2 delta_ab``, hence informationally
    complete together with the trace constraint.
    """

    __slots__ = ("name", "observables")

    def __init__(self, observables, name="custom"):
        ops = np.array([as_hermitian(f) for f in observables])
        n, d, _ = ops.shape
        if n != d * d - 1:
            raise ValidationError(f"need {d * d - 1} observables for dim {d}, got {n}")
        if np.max(np.abs(np.trace(ops, axis1=1, axis2=2))) > HERMITIAN_TOL:
            raise ValidationError("basis observables must be traceless")
        gram = self._gram(ops)
        if np.max(np.abs(gram - BASIS_NORMALIZATION * np.eye(n))) > 1e-10:
            raise ValidationError("basis is not orthonormal with Tr[F_a F_b] = 2 delta_ab")
        ops.setflags(write=False)
        self.name = name
        self.observables = ops

    @staticmethod
    def _gram(ops):
        return np.einsum("aij,bji->ab", ops, ops).real

    @property
    def dim(self):
        return self.observables.shape[1]

    @property
    def normalization(self):
        return BASIS_NORMALIZATION

    def __len__(self):
        return self.observables.shape[0]

    def __iter__(self):
        return iter(self.observables)

    def __getitem__(self, i):
        return self.observables[i]

    def gram(self):
        return self._gram(self.observables)

    def combine(self, coeffs):
        """Return ``sum_b coeffs[b] * F_b``."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(self),):
            raise DimensionMismatchError(
                f"expected {len(self)} coefficients, got shape {coeffs.shape}"
            )
        return np.tensordot(coeffs, self.observables, axes=1)

    def coefficients(self, a):
        """Expansion coefficients ``Tr[A F_b] / 2`` of a Hermitian matrix."""
        a = np.asarray(a, dtype=complex)
        _check_dims(a.shape[0], self.dim)
        return np.einsum("ij,bji->b", a, self.observables).real / BASIS_NORMALIZATION

    def __repr__(self):
        return f"ObservableBasis(name={self.name!r}, dim={self.dim})"


def _check_dims(d1, d2):
    if d1 != d2:
        raise DimensionMismatchError(f"dimension mismatch: {d1} vs {d2}")


def pauli_basis():
    """Pauli matrices ``(sigma_x, sigma_y, sigma_z)``."""
    return ObservableBasis([SIGMA_X, SIGMA_Y, SIGMA_Z], name="pauli")


def gell_mann_basis(dim):
    """Generalized Gell-Mann matrices for dimension `dim`.

    Ordered as all symmetric off-diagonal generators, then all antisymmetric
    ones, then the diagonal ones. For ``dim == 2`` this is exactly
    ``(sigma_x, sigma_y, sigma_z)``.
    """
    if int(dim) != dim or dim < 2:
        raise ValidationError(f"dim must be an integer >= 2, got {dim!r}")
    dim = int(dim)
    sym, anti, diag = [], [], []
    for j in range(dim):
        for k in range(j + 1, dim):
            s = np.zeros((dim, dim), dtype=complex)
            s[j, k] = s[k, j] = 1
            sym.append(s)
            a = np.zeros((dim, dim), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            anti.append(a)
    for l in range(1, dim):
        v = np.zeros(dim)
        v[:l] = 1
        v[l] = -l
        diag.append(np.diag(v * np.sqrt(2.0 / (l * (l + 1)))).astype(complex))
    return ObservableBasis(sym + anti + diag, name="gell_mann")


def basis_for(name, dim):
    if name == "pauli":
        if dim != 2:
            raise ValidationError("the Pauli basis exists only for dim 2")
        return pauli_basis()
    if name == "gell_mann":
        return gell_mann_basis(dim)
    raise ValidationError(f"unknown basis {name!r}")


def expectation(rho, a):
    """``Tr[rho A]`` as a float."""
    r = np.asarray(rho)
    a = np.asarray(a)
    _check_dims(r.shape[0], a.shape[0])
    val = np.einsum("ij,ji->", r, a)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValidationError("expectation value has a non-negligible imaginary part")
    return float(val.real)


def matrix_log(rho):
    """Spectral logarithm of a full-rank state."""
    rho.require_full_rank()
    u, p = rho.eigenvectors, rho.eigenvalues
    out = (u * np.log(p)) @ u.conj().T
    return _frozen((out + out.conj().T) / 2)


def matrix_exp_normalized(a):
    """Normalized exponential of a Hermitian operator.

    Returns
    -------
    state : DensityMatrix
        ``exp(A) / Tr[exp(A)]``.
    log_trace : float
        ``ln Tr[exp(A)]``, the log-partition value.
    """
    a = np.asarray(a, dtype=complex)
    w, u = np.linalg.eigh((a + a.conj().T) / 2)
    shift = w[-1]
    e = np.exp(w - shift)
    z = e.sum()
    p = e / z
    m = (u * p) @ u.conj().T
    return DensityMatrix(m), float(shift + np.log(z))


def relative_entropy(rho, sigma):
    """Quantum relative entropy ``Tr[rho (ln rho - ln sigma)]`` with 0 ln 0 = 0."""
    _check_dims(rho.dim, sigma.dim)
    log_sigma = matrix_log(sigma)
    p, u = rho.eigenvalues, rho.eigenvectors
    nz = p > 0
    s_rho = float(np.sum(p[nz] * np.log(p[nz])))
    # Tr[rho ln sigma] in the eigenbasis of rho
    cross = np.einsum("i,ji,jk,ki->", p, u.conj(), log_sigma, u).real
    # Klein's inequality; only round-off can push this below zero
    return max(s_rho - float(cross), 0.0)


def hs_angle(a, b):
    """Unsigned Hilbert-Schmidt angle between two operators, in ``[0, pi/2]``.

    Operators defined up to a multiplicative constant of either sign compare
    equal at angle zero. Uses the half-angle form, accurate near zero.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValidationError("angle undefined for a zero operator")
    a, b = a / na, b / nb
    if np.vdot(a, b).real < 0:
        b = -b
    return float(2 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))
