"""
Closed-form qubit geometry.

For a qubit ``rho = (I + v·sigma)/2`` with ``r = |v| < 1`` the BKM matrix in the
Pauli basis has two eigenvalues: ``1 - r**2`` along ``v`` and
``r / artanh(r)`` across it. The tilt between the spatial orientation of a
data cluster and the inferred dissipative direction follows from its inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryStateError, NoPreferredDirectionError, ValidationError
from .estimator import ImageSet, covariance_matrix, reconstruct
from .states import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, pauli_basis

PAULIS = np.array([SIGMA_X, SIGMA_Y, SIGMA_Z])
#: Below this radius artanh(r)/r is evaluated from its Taylor series.
SERIES_RADIUS = 1e-4


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.r > 1 + 1e-12:
            raise ValidationError(f"Bloch vector length {self.r!r} exceeds 1")

    @classmethod
    def from_array(cls, v):
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    @classmethod
    def polar(cls, r, azimuth, z=0.0):
        return cls(r * math.cos(azimuth), r * math.sin(azimuth), z)

    @property
    def r(self):
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def as_array(self):
        return np.array([self.x, self.y, self.z])


def bloch_to_state(v):
    """``(I + v·sigma) / 2``."""
    return DensityMatrix((np.eye(2) + np.tensordot(v.as_array(), PAULIS, axes=1)) / 2)


def state_to_bloch(rho):
    if rho.dim != 2:
        raise ValidationError("Bloch vectors exist only for qubits")
    return BlochVector.from_array(np.einsum("ij,bji->b", rho.matrix, PAULIS).real)


def artanh_ratio(r):
    """``artanh(r) / r`` with its ``r -> 0`` limit 1."""
    r = float(r)
    if r < SERIES_RADIUS:
        r2 = r * r
        return 1.0 + r2 / 3.0 + r2 * r2 / 5.0
    return math.atanh(r) / r


def qubit_bkm_closed_form(v):
    """BKM correlation matrix of a qubit in the Pauli basis, in closed form."""
    r = v.r
    if r >= 1:
        raise BoundaryStateError("pure qubit states have no BKM matrix")
    if r == 0:
        return np.eye(3)
    radial = 1.0 - r * r
    transverse = 1.0 / artanh_ratio(r)
    n = v.as_array() / r
    proj = np.outer(n, n)
    return radial * proj + transverse * (np.eye(3) - proj)


def qubit_bkm_inverse_closed_form(v):
    """Inverse of :func:`qubit_bkm_closed_form`: ``1/(1-r²)`` radially, ``artanh(r)/r`` across."""
    r = v.r
    if r >= 1:
        raise BoundaryStateError("pure qubit states have no BKM matrix")
    if r == 0:
        return np.eye(3)
    n = v.as_array() / r
    proj = np.outer(n, n)
    return proj / (1.0 - r * r) + artanh_ratio(r) * (np.eye(3) - proj)


def _tilt_numerator(r):
    # 1 - (1 - r²) artanh(r)/r = sum_k 2 r^(2k) / (4k² - 1), free of cancellation
    if r < 0.1:
        r2 = r * r
        return sum(2.0 * r2**k / (4 * k * k - 1) for k in range(1, 10))
    return 1.0 - (1.0 - r * r) * artanh_ratio(r)


def _check_radius(r):
    r = float(r)
    if not 0 <= r <= 1:
        raise ValidationError(f"radius must lie in [0, 1], got {r!r}")
    return r


def tilting_angle(r):
    """Tilt ``phi(r) = arctan(1 - (1 - r²) artanh(r)/r)`` for a centre of mass at azimuth pi/4.

    This is the closed form built from ``C^-1_yy = 1/(1-r²)`` and
    ``C^-1_xy = C^-1_yy - artanh(r)/r``; it rises from 0 at ``r = 0`` to
    pi/4 at ``r = 1``. The BKM matrix itself gives a smaller tilt, see
    :func:`bkm_tilting_angle`.
    """
    r = _check_radius(r)
    if r == 1:
        return math.pi / 4
    return math.atan(_tilt_numerator(r))


def bkm_tilting_angle(r):
    """Tilt ``arctan(C^-1_xy / C^-1_yy)`` evaluated from the exact qubit BKM inverse.

    At azimuth pi/4, ``C^-1_yy = (a + b)/2`` and ``C^-1_xy = (a - b)/2`` with
    ``a = 1/(1-r²)`` and ``b = artanh(r)/r``. This is the angle that
    :func:`naive_vs_inferred` reproduces.
    """
    r = _check_radius(r)
    if r == 1:
        return math.pi / 4
    v = _tilt_numerator(r)
    return math.atan(v / (2.0 - v))


def tilting_angle_sweep(n_points):
    """Rows ``(r, phi_exact, phi_approx)`` on a uniform grid over ``[0, 1)`` plus ``r = 1``.

    ``phi_approx = (pi/4) r²``.
    """
    if int(n_points) != n_points or n_points < 2:
        raise ValidationError("n_points must be an integer >= 2")
    grid = np.arange(int(n_points)) / int(n_points)
    rows = [(float(r), tilting_angle(r), math.pi / 4 * r * r) for r in grid]
    rows.append((1.0, math.pi / 4, math.pi / 4))
    return rows


def aligned_images(center, spread, count=5, axis=1, sample_size=1000):
    """Qubit images placed on a line through `center` parallel to a Bloch axis.

    The offsets are symmetric, so `center` is the centre of mass.
    """
    c = center.as_array()
    offsets = np.linspace(-spread, spread, count)
    states = []
    for s in offsets:
        v = c.copy()
        v[axis] += s
        states.append(bloch_to_state(BlochVector.from_array(v)))
    return ImageSet.from_states(states, sample_size, pauli_basis())


def _unsigned_angle(a, b):
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    if a @ b < 0:
        b = -b
    return float(2 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def naive_vs_inferred(images):
    """Compare the cluster's principal axis with the inferred force direction.

    Returns
    -------
    naive : ndarray
        Unit principal eigenvector of the covariance alone.
    inferred : ndarray
        Unit-norm reconstructed ``xi``.
    angle : float
        Unsigned angle between the two, in ``[0, pi/2]``.
    """
    if images.dim != 2:
        raise ValidationError("naive_vs_inferred expects qubit images")
    gamma = covariance_matrix(images)
    w, vecs = np.linalg.eigh(gamma)
    if w[-1] <= 0:
        raise NoPreferredDirectionError("covariance matrix vanishes")
    naive = vecs[:, -1]
    xi = reconstruct(images).xi
    inferred = xi / np.linalg.norm(xi)
    return naive, inferred, _unsigned_angle(naive, inferred)
