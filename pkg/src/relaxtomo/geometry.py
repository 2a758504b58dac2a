"""
Information geometry of the Gibbs parametrization relative to a reference state.

Every full-rank state is written as

    rho = exp[(ln sigma - <ln sigma>_sigma) - lambda^b F_b] / Z(lambda)

so the Lagrange parameters ``lambda`` and the expectation values
``f_b = <F_b>_rho`` are dual coordinate systems. The Hessian of ``ln Z`` is the
Bogoliubov-Kubo-Mori (BKM) correlation matrix, which acts as the metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError, SingularMatrixError
from .states import (
    DensityMatrix,
    ObservableBasis,
    expectation,
    matrix_exp_normalized,
    matrix_log,
)

#: Relative eigenvalue separation below which the Kubo-Mori kernel uses its limit.
KERNEL_DEGENERACY = 1e-12


@dataclass(frozen=True, eq=False)
class GibbsChart:
    """Coordinate chart centred on a full-rank reference state ``sigma``.

    ``anchor`` is ``ln sigma - <ln sigma>_sigma * I``; the scalar shift only
    moves ``ln Z`` and never the states.
    """

    reference: DensityMatrix
    basis: ObservableBasis
    anchor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.reference.dim != self.basis.dim:
            raise DimensionMismatchError(
                f"reference dim {self.reference.dim} vs basis dim {self.basis.dim}"
            )
        self.reference.require_full_rank("reference state")
        log_sigma = matrix_log(self.reference)
        anchor = log_sigma - expectation(self.reference, log_sigma) * np.eye(self.dim)
        anchor.setflags(write=False)
        object.__setattr__(self, "anchor", anchor)

    @property
    def dim(self):
        return self.reference.dim


def _check_coords(basis, v, name="coordinate vector"):
    v = np.asarray(v, dtype=float)
    if v.shape != (len(basis),):
        raise DimensionMismatchError(f"{name} must have length {len(basis)}, got {v.shape}")
    return v


def state_from_lambda(chart, lam):
    """Map Lagrange parameters to a state.

    Returns
    -------
    state : DensityMatrix
    log_z : float
        ``ln Z(lambda)``; its gradient is ``-f``.
    """
    lam = _check_coords(chart.basis, lam)
    return matrix_exp_normalized(chart.anchor - chart.basis.combine(lam))


def lambda_from_state(chart, rho):
    """Lagrange parameters ``lambda^b = -Tr[F_b (ln rho - ln sigma)] / 2``."""
    if rho.dim != chart.dim:
        raise DimensionMismatchError(f"state dim {rho.dim} vs chart dim {chart.dim}")
    diff = matrix_log(rho) - matrix_log(chart.reference)
    return -chart.basis.coefficients(diff)


def f_from_state(basis, rho):
    """Expectation values ``f_b = Tr[rho F_b]``."""
    if rho.dim != basis.dim:
        raise DimensionMismatchError(f"state dim {rho.dim} vs basis dim {basis.dim}")
    return np.einsum("ij,bji->b", rho.matrix, basis.observables).real


def kubo_mori_kernel(p):
    """Matrix ``k(p_i, p_j)`` of logarithmic means of the eigenvalues.

    ``k(p, q) = (p - q) / (ln p - ln q)`` and ``k(p, p) = p``; nearly equal
    pairs take the arithmetic mean, the kernel's limit.
    """
    p = np.asarray(p, dtype=float)
    pi, pj = np.meshgrid(p, p, indexing="ij")
    near = np.abs(pi - pj) < KERNEL_DEGENERACY * np.maximum(pi, pj)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (pi - pj) / (np.log(pi) - np.log(pj))
    return np.where(near, (pi + pj) / 2, k)


def bkm_matrix(basis, rho):
    """BKM correlation matrix ``C_ab = d^2 ln Z / d lambda^a d lambda^b`` at `rho`.

    Evaluated through the spectral form
    ``C_ab = sum_ij k(p_i, p_j) <i|dF_a|j><j|dF_b|i>`` with ``dF = F - <F>``.
    """
    rho.require_full_rank()
    if rho.dim != basis.dim:
        raise DimensionMismatchError(f"state dim {rho.dim} vs basis dim {basis.dim}")
    p, u = rho.eigenvalues, rho.eigenvectors
    f = f_from_state(basis, rho)
    centred = basis.observables - f[:, None, None] * np.eye(rho.dim)
    rot = np.einsum("ki,akl,lj->aij", u.conj(), centred, u)
    c = np.einsum("ij,aij,bji->ab", kubo_mori_kernel(p), rot, rot).real
    return (c + c.T) / 2


def _cho(c):
    try:
        return linalg.cho_factor(np.asarray(c, dtype=float))
    except linalg.LinAlgError as exc:
        raise SingularMatrixError("correlation matrix is not positive definite") from exc


def lambda_to_f_pushforward(c, v_lambda):
    """Components change ``df_a = -C_ab dlambda^b``: returns ``-C v``."""
    return -np.asarray(c, dtype=float) @ np.asarray(v_lambda, dtype=float)


def f_to_lambda_pushforward(c, v_f):
    """Components change ``dlambda^a = -(C^-1)^ab df_b``: returns ``-C^-1 v``.

    Solved through a Cholesky factorization; the inverse is never formed.
    """
    return -linalg.cho_solve(_cho(c), np.asarray(v_f, dtype=float))


def entropy_gradient(chart, rho):
    """Components of ``dS(rho||sigma)`` in the ``{df_a}`` cobasis, i.e. ``-lambda``."""
    return -lambda_from_state(chart, rho)


def steepest_descent_tangent(chart, rho):
    """BKM steepest-descent direction of ``S(rho||sigma)`` in the ``{d/dlambda^a}`` basis.

    Unit rate: the components are ``-lambda``, time measured in units of the
    relaxation time.
    """
    return -lambda_from_state(chart, rho)
