"""
Steepest-descent relaxation curves.

A curve is the exponential arc ``rho(t) ∝ exp(ln base + t G)`` through a known
state. Every steepest-descent trajectory towards some ``sigma`` has this form;
``t`` grows towards the equilibrium end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DimensionMismatchError, RangeError, ValidationError
from .geometry import lambda_from_state, state_from_lambda
from .states import (
    DensityMatrix,
    ObservableBasis,
    as_hermitian,
    expectation,
    matrix_exp_normalized,
    matrix_log,
    traceless_part,
)

#: |t| * ||G|| beyond which the bracket search gives up.
BRACKET_CAP = 500.0
MATCH_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Exponential arc through `base` generated by `generator`.

    The generator is stored traceless; additive constants are unobservable.
    """

    base: DensityMatrix
    generator: np.ndarray
    basis: ObservableBasis
    _log_base: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.base.dim != self.basis.dim:
            raise DimensionMismatchError("base state and basis dimensions differ")
        g = as_hermitian(traceless_part(as_hermitian(self.generator)))
        if g.shape[0] != self.base.dim:
            raise DimensionMismatchError("generator and base state dimensions differ")
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "_log_base", matrix_log(self.base))

    @property
    def spectral_norm(self):
        return float(np.max(np.abs(np.linalg.eigvalsh(self.generator))))

    def rebased(self, t):
        """Same curve, re-anchored at parameter `t`."""
        return Trajectory(trajectory_point(self, t), self.generator, self.basis)


@dataclass(frozen=True)
class FlowParams:
    """Relaxation time and sampling grid for flow integration."""

    tau: float
    t_max: float
    steps: int

    def __post_init__(self):
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        if not self.t_max > 0:
            raise ValidationError("t_max must be positive")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError("steps must be a positive integer")

    def times(self):
        return np.linspace(0.0, self.t_max, int(self.steps) + 1)


def trajectory_from_endpoints(rho0, sigma, basis):
    """Curve through `rho0` (t = 0) and `sigma` (t = 1).

    The generator is the traceless part of ``ln sigma - ln rho0``.
    """
    rho0.require_full_rank("initial state")
    sigma.require_full_rank("equilibrium state")
    return Trajectory(rho0, matrix_log(sigma) - matrix_log(rho0), basis)


def trajectory_point(traj, t):
    """State ``exp(ln base + t G) / Z`` on the curve."""
    state, _ = matrix_exp_normalized(traj._log_base + float(t) * traj.generator)
    return state


def relax_linear(rho0, sigma, params):
    """Samples of ``sigma + exp(-t/tau) (rho0 - sigma)`` on the uniform time grid."""
    if rho0.dim != sigma.dim:
        raise DimensionMismatchError("state dimensions differ")
    out = []
    for t in params.times():
        g = np.exp(-t / params.tau)
        out.append(DensityMatrix(g * rho0.matrix + (1 - g) * sigma.matrix))
    return out


def _rk4_linear(lam0, tau, h, steps):
    # dlambda/dt = -lambda / tau, classical fourth order
    lam = np.array(lam0, dtype=float)
    out = [lam.copy()]
    rate = -1.0 / tau
    for _ in range(steps):
        k1 = rate * lam
        k2 = rate * (lam + 0.5 * h * k1)
        k3 = rate * (lam + 0.5 * h * k2)
        k4 = rate * (lam + h * k3)
        lam = lam + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(lam.copy())
    return out


def integrate_flow(chart, rho0, params, return_lambdas=False):
    """Integrate the steepest-descent flow from `rho0` towards ``chart.reference``.

    Works in Lagrange coordinates of `chart`, where the flow is
    ``dlambda/dt = -lambda / tau``, and maps back to states at every sample
    time of ``params.times()``.
    """
    lam0 = lambda_from_state(chart, rho0)
    steps = int(params.steps)
    lams = _rk4_linear(lam0, params.tau, params.t_max / steps, steps)
    states = [state_from_lambda(chart, lam)[0] for lam in lams]
    if return_lambdas:
        return states, np.array(lams)
    return states


def _g_expect(traj, t):
    # <G> at parameter t without building a validated state
    w, u = np.linalg.eigh(traj._log_base + t * traj.generator)
    p = np.exp(w - w[-1])
    p /= p.sum()
    diag = np.einsum("ki,kl,li->i", u.conj(), traj.generator, u).real
    return float(p @ diag)


def match_expectation(traj, target_g):
    """Locate the point of the curve where ``<G>`` equals `target_g`.

    ``<G>`` is strictly increasing in ``t`` (its derivative is the BKM
    variance of ``G``), so the root is unique when it exists.

    Returns
    -------
    t : float
    state : DensityMatrix

    Raises
    ------
    RangeError
        If ``G`` is proportional to the identity, or `target_g` lies outside
        the open interval spanned by the spectrum of ``G`` (or beyond the
        bracket cap).
    """
    target_g = float(target_g)
    w = np.linalg.eigvalsh(traj.generator)
    if w[-1] - w[0] <= 1e-10:
        raise RangeError("generator is proportional to the identity")
    if not w[0] < target_g < w[-1]:
        raise RangeError(
            f"target <G> = {target_g!r} outside the attainable interval ({w[0]!r}, {w[-1]!r})"
        )

    def resid(t):
        return _g_expect(traj, t) - target_g

    r0 = resid(0.0)
    if abs(r0) <= 1e-14 * max(1.0, abs(target_g)):
        return 0.0, traj.base

    cap = BRACKET_CAP / max(w[-1], -w[0])
    lo, hi = -1.0, 1.0
    while True:
        rlo, rhi = resid(max(lo, -cap)), resid(min(hi, cap))
        if rlo <= 0 <= rhi:
            lo, hi = max(lo, -cap), min(hi, cap)
            break
        if lo <= -cap and hi >= cap:
            raise RangeError(f"target <G> = {target_g!r} not bracketed within |t| <= {cap:.3g}")
        lo, hi = 2 * lo, 2 * hi
    t = optimize.brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    state = trajectory_point(traj, t)
    if abs(expectation(state.matrix, traj.generator) - target_g) >= MATCH_TOL:
        raise RangeError(f"could not match <G> = {target_g!r} to {MATCH_TOL}")
    return float(t), state
