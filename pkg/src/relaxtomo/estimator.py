"""
Maximum-likelihood reconstruction of a relaxation trajectory from tomographic images.

Images spread along an unknown steepest-descent curve are summarized by their
weighted centre of mass ``mu_bar`` and the covariance ``Gamma`` of their
expectation values. The asymptotic log-likelihood

    L(xi, sigma) = (N/2) [ <Gamma>_xi - dfᵀ C^-1 df ]

is maximized by the dominant generalized eigenvector of ``Gamma v = theta C v``
(``C`` the BKM matrix at ``mu_bar``) together with any curve through
``mu_bar``, which makes ``df`` vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
import warnings
from typing import Sequence

import numpy as np
from scipy import linalg, special
from scipy.stats import qmc

from .errors import (
    DimensionMismatchError,
    NoPreferredDirectionError,
    SingularMatrixError,
    ValidationError,
)
from .geometry import bkm_matrix, f_from_state
from .states import DensityMatrix, ObservableBasis, expectation
from .trajectory import Trajectory, match_expectation

#: Relative spectral gap under which the top direction is flagged as ambiguous.
AMBIGUITY_GAP = 1e-9
SIGN_THRESHOLD = 1e-9


@dataclass(frozen=True)
class TomographicImage:
    state: DensityMatrix
    sample_size: int

    def __post_init__(self):
        if int(self.sample_size) != self.sample_size or self.sample_size < 1:
            raise ValidationError(f"sample size must be a positive integer, got {self.sample_size!r}")


class ImageSet:
    """Tomographic images from several runs, with weights ``w_i = N_i / N``."""

    def __init__(self, images: Sequence[TomographicImage], basis: ObservableBasis):
        images = tuple(images)
        if len(images) < 2:
            raise ValidationError("at least two tomographic images are required")
        for im in images:
            if im.state.dim != basis.dim:
                raise DimensionMismatchError("image and basis dimensions differ")
        self.images = images
        self.basis = basis

    @classmethod
    def from_states(cls, states, sample_sizes, basis):
        if np.ndim(sample_sizes) == 0:
            sample_sizes = [sample_sizes] * len(states)
        return cls([TomographicImage(s, int(n)) for s, n in zip(states, sample_sizes, strict=True)], basis)

    def __len__(self):
        return len(self.images)

    @property
    def dim(self):
        return self.basis.dim

    @property
    def total(self):
        return sum(int(im.sample_size) for im in self.images)

    @property
    def weights(self):
        n = np.array([im.sample_size for im in self.images], dtype=float)
        return n / n.sum()

    def coordinates(self):
        """Expectation values ``f_b^i``, one row per image."""
        return np.array([f_from_state(self.basis, im.state) for im in self.images])

    def mixed(self, eps):
        """Every image replaced by ``(1 - eps) mu_i + eps I/d``."""
        return ImageSet(
            [TomographicImage(im.state.mix(eps), im.sample_size) for im in self.images],
            self.basis,
        )


@dataclass(frozen=True)
class Direction:
    """Dominant generalized eigenvector and its spectral context."""

    xi: np.ndarray
    value: float
    spectral_gap: float
    ambiguous: bool


@dataclass(frozen=True, eq=False)
class EstimateResult:
    xi: np.ndarray
    generator: np.ndarray
    center_of_mass: DensityMatrix
    constraint: Trajectory
    top_eigenvalue: float
    log_likelihood: float
    spectral_gap: float
    ambiguous: bool
    correlation: np.ndarray
    covariance: np.ndarray


def center_of_mass(images, require_full_rank=True):
    """Weighted mixture ``sum_i w_i mu_i`` of the images."""
    w = images.weights
    m = sum(wi * im.state.matrix for wi, im in zip(w, images.images))
    mu = DensityMatrix(m)
    if require_full_rank:
        mu.require_full_rank("center of mass")
    return mu


def covariance_matrix(images):
    """Weighted covariance ``Gamma_ab = sum_i w_i (f_a^i - fbar_a)(f_b^i - fbar_b)``."""
    w = images.weights
    f = images.coordinates()
    # shifted by the first image so that identical images give an exact zero
    dev = f - f[0]
    mean = w @ dev
    gamma = (dev * w[:, None]).T @ dev - np.outer(mean, mean)
    return (gamma + gamma.T) / 2


def rayleigh_quotient(gamma, c, xi):
    """``<Gamma>_xi = (xiᵀ Gamma xi) / (xiᵀ C xi)``."""
    xi = np.asarray(xi, dtype=float)
    return float(xi @ gamma @ xi) / float(xi @ c @ xi)


def _fix_sign(v):
    big = np.flatnonzero(np.abs(v) > SIGN_THRESHOLD)
    if big.size and v[big[0]] < 0:
        return -v
    return v


def dominant_direction(gamma, c):
    """Solve ``Gamma v = theta C v`` for the largest ``theta``.

    The eigenvector is normalized to ``vᵀ C v = 1`` with its first
    significant component positive.
    """
    gamma = np.asarray(gamma, dtype=float)
    c = np.asarray(c, dtype=float)
    if gamma.shape != c.shape or gamma.shape[0] != gamma.shape[1]:
        raise DimensionMismatchError("covariance and correlation matrices must be square and equal-sized")
    if not np.any(gamma):
        raise NoPreferredDirectionError("covariance matrix vanishes")
    try:
        theta, vecs = linalg.eigh(gamma, c)
    except linalg.LinAlgError as exc:
        raise SingularMatrixError("correlation matrix is not positive definite") from exc
    top = theta[-1]
    if not top > 0:
        raise NoPreferredDirectionError("covariance matrix has no positive direction")
    xi = vecs[:, -1]
    xi = xi / np.sqrt(xi @ c @ xi)
    gap = float(top - theta[-2]) if theta.size > 1 else float(top)
    return Direction(
        xi=_fix_sign(xi),
        value=float(top),
        spectral_gap=gap,
        ambiguous=bool(gap < AMBIGUITY_GAP * top),
    )


def generator_from_xi(basis, xi):
    """``G = -xi^b F_b``."""
    return -basis.combine(xi)


class _Stats:
    # quantities shared by every likelihood evaluation on one image set
    def __init__(self, images):
        self.images = images
        self.mu_bar = center_of_mass(images)
        self.f_bar = f_from_state(images.basis, self.mu_bar)
        self.gamma = covariance_matrix(images)
        self.c = bkm_matrix(images.basis, self.mu_bar)
        try:
            self.cho = linalg.cho_factor(self.c)
        except linalg.LinAlgError as exc:
            raise SingularMatrixError("correlation matrix is not positive definite") from exc
        self.total = images.total

    def likelihood(self, xi, sigma):
        xi = np.asarray(xi, dtype=float)
        if not np.any(xi):
            raise ValidationError("xi must be nonzero")
        g = generator_from_xi(self.images.basis, xi)
        # rho(gamma) ∝ exp(ln sigma - gamma G)
        curve = Trajectory(sigma, -g, self.images.basis)
        target = expectation(self.mu_bar.matrix, curve.generator)
        _, pi_bar = match_expectation(curve, target)
        df = f_from_state(self.images.basis, pi_bar) - self.f_bar
        penalty = float(df @ linalg.cho_solve(self.cho, df))
        return 0.5 * self.total * (rayleigh_quotient(self.gamma, self.c, xi) - penalty)


def log_likelihood(images, xi, sigma):
    """Asymptotic log-likelihood of the images given direction `xi` and target `sigma`.

    Additive terms independent of ``(xi, sigma)`` are dropped. ``C`` is the
    BKM matrix at the centre of mass; the comparison state ``pi_bar`` is the
    point of the curve through `sigma` generated by ``G = -xi^b F_b`` with
    ``<G>`` equal to its centre-of-mass value.
    """
    return _Stats(images).likelihood(xi, sigma)


#: Scramble seed of the Sobol sequence behind the direction grids.
GRID_SEED = 20_110_101


def quasi_uniform_directions(n, k):
    """`k` unit vectors in ``R^n`` from a scrambled Sobol sequence.

    Uniform points are pushed through the normal quantile and normalized.
    The first `k` points of a larger grid are exactly the grid of size `k`, so
    refining never drops a direction.
    """
    sampler = qmc.Sobol(d=n, scramble=True, seed=GRID_SEED)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = sampler.random(k)
    g = special.ndtri(np.clip(u, 1e-16, 1 - 1e-16))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def likelihood_grid(images, directions, t_sigma=0.5):
    """Log-likelihood for each row of `directions`, with ``sigma`` on the curve through ``mu_bar``.

    ``sigma`` sits at parameter ``t_sigma / ||G||`` along each direction's
    constraint curve, so ``df`` vanishes row by row.
    """
    stats = _Stats(images)
    out = []
    for xi in np.asarray(directions, dtype=float):
        curve = Trajectory(stats.mu_bar, generator_from_xi(images.basis, xi), images.basis)
        sigma = curve.rebased(t_sigma / curve.spectral_norm).base
        out.append(stats.likelihood(xi, sigma))
    return np.array(out)


def reconstruct(images):
    """Maximum-likelihood relaxation direction and constraint curve.

    Raises
    ------
    BoundaryStateError
        Centre of mass is rank deficient.
    NoPreferredDirectionError
        All images coincide.
    """
    stats = _Stats(images)
    d = dominant_direction(stats.gamma, stats.c)
    g = generator_from_xi(images.basis, d.xi)
    return EstimateResult(
        xi=d.xi,
        generator=g,
        center_of_mass=stats.mu_bar,
        constraint=Trajectory(stats.mu_bar, g, images.basis),
        top_eigenvalue=d.value,
        log_likelihood=0.5 * stats.total * d.value,
        spectral_gap=d.spectral_gap,
        ambiguous=d.ambiguous,
        correlation=stats.c,
        covariance=stats.gamma,
    )
