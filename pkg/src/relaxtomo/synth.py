"""
Synthetic tomography experiments with a known relaxation trajectory.

A source emits ``rho0``; each run touches a bath with equilibrium ``sigma``
for a random contact time ``t_i``, moving the state to

    mu_i ∝ exp[ln sigma - gamma_i (ln sigma - ln rho0)],  gamma_i = exp(-t_i / tau)

and finite-sample tomography then adds shot noise.

Random streams come from ``numpy``'s Philox4x64 counter-based generator.
Contact times use stream ``(0,)`` of ``SeedSequence(seed)``; the tomography of
run ``i`` uses stream ``(1, i)``. Each run is therefore reproducible on its
own, independently of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .estimator import ImageSet, TomographicImage
from .states import BASIS_NORMALIZATION, DensityMatrix, basis_for, matrix_log, traceless_part
from .trajectory import trajectory_from_endpoints, trajectory_point

RNG_NAME = "philox4x64"
#: Mixing weight with I/d applied when a projected estimate is rank deficient.
PROJECTION_EPS = 1e-10
DISTRIBUTIONS = ("uniform", "exponential", "fixed")
NOISE_MODELS = ("exact", "multinomial")


def rng_stream(seed, *key):
    """Philox generator for the sub-stream `key` of `seed`."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


@dataclass(frozen=True)
class ContactTimes:
    """Distribution of bath contact times.

    ``kind`` is ``"uniform"`` (params ``low, high``), ``"exponential"``
    (params ``mean``) or ``"fixed"`` (params: the list of times, cycled over
    the runs).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        p = self.params
        if self.kind == "uniform":
            if len(p) != 2 or not 0 <= p[0] <= p[1]:
                raise ValidationError("uniform contact times need 0 <= low <= high")
        elif self.kind == "exponential":
            if len(p) != 1 or not p[0] > 0:
                raise ValidationError("exponential contact times need a positive mean")
        elif self.kind == "fixed":
            if not p or min(p) < 0:
                raise ValidationError("fixed contact times must be a non-empty list of non-negative values")
        else:
            raise ValidationError(f"unknown contact-time distribution {self.kind!r}")
        if not all(np.isfinite(p)):
            raise ValidationError("contact-time parameters must be finite")

    @classmethod
    def uniform(cls, low, high):
        return cls("uniform", (low, high))

    @classmethod
    def exponential(cls, mean):
        return cls("exponential", (mean,))

    @classmethod
    def fixed(cls, times):
        return cls("fixed", tuple(times))

    def draw(self, runs, rng):
        if self.kind == "uniform":
            return rng.uniform(self.params[0], self.params[1], size=runs)
        if self.kind == "exponential":
            return rng.exponential(self.params[0], size=runs)
        return np.resize(np.array(self.params), runs)

    def to_dict(self):
        if self.kind == "uniform":
            return {"kind": "uniform", "low": self.params[0], "high": self.params[1]}
        if self.kind == "exponential":
            return {"kind": "exponential", "mean": self.params[0]}
        return {"kind": "fixed", "times": list(self.params)}

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        try:
            if kind == "uniform":
                return cls.uniform(d["low"], d["high"])
            if kind == "exponential":
                return cls.exponential(d["mean"])
            if kind == "fixed":
                return cls.fixed(d["times"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad contact-time specification: {d!r}") from exc
        raise ValidationError(f"unknown contact-time distribution {kind!r}")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    rho0: DensityMatrix
    sigma: DensityMatrix
    tau: float = 1.0
    runs: int = 20
    samples_per_run: int = 10_000
    contact_times: ContactTimes = field(default_factory=lambda: ContactTimes.uniform(0.5, 1.5))
    noise: str = "exact"
    seed: int = 0

    def __post_init__(self):
        if self.rho0.dim != self.sigma.dim:
            raise ValidationError("rho0 and sigma dimensions differ")
        self.rho0.require_full_rank("rho0")
        self.sigma.require_full_rank("sigma")
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        if int(self.runs) != self.runs or self.runs < 2:
            raise ValidationError("runs must be an integer >= 2")
        if int(self.samples_per_run) != self.samples_per_run or self.samples_per_run < 1:
            raise ValidationError("samples_per_run must be a positive integer")
        if self.noise not in NOISE_MODELS:
            raise ValidationError(f"noise must be one of {NOISE_MODELS}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")

    @property
    def dim(self):
        return self.rho0.dim

    @property
    def basis_id(self):
        return "pauli" if self.dim == 2 else "gell_mann"

    def basis(self):
        return basis_for(self.basis_id, self.dim)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    generator_true: np.ndarray
    gammas: np.ndarray
    exact_states: list


def project_to_state(m):
    """Nearest-looking physical state: clamp negative eigenvalues, renormalize.

    A rank-deficient result is mixed with ``PROJECTION_EPS * I/d`` so that its
    logarithm exists.
    """
    m = np.asarray(m, dtype=complex)
    m = (m + m.conj().T) / 2
    d = m.shape[0]
    p, u = np.linalg.eigh(m)
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    if p[0] <= PROJECTION_EPS:
        p = (1 - PROJECTION_EPS) * p + PROJECTION_EPS / d
    out = (u * p) @ u.conj().T
    return DensityMatrix(out)


def sample_expectations(rho, basis, n, rng):
    """Shot-noise estimates of ``<F_b>``, each from ``n // len(basis)`` projective measurements.

    Each basis observable is measured in its eigenbasis; the remainder of
    `n` is dropped.
    """
    shots = int(n) // len(basis)
    if shots < 1:
        raise ValidationError(f"{n} samples cannot cover {len(basis)} measurement settings")
    f_hat = np.empty(len(basis))
    for b, obs in enumerate(basis):
        vals, vecs = np.linalg.eigh(obs)
        probs = np.einsum("ki,kl,li->i", vecs.conj(), rho.matrix, vecs).real
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
        counts = rng.multinomial(shots, probs)
        f_hat[b] = counts @ vals / shots
    return f_hat


def simulate_tomography(rho, basis, n, rng):
    """Finite-sample tomography of `rho` followed by linear inversion.

    The estimates of :func:`sample_expectations` are inverted as
    ``I/d + sum_b f_b F_b / 2`` and projected onto the state space.
    """
    f_hat = sample_expectations(rho, basis, n, rng)
    m = np.eye(basis.dim) / basis.dim + basis.combine(f_hat) / BASIS_NORMALIZATION
    return project_to_state(m)


def generate(config):
    """Draw contact times and produce the image set with its ground truth."""
    basis = config.basis()
    times = config.contact_times.draw(config.runs, rng_stream(config.seed, 0))
    gammas = np.exp(-times / config.tau)
    traj = trajectory_from_endpoints(config.rho0, config.sigma, basis)
    exact = [trajectory_point(traj, 1.0 - g) for g in gammas]
    if config.noise == "exact":
        states = exact
    else:
        states = [
            simulate_tomography(s, basis, config.samples_per_run, rng_stream(config.seed, 1, i))
            for i, s in enumerate(exact)
        ]
    images = ImageSet([TomographicImage(s, config.samples_per_run) for s in states], basis)
    g_true = traceless_part(matrix_log(config.sigma) - matrix_log(config.rho0))
    return images, GroundTruth(generator_true=g_true, gammas=gammas, exact_states=exact)
