"""
JSON and CSV formats for experiments, results, sweeps and likelihood grids.

Complex matrices are encoded as ``{"dim": d, "re": [[...]], "im": [[...]]}``
(row-major). Floats are written with Python's shortest round-trip repr, which
is lossless for IEEE doubles. Every structured file carries a ``version``;
unknown versions are rejected.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .errors import ValidationError
from .estimator import ImageSet, TomographicImage
from .qubit import BlochVector, bloch_to_state
from .states import DensityMatrix, as_hermitian, basis_for
from .synth import RNG_NAME, ContactTimes, ExperimentConfig

EXPERIMENT_VERSION = f"relaxtomo-experiment/1+{RNG_NAME}"
RESULT_VERSION = "relaxtomo-result/1"
CONFIG_VERSION = "relaxtomo-config/1"


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def decode_matrix(obj):
    try:
        d = int(obj["dim"])
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed complex matrix: {exc}") from exc
    if re.shape != (d, d) or im.shape != (d, d):
        raise ValidationError(f"complex matrix entries do not match dim {d}")
    return re + 1j * im


def decode_state(obj):
    if isinstance(obj, dict) and "bloch" in obj:
        return bloch_to_state(BlochVector.from_array(obj["bloch"]))
    return DensityMatrix(decode_matrix(obj))


def dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc


def _check_version(obj, expected):
    if not isinstance(obj, dict):
        raise ValidationError("top-level JSON value must be an object")
    version = obj.get("version")
    if version != expected:
        raise ValidationError(f"unsupported file version {version!r} (expected {expected!r})")


# -- experiment configuration ------------------------------------------------


def config_to_dict(config):
    return {
        "version": CONFIG_VERSION,
        "dim": config.dim,
        "rho0": encode_matrix(config.rho0.matrix),
        "sigma": encode_matrix(config.sigma.matrix),
        "tau": config.tau,
        "runs": config.runs,
        "samples_per_run": config.samples_per_run,
        "contact_times": config.contact_times.to_dict(),
        "noise": config.noise,
        "seed": config.seed,
    }


def config_from_dict(obj, seed=None):
    """Parse a configuration; qubit states may be given as ``{"bloch": [x, y, z]}``."""
    _check_version(obj, CONFIG_VERSION)
    try:
        rho0 = decode_state(obj["rho0"])
        sigma = decode_state(obj["sigma"])
        ct = obj.get("contact_times")
        config = ExperimentConfig(
            rho0=rho0,
            sigma=sigma,
            tau=float(obj.get("tau", 1.0)),
            runs=obj["runs"],
            samples_per_run=obj.get("samples_per_run", 10_000),
            contact_times=ContactTimes.from_dict(ct) if ct is not None else ContactTimes.uniform(0.5, 1.5),
            noise=obj.get("noise", "exact"),
            seed=obj.get("seed", 0) if seed is None else seed,
        )
    except ValidationError:
        raise
    except KeyError as exc:
        raise ValidationError(f"missing configuration field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad configuration value: {exc}") from exc
    if "dim" in obj and int(obj["dim"]) != config.dim:
        raise ValidationError("declared dim does not match the states")
    return config


# -- experiment files ----------------------------------------------------------


def experiment_to_dict(images, ground_truth=None, config=None):
    out = {
        "version": EXPERIMENT_VERSION,
        "basis_id": images.basis.name,
        "dim": images.dim,
        "images": [
            {"state": encode_matrix(im.state.matrix), "n": int(im.sample_size)} for im in images.images
        ],
    }
    if ground_truth is not None:
        gt = {
            "generator": encode_matrix(ground_truth.generator_true),
            "gammas": [float(g) for g in ground_truth.gammas],
        }
        if config is not None:
            gt["config"] = config_to_dict(config)
        out["ground_truth"] = gt
    return out


def experiment_from_dict(obj):
    """Parse an experiment file.

    Returns
    -------
    images : ImageSet
    ground_truth : dict or None
        ``{"generator": ndarray, "gammas": ndarray, "config": dict | None}``.
    """
    _check_version(obj, EXPERIMENT_VERSION)
    try:
        dim = int(obj["dim"])
        basis = basis_for(obj["basis_id"], dim)
        images = ImageSet(
            [TomographicImage(DensityMatrix(decode_matrix(e["state"])), e["n"]) for e in obj["images"]],
            basis,
        )
        gt = obj.get("ground_truth")
        if gt is not None:
            gt = {
                "generator": as_hermitian(decode_matrix(gt["generator"])),
                "gammas": np.array(gt.get("gammas", []), dtype=float),
                "config": gt.get("config"),
            }
    except ValidationError:
        raise
    except KeyError as exc:
        raise ValidationError(f"missing experiment field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad experiment value: {exc}") from exc
    return images, gt


# -- result files --------------------------------------------------------------


def result_to_dict(result, angle_to_truth=None, total_samples=None):
    out = {
        "version": RESULT_VERSION,
        "xi": [float(x) for x in result.xi],
        "generator": encode_matrix(result.generator),
        "center_of_mass": encode_matrix(result.center_of_mass.matrix),
        "top_eigenvalue": float(result.top_eigenvalue),
        "log_likelihood": float(result.log_likelihood),
        "ambiguous": bool(result.ambiguous),
        "spectral_gap": float(result.spectral_gap),
    }
    if total_samples is not None:
        out["total_samples"] = int(total_samples)
    if angle_to_truth is not None:
        out["angle_to_truth"] = float(angle_to_truth)
    return out


def result_from_dict(obj):
    _check_version(obj, RESULT_VERSION)
    out = dict(obj)
    out["xi"] = np.array(obj["xi"], dtype=float)
    out["generator"] = decode_matrix(obj["generator"])
    out["center_of_mass"] = decode_matrix(obj["center_of_mass"])
    return out


# -- CSV -----------------------------------------------------------------------


def fmt(x):
    return format(float(x), ".17g")


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "phi_exact", "phi_approx"])
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def grid_csv(directions, values):
    directions = np.asarray(directions, dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direction_index"] + [f"xi_{b}" for b in range(directions.shape[1])] + ["L"])
    for i, (xi, val) in enumerate(zip(directions, values)):
        w.writerow([i] + [fmt(v) for v in xi] + [fmt(val)])
    return buf.getvalue()


def read_csv(text):
    """Parse one of the CSV outputs into a header and a float array."""
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)
