"""
Command-line interface.

    relaxtomo generate CONFIG --out EXPERIMENT [--seed S]
    relaxtomo estimate --in EXPERIMENT --out RESULT [--regularize EPS]
    relaxtomo qubit-sweep --points N --out CSV
    relaxtomo likelihood-grid --in EXPERIMENT --directions K --out CSV

Exit codes: 0 success, 2 validation, 3 numerical (boundary or singular),
4 I/O, 5 no preferred direction (all images coincide).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import fileformats as ff
from .errors import NoPreferredDirectionError, NumericalError, ValidationError
from .estimator import likelihood_grid, quasi_uniform_directions, reconstruct
from .qubit import tilting_angle_sweep
from .states import hs_angle
from .synth import generate

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
EXIT_NO_DIRECTION = 5

log = logging.getLogger("relaxtomo")


class _IOFailure(Exception):
    pass


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_generate(args):
    config = ff.config_from_dict(ff.loads(_read(args.config)), seed=args.seed)
    images, truth = generate(config)
    _write(args.out, ff.dumps(ff.experiment_to_dict(images, truth, config)))
    log.info("wrote %d images to %s", len(images), args.out)


def cmd_estimate(args):
    images, truth = ff.experiment_from_dict(ff.loads(_read(args.infile)))
    if args.regularize is not None:
        if not 0 < args.regularize < 1:
            raise ValidationError("--regularize must lie in (0, 1)")
        images = images.mixed(args.regularize)
    result = reconstruct(images)
    if result.ambiguous:
        log.warning(
            "top eigenvalue nearly degenerate (gap %.3g): direction is not identified",
            result.spectral_gap,
        )
    angle = hs_angle(result.generator, truth["generator"]) if truth is not None else None
    _write(args.out, ff.dumps(ff.result_to_dict(result, angle, images.total)))
    if angle is not None:
        log.info("angle to ground truth: %.6g rad", angle)


def cmd_qubit_sweep(args):
    _write(args.out, ff.sweep_csv(tilting_angle_sweep(args.points)))


def cmd_likelihood_grid(args):
    images, _ = ff.experiment_from_dict(ff.loads(_read(args.infile)))
    if args.directions < 1:
        raise ValidationError("--directions must be positive")
    dirs = quasi_uniform_directions(len(images.basis), args.directions)
    values = likelihood_grid(images, dirs)
    _write(args.out, ff.grid_csv(dirs, values))


def build_parser():
    p = argparse.ArgumentParser(
        prog="relaxtomo",
        description="Reconstruct bath-induced relaxation trajectories from tomographic images.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a synthetic experiment")
    g.add_argument("config", help="experiment configuration (JSON)")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=None, help="override the configured seed")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate", help="reconstruct the relaxation direction")
    e.add_argument("--in", dest="infile", required=True)
    e.add_argument("--out", required=True)
    e.add_argument(
        "--regularize",
        type=float,
        default=None,
        metavar="EPS",
        help="mix every image with EPS * I/d before estimating",
    )
    e.set_defaults(func=cmd_estimate)

    q = sub.add_parser("qubit-sweep", help="tabulate the qubit tilting angle")
    q.add_argument("--points", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_qubit_sweep)

    lg = sub.add_parser("likelihood-grid", help="evaluate the likelihood over many directions")
    lg.add_argument("--in", dest="infile", required=True)
    lg.add_argument("--directions", type=int, required=True)
    lg.add_argument("--out", required=True)
    lg.set_defaults(func=cmd_likelihood_grid)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(levelname)s: %(message)s",
    )
    try:
        args.func(args)
    except _IOFailure as exc:
        log.error("%s", exc)
        return EXIT_IO
    except ValidationError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_VALIDATION
    except NoPreferredDirectionError as exc:
        log.error("no preferred direction: %s", exc)
        return EXIT_NO_DIRECTION
    except NumericalError as exc:
        log.error("numerical failure (%s): %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
