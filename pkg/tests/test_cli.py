import json
import math
import subprocess
import sys

import numpy as np
import pytest

from relaxtomo import fileformats as ff
from relaxtomo.cli import EXIT_IO, EXIT_NO_DIRECTION, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from relaxtomo.estimator import likelihood_grid, quasi_uniform_directions, reconstruct
from relaxtomo.qubit import tilting_angle
from relaxtomo.synth import ContactTimes, ExperimentConfig, generate
from relaxtomo.states import DensityMatrix


def write_config(path, **overrides):
    cfg = {
        "version": ff.CONFIG_VERSION,
        "dim": 2,
        "rho0": {"bloch": [0.6, 0.3, 0.2]},
        "sigma": {"bloch": [0.0, 0.2, -0.5]},
        "tau": 1.0,
        "runs": 6,
        "samples_per_run": 20000,
        "contact_times": {"kind": "uniform", "low": 0.98, "high": 1.02},
        "noise": "exact",
        "seed": 3,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture
def experiment(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    out = tmp_path / "exp.json"
    assert main(["generate", str(cfg), "--out", str(out)]) == EXIT_OK
    return out


def test_generate_byte_identical(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", noise="multinomial")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["generate", str(cfg), "--out", str(a)]) == EXIT_OK
    assert main(["generate", str(cfg), "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.json"
    assert main(["generate", str(cfg), "--out", str(c), "--seed", "4"]) == EXIT_OK
    assert a.read_bytes() != c.read_bytes()


def test_generate_rejects_single_run(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", runs=1)
    assert main(["generate", str(cfg), "--out", str(tmp_path / "x.json")]) == EXIT_VALIDATION
    assert not (tmp_path / "x.json").exists()


def test_generate_zero_contact_time(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", contact_times={"kind": "fixed", "times": [0]})
    out = tmp_path / "exp.json"
    assert main(["generate", str(cfg), "--out", str(out)]) == EXIT_OK
    images, _ = ff.experiment_from_dict(json.loads(out.read_text()))
    rho0 = ff.decode_state({"bloch": [0.6, 0.3, 0.2]}).matrix
    for im in images.images:
        np.testing.assert_allclose(im.state.matrix, rho0, atol=1e-14)


@pytest.mark.parametrize(
    "overrides",
    [{"version": "relaxtomo-config/9"}, {"noise": "loud"}, {"rho0": {"bloch": [1, 1, 1]}}, {"runs": "many"}, {"dim": 3}],
)
def test_generate_invalid_configs(tmp_path, overrides):
    cfg = write_config(tmp_path / "cfg.json", **overrides)
    assert main(["generate", str(cfg), "--out", str(tmp_path / "x.json")]) == EXIT_VALIDATION


def test_generate_boundary_state_is_numerical(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", sigma={"bloch": [0, 0, 1]})
    assert main(["generate", str(cfg), "--out", str(tmp_path / "x.json")]) == EXIT_NUMERICAL


def test_estimate_pipeline(experiment, tmp_path):
    out = tmp_path / "res.json"
    assert main(["estimate", "--in", str(experiment), "--out", str(out)]) == EXIT_OK
    res = ff.result_from_dict(json.loads(out.read_text()))
    assert res["angle_to_truth"] < 0.05
    assert res["log_likelihood"] == pytest.approx(0.5 * res["total_samples"] * res["top_eigenvalue"], rel=1e-12)
    assert res["ambiguous"] is False
    again = tmp_path / "res2.json"
    main(["estimate", "--in", str(experiment), "--out", str(again)])
    assert out.read_bytes() == again.read_bytes()


def test_estimate_diagonal_configuration(tmp_path):
    # images spread along y around a centre of mass at azimuth pi/4
    r = 0.5
    c = r / math.sqrt(2)
    images = [
        {"state": ff.encode_matrix(ff.decode_state({"bloch": [c, c + s, 0.0]}).matrix), "n": 100}
        for s in np.linspace(-1e-4, 1e-4, 5)
    ]
    doc = {"version": ff.EXPERIMENT_VERSION, "basis_id": "pauli", "dim": 2, "images": images}
    (tmp_path / "e.json").write_text(json.dumps(doc))
    assert main(["estimate", "--in", str(tmp_path / "e.json"), "--out", str(tmp_path / "r.json")]) == EXIT_OK
    xi = json.loads((tmp_path / "r.json").read_text())["xi"]
    tilt = math.atan2(abs(xi[0]), abs(xi[1]))
    a, b = 1 / (1 - r * r), math.atanh(r) / r
    assert tilt == pytest.approx(math.atan((a - b) / (a + b)), abs=1e-6)
    # the closed-form angle is larger than what the BKM geometry produces
    assert tilt < tilting_angle(r)


def test_estimate_error_codes(tmp_path, experiment):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["estimate", "--in", str(bad), "--out", str(tmp_path / "r.json")]) == EXIT_VALIDATION
    assert main(["estimate", "--in", str(tmp_path / "missing.json"), "--out", str(tmp_path / "r.json")]) == EXIT_IO
    assert main(["estimate", "--in", str(experiment), "--out", str(tmp_path / "no" / "dir.json")]) == EXIT_IO
    doc = json.loads(experiment.read_text())
    doc["version"] = "relaxtomo-experiment/0"
    bad.write_text(json.dumps(doc))
    assert main(["estimate", "--in", str(bad), "--out", str(tmp_path / "r.json")]) == EXIT_VALIDATION
    assert main(["estimate", "--in", str(experiment), "--out", str(tmp_path / "r.json"), "--regularize", "2"]) == EXIT_VALIDATION


def _pure_experiment(tmp_path, states):
    images = [{"state": ff.encode_matrix(s), "n": 10} for s in states]
    doc = {"version": ff.EXPERIMENT_VERSION, "basis_id": "pauli", "dim": 2, "images": images}
    path = tmp_path / "pure.json"
    path.write_text(json.dumps(doc))
    return path


def test_estimate_boundary_and_regularize(tmp_path):
    path = _pure_experiment(tmp_path, [np.diag([1.0, 0.0]), np.diag([1.0, 0.0])])
    out = str(tmp_path / "r.json")
    assert main(["estimate", "--in", str(path), "--out", out]) == EXIT_NUMERICAL
    # mixing cures the boundary, but identical images still carry no direction
    assert main(["estimate", "--in", str(path), "--out", out, "--regularize", "1e-8"]) == EXIT_NO_DIRECTION


def test_estimate_ambiguity_is_a_warning(tmp_path, caplog):
    states = [(np.eye(2) + s * p) / 2 for s in (0.2, -0.2) for p in (np.diag([1.0, -1.0]), np.array([[0, 1], [1, 0]]))]
    path = _pure_experiment(tmp_path, states)
    assert main(["estimate", "--in", str(path), "--out", str(tmp_path / "r.json")]) == EXIT_OK
    assert json.loads((tmp_path / "r.json").read_text())["ambiguous"] is True
    assert "nearly degenerate" in caplog.text


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["qubit-sweep"])
    assert exc.value.code == EXIT_VALIDATION


def test_qubit_sweep(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["qubit-sweep", "--points", "50", "--out", str(out)]) == EXIT_OK
    header, rows = ff.read_csv(out.read_text())
    assert header == ["r", "phi_exact", "phi_approx"]
    assert rows.shape == (51, 3)
    np.testing.assert_array_equal(rows[0], 0)
    assert rows[-1, 1] == math.pi / 4
    assert np.all(np.diff(rows[:, 1]) > 0)
    np.testing.assert_allclose(rows[:, 2], math.pi / 4 * rows[:, 0] ** 2, rtol=1e-15)
    assert main(["qubit-sweep", "--points", "1", "--out", str(out)]) == EXIT_VALIDATION
    assert main(["qubit-sweep", "--points", "5", "--out", str(tmp_path / "nope" / "s.csv")]) == EXIT_IO


def test_sweep_csv_has_17_digits():
    text = ff.sweep_csv([(0.5, tilting_angle(0.5), math.pi / 16)])
    vals = text.splitlines()[1].split(",")
    assert float(vals[1]) == tilting_angle(0.5)
    assert len(vals[1].replace(".", "").lstrip("0")) == 17


def test_likelihood_grid_cli(experiment, tmp_path):
    out = tmp_path / "g.csv"
    assert main(["likelihood-grid", "--in", str(experiment), "--directions", "200", "--out", str(out)]) == EXIT_OK
    header, rows = ff.read_csv(out.read_text())
    assert header == ["direction_index", "xi_0", "xi_1", "xi_2", "L"]
    np.testing.assert_array_equal(rows[:, 0], np.arange(200))
    images, _ = ff.experiment_from_dict(json.loads(experiment.read_text()))
    res = reconstruct(images)
    assert rows[:, -1].max() <= res.log_likelihood + 1e-9 * images.total
    assert main(["likelihood-grid", "--in", str(experiment), "--directions", "0", "--out", str(out)]) == EXIT_VALIDATION


def test_grid_refinement_is_monotone(experiment):
    images, _ = ff.experiment_from_dict(json.loads(experiment.read_text()))
    res = reconstruct(images)
    vals = likelihood_grid(images, quasi_uniform_directions(3, 1000))
    best = [vals[:k].max() for k in (10, 100, 1000)]
    assert best[0] <= best[1] <= best[2] <= res.log_likelihood + 1e-9 * images.total
    opt = likelihood_grid(images, res.xi[None, :])[0]
    assert opt == pytest.approx(res.log_likelihood, rel=1e-9)


def test_experiment_round_trip(rng):
    cfg = ExperimentConfig(
        DensityMatrix(np.diag([0.5, 0.3, 0.2])),
        DensityMatrix.maximally_mixed(3),
        runs=4,
        samples_per_run=900,
        contact_times=ContactTimes.exponential(0.7),
        noise="multinomial",
        seed=11,
    )
    images, truth = generate(cfg)
    text = ff.dumps(ff.experiment_to_dict(images, truth, cfg))
    back, gt = ff.experiment_from_dict(ff.loads(text))
    assert back.basis.name == "gell_mann"
    for a, b in zip(images.images, back.images):
        np.testing.assert_array_equal(a.state.matrix, b.state.matrix)
        assert a.sample_size == b.sample_size
    np.testing.assert_array_equal(gt["gammas"], truth.gammas)
    np.testing.assert_array_equal(gt["generator"], truth.generator_true)
    cfg2 = ff.config_from_dict(gt["config"])
    assert ff.config_to_dict(cfg2) == gt["config"]
    assert ff.dumps(ff.experiment_to_dict(back, None)) == ff.dumps(ff.experiment_to_dict(images, None))


def test_result_round_trip(experiment):
    images, _ = ff.experiment_from_dict(json.loads(experiment.read_text()))
    res = reconstruct(images)
    doc = ff.loads(ff.dumps(ff.result_to_dict(res, 0.01, images.total)))
    back = ff.result_from_dict(doc)
    np.testing.assert_array_equal(back["xi"], res.xi)
    np.testing.assert_array_equal(back["generator"], res.generator)
    assert back["log_likelihood"] == res.log_likelihood


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "relaxtomo", "qubit-sweep", "--points", "4", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("r,phi_exact,phi_approx\n")
