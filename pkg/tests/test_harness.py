"""Configuration, emission formats, channel comparison, and the CLI."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from noetherdyn import OptimizerState, RayleighQuotient, step_gd_momentum_wd
from noetherdyn.harness import ExperimentConfig, UsageError, compare_channels
from noetherdyn.harness.cli import main
from noetherdyn.harness.config import build_config, parse_config_file
from noetherdyn.harness.experiments import flagship_run
from noetherdyn.harness.report import Verdict, write_csv, write_svg, write_verdicts


class TestConfig:
    def test_defaults_fill_optional_keys(self):
        cfg = ExperimentConfig(kind="table2")
        assert cfg["samples"] == 16

    def test_missing_required_is_usage_error(self):
        with pytest.raises(UsageError, match="eta"):
            ExperimentConfig(kind="bn-effective-lr", params={"beta": 0.9, "wd": 1e-4})

    def test_unknown_kind_is_usage_error(self):
        with pytest.raises(UsageError):
            ExperimentConfig(kind="frobnicate")

    def test_parse_file_and_flag_precedence(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\neta = 0.1\nbeta = 0.5  # inline\nseed = 3\n")
        values = parse_config_file(path)
        assert values == {"eta": 0.1, "beta": 0.5, "seed": 3}
        cfg = build_config("modified-eq", values, {"beta": 0.25, "eta": None})
        assert cfg["eta"] == 0.1  # None flags do not override
        assert cfg["beta"] == 0.25  # explicit flags win
        assert cfg.seed == 3

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("eta 0.1\n")
        with pytest.raises(UsageError):
            parse_config_file(path)


class TestCompareChannels:
    def test_identical_series_pass_with_zero_deviation(self):
        t = np.linspace(0, 1, 11)
        a = np.sin(t)
        v = compare_channels(t, a, t, a.copy(), 1e-9)
        assert v.passed and v.max_deviation == 0.0

    def test_exactly_tolerance_fails(self):
        t = np.linspace(0, 1, 11)
        a = np.zeros(11)
        b = np.zeros(11)
        b[4] = 0.5
        v = compare_channels(t, a, t, b, 0.5)
        assert not v.passed
        assert v.max_deviation == 0.5
        assert v.argmax_time == pytest.approx(0.4)

    def test_relative_mode(self):
        t = np.linspace(0, 1, 5)
        b = np.full(5, 2.0)
        a = b * 1.01
        v = compare_channels(t, a, t, b, 0.02, mode="relative")
        assert v.passed and v.max_deviation == pytest.approx(0.01)

    def test_window_restriction(self):
        t = np.linspace(0, 1, 11)
        a = np.zeros(11)
        b = np.zeros(11)
        b[0] = 1.0  # outside the window
        v = compare_channels(t, a, t, b, 0.5, window=(0.35, 1.0))
        assert v.passed

    def test_grid_mismatch_is_error(self):
        with pytest.raises(ValueError):
            compare_channels(np.linspace(0, 1, 5), np.zeros(5),
                             np.linspace(0, 2, 5), np.zeros(5), 1.0)


class TestEmission:
    def test_csv_roundtrips_doubles_exactly(self, tmp_path):
        t = np.array([0.0, 1.0 / 3.0, np.pi])
        values = np.array([1e-17, 2.0 / 3.0, 1.2345678901234567e5])
        path = write_csv(tmp_path / "x.csv", t, {"v": values})
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,v"
        parsed = np.array([[float(c) for c in line.split(",")] for line in lines[1:]])
        assert parsed[:, 0].tobytes() == t.tobytes()
        assert parsed[:, 1].tobytes() == values.tobytes()

    def test_csv_rejects_misaligned_channel(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "x.csv", np.zeros(3), {"v": np.zeros(4)})

    def test_svg_is_wellformed_xml(self, tmp_path):
        t = np.linspace(0, 10, 300)
        path = write_svg(tmp_path / "chart.svg", "demo",
                         [("a", t, np.sin(t)), ("b", t, np.cos(t))], ylabel="y")
        root = ET.parse(path).getroot()
        assert root.tag.endswith("svg")
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 2

    def test_verdict_file_format(self, tmp_path):
        verdicts = [Verdict("a.b", True, 0.5, 1.0), Verdict("c.d", False, 2.0, 1.0)]
        path = write_verdicts(tmp_path / "verdict.tsv", verdicts)
        lines = path.read_text().strip().splitlines()
        assert lines[0].split("\t") == ["a.b", "pass", "0.5", "1"]
        assert lines[1].split("\t")[1] == "fail"


def test_flagship_loop_matches_reference_stepper():
    """The inlined flagship update must be bit-identical to the reference
    heavy-ball step function."""
    cfg = ExperimentConfig(kind="bn-effective-lr",
                           params={"eta": 0.01, "beta": 0.9, "wd": 1e-4, "steps": 500},
                           seed=3)
    _, norm_sq, _, _ = flagship_run(cfg)

    dim = cfg["dim"]
    lam = np.concatenate(([1.0], np.linspace(1.01, 1.02, dim - 1)))
    loss = RayleighQuotient(np.diag(lam))
    rng = np.random.default_rng(cfg.seed)
    tangent = rng.standard_normal(dim)
    tangent[0] = 0.0
    tangent /= np.linalg.norm(tangent)
    angle = np.deg2rad(60.0)
    state = OptimizerState.initial(np.cos(angle) * np.eye(dim)[0] + np.sin(angle) * tangent)
    reference = np.empty(cfg["steps"] + 1)
    reference[0] = state.q @ state.q
    for i in range(cfg["steps"]):
        state = step_gd_momentum_wd(state, loss, cfg["eta"], beta=cfg["beta"],
                                    weight_decay=cfg["wd"])
        reference[i + 1] = state.q @ state.q
    assert norm_sq.tobytes() == reference.tobytes()


class TestCli:
    def test_table2_runs_clean(self, tmp_path):
        code = main(["table2", "--seed", "1", "--out", str(tmp_path / "t2")])
        assert code == 0
        assert (tmp_path / "t2" / "table2.csv").exists()
        assert (tmp_path / "t2" / "verdict.tsv").exists()
        assert (tmp_path / "t2" / "manifest.txt").exists()

    def test_missing_required_parameter_exits_2(self, tmp_path):
        assert main(["bn-effective-lr", "--out", str(tmp_path)]) == 2

    def test_unknown_experiment_exits_2(self, tmp_path, capsys):
        assert main(["no-such-thing", "--out", str(tmp_path)]) == 2
        capsys.readouterr()

    def test_missing_config_file_exits_2(self, tmp_path):
        assert main(["table2", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_numerical_abort_exits_3(self, tmp_path):
        # anti-damping drives the entropy-metric trajectories out of domain
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("dt = 0.001\nmu = -6\n")
        assert main(["noether-residual", "--config", str(cfg),
                     "--out", str(tmp_path / "x")]) == 3

    def test_failed_assertion_exits_1(self, tmp_path):
        # a too-coarse step makes the finite-step model lose its 5x margin
        code = main(["modified-eq", "--eta", "0.4", "--beta", "0.0",
                     "--out", str(tmp_path / "fail")])
        assert code == 1
        verdicts = (tmp_path / "fail" / "verdict.tsv").read_text()
        assert "fail" in verdicts

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eta = 0.1\nbeta = 0.5\n")
        out = tmp_path / "run"
        assert main(["modified-eq", "--config", str(cfg), "--beta", "0.3",
                     "--out", str(out)]) == 0
        assert "beta = 0.3" in (out / "manifest.txt").read_text()

    def test_env_var_sets_default_output_root(self, tmp_path, monkeypatch):
        root = tmp_path / "envroot"
        monkeypatch.setenv("NOETHERDYN_OUT", str(root))
        assert main(["table2", "--seed", "2"]) == 0
        assert (root / "verdict.tsv").exists()

    def test_reruns_are_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["rmsprop-equiv", "--eta", "0.01", "--rho", "0.99",
                         "--seed", "5", "--out", str(out)]) == 0
        for csv in sorted(p.name for p in a.glob("*.csv")):
            assert (a / csv).read_bytes() == (b / csv).read_bytes()
