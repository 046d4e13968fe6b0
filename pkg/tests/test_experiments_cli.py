"""Experiment configuration, delimited output, and the command line."""

import math
import os

import numpy as np
import pytest

from spectrwm.cli import main
from spectrwm.experiments import (
    ConfigError,
    EXPERIMENTS,
    emit_csv,
    parse_config,
    resolve_config,
    run_experiment,
    write_meta,
)


def test_defaults_registry_complete():
    assert set(EXPERIMENTS) == {
        "heat-accuracy",
        "heat-cn-compare",
        "langevin-ergodic",
        "burgers",
        "kpz",
        "holding-scaling",
        "consistency",
    }
    for name, (defaults_fn, _) in EXPERIMENTS.items():
        defaults = defaults_fn()
        assert "seed" in defaults, name


def test_resolve_config_precedence(tmp_path):
    # defaults < environment seed < config file < explicit overrides
    config = tmp_path / "run.cfg"
    config.write_text("experiment = holding-scaling\nseed = 3\nsamples = 500\n")
    resolved = resolve_config(
        "holding-scaling",
        config_path=config,
        overrides={"samples": "700"},
        env={"SPECTRWM_SEED": "9"},
    )
    assert resolved["seed"] == 3  # file beats the environment
    assert resolved["samples"] == 700  # flag beats the file
    resolved = resolve_config("holding-scaling", env={"SPECTRWM_SEED": "9"})
    assert resolved["seed"] == 9
    resolved = resolve_config("holding-scaling", env={})
    assert resolved["seed"] == 0


def test_resolve_config_rejects_unknown_experiment_and_key():
    with pytest.raises(ConfigError):
        resolve_config("heat-death", env={})
    with pytest.raises(ConfigError):
        resolve_config("holding-scaling", overrides={"replicas": "3"}, env={})


def test_parse_config_reports_file_and_line(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("# fine\nsamples = 10\nwat = 3\n")
    defaults = EXPERIMENTS["holding-scaling"][0]()
    with pytest.raises(ConfigError) as exc:
        parse_config(config, defaults, "holding-scaling")
    assert "bad.cfg:3" in str(exc.value)
    assert "wat" in str(exc.value)


def test_parse_config_experiment_mismatch(tmp_path):
    config = tmp_path / "other.cfg"
    config.write_text("experiment = kpz\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(config, EXPERIMENTS["burgers"][0](), "burgers")
    assert "kpz" in str(exc.value)


def test_parse_config_coercion(tmp_path):
    config = tmp_path / "types.cfg"
    config.write_text(
        "h_values = 0.4, 0.2\nn_values = 4,8\nsamples = 250  # trailing comment\nsigma = 2.5\n"
    )
    defaults = EXPERIMENTS["holding-scaling"][0]()
    values = parse_config(config, defaults, "holding-scaling")
    assert values["h_values"] == (0.4, 0.2)
    assert values["n_values"] == (4, 8)
    assert values["samples"] == 250
    assert values["sigma"] == 2.5


def test_parse_config_bad_value_and_shape(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("samples = lots\n")
    with pytest.raises(ConfigError):
        parse_config(config, EXPERIMENTS["holding-scaling"][0](), "holding-scaling")
    config.write_text("just a line\n")
    with pytest.raises(ConfigError):
        parse_config(config, EXPERIMENTS["holding-scaling"][0](), "holding-scaling")


def test_emit_csv_seventeen_digit_round_trip(tmp_path):
    path = tmp_path / "vals.csv"
    values = [math.pi, 0.1, 1.0 / 3.0, 6.25e-4, 1e308]
    emit_csv(path, ["x"], [[v] for v in values])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x"
    parsed = [float(s) for s in lines[1:]]
    assert parsed == values  # bit-exact after the text round trip
    assert path.read_text().endswith("\n")


def test_emit_csv_rejects_fields_needing_quotes(tmp_path):
    with pytest.raises(ValueError):
        emit_csv(tmp_path / "x.csv", ["s"], [["a,b"]])
    with pytest.raises(ValueError):
        emit_csv(tmp_path / "x.csv", ["s"], [["a\nb"]])


def test_write_meta_is_reloadable(tmp_path):
    config = resolve_config("holding-scaling", env={})
    meta = tmp_path / "meta.txt"
    write_meta(meta, "holding-scaling", config, {"note": "checked"})
    again = parse_config(meta, EXPERIMENTS["holding-scaling"][0](), "holding-scaling")
    merged = dict(config)
    merged.update(again)
    assert merged == config


def fast_holding_args(out):
    return ["holding-scaling", "--samples", "2000", "--h-values", "0.2,0.1",
            "--n-values", "8", "--out", str(out)]


def test_cli_runs_and_reruns_byte_identical(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(fast_holding_args(out1)) == 0
    printed = capsys.readouterr().out
    assert "holding-scaling" in printed
    assert str(out1) in printed
    # re-run from the emitted meta file reproduces results byte for byte
    assert main(["holding-scaling", "--config", str(out1 / "meta.txt"), "--out", str(out2)]) == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()


def test_cli_seed_flag_changes_results(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(fast_holding_args(out1)) == 0
    assert main(fast_holding_args(out2) + ["--seed", "1"]) == 0
    assert (out1 / "results.csv").read_bytes() != (out2 / "results.csv").read_bytes()


def test_cli_no_figures_skips_png(tmp_path):
    out = tmp_path / "nofig"
    assert main(fast_holding_args(out) + ["--no-figures"]) == 0
    files = {p.name for p in out.iterdir()}
    assert files == {"results.csv", "meta.txt"}


def test_cli_writes_figures_by_default(tmp_path):
    out = tmp_path / "fig"
    assert main(fast_holding_args(out)) == 0
    files = {p.name for p in out.iterdir()}
    assert "scaling.png" in files
    assert (out / "scaling.png").stat().st_size > 1000


def test_cli_stays_inside_out_dir(tmp_path, monkeypatch):
    workdir = tmp_path / "cwd"
    workdir.mkdir()
    monkeypatch.chdir(workdir)
    out = tmp_path / "only-here"
    assert main(fast_holding_args(out)) == 0
    assert list(workdir.iterdir()) == []


def test_cli_exit_codes_for_usage_errors(tmp_path, capsys):
    assert main([]) == 1
    assert main(["no-such-experiment", "--out", str(tmp_path / "x")]) == 1
    # conflicting positional and flag spellings
    assert main(["kpz", "--experiment", "burgers", "--out", str(tmp_path / "y")]) == 1
    # argparse-level errors are remapped from SystemExit(2) to 1
    assert main(["holding-scaling", "--samples"]) == 1
    capsys.readouterr()


def test_cli_config_error_exits_one(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nope = 1\n")
    assert main(["holding-scaling", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1


def test_cli_experiment_flag_equivalent_to_positional(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(fast_holding_args(out1)) == 0
    args = ["--experiment"] + fast_holding_args(out2)
    assert main(args) == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()


def test_cli_lambda_flag_maps_to_lam(tmp_path):
    out = tmp_path / "lam"
    code = main(
        ["heat-accuracy", "--replicas", "50", "--h-values", "0.4,0.2,0.1",
         "--lambda", "2.0", "--out", str(out)]
    )
    assert code == 0
    assert "lam = 2" in (out / "meta.txt").read_text()


def test_consistency_experiment_slope_gate(tmp_path):
    # At the documented defaults the residual slope is about 2.1; a band
    # that excludes it must flip the exit code to 2.
    out = tmp_path / "c1"
    assert main(["consistency", "--out", str(out), "--no-figures"]) == 0
    meta = (out / "meta.txt").read_text()
    assert "verdict" in meta
    out2 = tmp_path / "c2"
    code = main(
        ["consistency", "--slope-min", "3.0", "--slope-max", "4.0",
         "--out", str(out2), "--no-figures"]
    )
    assert code == 2


def test_run_experiment_records_meta_and_csv(tmp_path):
    config = resolve_config("holding-scaling", overrides={"samples": "1000"}, env={})
    result = run_experiment("holding-scaling", config, tmp_path / "out", figures=False)
    assert result.exit_code == 0
    assert (tmp_path / "out" / "results.csv").exists()
    meta = (tmp_path / "out" / "meta.txt").read_text()
    assert meta.startswith("experiment = holding-scaling\n")
    assert "samples = 1000" in meta


def test_burgers_experiment_verdicts(tmp_path):
    # central stencil stays bounded; one-sided trips the divergence verdict
    out_central = tmp_path / "central"
    assert main(["burgers", "--out", str(out_central), "--no-figures"]) == 0
    central_meta = (out_central / "meta.txt").read_text()
    assert "verdict: BOUNDED" in central_meta
    out_sided = tmp_path / "one-sided"
    assert main(
        ["burgers", "--nonlinearity", "one-sided", "--out", str(out_sided), "--no-figures"]
    ) == 0
    sided_meta = (out_sided / "meta.txt").read_text()
    assert "verdict: DIVERGED" in sided_meta
    # trajectory CSV carries one column per grid point plus time
    header = (out_sided / "results.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "t"
    assert len(header.split(",")) == 13
