"""Named experiments with reproducible delimited output and figures.

Every experiment writes results.csv and meta.txt into the output
directory, plus a PNG figure unless figures are disabled.  meta.txt
holds the fully resolved configuration in the same key=value format the
--config option reads, so a finished run can be repeated verbatim;
version and outcome lines ride along as comments.  results.csv is
byte-identical across runs with the same configuration and seed.
"""

from __future__ import annotations

import math
import os
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np

import spectrwm
from spectrwm.baselines import CnConfig, PcnConfig, cn_step, run_chain
from spectrwm.estimators import (
    DivergenceMonitor,
    DivergenceReached,
    QUADRATIC_SLOPE_RANGE,
    TrajectoryRecorder,
    convergence_study,
    holding_time_study,
    monte_carlo_run,
)
from spectrwm.jump_kernel import (
    StepBudgetError,
    StiffnessError,
    Variant,
    simulate,
)
from spectrwm.oracles import (
    LangevinTarget,
    QuadraticTestFunction,
    generator_residual,
    ou_physical_second_moment,
    semidiscrete_ou_moments,
)
from spectrwm.rng import replica_stream
from spectrwm.semidiscretization import (
    InitialCondition,
    ModelKind,
    ModelSpec,
    Nonlinearity,
    build_grid,
    eigenbasis,
    initial_condition,
    to_spectral,
)


class ConfigError(ValueError):
    """Raised for unusable configuration files or values."""


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    exit_code: int
    summary: str
    out_dir: Path


def _heat_defaults():
    return {
        "n": 16,
        "h_values": (0.2, 0.1, 0.05),
        "replicas": 10_000,
        "seed": 0,
        "horizon": 1.0,
        "sigma": 1.0,
        "lam": 1.0,
        "variant": "academic",
        "ic": "sinusoid",
        "ic_amplitude": 1.0,
        "slope_min": 1.6,
        "slope_max": 2.4,
    }


def _cn_compare_defaults():
    return {
        "cn_n": 101,
        "n": 11,
        "h": 0.1,
        "replicas": 1_000,
        "seed": 0,
        "horizon": 1.0,
        "sigma": 1.0,
        "lam": 0.0,
        "variant": "fast",
        "ic": "high_frequency",
        "ic_amplitude": 1.0,
    }


def _langevin_defaults():
    return {
        "n": 20,
        "h": 0.0,  # 0 means: use sqrt(dx)
        "replicas": 10,
        "seed": 0,
        "horizon": 200.0,
        "sigma": 1.0,
        "variant": "detailed-balance",
        "pcn_steps": 200_000,
        "pcn_rho": 0.9,
        "pcn_eps": 0.01,
        "pcn_burn_fraction": 0.2,
    }


def _burgers_defaults():
    return {
        "n": 12,
        "h": 0.1,
        "seed": 0,
        "horizon": 1.0,
        "sigma": 1.0,
        "nu": 1.0,
        "variant": "academic",
        "nonlinearity": "central",
        "ic": "bump",
        "ic_amplitude": 5.0,
        "snapshots": 64,
        "stop_level": 1.0e3,
    }


def _kpz_defaults():
    return {
        "n": 12,
        "h": 0.1,
        "seed": 0,
        "horizon": 1.0,
        "sigma": 1.0,
        "lam": 1.0,
        "variant": "academic",
        "nonlinearity": "central",
        "ic": "sinusoid",
        "ic_amplitude": 5.0,
        "snapshots": 64,
        "stop_level": 1.0e3,
    }


def _holding_defaults():
    return {
        "h_values": (0.05, 0.1, 0.2),
        "n_values": (8, 16, 32),
        "samples": 200_000,
        "seed": 0,
        "sigma": 1.0,
    }


def _consistency_defaults():
    return {
        "n": 8,
        "seed": 0,
        "h_values": (0.2, 0.1, 0.05, 0.025),
        "functions": 5,
        "states": 5,
        "sigma": 1.0,
        "lam": 1.0,
        "slope_min": QUADRATIC_SLOPE_RANGE[0],
        "slope_max": QUADRATIC_SLOPE_RANGE[1],
    }


def _coerce(key: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, tuple):
            parts = [p for p in raw.split(",") if p.strip()]
            kind = type(default[0])
            return tuple(kind(p) for p in parts)
        if isinstance(default, bool):
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError as err:
        raise ConfigError("cannot parse value %r for key %r" % (raw, key)) from err


def parse_config(path, defaults: dict, experiment: str) -> dict:
    """Read key = value lines; # starts a comment, unknown keys are errors."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("%s:%d: expected key = value, got %r" % (path, lineno, line))
        key, raw = body.split("=", 1)
        key = key.strip()
        if key == "experiment":
            if raw.strip() != experiment:
                raise ConfigError(
                    "%s:%d: config is for experiment %r, not %r"
                    % (path, lineno, raw.strip(), experiment)
                )
            continue
        if key not in defaults:
            raise ConfigError(
                "%s:%d: unknown key %r for experiment %r" % (path, lineno, key, experiment)
            )
        values[key] = _coerce(key, raw, defaults[key])
    return values


def resolve_config(
    experiment: str,
    config_path=None,
    overrides: dict | None = None,
    env: dict | None = None,
) -> dict:
    """Layer defaults, SPECTRWM_SEED, the config file, then flag overrides."""
    if experiment not in EXPERIMENTS:
        raise ConfigError("unknown experiment %r" % experiment)
    defaults = EXPERIMENTS[experiment][0]()
    resolved = dict(defaults)
    env = os.environ if env is None else env
    env_seed = env.get("SPECTRWM_SEED")
    if env_seed is not None and "seed" in resolved:
        resolved["seed"] = _coerce("seed", env_seed, defaults["seed"])
    if config_path is not None:
        resolved.update(parse_config(config_path, defaults, experiment))
    for key, raw in (overrides or {}).items():
        if key not in defaults:
            raise ConfigError("unknown key %r for experiment %r" % (key, experiment))
        resolved[key] = _coerce(key, raw, defaults[key]) if isinstance(raw, str) else raw
    return resolved


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def emit_csv(path, header, rows) -> None:
    """Write delimited output: header line, %.17g floats, newline-terminated."""
    lines = [",".join(header)]
    for row in rows:
        fields = []
        for value in row:
            if isinstance(value, (float, np.floating)):
                fields.append("%.17g" % value)
            else:
                text = str(value)
                if "," in text or "\n" in text:
                    raise ValueError("field %r needs quoting, which %s does not use" % (text, path))
                fields.append(text)
        lines.append(",".join(fields))
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as err:
        raise RuntimeError("cannot write %s: %s" % (path, err)) from err


def write_meta(path, experiment: str, config: dict, notes: dict) -> None:
    """Resolved configuration, re-runnable as a --config file."""
    lines = ["experiment = %s" % experiment]
    for key in sorted(config):
        lines.append("%s = %s" % (key, _format_value(config[key])))
    lines.append("# spectrwm %s" % spectrwm.__version__)
    lines.append("# numpy %s" % np.__version__)
    lines.append("# python %s" % platform.python_version())
    for key in sorted(notes):
        lines.append("# %s: %s" % (key, notes[key]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _figure_path(out_dir: Path, name: str) -> Path:
    return out_dir / name


def _plot(figures: bool):
    if not figures:
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _model_variant(raw: str) -> Variant:
    try:
        return Variant(raw)
    except ValueError as err:
        raise ConfigError("unknown variant %r" % raw) from err


def _stencil(raw: str) -> Nonlinearity:
    try:
        return Nonlinearity(raw.replace("_", "-"))
    except ValueError as err:
        raise ConfigError("unknown nonlinearity %r" % raw) from err


def run_heat_accuracy(config: dict, out_dir: Path, figures: bool):
    grid = build_grid(config["n"])
    model = ModelSpec(
        kind=ModelKind.HEAT,
        sigma=config["sigma"],
        lam=config["lam"],
        initial_condition=InitialCondition(config["ic"], amplitude=config["ic_amplitude"]),
    )
    basis = eigenbasis(grid, model)
    ic = initial_condition(model, grid)
    mean, variance = semidiscrete_ou_moments(
        config["horizon"], grid, basis, model.sigma, ic, model=model
    )
    oracle = float(np.mean(ou_physical_second_moment(basis, mean, variance)))
    report = convergence_study(
        model,
        grid,
        _model_variant(config["variant"]),
        config["h_values"],
        config["horizon"],
        lambda v: np.mean(v**2, axis=-1),
        oracle,
        config["replicas"],
        config["seed"],
        basis=basis,
    )
    emit_csv(
        out_dir / "results.csv",
        ("h", "n", "estimate", "stderr", "oracle", "abs_error"),
        [(r.h, r.n, r.estimate, r.stderr, r.oracle, r.abs_error) for r in report.rows],
    )
    plt = _plot(figures)
    if plt is not None:
        fig, ax = plt.subplots(figsize=(5, 4))
        hs = [r.h for r in report.rows]
        ax.loglog(hs, [r.abs_error for r in report.rows], "o-", label="|error|")
        ax.loglog(hs, [3 * r.stderr for r in report.rows], "s--", label="3 stderr floor")
        ref = [report.rows[0].abs_error * (h / hs[0]) ** 2 for h in hs]
        ax.loglog(hs, ref, ":", color="gray", label="slope 2 guide")
        ax.set_xlabel("jump size h")
        ax.set_ylabel("absolute error")
        ax.legend()
        fig.tight_layout()
        fig.savefig(_figure_path(out_dir, "convergence.png"), dpi=120)
        plt.close(fig)
    notes = {
        "oracle": "%.17g" % oracle,
        "slope": "inconclusive" if report.slope is None else "%.6g" % report.slope,
        "rows_in_fit": "".join("1" if u else "0" for u in report.used),
    }
    if report.inconclusive:
        notes["verdict"] = "inconclusive: all errors inside the noise floor"
        return 0, "slope inconclusive (noise floor)", notes
    ok = config["slope_min"] <= report.slope <= config["slope_max"]
    notes["verdict"] = "slope %.4g %s [%g, %g]" % (
        report.slope,
        "inside" if ok else "OUTSIDE",
        config["slope_min"],
        config["slope_max"],
    )
    return (0 if ok else 2), notes["verdict"], notes


def run_heat_cn_compare(config: dict, out_dir: Path, figures: bool):
    rows = []
    # reference scheme on its own fine grid, noise-free
    cn = CnConfig(n=config["cn_n"], dt=2.0 * math.pi / config["cn_n"],
                  sigma=config["sigma"], lam=config["lam"])
    steps = round(config["horizon"] / cn.dt)
    elapsed = steps * cn.dt
    ic_model = ModelSpec(
        kind=ModelKind.HEAT, sigma=config["sigma"], lam=config["lam"],
        initial_condition=InitialCondition(config["ic"], amplitude=config["ic_amplitude"]),
    )
    u = initial_condition(ic_model, cn.grid)
    coeffs0 = to_spectral(cn.basis, u)
    for _ in range(steps):
        u = cn_step(u, cn)
    coeffs_end = to_spectral(cn.basis, u)
    exact = np.exp(cn.basis.eigenvalues * elapsed) * coeffs0
    for k in range(cn.grid.n):
        ratio = coeffs_end[k] / exact[k] if exact[k] != 0.0 else float("nan")
        rows.append(("cn", k, cn.basis.wavenumbers[k], exact[k], coeffs_end[k], 0.0, ratio))

    # jump process on its own coarse grid
    grid = build_grid(config["n"])
    basis = eigenbasis(grid, ic_model)
    ic = initial_condition(ic_model, grid)
    coeffs0 = to_spectral(basis, ic)
    result = monte_carlo_run(
        ic_model,
        grid,
        _model_variant(config["variant"]),
        config["h"],
        config["horizon"],
        config["replicas"],
        config["seed"],
        fixed_observable=lambda v: to_spectral(basis, v),
        basis=basis,
    )
    exact = np.exp(basis.eigenvalues * config["horizon"]) * coeffs0
    for k in range(grid.n):
        observed = float(result.fixed.estimate[k])
        err = float(result.fixed.stderr[k])
        ratio = observed / exact[k] if exact[k] != 0.0 else float("nan")
        rows.append(("spectrwm", k, basis.wavenumbers[k], exact[k], observed, err, ratio))

    emit_csv(
        out_dir / "results.csv",
        ("method", "mode", "wavenumber", "exact", "observed", "stderr", "ratio"),
        rows,
    )
    plt = _plot(figures)
    if plt is not None:
        fig, ax = plt.subplots(figsize=(6, 4))
        for method, marker in (("cn", "o"), ("spectrwm", "s")):
            sel = [r for r in rows if r[0] == method and r[3] != 0.0 and r[6] != 0.0]
            ax.plot(
                [r[2] for r in sel],
                [math.log10(abs(r[6])) for r in sel],
                marker,
                linestyle="none",
                label="%s" % method,
            )
        ax.axhline(0.0, color="gray", linestyle=":")
        ax.set_xlabel("wavenumber")
        ax.set_ylabel("log10 |observed / exact decay|")
        ax.legend()
        fig.tight_layout()
        fig.savefig(_figure_path(out_dir, "comparison.png"), dpi=120)
        plt.close(fig)
    notes = {"cn_steps": str(steps), "cn_elapsed": "%.17g" % elapsed}
    return 0, "wrote %d mode rows" % len(rows), notes


def run_langevin_ergodic(config: dict, out_dir: Path, figures: bool):
    grid = build_grid(config["n"])
    model = ModelSpec(
        kind=ModelKind.LANGEVIN,
        sigma=config["sigma"],
        initial_condition=InitialCondition("trivial"),
    )
    basis = eigenbasis(grid, model)
    target = LangevinTarget.for_model(model, grid, basis)
    h = config["h"] if config["h"] > 0.0 else math.sqrt(grid.dx)
    horizon = config["horizon"]
    result = monte_carlo_run(
        model,
        grid,
        _model_variant(config["variant"]),
        h,
        horizon,
        config["replicas"],
        config["seed"],
        path_observable=lambda v: np.concatenate((v, v**2), axis=-1),
        target=target,
        basis=basis,
    )
    mean_avg = result.path.estimate[: grid.n] / horizon
    mean_err = result.path.stderr[: grid.n] / horizon
    second_avg = result.path.estimate[grid.n :] / horizon
    second_err = result.path.stderr[grid.n :] / horizon

    chain_rng = np.random.default_rng(config["seed"])
    pcn = PcnConfig(target=target, rho=config["pcn_rho"], eps=config["pcn_eps"])
    burn = int(config["pcn_burn_fraction"] * config["pcn_steps"])
    chain = run_chain(
        np.zeros(grid.n),
        config["pcn_steps"],
        burn,
        pcn,
        chain_rng,
        {"mean": lambda v: v, "second": lambda v: v**2},
    )
    bench_mean = chain.accumulators["mean"].mean
    bench_second = chain.accumulators["second"].mean

    emit_csv(
        out_dir / "results.csv",
        ("component", "mean", "stderr", "second_moment", "stderr2",
         "benchmark_mean", "benchmark_second"),
        [
            (j, mean_avg[j], mean_err[j], second_avg[j], second_err[j],
             bench_mean[j], bench_second[j])
            for j in range(grid.n)
        ],
    )
    plt = _plot(figures)
    if plt is not None:
        fig, ax = plt.subplots(figsize=(6, 4))
        x = np.arange(grid.n)
        ax.errorbar(x, second_avg, yerr=3 * second_err, fmt="o",
                    label="time average, 3 stderr")
        ax.plot(x, bench_second, "s--", label="chain benchmark")
        ax.set_xlabel("grid component")
        ax.set_ylabel("second moment")
        ax.legend()
        fig.tight_layout()
        fig.savefig(_figure_path(out_dir, "moments.png"), dpi=120)
        plt.close(fig)
    gap = np.abs(second_avg - bench_second)
    notes = {
        "h": "%.17g" % h,
        "pcn_acceptance": "%.4f" % chain.acceptance_rate,
        "max_second_moment_gap": "%.6g" % float(gap.max()),
    }
    return 0, "max second-moment gap %.3g" % float(gap.max()), notes


def _run_trajectory(config: dict, out_dir: Path, figures: bool, kind: ModelKind):
    grid = build_grid(config["n"])
    model = ModelSpec(
        kind=kind,
        sigma=config["sigma"],
        lam=config.get("lam", 0.0),
        nu=config.get("nu", 1.0),
        nonlinearity=_stencil(config["nonlinearity"]),
        initial_condition=InitialCondition(config["ic"], amplitude=config["ic_amplitude"]),
    )
    basis = eigenbasis(grid, model)
    times = np.linspace(0.0, config["horizon"], config["snapshots"])
    recorder = TrajectoryRecorder(times)
    monitor = DivergenceMonitor(stop_at=config["stop_level"])
    verdict, route = "BOUNDED", "completed"
    try:
        simulate(
            initial_condition(model, grid),
            _model_variant(config["variant"]),
            model,
            grid,
            basis,
            config["h"],
            config["horizon"],
            replica_stream(config["seed"], 0),
            observers=(recorder, monitor),
        )
    except (StiffnessError, StepBudgetError, DivergenceReached) as err:
        verdict, route = "DIVERGED", type(err).__name__
    if monitor.exceeds(config["stop_level"]):
        verdict = "DIVERGED"

    header = ("t",) + tuple("x_%d" % j for j in range(grid.n))
    rows = [
        (t,) + tuple(snap)
        for t, snap in zip(recorder.recorded_times(), recorder.snapshots)
    ]
    emit_csv(out_dir / "results.csv", header, rows)
    plt = _plot(figures)
    if plt is not None and rows:
        fig, ax = plt.subplots(figsize=(6, 4))
        data = np.array([snap for snap in recorder.snapshots])
        span = min(float(np.abs(data).max()), config["stop_level"])
        im = ax.imshow(
            data.T,
            aspect="auto",
            origin="lower",
            extent=(0.0, float(recorder.recorded_times()[-1]), 0.0, 2.0 * math.pi),
            cmap="RdBu_r",
            vmin=-span,
            vmax=span,
        )
        fig.colorbar(im, ax=ax, label="u(t, x)")
        ax.set_xlabel("t")
        ax.set_ylabel("x")
        ax.set_title("%s, %s stencil: %s" % (kind.value, config["nonlinearity"], verdict))
        fig.tight_layout()
        fig.savefig(_figure_path(out_dir, "trajectory.png"), dpi=120)
        plt.close(fig)
    notes = {
        "verdict": verdict,
        "route": route,
        "peak_abs": "%.6g" % monitor.max_abs,
        "peak_abs_mean": "%.6g" % monitor.max_abs_mean,
        "snapshots_recorded": str(len(rows)),
    }
    return 0, "%s (%s)" % (verdict, route), notes


def run_burgers(config: dict, out_dir: Path, figures: bool):
    return _run_trajectory(config, out_dir, figures, ModelKind.BURGERS)


def run_kpz(config: dict, out_dir: Path, figures: bool):
    return _run_trajectory(config, out_dir, figures, ModelKind.KPZ)


def run_holding_scaling(config: dict, out_dir: Path, figures: bool):
    model = ModelSpec(kind=ModelKind.HEAT, sigma=config["sigma"])
    rows = []
    for variant in (Variant.ACADEMIC, Variant.FAST):
        rows.extend(
            holding_time_study(
                model, variant, config["h_values"], config["n_values"],
                config["samples"], config["seed"],
            )
        )
    emit_csv(
        out_dir / "results.csv",
        ("variant", "h", "n", "empirical_mean_dt", "analytic_mean_dt", "stderr"),
        [
            (r.variant, r.h, r.n, r.empirical_mean, r.analytic_mean, r.stderr)
            for r in rows
        ],
    )
    plt = _plot(figures)
    if plt is not None:
        fig, ax = plt.subplots(figsize=(6, 4))
        for variant, marker in (("academic", "o"), ("fast", "s")):
            for n in config["n_values"]:
                sel = [r for r in rows if r.variant == variant and r.n == n]
                ax.loglog(
                    [r.h for r in sel],
                    [r.empirical_mean for r in sel],
                    marker + "-",
                    label="%s n=%d" % (variant, n),
                )
        ax.set_xlabel("jump size h")
        ax.set_ylabel("mean holding time")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(_figure_path(out_dir, "scaling.png"), dpi=120)
        plt.close(fig)
    worst = max(
        abs(r.empirical_mean - r.analytic_mean) / r.stderr for r in rows if r.stderr > 0
    )
    notes = {"worst_z_score": "%.3f" % worst}
    return 0, "worst |z| %.2f over %d cells" % (worst, len(rows)), notes


def run_consistency(config: dict, out_dir: Path, figures: bool):
    grid = build_grid(config["n"])
    model = ModelSpec(kind=ModelKind.HEAT, sigma=config["sigma"], lam=config["lam"])
    basis = eigenbasis(grid, model)
    rng = np.random.default_rng(config["seed"])
    cases = []
    for _ in range(config["functions"]):
        a = rng.normal(size=(grid.n, grid.n))
        a = 0.5 * (a + a.T)
        b = rng.normal(size=grid.n)
        f = QuadraticTestFunction(a=a, b=b)
        for _ in range(config["states"]):
            cases.append((f, rng.normal(size=grid.n)))
    h_values = sorted(config["h_values"], reverse=True)
    table = np.array(
        [
            [generator_residual(f, v, model, grid, basis, h) for f, v in cases]
            for h in h_values
        ]
    )
    means = table.mean(axis=1)
    emit_csv(
        out_dir / "results.csv",
        ("h", "mean_residual", "min_residual", "max_residual"),
        [
            (h, means[i], table[i].min(), table[i].max())
            for i, h in enumerate(h_values)
        ],
    )
    slope = float(np.polyfit(np.log(h_values), np.log(means), 1)[0])
    plt = _plot(figures)
    if plt is not None:
        fig, ax = plt.subplots(figsize=(5, 4))
        for j in range(table.shape[1]):
            ax.loglog(h_values, table[:, j], color="lightgray", linewidth=0.6)
        ax.loglog(h_values, means, "o-", label="mean residual, slope %.3f" % slope)
        ax.set_xlabel("jump size h")
        ax.set_ylabel("generator residual")
        ax.legend()
        fig.tight_layout()
        fig.savefig(_figure_path(out_dir, "residuals.png"), dpi=120)
        plt.close(fig)
    ok = config["slope_min"] <= slope <= config["slope_max"]
    notes = {
        "slope": "%.6g" % slope,
        "verdict": "slope %.4g %s [%g, %g]"
        % (slope, "inside" if ok else "OUTSIDE", config["slope_min"], config["slope_max"]),
    }
    return (0 if ok else 2), notes["verdict"], notes


EXPERIMENTS = {
    "heat-accuracy": (_heat_defaults, run_heat_accuracy),
    "heat-cn-compare": (_cn_compare_defaults, run_heat_cn_compare),
    "langevin-ergodic": (_langevin_defaults, run_langevin_ergodic),
    "burgers": (_burgers_defaults, run_burgers),
    "kpz": (_kpz_defaults, run_kpz),
    "holding-scaling": (_holding_defaults, run_holding_scaling),
    "consistency": (_consistency_defaults, run_consistency),
}


def run_experiment(
    experiment: str, config: dict, out_dir, figures: bool = True
) -> ExperimentResult:
    """Run one named experiment, writing results.csv, meta.txt, and figures."""
    if experiment not in EXPERIMENTS:
        raise ConfigError("unknown experiment %r" % experiment)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = EXPERIMENTS[experiment][1]
    exit_code, summary, notes = runner(config, out, figures)
    write_meta(out / "meta.txt", experiment, config, notes)
    return ExperimentResult(
        name=experiment, exit_code=exit_code, summary=summary, out_dir=out
    )
