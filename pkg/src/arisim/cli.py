"""Experiment runner: parameter sweeps, verification reports and phase search.

Each experiment reads one YAML config (a `system` section mirroring
SystemConfig plus per-experiment blocks), runs at the configured scale and
writes CSV files plus a run manifest into the output directory.  Identical
config and seed produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

import numpy as np
import yaml

from . import analytic
from .analytic import closed_form_rates, compute_stats
from .budget import (
    ConfigurationError,
    Mode,
    SystemConfig,
    circuit_power,
    resolve_budget,
    watts_to_dbm,
)
from .channel import STREAM_PHASES, make_geometry, substream
from .ga import GAParams, optimize_phases
from .oracle import estimate_moments, wishart_moment_check
from .transceiver import PhaseConfig, measured_ris_power, monte_carlo_rate

EXPERIMENTS = ("antennas-elements", "total-power", "adc-bits", "verify", "optimize")

ENV_TRIALS = "ARISIM_TRIALS"
ENV_SEED = "ARISIM_SEED"


def load_config(path: str) -> dict:
    with open(path, "r") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict) or "system" not in raw:
        raise ConfigurationError(f"config {path} must contain a 'system' section")
    return raw


def build_system(raw: dict, **overrides) -> SystemConfig:
    """Construct a SystemConfig from the config's system section.

    A scalar `epsilon` is broadcast to all K users; unknown keys are
    rejected so typos fail loudly.
    """
    section = dict(raw["system"])
    section.update({k: v for k, v in overrides.items() if v is not None})
    known = set(SystemConfig.__dataclass_fields__)
    unknown = set(section) - known
    if unknown:
        raise ConfigurationError(f"unknown system config keys: {sorted(unknown)}")
    K = int(section.get("K", SystemConfig.K))
    eps = section.get("epsilon", SystemConfig.epsilon)
    if isinstance(eps, (int, float)):
        section["epsilon"] = (float(eps),) * K
    else:
        section["epsilon"] = tuple(float(e) for e in eps)
    for key in ("bs_pos", "ris_pos", "user_center"):
        if key in section:
            section[key] = tuple(section[key])
    return SystemConfig(**section)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _resize(cfg: SystemConfig, **kw) -> SystemConfig:
    """Replace dimensions, keeping epsilon consistent with K."""
    if "K" in kw and kw["K"] != cfg.K:
        base = cfg.epsilon[0]
        kw.setdefault("epsilon", (base,) * kw["K"])
    return replace(cfg, **kw)


def experiment_phases(cfg: SystemConfig) -> PhaseConfig:
    """Baseline random phases, deterministic per (seed, N)."""
    return PhaseConfig.random(cfg.N, substream(cfg.seed, STREAM_PHASES, cfg.N))


def _point_rates(cfg, geom, phases, mode, trials):
    """(analytic sum rate, MC sum rate, MC stderr, budget) at one sweep point."""
    budget = resolve_budget(cfg, geom.alpha, mode)
    stats = compute_stats(geom, cfg, phases)
    analytic_sum = float(closed_form_rates(stats, budget, cfg).sum())
    report = monte_carlo_rate(geom, cfg, phases, budget, trials=trials)
    return analytic_sum, report.sum_rate, report.sum_std_err, budget


def ga_params(cfg: SystemConfig, block: dict | None = None) -> GAParams:
    block = dict(block or {})
    block.setdefault("seed", cfg.seed)
    return GAParams(**{k: v for k, v in block.items() if k in GAParams.__dataclass_fields__})


def run_antennas_elements(cfg, block, out_dir, trials, optimize, mode):
    m_grid = [int(m) for m in block.get("M_grid", [16, 36, 64, 100, 144])]
    n_grid = [int(n) for n in block.get("N_grid", [4, 16, 36, 64])]
    rows = []
    for M in sorted(m_grid):
        for N in sorted(n_grid):
            point = _resize(cfg, M=M, N=N)
            geom = make_geometry(point)
            phases = experiment_phases(point)
            for point_mode in (Mode.ACTIVE, Mode.PASSIVE):
                a, mc, se, _ = _point_rates(point, geom, phases, point_mode, trials)
                rows.append((M, N, point_mode.value, point.b, a, mc, se, False))
            if optimize:
                budget = resolve_budget(point, geom.alpha, Mode.ACTIVE)
                best, _ = optimize_phases(geom, point, budget, ga_params(point, block.get("ga")))
                a, mc, se, _ = _point_rates(point, geom, best, Mode.ACTIVE, trials)
                rows.append((M, N, Mode.ACTIVE.value, point.b, a, mc, se, True))
    path = os.path.join(out_dir, "antennas_elements.csv")
    write_csv(path, ["M", "N", "mode", "b", "analytic_sum_rate", "mc_sum_rate",
                     "mc_stderr", "optimized"], rows)
    return [path]


def run_total_power(cfg, block, out_dir, trials, optimize, mode):
    n_elements = int(block.get("N", 128))
    grid = block.get("P_T_dbm_grid",
                     [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30])
    cfg = _resize(cfg, N=n_elements)
    geom = make_geometry(cfg)
    phases = experiment_phases(cfg)
    rows = []
    for p_t in sorted(float(p) for p in grid):
        point = replace(cfg, P_T_dbm=p_t)
        for point_mode in (Mode.ACTIVE, Mode.PASSIVE):
            a, mc, se, budget = _point_rates(point, geom, phases, point_mode, trials)
            rows.append((p_t, n_elements, point_mode.value, point.b, budget.startup_met,
                         budget.eta, a, mc, se, False))
    path = os.path.join(out_dir, "total_power.csv")
    write_csv(path, ["P_T_dbm", "N", "mode", "b", "startup_met", "eta",
                     "analytic_sum_rate", "mc_sum_rate", "mc_stderr", "optimized"], rows)
    return [path]


def run_adc_bits(cfg, block, out_dir, trials, optimize, mode):
    bits = block.get("bits", [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, "ideal"])
    pairs = [tuple(int(v) for v in mn) for mn in block.get("pairs", [[64, 16], [100, 36]])]
    rows = []
    for M, N in sorted(pairs):
        point = _resize(cfg, M=M, N=N)
        geom = make_geometry(point)
        phases = experiment_phases(point)
        for b in bits:
            b_val = b if b == "ideal" else int(b)
            point_mode = Mode.IDEAL_ADC if b_val == "ideal" else Mode.ACTIVE
            bp = replace(point, b=b_val)
            a, mc, se, _ = _point_rates(bp, geom, phases, point_mode, trials)
            rows.append((str(b_val), M, N, point_mode.value, a, mc, se, False))
    path = os.path.join(out_dir, "adc_bits.csv")
    write_csv(path, ["b", "M", "N", "mode", "analytic_sum_rate", "mc_sum_rate",
                     "mc_stderr", "optimized"], rows)
    return [path]


def run_verify(cfg, block, out_dir, trials, optimize, mode):
    """Numerical certification: moment oracle at a desk-scale instance, the
    surface-power identity, and the Wishart surrogate at the configured
    system size.  Fails the run when any check fails."""
    point = _resize(
        cfg,
        M=int(block.get("M", 8)),
        N=int(block.get("N", 4)),
        K=int(block.get("K", 2)),
    )
    n_trials = int(block.get("trials", trials if trials else 100000))
    wishart_tol = float(block.get("wishart_tol", 0.05))
    geom = make_geometry(point)
    phases = experiment_phases(point)
    budget = resolve_budget(point, geom.alpha, Mode.ACTIVE)
    stats = compute_stats(geom, point, phases)
    est = estimate_moments(geom, point, phases, budget, n_trials, point.seed + 1)

    rows = []
    failures = 0

    def check(name, user, estimate, se, reference, tol_rel):
        nonlocal failures
        tol = max(tol_rel * abs(reference), 4.0 * se)
        ok = abs(estimate - reference) <= tol
        failures += 0 if ok else 1
        rows.append((name, user, estimate, se, reference,
                     abs(estimate - reference) / abs(reference), tol_rel,
                     "PASS" if ok else "FAIL"))

    for k in range(point.K):
        check("signal", k, est.signal[k], est.se_signal[k],
              analytic.signal_moment(stats, k, budget.eta), 0.03)
        check("dynamic_noise", k, est.dynamic_noise[k], est.se_dynamic_noise[k],
              analytic.dynamic_noise_moment(stats, k, budget.eta), 0.05)
        check("channel_gain", k, est.channel_gain[k], est.se_channel_gain[k],
              analytic.channel_gain_moment(stats, k, budget.eta), 0.03)
        check("quantization", k, est.quantization[k], est.se_quantization[k],
              analytic.quantization_moment(stats, k, budget, point), 0.03)
        for i in range(point.K):
            if i != k:
                check("interference", k, est.interference[k, i], est.se_interference[k, i],
                      analytic.interference_moment(stats, k, i, budget.eta), 0.03)

    # the 1% identity bound assumes the full 1e5-draw average
    measured = measured_ris_power(geom, point, phases, budget, 100000)
    expected = budget.eta**2 * point.N * (float(budget.p @ geom.alpha) + budget.sigma_v2_w)
    ok = abs(measured - expected) <= 0.01 * expected
    failures += 0 if ok else 1
    rows.append(("surface_power", -1, measured, 0.0, expected,
                 abs(measured - expected) / expected, 0.01, "PASS" if ok else "FAIL"))

    # surrogate quality is a property of the configured system size
    wis = wishart_moment_check(cfg, min(n_trials, 20000), cfg.seed + 2)
    ok = wis.frob_rel_dev <= wishart_tol
    failures += 0 if ok else 1
    rows.append(("wishart_surrogate", -1, wis.frob_rel_dev, wis.frob_rel_se, 0.0,
                 wis.frob_rel_dev, wishart_tol, "PASS" if ok else "FAIL"))

    path = os.path.join(out_dir, "verify.csv")
    write_csv(path, ["check", "user", "estimate", "std_err", "reference",
                     "rel_deviation", "tolerance", "status"], rows)
    for row in rows:
        print(f"{row[0]:>18s} k={row[1]:>2} rel_dev={row[5]:.4%} -> {row[7]}")
    if failures:
        raise ConfigurationError(f"{failures} verification checks failed (see {path})")
    return [path]


def run_optimize(cfg, block, out_dir, trials, optimize, mode):
    geom = make_geometry(cfg)
    budget = resolve_budget(cfg, geom.alpha, mode)
    params = ga_params(cfg, block)
    best, history = optimize_phases(geom, cfg, budget, params)
    baseline = experiment_phases(cfg)
    a_base, _, _, _ = _point_rates(cfg, geom, baseline, mode, trials)
    a_best, mc_best, se_best, _ = _point_rates(cfg, geom, best, mode, trials)

    hist_path = os.path.join(out_dir, "ga_history.csv")
    write_csv(hist_path, ["generation", "best_fitness", "mean_fitness"], history.rows())
    phase_path = os.path.join(out_dir, "best_phases.csv")
    write_csv(phase_path, ["element", "theta"], list(enumerate(best.theta)))
    summary_path = os.path.join(out_dir, "optimize_summary.csv")
    write_csv(
        summary_path,
        ["generations", "baseline_analytic_sum_rate", "optimized_analytic_sum_rate",
         "optimized_mc_sum_rate", "optimized_mc_stderr"],
        [(history.generations, a_base, a_best, mc_best, se_best)],
    )
    return [hist_path, phase_path, summary_path]


RUNNERS = {
    "antennas-elements": run_antennas_elements,
    "total-power": run_total_power,
    "adc-bits": run_adc_bits,
    "verify": run_verify,
    "optimize": run_optimize,
}


def write_manifest(out_dir, cfg, geom, args, artifacts):
    """Echo of the fully resolved run, including budget and startup status."""
    lines = [f"experiment: {args.experiment}", f"config: {os.path.abspath(args.config)}"]
    for name in sorted(SystemConfig.__dataclass_fields__):
        lines.append(f"system.{name}: {getattr(cfg, name)}")
    lines.append(f"resolved.dist_ris_m: {_fmt(geom.dist_ris)}")
    lines.append(f"resolved.beta: {_fmt(geom.beta)}")
    lines.append("resolved.alpha: " + " ".join(_fmt(a) for a in geom.alpha))
    for mode in (Mode.ACTIVE, Mode.PASSIVE):
        threshold = circuit_power(cfg, mode)
        lines.append(f"resolved.{mode.value}.startup_threshold_dbm: {_fmt(watts_to_dbm(threshold))}")
        try:
            budget = resolve_budget(cfg, geom.alpha, mode)
            lines.append(f"resolved.{mode.value}.startup_met: {_fmt(budget.startup_met)}")
            lines.append(f"resolved.{mode.value}.eta: {_fmt(budget.eta)}")
            lines.append(f"resolved.{mode.value}.P_A_w: {_fmt(budget.P_A)}")
            lines.append("resolved.{}.p_w: {}".format(mode.value, " ".join(_fmt(p) for p in budget.p)))
        except ConfigurationError as exc:
            lines.append(f"resolved.{mode.value}.error: {exc}")
    lines.append(f"flags.trials: {args.trials}")
    lines.append(f"flags.seed: {args.seed}")
    lines.append(f"flags.mode: {args.mode}")
    lines.append(f"flags.optimize: {_fmt(args.optimize)}")
    for art in artifacts:
        lines.append(f"artifact: {os.path.basename(art)}")
    path = os.path.join(out_dir, "run_manifest.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arisim",
        description="Active-RIS massive MIMO uplink simulator and rate engine",
    )
    parser.add_argument("--config", required=True, help="YAML config path")
    parser.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    parser.add_argument("--trials", type=int, default=None, help="Monte Carlo trials override")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--output", default=".", help="output directory")
    parser.add_argument("--mode", choices=[m.value for m in Mode], default="active",
                        help="operating mode for single-mode experiments (optimize)")
    parser.add_argument("--optimize", action="store_true",
                        help="add GA-optimized points to sweep experiments")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        if args.trials is None and ENV_TRIALS in os.environ:
            args.trials = int(os.environ[ENV_TRIALS])
        if args.seed is None and ENV_SEED in os.environ:
            args.seed = int(os.environ[ENV_SEED])
        cfg = build_system(raw, seed=args.seed, trials=args.trials)
        trials = args.trials if args.trials is not None else cfg.trials
        mode = Mode(args.mode)

        os.makedirs(args.output, exist_ok=True)
        block = dict(raw.get("experiments", {}).get(args.experiment, {}) or {})
        geom = make_geometry(cfg)
        artifacts = RUNNERS[args.experiment](cfg, block, args.output, trials, args.optimize, mode)
        manifest = write_manifest(args.output, cfg, geom, args, artifacts)
        print(f"wrote {len(artifacts)} artifact(s) + {os.path.basename(manifest)} to {args.output}")
        return 0
    except (ConfigurationError, OSError, yaml.YAMLError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
