# ==========================
# main.py
# ==========================
"""
main.py - command line front end

    python main.py gen-model      --config configs/synth.cfg --out runs/model
    python main.py calibrate      --config configs/synth.cfg --out runs/model
    python main.py sweep          --config configs/synth.cfg --out runs/run1
    python main.py validate-bound --config configs/bound.cfg --out runs/bound
    python main.py oracle-gap     --config configs/synth.cfg --out runs/oracle
    python main.py selftest

exit codes: 0 ok, 2 usage, 3 config, 4 invariant violation, 1 anything else
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import scipy
from rich.console import Console
from rich.table import Table

import selftest
from config import CALIBRATION_STREAM, MODEL_STREAM, ExperimentConfig, apply_overrides, load_config, write_sidecar
from errors import ConfigError, InvariantError, SimulationError
from event_bus import EventBus
from experiment import (BOUND_COLUMNS, ORACLE_COLUMNS, SWEEP_COLUMNS, ExperimentContext, oracle_gap,
                        prepare_context, sweep, validate_bound, write_csv)
from gm_model import build_model, load_model, save_model
from run_logger import DEFAULT_CONFIG, setup_logging, timer
from semantic_matching import load_stats, posterior_divergence, save_stats
from trial_recorder import TrialRecorder

logger = logging.getLogger(__name__)
console = Console()
err_console = Console(stderr=True)

SUBCOMMANDS = ("gen-model", "calibrate", "sweep", "validate-bound", "oracle-gap", "selftest")
DIVERGENCE_SCENARIOS = 200


#MARK: arguments
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description="semantic-relevance sensor selection simulator")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", type=Path, help="key=value config file (defaults built in)")
    parser.add_argument("--out", type=Path, help="output directory (default runs/<subcommand>)")
    parser.add_argument("--seed", type=int, help="override base_seed")
    parser.add_argument("--trials", type=int, help="override the trial count of the subcommand")
    parser.add_argument("--schemes", help="comma-separated scheme list")
    parser.add_argument("--ordering", choices=("random", "importance", "both"))
    parser.add_argument("--model", type=Path, help="reuse a saved model artifact")
    parser.add_argument("--calibration", type=Path, help="reuse saved calibration stats (needs --model)")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config is not None else ExperimentConfig()
    trials_field = {"validate-bound": "bound_trials", "oracle-gap": "oracle_instances"}.get(args.subcommand, "trials")
    schemes = tuple(name.strip() for name in args.schemes.split(",") if name.strip()) if args.schemes else None
    return apply_overrides(cfg, base_seed=args.seed, schemes=schemes, ordering=args.ordering,
                           **{trials_field: args.trials})


def _log_config_path(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.log_config)
    if not path.is_absolute() and not path.exists():
        path = DEFAULT_CONFIG.with_name(path.name)
    return path


#MARK: shared steps
def _derived(cfg: ExperimentConfig, ctx: Optional[ExperimentContext] = None,
             args: Optional[argparse.Namespace] = None) -> dict:
    derived = {
        "effective_slot_duration": cfg.effective_slot_duration,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
    }
    if ctx is not None:
        derived.update({
            "g_min": ctx.model.g_min,
            "delta_max": ctx.model.delta_max,
            "alpha_bar": ctx.calibration.alpha_bar,
            "phi_bar": ctx.calibration.phi_bar,
            "sigma2_bar": ctx.calibration.sigma2_bar,
        })
    # reused artifacts are not rebuilt from the seed, so the sidecar names them
    if args is not None and args.model is not None:
        derived["model_artifact"] = Path(args.model).resolve()
    if args is not None and args.calibration is not None:
        derived["calibration_artifact"] = Path(args.calibration).resolve()
    return derived


def _context(cfg: ExperimentConfig, args: argparse.Namespace, out: Path) -> ExperimentContext:
    """model + calibration from artifacts when given, built from seeds otherwise; both saved to out"""
    if args.calibration is not None and args.model is None:
        raise ConfigError("--calibration needs the --model it was computed for")
    model = load_model(args.model) if args.model is not None else None
    calibration = load_stats(args.calibration) if args.calibration is not None else None
    ctx = prepare_context(cfg, model=model, calibration=calibration)
    save_model(ctx.model, out / "model.txt")
    save_stats(ctx.calibration, out / "calibration.txt")
    return ctx


#MARK: subcommands
def cmd_gen_model(cfg: ExperimentConfig, args: argparse.Namespace, out: Path) -> None:
    model = build_model(cfg.num_classes, cfg.feature_dim, cfg.centroid_radius,
                        cfg.cov_low, cfg.cov_high, cfg.seed_for(MODEL_STREAM))
    save_model(model, out / "model.txt")
    write_sidecar(cfg, out / "metadata.txt", {**_derived(cfg), "g_min": model.g_min, "delta_max": model.delta_max})
    console.print(f"model L={model.num_classes} D={model.feature_dim}: "
                  f"G_min={model.g_min:.4f}, delta_max={model.delta_max:.4f} -> {out / 'model.txt'}")


def cmd_calibrate(cfg: ExperimentConfig, args: argparse.Namespace, out: Path) -> None:
    ctx = _context(cfg, args, out)
    mean_gap, max_gap = posterior_divergence(ctx.model, ctx.matching, ctx.calibration, cfg.num_sensors,
                                             DIVERGENCE_SCENARIOS, cfg.query_noise_factor,
                                             cfg.seed_for(CALIBRATION_STREAM, 1))
    logger.info(f"posterior estimate vs exact: mean |diff| {mean_gap:.4f}, max {max_gap:.4f}")
    write_sidecar(cfg, out / "metadata.txt",
                  {**_derived(cfg, ctx, args), "posterior_gap_mean": mean_gap, "posterior_gap_max": max_gap})
    console.print(f"calibration alpha_bar={ctx.calibration.alpha_bar:.4f} phi_bar={ctx.calibration.phi_bar:.4f} "
                  f"sigma2_bar={ctx.calibration.sigma2_bar:.4f} -> {out / 'calibration.txt'}")


def cmd_sweep(cfg: ExperimentConfig, args: argparse.Namespace, out: Path) -> None:
    ctx = _context(cfg, args, out)
    for ordering in cfg.orderings():
        bus = EventBus()
        trials_path = out / f"trials_{ordering.value}.csv" if cfg.record_trials else None
        recorder = TrialRecorder(bus, trials_path)
        try:
            rows = sweep(ctx, ordering, bus)
        finally:
            recorder.close()
        write_csv((row.row() for row in rows), SWEEP_COLUMNS, out / f"sweep_{ordering.value}.csv")

        table = Table(title=f"{ordering.value} ordering, accuracy by {cfg.sweep_axis}")
        table.add_column("scheme")
        for value in cfg.sweep_values:
            table.add_column(f"{value:g}", justify="right")
        schemes = list(dict.fromkeys(row.scheme for row in rows))
        for scheme in schemes:
            table.add_row(scheme.value, *(f"{row.accuracy:.3f}" for row in rows if row.scheme is scheme))
        console.print(table)
    write_sidecar(cfg, out / "metadata.txt", _derived(cfg, ctx, args))


def cmd_validate_bound(cfg: ExperimentConfig, args: argparse.Namespace, out: Path) -> None:
    ctx = _context(cfg, args, out)
    derived = _derived(cfg, ctx, args)
    for ordering in cfg.orderings():
        bus = EventBus()
        recorder = TrialRecorder(bus)
        try:
            result = validate_bound(ctx, ordering, bus=bus)
        finally:
            recorder.close()
        write_csv((row.row() for row in result.rows), BOUND_COLUMNS, out / f"bound_{ordering.value}.csv")
        derived[f"taylor_gap_mean_{ordering.value}"] = result.mean_taylor_gap
        derived[f"taylor_gap_max_{ordering.value}"] = result.max_taylor_gap

        table = Table(title=f"{ordering.value} ordering: top-k by priority")
        for column in ("k", "empirical", "se", "bound"):
            table.add_column(column, justify="right")
        for row in result.rows:
            table.add_row(str(row.k), f"{row.empirical_acc:.4f}", f"{row.empirical_se:.4f}", f"{row.theory_lb:.4f}")
        console.print(table)
    write_sidecar(cfg, out / "metadata.txt", derived)


def cmd_oracle_gap(cfg: ExperimentConfig, args: argparse.Namespace, out: Path) -> None:
    rows = [oracle_gap(cfg, ordering) for ordering in cfg.orderings()]
    write_csv((row.row() for row in rows), ORACLE_COLUMNS, out / "oracle_gap.csv")
    write_sidecar(cfg, out / "metadata.txt", _derived(cfg))
    table = Table(title="surrogate gap to exhaustive search")
    for column in ("ordering", "instances", "median", "p95", "max"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(row.ordering.value, str(row.instances), f"{row.median_gap:.2%}",
                      f"{row.p95_gap:.2%}", f"{row.max_gap:.2%}")
    console.print(table)


def cmd_selftest(cfg: ExperimentConfig, args: argparse.Namespace, out: Path) -> None:
    results = selftest.run_checks()
    selftest.render(results, console)
    failed = [result.name for result in results if not result.passed]
    if failed:
        raise InvariantError(f"selftest failed: {', '.join(failed)}")


COMMANDS = {
    "gen-model": cmd_gen_model,
    "calibrate": cmd_calibrate,
    "sweep": cmd_sweep,
    "validate-bound": cmd_validate_bound,
    "oracle-gap": cmd_oracle_gap,
    "selftest": cmd_selftest,
}


#MARK: main
def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        cfg = resolve_config(args)
        out = args.out if args.out is not None else Path("runs") / args.subcommand
        out.mkdir(parents=True, exist_ok=True)
        setup_logging(_log_config_path(cfg), log_dir=out)
        logger.info(f"{args.subcommand} -> {out}")
        timer.reset()
        COMMANDS[args.subcommand](cfg, args, out)
        timer.report()
        logger.info(f"{args.subcommand} done")
        return 0
    except SimulationError as e:
        err_console.print(f"[red]{type(e).__name__}:[/red] {e}")
        return e.exit_code
    except (ValueError, OSError) as e:
        err_console.print(f"[red]error:[/red] {e}")
        return 1
    except KeyboardInterrupt:
        err_console.print("interrupted by user")
        return 130


if __name__ == "__main__":
    sys.exit(main())
