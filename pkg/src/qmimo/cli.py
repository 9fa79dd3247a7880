"""Command-line front end.

Subcommands::

    qmimo mse-sweep      estimation MSE versus pilot SNR for several ADC resolutions
    qmimo rate-vs-m      Monte Carlo vs closed-form sum rate versus antenna count
    qmimo compensation   RF scale that offsets a lower ADC resolution
    qmimo validate       run the self-check suite, write a JSON report

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .compensation import match_rf_scale
from .config import (
    ConfigError,
    ScenarioSpec,
    SystemConfig,
    db_to_linear,
    default_config,
    drop_users,
    format_bits,
    parse_bits,
    quantization_params,
    validate_config,
)
from .plotting import write_report_figure
from .rate import ideal_hardware, rate_approx
from .streams import Tag, substream
from .sweep import SweepSpec, fmt, run_sweep
from .validation import FAULTS, run_checks

log = logging.getLogger("qmimo")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3
OUTPUT_ENV = "QMIMO_OUTPUT_DIR"
DEFAULT_SEED = 2024


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _trials(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"trials must be >= 2, got {text}")
    return value


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _bits_list(text):
    try:
        bits = [parse_bits(v) for v in text.split(",") if v.strip()]
        for b in bits:
            quantization_params(b)
        return bits
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def load_config(path, seed: int) -> tuple[SystemConfig, ScenarioSpec]:
    """Read ``{"system": {...}, "scenario": {...}}``; both sections optional.

    Without ``large_scale`` the users are dropped once from the scenario,
    keyed by ``seed``.
    """
    data = {}
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
        unknown = set(data) - {"system", "scenario"}
        if unknown:
            raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    scenario = ScenarioSpec.from_dict(data.get("scenario", {})).validate()
    system = dict(data.get("system", {}))
    system.setdefault("num_users", scenario.num_users)
    if "large_scale" not in system:
        if system["num_users"] != scenario.num_users:
            raise ConfigError("system.num_users disagrees with scenario.num_users")
        system["large_scale"] = tuple(drop_users(scenario, substream(seed, 0, Tag.DROP)))
    system.setdefault("pilot_length", system["num_users"])
    return default_config(**system), scenario


def _apply_overrides(cfg: SystemConfig, scenario: ScenarioSpec, args) -> tuple[SystemConfig, ScenarioSpec]:
    changes = {}
    if getattr(args, "rho_p_db", None) is not None:
        changes["pilot_power"] = db_to_linear(args.rho_p_db)
    if getattr(args, "rho_u_db", None) is not None:
        changes["data_power"] = db_to_linear(args.rho_u_db)
    if getattr(args, "kappa", None) is not None:
        changes["rf_scale_magnitude"] = args.kappa
    if getattr(args, "sigma2", None) is not None:
        changes["rf_noise_var"] = args.sigma2
    if getattr(args, "bits", None) is not None and not isinstance(args.bits, list):
        changes["adc_bits"] = args.bits
    if getattr(args, "shadow_db", None) is not None:
        scenario = ScenarioSpec(**{**scenario.__dict__, "shadow_std_db": args.shadow_db}).validate()
    cfg = cfg.with_(**changes)
    validate_config(cfg)
    return cfg, scenario


def _output_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUTPUT_ENV) or "results")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def _finish(kind, csv_path, args) -> None:
    script, png = write_report_figure(kind, csv_path, render=not args.no_plots)
    print(f"wrote {csv_path}")
    print(f"wrote {script}")
    if png is not None:
        print(f"wrote {png}")


def cmd_mse_sweep(args) -> int:
    cfg, scenario = load_config(args.config, args.seed)
    cfg, scenario = _apply_overrides(cfg, scenario, args)
    out = _output_dir(args)
    rows = []
    for bits in args.bits_list:
        spec = SweepSpec(
            base_config=cfg.with_(adc_bits=bits), axis="pilot_power_db", values=args.rho_p_db_grid,
            trials=args.trials, master_seed=args.seed, metrics=("mse", "mse_floor"),
        )
        result = run_sweep(spec, threads=args.threads)
        floors = {r.axis_value: r.analytic for r in result.select("mse_floor")}
        for r in result.select("mse"):
            rows.append([
                float(r.axis_value), format_bits(bits), float(cfg.rf_scale_magnitude), float(cfg.rf_noise_var),
                r.analytic, floors.get(r.axis_value, float("nan")), r.mc, r.ci95, r.trials, r.seed,
            ])
        for r in result.select("error"):
            log.warning("b=%s, rho_p=%s dB: %s", format_bits(bits), r.axis_value, r.error)
    path = out / "mse_sweep.csv"
    header = ["rho_p_db", "bits", "kappa", "sigma2", "mse_analytic", "mse_floor", "mse_mc", "ci95", "trials", "seed"]
    _write_csv(path, header, rows)
    _finish("mse", path, args)
    return EXIT_OK


def cmd_rate_vs_m(args) -> int:
    cfg, scenario = load_config(args.config, args.seed)
    cfg, scenario = _apply_overrides(cfg, scenario, args)
    out = _output_dir(args)
    spec = SweepSpec(
        base_config=cfg, axis="num_antennas", values=args.m_grid, trials=args.trials,
        master_seed=args.seed, mode=args.mode, scenario=scenario,
        metrics=("sum_rate", "sum_rate_perfect_csi"),
    )
    result = run_sweep(spec, threads=args.threads)
    bound = {r.axis_value: r.analytic for r in result.select("sum_rate_perfect_csi")}
    rows = []
    for r in result.select("sum_rate"):
        ideal = rate_approx(ideal_hardware(cfg.with_(num_antennas=int(r.axis_value)))).sum()
        rows.append([int(r.axis_value), r.mc, r.analytic, bound[r.axis_value], r.ci95, r.trials, r.seed, float(ideal)])
    for r in result.select("error"):
        log.warning("M=%s: %s", r.axis_value, r.error)
    path = out / "rate_vs_m.csv"
    header = ["M", "rate_mc_sum", "rate_approx_sum", "rate_perfect_csi_sum", "ci95", "trials", "seed", "rate_ideal_hw_sum"]
    _write_csv(path, header, rows)
    _finish("rate_vs_m", path, args)
    return EXIT_OK if not result.select("error") else EXIT_VALIDATION


def cmd_compensation(args) -> int:
    cfg, scenario = load_config(args.config, args.seed)
    cfg, scenario = _apply_overrides(cfg, scenario, args)
    out = _output_dir(args)
    reference = validate_config(
        cfg.with_(adc_bits=args.reference_bits, rf_scale_magnitude=args.reference_scale)
    )
    rows = []
    failed = []
    ref_written = False
    for bits in args.bits_list:
        res = match_rf_scale(reference, bits, args.m_grid, args.match_m, args.tolerance)
        if not ref_written:
            for m, ref in zip(res.antennas, res.reference_curve):
                rows.append([format_bits(args.reference_bits), args.reference_scale, m, ref, ref, 0.0, "reference"])
            ref_written = True
        for m, rate, ref in zip(res.antennas, res.curve, res.reference_curve):
            rows.append([format_bits(bits), res.rf_scale, m, rate, ref, rate / ref - 1.0, res.status])
        print(f"b={format_bits(bits)}: |chi|={res.rf_scale:.6g} status={res.status} "
              f"max_rel_dev={res.max_rel_dev:.3e}")
        if res.status != "matched":
            failed.append(bits)
    path = out / "compensation.csv"
    header = ["bits", "chi_abs", "M", "sum_rate", "reference_sum_rate", "rel_dev", "status"]
    _write_csv(path, header, rows)
    _finish("compensation", path, args)
    if failed:
        log.warning("no admissible match for b in %s", [format_bits(b) for b in failed])
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = run_checks(seed=args.seed, fault=args.inject_fault)
    report = {
        "seed": args.seed,
        "fault": args.inject_fault,
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: deviation={c.deviation:.3e} tolerance={c.tolerance:g}")
    if args.out or os.environ.get(OUTPUT_ENV):
        path = _output_dir(args) / "validation_report.json"
        path.write_text(json.dumps(report, indent=2) + "\n")
        print(f"wrote {path}")
    else:
        print(json.dumps(report, indent=2))
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmimo", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, trials_default):
        p.add_argument("--config", help="JSON file with 'system' and/or 'scenario' sections")
        p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./results)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--trials", type=_trials, default=trials_default)
        p.add_argument("--threads", type=_positive_int, default=1, help="worker threads; never changes results")
        p.add_argument("--rho-p-db", type=float, help="pilot power (dB)")
        p.add_argument("--rho-u-db", type=float, help="data power (dB)")
        p.add_argument("--shadow-db", type=float, help="shadowing standard deviation (dB)")
        p.add_argument("--kappa", type=float, help="RF scale magnitude |chi|")
        p.add_argument("--sigma2", type=float, help="RF distortion noise variance (linear)")
        p.add_argument("--no-plots", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("mse-sweep", help="channel estimation MSE versus pilot SNR")
    common(p, 2000)
    p.add_argument("--bits", dest="bits_list", type=_bits_list, default=[1, 2, math.inf])
    p.add_argument("--rho-p-db-grid", type=_float_list, default=[float(v) for v in range(-10, 41, 5)])
    p.set_defaults(func=cmd_mse_sweep)

    p = sub.add_parser("rate-vs-m", help="Monte Carlo and closed-form sum rate versus M")
    common(p, 2000)
    p.add_argument("--bits", type=parse_bits, help="ADC resolution")
    p.add_argument("--m-grid", type=_int_list, default=[16, 32, 64, 128])
    p.add_argument("--mode", choices=("fixed", "scenario"), default="fixed",
                   help="fixed: one user drop for all trials; scenario: redraw per trial")
    p.set_defaults(func=cmd_rate_vs_m)

    p = sub.add_parser("compensation", help="match sum rate across ADC resolutions via |chi|")
    common(p, 2)
    p.add_argument("--reference-bits", type=parse_bits, default=5)
    p.add_argument("--reference-scale", type=float, default=0.95)
    p.add_argument("--bits", dest="bits_list", type=_bits_list, default=[1, 2, 3])
    p.add_argument("--m-grid", type=_int_list, default=[32, 48, 64, 96, 128])
    p.add_argument("--match-m", type=int, help="antenna count used for matching (default: median of grid)")
    p.add_argument("--tolerance", type=float, default=0.005)
    p.set_defaults(func=cmd_compensation)

    p = sub.add_parser("validate", help="run the oracle checks and write a JSON report")
    p.add_argument("--out", help="directory for validation_report.json (default: print to stdout)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--inject-fault", choices=FAULTS, help="mutation canary for the checks")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, json.JSONDecodeError) as exc:
        print(f"qmimo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qmimo: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
