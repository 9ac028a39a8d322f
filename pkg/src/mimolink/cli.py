"""Command-line front end: one subcommand per report, CSV out, optional figure.

Every command is a pure function of (config, seed): reruns produce
byte-identical CSV regardless of --workers. Floats are rendered with 9
significant digits; files are UTF-8 with LF line endings.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys

import numpy as np

from . import channel, dmt, montecarlo, plotting, uncoded
from .config import ConfigError, SystemConfig, load_config, preset
from .strategies import Strategy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_FLAT_GRID = tuple(float(x) for x in range(0, 45, 5))
_RICH_GRID = tuple(float(x) for x in range(0, 35, 5))
_SPEED_VELOCITIES = (50.0, 100.0, 150.0, 200.0, 250.0, 300.0)
_UNCODED_GRID = tuple(float(x) * 2.5 for x in range(0, 13))
_UNCODED_TRIALS = 100_000

_ALL_STRATEGIES = (Strategy.MMSE_SIC, Strategy.TRANSMIT_DIVERSITY,
                   Strategy.NON_MIMO, Strategy.OPTIMAL_SM)
_RICH_STRATEGIES = (Strategy.MMSE_SIC, Strategy.TRANSMIT_DIVERSITY, Strategy.NON_MIMO)
_ERGODIC_STRATEGIES = (Strategy.MMSE_SIC, Strategy.OPTIMAL_SM)


def _float_list(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _build_config(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else preset("lte-tu-4x4")
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.snr_db is not None:
        updates["snr_grid_db"] = args.snr_db
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    return cfg.validate()


def _strategies(args, default):
    if not args.strategies:
        return list(default)
    return [Strategy.parse(name) for name in args.strategies.split(",")]


def _reference_config(cfg: SystemConfig, strategy: Strategy) -> SystemConfig:
    """The non-MIMO reference keeps n_r but transmits from one antenna."""
    if strategy is Strategy.NON_MIMO and cfg.n_t != 1:
        return dataclasses.replace(cfg, n_t=1)
    return cfg


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _write_csv(out_path, header, rows):
    def dump(stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[key]) for key in header])

    if out_path:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            dump(fh)
    else:
        dump(sys.stdout)


def _plot_path(args):
    if args.plot is None:
        return None
    if args.plot:
        return args.plot
    if not args.out:
        raise ConfigError("--plot without a path requires --out to derive the figure name")
    stem = args.out[:-4] if args.out.lower().endswith(".csv") else args.out
    return stem + ".png"


def _emit(args, command, header, rows, plotter):
    _write_csv(args.out, header, rows)
    path = _plot_path(args)
    if path is not None:
        if not rows:
            raise ConfigError(f"{command}: nothing to plot")
        plotter(rows, path)
    return EXIT_OK


# --------------------------------------------------------------------------
# Rate-curve commands
# --------------------------------------------------------------------------

def _sweep_ensembles(cfg, strategies, grid_db, workers):
    """Per-strategy ensembles over an SNR grid, blocks shared across SNRs."""
    lin = [10.0 ** (db / 10.0) for db in grid_db]
    out = {}
    for strategy in strategies:
        scfg = _reference_config(cfg, strategy)
        ens = montecarlo.run_trials_multi(scfg, [strategy], lin, cfg.trials,
                                          cfg.master_seed, workers)
        out[strategy] = [(db, ens[(strategy, s)]) for db, s in zip(grid_db, lin)]
    return out


def cmd_flat_sweep(args) -> int:
    cfg = _build_config(args)
    cfg = dataclasses.replace(cfg, profile="FLAT", harq_rounds=1).validate()
    grid = cfg.snr_grid_db or _FLAT_GRID
    strategies = _strategies(args, _ALL_STRATEGIES)
    rows = []
    for strategy, points in _sweep_ensembles(cfg, strategies, grid, args.workers).items():
        for db, ens in points:
            r_eps = montecarlo.outage_rate(ens, cfg.epsilon)
            rows.append({
                "experiment": "flat-sweep", "strategy": strategy.value, "snr_db": db,
                "r_eps": r_eps, "outage_estimate": montecarlo.outage_prob(ens, r_eps),
                "trials": cfg.trials, "seed": cfg.master_seed,
            })
    header = ["experiment", "strategy", "snr_db", "r_eps", "outage_estimate",
              "trials", "seed"]
    return _emit(args, "flat-sweep", header, rows, plotting.plot_flat_sweep)


_RICH_HEADER = ["experiment", "strategy", "snr_db", "r_eps", "effective_rate",
                "expected_rounds", "outage_estimate", "trials", "seed"]


def _require_selective(cfg: SystemConfig, command: str):
    if cfg.profile.upper() == "FLAT":
        raise ConfigError(f"{command} needs a selective profile (e.g. TU12), not FLAT")


def cmd_rich_sweep(args) -> int:
    cfg = _build_config(args)
    _require_selective(cfg, "rich-sweep")
    grid = cfg.snr_grid_db or _RICH_GRID
    strategies = _strategies(args, _RICH_STRATEGIES)
    rows = []
    for strategy, points in _sweep_ensembles(cfg, strategies, grid, args.workers).items():
        for db, ens in points:
            point = montecarlo.sweep_point_from_ensemble(ens, cfg.epsilon, snr_db=db)
            rows.append({
                "experiment": "rich-sweep", "strategy": strategy.value, "snr_db": db,
                "r_eps": point.r_eps, "effective_rate": point.effective_rate,
                "expected_rounds": point.expected_rounds,
                "outage_estimate": point.outage_estimate,
                "trials": cfg.trials, "seed": cfg.master_seed,
            })
    return _emit(args, "rich-sweep", _RICH_HEADER, rows, plotting.plot_rich_sweep)


def cmd_speed_sweep(args) -> int:
    cfg = _build_config(args)
    _require_selective(cfg, "speed-sweep")
    velocities = args.velocities or _SPEED_VELOCITIES
    snr_db = (cfg.snr_grid_db or (20.0,))[0]
    snr = 10.0 ** (snr_db / 10.0)
    strategies = _strategies(args, _RICH_STRATEGIES)
    rows = []
    for strategy in strategies:
        for v in velocities:
            vcfg = dataclasses.replace(cfg, velocity_kmh=float(v)).validate()
            scfg = _reference_config(vcfg, strategy)
            ens = montecarlo.run_trials(scfg, strategy, snr, cfg.trials,
                                        cfg.master_seed, args.workers)
            point = montecarlo.sweep_point_from_ensemble(ens, cfg.epsilon, snr_db=snr_db)
            rows.append({
                "experiment": "speed-sweep", "strategy": strategy.value,
                "velocity_kmh": float(v), "doppler_hz": vcfg.effective_doppler_hz,
                "snr_db": snr_db, "r_eps": point.r_eps,
                "effective_rate": point.effective_rate,
                "expected_rounds": point.expected_rounds,
                "outage_estimate": point.outage_estimate,
                "trials": cfg.trials, "seed": cfg.master_seed,
            })
    header = ["experiment", "strategy", "velocity_kmh", "doppler_hz", "snr_db",
              "r_eps", "effective_rate", "expected_rounds", "outage_estimate",
              "trials", "seed"]
    return _emit(args, "speed-sweep", header, rows, plotting.plot_speed_sweep)


def cmd_ergodic_compare(args) -> int:
    cfg = _build_config(args)
    _require_selective(cfg, "ergodic-compare")
    grid = cfg.snr_grid_db or _RICH_GRID
    strategies = _strategies(args, _ERGODIC_STRATEGIES)
    rows = []
    for strategy, points in _sweep_ensembles(cfg, strategies, grid, args.workers).items():
        for db, ens in points:
            point = montecarlo.sweep_point_from_ensemble(ens, cfg.epsilon, snr_db=db)
            rows.append({
                "experiment": "ergodic-compare", "strategy": strategy.value,
                "snr_db": db, "r_eps": point.r_eps,
                "ergodic_rate": montecarlo.ergodic_from_ensemble(ens),
                "trials": cfg.trials, "seed": cfg.master_seed,
            })
    header = ["experiment", "strategy", "snr_db", "r_eps", "ergodic_rate",
              "trials", "seed"]
    return _emit(args, "ergodic-compare", header, rows, plotting.plot_ergodic_compare)


# --------------------------------------------------------------------------
# Uncoded SER, DMT, channel statistics
# --------------------------------------------------------------------------

def cmd_uncoded_ser(args) -> int:
    cfg = _build_config(args)
    grid = cfg.snr_grid_db or _UNCODED_GRID
    trials = args.trials if args.trials is not None else _UNCODED_TRIALS
    rows = []
    for scheme in uncoded.SerScheme:
        for point in uncoded.ser_sweep(scheme, grid, trials, cfg.master_seed):
            rows.append({
                "experiment": "uncoded-ser", "scheme": scheme.value,
                "snr_db": point.snr_db, "ser": point.ser,
                "trials": point.trials, "seed": cfg.master_seed,
            })
    header = ["experiment", "scheme", "snr_db", "ser", "trials", "seed"]
    return _emit(args, "uncoded-ser", header, rows, plotting.plot_uncoded_ser)


def cmd_dmt(args) -> int:
    curve = dmt.dmt_curve(args.n_t, args.n_r)
    rows = [{
        "experiment": "dmt", "n_t": curve.n_t, "n_r": curve.n_r,
        "multiplexing_gain": r, "diversity_order": d,
    } for r, d in curve.points]
    header = ["experiment", "n_t", "n_r", "multiplexing_gain", "diversity_order"]
    return _emit(args, "dmt", header, rows, plotting.plot_dmt)


def _channel_stats_rows(cfg: SystemConfig):
    profile = channel.resolve_profile(cfg)
    spec = channel.DopplerSpec(cfg.effective_doppler_hz, cfg.generator_order)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.master_seed, 1201]))
    meta = {"trials": cfg.trials, "seed": cfg.master_seed, "experiment": "channel-stats"}

    def row(metric, index, x, value, reference=""):
        return {"metric": metric, "index": index, "x": float(x),
                "value": float(value), "reference": reference, **meta}

    rows = [row("tap_power", j, d * 1e6, p)
            for j, (d, p) in enumerate(zip(profile.delays_s, profile.powers))]

    # Doppler autocorrelation, normalized at zero lag
    lags_ms = np.arange(0.0, 12.0001, 0.25)
    procs = channel.draw_tap_processes(spec, (cfg.trials,), rng)
    c = procs.at(lags_ms * 1e-3)
    rho = (c[:, :1] * c.conj()).mean(axis=0)
    rho = rho / rho[0].real
    rows += [row("doppler_autocorr", i, lag, rho[i].real)
             for i, lag in enumerate(lags_ms)]

    # frequency correlation vs. the profile's closed form
    dfs = np.arange(0.0, 5.0001e6, 125e3)
    gains = (rng.standard_normal((cfg.trials, len(profile)))
             + 1j * rng.standard_normal((cfg.trials, len(profile)))) / math.sqrt(2.0)
    h = channel.frequency_response(profile, gains, dfs)
    emp = (h[:, :1] * h.conj()).mean(axis=0)
    emp = emp / emp[0].real
    closed = np.abs(profile.frequency_correlation(dfs))
    rows += [row("freq_corr", i, df / 1e6, abs(emp[i]), float(closed[i]))
             for i, df in enumerate(dfs)]

    # one example realization: across all usable tones, and across the block span
    trace = channel.draw_tap_processes(spec, (len(profile),), rng)
    gains0 = trace.at([0.0])[:, 0]
    all_freqs = np.arange(cfg.usable_tones) * cfg.tone_spacing_hz
    h_tone = np.abs(channel.frequency_response(profile, gains0, all_freqs))
    rows += [row("tone_trace", k, k, h_tone[k]) for k in range(cfg.usable_tones)]
    allocation = channel.case_study_allocation(cfg)
    rows += [row("tone_trace_mark", m, k, h_tone[k])
             for m, k in enumerate(allocation.allocated)]

    span_ms = (cfg.harq_rounds - 1) * cfg.round_spacing_ms + cfg.rb_duration_ms
    times_ms = np.arange(0.0, span_ms + 1e-9, 0.125)
    gains_t = trace.at(times_ms * 1e-3)
    f0 = allocation.frequencies()[:1]
    h_time = np.abs(channel.frequency_response(profile, gains_t.T, f0))[:, 0]
    rows += [row("time_trace", n, t, h_time[n]) for n, t in enumerate(times_ms)]
    round_idx = [int(round(k * cfg.round_spacing_ms / 0.125))
                 for k in range(cfg.harq_rounds)]
    rows += [row("time_trace_mark", m, times_ms[i], h_time[i])
             for m, i in enumerate(round_idx)]
    return rows


def cmd_channel_stats(args) -> int:
    cfg = _build_config(args)
    _require_selective(cfg, "channel-stats")
    rows = _channel_stats_rows(cfg)
    header = ["experiment", "metric", "index", "x", "value", "reference",
              "trials", "seed"]
    return _emit(args, "channel-stats", header, rows, plotting.plot_channel_stats)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML config file")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed")
    common.add_argument("--trials", type=int, metavar="N", help="trials per sweep point")
    common.add_argument("--snr-db", type=_float_list, dest="snr_db", metavar="LIST",
                        help="comma-separated SNR grid in dB")
    common.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
    common.add_argument("--strategies", metavar="LIST",
                        help="comma-separated strategies "
                             "(mmse-sic,transmit-diversity,non-mimo,optimal-sm)")
    common.add_argument("--workers", type=int, default=1, metavar="N",
                        help="worker processes (results are worker-count independent)")
    common.add_argument("--plot", nargs="?", const="", default=None, metavar="PATH",
                        help="also render the figure (default: next to --out)")

    parser = argparse.ArgumentParser(
        prog="mimolink",
        description="Link-level Monte Carlo comparisons of transmit diversity "
                    "and spatial multiplexing for MIMO-OFDM",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flat-sweep", parents=[common],
                       help="1%%-outage rates, frequency-flat quasi-static model, no H-ARQ")
    p.set_defaults(func=cmd_flat_sweep)

    p = sub.add_parser("rich-sweep", parents=[common],
                       help="H-ARQ effective rates in the selective channel")
    p.set_defaults(func=cmd_rich_sweep)

    p = sub.add_parser("speed-sweep", parents=[common],
                       help="effective rate vs. velocity at fixed SNR")
    p.add_argument("--velocities", type=_float_list, metavar="LIST",
                   help="comma-separated velocities in km/h")
    p.set_defaults(func=cmd_speed_sweep)

    p = sub.add_parser("ergodic-compare", parents=[common],
                       help="outage rates vs. ergodic rates, selective channel")
    p.set_defaults(func=cmd_ergodic_compare)

    p = sub.add_parser("uncoded-ser", parents=[common],
                       help="uncoded ML symbol error rates (Alamouti 16-QAM, SM 4-QAM)")
    p.set_defaults(func=cmd_uncoded_ser)

    p = sub.add_parser("dmt", parents=[common],
                       help="closed-form diversity-multiplexing tradeoff points")
    p.add_argument("n_t", type=int)
    p.add_argument("n_r", type=int)
    p.set_defaults(func=cmd_dmt)

    p = sub.add_parser("channel-stats", parents=[common],
                       help="channel validation statistics and example traces")
    p.set_defaults(func=cmd_channel_stats)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # ConfigError and contract violations
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
