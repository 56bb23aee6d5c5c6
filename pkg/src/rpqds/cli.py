"""Command-line entry point: scans, verification runs and presets.

Scenarios are described by a YAML config (documented in the README);
unknown keys are rejected so a typo cannot silently change a physics
run.  Every run writes a CSV, a YAML manifest holding the fully resolved
config (re-running with the manifest as the config reproduces the CSV
byte for byte), and, for scan and verification modes, a PNG rendering of
the same records.

Exit codes: 0 success, 2 config error, 3 no feasible point anywhere,
4 numeric failure.
"""

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .channels import SystemParams
from .errors import ConvergenceError, InfeasibleError, RpqdsError
from .mc import (
    random_pairing,
    sample_correlated_strings,
    verify_phase_iteration,
)
from .optimize import default_space, scan_distance
from .pairing import ChannelObservables, pair_bit_flip, pair_untagged
from .plots import render_gamma_figure, render_mc_figure, render_rate_figure

SCAN_CSV_HEADER = [
    "distance_km", "e_d", "rate", "rate_baseline", "gamma", "sig_len",
    "s_a", "s_v", "p_ro", "p_fo", "p_re", "mu", "q", "p_z", "feasible",
]

MC_CSV_HEADER = [
    "setting", "bit_flip", "untagged_frac", "phase_flip", "quantity",
    "empirical", "analytic", "sigma", "samples",
]

MC_DEFAULT_SETTINGS = [
    [0.05, 0.9, 0.02],
    [0.2, 0.6, 0.1],
    [0.4, 0.3, 0.25],
    [0.5, 1.0, 0.5],
]

SCAN_MODES = ("sns-asym", "scf-asym", "sns-finite")


class ConfigError(RpqdsError):
    """Bad or missing configuration."""


@dataclass
class ScenarioConfig:
    """Fully resolved description of one run."""

    mode: str
    system: dict = field(default_factory=dict)
    distances: list = field(default_factory=list)
    e_d_values: list = field(default_factory=lambda: [0.0])
    seed: int = 0
    budget: int = 600
    n_starts: int = 4
    use_rp: bool = True
    include_baseline: bool = False
    warm_start: bool = False
    figures: bool = True
    out: str = "rpqds-out.csv"
    search: dict = field(default_factory=dict)
    mc_trials: int = 10 ** 6
    mc_settings: list = field(default_factory=lambda: MC_DEFAULT_SETTINGS)
    note: str = ""

    def resolved(self):
        return {f.name: getattr(self, f.name)
                for f in dataclasses.fields(self)}


_SYSTEM_KEYS = {"alpha", "eta_d", "p_d", "epsilon", "g"}
_CONFIG_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig)}


def load_config(path):
    """YAML config (or a previously written manifest) as a plain dict."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}")
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML: {err}")
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    if set(data) >= {"version", "command", "config"}:
        data = data["config"]  # manifest round-trip
        if not isinstance(data, dict):
            raise ConfigError("manifest 'config' must be a mapping")
    return data


def build_scenario(data, mode=None, overrides=None):
    """Validated ScenarioConfig from a config dict plus CLI overrides."""
    data = dict(data or {})
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    system = data.get("system", {})
    if not isinstance(system, dict):
        raise ConfigError("'system' must be a mapping")
    bad = set(system) - _SYSTEM_KEYS
    if bad:
        raise ConfigError(f"unknown system keys: {sorted(bad)}")
    if mode is not None:
        data["mode"] = mode
    if "mode" not in data:
        raise ConfigError("missing 'mode'")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        cfg = ScenarioConfig(**data)
    except TypeError as err:
        raise ConfigError(str(err))
    if cfg.mode not in SCAN_MODES + ("mc-verify", "optimize"):
        raise ConfigError(f"unknown mode: {cfg.mode!r}")
    cfg.distances = [float(d) for d in cfg.distances]
    if any(d < 0 for d in cfg.distances):
        raise ConfigError("distances must be >= 0")
    cfg.e_d_values = [float(e) for e in cfg.e_d_values]
    if cfg.budget < 1:
        raise ConfigError("budget must be >= 1")
    if cfg.mode in SCAN_MODES:
        _search_space(cfg)  # fail fast on bad axis overrides
    return cfg


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.12g}"


def _system_params(cfg, e_d, distance=0.0):
    return SystemParams(e_d=e_d, distance_km=distance, **cfg.system)


def _search_space(cfg):
    space = default_space(cfg.mode if cfg.mode in SCAN_MODES
                          else "sns-asym")
    for name, bounds in (cfg.search or {}).items():
        if not isinstance(bounds, dict) or set(bounds) - {"lo", "hi"}:
            raise ConfigError(
                f"search override for {name!r} must be a {{lo, hi}} map")
        if name not in {ax.name for ax in space.axes}:
            raise ConfigError(f"unknown search axis: {name!r}")
        space = space.replace_axis(name, bounds.get("lo"), bounds.get("hi"))
    return space


def _point_row(point):
    res = point.result
    rep = res.report if res else None
    params = res.params_used if res else {}
    return [
        _fmt(point.distance_km),
        _fmt(point.e_d),
        _fmt(res.rate) if res else "",
        _fmt(point.baseline.rate) if point.baseline else "",
        _fmt(point.gamma) if point.gamma is not None else "",
        str(rep.sig_len) if rep else "",
        _fmt(rep.s_a) if rep else "",
        _fmt(rep.s_v) if rep else "",
        _fmt(rep.p_ro) if rep else "",
        _fmt(rep.p_fo) if rep else "",
        _fmt(rep.p_re) if rep else "",
        _fmt(params.get("mu")),
        _fmt(params.get("q")),
        _fmt(params.get("p_z")),
        "1" if point.feasible else "0",
    ]


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")


def _write_manifest(cfg, command):
    manifest = {
        "command": command,
        "version": __version__,
        "config": cfg.resolved(),
    }
    path = Path(cfg.out).with_suffix(".manifest.yaml")
    with open(path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(manifest, handle, sort_keys=True)
    return path


def _run_scan(cfg):
    points = []
    for e_d in cfg.e_d_values:
        template = _system_params(cfg, e_d)
        points.extend(scan_distance(
            template, cfg.mode, cfg.distances, use_rp=cfg.use_rp,
            budget=cfg.budget, seed=cfg.seed,
            include_baseline=cfg.include_baseline,
            warm_start=cfg.warm_start, space=_search_space(cfg),
            n_starts=cfg.n_starts))
    _write_csv(cfg.out, SCAN_CSV_HEADER, [_point_row(p) for p in points])
    if cfg.figures:
        render_rate_figure(points, Path(cfg.out).with_suffix(".png"),
                           f"{cfg.mode} signature rate")
        if cfg.include_baseline:
            render_gamma_figure(
                points, Path(cfg.out).with_suffix(".gamma.png"),
                f"{cfg.mode} improvement from random pairing")
    if not any(p.feasible for p in points):
        reasons = sorted({p.reason for p in points if p.reason})
        raise InfeasibleError(
            f"no feasible point in the scan (constraints: {reasons})",
            constraint="infeasible-everywhere")
    return points


def _run_mc_verify(cfg):
    records = []
    trials = int(cfg.mc_trials)
    trials -= trials % 2
    for idx, (e, d, e_ph) in enumerate(cfg.mc_settings):
        obs = ChannelObservables(n_t=trials, bit_flip=e, untagged_frac=d,
                                 phase_flip=e_ph)
        alice, bob = sample_correlated_strings(obs, trials, [cfg.seed, idx])
        paired_a, paired_b, _ = random_pairing(alice, bob,
                                               [cfg.seed, idx, 1])
        pairs = trials // 2
        emp_flip = float((paired_a.bits != paired_b.bits).sum()) / pairs
        emp_untag = float(paired_a.untagged_mask.sum()) / pairs
        exp_flip = pair_bit_flip(e)
        exp_untag = pair_untagged(d)
        report = verify_phase_iteration(e_ph, trials, [cfg.seed, idx, 2])

        def sigma(p, n):
            return (p * (1.0 - p) / n) ** 0.5

        records.extend([
            {"setting": idx, "e": e, "d": d, "e_ph": e_ph,
             "quantity": "bit_flip_prime", "empirical": emp_flip,
             "analytic": exp_flip, "sigma": sigma(exp_flip, pairs),
             "samples": pairs},
            {"setting": idx, "e": e, "d": d, "e_ph": e_ph,
             "quantity": "untagged_prime", "empirical": emp_untag,
             "analytic": exp_untag, "sigma": sigma(exp_untag, pairs),
             "samples": pairs},
            {"setting": idx, "e": e, "d": d, "e_ph": e_ph,
             "quantity": "p_even", "empirical": report.p_even_emp,
             "analytic": report.p_even_expected,
             "sigma": report.p_even_sigma, "samples": trials},
            {"setting": idx, "e": e, "d": d, "e_ph": e_ph,
             "quantity": "phase_even", "empirical": report.phase_even_emp,
             "analytic": report.phase_even_expected,
             "sigma": report.phase_even_sigma, "samples": trials},
            {"setting": idx, "e": e, "d": d, "e_ph": e_ph,
             "quantity": "phase_odd", "empirical": report.phase_odd_emp,
             "analytic": report.phase_odd_expected,
             "sigma": report.phase_odd_sigma, "samples": trials},
        ])
    rows = [[str(r["setting"]), _fmt(r["e"]), _fmt(r["d"]), _fmt(r["e_ph"]),
             r["quantity"], _fmt(r["empirical"]), _fmt(r["analytic"]),
             _fmt(r["sigma"]), str(r["samples"])] for r in records]
    _write_csv(cfg.out, MC_CSV_HEADER, rows)
    if cfg.figures:
        render_mc_figure(records, Path(cfg.out).with_suffix(".png"),
                         "pairing iteration: Monte Carlo vs analytic")
    return records


def _run_optimize(cfg):
    if len(cfg.distances) != 1 or len(cfg.e_d_values) != 1:
        raise ConfigError(
            "mode 'optimize' needs exactly one distance and one e_d")
    mode = cfg.mode if cfg.mode in SCAN_MODES else None
    if mode is None:
        raise ConfigError("mode 'optimize' is driven via a scan mode")
    return _run_scan(cfg)


def run_scenario(cfg, command="run"):
    """Execute one scenario; returns the artifacts' records."""
    _write_manifest(cfg, command)
    if cfg.mode == "mc-verify":
        return _run_mc_verify(cfg)
    return _run_scan(cfg)


def _preset(name, budget, seed):
    base = {"seed": seed if seed is not None else 0}
    if name == "fig6":
        return base | {
            "mode": "sns-asym",
            "e_d_values": [0.0, 0.05, 0.10],
            "distances": [float(d) for d in range(0, 501, 25)],
            "budget": budget or 500,
            "out": "fig6.csv",
        }
    if name == "fig7":
        return base | {
            "mode": "scf-asym",
            "e_d_values": [0.0, 0.05, 0.10],
            "distances": [float(d) for d in range(0, 401, 25)],
            "budget": budget or 500,
            "out": "fig7.csv",
        }
    if name == "fig10":
        return base | {
            "mode": "sns-finite",
            "system": {"p_d": 1e-8},
            "e_d_values": [0.01, 0.02, 0.03],
            "distances": [float(d) for d in range(100, 501, 100)],
            "budget": budget or 160,
            "n_starts": 2,
            "out": "fig10.csv",
        }
    if name == "fig11":
        return base | {
            "mode": "sns-finite",
            "system": {"p_d": 1e-8},
            "e_d_values": [0.01, 0.02, 0.03],
            "distances": [float(d) for d in range(100, 501, 100)],
            "budget": budget or 160,
            "n_starts": 2,
            "include_baseline": True,
            "out": "fig11.csv",
        }
    if name == "fig12-sns":
        return base | {
            "mode": "sns-asym",
            "e_d_values": [0.05],
            "distances": [float(d) for d in range(50, 351, 25)],
            "budget": budget or 500,
            "include_baseline": True,
            "out": "fig12-sns.csv",
            "note": ("SNS pair only; the published comparison also shows "
                     "BB84 and MDI curves whose channel models are not "
                     "part of this package"),
        }
    if name == "sec5-headline":
        return base | {
            "mode": "sns-finite",
            "system": {"p_d": 1e-8},
            "e_d_values": [0.03],
            "distances": [483.0],
            "budget": budget or 220,
            "n_starts": 3,
            "include_baseline": True,
            "out": "sec5-headline.csv",
        }
    raise ConfigError(f"unknown preset: {name!r}")


def _add_common_flags(parser):
    parser.add_argument("--config", type=str, default=None,
                        help="YAML config (or a manifest from a prior run)")
    parser.add_argument("--out", type=str, default=None,
                        help="output CSV path")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--budget", type=int, default=None,
                        help="objective evaluations per optimization")
    parser.add_argument("--rp", dest="use_rp",
                        action=argparse.BooleanOptionalAction, default=None,
                        help="apply random pairing (default) or not")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rpqds",
        description="Signature-rate scans and verification for "
                    "random-pairing quantum digital signatures",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("asym-scan", help="optimized asymptotic rate scan")
    scan.add_argument("--channel", choices=["sns", "scf"], default="sns")
    _add_common_flags(scan)

    finite = sub.add_parser("finite-scan",
                            help="optimized finite-size rate scan")
    _add_common_flags(finite)

    mc = sub.add_parser("mc-verify",
                        help="Monte Carlo check of the pairing iteration")
    mc.add_argument("--trials", type=int, default=None)
    _add_common_flags(mc)

    opt = sub.add_parser("optimize",
                         help="single-point parameter optimization")
    opt.add_argument("--mode", choices=list(SCAN_MODES), default="sns-asym")
    opt.add_argument("--distance", type=float, default=None)
    opt.add_argument("--e-d", dest="e_d", type=float, default=None)
    _add_common_flags(opt)

    rep = sub.add_parser("reproduce", help="named reproduction presets")
    rep.add_argument("preset", choices=["fig6", "fig7", "fig10", "fig11",
                                        "fig12-sns", "sec5-headline"])
    _add_common_flags(rep)
    return parser


def _scenario_from_args(args):
    data = load_config(args.config) if args.config else {}
    overrides = {
        "out": args.out,
        "seed": args.seed,
        "budget": args.budget,
        "use_rp": args.use_rp,
    }
    if args.command == "asym-scan":
        mode = f"{args.channel}-asym"
        return build_scenario(data, mode=mode, overrides=overrides)
    if args.command == "finite-scan":
        return build_scenario(data, mode="sns-finite", overrides=overrides)
    if args.command == "mc-verify":
        if args.trials is not None:
            overrides["mc_trials"] = args.trials
        return build_scenario(data, mode="mc-verify", overrides=overrides)
    if args.command == "optimize":
        if args.distance is not None:
            overrides["distances"] = [args.distance]
        if args.e_d is not None:
            overrides["e_d_values"] = [args.e_d]
        cfg = build_scenario(data, mode=args.mode, overrides=overrides)
        if len(cfg.distances) != 1 or len(cfg.e_d_values) != 1:
            raise ConfigError(
                "optimize needs exactly one distance and one e_d")
        return cfg
    if args.command == "reproduce":
        preset = _preset(args.preset, args.budget, args.seed)
        preset.update({k: v for k, v in data.items()})
        for key in ("out", "use_rp"):
            if overrides.get(key) is not None:
                preset[key] = overrides[key]
        return build_scenario(preset)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _scenario_from_args(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    if cfg.note:
        print(f"note: {cfg.note}")
    try:
        run_scenario(cfg, command=args.command)
    except InfeasibleError as err:
        record = {"error": str(err), "constraint": err.constraint}
        print(json.dumps(record), file=sys.stderr)
        return 3
    except (ConvergenceError, FloatingPointError, ArithmeticError) as err:
        record = {"error": str(err), "kind": type(err).__name__}
        print(json.dumps(record), file=sys.stderr)
        return 4
    print(f"wrote {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())