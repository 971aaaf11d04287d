"""Command-line front end.

    cfcnopa variance [--t 0.8] [--beta 0.15] ...
    cfcnopa sweep --axis t --from 0 --to 1 --points 501 -o fig2.csv
    cfcnopa reproduce fig3 -o fig3.csv
    cfcnopa optimize --free t,beta
    cfcnopa criterion
    cfcnopa threshold

Exit codes: 0 success, 2 invalid input, 3 unstable configuration, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .criteria import vlf_check
from .errors import CfcNopaError
from .feedback import cfc_variance, modified_threshold
from .model import AnalysisPoint, LoopParams, NopaParams
from .nopa import coupling_from_beta, nopa_only_variances, pump_scale, stand_alone_threshold
from .sweep import SweepSpec, optimize_joint, run_sweep

EXIT_INVALID, EXIT_UNSTABLE, EXIT_IO = 2, 3, 4

DEFAULTS = {
    "gamma1": 0.1,
    "gamma2": 0.003,
    "tau_s": 6.7e-10,
    "n_modes": 4,
    "beta": 0.15,
    "t": 0.0,
    "l": 0.01,
    "freq_hz": 1e6,
    "pump_normalization": "pair",
}

PRESETS = {
    "fig2": {"axis": "t", "from": 0.0, "to": 1.0, "fixed": {}},
    "fig3": {"axis": "freq_hz", "from": 0.0, "to": 20e6, "fixed": {"t": 0.8}},
    "fig4": {"axis": "beta", "from": 0.0, "to": 0.5, "fixed": {"t": 0.8}},
}


class InvalidInput(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def load_config(path: str | None) -> dict:
    config = dict(DEFAULTS)
    if path is None:
        return config
    try:
        loaded = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"config {path}: {exc}") from exc
    if not isinstance(loaded, dict):
        raise InvalidInput("config must be a JSON object")
    unknown = set(loaded) - set(DEFAULTS)
    if unknown:
        raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
    config.update(loaded)
    return config


def resolve(config: dict) -> tuple[NopaParams, LoopParams, AnalysisPoint]:
    nopa = NopaParams(
        gamma1=float(config["gamma1"]),
        gamma2=float(config["gamma2"]),
        tau=float(config["tau_s"]),
        n_modes=config["n_modes"],
        beta=float(config["beta"]),
        pump_normalization=config["pump_normalization"],
    )
    return nopa, LoopParams(t=float(config["t"]), l=float(config["l"])), AnalysisPoint(float(config["freq_hz"]))


def header(command: str, config: dict, nopa: NopaParams, extra: dict | None = None) -> list[str]:
    lines = [
        f"# cfcnopa {__version__}",
        f"# command: {command}",
        f"# config: {json.dumps(config, sort_keys=True)}",
        f"# coupling_k: {fmt(coupling_from_beta(nopa))}",
        f"# pump_scale_chi: {fmt(pump_scale(nopa))}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


@contextmanager
def output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _write(lines: list[str], path: str | None) -> None:
    with output(path) as fh:
        fh.write("\n".join(lines) + "\n")


def _verdict_rows(nopa, loop, at, strict: bool):
    report = cfc_variance(nopa, loop, at, strict=strict)
    bare = nopa_only_variances(nopa, at, strict=strict)
    return report, bare, vlf_check(report, bare)


def cmd_variance(args, config, nopa, loop, at) -> None:
    report, bare, verdicts = _verdict_rows(nopa, loop, at, args.strict)
    rows = ["quantity,cfc,bare"]
    cfc_fields, bare_fields = report.as_dict(), bare.as_dict()
    for key in cfc_fields:
        rows.append(f"{key},{fmt(cfc_fields[key])},{fmt(bare_fields[key])}")
    rows.append(f"unstable_combinations,{';'.join(report.unstable)},{';'.join(bare.unstable)}")
    rows += _verdict_lines(verdicts)
    _write(header("variance", config, nopa) + rows, args.output)


def _verdict_lines(verdicts) -> list[str]:
    lines = ["form,value,bound,entangled,enhanced_vs_bare"]
    for v in verdicts:
        lines.append(f"{v.form},{fmt(v.value)},{fmt(v.bound)},{fmt(v.entangled)},{fmt(v.enhanced_vs_bare)}")
    return lines


def cmd_criterion(args, config, nopa, loop, at) -> None:
    _, _, verdicts = _verdict_rows(nopa, loop, at, args.strict)
    _write(header("criterion", config, nopa) + _verdict_lines(verdicts), args.output)


def _sweep_lines(command: str, config: dict, spec: SweepSpec) -> list[str]:
    result = run_sweep(spec)
    extra = {
        "axis": f"{spec.axis} from {fmt(spec.from_value)} to {fmt(spec.to_value)} points {spec.points}",
        "crossovers": " ".join(fmt(x) for x in result.crossovers) or "none",
        "optimum": f"{fmt(result.optimum[0])} {fmt(result.optimum[1])}",
    }
    lines = header(command, config, spec.nopa, extra)
    lines.append("axis_value,cfc,bare,criterion_bound,vacuum_reference,stability_flag")
    vacuum = float(spec.nopa.n_modes + 2)
    for x, c, b, ok in zip(result.axis_values, result.cfc_values, result.bare_values, result.stable):
        cfc = "" if math.isnan(c) else fmt(float(c))
        bare = "" if math.isnan(b) else fmt(float(b))
        lines.append(f"{fmt(float(x))},{cfc},{bare},{fmt(4.0)},{fmt(vacuum)},{int(bool(ok))}")
    return lines


def cmd_sweep(args, config, nopa, loop, at) -> None:
    spec = SweepSpec(args.axis, args.from_value, args.to_value, args.points, nopa, loop, at)
    _write(_sweep_lines("sweep", config, spec), args.output)


def cmd_reproduce(args, config, nopa, loop, at) -> None:
    preset = PRESETS[args.figure]
    config = {**config, **preset["fixed"]}
    nopa, loop, at = resolve(config)
    spec = SweepSpec(preset["axis"], preset["from"], preset["to"], args.points, nopa, loop, at)
    _write(_sweep_lines(f"reproduce {args.figure}", config, spec), args.output)


def cmd_optimize(args, config, nopa, loop, at) -> None:
    free = tuple(f.strip() for f in args.free.split(",") if f.strip())
    best = optimize_joint(nopa, loop, at, free)
    lines = header("optimize", config, nopa, {"free": ",".join(free)})
    lines += ["t,beta,combined_squeezed", f"{fmt(best.t)},{fmt(best.beta)},{fmt(best.value)}"]
    _write(lines, args.output)


def cmd_threshold(args, config, nopa, loop, at) -> None:
    lines = header("threshold", config, nopa)
    lines += [
        "quantity,beta",
        f"stand_alone_threshold,{fmt(stand_alone_threshold(nopa))}",
        f"modified_threshold,{fmt(modified_threshold(nopa, loop))}",
    ]
    _write(lines, args.output)


COMMANDS = {
    "variance": cmd_variance,
    "criterion": cmd_criterion,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
    "optimize": cmd_optimize,
    "threshold": cmd_threshold,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with flat parameter keys")
    common.add_argument("--save-config", metavar="PATH", help="write the resolved config as JSON")
    common.add_argument("-o", "--output", help="output file (default: stdout)")
    common.add_argument("--gamma1", type=float)
    common.add_argument("--gamma2", type=float)
    common.add_argument("--tau-s", dest="tau_s", type=float)
    common.add_argument("--n-modes", dest="n_modes", type=int)
    common.add_argument("--beta", type=float)
    common.add_argument("--t", type=float)
    common.add_argument("--l", type=float)
    common.add_argument("--freq-hz", dest="freq_hz", type=float)
    common.add_argument("--pump-normalization", dest="pump_normalization", choices=("pair", "collective"))
    common.add_argument("--strict", action="store_true", help="fail on any unstable combination")

    parser = argparse.ArgumentParser(prog="cfcnopa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("variance", parents=[common], help="variances and verdicts at one point")
    sub.add_parser("criterion", parents=[common], help="inseparability verdicts at one point")
    p = sub.add_parser("sweep", parents=[common], help="sweep t, freq_hz or beta to CSV")
    p.add_argument("--axis", required=True)
    p.add_argument("--from", dest="from_value", type=float, required=True)
    p.add_argument("--to", dest="to_value", type=float, required=True)
    p.add_argument("--points", type=int, default=501)
    p = sub.add_parser("reproduce", parents=[common], help="preset sweeps for the reference figures")
    p.add_argument("figure", choices=sorted(PRESETS))
    p.add_argument("--points", type=int, default=501)
    p = sub.add_parser("optimize", parents=[common], help="minimize the criterion value")
    p.add_argument("--free", default="t", help="comma-separated subset of t,beta")
    sub.add_parser("threshold", parents=[common], help="stand-alone and feedback-modified thresholds")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        for key in DEFAULTS:
            value = getattr(args, key, None)
            if value is not None:
                config[key] = value
        nopa, loop, at = resolve(config)
        if args.save_config:
            Path(args.save_config).write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
        COMMANDS[args.command](args, config, nopa, loop, at)
    except CfcNopaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
