"""Command line entry point: ``quench-qgt {scan,verify,integrate,peaks,diagnose}``.

Exit codes: 0 success, 2 configuration error, 3 degenerate grid or point,
4 verification residual exceeded, 5 I/O failure.

A flat ``key = value`` file passed with ``--config`` supplies the same keys as
the long flags (``k-points`` or ``k_points``); flags given on the command line
win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytic, scan
from .errors import (
    AtCriticalPoint,
    ConfigInvalid,
    DegenerateGrid,
    GapClosed,
    InvalidParameters,
    IoFailure,
    StepTooLarge,
)
from .quench import QuenchProtocol

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4, 5

DEFAULTS = {
    "mi": None,
    "mf": None,
    "j2": 1.0,
    "k_points": None,
    "t_max": 20.0,
    "t_points": 201,
    "components": "g_kk",
    "fd_step": 1e-5,
    "format": "csv",
    "out": None,
    "seed": 0,
    "workers": 1,
}
CASTS = {
    "mi": float,
    "mf": float,
    "j2": float,
    "k_points": int,
    "t_max": float,
    "t_points": int,
    "components": str,
    "fd_step": float,
    "format": str,
    "out": str,
    "seed": int,
    "workers": int,
}


def read_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in CASTS:
            raise ConfigInvalid(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = CASTS[key](value)
        except ValueError as exc:
            raise ConfigInvalid(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file with the same keys as the flags")
    common.add_argument("--mi", type=float, help="initial dimerization m_i")
    common.add_argument("--mf", type=float, help="final dimerization m_f")
    common.add_argument("--j2", type=float, help="hopping J2 (default 1)")
    common.add_argument("--k-points", type=int, help="number of momentum nodes on (-pi, pi]")
    common.add_argument("--t-max", type=float, help="last time of the grid (default 20)")
    common.add_argument("--t-points", type=int, help="number of time nodes (default 201)")
    common.add_argument("--components", help=f"comma separated subset of {','.join(scan.COMPONENTS)}")
    common.add_argument("--fd-step", type=float, help="finite-difference step for verification (default 1e-5)")
    common.add_argument("--format", choices=scan.FORMATS, help="output format (default csv)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", type=int, help="seed for the verification subsample")
    common.add_argument("--workers", type=int, help="threads used for grid rows (default 1)")

    parser = argparse.ArgumentParser(prog="quench-qgt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("scan", parents=[common], help="evaluate components on a (k, t) grid")
    sub.add_parser("verify", parents=[common], help="scan and cross-check a subsample by finite differences")
    sub.add_parser("integrate", parents=[common], help="zone integral of Im Q_kt on the time grid")
    sub.add_parser("peaks", parents=[common], help="energy-variance peak report")
    sub.add_parser("diagnose", parents=[common], help="zone-boundary sign diagnostics")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(read_config_file(args.config))
    for key in CASTS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _protocol(opts: dict, required: bool = True) -> QuenchProtocol | None:
    if opts["mi"] is None or opts["mf"] is None:
        if required:
            raise ConfigInvalid("--mi and --mf are required")
        return None
    return QuenchProtocol(opts["mi"], opts["mf"], opts["j2"])


def _scan_config(opts: dict, fd_verify: bool) -> scan.ScanConfig:
    comps = tuple(c.strip() for c in opts["components"].split(",") if c.strip())
    return scan.ScanConfig(
        proto=_protocol(opts),
        k_points=opts["k_points"] or 401,
        t_max=opts["t_max"],
        t_points=opts["t_points"],
        components=comps,
        fd_verify=fd_verify,
        fd_step=opts["fd_step"],
        seed=opts["seed"],
        format=opts["format"],
        workers=opts["workers"],
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc


def _dump_result(result: scan.ScanResult, opts: dict) -> None:
    if opts["out"] is None:
        text = scan.to_csv_text(result) if opts["format"] == "csv" else scan.to_json_text(result)
        sys.stdout.write(text)
    else:
        scan.export(result, opts["out"], opts["format"])


def cmd_scan(opts: dict) -> int:
    _dump_result(scan.run_scan(_scan_config(opts, fd_verify=False)), opts)
    return EXIT_OK


def cmd_verify(opts: dict) -> int:
    result = scan.run_scan(_scan_config(opts, fd_verify=True))
    if opts["out"] is not None:
        scan.export(result, opts["out"], opts["format"])
    summary = dict(result.metadata["verification"])
    worst = summary["fd_residual_max"]
    summary["tolerance"] = scan.VERIFY_TOLERANCE
    summary["passed"] = worst is not None and worst < scan.VERIFY_TOLERANCE
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


def cmd_integrate(opts: dict) -> int:
    proto = _protocol(opts)
    k_points = opts["k_points"] or 512
    ts = scan.t_grid(opts["t_max"], opts["t_points"])
    values = [scan.bz_integral_im_qkt(proto, float(t), k_points) for t in ts]
    if opts["format"] == "csv":
        text = "t,integral_im_qkt\n" + "".join(f"{t:.16e},{v:.16e}\n" for t, v in zip(ts, values))
    else:
        text = json.dumps({"k_points": k_points, "t": ts.tolist(), "integral_im_qkt": values}) + "\n"
    _emit(text, opts["out"])
    return EXIT_OK


def cmd_peaks(opts: dict) -> int:
    proto = _protocol(opts, required=False)
    protocols = [proto] if proto is not None else list(scan.REFERENCE_PROTOCOLS)
    report = scan.gtt_peak_report(protocols, opts["k_points"] or 512)
    _emit(json.dumps(report.as_dict(), indent=2) + "\n", opts["out"])
    return EXIT_OK


def cmd_diagnose(opts: dict) -> int:
    report = analytic.boundary_sign_diagnostic(_protocol(opts))
    _emit(json.dumps(report.as_dict(), indent=2) + "\n", opts["out"])
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "verify": cmd_verify,
    "integrate": cmd_integrate,
    "peaks": cmd_peaks,
    "diagnose": cmd_diagnose,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](resolve(args))
    except (ConfigInvalid, InvalidParameters, StepTooLarge) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GapClosed, DegenerateGrid, AtCriticalPoint) as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except IoFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
