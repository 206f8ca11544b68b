"""Command-line interface: ``negrefract <subcommand> [options]``.

Exit status is 0 on success, 2 when some rows carry an error and 1 on a
fatal configuration problem.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

from .errors import ConfigurationError, ResponseError
from .params import CONFIG_KEYS, load_config
from . import scan

log = logging.getLogger("negrefract")

COMMANDS = ("spectrum", "nonchiral", "phase", "density", "tunability", "impedance-find", "saturation", "angle")
# command arguments that are recorded in the output header for re-runs
_RERUN_KEYS = ("points", "units", "start", "stop", "delta", "density", "handedness",
               "amplitudes", "ratio", "gammap_sat", "n_target", "cap")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="key = value parameter file")
    p.add_argument("--from-header", metavar="PATH",
                   help="reuse configuration and sweep settings recorded in a previous output file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration key (repeatable)")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--points", type=int)
    p.add_argument("--units", choices=scan.UNITS)
    p.add_argument("--density", type=float, help="number density in cm^-3")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="negrefract", description="Optical response of a driven chiral atomic medium.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (("spectrum", "full response versus detuning"),
                           ("nonchiral", "spectrum with the ground-state coherence removed")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--start", type=float)
        p.add_argument("--stop", type=float)
        p.add_argument("--handedness", choices=("+", "-"), default="+")

    p = sub.add_parser("phase", help="response versus coupling phase at fixed detuning")
    _common(p)
    p.add_argument("--delta", type=float, help="fixed detuning in --units (default -0.045 gammap)")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=2 * math.pi)

    p = sub.add_parser("density", help="response versus number density at fixed detuning")
    _common(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--start", type=float, default=1e14)
    p.add_argument("--stop", type=float, default=1e17)

    p = sub.add_parser("tunability", help="index versus |Omega_c|/gamma3")
    _common(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--start", type=float, default=1e-2)
    p.add_argument("--stop", type=float, default=1e1)

    p = sub.add_parser("impedance-find", help="search an impedance-matched n = -1 point")
    _common(p)
    p.add_argument("--n-target", dest="n_target", type=float, default=-1.0)
    p.add_argument("--no-index-target", dest="n_target", action="store_const", const=None)
    p.add_argument("--cap", type=float, default=1e-2)

    p = sub.add_parser("saturation", help="exact versus linear polarizabilities")
    _common(p)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--amplitudes", type=float, nargs="+", default=[1e-3, 1.0, 10.0],
                   help="electric probe Rabi frequencies in units of gamma2")
    p.add_argument("--ratio", type=float, default=137.0, help="OmegaE/OmegaB")
    p.add_argument("--gammap", dest="gammap_sat", type=float, default=0.0,
                   help="homogeneous width in units of gamma2 (default 0)")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("angle", help="index versus propagation angle")
    _common(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=math.pi)
    return parser


def _overrides(pairs):
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS:
            raise ConfigurationError(f"bad --set item {item!r}")
        try:
            out[key] = int(value) if key == "doppler_nodes" else float(value)
        except ValueError as exc:
            raise ConfigurationError(f"bad value in --set {item!r}") from exc
    return out


def _apply_header(args, argv):
    meta = scan.read_metadata(args.from_header)
    if meta.get("command") != args.command:
        raise ConfigurationError("header was written by a different subcommand")
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for k in _RERUN_KEYS:
        if f"cli.{k}" in meta and k not in explicit:
            setattr(args, k, meta[f"cli.{k}"])
    return scan.config_from_metadata(meta)


def run(args, argv=()) -> scan.ScanResult:
    base = {}
    if args.from_header:
        base = _apply_header(args, argv)
    cfg = load_config(args.config, {**base, **_overrides(args.set)})
    if args.density is not None:
        cfg["density_cm3"] = args.density
    points = args.points
    c = args.command
    if c in ("spectrum", "nonchiral"):
        res = scan.run_spectrum(cfg, points or 2001, args.start, args.stop, args.units,
                                nonchiral=(c == "nonchiral"), handedness=args.handedness)
    elif c == "phase":
        res = scan.run_phase(cfg, points or 361, args.start, args.stop, args.delta, args.units)
    elif c == "density":
        res = scan.run_density(cfg, points or 301, args.start, args.stop, args.delta, args.units)
    elif c == "tunability":
        res = scan.run_tunability(cfg, points or 301, args.start, args.stop, args.delta, args.units, args.density)
    elif c == "angle":
        res = scan.run_angle(cfg, points or 181, args.start, args.stop, args.delta, args.units, args.density)
    elif c == "saturation":
        res = scan.run_saturation(cfg, points or 201, args.start, args.stop, tuple(args.amplitudes),
                                  args.ratio, args.units, args.gammap_sat, args.workers)
    elif c == "impedance-find":
        res, _ = scan.run_impedance_find(cfg, args.density, args.n_target, args.cap, args.units)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigurationError(f"unknown command {c}")
    for k in _RERUN_KEYS:
        if hasattr(args, k):
            res.metadata[f"cli.{k}"] = getattr(args, k)
    return res


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        res = run(args, argv)
    except (ConfigurationError, OSError, ValueError) as exc:
        if isinstance(exc, ResponseError) and not isinstance(exc, ConfigurationError):
            log.error("fatal: %s", exc)
        print(f"negrefract: error: {exc}", file=sys.stderr)
        return 1
    text = scan.write_result(res, args.out, args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    if res.n_errors:
        log.warning("%d row(s) carry errors", res.n_errors)
        return 2
    if res.command == "impedance-find" and res.metadata.get("status") != "found":
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
