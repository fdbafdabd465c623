"""Command-line entry point: ``curvebill <command> [options]``.

Settings come from built-in defaults, then an optional JSON config file
(``--config``), then command-line flags.  The seed defaults to the
``CURVEBILL_SEED`` environment variable.  Every output file embeds the
resolved configuration.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .billiard import OK, map_power, phase_distance
from .boundary import FamilySpec, make_family
from .errors import CurvebillError
from .measure import sample_mu, scaling_study
from .periodic import classify_theorem2, compatibility_report, find_3period
from .verify import format_table, run_battery

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

COMMANDS = ("find-orbits", "measure-scan", "verify", "octant-demo")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str = "find-orbits"
    table: dict = field(default_factory=lambda: {"family": "octant_s2"})
    seed: int = 0
    n: int = 10000
    eps0: float = 1e-3
    halvings: int = 3
    period: int = 3
    multistarts: int = 20
    workers: int = 1
    out: str | None = None
    format: str = "json"
    starts: list = field(default_factory=list)
    debug_printed_s2: bool = False
    debug_flip_kg: bool = False

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        try:
            self.table = FamilySpec.parse(self.table).to_dict()
            make_family(self.table)
        except CurvebillError as exc:
            raise ConfigError(str(exc)) from None
        ints = ("seed", "n", "halvings", "period", "multistarts", "workers")
        for name in ints:
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{name} must be an integer")
        if not isinstance(self.eps0, (int, float)) or not self.eps0 > 0:
            raise ConfigError("eps0 must be a positive number")
        self.eps0 = float(self.eps0)
        if self.n < 1 or self.multistarts < 1 or self.workers < 1 or self.period < 1:
            raise ConfigError("n, multistarts, workers and period must be positive")
        if self.halvings < 3:
            raise ConfigError("halvings must be at least 3")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        try:
            self.starts = [[float(s), float(p)] for s, p in self.starts]
        except (TypeError, ValueError):
            raise ConfigError("starts must be a list of [s, phi] pairs") from None


# ---------------------------------------------------------------------------
# output helpers

def _num(x) -> str:
    x = float(x)
    return format(x, ".17g") if math.isfinite(x) else "nan"


def _emit(cfg: ExperimentConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_find_orbits(cfg: ExperimentConfig) -> int:
    b = make_family(cfg.table)
    orbits = find_3period(b, cfg.multistarts, cfg.seed, workers=cfg.workers)
    reports = [compatibility_report(b, o) for o in orbits]
    doc = {
        "config": cfg.to_dict(),
        "table": b.descriptor,
        "orbits": [r.to_dict() for r in reports],
        "summary": classify_theorem2(reports),
    }
    _emit(cfg, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_measure_scan(cfg: ExperimentConfig) -> int:
    b = make_family(cfg.table)
    scan = scaling_study(b, cfg.n, cfg.eps0, cfg.halvings, cfg.seed,
                         period=cfg.period, workers=cfg.workers)
    # neither the worker count nor the destination changes the numbers
    scan.config = {k: v for k, v in cfg.to_dict().items() if k not in ("workers", "out")}
    _emit(cfg, scan.to_csv() if cfg.format == "csv" else scan.to_json() + "\n")
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig) -> int:
    results = run_battery(cfg.seed, printed_s2=cfg.debug_printed_s2, flip_kg=cfg.debug_flip_kg)
    table = format_table(results)
    header = "# config: " + cfg.to_json() + "\n"
    if cfg.out:
        _emit(cfg, header + table + "\n")
    print(table)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_octant_demo(cfg: ExperimentConfig) -> int:
    b = make_family("octant_s2")
    smp = sample_mu(b, cfg.n, cfg.seed)
    s0 = np.concatenate([[p[0] for p in cfg.starts], smp.s])
    phi0 = np.concatenate([[p[1] for p in cfg.starts], smp.phi])
    verts = [s0]
    s, phi = s0, phi0
    length = np.zeros(s0.size)
    status = np.zeros(s0.size, dtype=np.int8)
    for _ in range(3):
        s, phi, tau, st = map_power(b, s, phi, 1)
        status = np.where(status != OK, status, st)
        length += tau
        verts.append(s)
    err = phase_distance(b.total_length, s0, phi0, s, phi)
    ok = np.flatnonzero(status == OK)
    excluded = np.flatnonzero(status != OK)
    pts = [b.points(v[ok]) for v in verts[:3]]

    buf = io.StringIO()
    buf.write("# config: " + json.dumps(dict(cfg.to_dict(), table=b.descriptor),
                                        sort_keys=True) + "\n")
    buf.write(f"# excluded (corner/grazing/no-hit): {excluded.size} "
              f"indices={excluded.tolist()}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = ["orbit", "s", "phi", "perimeter", "return_error"]
    cols += [f"{c}{i}" for i in range(3) for c in ("x", "y", "z")]
    w.writerow(cols)
    for j, k in enumerate(ok):
        row = [int(k), _num(s0[k]), _num(phi0[k]), _num(length[k]), _num(err[k])]
        row += [_num(x) for i in range(3) for x in pts[i][j]]
        w.writerow(row)
    _emit(cfg, buf.getvalue())
    return EXIT_OK


HANDLERS = {
    "find-orbits": cmd_find_orbits,
    "measure-scan": cmd_measure_scan,
    "verify": cmd_verify,
    "octant-demo": cmd_octant_demo,
}


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvebill", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--table", help="table descriptor, e.g. 'ellipse_euclidean:a=1.2,b=1.0'")
        p.add_argument("--seed", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--eps0", type=float)
        p.add_argument("--halvings", type=int)
        p.add_argument("--period", type=int)
        p.add_argument("--multistarts", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--start", nargs=2, type=float, action="append", dest="starts",
                       metavar=("S", "PHI"), help="extra initial condition (octant-demo)")
        if name == "verify":
            p.add_argument("--debug-printed-s2", action="store_true", default=None,
                           help="use the spherical evolution matrix with +sin lower-left")
            p.add_argument("--debug-flip-kg", action="store_true", default=None,
                           help="negate geodesic curvature in reflection matrices")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    d = {"command": args.command}
    env_seed = os.environ.get("CURVEBILL_SEED")
    if env_seed is not None:
        try:
            d["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"CURVEBILL_SEED={env_seed!r} is not an integer") from None
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded.pop("command", None)
        d.update(loaded)
    for key in ("seed", "n", "eps0", "halvings", "period", "multistarts", "workers",
                "out", "format", "starts", "debug_printed_s2", "debug_flip_kg"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    if args.table is not None:
        d["table"] = args.table
    if args.command == "measure-scan" and "format" not in d:
        d["format"] = "csv"
    return ExperimentConfig.from_dict(d)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return HANDLERS[cfg.command](cfg)
    except (CurvebillError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
