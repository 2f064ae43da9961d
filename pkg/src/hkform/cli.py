"""Command-line front end.

Every subcommand accepts ``--config file.json``; keys are the long option
names with dashes replaced by underscores. Flags given on the command line
take precedence over config values, which take precedence over defaults.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import basis_transform as bt
from .errors import HeatKernelError
from .fields import load_fields
from .form_factors import EvalConfig, FormFactorKind, evaluate
from .lattice import LatticeSpec, exact_trace
from .trace import SpectralFunction, laplace_trace
from .verification import SUITES, run_suite

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "ff-table": {"kinds": "basic", "d": None, "x": None, "log_grid": None, "output": None},
    "plot-data": {"log_grid": "1e-2:1e4:121", "output": None},
    "verify": {"d": None, "fields": None, "n_sites": None, "s": None, "eps": None, "output": None},
    "basis-convert": {"source": "ricr", "target": "weyl", "d": None, "x": None, "log_grid": None,
                      "input": None, "output": None},
    "lattice-trace": {"fields": None, "n_sites": None, "s": None, "diagonal": False, "output": None},
    "laplace-trace": {"fields": None, "family": "massive", "param": None, "s_min": 0.0, "output": None},
}


class UsageError(Exception):
    """Bad flags or config values; maps to exit code 2."""


def _fmt(v: float) -> str:
    return "{:.17g}".format(float(v))


def _parse_floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        if isinstance(text, (list, tuple)):
            return [float(t) for t in text]
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _parse_ints(text) -> list[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        try:
            return [int(t) for t in text]
        except (TypeError, ValueError):
            raise UsageError(f"cannot parse integer list {text!r}") from None
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def _log_grid(text: str) -> list[float]:
    """``lo:hi:n`` to n log-spaced points."""
    try:
        lo, hi, n = str(text).split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"log grid must look like lo:hi:n, got {text!r}") from None
    if not (0 < lo < hi) or n < 2:
        raise UsageError("log grid needs 0 < lo < hi and n >= 2")
    return [float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n)]


def _x_grid(opts: dict) -> list[float]:
    xs = []
    if opts.get("x") is not None:
        xs += _parse_floats(opts["x"])
    if opts.get("log_grid") is not None:
        xs += _log_grid(opts["log_grid"])
    if not xs:
        raise UsageError("give --x and/or --log-grid")
    if any(not x >= 0 for x in xs):
        raise UsageError("x values must be >= 0")
    return xs


class _Out:
    """Writes to a file (LF endings) or stdout."""

    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.handle = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.handle

    def __exit__(self, *exc):
        if self.path:
            self.handle.close()
        return False


def _write_csv(path, header, rows):
    with _Out(path) as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path, doc):
    with _Out(path) as out:
        out.write(json.dumps(doc, indent=2) + "\n")


def _positive(opts: dict, key: str, kind=float):
    value = opts.get(key)
    if value is None:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    try:
        value = kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"--{key.replace('_', '-')} must be a number") from None
    if not value > 0:
        raise UsageError(f"--{key.replace('_', '-')} must be positive")
    return value


def cmd_ff_table(opts: dict, cfg: EvalConfig) -> int:
    labels = [k.strip() for k in str(opts["kinds"]).split(",") if k.strip()]
    d = opts.get("d")
    kinds = [FormFactorKind.parse(k, int(d) if d is not None else None) for k in labels]
    xs = _x_grid(opts)
    rows = [[x] + [evaluate(k, x, cfg) for k in kinds] for x in xs]
    _write_csv(opts["output"], ["x"] + labels, rows)
    return EXIT_OK


def cmd_plot_data(opts: dict, cfg: EvalConfig) -> int:
    xs = [0.0] + _log_grid(opts["log_grid"])
    _write_csv(opts["output"], ["x", "f"], [[x, evaluate("basic", x, cfg)] for x in xs])
    return EXIT_OK


def cmd_verify(opts: dict, cfg: EvalConfig) -> int:
    suite = opts["suite"]
    kwargs = {}
    d = opts.get("d")
    if suite in ("projectors", "diagrams", "bases") and d is not None:
        kwargs["d_values"] = tuple(_parse_ints(d))
    if suite == "resolvent" and d is not None:
        kwargs["d"] = _parse_ints(d)[0]
    if suite == "lattice":
        if opts.get("fields") is None:
            raise UsageError("the lattice suite needs --fields FILE")
        fields = load_fields(opts["fields"])
        if d is not None and _parse_ints(d) != [fields.d]:
            raise UsageError(f"--d {d} does not match the {fields.d}-dimensional field data")
        kwargs["fields"] = fields
        if opts.get("n_sites") is not None:
            kwargs["n_sites"] = int(_positive(opts, "n_sites", int))
        if opts.get("s") is not None:
            kwargs["s_values"] = _parse_floats(opts["s"])
        if opts.get("eps") is not None:
            kwargs["eps"] = _positive(opts, "eps")
    report = run_suite(suite, **kwargs)
    _write_json(opts["output"], report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def _read_table(path, slots) -> list[tuple[float, dict]]:
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            rows = [(float(r["x"]), {s: float(r[s]) for s in slots}) for r in reader]
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read a table with columns x,{','.join(slots)} from {path}: {exc}") from None
    return rows


def _convert(ffs: bt.FormFactorSet, target: str, d):
    if ffs.basis == target:
        return ffs
    if ffs.basis == "weyl":
        ffs = bt.from_weyl(ffs)
    elif ffs.basis == "bv":
        ffs = bt.from_bv(ffs)
    if target == "weyl":
        if d is None:
            raise UsageError("conversion to the Weyl basis needs --d")
        return bt.to_weyl(ffs, int(d))
    if target == "bv":
        return bt.to_bv(ffs)
    return ffs


def cmd_basis_convert(opts: dict, cfg: EvalConfig) -> int:
    source, target, d = opts["source"], opts["target"], opts.get("d")
    for name in (source, target):
        if name not in bt.SLOTS:
            raise UsageError(f"unknown basis {name!r}; expected one of {sorted(bt.SLOTS)}")
    d = int(d) if d is not None else None
    out_slots = bt.SLOTS[target]
    rows = []
    if opts.get("input"):
        for x, values in _read_table(opts["input"], bt.SLOTS[source]):
            entries = {slot: (lambda _x, v=v: v) for slot, v in values.items()}
            converted = _convert(bt.FormFactorSet(source, entries, d), target, d)(x)
            rows.append([x] + [converted[s] for s in out_slots])
    else:
        ffs = _convert(bt.closed_form_set(source, d, cfg), target, d)
        for x in _x_grid(opts):
            converted = ffs(x)
            rows.append([x] + [converted[s] for s in out_slots])
    _write_csv(opts["output"], ["x"] + list(out_slots), rows)
    return EXIT_OK


def _fields_from(opts: dict):
    if opts.get("fields") is None:
        raise UsageError("--fields FILE is required")
    return load_fields(opts["fields"])


def cmd_lattice_trace(opts: dict, cfg: EvalConfig) -> int:
    fields = _fields_from(opts)
    n = opts.get("n_sites") or (512 if fields.d == 1 else 48)
    spec = LatticeSpec(fields.d, int(n), fields.box_length)
    s = _positive(opts, "s")
    res = exact_trace(spec, fields, s, diagonal=bool(opts.get("diagonal")))
    doc = res.to_json()
    if res.diagonal is not None:
        doc["diagonal"] = [float(v) for v in res.diagonal]
    _write_json(opts["output"], doc)
    return EXIT_OK


def cmd_laplace_trace(opts: dict, cfg: EvalConfig) -> int:
    fields = _fields_from(opts)
    param = _positive(opts, "param")
    family = opts["family"]
    if family == "heat":
        h = SpectralFunction.heat_kernel(param)
    elif family == "massive":
        h = SpectralFunction.massive_resolvent(param, s_min=float(opts.get("s_min") or 0.0))
    else:
        raise UsageError(f"unknown family {family!r}; expected heat or massive")
    _write_json(opts["output"], {"family": family, "parameter": param, "value": laplace_trace(fields, h, cfg)})
    return EXIT_OK


COMMANDS = {
    "ff-table": cmd_ff_table,
    "plot-data": cmd_plot_data,
    "verify": cmd_verify,
    "basis-convert": cmd_basis_convert,
    "lattice-trace": cmd_lattice_trace,
    "laplace-trace": cmd_laplace_trace,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hkform", description="Non-local heat kernel form factors.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--output", "-o", help="output file (default stdout)")
        # defaults are applied after merging the config file
        p.set_defaults(**{k: None for k in DEFAULTS[name]})
        return p

    p = add("ff-table", "tabulate form factors as CSV")
    p.add_argument("--kinds", help="comma-separated labels, e.g. ric,r,ru,u,omega or c(4)")
    p.add_argument("--d", type=int, help="dimension for the Weyl-basis kinds")
    p.add_argument("--x", help="comma-separated x values")
    p.add_argument("--log-grid", help="lo:hi:n log-spaced grid")

    p = add("plot-data", "CSV of (x, f(x)) from 0 into the asymptotic region")
    p.add_argument("--log-grid", help="lo:hi:n log-spaced grid appended after x = 0")

    p = add("verify", "run a verification suite and write a JSON report")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--d", help="dimension(s), comma-separated")
    p.add_argument("--fields", help="field-data JSON (lattice suite)")
    p.add_argument("--n-sites", type=int, help="lattice sites per side")
    p.add_argument("--s", help="comma-separated proper times (lattice suite)")
    p.add_argument("--eps", type=float, help="isolation amplitude (lattice suite)")

    p = add("basis-convert", "convert form factors between bases")
    p.add_argument("--from", dest="source", help="ricr, weyl or bv")
    p.add_argument("--to", dest="target", help="ricr, weyl or bv")
    p.add_argument("--d", type=int, help="dimension for the Weyl basis")
    p.add_argument("--x", help="comma-separated x values (closed-form input)")
    p.add_argument("--log-grid", help="lo:hi:n log-spaced grid (closed-form input)")
    p.add_argument("--input", help="CSV with columns x and the source slots")

    p = add("lattice-trace", "exact lattice trace of exp(-s Delta) as JSON")
    p.add_argument("--fields", help="field-data JSON")
    p.add_argument("--n-sites", type=int, help="lattice sites per side")
    p.add_argument("--s", type=float, help="proper time")
    p.add_argument("--diagonal", action="store_const", const=True, help="include the kernel diagonal")

    p = add("laplace-trace", "Tr h(Delta) from the second-order heat trace")
    p.add_argument("--fields", help="field-data JSON")
    p.add_argument("--family", choices=("heat", "massive"))
    p.add_argument("--param", type=float, help="t for heat, m^2 for massive")
    p.add_argument("--s-min", type=float, help="lower proper-time cutoff")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    opts = {k: v for k, v in vars(args).items()}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        known = set(DEFAULTS[args.command]) | {"suite"}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        for key, value in doc.items():
            if opts.get(key) is None:
                opts[key] = value
    for key, value in DEFAULTS[args.command].items():
        if opts.get(key) is None:
            opts[key] = value
    return opts


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merge(args)
        cfg = EvalConfig.from_env()
        return COMMANDS[args.command](opts, cfg)
    except UsageError as exc:
        print(f"hkform: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HeatKernelError, ValueError) as exc:
        print(f"hkform: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
