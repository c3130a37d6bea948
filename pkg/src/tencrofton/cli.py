"""Command line front end.

Subcommands: ``coeffs``, ``tensor``, ``identities``, ``verify`` and ``catalog``.
Every flag can also come from a JSON file given with ``--config``; explicit
flags win.  Exit status is 0 when everything ran and passed, 1 when a check
failed and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from ._validation import check_box
from .crofton import FORMULAS, CroftonDomainError, coefficient_table
from .exact import DomainError
from .grassmann_mc import DEFAULT_THRESHOLD, default_workers, verify
from .identities import SUITES
from .polytope import DegenerateError, catalog, load_body
from .symtensor import monomials
from .tencm import MeasureSpec, phi

log = logging.getLogger("tencrofton")

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2

DEFAULTS = {
    "format": "json",
    "samples": 100_000,
    "seed": 0,
    "threshold": DEFAULT_THRESHOLD,
    "r": 0,
    "suite": "all",
}

CATALOG_NAMES = ("cube", "simplex", "crosspolytope")


class UsageError(ValueError):
    pass


def _add_params(p: argparse.ArgumentParser, names: str):
    for name in names:
        p.add_argument(f"--{name}", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tencrofton", description="Tensorial Crofton formulae for polytopes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file whose keys mirror the flags")
    common.add_argument("--output", "-o", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", parents=[common], help="exact coefficient table of a formula")
    p.add_argument("--formula", choices=sorted(FORMULAS), default=None)
    _add_params(p, ("n", "k", "j", "s", "i"))

    p = sub.add_parser("tensor", parents=[common], help="tensorial curvature measure of a body")
    p.add_argument("--body", default=None, help="catalog spec like cube:3 or a JSON vertex file")
    _add_params(p, ("j", "r", "s", "eps"))
    p.add_argument("--box", nargs="+", default=None, help="interleaved bounds lo1 hi1 ... or 'all'")

    p = sub.add_parser("identities", parents=[common], help="run identity suites")
    p.add_argument("--suite", choices=(*SUITES, "all"), default=None)

    p = sub.add_parser("verify", parents=[common], help="Monte Carlo check of a Crofton formula")
    p.add_argument("--formula", choices=sorted(FORMULAS), default=None)
    p.add_argument("--body", default=None)
    _add_params(p, ("n", "k", "j", "s", "i", "r", "samples", "seed", "workers"))
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--box", nargs="+", default=None)

    p = sub.add_parser("catalog", parents=[common], help="list catalog bodies or describe one")
    p.add_argument("--body", default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over built-in defaults."""
    merged = dict(DEFAULTS)
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        if data.get("command", args.command) != args.command:
            raise UsageError(f"config is for command {data['command']!r}, not {args.command!r}")
        merged.update({k.replace("-", "_"): v for k, v in data.items() if k != "command"})
    for key, value in vars(args).items():
        if value is not None and key != "config":
            merged[key] = value
    merged["command"] = args.command
    return merged


def _box(value, dim: int):
    if value is None:
        return None
    if isinstance(value, str):
        value = [value]
    if len(value) == 1 and value[0] == "all":
        return None
    try:
        return check_box([float(v) for v in value], dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _need(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join('--' + k for k in missing)}")


def _param_kwargs(cfg: dict, names=("n", "k", "j", "s", "i")) -> dict:
    return {k: cfg.get(k) for k in names if cfg.get(k) is not None}


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def cmd_coeffs(cfg: dict) -> tuple[int, str]:
    _need(cfg, "formula")
    table = coefficient_table(cfg["formula"], **_param_kwargs(cfg))
    text = table.to_csv() if cfg["format"] == "csv" else _dump(table.to_json())
    return EXIT_OK, text


def _tensor_rows(tensor) -> list[dict]:
    return [{"index": " ".join(map(str, a)), "value": repr(float(v))}
            for a, v in zip(monomials(tensor.dim, tensor.rank), tensor.to_vector())]


def cmd_tensor(cfg: dict) -> tuple[int, str]:
    _need(cfg, "body", "j")
    body = load_body(cfg["body"])
    spec = MeasureSpec(body.dim, cfg["j"], cfg["r"], cfg.get("s") or 0, cfg.get("eps") or 0)
    value = phi(body, spec, _box(cfg.get("box"), body.dim))
    if cfg["format"] == "csv":
        return EXIT_OK, _csv(_tensor_rows(value.value), ["index", "value"])
    return EXIT_OK, _dump({"body": body.name, **value.to_json()})


def cmd_identities(cfg: dict) -> tuple[int, str]:
    names = list(SUITES) if cfg["suite"] == "all" else [cfg["suite"]]
    reports = []
    for name in names:
        log.info("running suite %s", name)
        reports.append(SUITES[name]())
    ok = all(r.passed for r in reports)
    if cfg["format"] == "csv":
        rows = [{"suite": r.name, "group": g, "passed": p, "total": t, "pass": p == t}
                for r in reports for g, (p, t) in r.groups().items()]
        text = _csv(rows, ["suite", "group", "passed", "total", "pass"])
    else:
        text = _dump({"pass": ok, "suites": [r.to_json() for r in reports]})
    return (EXIT_OK if ok else EXIT_FAILED), text


def cmd_verify(cfg: dict) -> tuple[int, str]:
    _need(cfg, "formula", "body")
    body = load_body(cfg["body"])
    workers = cfg.get("workers") or default_workers()
    report = verify(cfg["formula"], body, box=_box(cfg.get("box"), body.dim), r=cfg["r"],
                    samples=cfg["samples"], seed=cfg["seed"], workers=workers, threshold=cfg["threshold"],
                    **_param_kwargs(cfg))
    if cfg["format"] == "csv":
        row = report.summary_row()
        text = _csv([row], list(row))
    else:
        text = _dump(report.to_json())
    return (EXIT_OK if report.passed else EXIT_FAILED), text


def cmd_catalog(cfg: dict) -> tuple[int, str]:
    if cfg.get("body"):
        P = load_body(cfg["body"])
        info = {"name": P.name, "dim": P.dim, "face_counts": P.face_counts(),
                "vertices": P.vertices.tolist(), "circumradius": P.circumradius}
        return EXIT_OK, _dump(info)
    rows = [{"name": name, "dims": "1-6", "example": f"{name}:3",
             "face_counts_n3": " ".join(map(str, catalog(name, 3).face_counts()))} for name in CATALOG_NAMES]
    if cfg["format"] == "csv":
        return EXIT_OK, _csv(rows, ["name", "dims", "example", "face_counts_n3"])
    return EXIT_OK, _dump({"bodies": rows})


COMMANDS = {
    "coeffs": cmd_coeffs,
    "tensor": cmd_tensor,
    "identities": cmd_identities,
    "verify": cmd_verify,
    "catalog": cmd_catalog,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        code, text = COMMANDS[args.command](cfg)
    except (CroftonDomainError, DomainError, DegenerateError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.get("output"):
        Path(cfg["output"]).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
