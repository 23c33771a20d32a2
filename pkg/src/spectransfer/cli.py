"""Command-line front end: ``spectransfer <subcommand> ...``.

Every subcommand writes one report (JSON or CSV) to ``--out`` or standard
output.  Errors are printed as a single ``error[<code>] <Type>: <message>``
line on standard error and the process exits with that code.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import cover as cv
from . import embedding as emb
from . import mesh as msh
from . import metric as mt
from .errors import Disconnected, ParseError, SpectralError
from .graphs import DEFAULT_TOL, eigenvalues, normalized_laplacian, parse_edge_list

STABILITY_S = tuple(range(1, 33))


# -- serialization --------------------------------------------------------------

def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with every float printed to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in seq) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _num(float(v)).strip('"')
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def to_csv(rows: list) -> str:
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([_cell(r.get(k, "")) for k in keys])
    return buf.getvalue()


def write_atomic(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(cfg, report: dict, rows: list):
    text = to_csv(rows) if cfg.format == "csv" else dumps(report) + "\n"
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


# -- subcommands ------------------------------------------------------------------

def cmd_spectrum(cfg) -> int:
    g = parse_edge_list(_read(cfg.input))
    if cfg.require_connected and not g.is_connected():
        raise Disconnected(f"graph has {len(g.components())} components")
    spec = eigenvalues(normalized_laplacian(g), tol=cfg.tol)
    vals = spec.values if cfg.kmax is None else spec.values[:cfg.kmax + 1]
    report = {"values": [float(x) for x in vals], "residual_bound": spec.residual_bound}
    emit(cfg, report, [{"k": k, "value": float(x)} for k, x in enumerate(vals)])
    return 0


def _continuum_values(spec: str, k_max: int) -> list:
    """``circle:L``, ``interval:L`` or a comma-separated list lambda_0, lambda_1, ..."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "circle":
            return [cv.circle_eigenvalue(k, float(arg)) for k in range(k_max + 1)]
        if kind == "interval":
            return [(math.pi * k / float(arg)) ** 2 for k in range(k_max + 1)]
        return [float(x) for x in spec.split(",")]
    except ValueError as exc:
        raise ParseError(f"bad --continuum value {spec!r}") from exc


def cmd_cover_check(cfg) -> int:
    try:
        data = json.loads(_read(cfg.input))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from exc
    c = cv.TwoFoldCover.from_dict(data)
    k_max = cfg.kmax or 10
    report = {"cells": len(c.cells), "exactness_defect": c.exactness_defect,
              "exact": c.is_exact}
    if c.is_exact:
        report["gram_identity_defect"] = cv.gram_identity_defect(c)
    rows = []
    if cfg.continuum is not None:
        if cfg.eta is None:
            raise ParseError("--continuum requires --eta")
        lam = _continuum_values(cfg.continuum, k_max)
        tr = cv.check_transfer(c, lam, cv.NeumannProfile((cfg.eta,)), k_max, tol=cfg.tol)
        report["transfer"] = tr.to_dict()
        rows = tr.to_dict()["rows"]
    emit(cfg, report, rows or [{k: v for k, v in report.items()}])
    return 0


def cmd_genus_bound(cfg) -> int:
    if cfg.family:
        r = emb.family_generators(cfg.family, cfg.size)
    elif cfg.input:
        try:
            r = emb.RotationSystem.from_dict(json.loads(_read(cfg.input)))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}") from exc
    else:
        raise ParseError("give a rotation-system file or --family")
    rep = emb.genus_bound_evaluate(r, cfg.kmax or 10)
    d = rep.to_dict()
    emit(cfg, d, d["rows"])
    return 0


def cmd_metric(cfg) -> int:
    m = mt.parse_model(_read(cfg.input))
    k_max = cfg.kmax or 10
    report = {"n": m.n, "m": m.m, "l_min": m.l_min, "l_max": m.l_max,
              "length_balanced": m.length_balanced}
    tables = [mt.lower_bound_check(m, k_max, cfg.level)]
    if cfg.dilate is not None:
        tables.append(mt.dilation_check(m, cfg.dilate, k_max, cfg.level))
    gated = None
    if m.length_balanced:
        tables.append(mt.sandwich_check(m, k_max, cfg.level))
        for k in range(1, min(3, k_max) + 1):
            tables.append(mt.subdivision_stability(m, k, STABILITY_S))
    else:
        try:
            mt.sandwich_check(m, k_max, cfg.level)
        except SpectralError as exc:
            gated = exc
            report["gated"] = {"sandwich": str(exc), "subdivision_stability": str(exc)}
    report["reports"] = [t.to_dict() for t in tables]
    rows = [{"report": t.name, **r} for t in tables for r in t.rows]
    emit(cfg, report, rows)
    if gated is not None:
        raise gated
    return 0


def cmd_partition(cfg) -> int:
    m = msh.parse_mesh(_read(cfg.input))
    _, dual = msh.barycentric_cover(m)
    p = msh.spectral_cut(dual, balance_floor=cfg.balance_floor, tol=cfg.tol)
    report = msh.partition_report(m, p, cfg.lambda1)
    if cfg.assignment:
        write_atomic(cfg.assignment, p.lines())
    else:
        report["side"] = [int(s) for s in p.side]
    emit(cfg, report, [{"key": k, "value": v} for k, v in report.items() if k != "side"])
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "cover-check": cmd_cover_check,
    "genus-bound": cmd_genus_bound,
    "metric": cmd_metric,
    "partition": cmd_partition,
}


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"error[2] UsageError: {' '.join(message.split())}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="spectransfer",
                                 description="Spectral bounds via 2-fold covers.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input")
        p.add_argument("--kmax", type=_positive_int, default=None)
        p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None)
        return p

    p = common(sub.add_parser("spectrum", help="normalized Laplacian spectrum of an edge list"))
    p.add_argument("--require-connected", action="store_true")

    p = common(sub.add_parser("cover-check", help="exactness, Gram identity and transfer bound"))
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--continuum", default=None,
                   help="circle:L, interval:L or comma-separated lambda_0,lambda_1,...")

    p = common(sub.add_parser("genus-bound", help="ratios for a rotation system"),
               needs_input=False)
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--family", default=None)
    p.add_argument("--size", type=_positive_int, default=8)

    p = common(sub.add_parser("metric", help="continuum vs discrete bounds for a metric graph"))
    p.add_argument("--level", type=int, default=4)
    p.add_argument("--dilate", type=_positive_float, default=None)

    p = common(sub.add_parser("partition", help="spectral bisection of a simplicial mesh"))
    p.add_argument("--balance-floor", type=float, default=msh.DEFAULT_BALANCE_FLOOR)
    p.add_argument("--lambda1", type=_positive_float, default=None)
    p.add_argument("--assignment", default=None,
                   help="write 'index side' lines here instead of into the report")
    return ap


def main(argv=None) -> int:
    cfg = build_parser().parse_args(argv)
    try:
        return COMMANDS[cfg.command](cfg)
    except (SpectralError, ValueError, KeyError) as exc:
        code = getattr(exc, "exit_code", 2)
        msg = " ".join(str(exc).split())
        print(f"error[{code}] {type(exc).__name__}: {msg}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
