"""Command-line front end: check, run, translate, gcheck, grun, verify.

Fuel defaults come from flags when given, then the CDOT_SUBTYPE_FUEL and
CDOT_STEP_BUDGET environment variables, then built-in defaults.  Exit codes:
0 all passed, 1 a check failed, 2 a parse error, 3 an internal invariant
violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath

from cdot import gadt as G
from cdot.diagnostics import Diagnostic
from cdot.encode import (EncodeError, encode_program, encode_term, encode_type,
                         image_environment, is_anf, g_value_shape, value_shape,
                         EMPTY_THETA, _fresh_supply, anf_normalize)
from cdot.jsonast import document, dumps, to_json
from cdot.machine import Finished, OutOfFuel, StuckAt, evaluate, format_trace
from cdot.members import EMPTY_ENV, Session
from cdot.surface import (ParseError, format_gterm, format_gtype, format_term,
                          format_type, parse_gadt_program, parse_term)
from cdot.syntax import Path, alpha_equal
from cdot.typecheck import check_term, type_term

DEFAULT_SUBTYPE_FUEL = 1000000
DEFAULT_STEP_BUDGET = 100000

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_INTERNAL = 3


@dataclass
class RunConfig:
    """One resolved invocation of the tool."""

    command: str
    inputPaths: list[str] = field(default_factory=list)
    subtypeFuel: int = DEFAULT_SUBTYPE_FUEL
    stepBudget: int = DEFAULT_STEP_BUDGET
    outputMode: str = "text"
    traceFlag: bool = False
    outPath: str | None = None
    goldenPath: str | None = None
    reportDir: str | None = None
    workers: int = 4


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        return fallback
    return value if value > 0 else fallback


def _session(cfg: RunConfig) -> Session:
    return Session(subtype_fuel=cfg.subtypeFuel)


def _emit(cfg: RunConfig, text_lines: list[str], json_doc: dict) -> None:
    if cfg.outputMode == "json":
        print(dumps(json_doc))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------- commands


def _cmd_check(cfg: RunConfig) -> int:
    worst = EXIT_OK
    for path in cfg.inputPaths:
        src = FsPath(path).read_text()
        term = parse_term(src)
        result = type_term(EMPTY_ENV, term, _session(cfg))
        if hasattr(result, "ty"):
            _emit(cfg, [f"{path}: {format_type(result.ty)}"],
                  document(command="check", file=path, status="ok",
                           type=to_json(result.ty)))
        else:
            _emit(cfg, [f"{path}: {result.diag.render()}"],
                  document(command="check", file=path, status="error",
                           diagnostic=to_json(result.diag)))
            worst = max(worst, EXIT_CHECK_FAILED)
    return worst


def _cmd_run(cfg: RunConfig) -> int:
    worst = EXIT_OK
    for path in cfg.inputPaths:
        src = FsPath(path).read_text()
        term = parse_term(src)
        checked = type_term(EMPTY_ENV, term, _session(cfg))
        if not hasattr(checked, "ty"):
            _emit(cfg, [f"{path}: {checked.diag.render()}"],
                  document(command="run", file=path, status="error",
                           diagnostic=to_json(checked.diag)))
            worst = max(worst, EXIT_CHECK_FAILED)
            continue
        fin = evaluate(term, max_steps=cfg.stepBudget,
                       keep_trace=cfg.traceFlag)
        lines = []
        if cfg.traceFlag and fin.trace:
            lines.extend(format_trace(fin.trace).splitlines())
        if isinstance(fin, Finished):
            lines.append(f"{path}: {format_term(fin.normal_form)} "
                         f"[{fin.kind}, {fin.steps} steps]")
            _emit(cfg, lines,
                  document(command="run", file=path, status="ok",
                           normal_form=to_json(fin.normal_form),
                           kind=fin.kind, steps=fin.steps))
        elif isinstance(fin, OutOfFuel):
            lines.append(f"{path}: out of fuel after {fin.steps} steps")
            _emit(cfg, lines,
                  document(command="run", file=path, status="out-of-fuel",
                           steps=fin.steps))
        else:
            lines.append(f"{path}: stuck: {fin.diag.render()}")
            _emit(cfg, lines,
                  document(command="run", file=path, status="stuck",
                           diagnostic=to_json(fin.diag)))
            worst = max(worst, EXIT_INTERNAL)
    return worst


def _cmd_gcheck(cfg: RunConfig) -> int:
    worst = EXIT_OK
    for path in cfg.inputPaths:
        sig, term = parse_gadt_program(FsPath(path).read_text())
        if term is None:
            _emit(cfg, [f"{path}: signature only, nothing to check"],
                  document(command="gcheck", file=path, status="ok",
                           signature=to_json(sig)))
            continue
        result = G.g_typecheck((), {}, sig, term)
        if hasattr(result, "ty"):
            _emit(cfg, [f"{path}: {format_gtype(result.ty)}"],
                  document(command="gcheck", file=path, status="ok",
                           type=to_json(result.ty)))
        else:
            _emit(cfg, [f"{path}: {result.diag.render()}"],
                  document(command="gcheck", file=path, status="error",
                           diagnostic=to_json(result.diag)))
            worst = max(worst, EXIT_CHECK_FAILED)
    return worst


def _cmd_grun(cfg: RunConfig) -> int:
    worst = EXIT_OK
    for path in cfg.inputPaths:
        sig, term = parse_gadt_program(FsPath(path).read_text())
        if term is None:
            _emit(cfg, [f"{path}: signature only, nothing to run"],
                  document(command="grun", file=path, status="ok"))
            continue
        checked = G.g_typecheck((), {}, sig, term)
        if not hasattr(checked, "ty"):
            _emit(cfg, [f"{path}: {checked.diag.render()}"],
                  document(command="grun", file=path, status="error",
                           diagnostic=to_json(checked.diag)))
            worst = max(worst, EXIT_CHECK_FAILED)
            continue
        lines = []
        if cfg.traceFlag:
            cur, n = term, 0
            while n < cfg.stepBudget:
                step = G.g_step(sig, cur)
                if not isinstance(step, G.GNext):
                    break
                lines.append(f"{n:4d} {step.rule}")
                cur, n = step.term, n + 1
        fin = G.g_evaluate(sig, term, max_steps=cfg.stepBudget)
        if isinstance(fin, G.GFinished):
            lines.append(f"{path}: {format_gterm(fin.value)} [{fin.steps} steps]")
            _emit(cfg, lines,
                  document(command="grun", file=path, status="ok",
                           value=to_json(fin.value), steps=fin.steps))
        elif isinstance(fin, G.GOutOfFuel):
            lines.append(f"{path}: out of fuel after {fin.steps} steps")
            _emit(cfg, lines,
                  document(command="grun", file=path, status="out-of-fuel",
                           steps=fin.steps))
        else:
            lines.append(f"{path}: stuck: {fin.diag.render()}")
            _emit(cfg, lines,
                  document(command="grun", file=path, status="stuck",
                           diagnostic=to_json(fin.diag)))
            worst = max(worst, EXIT_INTERNAL)
    return worst


def _cmd_translate(cfg: RunConfig) -> int:
    worst = EXIT_OK
    for path in cfg.inputPaths:
        sig, term = parse_gadt_program(FsPath(path).read_text())
        if term is None:
            term_out = encode_program_signature_only(sig)
        else:
            term_out = encode_program(term, sig)
        text = format_term(term_out)
        if cfg.outPath:
            FsPath(cfg.outPath).write_text(text + "\n")
        if cfg.goldenPath:
            golden = parse_term(FsPath(cfg.goldenPath).read_text())
            if alpha_equal(golden, term_out):
                _emit(cfg, [f"{path}: matches golden {cfg.goldenPath}"],
                      document(command="translate", file=path, status="ok"))
            else:
                _emit(cfg, [f"{path}: DIFFERS from golden {cfg.goldenPath}",
                            "encoded:", text],
                      document(command="translate", file=path, status="error",
                               term=to_json(term_out)))
                worst = max(worst, EXIT_CHECK_FAILED)
        else:
            _emit(cfg, [text],
                  document(command="translate", file=path, status="ok",
                           term=to_json(term_out), text=text))
    return worst


def encode_program_signature_only(sig: G.Signature):
    """Encoding of a term-less file: both objects, with env as the body."""
    from cdot.encode import encode_signature, LIB, ENV
    from cdot.syntax import Let, var

    names = _fresh_supply(sig)
    lib_val, env_val = encode_signature(sig, names)
    return Let(LIB, lib_val, Let(ENV, env_val, var(ENV)))


def _verify_one(path: str, cfg: RunConfig) -> dict:
    name = FsPath(path).name
    row = {"file": name, "status": "pass", "g_type": "", "g_steps": "",
           "encoded_type_ok": "", "cdot_steps": "", "correspond": "",
           "note": ""}
    try:
        sig, term = parse_gadt_program(FsPath(path).read_text())
    except ParseError as e:
        row.update(status="parse-error", note=str(e))
        return row
    if term is None:
        row.update(status="skip", note="signature only")
        return row

    checked = G.g_typecheck((), {}, sig, term)
    if not hasattr(checked, "ty"):
        row.update(status="fail", note=f"source: {checked.diag.code}")
        return row
    row["g_type"] = format_gtype(checked.ty)

    session = _session(cfg)
    try:
        tenv = image_environment(sig, session)
        names = _fresh_supply(sig)
        body = anf_normalize(encode_term(term, EMPTY_THETA, sig, names), names)
        goal = encode_type(checked.ty, EMPTY_THETA, _fresh_supply(sig))
        against = check_term(tenv, body, goal, session)
    except EncodeError as e:
        row.update(status="fail", note=f"encode: {e.diagnostic.code}")
        return row
    if not hasattr(against, "ty"):
        row.update(status="fail", encoded_type_ok="no",
                   note=f"encoded: {against.diag.code}")
        return row
    row["encoded_type_ok"] = "yes"

    prog = encode_program(term, sig)
    if not is_anf(prog):
        row.update(status="fail", note="encoder output not in normal form")
        return row

    gfin = G.g_evaluate(sig, term, max_steps=cfg.stepBudget)
    cfin = evaluate(prog, max_steps=cfg.stepBudget, keep_trace=False)
    if isinstance(gfin, G.GStuck):
        row.update(status="fail", note="source evaluation stuck")
        return row
    if isinstance(cfin, StuckAt):
        row.update(status="fail", note="translated evaluation stuck")
        return row
    if isinstance(gfin, G.GFinished):
        row["g_steps"] = gfin.steps
    if isinstance(cfin, Finished):
        row["cdot_steps"] = cfin.steps

    if isinstance(gfin, G.GFinished) and isinstance(cfin, Finished):
        shape_g = g_value_shape(gfin.value)
        shape_c = (value_shape(cfin.store, cfin.normal_form, sig)
                   if isinstance(cfin.normal_form, Path) else ("fun",))
        if shape_g == shape_c and shape_g is not None:
            row["correspond"] = "yes"
        else:
            row.update(status="fail", correspond="no",
                       note=f"values differ: {shape_g} vs {shape_c}")
    else:
        row["correspond"] = "skipped"
        row["note"] = "hit step budget"
    return row


def _cmd_verify(cfg: RunConfig) -> int:
    root = FsPath(cfg.inputPaths[0])
    if not root.is_dir():
        print(f"verify: {root} is not a directory", file=sys.stderr)
        return EXIT_PARSE_ERROR
    files = sorted(str(p) for p in root.glob("*.gadt"))
    if not files:
        print(f"verify: no .gadt files under {root}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        rows = list(pool.map(lambda p: _verify_one(p, cfg), files))
    rows.sort(key=lambda r: r["file"])

    widths = {k: max(len(k), *(len(str(r[k])) for r in rows))
              for k in ("file", "status", "g_steps", "cdot_steps", "correspond")}
    lines = ["  ".join(k.ljust(widths[k]) for k in widths)]
    for r in rows:
        lines.append("  ".join(str(r[k]).ljust(widths[k]) for k in widths))
        if r["note"]:
            lines.append(f"    note: {r['note']}")
    passed = sum(1 for r in rows if r["status"] == "pass")
    skipped = sum(1 for r in rows if r["status"] == "skip")
    lines.append(f"{passed} passed, {len(rows) - passed - skipped} failed, "
                 f"{skipped} skipped of {len(rows)} files")

    if cfg.reportDir:
        from cdot.report import write_report
        for written in write_report(rows, cfg.reportDir):
            lines.append(f"wrote {written}")

    _emit(cfg, lines, document(command="verify", results=rows))
    if any(r["status"] == "parse-error" for r in rows):
        return EXIT_PARSE_ERROR
    if any(r["status"] == "fail" for r in rows):
        return EXIT_CHECK_FAILED
    return EXIT_OK


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdot",
        description="Type checker, evaluator, and translator for a "
                    "path-dependent object calculus and a GADT language.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, multi: bool = True) -> None:
        p.add_argument("inputs", nargs="+" if multi else 1,
                       help="input files (or one directory for verify)")
        p.add_argument("--subtype-fuel", type=int, default=None,
                       help="bound on subtyping steps "
                            "(env CDOT_SUBTYPE_FUEL)")
        p.add_argument("--step-budget", type=int, default=None,
                       help="bound on evaluation steps "
                            "(env CDOT_STEP_BUDGET)")
        p.add_argument("--json", action="store_true",
                       help="emit a JSON document instead of text")
        p.add_argument("--trace", action="store_true",
                       help="stream evaluation steps")

    common(sub.add_parser("check", help="type-check object-calculus files"))
    common(sub.add_parser("run", help="evaluate object-calculus files"))
    t = sub.add_parser("translate", help="encode GADT programs")
    common(t)
    t.add_argument("-o", "--out", default=None, help="write the encoding here")
    t.add_argument("--golden", default=None,
                   help="compare against this expected encoding")
    common(sub.add_parser("gcheck", help="type-check GADT files"))
    common(sub.add_parser("grun", help="evaluate GADT files"))
    v = sub.add_parser("verify",
                       help="check translation soundness over a corpus")
    common(v)
    v.add_argument("--report-dir", default=None,
                   help="write results.csv and figures here")
    v.add_argument("--workers", type=int, default=4,
                   help="parallel workers")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fuel = args.subtype_fuel if args.subtype_fuel is not None else \
        _env_int("CDOT_SUBTYPE_FUEL", DEFAULT_SUBTYPE_FUEL)
    budget = args.step_budget if args.step_budget is not None else \
        _env_int("CDOT_STEP_BUDGET", DEFAULT_STEP_BUDGET)
    if fuel <= 0 or budget <= 0:
        raise ValueError("fuels must be positive")
    return RunConfig(
        command=args.command,
        inputPaths=list(args.inputs),
        subtypeFuel=fuel,
        stepBudget=budget,
        outputMode="json" if args.json else "text",
        traceFlag=args.trace,
        outPath=getattr(args, "out", None),
        goldenPath=getattr(args, "golden", None),
        reportDir=getattr(args, "report_dir", None),
        workers=getattr(args, "workers", 4),
    )


_COMMANDS = {
    "check": _cmd_check,
    "run": _cmd_run,
    "translate": _cmd_translate,
    "gcheck": _cmd_gcheck,
    "grun": _cmd_grun,
    "verify": _cmd_verify,
}


def execute(cfg: RunConfig) -> int:
    try:
        return _COMMANDS[cfg.command](cfg)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except FileNotFoundError as e:
        print(f"no such file: {e.filename}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except EncodeError as e:
        print(f"encoding failed: {e.diagnostic.render()}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return EXIT_PARSE_ERROR
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
