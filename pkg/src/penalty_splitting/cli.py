"""Batch driver: ``penalty-splitting solve | check-schedule | list-problems``.

Exit codes: 0 completed, 2 rejected (bad configuration or failed hypotheses),
3 numerical abort, 4 output not writable.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import importlib
import io
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    ContractViolation,
    DomainError,
    HypothesisRejected,
    NumericalAbort,
    SplittingError,
)
from .problems import COMMON_PARAMS, PROBLEMS, StoppingPolicy, build_problem
from .schedules import SOLVER_KINDS, PolynomialSchedule, admissible_for, classify
from .solvers import IterationRecord, run

EXIT_OK, EXIT_REJECTED, EXIT_ABORT, EXIT_IO = 0, 2, 3, 4

TRACE_HEADER = (
    "n", "lambda", "beta", "step_displacement", "penalty_residual",
    "fbf_gap", "oracle_error_x", "oracle_error_z",
)
_FIELDS = (
    "n", "lam", "beta", "step_displacement", "penalty_residual",
    "fbf_gap", "oracle_error_x", "oracle_error_z",
)

_SECTIONS = {
    "solver": {"kind": ("str", True)},
    "schedule": {k: ("float", True) for k in ("lambda0", "p", "beta0", "q")},
    "stopping": {"max_iter": ("int", False), "tol": ("float", False), "record_every": ("int", False)},
    "run": {"seed": ("int", False), "output": ("str", False), "override_admissibility": ("bool", False),
            "x0": ("vector", False), "v0": ("vector", False)},
}


@dataclass
class RunConfig:
    problem: str
    params: dict
    solver: str
    schedule: PolynomialSchedule
    stopping: StoppingPolicy = field(default_factory=StoppingPolicy)
    seed: int = 0
    output_path: str = "trace.csv"
    override_admissibility: bool = False
    x0: np.ndarray | None = None
    v0: np.ndarray | None = None


# ---------------------------------------------------------------- parsing

def _line_index(text: str) -> dict:
    """Map ``(section, key)`` to its 1-based line number."""
    index, section = {}, None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            index[(section, None)] = i
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            index.setdefault((section, m.group(1)), i)
    return index


def _parse_float(text):
    value = float(text)
    if math.isnan(value):
        raise ValueError("nan")
    return value


def _parse_vector(text):
    parts = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not parts:
        raise ValueError("empty vector")
    return np.array([_parse_float(t) for t in parts])


def _parse_matrix(text):
    rows = [r for r in text.split(";") if r.strip()]
    if not rows:
        raise ValueError("empty matrix")
    mat = [_parse_vector(r) for r in rows]
    if len({r.size for r in mat}) != 1:
        raise ValueError("ragged matrix rows")
    return np.vstack(mat)


def _parse_callable(text):
    module, sep, name = text.strip().partition(":")
    if not sep or not module or not name:
        raise ValueError("expected 'module:function'")
    fn = getattr(importlib.import_module(module), name)
    if not callable(fn):
        raise ValueError(f"{text} is not callable")
    return fn


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _parse_int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError("expected an integer")
    return int(value)


_PARSERS = {
    "float": _parse_float, "int": _parse_int, "str": str.strip, "bool": _parse_bool,
    "vector": _parse_vector, "matrix": _parse_matrix, "callable": _parse_callable,
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate an INI run configuration; unknown keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed configuration: {exc.message.splitlines()[0]}",
                          key=getattr(exc, "option", None), line=line) from None
    lines = _line_index(text)
    allowed = {"problem", *_SECTIONS}
    for section in cp.sections():
        if section not in allowed:
            raise ConfigError(f"unknown section [{section}]", key=section, line=lines.get((section, None)))

    def fetch(section, key, kind, required):
        if not cp.has_option(section, key):
            if required:
                raise ConfigError(f"missing required key in [{section}]", key=key,
                                  line=lines.get((section, None)))
            return None
        raw = cp.get(section, key)
        try:
            return _PARSERS[kind](raw)
        except (ValueError, ImportError, AttributeError) as exc:
            raise ConfigError(f"malformed value {raw!r} ({exc})", key=key,
                              line=lines.get((section, key))) from None

    def strict(section, allowed_keys):
        if not cp.has_section(section):
            return
        for key in cp.options(section):
            if key not in allowed_keys:
                raise ConfigError(f"unknown key in [{section}]", key=key, line=lines.get((section, key)))

    if not cp.has_section("problem"):
        raise ConfigError("missing section [problem]")
    name = fetch("problem", "name", "str", True)
    if name not in PROBLEMS:
        raise ConfigError(f"unknown problem {name!r}", key="name", line=lines.get(("problem", "name")))
    problem_keys = {"name": ("str", True), **PROBLEMS[name][1], **COMMON_PARAMS}
    strict("problem", problem_keys)
    params = {}
    for key, (kind, required) in problem_keys.items():
        if key != "name":
            value = fetch("problem", key, kind, required)
            if value is not None:
                params[key] = value

    for section, keys in _SECTIONS.items():
        strict(section, keys)
    if not cp.has_section("solver") or not cp.has_section("schedule"):
        raise ConfigError("sections [solver] and [schedule] are required")
    solver = fetch("solver", "kind", "str", True)
    if solver not in SOLVER_KINDS:
        raise ConfigError(f"unknown solver {solver!r}", key="kind", line=lines.get(("solver", "kind")))

    sched = {k: fetch("schedule", k, "float", True) for k in ("lambda0", "p", "beta0", "q")}
    try:
        schedule = PolynomialSchedule(**sched)
    except SplittingError as exc:
        key = "lambda0" if "λ₀" in str(exc) else "beta0" if "β₀" in str(exc) else None
        raise ConfigError(str(exc), key=key, line=lines.get(("schedule", key))) from None

    stop_kw = {}
    if cp.has_section("stopping"):
        for key, (kind, _) in _SECTIONS["stopping"].items():
            value = fetch("stopping", key, kind, False)
            if value is not None:
                stop_kw[key] = value
    try:
        stopping = StoppingPolicy(**stop_kw)
    except SplittingError as exc:
        raise ConfigError(str(exc), key=next(iter(stop_kw), None)) from None

    cfg = RunConfig(name, params, solver, schedule, stopping)
    if cp.has_section("run"):
        for key, attr in (("seed", "seed"), ("output", "output_path"),
                          ("override_admissibility", "override_admissibility"), ("x0", "x0"), ("v0", "v0")):
            value = fetch("run", key, _SECTIONS["run"][key][0], False)
            if value is not None:
                setattr(cfg, attr, value)
    return cfg


# ------------------------------------------------------------------ traces

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def format_trace(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for rec in sorted(records, key=lambda r: r.n):
        writer.writerow([_fmt(getattr(rec, f)) for f in _FIELDS])
    return buf.getvalue()


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace(records, path: str) -> None:
    """Write records as CSV (shortest round-trip floats, LF endings), atomically."""
    _atomic_write(path, format_trace(records))


def parse_trace(text: str) -> list[IterationRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != TRACE_HEADER:
        raise ValueError("not a trace file: header mismatch")
    out = []
    for row in rows[1:]:
        vals = [None if c == "" else float(c) for c in row[1:]]
        out.append(IterationRecord(int(row[0]), *vals))
    return out


def read_trace(path: str) -> list[IterationRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_trace(fh.read())


def summary_path(trace_path: str) -> str:
    root, _ = os.path.splitext(trace_path)
    return root + ".summary.json"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ------------------------------------------------------------------ commands

def _writable(path: str) -> bool:
    directory = os.path.dirname(os.path.abspath(path))
    return os.path.isdir(directory) and os.access(directory, os.W_OK)


def run_command(cfg: RunConfig, out=None, err=None) -> int:
    """Execute a validated configuration; returns the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    if not _writable(cfg.output_path):
        print(f"error: cannot write output to {cfg.output_path}", file=err)
        return EXIT_IO
    try:
        problem = build_problem(cfg.problem, cfg.params)
    except SplittingError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_REJECTED
    moduli = problem.moduli(cfg.solver)
    summary = {
        "problem": cfg.problem,
        "solver": cfg.solver,
        "seed": cfg.seed,
        "schedule_report": classify(cfg.schedule).to_dict(**moduli),
        "moduli": moduli,
        "oracle": problem.oracle,
        "certificate": problem.certificate,
    }
    records, status, code = [], "completed", EXIT_OK
    try:
        result = run(problem, cfg.schedule, cfg.solver, cfg.stopping, cfg.x0, cfg.v0,
                     override=cfg.override_admissibility)
        records = result.records
        state = result.state
        summary.update(
            admissibility={"ok": result.admissibility.ok, "reasons": result.admissibility.reasons},
            warnings=result.warnings, stopped_early=result.stopped_early,
        )
    except HypothesisRejected as exc:
        for reason in exc.reasons:
            print(f"rejected: {reason}", file=err)
        return EXIT_REJECTED
    except NumericalAbort as exc:
        print(f"aborted: {exc}", file=err)
        records, state, status, code = exc.records, exc.state, "aborted", EXIT_ABORT
    except (DomainError, ContractViolation) as exc:
        print(f"aborted: {exc}", file=err)
        state, status, code = None, "aborted", EXIT_ABORT
    except SplittingError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_REJECTED

    summary["status"] = status
    summary["records"] = len(records)
    if state is not None:
        summary.update(n=state.n, x=state.x, z=state.z)
    try:
        write_trace(records, cfg.output_path)
        _atomic_write(summary_path(cfg.output_path),
                      json.dumps(_jsonable(summary), indent=2, ensure_ascii=False) + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=err)
        return EXIT_IO
    if code == EXIT_OK:
        print(f"{status}: {len(records)} records written to {cfg.output_path}", file=out)
    return code


def _cmd_solve(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    if args.output:
        cfg.output_path = args.output
    if args.override_admissibility:
        cfg.override_admissibility = True
    return run_command(cfg)


def _cmd_check_schedule(args) -> int:
    try:
        schedule = PolynomialSchedule(args.lambda0, args.p, args.beta0, args.q)
        adm = admissible_for(schedule, args.solver, mu=args.mu, eta=args.eta, knorm=args.knorm)
    except SplittingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    report = classify(schedule).to_dict(args.mu, args.eta, args.knorm)
    report["admissible"] = adm.ok
    report["reasons"] = list(adm.reasons)
    print(json.dumps(_jsonable(report), indent=2, ensure_ascii=False))
    return EXIT_OK if adm.ok else EXIT_REJECTED


def _cmd_list_problems(args) -> int:
    for name, (_, params) in PROBLEMS.items():
        desc = ", ".join(f"{k} ({kind}{'' if req else ', optional'})"
                         for k, (kind, req) in {**params, **COMMON_PARAMS}.items())
        print(f"{name}: {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="penalty-splitting", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a solver from a configuration file")
    solve.add_argument("--config", required=True)
    solve.add_argument("--override-admissibility", action="store_true")
    solve.add_argument("--output")
    solve.set_defaults(func=_cmd_solve)

    chk = sub.add_parser("check-schedule", help="classify a step-size/penalty schedule")
    for name in ("lambda0", "p", "beta0", "q"):
        chk.add_argument(f"--{name}", type=float, required=True)
    chk.add_argument("--solver", choices=SOLVER_KINDS, required=True)
    chk.add_argument("--mu", type=float)
    chk.add_argument("--eta", type=float)
    chk.add_argument("--knorm", type=float)
    chk.set_defaults(func=_cmd_check_schedule)

    lst = sub.add_parser("list-problems", help="list benchmark problems and their parameters")
    lst.set_defaults(func=_cmd_list_problems)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
