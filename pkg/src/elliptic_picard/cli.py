"""
Command-line runner: ``elliptic-picard --config run.json --out results/``.

The config is a JSON object validated against :data:`CONFIG_SCHEMA`
before anything runs.  Outputs are plain CSV / JSON and byte-for-byte
reproducible for a fixed config and seed.

Exit codes: 0 success, 1 verification checks failed, 2 config error,
3 certificate refusal, 4 numerical failure or non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from .errors import CertificateError, ConfigError, NumericalError
from .grid import chart_from_dict
from .nonlinear import F_KINDS, GRAD_KINDS, Nonlinearity
from .operators import assemble_operator, unknown_mask, write_matrix_market
from .picard import ProblemSpec, certify, picard_solve, standing_wave_problem
from .spectral import mode_for_bc, smallest_eigenvalue
from .verify import MANUFACTURED, catalog_values, manufactured_problem, manufactured_solution, run_lemma_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2
EXIT_REFUSED = 3
EXIT_NUMERICAL = 4

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_POS_INT = {"type": "integer", "minimum": 1}
_NUMBER = {"type": "number"}

_CHART = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"kind": {"const": "interval"}, "n": _POS_INT, "length": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["kind", "n"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "rectangle"},
                "nx": _POS_INT,
                "ny": _POS_INT,
                "lx": {"type": "number", "exclusiveMinimum": 0},
                "ly": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["kind", "nx", "ny"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "metric_band"},
                "n": _POS_INT,
                "theta_min": _NUMBER,
                "theta_max": _NUMBER,
            },
            "required": ["kind", "n", "theta_min", "theta_max"],
            "additionalProperties": False,
        },
    ]
}

_NONLINEARITY = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(F_KINDS)},
        "alpha": _NUMBER,
        "a": _COMPLEX,
        "grad_kind": {"enum": list(GRAD_KINDS)},
        "b": {"type": "array", "items": _COMPLEX, "minItems": 1},
        "grad_alpha": _NUMBER,
        "constant": _COMPLEX,
        "c1": {"type": "number", "minimum": 0},
        "c2": {"type": "number", "minimum": 0},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_FIELD_SOURCE = {
    "oneOf": [
        {"const": "zero"},
        {
            "type": "object",
            "properties": {"catalog": {"enum": sorted(MANUFACTURED)}, "scale": _COMPLEX},
            "required": ["catalog"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"manufactured": {"enum": sorted(MANUFACTURED)}},
            "required": ["manufactured"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"values": {"type": "array", "items": _COMPLEX}},
            "required": ["values"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"ends": {"type": "array", "items": _COMPLEX, "minItems": 2, "maxItems": 2}},
            "required": ["ends"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "command": {"enum": ["solve", "eigen", "verify", "sweep"]},
        "seed": {"type": "integer"},
        "out": {"type": "string"},
        "problem": {
            "type": "object",
            "properties": {
                "chart": _CHART,
                "bc": {"enum": ["dirichlet_zero", "dirichlet_data", "neumann"]},
                "forcing": _FIELD_SOURCE,
                "boundary": _FIELD_SOURCE,
                "nonlinearity": _NONLINEARITY,
                "xi": {"type": "number", "minimum": 0},
                "standing_wave": {"enum": ["schrodinger", "wave"]},
                "picard_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iters": _POS_INT,
                "check_uniqueness": {"type": "boolean"},
            },
            "required": ["chart"],
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "parameter": {"enum": ["alpha", "xi", "c1", "c2", "grad_alpha"]},
                "values": {"type": "array", "items": _NUMBER, "minItems": 1},
                "workers": _POS_INT,
            },
            "required": ["parameter", "values"],
            "additionalProperties": False,
        },
        "verify": {
            "type": "object",
            "properties": {"trials": _POS_INT},
            "additionalProperties": False,
        },
    },
    "required": ["command"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"command": {"enum": ["solve", "eigen", "sweep"]}}}, "then": {"required": ["problem"]}},
        {"if": {"properties": {"command": {"const": "sweep"}}}, "then": {"required": ["sweep"]}},
    ],
}


# -- config loading ---------------------------------------------------------


def _locate(text: str, path) -> int:
    """Best-effort line number of the JSON element at ``path``."""
    pos = 0
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1


def _branch_errors(err: jsonschema.ValidationError) -> list:
    """Sub-errors of a ``oneOf`` failure, restricted to the branch the user meant.

    A branch whose ``const`` (e.g. the chart ``kind``) matched is taken as
    the intended one; otherwise fall back to jsonschema's best guess.
    """
    by_branch = {}
    for sub in err.context:
        by_branch.setdefault(sub.relative_schema_path[0], []).append(sub)
    for subs in by_branch.values():
        if not any(e.validator in ("const", "type") and len(e.relative_path) <= 1 for e in subs):
            return subs
    return [jsonschema.exceptions.best_match(err.context)]


def _format_error(text: str, source: str, err: jsonschema.ValidationError) -> list[str]:
    if err.validator == "oneOf" and err.context:
        return [line for sub in _branch_errors(err) for line in _format_error(text, source, sub)]
    path = list(err.absolute_path)
    if err.validator == "additionalProperties":
        extra = re.findall(r"'([^']+)' (?:was|were) unexpected", err.message)
        if extra:
            path.append(extra[0])
    dotted = ".".join(str(p) for p in path) or "<root>"
    return [f"{source}:{_locate(text, path)}: {dotted}: {err.message}"]


def load_config(path) -> dict:
    """Read and validate a config file; raise :class:`ConfigError` with a line-anchored message."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        raise ConfigError("\n".join(line for e in errors for line in _format_error(text, str(path), e)))
    return config


def _complex(x) -> complex:
    return complex(*x) if isinstance(x, list) else complex(x)


def _field_values(source, chart, bc, full: bool, nl: Nonlinearity, xi: float) -> np.ndarray:
    mask = unknown_mask(chart, bc)
    size = chart.n_full if full else int(mask.sum())
    if source is None or source == "zero":
        out = np.zeros(size, dtype=complex)
    elif "catalog" in source:
        values = catalog_values(chart, source["catalog"])
        scale = _complex(source.get("scale", 1.0))
        out = scale * (values.reshape(-1) if full else values[mask])
    elif "manufactured" in source:
        if full:
            out = manufactured_solution(chart, source["manufactured"], bc).full().reshape(-1)
        else:
            problem, _ = manufactured_problem(chart, source["manufactured"], nl, xi, bc)
            out = problem.forcing
    elif "ends" in source:
        if not full or chart.dim != 1:
            raise ConfigError("'ends' only describes boundary data of 1D charts")
        out = np.zeros(size, dtype=complex)
        out[0], out[-1] = (_complex(v) for v in source["ends"])
    else:
        out = np.array([_complex(v) for v in source["values"]])
        if out.size != size:
            raise ConfigError(f"inline values: got {out.size} entries, expected {size}")
    return out.reshape(chart.full_shape) if full else out


def build_problem(desc: dict) -> ProblemSpec:
    """Turn the ``problem`` section of a config into a :class:`ProblemSpec`."""
    try:
        chart = chart_from_dict(desc["chart"])
        nl = Nonlinearity.from_dict(desc.get("nonlinearity", {"kind": "zero"}))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bc = desc.get("bc", "dirichlet_zero")
    xi = float(desc.get("xi", 0.0))
    kw = {}
    if "picard_tol" in desc:
        kw["picard_tol"] = float(desc["picard_tol"])
    if "max_iters" in desc:
        kw["max_iters"] = int(desc["max_iters"])
    try:
        if "standing_wave" in desc:
            boundary = _field_values(desc.get("boundary"), chart, "dirichlet_data", True, nl, xi)
            return standing_wave_problem(xi, nl, boundary, chart, desc["standing_wave"], **kw)
        shift = xi
        forcing = _field_values(desc.get("forcing"), chart, bc, False, nl, xi)
        boundary = None
        if bc == "dirichlet_data":
            boundary = _field_values(desc.get("boundary"), chart, bc, True, nl, xi)
        elif "boundary" in desc:
            raise ConfigError(f"boundary data given for bc={bc}")
        return ProblemSpec(chart, forcing, nl, bc, boundary, shift=shift, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# -- writers -----------------------------------------------------------------


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_solution_csv(path: Path, field) -> None:
    chart = field.chart
    full = field.full()
    coords = chart.coords.reshape(-1, chart.dim)
    names = {"interval": ["x"], "rectangle": ["x", "y"], "metric_band": ["theta"]}.get(
        chart.kind, [f"x{i}" for i in range(chart.dim)]
    )
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + ["re", "im"])
        for c, v in zip(coords, full.reshape(-1)):
            writer.writerow([repr(float(t)) for t in c] + [repr(float(v.real)), repr(float(v.imag))])


# -- commands ----------------------------------------------------------------


def _problem_summary(problem: ProblemSpec) -> dict:
    return {
        "chart": problem.chart.to_dict(),
        "bc": problem.bc,
        "shift": problem.shift,
        "nonlinearity": problem.nonlinearity.to_dict(),
        "picard_tol": problem.picard_tol,
        "max_iters": problem.max_iters,
    }


def cmd_solve(config: dict, out: Path, seed: int) -> int:
    problem = build_problem(config["problem"])
    check_uniqueness = bool(config["problem"].get("check_uniqueness", False))
    try:
        u, report = picard_solve(problem, check_uniqueness=check_uniqueness)
    except CertificateError as exc:
        _dump_json(
            out / "report.json",
            {"problem": _problem_summary(problem), "refused": True, "rho_certified": exc.rho, "iterations": 0,
             "converged": False, "message": str(exc)},
        )
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    write_solution_csv(out / "solution.csv", u)
    (out / "steps.csv").write_text(report.steps_csv())
    payload = report.to_dict()
    payload.pop("records")
    payload.update({"problem": _problem_summary(problem), "refused": False})
    _dump_json(out / "report.json", payload)
    if not report.converged:
        print(f"no convergence after {report.iterations} iterations", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_eigen(config: dict, out: Path, seed: int) -> int:
    desc = config["problem"]
    try:
        chart = chart_from_dict(desc["chart"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bc = desc.get("bc", "dirichlet_zero")
    bare = "neumann" if bc == "neumann" else "dirichlet_zero"
    report = smallest_eigenvalue(assemble_operator(chart, bare), mode_for_bc(bc), seed=seed)
    payload = report.to_dict()
    payload.update({"chart": chart.to_dict(), "bc": bc})
    xi = float(desc.get("xi", 0.0))
    if xi:
        payload["shift"] = xi
        payload["poincare_constant_shifted"] = (report.lambda1 + xi) ** -0.5
    _dump_json(out / "spectral.json", payload)
    return EXIT_OK


def cmd_verify(config: dict, out: Path, seed: int) -> int:
    trials = int(config.get("verify", {}).get("trials", 1000))
    results = run_lemma_suite(seed=seed, trials=trials)
    _dump_json(out / "verify.json", results)
    failed = [r["check_name"] for r in results if not r["pass"]]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECKS_FAILED
    return EXIT_OK


def _sweep_point(problem: ProblemSpec, parameter: str, value: float, spectral) -> dict:
    nl = problem.nonlinearity
    if parameter == "xi":
        p = replace(problem, shift=float(value))
    elif parameter == "alpha":
        p = replace(problem, nonlinearity=replace(nl, alpha=float(value)))
    else:
        p = replace(problem, nonlinearity=replace(nl, **{parameter: float(value)}))
    row = {"parameter": value}
    try:
        _, report = picard_solve(p, spectral=spectral)
    except CertificateError as exc:
        row.update(rho=exc.rho, iterations=0, converged="refused", max_ratio=None)
        return row
    except NumericalError:
        rho, _, _ = certify(p, spectral)
        row.update(rho=rho, iterations=0, converged="failed", max_ratio=None)
        return row
    row.update(rho=report.rho_certified, iterations=report.iterations, converged=report.converged,
               max_ratio=report.max_ratio)
    return row


def cmd_sweep(config: dict, out: Path, seed: int) -> int:
    problem = build_problem(config["problem"])
    sweep = config["sweep"]
    values = [float(v) for v in sweep["values"]]
    # every point shares chart and bc, hence one eigen-solve
    _, _, spectral = certify(problem)
    with ThreadPoolExecutor(max_workers=int(sweep.get("workers", 4))) as pool:
        rows = list(pool.map(lambda v: _sweep_point(problem, sweep["parameter"], v, spectral), values))
    rows.sort(key=lambda r: r["parameter"])
    with (out / "sweep.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["parameter", "rho", "iterations", "converged", "max_ratio"])
        for r in rows:
            conv = r["converged"]
            writer.writerow([
                repr(r["parameter"]),
                repr(float(r["rho"])),
                r["iterations"],
                str(conv).lower() if isinstance(conv, bool) else conv,
                "" if r["max_ratio"] is None else repr(float(r["max_ratio"])),
            ])
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "eigen": cmd_eigen, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elliptic-picard", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides the config's 'out')")
    parser.add_argument("--seed", type=int, help="seed for randomized checks (overrides the config)")
    parser.add_argument("--dump-matrix", action="store_true", help="also write the operator as operator.mtx")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        out = Path(args.out or config.get("out", "."))
        out.mkdir(parents=True, exist_ok=True)
        if args.dump_matrix:
            if "problem" not in config:
                raise ConfigError("--dump-matrix needs a problem section")
            p = build_problem(config["problem"])
            write_matrix_market(p.operator, out / "operator.mtx")
        return COMMANDS[config["command"]](config, out, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificateError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
