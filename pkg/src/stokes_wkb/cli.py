"""Command-line front end: spectra, comparisons, Stokes graphs and audits.

Every command accepts ``--config FILE`` (JSON, see ``--print-schema``);
explicit flags override file values.  Outputs are written atomically and
floats carry 17 significant digits so repeated runs are byte-identical.
Exit status: 0 success, 2 a MISMATCH where MATCH was asserted, 1 errors.
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
from concurrent.futures import ThreadPoolExecutor

import jsonschema

from .errors import StokesWKBError

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2
COMMANDS = ("spectrum", "compare", "stokes", "phase-audit", "susy-verify", "verdict-table")

# flag name -> parameter name for the catalog's shape parameters
PARAM_FLAGS = {
    "alpha": "alpha", "beta": "beta", "gamma": "gamma", "beta-plus": "beta_plus", "beta-minus": "beta_minus",
    "beta-prime": "beta_prime", "alpha1": "alpha1", "beta1": "beta1", "a": "a",
}

_NUMBER = {"type": "number"}
CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "stokes-wkb run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "family": {"type": "string"},
        "params": {"type": "object", "additionalProperties": _NUMBER},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "extra_delta": {"type": "array", "items": {
            "type": "object", "required": ["amplitude", "center"], "additionalProperties": False,
            "properties": {"amplitude": _NUMBER, "center": _NUMBER}}},
        "m_max": {"type": "integer", "minimum": 0},
        "method": {"enum": ["jwkb", "oracle"]},
        "methods": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"enum": ["jwkb", "oracle"]}},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "assert_match": {"type": "boolean"},
        "energy": _NUMBER,
        "x0_real": _NUMBER,
        "copies": {"type": "integer", "minimum": 1},
        "strip": {"type": "integer", "minimum": 0},
        "susy_family": {"type": "integer", "minimum": 1, "maximum": 10},
        "out": {"type": "string"},
        "json": {"type": "string"},
        "svg": {"type": "string"},
    },
}


class ConfigError(Exception):
    def __init__(self, pointer: str, message: str):
        super().__init__(message)
        self.pointer = pointer


# ----- output helpers -----


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def dump_json(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits and sorted keys."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, complex):
        return dump_json([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dump_json(obj[k], indent + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(dump_json(x) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + dump_json(x, indent + 1) for x in obj) + "\n" + pad + "]"
    if hasattr(obj, "item"):
        return dump_json(obj.item(), indent)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    target = os.path.abspath(path)
    folder = os.path.dirname(target)
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(path: str | None, text: str) -> None:
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def threads() -> int:
    try:
        return max(1, int(os.environ.get("STOKES_WKB_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items: list) -> list:
    """Apply ``fn`` concurrently, capped by STOKES_WKB_THREADS, keeping input order."""
    if threads() == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        return list(pool.map(fn, items))


# ----- configuration -----


def validate(cfg: dict) -> None:
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        pointer = "".join(f"/{str(p).replace('~', '~0').replace('/', '~1')}" for p in err.absolute_path)
        raise ConfigError(pointer or "/", err.message)


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("/", f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("/", "config must be a JSON object")
    return cfg


def merge(cfg: dict, args: argparse.Namespace) -> dict:
    out = dict(cfg)
    params = dict(out.get("params", {}))
    for flag, name in PARAM_FLAGS.items():
        v = getattr(args, flag.replace("-", "_"), None)
        if v is not None:
            params[name] = v
    for item in getattr(args, "param", None) or []:
        name, _, value = item.partition("=")
        try:
            params[name] = float(value)
        except ValueError:
            raise ConfigError(f"/params/{name}", f"{value!r} is not a number") from None
    if params:
        out["params"] = params
    for key in ("family", "lambda", "m_max", "method", "methods", "tol", "assert_match", "energy", "x0_real",
                "copies", "strip", "susy_family", "out", "json", "svg"):
        v = getattr(args, key, None)
        if v is not None and v is not False:
            out[key] = v
    out["command"] = args.command
    validate(out)
    return out


def require(cfg: dict, *keys: str) -> None:
    for k in keys:
        if k not in cfg:
            raise ConfigError(f"/{k}", f"'{k}' is required for {cfg['command']}")


def spec_of(cfg: dict):
    from .potentials import make_potential

    require(cfg, "family")
    return make_potential(cfg["family"], cfg.get("params", {}), cfg.get("lambda", 1.0), cfg.get("extra_delta", ()))


# ----- commands -----


def _solve(method: str, spec, m_max: int):
    from .oracle import oracle_spectrum
    from .quantize import wkb_spectrum

    return wkb_spectrum(spec, m_max) if method == "jwkb" else oracle_spectrum(spec, m_max)


def spectrum_csv(results) -> str:
    rows = [[r.method.value, r.family, r.params_hash, lv.m, lv.E, lv.residual] for r in results for lv in r.levels]
    return csv_text(["method", "family", "params_hash", "m", "E", "residual"], rows)


def cmd_spectrum(cfg: dict) -> int:
    spec = spec_of(cfg)
    result = _solve(cfg.get("method", "jwkb"), spec, cfg.get("m_max", 5))
    emit(cfg.get("out"), spectrum_csv([result]))
    if cfg.get("json"):
        write_atomic(cfg["json"], dump_json(result.to_json()) + "\n")
    return EXIT_OK


def cmd_compare(cfg: dict) -> int:
    from .oracle import compare_spectra

    spec = spec_of(cfg)
    m_max = cfg.get("m_max", 5)
    a_name, b_name = cfg.get("methods", ["jwkb", "oracle"])
    a, b = ordered_map(lambda m: _solve(m, spec, m_max), [a_name, b_name])
    report = compare_spectra(a, b, cfg.get("tol", 1e-6))
    rows = [[d.m, d.E_a, d.E_b, d.abs_diff, d.rel_diff] for d in report.diffs]
    text = csv_text(["m", "E_a", "E_b", "abs_diff", "rel_diff"], rows)
    doc = {"spec": spec.to_json(), "params_hash": spec.params_hash(), "methods": [a_name, b_name],
           "report": report.to_json()}
    out = cfg.get("out")
    if out and out.endswith(".json"):
        write_atomic(out, dump_json(doc) + "\n")
    else:
        emit(out, text)
        if cfg.get("json"):
            write_atomic(cfg["json"], dump_json(doc) + "\n")
    print(report.verdict, file=sys.stderr)
    if cfg.get("assert_match") and report.verdict != "MATCH":
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_stokes(cfg: dict) -> int:
    from .stokes import build_stokes_graph, emit_svg

    spec = spec_of(cfg)
    require(cfg, "energy")
    graph = build_stokes_graph(spec, cfg["energy"])
    doc = dump_json(graph.to_json()) + "\n"
    if cfg.get("svg"):
        write_atomic(cfg["svg"], emit_svg(graph, {"copies": cfg.get("strip", 0)}))
    emit(cfg.get("json") or cfg.get("out"), doc)
    return EXIT_OK


def cmd_phase_audit(cfg: dict) -> int:
    from .phase import DEFAULT_ROOT_COPIES, strip_phase_difference

    spec = spec_of(cfg)
    require(cfg, "energy")
    audit = strip_phase_difference(spec, cfg["energy"], cfg.get("x0_real", 0.0),
                                   cfg.get("copies", DEFAULT_ROOT_COPIES), cfg.get("tol", 1e-6))
    doc = audit.to_json()
    doc["agreement"] = audit.agreement
    emit(cfg.get("out") or cfg.get("json"), dump_json(doc) + "\n")
    if cfg.get("assert_match") and audit.agreement > cfg.get("tol", 1e-6):
        return EXIT_MISMATCH
    return EXIT_OK


def susy_rows(family: int, params: dict, lam: float, m_max: int, tol: float) -> list[dict]:
    """One record per listed case: Riccati check, classification and level shift.

    The verdict compares the fitted shift with the one implied by the
    classified case; ``label_agrees`` records whether the listed case label
    matches that classification.
    """
    from .susy import SHIFT_OF_CASE, catalog, classify_susy_case, verify_level_shift

    rows = []
    for case, sp in catalog(family, params, lam).items():
        row = {"family": family, "case": case.value, "lambda": lam, "params": dict(sorted(params.items()))}
        if isinstance(sp, Exception):
            row.update(riccati="FAIL", error=str(sp), verdict="SKIPPED")
            rows.append(row)
            continue
        row["riccati"] = "PASS"
        row["epsilon0"] = sp.epsilon0
        try:
            found = classify_susy_case(sp)
            report = verify_level_shift(sp.spec, sp, m_max, tol)
        except StokesWKBError as exc:
            row.update(error=str(exc), verdict="MISMATCH")
            rows.append(row)
            continue
        expected = SHIFT_OF_CASE[found]
        row.update(classified=found.value, expected_shift=expected.value, shift=report.shift.value,
                   max_rel_diff=report.max_rel_diff, label_agrees=found == case,
                   verdict="MATCH" if report.shift == expected else "MISMATCH")
        rows.append(row)
    return rows


def cmd_susy_verify(cfg: dict) -> int:
    from .suites import SUSY_CASES

    m_max, tol = cfg.get("m_max", 5), cfg.get("tol", 1e-6)
    if "susy_family" in cfg:
        fam = cfg["susy_family"]
        default_params, default_lam = SUSY_CASES[fam]
        jobs = [(fam, cfg.get("params", default_params), cfg.get("lambda", default_lam))]
    else:
        jobs = [(f, p, lam) for f, (p, lam) in sorted(SUSY_CASES.items())]
    rows = [r for chunk in ordered_map(lambda j: susy_rows(*j, m_max, tol), jobs) for r in chunk]
    emit(cfg.get("out") or cfg.get("json"), dump_json({"cases": rows}) + "\n")
    if cfg.get("assert_match") and any(r["verdict"] == "MISMATCH" for r in rows):
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_verdict_table(cfg: dict) -> int:
    from .suites import audit, verdict_rows

    verdicts = ordered_map(lambda row: audit(*row), verdict_rows())
    rows = [[v.case.family, v.params_hash, fmt(v.case.lam), v.expected, v.verdict, v.max_rel_diff, v.levels]
            for v in verdicts]
    out = cfg.get("out")
    if out and out.endswith(".json"):
        write_atomic(out, dump_json({"rows": [v.to_json() for v in verdicts]}) + "\n")
    else:
        emit(out, csv_text(["family", "params_hash", "lambda", "expected", "verdict", "max_rel_diff", "levels"],
                           rows))
        if cfg.get("json"):
            write_atomic(cfg["json"], dump_json({"rows": [v.to_json() for v in verdicts]}) + "\n")
    if cfg.get("assert_match") and not all(v.agrees for v in verdicts):
        return EXIT_MISMATCH
    return EXIT_OK


HANDLERS = {
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "stokes": cmd_stokes,
    "phase-audit": cmd_phase_audit,
    "susy-verify": cmd_susy_verify,
    "verdict-table": cmd_verdict_table,
}


# ----- argument parsing -----


def _potential_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", type=str.upper)
    for flag in PARAM_FLAGS:
        p.add_argument(f"--{flag}", type=float)
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="any other shape parameter")
    p.add_argument("--lambda", dest="lambda", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stokes-wkb", description=__doc__.splitlines()[0])
    parser.add_argument("--print-schema", action="store_true", help="print the config JSON schema and exit")
    sub = parser.add_subparsers(dest="command")

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--out", help="output path (stdout when omitted)")
        return p

    p = command("spectrum", "JWKB or oracle levels as CSV")
    _potential_flags(p)
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--method", type=str.lower, choices=["jwkb", "oracle"])
    p.add_argument("--json", help="also write the spectrum as JSON")

    p = command("compare", "JWKB against the grid oracle")
    _potential_flags(p)
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--assert-match", dest="assert_match", action="store_true")
    p.add_argument("--json", help="also write the report as JSON")

    p = command("stokes", "Stokes graph as JSON and optional SVG")
    _potential_flags(p)
    p.add_argument("--energy", type=float)
    p.add_argument("--svg")
    p.add_argument("--json")
    p.add_argument("--strip", type=int, help="period copies rendered either side of the basic strip")

    p = command("phase-audit", "phase change of q~ across one period strip")
    _potential_flags(p)
    p.add_argument("--energy", type=float)
    p.add_argument("--x0-real", dest="x0_real", type=float)
    p.add_argument("--copies", type=int, help="root copies per side for the first truncation")
    p.add_argument("--tol", type=float)
    p.add_argument("--assert-match", dest="assert_match", action="store_true")

    p = command("susy-verify", "superpotential catalog checks and SWKB level shifts")
    p.add_argument("--susy-family", dest="susy_family", type=int)
    for flag in PARAM_FLAGS:
        p.add_argument(f"--{flag}", type=float)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--lambda", dest="lambda", type=float)
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--assert-match", dest="assert_match", action="store_true")

    p = command("verdict-table", "exact / not-exact verdict for every reference potential")
    p.add_argument("--json", help="also write the table as JSON")
    p.add_argument("--assert-match", dest="assert_match", action="store_true")
    return parser


def _fail(doc: dict) -> int:
    sys.stderr.write(dump_json(doc) + "\n")
    return EXIT_ERROR


def run(cfg: dict) -> int:
    """Validate ``cfg`` and execute its command; returns the exit status."""
    try:
        validate(cfg)
        if "command" not in cfg:
            raise ConfigError("/command", "'command' is required")
        return HANDLERS[cfg["command"]](cfg)
    except ConfigError as exc:
        return _fail({"error": "SCHEMA", "pointer": exc.pointer, "message": str(exc)})
    except StokesWKBError as exc:
        return _fail({"error": exc.code, "message": str(exc)})


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_schema:
        sys.stdout.write(dump_json(CONFIG_SCHEMA) + "\n")
        return EXIT_OK
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_ERROR
    try:
        cfg = merge(load_config(args.config), args)
    except ConfigError as exc:
        return _fail({"error": "SCHEMA", "pointer": exc.pointer, "message": str(exc)})
    except OSError as exc:
        return _fail({"error": "IO", "message": str(exc)})
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
