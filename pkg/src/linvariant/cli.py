"""Command-line entry point.

    linvariant l-invariant --demo-modular p=3 k=1 lambda=2
    linvariant verify --window -8:80 --p 3
    linvariant cohomology --input module.json --format json

Exit codes: 0 success, 1 a verification check failed, 2 a condition
(C3, C4, C5, admissibility, strictness) fails, 3 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ConditionFailure,
    DualizeFirst,
    InputError,
    LInvariantError,
    RationalParseError,
    SchemaError,
)
from .filtered_phin import (
    FilteredPhiNModule,
    Filtration,
    Subquotient,
    canonical_filtration,
    char_poly,
    dual_filtration_check,
    hodge_newton,
    rational_roots,
    refinement_to_parameters,
    validate,
    verify_filtration_properties,
)
from .invariants import cohomology_identities, cohomology_suite
from .linv_engine import (
    LInvariantInput,
    fontaine_mazur_extract,
    fontaine_mazur_module,
    modular_form_module,
    run_pipeline,
)
from .padic_linalg import QpMatrix, Subspace, check_prime, kernel, q_str, restrict, to_q
from .rank1_coords import PAIR_TABLE, Rank1Space
from .robba_oracle import DEFAULT_WINDOW, cup_table, default_precision, verify_identities
from .st_cohomology import h_cris, h_st

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONDITION, EXIT_INPUT = 0, 1, 2, 3
COMMANDS = ("inspect", "filtration", "cohomology", "triangulate", "l-invariant", "fm-extract", "verify", "tables")


class JsonParseError(InputError):
    def __init__(self, path, line, column, msg):
        self.line, self.column = line, column
        super().__init__(f"{path}:{line}:{column}: {msg}")


@dataclass
class CliConfig:
    command: str
    input: str | None = None
    p: int | None = None
    precision: int | None = None
    window: tuple[int, int] = DEFAULT_WINDOW
    format: str = "text"
    table_cache: str | None = None
    local_only: bool = False
    demo_modular: dict | None = None
    m_max: int = 3
    k_max: int = 2


# ---------------------------------------------------------------------------
# input parsing

def _rat(x, where: str) -> Fraction:
    try:
        return to_q(x)
    except RationalParseError as exc:
        raise RationalParseError(f"{where}: {exc}") from None


def _matrix(obj, d: int, where: str, ncols: int | None = None) -> list[list[Fraction]]:
    ncols = d if ncols is None else ncols
    if not isinstance(obj, list) or len(obj) != d:
        raise SchemaError(where, f"expected {d} rows")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != ncols:
            raise SchemaError(where, f"row {i} must have {ncols} entries")
        rows.append([_rat(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return rows


def _vectors(obj, d: int, where: str) -> list[list[Fraction]]:
    if not isinstance(obj, list):
        raise SchemaError(where, "expected a list of vectors")
    return _matrix(obj, len(obj), where, d)


def _int(obj, where: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(where, "expected an integer")
    return obj


def module_from_json(obj: dict, p_override: int | None = None) -> FilteredPhiNModule:
    if not isinstance(obj, dict):
        raise SchemaError("<root>", "expected a JSON object")
    for key in ("p", "dim", "phi", "N", "filtration"):
        if key not in obj:
            raise SchemaError(key, "missing field")
    p = _int(obj["p"], "p") if p_override is None else p_override
    try:
        check_prime(p)
    except LInvariantError as exc:
        raise SchemaError("p", str(exc)) from None
    d = _int(obj["dim"], "dim")
    if d < 0:
        raise SchemaError("dim", "must be >= 0")
    phi = QpMatrix(_matrix(obj["phi"], d, "phi"), d)
    N = QpMatrix(_matrix(obj["N"], d, "N"), d)
    if not isinstance(obj["filtration"], list):
        raise SchemaError("filtration", "expected a list of {jump, basis} steps")
    steps = []
    for i, st in enumerate(obj["filtration"]):
        where = f"filtration[{i}]"
        if not isinstance(st, dict) or "jump" not in st or "basis" not in st:
            raise SchemaError(where, "each step needs 'jump' and 'basis'")
        steps.append((_int(st["jump"], where + ".jump"),
                      Subspace.span(_vectors(st["basis"], d, where + ".basis"), d)))
    return FilteredPhiNModule(p, phi, N, Filtration(d, steps))


def _load_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonParseError(path, exc.lineno, exc.colno, exc.msg) from None


def parse_input(path: str, p_override: int | None = None) -> LInvariantInput:
    """Schema-checked LInvariantInput; D defaults to 0 when absent."""
    obj = _load_json(path)
    M = module_from_json(obj, p_override)
    return _input_from(obj, M)


def _input_from(obj: dict, M: FilteredPhiNModule) -> LInvariantInput:
    d = M.dim
    D = Subspace.zero(d)
    if obj.get("D") is not None:
        Dobj = obj["D"]
        if not isinstance(Dobj, dict) or "basis" not in Dobj:
            raise SchemaError("D", "expected {\"basis\": [[rat]]}")
        D = Subspace.span(_vectors(Dobj["basis"], d, "D.basis"), d)
    a = obj.get("assert_c1c2", False)
    if not isinstance(a, bool):
        raise SchemaError("assert_c1c2", "expected true or false")
    gs = obj.get("global_subspace")
    if gs is not None:
        if not isinstance(gs, list) or not gs:
            raise SchemaError("global_subspace", "expected a non-empty list of rows")
        gs = _matrix(gs, len(gs), "global_subspace", len(gs[0]) if isinstance(gs[0], list) else 0)
    return LInvariantInput(M, D, a, gs)


def _flag_from(obj: dict, d: int) -> list[Subspace] | None:
    if obj.get("flag") is None:
        return None
    if not isinstance(obj["flag"], list):
        raise SchemaError("flag", "expected a list of bases")
    return [Subspace.span(_vectors(b, d, f"flag[{i}]"), d) for i, b in enumerate(obj["flag"])]


def parse_demo(tokens) -> dict:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise InputError(f"--demo-modular expects key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        if k not in ("p", "k", "lambda"):
            raise InputError(f"--demo-modular: unknown key {k!r} (use p, k, lambda)")
        out[k] = v
    for k in ("p", "k", "lambda"):
        if k not in out:
            raise InputError(f"--demo-modular needs {k}=")
    try:
        p, kk = int(out["p"]), int(out["k"])
    except ValueError:
        raise InputError("--demo-modular: p and k must be integers") from None
    check_prime(p)
    if kk < 1:
        raise InputError("--demo-modular: k must be >= 1")
    return {"p": p, "k": kk, "lambda": _rat(out["lambda"], "lambda")}


def parse_window(s: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in s.split(":"))
    except ValueError:
        raise InputError(f"--window expects LO:HI, got {s!r}") from None
    if not lo < 0 < hi:
        raise InputError("--window needs LO < 0 < HI")
    return lo, hi


# ---------------------------------------------------------------------------
# JSON-ready payloads

def jsonable(x):
    if isinstance(x, Fraction):
        return q_str(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return None if x != x or x in (float("inf"), float("-inf")) else x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def render_text(payload, prefix="") -> list[str]:
    """Flatten a payload to 'path: value' lines; numbers are the same strings as in JSON."""
    lines = []
    if isinstance(payload, dict):
        for k, v in payload.items():
            lines += render_text(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(payload, list) and any(isinstance(v, (dict, list)) for v in payload):
        for i, v in enumerate(payload):
            lines += render_text(v, f"{prefix}[{i}]")
    else:
        if isinstance(payload, list):
            val = "[" + ", ".join("null" if v is None else str(v) for v in payload) + "]"
        elif payload is None:
            val = "null"
        elif isinstance(payload, bool):
            val = "true" if payload else "false"
        else:
            val = str(payload)
        lines.append(f"{prefix}: {val}")
    return lines


# ---------------------------------------------------------------------------
# commands

def _need_module(cfg: CliConfig, demo_kind: str = "modular"):
    """(module, raw json or None) from --input or --demo-modular."""
    if cfg.demo_modular is not None:
        d = cfg.demo_modular
        if demo_kind == "fm":
            return fontaine_mazur_module(d["p"], d["k"], d["lambda"]), None
        inp = modular_form_module(d["p"], d["k"], d["lambda"])
        return inp.M, inp.to_json()
    if cfg.input is None:
        raise InputError("this command needs --input PATH or --demo-modular")
    obj = _load_json(cfg.input)
    return module_from_json(obj, cfg.p), obj


def _need_input(cfg: CliConfig) -> LInvariantInput:
    M, obj = _need_module(cfg)
    if cfg.demo_modular is not None:
        return modular_form_module(cfg.demo_modular["p"], cfg.demo_modular["k"], cfg.demo_modular["lambda"])
    if obj.get("D") is None:
        raise SchemaError("D", "required for this command")
    return _input_from(obj, M)


def cmd_inspect(cfg):
    M, _ = _need_module(cfg)
    v = validate(M)
    out = {"p": M.p, "dim": M.dim, "validation": v.to_json(), "valid": v.ok}
    if v.ok:
        out["hodge_newton"] = hodge_newton(M)
    return out, (EXIT_OK if v.ok else EXIT_INPUT)


def cmd_filtration(cfg):
    inp = _need_input(cfg)
    filt = canonical_filtration(inp.M, inp.D)
    props = verify_filtration_properties(inp.M, inp.D, filt)
    dual_ok = dual_filtration_check(inp.M, inp.D)
    out = {"filtration": filt.to_json(),
           "dims": {"D_-1": filt.d_minus1.dim, "D_0": filt.d0.dim, "D_1": filt.d1.dim},
           "properties": props.to_json(), "dual_check": dual_ok}
    return out, (EXIT_OK if props.ok and dual_ok else EXIT_CHECK_FAILED)


def _cohomology_payload(H):
    out = {"dims": list(H.dims), "tangent_dim": H.tangent_dim,
           "H0_basis": [list(v) for v in H.h0], "H1_basis": [list(v) for v in H.h1]}
    if H.kind == "st":
        out["H2_basis"] = [list(v) for v in H.h2]
    return out


def cmd_cohomology(cfg):
    M, _ = _need_module(cfg)
    v = validate(M)
    if not v.ok:
        raise InputError("invalid module: " + ", ".join(v.failures()))
    ids = cohomology_identities(M)
    out = {"C_cris": _cohomology_payload(h_cris(M)), "C_st": _cohomology_payload(h_st(M)),
           "identities": {k: {"pass": ok, "detail": d} for k, (ok, d) in ids.items()}}
    return out, (EXIT_OK if all(ok for ok, _ in ids.values()) else EXIT_CHECK_FAILED)


def auto_flag(M: FilteredPhiNModule) -> list[Subspace]:
    """A full phi,N-stable flag built from rational eigenvectors killed by N, step by step."""
    d = M.dim
    F = Subspace.zero(d)
    flag = []
    while F.dim < d:
        Q = Subquotient(M, F, Subspace.full(d))
        X = Q.module
        K = kernel(X.N)
        roots = rational_roots(char_poly(restrict(X.phi, K)))
        if not roots:
            raise ConditionFailure(f"no rational phi-eigenvector in ker N above a step of dimension {F.dim}")
        lam = sorted(roots)[0]
        v = X.eigenspace(lam).intersect(K).basis[0]
        F = F + Subspace.span([Q.lift(v)], d)
        flag.append(F)
    return flag


def cmd_triangulate(cfg):
    M, obj = _need_module(cfg)
    flag = _flag_from(obj, M.dim) if obj is not None else None
    source = "input"
    if flag is None:
        flag, source = auto_flag(M), "automatic"
    params = refinement_to_parameters(M, flag)
    rows = []
    for c in params:
        fam = c.family(M.p)
        rows.append({**c.to_json(), "family": None if fam is None else Rank1Space(*fam).to_json()})
    return {"flag_source": source, "flag": [S.to_json() for S in flag], "parameters": rows}, EXIT_OK


def cmd_l_invariant(cfg):
    inp = _need_input(cfg)
    rep = run_pipeline(inp, local_only=cfg.local_only)
    return rep.to_json(), EXIT_OK


def cmd_fm_extract(cfg):
    M, _ = _need_module(cfg, demo_kind="fm")
    lam = fontaine_mazur_extract(M)
    return {"p": M.p, "lambda": lam}, EXIT_OK


def cmd_verify(cfg):
    p = cfg.p or 3
    prec = cfg.precision or default_precision(p)
    ident = verify_identities(mmax=4, mmax_principal=6, window=cfg.window, p=p, prec=prec, n_random=50)
    suite = cohomology_suite(p, seed=0)
    ok = ident.ok and suite.ok
    return {"ok": ok, "robba_identities": ident, "cohomology_suite": suite}, (EXIT_OK if ok else EXIT_CHECK_FAILED)


def cmd_tables(cfg):
    p = cfg.p or 3
    prec = cfg.precision or default_precision(p)
    entries = []
    ok = True
    for m in range(1, cfg.m_max + 1):
        for k in range(0, cfg.k_max + 1):
            t = cup_table(p, m, k, cfg.table_cache, cfg.window, prec)
            wants = [x for row in PAIR_TABLE for x in row]
            match = all(got.agrees_with(want, min(t.digits, prec, got.prec or prec))
                        for want, got in zip(wants, t.values()))
            ok &= match
            entries.append({**t.to_json(), "matches_package_table": match})
    return {"p": p, "entries": entries, "ok": ok}, (EXIT_OK if ok else EXIT_CHECK_FAILED)


HANDLERS = {
    "inspect": cmd_inspect, "filtration": cmd_filtration, "cohomology": cmd_cohomology,
    "triangulate": cmd_triangulate, "l-invariant": cmd_l_invariant, "fm-extract": cmd_fm_extract,
    "verify": cmd_verify, "tables": cmd_tables,
}


def run(cfg: CliConfig) -> tuple[int, dict]:
    """Dispatch one command; never raises for library errors."""
    try:
        payload, code = HANDLERS[cfg.command](cfg)
        return code, {"command": cfg.command, "exit_code": code, "result": jsonable(payload)}
    except DualizeFirst as exc:
        err = _error_obj(exc)
        err["dual_input"] = jsonable(exc.dual_input)
        return EXIT_CONDITION, {"command": cfg.command, "exit_code": EXIT_CONDITION, "error": err}
    except ConditionFailure as exc:
        return EXIT_CONDITION, {"command": cfg.command, "exit_code": EXIT_CONDITION, "error": _error_obj(exc)}
    except (InputError, LInvariantError) as exc:
        return EXIT_INPUT, {"command": cfg.command, "exit_code": EXIT_INPUT, "error": _error_obj(exc)}


def _error_obj(exc) -> dict:
    out = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("field", "line", "column"):
        if hasattr(exc, attr):
            out[attr] = getattr(exc, attr)
    return out


# ---------------------------------------------------------------------------
# argv

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", metavar="PATH")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--precision", type=int, metavar="N")
    common.add_argument("--window", metavar="LO:HI")
    common.add_argument("--table-cache", metavar="PATH")
    common.add_argument("--local-only", action="store_true")
    common.add_argument("--demo-modular", nargs="+", metavar="KEY=VALUE")
    common.add_argument("--p", type=int)
    common.add_argument("--m-max", type=int, default=3)
    common.add_argument("--k-max", type=int, default=2)
    ap = _Parser(prog="linvariant", description="L-invariants of semistable filtered (phi, N)-modules.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common])
    return ap


def _glue_window(argv):
    # "--window -8:80" would be read as an option; glue it to the flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--window" and i + 1 < len(argv):
            out.append("--window=" + argv[i + 1])
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def config_from_args(argv) -> CliConfig:
    ns = build_parser().parse_args(_glue_window(list(argv)))
    if ns.precision is not None and ns.precision < 5:
        raise InputError("--precision must be >= 5")
    if ns.p is not None:
        check_prime(ns.p)
    if ns.m_max < 1 or ns.k_max < 0:
        raise InputError("--m-max must be >= 1 and --k-max >= 0")
    return CliConfig(
        command=ns.command, input=ns.input, p=ns.p, precision=ns.precision,
        window=parse_window(ns.window) if ns.window else DEFAULT_WINDOW,
        format=ns.format, table_cache=ns.table_cache, local_only=ns.local_only,
        demo_modular=parse_demo(ns.demo_modular) if ns.demo_modular else None,
        m_max=ns.m_max, k_max=ns.k_max,
    )


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    fmt = "json" if "json" in argv and "--format" in argv else "text"
    try:
        cfg = config_from_args(argv)
        fmt = cfg.format
        code, out = run(cfg)
    except LInvariantError as exc:
        code, out = EXIT_INPUT, {"command": None, "exit_code": EXIT_INPUT, "error": _error_obj(exc)}
    if fmt == "json":
        print(json.dumps(out, indent=2))
    else:
        print("\n".join(render_text(out)))
    return code


if __name__ == "__main__":
    sys.exit(main())
