"""Command line front end: ``hypoel analyze | classify | spectral | regress``.

Every command prints one JSON report (schema ``hypoel/1``).  Exit codes:
0 ok, 1 regression failure, 2 usage or parse error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence

import mpmath
import numpy as np

from . import __version__

SCHEMA = "hypoel/1"
EXIT_OK, EXIT_REGRESSION, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3

CONFIG_KEYS = {
    "analyze.resolution": int,
    "analyze.tol": float,
    "analyze.max_len": int,
    "spectral.grid": int,
    "spectral.window": float,
    "spectral.tol": float,
    "symbol.tol": float,
    "witness.j_max": int,
}


class UsageError(Exception):
    pass


class ComputeError(Exception):
    pass


# ---------------------------------------------------------------- JSON

def jsonable(x):
    """Plain JSON values, with out-of-range numbers as decimal strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        x = int(x)
        return x if abs(x) < 2 ** 1023 else str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(x, 30)
    if isinstance(x, complex):
        return {"re": jsonable(x.real), "im": jsonable(x.imag)}
    return str(x)


def envelope(command: str, inputs: Mapping, results: Any, status: str = "ok",
             seconds: Optional[float] = None, error: Optional[Mapping] = None) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "schema": SCHEMA,
        "tool": "hypoel",
        "version": __version__,
        "command": command,
        "status": status,
        "inputs": dict(inputs),
        "results": results,
        "timing": None if seconds is None else {"seconds": round(seconds, 6)},
        "error": None if error is None else dict(error),
    }
    return jsonable(out)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


# ---------------------------------------------------------------- config

def read_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    out: Dict[str, Any] = {}
    section = ""
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        key = f"{section}.{k}" if section and "." not in k else k
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](v.strip("\"'"))
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: bad value for {key}") from exc
    return out


def _cfg(args, key, fallback):
    v = getattr(args, key.split(".", 1)[1], None)
    if v is not None:
        return v
    return args.config_values.get(key, fallback)


# ---------------------------------------------------------------- analyze

def _parse_point(text: Optional[str], variables: Sequence[str]) -> Dict[str, Fraction]:
    if text is None:
        return {}
    text = text.strip()
    try:
        if "=" not in text:
            if len(variables) != 1:
                raise UsageError("--point needs name=value pairs for several variables")
            return {variables[0]: Fraction(text)}
        out = {}
        for part in text.split(","):
            k, v = (p.strip() for p in part.split("="))
            out[k] = Fraction(v)
        return out
    except ValueError as exc:
        raise UsageError(f"bad point {text!r}") from exc


def cmd_analyze(args) -> Dict[str, Any]:
    from .brackets import hormander_depth
    from .irregularity import irregularity
    from .operator_core import DSLError, parse_operator
    from .symbol_analysis import is_elliptic, nondegenerate_at, principal_symbol, tube_decompose

    try:
        P = parse_operator(args.operator)
        fields = [parse_operator(f) for f in args.fields.split(";")] if args.fields else []
    except DSLError as exc:
        raise UsageError(f"parse error: {exc}") from exc
    point = _parse_point(args.point, P.variables)
    res: Dict[str, Any] = {
        "operator": str(P),
        "variables": list(P.variables),
        "order": P.order(),
    }
    try:
        res["principal_symbol"] = str(principal_symbol(P))
        rep = is_elliptic(P, resolution=_cfg(args, "analyze.resolution", 256),
                          tol=_cfg(args, "analyze.tol", 1e-9))
        res["ellipticity"] = rep.to_dict()
        if args.tube:
            tv = [v.strip() for v in args.tube.split(",") if v.strip()]
            td = tube_decompose(P, tv)
            res["tube"] = {"applicable": False, "reason": "coefficients depend on the x-variables"} \
                if td is None else dict({"applicable": True}, **td.to_dict())
        if point:
            res["nondegenerate"] = {"point": {k: str(v) for k, v in point.items()},
                                    "value": nondegenerate_at(P, point)}
        if args.irregularity:
            x0 = point.get(P.variables[0], Fraction(0)) if len(P.variables) == 1 else None
            if x0 is None:
                raise UsageError("--irregularity needs an operator in one variable")
            res["irregularity"] = irregularity(P, x0).to_dict()
        if fields:
            res["hormander"] = hormander_depth(fields, point, max_len=_cfg(args, "analyze.max_len", 6)).to_dict()
    except UsageError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise ComputeError(str(exc)) from exc
    return res


# ---------------------------------------------------------------- classify

def _read_axioms(path: str, op: str):
    from .inference import FactSyntaxError, parse_fact
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read axioms {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
        lines = data if isinstance(data, list) else data.get("axioms", [])
    except json.JSONDecodeError:
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    out = []
    for ln in lines:
        if isinstance(ln, dict):
            src = ln.get("source", "user")
            ln = ln["fact"]
        else:
            src = "user"
        if not ln:
            continue
        try:
            out.append((parse_fact(ln, op=op), src))
        except FactSyntaxError as exc:
            raise UsageError(f"bad axiom {ln!r}: {exc}") from exc
    return out


def cmd_classify(args) -> Dict[str, Any]:
    from .inference import (CatalogError, FactSyntaxError, UnknownOperatorError, catalog,
                            catalog_axioms, catalog_closure, derive, query)

    try:
        entries = catalog(args.catalog) if args.catalog else catalog()
    except (OSError, CatalogError, ValueError) as exc:
        raise UsageError(f"cannot load catalog: {exc}") from exc
    op = args.target
    if args.axioms:
        axioms, transposes, ops = catalog_axioms(entries)
        axioms = axioms + _read_axioms(args.axioms, op)
        cl = derive(axioms, transposes, operators=list(ops) + ([op] if op not in ops else []))
    elif args.catalog:
        axioms, transposes, ops = catalog_axioms(entries)
        cl = derive(axioms, transposes, operators=ops)
    else:
        cl = catalog_closure()
    try:
        ans = query(cl, op, args.question)
    except UnknownOperatorError:
        return {"operator": op, "question": args.question, "answer": "unknown",
                "reason": "operator not in the catalog and no axioms given"}
    except FactSyntaxError as exc:
        raise UsageError(f"bad question: {exc}") from exc
    d = ans.to_dict(cl)
    entry = next((e for e in entries if e.id == op), None)
    if entry is not None:
        d["name"] = entry.name
        d["operator_text"] = str(entry.operator)
    return d


# ---------------------------------------------------------------- spectral

def _grid_input(args, n: int):
    from . import spectral_lab as sl
    window = None if args.no_window else _cfg(args, "spectral.window", 3.0)
    if args.input:
        try:
            return sl.read_csv_grid(args.input)
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}") from exc
    if args.func:
        return sl.sample(args.func, n, window=window)
    if getattr(args, "builtin", None) == "square":
        return sl.square_wave(n, window=window)
    if getattr(args, "builtin", None) == "comb":
        return sl.mollified_comb(n, window=window)
    raise UsageError("give --func, --input or --builtin")


def cmd_spectral(args) -> Dict[str, Any]:
    from . import spectral_lab as sl
    from . import ultradiff as ud

    sub = args.sub
    n = _cfg(args, "spectral.grid", 1 << 14)
    try:
        if sub == "fit":
            if args.decay is not None:
                sd = float(Fraction(args.decay))
                S = sl.spectrum_from(lambda k: np.exp(-np.abs(k) ** (1 / sd)), n,
                                     source=f"exp(-|xi|^(1/{args.decay}))")
                res: Dict[str, Any] = {"input": S.source, "grid": n}
            else:
                g = _grid_input(args, n)
                S = sl.transform(g)
                res = {"input": g.label, "grid": g.size, "parseval_error": sl.parseval_error(g, S)}
            win = (args.lo, args.hi) if args.lo is not None and args.hi is not None else None
            res["fit"] = sl.gevrey_order_fit(S, win).to_dict()
            if args.csv:
                _write(args.csv, sl.spectrum_csv(S))
                res["csv"] = args.csv
            return res
        if sub == "represent":
            g = _grid_input(args, n)
            rep = sl.representation_experiment(g, Fraction(args.s), Fraction(args.t),
                                               tol=_cfg(args, "spectral.tol", 1e-6))
            if args.csv:
                _write(args.csv, sl.spectrum_csv(sl.transform(rep.f)))
            return {"input": g.label, "grid": g.size, "report": rep.to_dict()}
        if sub == "symbol":
            sigma = ud.parse_sigma(args.sigma)
            Q = ud.build_sigma_symbol(sigma, Fraction(args.s), tol=_cfg(args, "symbol.tol", 1e-12))
            vals = []
            for x in args.eval or []:
                v = Q.at_i([float(x)])
                vals.append(dict({"xi": x}, **v.to_dict()))
            res = {"symbol": Q.to_dict(), "values": vals}
            if args.cone:
                res["cone"] = ud.check_strong_ellipticity(Q, args.aperture, args.cone).to_dict()
            if args.lower_bound:
                xs = np.geomspace(max(1.0, ud.lower_bound_onset(Q)), args.xi_max, args.lower_bound)
                res["lower_bound"] = ud.check_lower_bound(Q, xs).to_dict()
            return res
        if sub == "witness":
            t = Fraction(args.decay)
            w = ud.build_witness(ud.exp_decay(t), Fraction(args.s), _cfg(args, "witness.j_max", 4))
            return {"u_hat": f"exp(-|xi|^(1/{args.decay}))", "witness": None if w is None else w.to_dict(),
                    "found": w is not None}
    except ud.SigmaError as exc:
        raise UsageError(str(exc)) from exc
    except sl.SpectralError as exc:
        if isinstance(exc, sl.FitError):
            raise ComputeError(str(exc)) from exc
        raise UsageError(str(exc)) from exc
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from exc
    except (ArithmeticError, ud.TruncationError) as exc:
        raise ComputeError(str(exc)) from exc
    raise UsageError(f"unknown spectral command {sub!r}")


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ComputeError(f"cannot write {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------- regress

def cmd_regress(args):
    from .inference import CatalogError, catalog, regress

    try:
        entries = catalog(args.catalog) if args.catalog else catalog()
        results = regress(entries)
    except (OSError, ValueError) as exc:
        if isinstance(exc, CatalogError) or isinstance(exc, (OSError, json.JSONDecodeError)):
            raise UsageError(str(exc)) from exc
        raise
    failed = [r for r in results if not r.passed]
    out: Dict[str, Any] = {
        "total": len(results),
        "passed": len(results) - len(failed),
        "failed": len(failed),
        "cases": [{"entry": r.entry, "question": r.question, "passed": r.passed,
                   "expected": r.expected, "got": r.got} for r in results],
    }
    if args.fuzz:
        from .inference.fuzz import fuzz
        rep = fuzz(args.fuzz, seed=args.seed, entries=entries)
        out["fuzz"] = rep.to_dict()
        if not rep.ok:
            failed.append(None)
    return out, (EXIT_REGRESSION if failed else EXIT_OK)


# ---------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypoel", description="Hypoellipticity analysis toolkit")
    p.add_argument("--config", help="key = value file with default grids and tolerances")
    p.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--version", action="version", version=f"hypoel {__version__}")
    sp = p.add_subparsers(dest="command", required=True)

    a = sp.add_parser("analyze", help="symbolic analysis of one operator")
    a.add_argument("operator")
    a.add_argument("--tube", help="comma-separated t-variables of a tube decomposition")
    a.add_argument("--irregularity", action="store_true")
    a.add_argument("--point", help="a value (one variable) or name=value pairs")
    a.add_argument("--fields", help="semicolon-separated vector fields for the bracket test")
    a.add_argument("--resolution", type=int)
    a.add_argument("--tol", type=float)
    a.add_argument("--max-len", dest="max_len", type=int)

    c = sp.add_parser("classify", help="answer a hypoellipticity question from the catalog")
    c.add_argument("target", help="catalog id, or a new id together with --axioms")
    c.add_argument("question")
    c.add_argument("--axioms", help="extra facts for the target (JSON list or one per line)")
    c.add_argument("--catalog", help="alternative catalog JSON file")

    s = sp.add_parser("spectral", help="FFT experiments and product symbols")
    ss = s.add_subparsers(dest="sub", required=True)
    for name in ("fit", "represent"):
        q = ss.add_parser(name)
        q.add_argument("--func", help="closed form in x, e.g. 'exp(-1/x) for x>0'")
        q.add_argument("--input", help="CSV file of samples")
        q.add_argument("--builtin", choices=("square", "comb"))
        q.add_argument("--grid", type=int)
        q.add_argument("--window", type=float, help="bump radius (default 3)")
        q.add_argument("--no-window", action="store_true")
        q.add_argument("--csv", help="write the spectrum CSV here")
        if name == "fit":
            q.add_argument("--decay", help="synthetic spectrum exp(-|xi|^(1/s)) with this s")
            q.add_argument("--lo", type=float)
            q.add_argument("--hi", type=float)
        else:
            q.add_argument("--s", required=True)
            q.add_argument("--t", required=True)
            q.add_argument("--tol", type=float)
    y = ss.add_parser("symbol")
    y.add_argument("--sigma", required=True, help="'const c', 'c*rho^mu', 'table r:v,...' or 'growth c k mu'")
    y.add_argument("--s", required=True)
    y.add_argument("--eval", action="append", type=float, help="evaluate Q(i xi) at this |xi|")
    y.add_argument("--tol", type=float)
    y.add_argument("--cone", type=int, default=0, help="sample the cone at this many points")
    y.add_argument("--aperture", type=float, default=0.5)
    y.add_argument("--lower-bound", dest="lower_bound", type=int, default=0)
    y.add_argument("--xi-max", dest="xi_max", type=float, default=1e4)
    w = ss.add_parser("witness")
    w.add_argument("--decay", required=True, help="t of u_hat = exp(-|xi|^(1/t))")
    w.add_argument("--s", required=True)
    w.add_argument("--j-max", dest="j_max", type=int)

    r = sp.add_parser("regress", help="check the catalog expectations")
    r.add_argument("--catalog")
    r.add_argument("--fuzz", type=int, default=0, help="also run this many random soundness cases")
    r.add_argument("--seed", type=int, default=0)
    return p


def _inputs(args) -> Dict[str, Any]:
    skip = {"config_values", "timing", "out", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None and v is not False}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = args.command + (f" {args.sub}" if args.command == "spectral" else "")
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        args.config_values = read_config(args.config)
        if getattr(args, "grid", None) is not None:
            args.config_values["spectral.grid"] = args.grid
        if getattr(args, "window", None) is not None:
            args.config_values["spectral.window"] = args.window
        if args.command == "analyze":
            res = cmd_analyze(args)
        elif args.command == "classify":
            res = cmd_classify(args)
        elif args.command == "spectral":
            res = cmd_spectral(args)
        else:
            res, code = cmd_regress(args)
        status = "ok" if code == EXIT_OK else "fail"
        rep = envelope(command, _inputs(args), res, status,
                       time.perf_counter() - t0 if args.timing else None)
    except UsageError as exc:
        code = EXIT_USAGE
        rep = envelope(command, _inputs(args), None, "error", error={"kind": "usage", "message": str(exc)})
        print(f"hypoel: {exc}", file=sys.stderr)
    except ComputeError as exc:
        code = EXIT_COMPUTE
        rep = envelope(command, _inputs(args), None, "error", error={"kind": "computation", "message": str(exc)})
        print(f"hypoel: {exc}", file=sys.stderr)
    text = dumps(rep)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
