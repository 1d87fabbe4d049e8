"""Command-line front end: ``nls <analysis> --config <path> [--out <dir>] [--format json|csv|both]``.

A config is an INI file.  ``[symbol]`` is always required, ``[potential]``,
``[grid]``, ``[params]`` and ``[numerics]`` depend on the analysis.  Keys
are case sensitive and unknown keys or sections are rejected.  Physical
parameters have no defaults; only numerical knobs do.

Exit codes: 0 for ``Holds`` or a completed computation without a verdict,
2 for ``Fails`` or ``Inconclusive``, 1 for any error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .criteria import (
    LowerBound,
    Status,
    _jsonable,
    bs_check_global,
    bs_threshold_compact,
    check_mourre_basic,
    check_mourre_composite,
    check_virial,
    default_radii,
    dicho_threshold,
    EPS_GRID,
    GRID_N,
)
from .errors import ArgumentOutOfDomain, ConfigParse, NLSError
from .grid import TorusGrid, coupling_sweep, lowest_eigenvalues, zero_mode_residual
from .potentials import Potential, l1_norm, load_tabulated_potential, sup_norm
from .resolvent import ResolventParams, hs_norm, thm5_verdict
from .symbols import KineticSymbol, SymbolKind, load_tabulated_symbol

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_FAILS = 0, 1, 2

log = logging.getLogger("nls")


# value parsers
def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def _int(text: str) -> int:
    return int(text)


def _str(text: str) -> str:
    return text.strip()


def _floats(text: str) -> list[float]:
    return [_float(t) for t in text.split(",") if t.strip()]


# schema: section -> key -> parser; REQUIRED lists physical keys per variant
SYMBOL_KEYS = {
    "Classical": {},
    "Fractional": {"alpha": _float},
    "Relativistic": {"alpha": _float, "m": _float},
    "JumpDiffusion": {"alpha": _float, "c": _float},
    "LogFractional": {"alpha": _float},
    "Tabulated": {"path": _str},
}

POTENTIAL_KEYS = {
    "InversePower": {"C": _float, "beta": _float},
    "HomogeneousCoulomb": {"C": _float, "gamma": _float},
    "PositiveBump": {"C": _float, "nu": _float},
    "Hypergeometric": {"kappa": _float, "alpha": _float, "l": _int},
    "TabulatedRadial": {"path": _str},
}

GRID_KEYS = {"d": _int, "N": _int, "L": _float}


@dataclass(frozen=True)
class AnalysisSchema:
    potential: str  # "required", "optional" or "none"
    grid: bool
    params: dict  # key -> (parser, required)
    numerics: dict  # key -> (parser, default)


_RADII = {"radii_n": (_int, GRID_N)}
_SOLVER = {"tol": (_float, 1e-8), "max_matvecs": (_int, 5000), "seed": (_int, 0)}

SCHEMAS = {
    "CheckVirial": AnalysisSchema("required", False, {}, _RADII),
    "CheckMourre": AnalysisSchema("required", False, {}, _RADII),
    "CheckMourreComposite": AnalysisSchema(
        "required", False, {"lower_bound": (_str, True)},
        {**_RADII, "eps_grid": (_floats, list(EPS_GRID))},
    ),
    "BsCompact": AnalysisSchema("optional", False, {"d": (_int, True), "R": (_float, True), "sup_norm": (_float, False)}, {}),
    "BsGlobal": AnalysisSchema(
        "optional", False, {"d": (_int, True), "sup_norm": (_float, False), "l1_norm": (_float, False)}, {},
    ),
    "DichoThreshold": AnalysisSchema("none", False, {"coupling": (_float, False)}, {}),
    "Thm5": AnalysisSchema("required", False, {"s": (_float, True)}, {}),
    "HsNorm": AnalysisSchema("none", False, {"s": (_float, True), "z_re": (_float, False), "z_im": (_float, False)}, {}),
    "ZeroMode": AnalysisSchema("none", True, {"kappa": (_float, True), "l": (_int, True)}, {"bins": (_int, 8)}),
    "Eigen": AnalysisSchema("optional", True, {"k": (_int, True)}, {**_SOLVER, "solver": (_str, "Lanczos")}),
    "Sweep": AnalysisSchema(
        "none", True, {"C_values": (_floats, True), "beta": (_float, False), "k": (_int, False)},
        {"tol": (_float, 1e-8), "max_matvecs": (_int, 5000)},
    ),
}

ANALYSES = tuple(SCHEMAS)


# config loading
def _read_ini(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, strict=True, default_section="__none__")
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigParse(f"malformed config {path}: {exc}") from exc
    return parser


def _take(section: str, raw: dict, keys: dict, required: set) -> dict:
    unknown = sorted(set(raw) - set(keys))
    if unknown:
        raise ConfigParse(f"unknown key(s) in [{section}]: {', '.join(unknown)}")
    missing = sorted(required - set(raw))
    if missing:
        raise ConfigParse(f"missing key(s) in [{section}]: {', '.join(missing)}")
    out = {}
    for key, text in raw.items():
        try:
            out[key] = keys[key](text)
        except ValueError as exc:
            raise ConfigParse(f"[{section}] {key} = {text!r}: {exc}") from exc
    return out


def _variant(section: str, raw: dict, selector: str, table: dict, extra: dict) -> dict:
    if selector not in raw:
        raise ConfigParse(f"[{section}] needs '{selector}'")
    name = raw[selector].strip()
    if name not in table:
        raise ConfigParse(f"[{section}] {selector} = {name!r}; expected one of {', '.join(table)}")
    body = {k: v for k, v in raw.items() if k != selector}
    keys = {**table[name], **extra}
    out = _take(section, body, keys, set(table[name]))
    return {selector: name, **out}


def load_config(path: str | Path, analysis: str) -> dict:
    """Parse and validate a config file into the resolved config dictionary."""
    if analysis not in SCHEMAS:
        raise ConfigParse(f"unknown analysis {analysis!r}")
    path = Path(path)
    schema = SCHEMAS[analysis]
    ini = _read_ini(path)
    allowed = {"run", "symbol", "params", "numerics"}
    if schema.potential != "none":
        allowed.add("potential")
    if schema.grid:
        allowed.add("grid")
    unknown = sorted(set(ini.sections()) - allowed)
    if unknown:
        raise ConfigParse(f"section(s) not used by {analysis}: {', '.join(unknown)}")
    raw = {name: dict(ini[name]) for name in ini.sections()}

    cfg = {"analysis": analysis}
    run = _take("run", raw.get("run", {}), {"analysis": _str}, set())
    if run.get("analysis", analysis) != analysis:
        raise ConfigParse(f"config is for analysis {run['analysis']!r}, not {analysis!r}")

    if "symbol" not in raw:
        raise ConfigParse("missing [symbol] section")
    cfg["symbol"] = _variant("symbol", raw["symbol"], "kind", SYMBOL_KEYS, {})

    if schema.grid:
        if "grid" not in raw:
            raise ConfigParse(f"{analysis} needs a [grid] section")
        cfg["grid"] = _take("grid", raw["grid"], GRID_KEYS, set(GRID_KEYS))

    if schema.potential == "required" and "potential" not in raw:
        raise ConfigParse(f"{analysis} needs a [potential] section")
    if "potential" in raw:
        pot = _variant("potential", raw["potential"], "family", POTENTIAL_KEYS, {"d": _int})
        pot.setdefault("d", cfg["grid"]["d"] if schema.grid else 3)
        cfg["potential"] = pot

    pkeys = {k: p for k, (p, _) in schema.params.items()}
    preq = {k for k, (_, req) in schema.params.items() if req}
    cfg["params"] = _take("params", raw.get("params", {}), pkeys, preq)

    nkeys = {k: p for k, (p, _) in schema.numerics.items()}
    numerics = _take("numerics", raw.get("numerics", {}), nkeys, set())
    cfg["numerics"] = {k: numerics.get(k, default) for k, (_, default) in schema.numerics.items()}

    for section in ("symbol", "potential"):
        if section in cfg and "path" in cfg[section]:
            p = Path(cfg[section]["path"])
            cfg[section]["resolved_path"] = str(p if p.is_absolute() else path.parent / p)
    return cfg


# builders
def build_symbol(spec: dict) -> KineticSymbol:
    kind = spec["kind"]
    if kind == "Tabulated":
        return load_tabulated_symbol(spec["resolved_path"])
    args = {k: v for k, v in spec.items() if k != "kind"}
    return KineticSymbol(SymbolKind(kind), **args)


def build_potential(spec: dict | None) -> Potential | None:
    if spec is None:
        return None
    family = spec["family"]
    if family == "TabulatedRadial":
        return load_tabulated_potential(spec["resolved_path"], d=spec["d"])
    args = {k: v for k, v in spec.items() if k != "family"}
    return Potential(family, **args)


def _alpha_of(sym: KineticSymbol, analysis: str) -> float:
    if sym.kind is not SymbolKind.FRACTIONAL:
        raise ArgumentOutOfDomain(f"{analysis} needs a Fractional symbol, got {sym.kind.value}")
    return sym.alpha


def _relativistic(sym: KineticSymbol, analysis: str) -> tuple[float, float]:
    if sym.kind is not SymbolKind.RELATIVISTIC:
        raise ArgumentOutOfDomain(f"{analysis} needs a Relativistic symbol, got {sym.kind.value}")
    return sym.alpha, sym.m


# analyses: each returns (result dict, status or None, csv text or None)
def _kv_csv(flat: dict) -> str:
    buf = io.StringIO()
    buf.write("# columns: key, value\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key in sorted(flat):
        writer.writerow([key, repr(flat[key]) if isinstance(flat[key], float) else flat[key]])
    return buf.getvalue()


def _flatten(obj, prefix: str = "") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list) and all(not isinstance(v, (dict, list)) for v in obj) and len(obj) <= 3:
        for i, v in enumerate(obj):
            out[f"{prefix}{i}"] = v
    elif not isinstance(obj, list):
        out[prefix[:-1]] = obj
    return out


def _radii(cfg: dict, V: Potential):
    return default_radii(V, n=cfg["numerics"]["radii_n"])[0]


def _run_pointwise(cfg, sym, V):
    a = cfg["analysis"]
    if a == "CheckVirial":
        verdict = check_virial(sym, V, radii=_radii(cfg, V))
    elif a == "CheckMourre":
        verdict = check_mourre_basic(sym, V, radii=_radii(cfg, V))
    else:
        kind = cfg["params"]["lower_bound"]
        if kind == "Hardy":
            F = LowerBound.hardy(V.d, _alpha_of(sym, a))
        elif kind == "RelativisticFx":
            alpha, m = _relativistic(sym, a)
            F = LowerBound.relativistic_fx(alpha, m, V.d)
        else:
            raise ConfigParse(f"[params] lower_bound = {kind!r}; expected Hardy or RelativisticFx")
        radii = _radii(cfg, V)
        verdict = check_mourre_composite(sym, V, F, radii=radii[radii > 0], eps_grid=cfg["numerics"]["eps_grid"])
    result = verdict.to_dict()
    return result, verdict.status, _kv_csv(_flatten(result))


def _run_threshold(cfg, sym, V):
    a, params = cfg["analysis"], cfg["params"]
    if a == "BsCompact":
        norm = params.get("sup_norm")
        if norm is None and V is not None:
            norm = sup_norm(V)
        rep = bs_threshold_compact(params["d"], _alpha_of(sym, a), params["R"], norm)
    elif a == "BsGlobal":
        s_norm, l_norm = params.get("sup_norm"), params.get("l1_norm")
        if V is not None:
            s_norm = sup_norm(V) if s_norm is None else s_norm
            l_norm = l1_norm(V) if l_norm is None else l_norm
        if s_norm is None or l_norm is None:
            raise ConfigParse("BsGlobal needs a [potential] or both sup_norm and l1_norm in [params]")
        rep = bs_check_global(params["d"], _alpha_of(sym, a), s_norm, l_norm)
    elif a == "DichoThreshold":
        rep = dicho_threshold(_alpha_of(sym, a), coupling=params.get("coupling"))
    else:
        alpha, m = _relativistic(sym, a)
        rep = thm5_verdict(V, ResolventParams(alpha, m, params["s"], 0j))
    result = rep.to_dict()
    return result, rep.verdict, _kv_csv(_flatten(result))


def _run_hs(cfg, sym, V):
    params = cfg["params"]
    alpha, m = _relativistic(sym, "HsNorm")
    z = complex(params.get("z_re", 0.0), params.get("z_im", 0.0))
    p = ResolventParams(alpha, m, params["s"], z)
    result = {"hs_norm": hs_norm(p), "alpha": alpha, "m": m, "s": params["s"], "z": [z.real, z.imag]}
    return result, None, _kv_csv(_flatten(result))


def _grid_of(cfg) -> TorusGrid:
    g = cfg["grid"]
    return TorusGrid(g["d"], g["N"], g["L"])


def _run_zero_mode(cfg, sym, V):
    grid = _grid_of(cfg)
    params = cfg["params"]
    res = zero_mode_residual(params["kappa"], _alpha_of(sym, "ZeroMode"), grid.d, params["l"], grid,
                             bins=cfg["numerics"]["bins"])
    buf = io.StringIO()
    buf.write("# columns: r, rms_residual\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["r", "rms_residual"])
    for r, v in res.profile:
        writer.writerow([repr(float(r)), repr(float(v))])
    return res.to_dict(), None, buf.getvalue()


def _run_eigen(cfg, sym, V):
    num = cfg["numerics"]
    rep = lowest_eigenvalues(cfg["params"]["k"], sym, V, _grid_of(cfg), tol=num["tol"],
                             max_matvecs=num["max_matvecs"], solver=num["solver"], seed=num["seed"])
    buf = io.StringIO()
    buf.write("# columns: index, eigenvalue, residual_norm\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "eigenvalue", "residual_norm"])
    for i, (e, r) in enumerate(zip(rep.eigenvalues, rep.residual_norms)):
        writer.writerow([i, repr(e), repr(r)])
    return rep.to_dict(), None, buf.getvalue()


def _run_sweep(cfg, sym, V):
    params, num = cfg["params"], cfg["numerics"]
    if sym.kind is SymbolKind.CLASSICAL:
        alpha = 2.0
    elif sym.alpha is not None:
        alpha = sym.alpha
    else:
        raise ArgumentOutOfDomain("Sweep needs a symbol with an alpha, or the Classical symbol")
    table = coupling_sweep(alpha, params["C_values"], sym, _grid_of(cfg), beta=params.get("beta"),
                           k=params.get("k", 1), tol=num["tol"], max_matvecs=num["max_matvecs"])
    return table.to_dict(), None, table.to_csv()


RUNNERS = {
    "CheckVirial": _run_pointwise,
    "CheckMourre": _run_pointwise,
    "CheckMourreComposite": _run_pointwise,
    "BsCompact": _run_threshold,
    "BsGlobal": _run_threshold,
    "DichoThreshold": _run_threshold,
    "Thm5": _run_threshold,
    "HsNorm": _run_hs,
    "ZeroMode": _run_zero_mode,
    "Eigen": _run_eigen,
    "Sweep": _run_sweep,
}


# reports
def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def _exit_code(status) -> int:
    if status is None or status is Status.HOLDS:
        return EXIT_OK
    return EXIT_FAILS


def _log_intermediates(result: dict):
    for key, value in sorted(_flatten(result).items()):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            log.info("%s = %r", key, value)


def run(analysis: str, config_path: str | Path) -> tuple[int, dict, str | None]:
    """Execute one analysis; returns ``(exit code, report, csv text)``.  Never raises."""
    report = {"schema_version": SCHEMA_VERSION, "version": __version__, "analysis": analysis, "config": None}
    try:
        cfg = load_config(config_path, analysis)
        report["config"] = cfg
        sym = build_symbol(cfg["symbol"])
        V = build_potential(cfg.get("potential"))
        result, status, csv_text = RUNNERS[analysis](cfg, sym, V)
    except NLSError as exc:
        report["error"] = {"type": exc.code, "message": str(exc)}
        report["exit_code"] = EXIT_ERROR
        log.error("%s: %s", exc.code, exc)
        return EXIT_ERROR, report, None
    except (ValueError, TypeError, OSError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        report["exit_code"] = EXIT_ERROR
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_ERROR, report, None
    _log_intermediates(result)
    code = _exit_code(status)
    report["result"] = _jsonable(result)
    report["status"] = "Success" if status is None else Status(status).value
    report["exit_code"] = code
    log.info("status = %s (exit %d)", report["status"], code)
    return code, report, csv_text


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nls", description="Criteria, thresholds and grid validation for H = Psi(-Lap/2) + V.")
    ap.add_argument("analysis", choices=ANALYSES)
    ap.add_argument("--config", required=True, help="INI config file")
    ap.add_argument("--out", default=None, help="directory for report files (default: print JSON only)")
    ap.add_argument("--format", choices=("json", "csv", "both"), default="json")
    ap.add_argument("--quiet", action="store_true", help="log errors only")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(levelname)s %(message)s",
                        stream=sys.stderr)

    code, report, csv_text = run(args.analysis, args.config)
    text = _dumps(report)
    sys.stdout.write(text)
    if args.out is not None:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            if args.format in ("json", "both") or csv_text is None:
                (out / f"{args.analysis}.json").write_text(text, encoding="utf-8")
            if args.format in ("csv", "both") and csv_text is not None:
                (out / f"{args.analysis}.csv").write_text(csv_text, encoding="utf-8")
        except OSError as exc:
            log.error("cannot write reports to %s: %s", out, exc)
            return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
