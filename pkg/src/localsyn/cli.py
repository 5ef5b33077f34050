"""Command-line interface: ``localsyn {sweep,oracle,verify,dump-maps}``.

Configuration comes from an optional INI-style file (sections ``[plant]``,
``[sweep]``, ``[oracle]``, ``[run]``) and is overridden by flags of the same
name. Exit codes: 0 success, 1 verification failure, 2 configuration or I/O
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .affine import AffineMapPair
from .errors import ConfigError, NumericalError
from .io_maps import assemble_io
from .model_match import SolverConfig, sweep
from .oracle import OracleConfig, integrand_table
from .plant import FIG3_PARAMS, PlantParams
from .sl_maps import assemble_sl, build_sl_blocks
from .verify import run_audit

__all__ = ["RunConfig", "load_config", "main", "dump_maps", "validate_dump", "SWEEP_HEADER", "MAPS_SCHEMA"]

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SWEEP_HEADER = ["E", "J_sl", "J_io", "J_inf", "gap_sl", "gap_io", "T_used", "residual_grad", "status"]
MAPS_SCHEMA = "localsyn.maps/1"

# config key -> (section, type)
_KEYS = {
    "alpha": ("plant", float),
    "beta": ("plant", float),
    "kappa": ("plant", float),
    "e_min": ("sweep", int),
    "e_max": ("sweep", int),
    "horizon": ("sweep", int),
    "theta_grid": ("sweep", int),
    "param": ("sweep", str),
    "theta_points": ("oracle", int),
    "oracle_t": ("oracle", int),
    "out": ("run", str),
    "seed": ("run", int),
    "threads": ("run", int),
}

_DEFAULTS = {
    "alpha": FIG3_PARAMS.alpha,
    "beta": FIG3_PARAMS.beta,
    "kappa": FIG3_PARAMS.kappa,
    "e_min": 1,
    "e_max": 10,
    "horizon": 60,
    "theta_grid": 512,
    "param": "both",
    "theta_points": 512,
    "oracle_t": None,
    "out": ".",
    "seed": 0,
    "threads": None,
}


@dataclass(frozen=True)
class RunConfig:
    plant: PlantParams
    E_range: tuple[int, ...]
    solver: SolverConfig
    oracle: OracleConfig
    output_dir: Path
    seed: int = 0
    param: str = "both"
    threads: int | None = None
    extras: dict = field(default_factory=dict)


def _read_file(path: str | None) -> dict:
    if not path:
        return {}
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            k = key.replace("-", "_").lower()
            if k not in _KEYS:
                raise ConfigError(f"unknown config key [{section}] {key}")
            if _KEYS[k][0] != section:
                raise ConfigError(f"key {key} belongs in [{_KEYS[k][0]}], found in [{section}]")
            out[k] = raw
    return out


def load_config(args: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    values.update(_read_file(getattr(args, "config", None)))
    for k in _KEYS:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    try:
        for k, (_, typ) in _KEYS.items():
            if values[k] is not None:
                values[k] = typ(values[k])
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    try:
        plant = PlantParams(values["alpha"], values["beta"], values["kappa"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    e_min, e_max = values["e_min"], values["e_max"]
    E_range = tuple(range(max(e_min, 0), e_max + 1))
    if e_min < 0 or not E_range:
        raise ConfigError(f"E range [{e_min}, {e_max}] is empty or negative")
    if values["param"] not in ("sl", "io", "both"):
        raise ConfigError(f"param must be sl, io or both, got {values['param']!r}")
    solver = SolverConfig(horizon_T=values["horizon"], theta_grid=values["theta_grid"])
    oracle_T = values["oracle_t"] if values["oracle_t"] is not None else 4 * solver.horizon_T
    oracle = OracleConfig(theta_points=values["theta_points"], oracle_T=oracle_T)
    return RunConfig(plant, E_range, solver, oracle, Path(values["out"]), values["seed"], values["param"],
                     values["threads"])


def _fmt(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".15g")


def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([v if isinstance(v, str) else _fmt(v) for v in r])
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


_GNUPLOT = """\
# plot of the finite-extent costs; run with: gnuplot sweep.gp
set datafile separator ','
set key autotitle columnhead
set xlabel 'E'
set ylabel 'J'
set grid
set terminal pngcairo size 800,500
set output 'sweep.png'
plot 'sweep.csv' using 1:2 with linespoints, \\
     '' using 1:3 with points, \\
     '' using 1:4 with lines dashtype 2
"""


def cmd_sweep(cfg: RunConfig, args) -> int:
    out = _ensure_dir(cfg.output_dir)
    oracle_cfg = None if args.no_oracle else cfg.oracle
    rows = sweep(cfg.plant, cfg.E_range, cfg.solver, cfg.param, oracle_cfg=oracle_cfg, threads=cfg.threads)
    table = [[r.E, r.J_sl, r.J_io, r.J_inf, r.gap_sl, r.gap_io, r.T_used, r.residual_grad, r.status] for r in rows]
    _write_csv(out / "sweep.csv", SWEEP_HEADER, table)
    if args.emit_gnuplot:
        (out / "sweep.gp").write_text(_GNUPLOT, encoding="utf-8")
    for r in table:
        print(",".join(v if isinstance(v, str) else _fmt(v) for v in r))
    if any(not r.status.startswith(("ok", "warn")) for r in rows):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, args) -> int:
    out = _ensure_dir(cfg.output_dir)
    th, vals = integrand_table(cfg.plant, cfg.oracle, cfg.threads)
    _write_csv(out / "oracle.csv", ["theta", "cost_sq"], list(zip(th, vals)))
    J = math.sqrt(float(vals.mean()))
    print(f"J_inf = {_fmt(J)}  (theta_points={cfg.oracle.theta_points}, oracle_T={cfg.oracle.oracle_T})")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    E_list = range(args.verify_e_max + 1)
    try:
        rep = run_audit(cfg.plant, E_list, seed=cfg.seed, random_params=args.random_params, fault=args.inject_fault)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(rep.format())
    return EXIT_OK if rep.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# map dump
# ---------------------------------------------------------------------------

def _terms(coeffs, lag: int) -> list[list]:
    """Nonzero ``[z_power, coeff]`` pairs, highest power first."""
    return [[-(lag + i), float(c)] for i, c in enumerate(coeffs) if c != 0]


def _pair_json(pair: AffineMapPair) -> dict:
    blocks = []
    for b in pair.blocks:
        V = []
        for i in range(b.V.shape[0]):
            for j in range(b.V.shape[1]):
                t = _terms(b.V[i, j], b.lag)
                if t:
                    V.append({"out_site": i - b.out_extent, "in_site": j - b.in_extent, "terms": t})
        h = []
        for k in range(-b.h.extent, b.h.extent + 1):
            t = _terms(b.h.coeffs[k + b.h.extent], b.h.lag) if b.h.coeffs.shape[1] else []
            if t:
                h.append({"site": k, "terms": t})
        blocks.append({"name": b.name, "out_extent": b.out_extent, "in_extent": b.in_extent, "V": V, "h": h})
    return {"input_extent": pair.input_extent, "blocks": blocks}


def dump_maps(p: PlantParams, E: int) -> dict:
    """Structured dump of the raw SL blocks and both assembled stacks."""
    return {
        "schema": MAPS_SCHEMA,
        "E": E,
        "plant": {"alpha": p.alpha, "beta": p.beta, "kappa": p.kappa},
        "maps": {
            "sl_raw": _pair_json(build_sl_blocks(p, E)),
            "sl": _pair_json(assemble_sl(p, E)),
            "io": _pair_json(assemble_io(p, E)),
        },
    }


def validate_dump(doc: dict) -> list[str]:
    """Problems found when checking ``doc`` against the dump schema (empty if valid)."""
    errs = []

    def need(obj, key, typ, where):
        if not isinstance(obj, dict) or key not in obj:
            errs.append(f"{where}: missing {key}")
            return None
        if not isinstance(obj[key], typ) or isinstance(obj[key], bool):
            errs.append(f"{where}.{key}: expected {typ}")
            return None
        return obj[key]

    def terms_ok(t, where):
        if not isinstance(t, list) or not all(
                isinstance(x, list) and len(x) == 2 and isinstance(x[0], int) and isinstance(x[1], float) for x in t):
            errs.append(f"{where}: terms must be [int power, float coeff] pairs")

    if need(doc, "schema", str, "$") not in (None, MAPS_SCHEMA):
        errs.append(f"$.schema: expected {MAPS_SCHEMA}")
    need(doc, "E", int, "$")
    plant = need(doc, "plant", dict, "$")
    if plant is not None:
        for k in ("alpha", "beta", "kappa"):
            need(plant, k, (int, float), "$.plant")
    maps = need(doc, "maps", dict, "$") or {}
    for mname, pair in maps.items():
        w = f"$.maps.{mname}"
        need(pair, "input_extent", int, w)
        for bi, blk in enumerate(need(pair, "blocks", list, w) or []):
            bw = f"{w}.blocks[{bi}]"
            need(blk, "name", str, bw)
            oe = need(blk, "out_extent", int, bw)
            ie = need(blk, "in_extent", int, bw)
            for e in need(blk, "V", list, bw) or []:
                os_, is_ = need(e, "out_site", int, bw + ".V"), need(e, "in_site", int, bw + ".V")
                if oe is not None and os_ is not None and abs(os_) > oe:
                    errs.append(f"{bw}.V: out_site {os_} outside extent {oe}")
                if ie is not None and is_ is not None and abs(is_) > ie:
                    errs.append(f"{bw}.V: in_site {is_} outside extent {ie}")
                terms_ok(e.get("terms"), bw + ".V.terms")
            for e in need(blk, "h", list, bw) or []:
                s = need(e, "site", int, bw + ".h")
                if oe is not None and s is not None and abs(s) > oe:
                    errs.append(f"{bw}.h: site {s} outside extent {oe}")
                terms_ok(e.get("terms"), bw + ".h.terms")
    return errs


def cmd_dump_maps(cfg: RunConfig, args) -> int:
    if args.extent < 0:
        raise ConfigError("extent must be nonnegative")
    out = _ensure_dir(cfg.output_dir)
    doc = dump_maps(cfg.plant, args.extent)
    path = out / f"maps_E{args.extent}.json"
    try:
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="INI-style config file")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--e-min", dest="e_min", type=int)
    sp.add_argument("--e-max", dest="e_max", type=int)
    sp.add_argument("--horizon", type=int, help="FIR order T of each entry of f")
    sp.add_argument("--theta-grid", dest="theta_grid", type=int, help="grid for the frequency-domain cost check")
    sp.add_argument("--theta-points", dest="theta_points", type=int, help="oracle frequency grid")
    sp.add_argument("--oracle-t", dest="oracle_t", type=int, help="oracle FIR horizon (default 4x horizon)")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--threads", type=int, help="worker threads (default LOCALSYN_THREADS or all cores)")
    sp.add_argument("--param", choices=("sl", "io", "both"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="localsyn", description="Locality-constrained H2 synthesis for a coupled chain.")
    sub = ap.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("sweep", help="solve for J_E over a range of extents, write sweep.csv")
    _common(sp)
    sp.add_argument("--no-oracle", action="store_true", help="skip the unconstrained optimum column")
    sp.add_argument("--emit-gnuplot", action="store_true", help="also write sweep.gp")
    sp.set_defaults(func=cmd_sweep)
    sp = sub.add_parser("oracle", help="unconstrained optimum by per-frequency solves, write oracle.csv")
    _common(sp)
    sp.set_defaults(func=cmd_oracle)
    sp = sub.add_parser("verify", help="run the structural audit")
    _common(sp)
    sp.add_argument("--verify-e-max", type=int, default=3, help="audit E = 0..N (default 3)")
    sp.add_argument("--random-params", type=int, default=0, help="extra random parameter triples to check")
    sp.add_argument("--inject-fault", nargs="?", const="psi", default=None, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("dump-maps", help="write the V/h blocks for one extent as JSON")
    _common(sp)
    sp.add_argument("-E", "--extent", type=int, default=0)
    sp.set_defaults(func=cmd_dump_maps)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
