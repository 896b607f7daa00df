"""Command-line front end: ``parafrac analyze | verify | oracle-check``.

Configs are JSON; complex numbers are written as [re, im] pairs.  Exit codes:
0 ok, 1 usage or config error, 2 degraded result, 3 oracle mismatch.
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
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import default_initial_point
from .errors import ConfigError, ParafracError
from .geometry import DEFAULT_BUDGET, DEFAULT_THETA, NeighborhoodMeasurement, OrbitMeasurer
from .oracle import mc_union_measure
from .powerseries import Germ, TruncatedSeries
from .recovery import (
    DEFAULT_CORRECTIONS,
    EpsGrid,
    analyze,
    default_grid,
    generate_orbit,
    measure_grid,
    verify_invariance,
)

EXIT_OK, EXIT_ERROR, EXIT_DEGRADED, EXIT_ORACLE = 0, 1, 2, 3
CSV_COLUMNS = ["eps", "n_eps", "area", "centroid_re", "centroid_im", "directed_re", "directed_im",
               "closure_error_bound", "points_used"]
ORACLE_EPS = (1e-4, 1e-2)
MIN_SAMPLES = 10_000


@dataclass
class OracleConfig:
    enabled: bool = False
    samples: int = 10_000_000
    seed: int = 20240601
    eps: list = field(default_factory=lambda: list(np.geomspace(*ORACLE_EPS, 5)))


@dataclass
class RunConfig:
    raw: dict
    germ: Germ
    z0: complex | None
    grid: EpsGrid | None
    budget: float = DEFAULT_BUDGET
    corrections: int = DEFAULT_CORRECTIONS
    basis: str = "auto"
    oracle: OracleConfig = field(default_factory=OracleConfig)
    measurements_name: str = "measurements.csv"
    report_name: str = "report.json"
    oracle_name: str = "oracle.json"
    invariance_name: str = "invariance.json"
    conjugators: list = field(default_factory=list)
    scale: complex | None = 2.0
    z0_map: str = "pullback"
    tolerance: float = 0.02

    def eps_grid(self) -> EpsGrid:
        return self.grid if self.grid is not None else default_grid(self.germ.k)


def _complex(value, what: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"{what}: expected a number or [re, im], got {value!r}")


def _coeff_list(value, what: str) -> list[complex]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{what}: expected a non-empty list of coefficients")
    return [_complex(v, f"{what}[{i}]") for i, v in enumerate(value)]


def _number(section: dict, key: str, default, kind=float):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int:
        if value != int(value):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def parse_config(raw: dict) -> RunConfig:
    """Validate a decoded JSON config."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    g = raw.get("germ")
    if not isinstance(g, dict) or "coefficients" not in g:
        raise ConfigError("germ.coefficients is required (coefficients of z^1, z^2, ...)")
    coeffs = _coeff_list(g["coefficients"], "germ.coefficients")
    try:
        germ = Germ.from_coeffs(coeffs)
        germ = Germ.from_coeffs(coeffs, max(len(coeffs), 2 * germ.k + 6))
    except ParafracError as exc:
        raise ConfigError(f"germ: {exc}") from exc
    if "k" in g and g["k"] is not None:
        k = _number(g, "k", None, int)
        if k != germ.k:
            raise ConfigError(f"germ.k={k} but the coefficients have k={germ.k}")

    z0 = None if raw.get("z0") is None else _complex(raw["z0"], "z0")

    grid = None
    if raw.get("eps_grid") is not None:
        eg = raw["eps_grid"]
        if not isinstance(eg, dict):
            raise ConfigError("eps_grid must be an object")
        lo, hi = _number(eg, "min", None), _number(eg, "max", None)
        count = _number(eg, "count", 64, int)
        spacing = eg.get("spacing", "log")
        if not 0 < lo < hi < 1:
            raise ConfigError("eps_grid needs 0 < min < max < 1")
        if count < 8:
            raise ConfigError("eps_grid.count must be at least 8")
        if spacing not in ("log", "linear"):
            raise ConfigError(f"eps_grid.spacing must be 'log' or 'linear', got {spacing!r}")
        grid = EpsGrid(lo, hi, count, spacing)

    budget = _number(raw, "budget", DEFAULT_BUDGET)
    if budget <= 0:
        raise ConfigError("budget must be positive")
    corrections = _number(raw, "corrections", DEFAULT_CORRECTIONS, int)
    if corrections < 0:
        raise ConfigError("corrections must be non-negative")
    basis = raw.get("basis", "auto")
    if basis not in ("auto", "full", "reduced"):
        raise ConfigError(f"basis must be 'auto', 'full' or 'reduced', got {basis!r}")

    oracle = OracleConfig()
    if raw.get("oracle") is not None:
        oc = raw["oracle"]
        if not isinstance(oc, dict):
            raise ConfigError("oracle must be an object")
        oracle.enabled = bool(oc.get("enabled", False))
        oracle.samples = _number(oc, "samples", oracle.samples, int)
        oracle.seed = _number(oc, "seed", oracle.seed, int)
        if oracle.samples < 1:
            raise ConfigError("oracle.samples must be positive")
        if oc.get("eps") is not None:
            eps = oc["eps"]
            if not isinstance(eps, list) or not eps or not all(
                    isinstance(e, (int, float)) and not isinstance(e, bool) and 0 < e < 1 for e in eps):
                raise ConfigError("oracle.eps must be a list of values in (0, 1)")
            oracle.eps = [float(e) for e in eps]

    out = raw.get("outputs", {}) or {}
    if not isinstance(out, dict):
        raise ConfigError("outputs must be an object")
    names = {}
    for key, default in (("measurements", "measurements.csv"), ("report", "report.json"),
                         ("oracle", "oracle.json"), ("invariance", "invariance.json")):
        name = out.get(key, default)
        if not isinstance(name, str) or not name or Path(name).name != name:
            raise ConfigError(f"outputs.{key} must be a plain file name")
        names[key] = name

    conjugators = []
    for i, c in enumerate(raw.get("conjugators", []) or []):
        cs = _coeff_list(c, f"conjugators[{i}]")
        if abs(cs[0] - 1) > 1e-12:
            raise ConfigError(f"conjugators[{i}] must be tangent to the identity (first coefficient 1)")
        conjugators.append(TruncatedSeries(np.array(cs, dtype=np.complex128)).truncate(germ.order))
    scale = raw.get("scale", 2.0)
    scale = None if scale is None else _complex(scale, "scale")
    if scale is not None and scale == 0:
        raise ConfigError("scale must be nonzero")
    z0_map = raw.get("z0_map", "pullback")
    if z0_map not in ("pullback", "default"):
        raise ConfigError(f"z0_map must be 'pullback' or 'default', got {z0_map!r}")
    tolerance = _number(raw, "tolerance", 0.02)

    return RunConfig(raw=raw, germ=germ, z0=z0, grid=grid, budget=budget, corrections=corrections,
                     basis=basis, oracle=oracle, measurements_name=names["measurements"],
                     report_name=names["report"], oracle_name=names["oracle"],
                     invariance_name=names["invariance"], conjugators=conjugators, scale=scale,
                     z0_map=z0_map, tolerance=tolerance)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(raw)


# serialization

def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, complex to [re, im], non-finite to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, ensure_ascii=False) + "\n"


def _g(x: float) -> str:
    return "%.17g" % x


def measurements_csv(ms: list[NeighborhoodMeasurement]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for m in ms:
        w.writerow([_g(m.eps), m.n_eps, _g(m.area), _g(m.centroid.real), _g(m.centroid.imag),
                    _g(m.directed_area.real), _g(m.directed_area.imag), _g(m.closure_error_bound),
                    m.points_used])
    return buf.getvalue()


def _write_all(out_dir: Path, files: dict[str, str]):
    """Write every file or none: each goes to a temporary name first."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
        for tmp, dest in staged:
            os.replace(tmp, dest)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.remove(tmp)


def _envelope(command: str, cfg: RunConfig, result) -> dict:
    return {"tool": "parafrac", "version": __version__, "command": command, "config": cfg.raw,
            "result": result}


# commands

def planned_orbit_length(germ: Germ, eps_min: float, theta: float = DEFAULT_THETA) -> int:
    """Rough count of stored points: the step |a1| |z|^(k+1) falls to theta * eps_min."""
    k, a = germ.k, abs(germ.a1)
    return int(math.ceil((a / (theta * eps_min)) ** (k / (k + 1)) / (k * a)))


def _oracle_rows(germ: Germ, z0: complex, eps_values, samples: int, seed: int, budget: float,
                 threads: int, corrupt: float = 0.0) -> list[dict]:
    eps_values = sorted(float(e) for e in eps_values)
    # deep enough for every eps, closed by the chord to 0 like the exact route
    orbit = generate_orbit(germ, z0, eps_values[0] * 1e-2)
    measurer = OrbitMeasurer.for_grid(orbit, eps_values[0], budget)
    # the sampler needs at least MIN_SAMPLES; smaller requests are raised to it
    samples = max(samples, MIN_SAMPLES)
    rows = []
    for i, e in enumerate(eps_values):
        m = measurer.measure(e, budget, check=False)
        area = m.area * (1.0 + corrupt)
        est = mc_union_measure(orbit.points, e, samples, seed + i, closure_segment=complex(orbit.points[-1]),
                               workers=threads)
        dev_area = abs(area - est.area) / est.area_stderr if est.area_stderr > 0 else math.inf
        dev_c = max(abs(m.centroid.real - est.centroid.real), abs(m.centroid.imag - est.centroid.imag))
        dev_c = dev_c / est.centroid_stderr if est.centroid_stderr > 0 else math.inf
        rows.append({
            "eps": e,
            "exact_area": area,
            "exact_centroid": m.centroid,
            "mc_area": est.area,
            "mc_area_stderr": est.area_stderr,
            "mc_centroid": est.centroid,
            "mc_centroid_stderr": est.centroid_stderr,
            "area_sigmas": dev_area,
            "centroid_sigmas": dev_c,
            "samples": samples,
            "seed": seed + i,
            "passed": bool(est.area_agrees(area) and est.centroid_agrees(m.centroid)),
        })
    return rows


def cmd_analyze(cfg: RunConfig, out_dir: Path, threads: int, dry_run: bool = False) -> int:
    grid = cfg.eps_grid()
    eps = grid.values()
    if dry_run:
        plan = {"k": cfg.germ.k, "eps_min": float(eps.min()), "eps_max": float(eps.max()), "count": len(eps),
                "planned_orbit_length": planned_orbit_length(cfg.germ, float(eps.min()))}
        sys.stdout.write(dumps(plan))
        return EXIT_OK
    z0 = cfg.z0 if cfg.z0 is not None else default_initial_point(cfg.germ)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = analyze(cfg.germ, z0, grid, cfg.budget, threads=threads, corrections=cfg.corrections,
                      basis=cfg.basis)
    result = rep.to_dict()
    result["eps_grid"] = grid.to_dict()
    result["runtime_warnings"] = [str(w.message) for w in caught]
    code = EXIT_DEGRADED if rep.degraded else EXIT_OK
    if cfg.oracle.enabled:
        rows = _oracle_rows(cfg.germ, z0, cfg.oracle.eps, cfg.oracle.samples, cfg.oracle.seed, cfg.budget, threads)
        result["oracle"] = rows
        if not all(r["passed"] for r in rows):
            code = EXIT_ORACLE
    _write_all(out_dir, {cfg.measurements_name: measurements_csv(rep.measurements),
                         cfg.report_name: dumps(_envelope("analyze", cfg, result))})
    return code


def cmd_verify(cfg: RunConfig, out_dir: Path, threads: int, dry_run: bool = False) -> int:
    conj = cfg.conjugators or [TruncatedSeries.identity(cfg.germ.order)]
    if dry_run:
        eps = cfg.eps_grid().values()
        plan = {"k": cfg.germ.k, "conjugators": len(conj), "scaling": cfg.scale is not None,
                "planned_orbit_length": planned_orbit_length(cfg.germ, float(eps.min()))}
        sys.stdout.write(dumps(plan))
        return EXIT_OK
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = verify_invariance(cfg.germ, conj, cfg.z0, cfg.z0_map, cfg.scale, cfg.grid, cfg.tolerance,
                                threads=threads, corrections=cfg.corrections, basis=cfg.basis)
    _write_all(out_dir, {cfg.invariance_name: dumps(_envelope("verify", cfg, rep.to_dict()))})
    return EXIT_OK if rep.passed else EXIT_DEGRADED


def cmd_oracle_check(cfg: RunConfig, out_dir: Path, threads: int, dry_run: bool = False,
                     corrupt: float = 0.0) -> int:
    if dry_run:
        plan = {"k": cfg.germ.k, "eps": cfg.oracle.eps, "samples": cfg.oracle.samples, "seed": cfg.oracle.seed,
                "planned_orbit_length": planned_orbit_length(cfg.germ, min(cfg.oracle.eps) * 1e-2)}
        sys.stdout.write(dumps(plan))
        return EXIT_OK
    z0 = cfg.z0 if cfg.z0 is not None else default_initial_point(cfg.germ)
    rows = _oracle_rows(cfg.germ, z0, cfg.oracle.eps, cfg.oracle.samples, cfg.oracle.seed, cfg.budget,
                        threads, corrupt)
    passed = all(r["passed"] for r in rows)
    result = {"z0": z0, "requested_samples": cfg.oracle.samples, "rows": rows, "passed": passed}
    _write_all(out_dir, {cfg.oracle_name: dumps(_envelope("oracle-check", cfg, result))})
    return EXIT_OK if passed else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parafrac", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"parafrac {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("analyze", "measure an orbit, fit the scale, recover (k, a1, a)"),
                           ("verify", "compare fractal data across conjugated germs"),
                           ("oracle-check", "compare exact measurements with Monte-Carlo estimates")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True, help="JSON run config")
        s.add_argument("--out-dir", default=".", help="directory for outputs (default: .)")
        s.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads")
        s.add_argument("--dry-run", action="store_true", help="validate the config and print the plan")
        s.add_argument("--seed", type=int, default=None, help="override oracle.seed")
        if name == "oracle-check":
            # negative control: scale the exact area by (1 + x) before comparing
            s.add_argument("--corrupt-exact", type=float, default=0.0, help=argparse.SUPPRESS)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.oracle.seed = args.seed
        out_dir = Path(args.out_dir)
        if args.command == "analyze":
            return cmd_analyze(cfg, out_dir, args.threads, args.dry_run)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir, args.threads, args.dry_run)
        return cmd_oracle_check(cfg, out_dir, args.threads, args.dry_run, args.corrupt_exact)
    except (ConfigError, ParafracError, ValueError, OSError) as exc:
        print(f"parafrac: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
