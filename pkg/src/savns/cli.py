"""Run configuration, CSV/field-dump writers and the ``savns`` command line.

Config files are JSON objects.  Required keys: ``experiment``, ``k``, ``N``,
``dt`` and ``T_final`` (plus ``rho`` for ``shear-layer``); everything else
has a default.  Exit codes: 0 success, 1 failed property checks, 2 config
error, 3 solver error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .benchmarks import (
    ConvergenceResult,
    DiagnosticsRecord,
    ShearLayerConfig,
    _record,
    run_convergence,
    run_manufactured,
    run_shear_layer,
)
from .fourier import PhysicalField, make_grid, max_divergence
from .integrator import SolverError, energy, init_state, step
from .random_fields import random_solenoidal

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "write_error_table",
    "write_diagnostics",
    "write_field",
    "read_field",
    "main",
]

log = logging.getLogger(__name__)

EXPERIMENTS = ("convergence", "shear-layer", "single-run")
REQUIRED = ("experiment", "k", "N", "dt", "T_final")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    k: int
    N: int
    dt: float | tuple[float, ...]
    T_final: float
    dim_mode: int = 2
    lengths: tuple[float, ...] = ()
    nu: float = 0.0
    eta_exponent_mode: str = "theorem"
    bootstrap: str = ""
    output_dir: str = "out"
    snapshot_times: tuple[float, ...] = ()
    rho: float = 0.0
    delta: float = 0.05
    seed: int = 0

    @property
    def dt_list(self) -> tuple[float, ...]:
        return self.dt if isinstance(self.dt, tuple) else (self.dt,)


_DEFAULT_NU = {"convergence": 1.0, "shear-layer": 1e-4, "single-run": 1.0}


def _defaults(exp: str, dim_mode: int) -> dict:
    if exp == "shear-layer":
        return {"lengths": (1.0, 1.0), "bootstrap": "cascade"}
    if dim_mode == 3:
        return {"lengths": (2 * np.pi,) * 3, "bootstrap": "cascade"}
    return {"lengths": (2.0, 2.0), "bootstrap": "exact"}


def _positive(name: str, value, problems: list[str]) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        problems.append(f"{name} must be a number, got {value!r}")
        return float("nan")
    if not (np.isfinite(x) and x > 0):
        problems.append(f"{name} must be positive and finite, got {value!r}")
    return x


def _build(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = [key for key in REQUIRED if key not in data]
    if data.get("experiment") == "shear-layer" and "rho" not in data:
        missing.append("rho")
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")

    problems: list[str] = []
    exp = data["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")
    dim_mode = data.get("dim_mode", 2)
    if dim_mode not in (2, 3):
        problems.append(f"dim_mode must be 2 or 3, got {dim_mode!r}")
    elif dim_mode == 3 and exp != "single-run":
        problems.append("dim_mode 3 is only supported for single-run")
    k = data["k"]
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= 5:
        problems.append(f"k must be an integer in 1..5, got {k!r}")
    n = data["N"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 4 or n % 2:
        problems.append(f"N must be an even integer >= 4, got {n!r}")

    raw_dt = data["dt"]
    if isinstance(raw_dt, list):
        if exp != "convergence":
            problems.append("a list of dt values is only allowed for convergence")
        dt: float | tuple[float, ...] = tuple(
            _positive(f"dt[{i}]", v, problems) for i, v in enumerate(raw_dt)
        )
        if exp == "convergence" and len(raw_dt) < 3:
            problems.append("convergence needs at least 3 dt values")
        if any(b >= a for a, b in zip(dt, dt[1:])):
            problems.append("dt values must be strictly decreasing")
    else:
        if exp == "convergence":
            problems.append("convergence needs a list of dt values")
        dt = _positive("dt", raw_dt, problems)
    t_final = _positive("T_final", data["T_final"], problems)
    dts = dt if isinstance(dt, tuple) else (dt,)
    if dts and np.isfinite(t_final) and all(np.isfinite(dts)) and t_final < max(dts):
        problems.append(f"T_final ({t_final}) must be at least dt ({max(dts)})")

    defaults = _defaults(exp, dim_mode if dim_mode in (2, 3) else 2)
    lengths = tuple(
        _positive("lengths", v, problems) for v in data.get("lengths", defaults["lengths"])
    )
    nu = _positive("nu", data.get("nu", _DEFAULT_NU[exp]), problems)
    eta_mode = data.get("eta_exponent_mode", "theorem")
    if eta_mode not in ("theorem", "literal"):
        problems.append(f"eta_exponent_mode must be 'theorem' or 'literal', got {eta_mode!r}")
    bootstrap = data.get("bootstrap", defaults["bootstrap"])
    if bootstrap not in ("exact", "cascade"):
        problems.append(f"bootstrap must be 'exact' or 'cascade', got {bootstrap!r}")
    elif bootstrap == "exact" and (exp == "shear-layer" or dim_mode == 3):
        problems.append("exact bootstrap needs the manufactured solution")
    rho = _positive("rho", data["rho"], problems) if exp == "shear-layer" else float(
        data.get("rho", 0.0)
    )
    delta = data.get("delta", 0.05)
    if not isinstance(delta, (int, float)) or isinstance(delta, bool) or delta < 0:
        problems.append(f"delta must be a non-negative number, got {delta!r}")
    snaps = data.get("snapshot_times", [])
    if not isinstance(snaps, list):
        problems.append("snapshot_times must be a list")
        snaps = []
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        problems.append(f"seed must be an integer, got {seed!r}")
    output_dir = data.get("output_dir", "out")
    if not isinstance(output_dir, str):
        problems.append("output_dir must be a string")
    if problems:
        raise ConfigError("; ".join(problems))
    return RunConfig(
        experiment=exp,
        k=k,
        N=n,
        dt=dt,
        T_final=t_final,
        dim_mode=dim_mode,
        lengths=lengths,
        nu=nu,
        eta_exponent_mode=eta_mode,
        bootstrap=bootstrap,
        output_dir=output_dir,
        snapshot_times=tuple(float(s) for s in snaps),
        rho=rho,
        delta=float(delta),
        seed=seed,
    )


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config JSON: {exc}") from exc
    return _build(data)


def serialize_config(config: RunConfig) -> str:
    data = asdict(config)
    for key, value in data.items():
        if isinstance(value, tuple):
            data[key] = list(value)
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _open_for_write(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_error_table(result: ConvergenceResult, path) -> None:
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dt", "velocity_h1_error", "pressure_h1_error"])
        for row in result.rows:
            w.writerow([_fmt(v) for v in row])


DIAGNOSTIC_COLUMNS = ("t", "energy", "enstrophy", "r", "xi", "eta", "div_max")


def write_diagnostics(records: Sequence[DiagnosticsRecord], path) -> None:
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSTIC_COLUMNS)
        for rec in records:
            w.writerow([_fmt(getattr(rec, c)) for c in DIAGNOSTIC_COLUMNS])


def write_field(field: PhysicalField, path) -> None:
    """Dump a 2-D scalar field: header, sizes, then one line per x index."""
    if field.grid.dim != 2 or field.ncomp != 1 or field.padded:
        raise ValueError("field dumps support 2-D scalar fields on the collocation grid only")
    values = field.values[0]
    nx, ny = values.shape
    lx, ly = field.grid.lengths
    with _open_for_write(path) as fh:
        fh.write("nx,ny,Lx,Ly\n")
        fh.write(f"{nx},{ny},{_fmt(lx)},{_fmt(ly)}\n")
        for row in values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_field(path) -> PhysicalField:
    with Path(path).open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "nx,ny,Lx,Ly":
            raise ValueError(f"{path}: not a field dump (header {header!r})")
        nx, ny, lx, ly = fh.readline().strip().split(",")
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    nx, ny = int(nx), int(ny)
    if values.shape != (nx, ny):
        raise ValueError(f"{path}: expected {nx}x{ny} values, found {values.shape}")
    grid = make_grid(2, [nx, ny], [float(lx), float(ly)])
    return PhysicalField(grid, values[None])


def _run_convergence(cfg: RunConfig, out: Path) -> str:
    result = run_convergence(
        cfg.k, cfg.dt_list, N=cfg.N, T=cfg.T_final, nu=cfg.nu, eta_mode=cfg.eta_exponent_mode
    )
    write_error_table(result, out / f"convergence_k{cfg.k}.csv")
    return (
        f"k={cfg.k} rate_u={result.fitted_rate_velocity:.3f} "
        f"rate_p={result.fitted_rate_pressure:.3f}"
    )


def _run_shear(cfg: RunConfig, out: Path) -> str:
    sl = ShearLayerConfig(
        rho=cfg.rho,
        nu=cfg.nu,
        N=cfg.N,
        dt=cfg.dt_list[0],
        T_final=cfg.T_final,
        k=cfg.k,
        delta=cfg.delta,
        eta_mode=cfg.eta_exponent_mode,
    )
    result = run_shear_layer(sl, cfg.snapshot_times)
    write_diagnostics(result.records, out / "diagnostics.csv")
    for t, vort in result.snapshots:
        write_field(vort, out / f"vorticity_t{t:.6f}.csv")
    last = result.records[-1]
    return f"t={last.t:.6g} r={last.r:.17g} energy={last.energy:.17g}"


def _run_single(cfg: RunConfig, out: Path) -> str:
    dt = cfg.dt_list[0]
    if cfg.dim_mode == 2:
        run = run_manufactured(
            cfg.k,
            dt,
            N=cfg.N,
            T=cfg.T_final,
            nu=cfg.nu,
            eta_mode=cfg.eta_exponent_mode,
            bootstrap=cfg.bootstrap,
        )
        write_diagnostics(run.records, out / "diagnostics.csv")
        return (
            f"r={run.state.r:.17g} energy={energy(run.state.u, 2):.17g} "
            f"err_u={run.velocity_error:.3e} err_p={run.pressure_error:.3e}"
        )
    grid = make_grid(3, cfg.N, cfg.lengths)
    u0 = random_solenoidal(grid, np.random.default_rng(cfg.seed), kmax=2)
    state = init_state(u0, cfg.k, 3, eta_mode=cfg.eta_exponent_mode)
    records = [_record(state, max_divergence(state.u))]
    for _ in range(int(np.ceil(cfg.T_final / dt - 1e-9))):
        state, report = step(state, dt, cfg.nu)
        records.append(_record(state, report.divergence_max))
    write_diagnostics(records, out / "diagnostics.csv")
    return f"r={state.r:.17g} energy={energy(state.u, 3):.17g}"


def _run_properties() -> int:
    from .properties import run_all

    results = run_all()
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed} passed, {failed} failed")
    return 0 if failed == 0 else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="savns", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=EXPERIMENTS + ("properties",))
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    if args.command == "properties":
        return _run_properties()
    if not args.config:
        print(f"savns {args.command}: --config is required", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return 2
    if cfg.experiment != args.command:
        print(
            f"config experiment {cfg.experiment!r} does not match command {args.command!r}",
            file=sys.stderr,
        )
        return 2
    out = Path(args.out or cfg.output_dir)
    runner = {
        "convergence": _run_convergence,
        "shear-layer": _run_shear,
        "single-run": _run_single,
    }[cfg.experiment]
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(serialize_config(cfg), encoding="utf-8")
        summary = runner(cfg, out)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
