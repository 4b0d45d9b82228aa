"""Command-line interface.

Subcommands and their output columns:

  spectrum     n_r,kappa,E_shoot,E_analytic,rel_err
  gauge-check  path,E,max_rel_residual  (one row per path, plus a dE row)
  residual     r,theta,residual_norm,psi_norm,rel_residual
  angular      theta,zeta_1,zeta_B,zeta_t_1,zeta_t_B,off_span
  gegenbauer   z,C0,...,C<p_max>

Exit status: 0 success, 1 a quantitative check failed (or NaN / not found),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .algebra import norm
from .dhe import DheParams, PotentialField, SpinorField, dhe_residual, relative_residual
from .frames import GaugeId
from .separation import (
    BladeSet,
    CoulombPotential,
    NotFoundError,
    angular_numeric,
    bound_state,
    path_blades,
    residual_grid,
    spectrum_table,
)
from .special import gegenbauer

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
NOT_FOUND = "not found"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    zalpha: float = 0.5
    mass: float = 1.0
    gauge: str = "xis"
    max_n: int = 3
    tol: float = 1e-6
    format: str = "csv"
    out: str | None = None
    grid: int = 20
    n_radial: int = 4000
    n_r: int = 0
    kappa: int = -1
    n: float = 0.5
    field: str = "state"
    p_max: int = 5
    a: float = 1.0
    points: int = 21

    def validate(self) -> None:
        if not 0.0 < self.zalpha < 1.0:
            raise ConfigError(f"zalpha must lie in (0, 1), got {self.zalpha}")
        if not self.mass > 0:
            raise ConfigError("mass must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.gauge not in {g.value for g in GaugeId}:
            raise ConfigError(f"unknown gauge {self.gauge!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if not 1 <= self.max_n <= 10:
            raise ConfigError("max_n must be in [1, 10]")
        if self.grid < 2 or self.points < 2 or self.n_radial < 100:
            raise ConfigError("grid sizes too small")
        if self.field not in ("state", "zero"):
            raise ConfigError(f"unknown field {self.field!r}")
        if self.p_max < 0 or not self.a > 0:
            raise ConfigError("need p_max >= 0 and a > 0")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, value: str):
    kind = _TYPES[key]
    try:
        if "int" in kind:
            return int(value)
        if "float" in kind:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


# --- output -----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: row[c] for c in columns} for row in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _has_nan(rows) -> bool:
    return any(isinstance(v, float) and math.isnan(v) for row in rows for v in row.values())


def _emit(cfg: RunConfig, rows: list[dict], columns: list[str]) -> None:
    text = render(rows, columns, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig) -> int:
    rows_in = spectrum_table(
        CoulombPotential(cfg.zalpha), cfg.max_n, m=cfg.mass, N=cfg.n_radial
    )
    rows, ok = [], True
    for r in rows_in:
        if not r.found:
            ok = False
            rows.append(dict(n_r=r.n_r, kappa=r.kappa, E_shoot=NOT_FOUND,
                             E_analytic=r.E_analytic, rel_err=NOT_FOUND))
            continue
        ok &= r.rel_err < cfg.tol
        rows.append(dict(n_r=r.n_r, kappa=r.kappa, E_shoot=r.E_shoot,
                         E_analytic=r.E_analytic, rel_err=r.rel_err))
    _emit(cfg, rows, ["n_r", "kappa", "E_shoot", "E_analytic", "rel_err"])
    return EXIT_OK if ok and not _has_nan(rows) else EXIT_CHECK


def _max_residual(sol, gauge: GaugeId, cfg: RunConfig) -> float:
    pot = PotentialField(CoulombPotential(cfg.zalpha))
    params = DheParams(cfg.mass, 1.0, gauge)
    psi = sol.field(gauge)
    return max(relative_residual(params, psi, pot, p) for p in residual_grid(sol, cfg.grid, cfg.grid))


def cmd_gauge_check(cfg: RunConfig) -> int:
    results = {}
    for path, gauge in (("xio", GaugeId.XiO), ("xis", GaugeId.XiS)):
        sol = bound_state(cfg.n_r, cfg.kappa, cfg.n, cfg.zalpha, cfg.mass, cfg.n_radial,
                          blades=path_blades(path))
        results[path] = (sol.ansatz.E, _max_residual(sol, gauge, cfg))
    dE = abs(results["xio"][0] - results["xis"][0])
    rows = [dict(path=k, E=v[0], max_rel_residual=v[1]) for k, v in results.items()]
    worst = max(v[1] for v in results.values())
    rows.append(dict(path="dE", E=dE, max_rel_residual=worst))
    _emit(cfg, rows, ["path", "E", "max_rel_residual"])
    ok = dE < 1e-10 * cfg.mass and all(v[1] < cfg.tol for v in results.values())
    return EXIT_OK if ok else EXIT_CHECK


def cmd_residual(cfg: RunConfig) -> int:
    gauge = GaugeId(cfg.gauge)
    sol = bound_state(cfg.n_r, cfg.kappa, cfg.n, cfg.zalpha, cfg.mass, cfg.n_radial)
    psi = sol.field(gauge)
    if cfg.field == "zero":
        base = psi
        psi = SpinorField(lambda p: base.eval(p) * 0.0)
    pot = PotentialField(CoulombPotential(cfg.zalpha))
    params = DheParams(cfg.mass, 1.0, gauge)
    rows = []
    for p in residual_grid(sol, cfg.grid, cfg.grid):
        res = float(norm(dhe_residual(params, psi, pot, p)))
        pn = float(norm(psi.eval(p)))
        rows.append(dict(r=p.r, theta=p.theta, residual_norm=res, psi_norm=pn,
                         rel_residual=res / pn if pn > 0 else 0.0))
    _emit(cfg, rows, ["r", "theta", "residual_norm", "psi_norm", "rel_residual"])
    return EXIT_CHECK if _has_nan(rows) else EXIT_OK


def cmd_angular(cfg: RunConfig) -> int:
    pair, _ = angular_numeric(cfg.kappa, cfg.n)
    bs: BladeSet = pair.blades
    bits_B = int(np.argmax(np.abs(bs.B.coeffs)))
    rows = []
    for th in np.linspace(0.1, math.pi - 0.1, cfg.points):
        z, zt = pair.zeta(th).coeffs, pair.zeta_tilde(th).coeffs
        mask = np.ones(16, bool)
        mask[[0, bits_B]] = False
        sB = float(bs.B.coeffs[bits_B])
        rows.append(dict(
            theta=float(th), zeta_1=float(z[0]), zeta_B=float(z[bits_B] * sB),
            zeta_t_1=float(zt[0]), zeta_t_B=float(zt[bits_B] * sB),
            off_span=float(max(np.abs(z[mask]).max(), np.abs(zt[mask]).max())),
        ))
    _emit(cfg, rows, ["theta", "zeta_1", "zeta_B", "zeta_t_1", "zeta_t_B", "off_span"])
    return EXIT_CHECK if _has_nan(rows) else EXIT_OK


def cmd_gegenbauer(cfg: RunConfig) -> int:
    cols = [f"C{p}" for p in range(cfg.p_max + 1)]
    rows = []
    for z in np.linspace(-1.0, 1.0, cfg.points):
        row = {"z": float(z)}
        row.update({f"C{p}": gegenbauer(p, cfg.a, float(z)) for p in range(cfg.p_max + 1)})
        rows.append(row)
    _emit(cfg, rows, ["z"] + cols)
    return EXIT_CHECK if _has_nan(rows) else EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "gauge-check": cmd_gauge_check,
    "residual": cmd_residual,
    "angular": cmd_angular,
    "gegenbauer": cmd_gegenbauer,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--zalpha", type=float, help="coupling Z*alpha in (0, 1)")
    common.add_argument("--mass", type=float, help="particle mass (default 1)")
    common.add_argument("--gauge", choices=[g.value for g in GaugeId])
    common.add_argument("--max-n", dest="max_n", type=int, help="largest n_r + |kappa|")
    common.add_argument("--tol", type=float, help="pass/fail tolerance")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--grid", type=int, help="points per axis of the (r, theta) grid")
    common.add_argument("--n-radial", dest="n_radial", type=int, help="radial RK4 steps")
    common.add_argument("--n-r", dest="n_r", type=int, help="radial quantum number")
    common.add_argument("--kappa", type=int)
    common.add_argument("--n", type=float, help="azimuthal parameter (half-integer)")
    common.add_argument("--field", choices=["state", "zero"])
    common.add_argument("--p-max", dest="p_max", type=int)
    common.add_argument("--a", type=float, help="Gegenbauer order")
    common.add_argument("--points", type=int, help="samples for angular/gegenbauer")
    parser = argparse.ArgumentParser(
        prog="sta-dirac", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def make_config(ns: argparse.Namespace) -> RunConfig:
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    values = read_config_file(ns.config) if getattr(ns, "config", None) else {}
    values.update(given)
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = make_config(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[ns.command](cfg)
    except (NotFoundError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
