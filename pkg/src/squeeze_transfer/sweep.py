"""Scenario runner: expand sweep axes, evaluate every point, write CSV and JSON."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from itertools import product
from pathlib import Path

import numpy as np

from . import analytics
from .config import ANALYTIC_METHODS, ScenarioConfig
from .dynamics import (BlockDensityMatrix, DephasingSpec, IntegratorSettings, PulseSchedule,
                       evolve_lindblad, evolve_schrodinger)
from .errors import ArgumentError, NumericalError
from .metrology import report
from .states import (DisplacementSpec, SqueezeSpec, adiabatic_target_populations,
                     boson_amplitudes, initial_product_state, population_variance_sz)

log = logging.getLogger(__name__)

CSV_FIELDS = ("N", "r", "alpha_re", "alpha_im", "gamma_deph", "mode", "method", "qfi",
              "chi_ss_sq", "chi_sh_sq", "xi_sq", "xi_sh_sq", "gain_db", "var_sz",
              "trunc_mass", "wall_ms")


@dataclass(frozen=True)
class SweepPoint:
    n_ions: int
    r: float
    alpha_re: float
    alpha_im: float
    gamma_deph: float
    method: str


@dataclass
class SweepRow:
    N: int
    r: float
    alpha_re: float
    alpha_im: float
    gamma_deph: float
    mode: str
    method: str
    qfi: float = math.nan
    chi_ss_sq: float = math.nan
    chi_sh_sq: float = math.nan
    xi_sq: float = math.nan
    xi_sh_sq: float = math.nan
    gain_db: float = math.nan
    var_sz: float = math.nan
    trunc_mass: float = math.nan
    wall_ms: float = 0.0
    qfi_var_bound: float = math.nan
    alpha_min: float = math.nan
    delta_phi_bound: float = math.nan
    tilt: float = math.nan
    integrator: str = ""
    flags: str = ""
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def sweep_points(cfg: ScenarioConfig) -> list[SweepPoint]:
    """Points in fixed order: N, r, alpha, dephasing, method (last varies fastest)."""
    ns = cfg.sweep.n_ions or (cfg.n_ions,)
    rs = cfg.sweep.r or (cfg.r,)
    alphas = cfg.sweep.alpha or (cfg.alpha,)
    gammas = cfg.sweep.gamma or (cfg.gamma_deph,)
    # combinations a method cannot represent are skipped rather than reported as failures
    return [SweepPoint(n, r, a[0], a[1], g, m)
            for n, r, a, g, m in product(ns, rs, alphas, gammas, cfg.methods)
            if (g == 0 or m == "lindblad") and (a == (0.0, 0.0) or m not in ANALYTIC_METHODS)]


def _ratios(row: SweepRow, f: float) -> None:
    row.qfi = f
    row.var_sz = f / 4
    row.qfi_var_bound = f
    if f > 0:
        row.chi_ss_sq = row.N / f
        row.chi_sh_sq = row.N ** 2 / f
        row.delta_phi_bound = 1 / math.sqrt(f)
    else:
        row.chi_ss_sq = row.chi_sh_sq = row.delta_phi_bound = math.inf
        row.flags = "qfi_zero"


def evaluate_point(cfg: ScenarioConfig, pt: SweepPoint) -> SweepRow:
    """Evaluate one sweep point; domain and numerical failures land in ``row.error``."""
    row = SweepRow(pt.n_ions, pt.r, pt.alpha_re, pt.alpha_im, pt.gamma_deph, cfg.mode, pt.method)
    start = time.perf_counter()
    try:
        _evaluate(cfg, pt, row)
    except (ArgumentError, NumericalError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        log.warning("point %s failed: %s", pt, row.error)
    row.wall_ms = 0.0 if cfg.deterministic else round(1e3 * (time.perf_counter() - start), 3)
    return row


def _evaluate(cfg: ScenarioConfig, pt: SweepPoint, row: SweepRow) -> None:
    alpha = complex(pt.alpha_re, pt.alpha_im)
    tol = cfg.tolerances
    if pt.method in ANALYTIC_METHODS:
        if alpha != 0 or pt.gamma_deph != 0 or cfg.mode != "com":
            raise ArgumentError("analytic QFI assumes the com mode, no displacement and no dephasing")
        res = analytics.qfi(pt.n_ions, pt.r, pt.method)
        _ratios(row, res.value)
        row.trunc_mass = 0.0
        return
    amps = boson_amplitudes(SqueezeSpec(pt.r, cfg.phi), DisplacementSpec(alpha), tol.fock_eps)
    if pt.method == "target_populations":
        if pt.gamma_deph != 0:
            raise ArgumentError("the adiabatic target ignores dephasing")
        pops = adiabatic_target_populations(pt.n_ions, amps)
        _ratios(row, 4 * population_variance_sz(pops))
        row.trunc_mass = max(0.0, 1.0 - math.fsum(pops.values()))
        return

    pulses = PulseSchedule.from_hz(cfg.pulses.delta0_hz, cfg.pulses.lambda0_hz, cfg.pulses.gamma_hz)
    settings = IntegratorSettings(method=cfg.integrator, rtol=tol.rtol, atol=tol.atol,
                                  fixed_steps=cfg.fixed_steps)
    state = initial_product_state(pt.n_ions, amps, cfg.mode, sector_eps=tol.sector_eps)
    if pt.method == "schrodinger":
        if pt.gamma_deph != 0:
            raise ArgumentError("dephasing needs the lindblad method")
        final = evolve_schrodinger(state, pulses, settings)
    elif pt.method == "lindblad":
        rho = BlockDensityMatrix.from_pure(state, block_eps=tol.block_eps)
        final = evolve_lindblad(rho, pulses, DephasingSpec(pt.gamma_deph * pulses.lambda0), settings)
    else:
        raise ArgumentError(f"unknown method {pt.method!r}")
    rep = report(final, pt.n_ions)
    for name in ("qfi", "chi_ss_sq", "chi_sh_sq", "xi_sq", "xi_sh_sq", "gain_db", "var_sz",
                 "qfi_var_bound", "alpha_min", "delta_phi_bound", "tilt"):
        setattr(row, name, getattr(rep, name))
    row.flags = ";".join(rep.flags)
    row.trunc_mass = float(final.dropped_mass)
    row.integrator = cfg.integrator


def _evaluate_star(args):
    return evaluate_point(*args)


def run_scenario(cfg: ScenarioConfig) -> list[SweepRow]:
    """Evaluate all sweep points; rows follow :func:`sweep_points` order."""
    points = sweep_points(cfg)
    if cfg.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_evaluate_star, [(cfg, p) for p in points]))
    return [evaluate_point(cfg, p) for p in points]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in rows:
        w.writerow([_fmt(getattr(row, f)) for f in CSV_FIELDS])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def rows_to_json(rows: list[SweepRow]) -> str:
    data = [{k: _jsonable(v) for k, v in asdict(r).items()} for r in rows]
    return json.dumps(data, indent=1)


def write_rows(rows: list[SweepRow], path: str | Path) -> tuple[Path, Path]:
    """Write ``path`` (CSV) and its ``.json`` mirror."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows))
    mirror = path.with_suffix(".json")
    mirror.write_text(rows_to_json(rows))
    return path, mirror


ROW_FIELDS = tuple(f.name for f in fields(SweepRow))
