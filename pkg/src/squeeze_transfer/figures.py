"""Named figure presets: parameter grids, desk-scale caps and auxiliary outputs."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import analytics
from .config import Pulses, ScenarioConfig, Sweep, Tolerances
from .dynamics import FIG2_PULSES, evolve_schrodinger
from .errors import ArgumentError
from .states import SqueezeSpec, adiabatic_target_populations, boson_amplitudes, initial_product_state
from .sweep import SweepRow, run_scenario, write_rows

FIG2_HZ = Pulses(45e3, 20e3, 1e3)
FIG4_HZ = Pulses(2.5e3, 1.5e3, 5.5e3)
DEPHASING_GRID = (0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)


def _even(lo: int, hi: int) -> tuple[int, ...]:
    return tuple(range(lo, hi + 1, 2))


@dataclass
class FigurePreset:
    fig_id: str
    summary: str
    configs: list[ScenarioConfig]
    substitutions: list[str] = field(default_factory=list)
    extra: Callable[[list[SweepRow], Path], list[Path]] | None = None


@dataclass
class FigureResult:
    fig_id: str
    rows: list[SweepRow]
    paths: list[Path]
    substitutions: list[str]

    @property
    def failed(self) -> int:
        return sum(not r.ok for r in self.rows)


def _cfg(ns, rs, methods, **kw) -> ScenarioConfig:
    return ScenarioConfig(n_ions=ns[0], r=rs[0], methods=tuple(methods),
                          sweep=Sweep(n_ions=tuple(ns), r=tuple(rs)), deterministic=True, **kw)


def _cap(ns, max_n):
    return tuple(n for n in ns if max_n is None or n <= max_n)


def _write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([[repr(x) if isinstance(x, float) else x for x in row] for row in rows])
    return path


def _histogram_2b(rows, out: Path) -> list[Path]:
    n_ions, r = 10, 1.5
    amps = boson_amplitudes(SqueezeSpec(r))
    target = adiabatic_target_populations(n_ions, amps)
    final = evolve_schrodinger(initial_product_state(n_ions, amps), FIG2_PULSES)
    got: dict[int, float] = {}
    for (m, _), p in final.populations().items():
        got[int(round(m))] = got.get(int(round(m)), 0.0) + p
    want: dict[int, float] = {}
    for (m, _), p in target.items():
        want[m] = want.get(m, 0.0) + p
    table = [(m, want.get(m, 0.0), got.get(m, 0.0)) for m in range(-n_ions // 2, n_ions // 2 + 1)]
    return [_write_csv(out / "fig2b_histogram.csv", ("m", "p_target", "p_evolved"), table)]


def _regions_3b(rows, out: Path) -> list[Path]:
    data = {}
    for r in sorted({row.r for row in rows}):
        sel = [row for row in rows if row.r == r and row.method == "closed_form" and row.ok]
        n = [row.N for row in sel]
        reg = analytics.scaling_regions(n, [row.qfi for row in sel])
        bounds = {name: [n[s.start], n[s.stop - 1]] if s.stop > s.start else None
                  for name, s in (("I", reg.region_one), ("II", reg.region_two),
                                  ("III", reg.region_three))}
        data[repr(r)] = bounds
    path = out / "fig3b_regions.json"
    path.write_text(json.dumps(data, indent=1))
    return [path]


def _ratio_3c(rows, out: Path) -> list[Path]:
    exact = {row.r: row.qfi for row in rows if row.method == "closed_form" and row.ok}
    lead = {row.r: row.qfi for row in rows if row.method == "max_leading" and row.ok}
    table = [(r, exact[r] / lead[r]) for r in sorted(exact) if r in lead and lead[r] > 0]
    return [_write_csv(out / "fig3c_ratio.csv", ("r", "ratio_exact_over_max"), table)]


def _ratio_3d(rows, out: Path) -> list[Path]:
    base = {row.N: row.qfi for row in rows if row.alpha_re == 0 and row.alpha_im == 0 and row.ok}
    table = [(row.N, row.alpha_re, row.alpha_im, base[row.N] / row.qfi)
             for row in rows if (row.alpha_re, row.alpha_im) != (0, 0) and row.ok and row.N in base]
    return [_write_csv(out / "fig3d_ratio.csv", ("N", "alpha_re", "alpha_im", "ratio"), table)]


def preset(fig_id: str, max_n: int | None = None) -> FigurePreset:
    """Return the preset for ``fig_id``; ``max_n`` caps every N grid."""
    weak = (0.5, 1.0, 1.5)
    if fig_id == "2a":
        dyn_n = _cap(_even(2, 40), max_n if max_n is not None else 12)
        cfgs = [_cfg(_cap(_even(2, 40), max_n), weak, ["direct_sum", "closed_form"]),
                _cfg(dyn_n, weak, ["schrodinger"], pulses=FIG2_HZ)]
        return FigurePreset(fig_id, "QFI vs N, analytic and evolved", cfgs,
                            [f"dynamics limited to N <= {max(dyn_n)}"])
    if fig_id == "2b":
        return FigurePreset(fig_id, "chi_ss^2 vs N plus the N=10, r=1.5 population histogram",
                            [_cfg(_cap(_even(2, 100), max_n), weak, ["closed_form"])],
                            extra=_histogram_2b)
    if fig_id in ("3a", "3b"):
        rs = (2.0, 2.5, 3.0) if fig_id == "3a" else (2.5,)
        methods = ["closed_form", "asymptotic", "max_leading"] if fig_id == "3a" else ["closed_form"]
        ns = _cap(_even(2, 200), max_n)
        return FigurePreset(fig_id, "strong-squeezing QFI and chi_SH^2 vs N",
                            [_cfg(ns, rs, methods)],
                            extra=_regions_3b if fig_id == "3b" else None)
    if fig_id == "3c":
        rs = tuple(float(x) for x in np.arange(0.5, 5.01, 0.25))
        return FigurePreset(fig_id, "exact QFI over its leading asymptote vs r at N=10",
                            [_cfg((10,), rs, ["closed_form", "max_leading"])], extra=_ratio_3c)
    if fig_id == "3d":
        ns = _cap(_even(2, 20), max_n)
        cfg = _cfg(ns, (2.5,), ["target_populations"])
        cfg = replace(cfg, sweep=replace(cfg.sweep, alpha=((0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.5, 0.0))))
        return FigurePreset(fig_id, "QFI ratio for displaced squeezed input", [cfg],
                            ["QFI from the adiabatic-limit populations instead of time evolution"],
                            extra=_ratio_3d)
    if fig_id in ("4a", "4b"):
        ns = _cap(tuple(range(4, 53, 4)), max_n)
        return FigurePreset(fig_id, "metrological gain and xi_SH^2 vs N with the slow-coupling pulses",
                            [_cfg(ns, weak, ["schrodinger"], pulses=FIG4_HZ)])
    if fig_id in ("s1a", "s1b"):
        ns = _cap(_even(2, 8), max_n)
        tol = Tolerances(fock_eps=1e-8, sector_eps=1e-8, rtol=1e-12, atol=1e-14)
        return FigurePreset(fig_id, "breathing-mode chi_ss^2 and chi_SH^2 vs N",
                            [_cfg(ns, (2.5,), ["schrodinger"], mode="breathing",
                                  pulses=FIG2_HZ, tolerances=tol)],
                            [f"N <= {max(ns)}", "Fock and sector tails cut at 1e-8"])
    if fig_id in ("s2a", "s2b"):
        ns = _cap(_even(2, 8), max_n)
        cfg = _cfg(ns, (2.0,), ["lindblad"], pulses=FIG2_HZ, integrator="magnus4", fixed_steps=1000,
                   tolerances=Tolerances(fock_eps=1e-8, sector_eps=1e-8, block_eps=1e-10))
        cfg = replace(cfg, sweep=replace(cfg.sweep, gamma=DEPHASING_GRID))
        return FigurePreset(fig_id, "chi_ss^2 and chi_SH^2 vs collective dephasing (units of lambda0)",
                            [cfg], [f"N <= {max(ns)}, r = 2", "Fock and sector tails cut at 1e-8"])
    raise ArgumentError(f"unknown figure id {fig_id!r}; expected one of {FIGURE_IDS}")


FIGURE_IDS = ("2a", "2b", "3a", "3b", "3c", "3d", "4a", "4b", "s1a", "s1b", "s2a", "s2b")


def run_figure(fig_id: str, out_dir: str | Path = ".", max_n: int | None = None) -> FigureResult:
    p = preset(fig_id, max_n)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[SweepRow] = []
    for cfg in p.configs:
        rows += run_scenario(cfg)
    paths = list(write_rows(rows, out / f"fig{fig_id}.csv"))
    if p.extra is not None:
        paths += p.extra(rows, out)
    return FigureResult(fig_id, rows, paths, p.substitutions)
