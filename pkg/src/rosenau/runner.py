"""Sweep execution: metrics and checks over (kernel, eps, t), CSV/JSONL output.

Sweep points are independent pure computations and may run on a thread
pool; results are merged by sorted key so the written bytes do not depend
on scheduling.  Floats are serialized with 17 significant digits and the
pipeline is seed-free, which makes reruns byte-identical.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import analysis
from .config import ExperimentConfig
from .errors import RosenauError
from .kernels import BackgroundKernel, kernel_by_name
from .metrics import CONVEX_FUNCTIONALS, convex_functional, ds_distance, moment
from .spectral import (
    GridSpec,
    SpectralField,
    default_grid,
    field_from_symbol,
    forward_transform,
    heat_propagate,
    inverse_transform,
    load_distribution,
    regularized_solution,
    require_grid_contains,
    rosenau_propagate,
    save_distribution,
)

CSV_HEADER = "kernel,epsilon,t,quantity,value,argsup,grid_L,grid_N"


class RunError(RosenauError):
    """Numerical failure at a named sweep point."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class Row:
    kernel: str
    epsilon: float
    t: float
    quantity: str
    value: float
    argsup: float
    grid: GridSpec

    def csv(self) -> str:
        return ",".join([
            self.kernel, _fmt(self.epsilon), _fmt(self.t), self.quantity,
            _fmt(self.value), _fmt(self.argsup),
            _fmt(self.grid.length), str(self.grid.points),
        ])


def _initial_field(cfg: ExperimentConfig, grid: GridSpec, sigma_sq: float) -> SpectralField:
    if cfg.initial.startswith("file:"):
        dist = load_distribution(cfg.initial.split(":", 1)[1])
        return forward_transform(dist)
    return analysis.initial_by_name(cfg.initial, grid, sigma_sq)


def _grid_for(cfg: ExperimentConfig, kernel: BackgroundKernel) -> GridSpec:
    t_max = max(cfg.times)
    sigma_d = math.sqrt(kernel.sigma_sq)
    m2_hint = 2.0 * kernel.sigma_sq if cfg.initial == "mixture-matched" else 1.0
    if cfg.grid_length is not None:
        points = cfg.grid_points or default_grid(sigma_d, t_max).points
        return GridSpec(length=cfg.grid_length, points=points)
    return default_grid(sigma_d, t_max, n=cfg.grid_points, m2=m2_hint)


def _heat_field(grid: GridSpec, sigma_sq: float, t: float) -> SpectralField:
    return field_from_symbol(grid, lambda z: np.exp(-sigma_sq * np.asarray(z) ** 2 * t))


def _point_rows(cfg: ExperimentConfig, kernel: BackgroundKernel, grid: GridSpec,
                g0: SpectralField, eps: float, t: float) -> List[Row]:
    sigma_sq = kernel.sigma_sq
    ref = analysis.gaussian_reference(grid, sigma_sq)
    rows: List[Row] = []

    def add(quantity, value, argsup=0.0):
        rows.append(Row(kernel=cfg.kernel, epsilon=eps, t=t, quantity=quantity,
                        value=float(value), argsup=float(argsup), grid=grid))

    sol = rosenau_propagate(g0, kernel, t)
    needs_density = any(q in cfg.metrics for q in ("m2", "m4", "l1_reg_gap",
                                                   "l1_heat_gap", "entropy_reg"))
    if needs_density:
        m2_0 = moment(inverse_transform(g0), 2)
        require_grid_contains(grid, m2_0 + kernel.lam * kernel.gamma**2 * t)

    for quantity in sorted(cfg.metrics):
        if quantity == "mass":
            add(quantity, sol.mass)
        elif quantity == "m2":
            add(quantity, moment(inverse_transform(sol), 2))
        elif quantity == "m4":
            add(quantity, moment(inverse_transform(sol), 4))
        elif quantity == "d2_selfsim":
            rep = ds_distance(analysis.rescale(sol, t).field, ref, 2.0)
            add(quantity, rep.value, rep.argsup)
        elif quantity == "d3_selfsim":
            rep = ds_distance(analysis.rescale(sol, t).field, ref, 3.0)
            add(quantity, rep.value, rep.argsup)
        elif quantity == "d2_gap":
            h_kin = analysis.rescale(sol, t).field
            h_heat = analysis.rescale(heat_propagate(g0, sigma_sq, t), t).field
            rep = ds_distance(h_kin, h_heat, 2.0)
            add(quantity, rep.value, rep.argsup)
        elif quantity == "d2_selfsim_heat":
            h_heat = analysis.rescale(heat_propagate(g0, sigma_sq, t), t).field
            rep = ds_distance(h_heat, ref, 2.0)
            add(quantity, rep.value, rep.argsup)
        elif quantity == "l1_reg_gap":
            heat = heat_propagate(g0, sigma_sq, t)
            reg = regularized_solution(g0, kernel, t)
            diff = SpectralField(grid, heat.values - reg.values)
            add(quantity, grid.dv * float(np.sum(np.abs(inverse_transform(diff).density))))
        elif quantity == "l1_heat_gap":
            heat = heat_propagate(g0, sigma_sq, t)
            diff = SpectralField(grid, heat.values - _heat_field(grid, sigma_sq, t).values)
            add(quantity, grid.dv * float(np.sum(np.abs(inverse_transform(diff).density))))
        elif quantity == "entropy_reg":
            reg = inverse_transform(regularized_solution(g0, kernel, t))
            add(quantity, convex_functional(reg, CONVEX_FUNCTIONALS["rlogr"]))
    return rows


def compute_rows(cfg: ExperimentConfig, threads: int = 0) -> List[Row]:
    """All metric rows of the sweep, sorted by (epsilon, t, quantity)."""
    points: List[Tuple[float, float]] = [(e, t) for e in cfg.epsilons for t in cfg.times]
    grids: Dict[float, Tuple[BackgroundKernel, GridSpec, SpectralField]] = {}
    for eps in cfg.epsilons:
        kernel = kernel_by_name(cfg.kernel, eps, cfg.sigma)
        grid = _grid_for(cfg, kernel)
        g0 = _initial_field(cfg, grid, kernel.sigma_sq)
        grids[eps] = (kernel, grid, g0)

    def work(point):
        eps, t = point
        kernel, grid, g0 = grids[eps]
        try:
            return _point_rows(cfg, kernel, grid, g0, eps, t)
        except RosenauError as exc:
            raise RunError(f"sweep point (kernel={cfg.kernel}, eps={eps:g}, t={t:g}): {exc}") from exc

    if threads == 1 or len(points) == 1:
        chunks = [work(p) for p in points]
    else:
        workers = threads if threads > 0 else min(len(points), os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(work, points))
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.epsilon, r.t, r.quantity))
    return rows


def compute_checks(cfg: ExperimentConfig) -> List[analysis.BoundCheck]:
    """All requested bound checks over the sweep, in deterministic order."""
    checks: List[analysis.BoundCheck] = []
    times = sorted(cfg.times)
    for eps in sorted(cfg.epsilons):
        try:
            kernel = kernel_by_name(cfg.kernel, eps, cfg.sigma)
            grid = _grid_for(cfg, kernel)
            g0 = _initial_field(cfg, grid, kernel.sigma_sq)
            if "d2_bound" in cfg.checks:
                checks.extend(analysis.d2_bound_check(cfg.kernel, g0, eps, times, cfg.sigma))
            if "d3_bound" in cfg.checks:
                checks.extend(analysis.d3_bound_check(kernel, g0, times))
        except RosenauError as exc:
            raise RunError(
                f"check sweep point (kernel={cfg.kernel}, eps={eps:g}, "
                f"t in {times}): {exc}") from exc
    if "heat_decay" in cfg.checks:
        try:
            kernel = kernel_by_name(cfg.kernel, cfg.epsilons[0], cfg.sigma)
            grid = _grid_for(cfg, kernel)
            g0 = _initial_field(cfg, grid, kernel.sigma_sq)
            checks.extend(analysis.exact_decay_check(g0, 2.0, kernel.sigma_sq, times))
        except RosenauError as exc:
            raise RunError(f"heat decay check (kernel={cfg.kernel}, t in {times}): {exc}") from exc
    return checks


def write_csv(rows: Sequence[Row], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(r.csv() + "\n")


def write_checks(checks: Sequence[analysis.BoundCheck], path: str) -> None:
    with open(path, "w") as fh:
        for c in checks:
            fh.write(json.dumps({
                "name": c.name,
                "lhs": c.lhs,
                "rhs": c.rhs,
                "margin": c.margin,
                "satisfied": c.satisfied,
                "params": c.params,
            }, sort_keys=True) + "\n")


def run(cfg: ExperimentConfig, out_dir: Optional[str] = None, threads: int = 0,
        verbose: bool = False, make_plots: bool = True) -> Dict[str, str]:
    """Execute a config: results.csv, checks.jsonl, one SVG per plotted quantity."""
    from .svg import plot_rows

    out = out_dir or cfg.outputs
    os.makedirs(out, exist_ok=True)
    artifacts: Dict[str, str] = {}

    if cfg.metrics:
        rows = compute_rows(cfg, threads=threads)
        csv_path = os.path.join(out, "results.csv")
        write_csv(rows, csv_path)
        artifacts["results"] = csv_path
        if verbose:
            print(f"wrote {len(rows)} rows to {csv_path}")
        if make_plots:
            for quantity in sorted(set(r.quantity for r in rows)):
                svg_path = os.path.join(out, f"{quantity}.svg")
                with open(svg_path, "w") as fh:
                    fh.write(plot_rows([r for r in rows if r.quantity == quantity], quantity))
                artifacts[f"plot:{quantity}"] = svg_path

    if cfg.checks:
        checks = compute_checks(cfg)
        jsonl_path = os.path.join(out, "checks.jsonl")
        write_checks(checks, jsonl_path)
        artifacts["checks"] = jsonl_path
        bad = [c for c in checks if not c.satisfied]
        if verbose:
            print(f"wrote {len(checks)} checks to {jsonl_path} ({len(bad)} unsatisfied)")
        if bad:
            raise RunError(f"{len(bad)} of {len(checks)} bound checks unsatisfied; "
                           f"first: {bad[0].name} lhs={bad[0].lhs:g} rhs={bad[0].rhs:g}")
    return artifacts


def simulate(cfg: ExperimentConfig, out_dir: Optional[str] = None,
             verbose: bool = False) -> List[str]:
    """Solve the kinetic equation at every sweep point and dump distributions."""
    out = out_dir or cfg.outputs
    os.makedirs(out, exist_ok=True)
    written = []
    for eps in sorted(cfg.epsilons):
        kernel = kernel_by_name(cfg.kernel, eps, cfg.sigma)
        grid = _grid_for(cfg, kernel)
        g0 = _initial_field(cfg, grid, kernel.sigma_sq)
        for t in sorted(cfg.times):
            try:
                sol = rosenau_propagate(g0, kernel, t)
                dist = inverse_transform(sol)
            except RosenauError as exc:
                raise RunError(
                    f"sweep point (kernel={cfg.kernel}, eps={eps:g}, t={t:g}): {exc}") from exc
            path = os.path.join(out, f"dist_{cfg.kernel.replace(':', '_')}_eps{eps:g}_t{t:g}.txt")
            save_distribution(dist, path)
            written.append(path)
            if verbose:
                print(f"wrote {path}")
    return written
