"""Derivative-free optimization over angle vectors, parameter sweeps, averaging.

The optimizers here are deliberately simple: a deterministic coarse grid scan
followed by multistart Nelder-Mead refinement.  Objectives are either plain
callables ``f(x) -> float`` on a vector of angles, or additionally provide a
``batch`` attribute evaluating many points at once (used to vectorize the grid
stage).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpec:
    """Box-constrained optimization problem over a small angle vector.

    ``objective`` maps a 1-d float array of length ``dimension`` to a float.
    If ``symmetric`` is set, all coordinates within each group listed in
    ``symmetry_groups`` are tied equal during the grid stage (refinement is
    always unrestricted unless ``tie_refinement`` is set).
    """

    objective: Callable[[np.ndarray], float]
    dimension: int
    bounds: tuple[tuple[float, float], ...]
    grid_resolution: int = 13
    multistarts: int = 3
    random_starts: int = 2
    tolerance: float = 1e-7
    maximize: bool = False
    symmetric: bool = False
    symmetry_groups: tuple[tuple[int, ...], ...] = ()
    tie_refinement: bool = False
    batch_objective: Callable[[np.ndarray], np.ndarray] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise SearchError("dimension must be >= 1")
        if len(self.bounds) != self.dimension:
            raise SearchError("bounds must match dimension")
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise SearchError("bounds must be finite with lo < hi")
        if self.grid_resolution < 2:
            raise SearchError("grid resolution must be >= 2")


@dataclass(frozen=True)
class SearchResult:
    argopt: np.ndarray
    value: float
    evaluations: int
    trace: tuple[tuple[float, ...], ...]  # (value, *point) per refinement start


def _sign(spec: SearchSpec) -> float:
    return -1.0 if spec.maximize else 1.0


def _grid_points(spec: SearchSpec) -> np.ndarray:
    """Tensor grid over the box, with optional symmetry tying."""
    if spec.symmetric and spec.symmetry_groups:
        groups = spec.symmetry_groups
    else:
        groups = tuple((i,) for i in range(spec.dimension))
    axes = []
    for group in groups:
        lo, hi = spec.bounds[group[0]]
        axes.append(np.linspace(lo, hi, spec.grid_resolution))
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    pts = np.empty((flat.shape[0], spec.dimension))
    for g, group in enumerate(groups):
        for idx in group:
            pts[:, idx] = flat[:, g]
    return pts


def _evaluate(spec: SearchSpec, pts: np.ndarray) -> np.ndarray:
    if spec.batch_objective is not None:
        vals = np.asarray(spec.batch_objective(pts), dtype=float)
    else:
        vals = np.array([spec.objective(p) for p in pts], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise SearchError("objective returned a non-finite value")
    return vals


def optimize(spec: SearchSpec) -> SearchResult:
    """Grid scan + multistart Nelder-Mead; deterministic for a fixed seed."""
    sign = _sign(spec)
    pts = _grid_points(spec)
    vals = sign * _evaluate(spec, pts)
    evaluations = len(pts)

    order = np.argsort(vals, kind="stable")
    starts = [pts[i] for i in order[: spec.multistarts]]
    rng = np.random.default_rng(spec.seed)
    lo = np.array([b[0] for b in spec.bounds])
    hi = np.array([b[1] for b in spec.bounds])
    for _ in range(spec.random_starts):
        starts.append(lo + rng.random(spec.dimension) * (hi - lo))

    def fun(x: np.ndarray) -> float:
        return sign * float(spec.objective(np.asarray(x, dtype=float)))

    best_x = pts[order[0]].copy()
    best_v = float(vals[order[0]])
    trace: list[tuple[float, ...]] = []
    for x0 in starts:
        if spec.tie_refinement and spec.symmetry_groups:
            groups = spec.symmetry_groups

            def tied(z: np.ndarray) -> float:
                x = np.empty(spec.dimension)
                for g, group in enumerate(groups):
                    x[list(group)] = z[g]
                return fun(x)

            z0 = np.array([x0[group[0]] for group in groups])
            res = minimize(
                tied, z0, method="Nelder-Mead",
                options={"xatol": spec.tolerance, "fatol": spec.tolerance ** 2,
                         "maxiter": 400 * len(z0), "maxfev": 400 * len(z0)},
            )
            xr = np.empty(spec.dimension)
            for g, group in enumerate(groups):
                xr[list(group)] = res.x[g]
        else:
            res = minimize(
                fun, x0, method="Nelder-Mead",
                options={"xatol": spec.tolerance, "fatol": spec.tolerance ** 2,
                         "maxiter": 400 * spec.dimension,
                         "maxfev": 400 * spec.dimension},
            )
            xr = np.asarray(res.x, dtype=float)
        evaluations += int(res.nfev)
        fv = float(res.fun)
        trace.append((sign * fv, *xr))
        if fv < best_v:
            best_v = fv
            best_x = xr
    return SearchResult(best_x, sign * best_v, evaluations, tuple(trace))


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep with an arbitrary per-point evaluator.

    ``evaluate(value, fixed) -> mapping`` produces the record payload for one
    grid point of the swept parameter.
    """

    parameter: str
    values: tuple[float, ...]
    evaluate: Callable[[float, Mapping[str, Any]], Mapping[str, Any]]
    fixed: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.values:
            raise SearchError("sweep range must be nonempty")


@dataclass(frozen=True)
class SweepRecord:
    parameter: str
    value: float
    payload: Mapping[str, Any]


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[SweepRecord]:
    """Evaluate the sweep grid; results are ordered by grid index."""
    def point(v: float) -> SweepRecord:
        return SweepRecord(spec.parameter, float(v), dict(spec.evaluate(v, spec.fixed)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(point, spec.values))
    return [point(v) for v in spec.values]


def uniform_average(
    objective: Callable[[np.ndarray], float],
    center: Sequence[float],
    width: float,
    samples: int = 21,
    perturbed: Sequence[int] | None = None,
) -> float:
    """Mean of the objective over a tensor grid of jointly perturbed coordinates.

    Each perturbed coordinate ranges over ``samples`` equispaced points on
    [center - width/2, center + width/2]; unperturbed coordinates stay fixed.
    """
    if width < 0:
        raise SearchError("width must be >= 0")
    center = np.asarray(center, dtype=float)
    if width == 0 or samples == 1:
        return float(objective(center))
    if perturbed is None:
        perturbed = list(range(len(center)))
    offsets = np.linspace(-width / 2, width / 2, samples)
    total = 0.0
    count = 0
    for combo in itertools.product(offsets, repeat=len(perturbed)):
        x = center.copy()
        for idx, off in zip(perturbed, combo):
            x[idx] += off
        total += float(objective(x))
        count += 1
    return total / count
