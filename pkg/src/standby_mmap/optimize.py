"""Vacation-policy optimization by grid sweep.

Two vacation-time families are swept: geometric (one parameter) and
generalized Erlang of shape 2 (two stage parameters), each jointly with
the return threshold R and optionally with preventive maintenance
switched off (inspections disabled).  Every grid point is evaluated with
the sparse stationary solve; the winning point is re-verified with the
dense censoring-recursion solver before being reported.

Grid points are independent; with more than one worker they are
evaluated by a process pool, and the result table is assembled in grid
order so the output is identical however the work was scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .economics import EconomicParams, build_vectors, stationary_profits
from .errors import InfeasiblePoint, ModelError, Reducible
from .measures import (availability, event_rates_stationary,
                       repairperson_proportions, stationary, stationary_fast)
from .mmap_builder import SystemModel, build
from .ph import DiscretePH, erlang2_ph, geometric_ph
from .unit import OnlineUnitModel

ENV_WORKERS = "STANDBY_MMAP_THREADS"


@dataclass(frozen=True)
class SweepSpec:
    """Grid description for one sweep."""

    family: str                       # "geometric" | "erlang2"
    grids: tuple[np.ndarray, ...]     # one grid per vacation parameter
    R_values: tuple[int, ...]
    pm: bool = True                   # preventive maintenance on?

    def __post_init__(self):
        if self.family not in ("geometric", "erlang2"):
            raise ModelError("InvalidFamily", self.family)
        want = 1 if self.family == "geometric" else 2
        if len(self.grids) != want:
            raise ModelError("DimensionMismatch",
                             f"{self.family} needs {want} parameter grid(s)")
        grids = tuple(np.asarray(g, dtype=float).reshape(-1) for g in self.grids)
        for g in grids:
            if g.size == 0 or np.any(g <= 0) or np.any(g >= 1):
                raise ModelError("InvalidGrid", "grid values must lie in (0,1)")
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "R_values", tuple(int(r) for r in self.R_values))

    def points(self) -> list[tuple]:
        """(param..., R) tuples in deterministic lexicographic order."""
        return [tuple(ps) + (r,)
                for ps in product(*[map(float, g) for g in self.grids])
                for r in self.R_values]


@dataclass
class SweepResult:
    spec: SweepSpec
    param_names: tuple[str, ...]
    rows: list[dict]
    best: dict | None
    tie_break: str = ""

    def as_table(self) -> list[dict]:
        return self.rows


def vacation_ph(family: str, params: tuple[float, ...]) -> DiscretePH:
    if family == "geometric":
        return geometric_ph(params[0])
    return erlang2_ph(params[0], params[1])


def disable_inspections(unit: OnlineUnitModel) -> OnlineUnitModel:
    """Make the inspection clock non-exiting, so major inspections never fire."""
    M = unit.inspection.S
    M0 = 1.0 - M.sum(axis=1)
    eta = unit.inspection.alpha
    stoch = M + np.outer(M0, eta)
    stoch /= stoch.sum(axis=1, keepdims=True)
    return replace(unit, inspection=DiscretePH(eta, stoch))


def evaluate_point(base: SystemModel, econ: EconomicParams, family: str,
                   pm: bool, point: tuple) -> dict:
    """Stationary profit and headline measures of one grid point."""
    *params, R = point
    model = replace(base, vacation=vacation_ph(family, tuple(params)), R=int(R))
    if not pm:
        model = replace(model, unit=disable_inspections(model.unit))
    kern = build(model, collect="light")
    pi = stationary_fast(kern.D)
    lay = kern.layout
    rates = event_rates_stationary(kern, pi)
    vecs = build_vectors(model, lay, econ)
    prof = stationary_profits(kern, vecs, econ, pi, rates)
    row = {f"p{i+1}" if family == "erlang2" else "p": v
           for i, v in enumerate(params)}
    row.update({
        "R": int(R), "phi": prof.phi, "A": availability(lay, pi),
        "L_rep": rates["rep"], "L_mi": rates["mi"], "L_NS": rates["NS"],
        "L_rb": rates["rb"],
    })
    return row


def _eval_task(args):
    base, econ, family, pm, point = args
    try:
        return evaluate_point(base, econ, family, pm, point)
    except (Reducible, ModelError, np.linalg.LinAlgError) as exc:
        row = {f"p{i+1}" if family == "erlang2" else "p": v
               for i, v in enumerate(point[:-1])}
        row.update({"R": int(point[-1]), "phi": float("nan"), "A": float("nan"),
                    "L_rep": float("nan"), "L_mi": float("nan"),
                    "L_NS": float("nan"), "L_rb": float("nan"),
                    "error": f"{type(exc).__name__}: {exc}"})
        return row


def default_workers() -> int:
    env = os.environ.get(ENV_WORKERS)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def sweep(base: SystemModel, econ: EconomicParams, spec: SweepSpec,
          workers: int | None = None, verify_best: bool = True) -> SweepResult:
    """Evaluate the whole grid and locate the profit argmax.

    Ties break toward smaller R, then lexicographically smaller
    parameters.  Infeasible points are recorded with NaN measures and
    skipped for the argmax; if every point is infeasible an
    ``InfeasiblePoint`` error is raised.
    """
    points = spec.points()
    tasks = [(base, econ, spec.family, spec.pm, pt) for pt in points]
    workers = workers if workers is not None else default_workers()
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_eval_task, tasks,
                                 chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_eval_task(t) for t in tasks]

    param_names = ("p",) if spec.family == "geometric" else ("p1", "p2")
    best = None
    best_key = None
    for pt, row in zip(points, rows):
        if not np.isfinite(row["phi"]):
            continue
        *params, R = pt
        key = (-row["phi"], R, tuple(params))
        if best_key is None or key < best_key:
            best_key = key
            best = row
    if best is None:
        raise InfeasiblePoint("no feasible grid point")

    if verify_best:
        # re-solve the winner with the dense recursion + direct cross-check
        *params, R = [best[p] for p in param_names] + [best["R"]]
        model = replace(base, vacation=vacation_ph(spec.family, tuple(params)),
                        R=int(R))
        if not spec.pm:
            model = replace(model, unit=disable_inspections(model.unit))
        kern = build(model)
        st = stationary(kern, model=model)
        rates = event_rates_stationary(kern, st.pi)
        vecs = build_vectors(model, kern.layout, econ)
        prof = stationary_profits(kern, vecs, econ, st.pi, rates)
        if abs(prof.phi - best["phi"]) > 1e-7:
            raise ModelError("RecursionDirectMismatch",
                             f"sweep fast solve and verified solve differ: "
                             f"{best['phi']:.10g} vs {prof.phi:.10g}")
    return SweepResult(spec, param_names, rows, best,
                       "smaller R, then lexicographic parameters")


def erlang_refined_sweep(base: SystemModel, econ: EconomicParams,
                         R_values: tuple[int, ...], pm: bool = True,
                         coarse_step: float = 0.05, refine_step: float = 0.01,
                         window: float = 0.1,
                         workers: int | None = None) -> tuple[SweepResult, SweepResult]:
    """Two-stage generalized-Erlang sweep: coarse grid, then a fine window.

    The refinement re-grids both stage parameters at ``refine_step``
    inside ``+-window`` of the coarse argmax, keeping the coarse argmax
    R (the threshold is a coarse discrete dimension that the first pass
    already resolves).
    """
    coarse_grid = np.round(np.arange(coarse_step, 1.0 - 1e-12, coarse_step), 10)
    coarse = sweep(base, econ,
                   SweepSpec("erlang2", (coarse_grid, coarse_grid), R_values, pm),
                   workers=workers, verify_best=False)
    c1, c2, cR = coarse.best["p1"], coarse.best["p2"], coarse.best["R"]

    def window_grid(center):
        lo = max(refine_step, center - window)
        hi = min(1.0 - refine_step, center + window)
        return np.round(np.arange(lo, hi + 1e-12, refine_step), 10)

    fine = sweep(base, econ,
                 SweepSpec("erlang2", (window_grid(c1), window_grid(c2)), (cR,), pm),
                 workers=workers)
    return coarse, fine
