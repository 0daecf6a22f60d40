"""State-indexed rewards and costs and the net-profit measures.

Per occupied state and step, the system earns the gross profit minus the
operating cost of the online unit's internal phase while any unit is
operational, and bleeds the downtime loss otherwise.  The repair
facility costs the idle wage when the repairperson sits with an empty
queue, or the per-phase task cost of the unit in service.  On top of the
per-state flows, fixed charges accrue per event: each repairable
failure, each major inspection, each return of the repairperson
(whether or not he stays), and the purchase of n fresh units at every
system restart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .measures import TransientPath, event_rates_stationary, event_rates_transient
from .mmap_builder import LightKernel, MarkedKernel, SystemModel
from .statespace import StateSpaceLayout


@dataclass(frozen=True)
class EconomicParams:
    """Rewards and costs; all nonnegative."""

    B: float                  # gross profit per step while operational
    c0: np.ndarray            # operating cost per internal phase (length m)
    cr1: np.ndarray           # corrective repair cost per repair phase
    cr2: np.ndarray           # preventive maintenance cost per phase
    H: float                  # idle repairperson cost per step
    C: float                  # downtime loss per step
    G: float                  # fixed cost per repairperson return
    fcr: float                # fixed cost per repairable failure
    fmi: float                # fixed cost per major inspection
    fnu: float                # cost of one new unit

    def __post_init__(self):
        for name in ("c0", "cr1", "cr2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        vals = np.concatenate([self.c0, self.cr1, self.cr2,
                               [self.B, self.H, self.C, self.G,
                                self.fcr, self.fmi, self.fnu]])
        if np.any(vals < 0):
            raise ModelError("NegativeEntry", "economic parameters must be nonnegative")


@dataclass
class CostVectors:
    """Reward/cost vectors over the flat state space.

    ``nc = idle + mc_cr + mc_pm``: the idle wage is carried separately so
    the task-cost vectors partition the facility cost without charging
    the wage twice in the profit total.
    """

    nr: np.ndarray        # net reward of the online unit (loss -C when down)
    nc: np.ndarray        # repair facility cost
    mc_cr: np.ndarray     # corrective-task part of nc
    mc_pm: np.ndarray     # preventive-task part of nc
    idle: np.ndarray      # idle-wage part of nc

    @property
    def c(self) -> np.ndarray:
        return self.nr - self.nc


def build_vectors(model: SystemModel, lay: StateSpaceLayout,
                  params: EconomicParams) -> CostVectors:
    """Assemble the per-state reward and cost vectors over the layout."""
    dims = lay.dims
    if params.c0.size != dims.m or params.cr1.size != dims.z1 or params.cr2.size != dims.z2:
        raise ModelError("DimensionMismatch",
                         "c0/cr1/cr2 lengths must match the model's phase orders")
    nr = np.zeros(lay.total)
    idle = np.zeros(lay.total)
    mc_cr = np.zeros(lay.total)
    mc_pm = np.zeros(lay.total)
    per_phase = params.B - params.c0
    for blk in lay.blocks:
        for q, off, d in zip(blk.orderings, blk.ord_offsets, blk.ord_dims):
            seg = slice(blk.offset + off, blk.offset + off + d)
            if blk.s == blk.k:
                nr[seg] = -params.C
            else:
                # phase order (i, j, u, ...): internal state slowest
                nr[seg] = np.repeat(per_phase, d // dims.m)
            if blk.mode == "nv":
                if blk.s == 0:
                    idle[seg] = params.H
                else:
                    cr = params.cr1 if q[0] == 1 else params.cr2
                    tgt = mc_cr if q[0] == 1 else mc_pm
                    # repair phase is the fastest coordinate
                    tgt[seg] = np.tile(cr, d // cr.size)
    return CostVectors(nr, idle + mc_cr + mc_pm, mc_cr, mc_pm, idle)


@dataclass
class ProfitBreakdown:
    phi_w: float              # expected reward flow of the online unit
    phi_cr: float             # corrective repair cost flow
    phi_pm: float             # preventive maintenance cost flow
    phi_idle: float           # idle wage flow
    new_units: float          # restart purchases
    repair_fixed: float       # per-repairable-failure charges
    inspection_fixed: float   # per-major-inspection charges
    return_fixed: float       # per-return charges
    phi: float                # net profit

    def as_dict(self) -> dict[str, float]:
        return {
            "phi_w": self.phi_w, "phi_cr": self.phi_cr, "phi_pm": self.phi_pm,
            "phi_idle": self.phi_idle, "new_units": self.new_units,
            "repair_fixed": self.repair_fixed,
            "inspection_fixed": self.inspection_fixed,
            "return_fixed": self.return_fixed, "phi": self.phi,
        }


def stationary_profits(kernel: MarkedKernel | LightKernel, vectors: CostVectors,
                       params: EconomicParams, pi: np.ndarray,
                       rates: dict[str, float] | None = None) -> ProfitBreakdown:
    """Per-step net profit in steady state.

    The one-off purchase of the initial fleet amortizes to zero per
    step, so only the restart rate carries the new-unit cost here.
    """
    if rates is None:
        rates = event_rates_stationary(kernel, pi)
    n = kernel.layout.n
    phi_w = float(pi @ vectors.nr)
    phi_cr = float(pi @ vectors.mc_cr)
    phi_pm = float(pi @ vectors.mc_pm)
    phi_idle = float(pi @ vectors.idle)
    new_units = rates["NS"] * n * params.fnu
    repair_fixed = rates["rep"] * params.fcr
    inspection_fixed = rates["mi"] * params.fmi
    return_fixed = rates["rb"] * params.G
    phi = (phi_w - phi_cr - phi_pm - phi_idle - new_units
           - repair_fixed - inspection_fixed - return_fixed)
    return ProfitBreakdown(phi_w, phi_cr, phi_pm, phi_idle, new_units,
                           repair_fixed, inspection_fixed, return_fixed, phi)


def transient_profits(kernel: MarkedKernel, vectors: CostVectors,
                      params: EconomicParams, path: TransientPath,
                      rates_cum: dict[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    """Cumulative net profit up to each step of a transient path.

    Includes the initial fleet purchase, so ``phi[0]`` starts at the
    first step's flows minus ``n * fnu``.
    """
    if rates_cum is None:
        rates_cum = event_rates_transient(kernel, path)
    n = kernel.layout.n
    P = path.probs
    phi_w = (P @ vectors.nr).cumsum()
    phi_cr = (P @ vectors.mc_cr).cumsum()
    phi_pm = (P @ vectors.mc_pm).cumsum()
    phi_idle = (P @ vectors.idle).cumsum()
    phi = (phi_w - phi_cr - phi_pm - phi_idle
           - (1.0 + rates_cum["NS"]) * n * params.fnu
           - rates_cum["rep"] * params.fcr
           - rates_cum["mi"] * params.fmi
           - rates_cum["rb"] * params.G)
    return {"phi_w": phi_w, "phi_cr": phi_cr, "phi_pm": phi_pm,
            "phi_idle": phi_idle, "phi": phi}
