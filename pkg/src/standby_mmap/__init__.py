"""Cold-standby fleet modeling with a vacationing repairperson.

Builds the discrete-time marked-arrival Markov kernel of a multi-state
cold-standby system with unit losses, preventive maintenance, and a
multiple-vacation repair policy; computes transient, stationary,
reliability and economic measures; optimizes the vacation policy; and
cross-checks everything against an embedded Monte Carlo simulator.
"""

from .economics import CostVectors, EconomicParams, build_vectors, stationary_profits
from .errors import ModelError
from .measures import (availability, event_rates_stationary, initial_distribution,
                       replacement_time, repairperson_proportions, stationary,
                       transient)
from .mmap_builder import LABELS, MarkedKernel, SystemModel, build, build_Q
from .optimize import SweepSpec, erlang_refined_sweep, sweep
from .ph import DiscretePH, erlang2_ph, geometric_ph, kron, ph_mean, validate_ph
from .simulate import SimConfig, SimReport, simulate
from .statespace import FactorDims, MacroStateId, StateSpaceLayout, layout
from .unit import OnlineUnitModel, event_kernel, selectors

__version__ = "0.1.0"

__all__ = [
    "CostVectors", "DiscretePH", "EconomicParams", "FactorDims", "LABELS",
    "MacroStateId", "MarkedKernel", "ModelError", "OnlineUnitModel",
    "SimConfig", "SimReport", "StateSpaceLayout", "SweepSpec", "SystemModel",
    "availability", "build", "build_Q", "build_vectors", "erlang2_ph",
    "erlang_refined_sweep", "event_kernel", "event_rates_stationary",
    "geometric_ph", "initial_distribution", "kron", "layout", "ph_mean",
    "replacement_time", "repairperson_proportions", "selectors", "simulate",
    "stationary", "stationary_profits", "sweep", "transient", "validate_ph",
]
