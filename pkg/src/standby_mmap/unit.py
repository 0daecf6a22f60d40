"""One-step transition kernels of the online unit.

In each time step the operating unit experiences exactly one of four
event classes:

* ``O`` -- no event: it keeps operating (possibly degrading, possibly
  shock-modified, possibly inspected and found in minor damage);
* ``A`` -- repairable failure (internal or shock-induced);
* ``B`` -- an inspection observes major damage and sends the unit to
  preventive maintenance;
* ``C`` -- non-repairable failure (internal, shock-induced, or a shock
  that destroys the unit outright).

Each class has a kernel over the online-unit phase ``(i, j, u)`` --
internal state, shock-clock phase, inspection-clock phase.  The unprimed
kernels assume a cold standby immediately replaces a departing unit
(restart factors ``alpha`` and ``eta``); the ``last_unit`` variants drop
those factors because no substitute exists, which also shrinks the
column dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .ph import TOL, DiscretePH, Verdict, col, kron_all, ones, row, validate_ph


@dataclass(frozen=True)
class OnlineUnitModel:
    """Degradation, shock, and inspection model of the operating unit.

    ``T`` drives internal degradation among ``m`` states (the first
    ``m1`` minor, the rest major), with per-state repairable /
    non-repairable failure columns ``T_r0`` / ``T_nr0``.  Shocks arrive
    by the PH-renewal ``shock`` clock; a shock destroys the unit with
    probability ``omega0``, otherwise it remaps the internal state by
    ``W`` with failure columns ``W_r0`` / ``W_nr0``.  Inspections fire by
    the ``inspection`` clock.
    """

    alpha: np.ndarray
    T: np.ndarray
    T_r0: np.ndarray
    T_nr0: np.ndarray
    m1: int
    W: np.ndarray
    W_r0: np.ndarray
    W_nr0: np.ndarray
    omega0: float
    shock: DiscretePH
    inspection: DiscretePH

    def __post_init__(self):
        for name in ("alpha", "T_r0", "T_nr0", "W_r0", "W_nr0"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        for name in ("T", "W"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))

    @property
    def m(self) -> int:
        return self.alpha.size

    def validate(self, tol: float = 1e-9) -> Verdict:
        return validate_unit(self, tol)


def validate_unit(model: OnlineUnitModel, tol: float = 1e-9) -> Verdict:
    m = model.m
    for name in ("T", "W"):
        if getattr(model, name).shape != (m, m):
            return Verdict(False, "DimensionMismatch", f"{name} is not {m}x{m}")
    for name in ("T_r0", "T_nr0", "W_r0", "W_nr0"):
        if getattr(model, name).size != m:
            return Verdict(False, "DimensionMismatch", f"{name} has wrong length")
    arrays = [model.alpha, model.T, model.T_r0, model.T_nr0,
              model.W, model.W_r0, model.W_nr0]
    if any(np.any(a < -TOL) for a in arrays):
        return Verdict(False, "NegativeEntry", "negative probability in the unit model")
    if abs(model.alpha.sum() - 1.0) > tol:
        return Verdict(False, "InitialMassNotOne", f"alpha sums to {model.alpha.sum():.15g}")
    tot = model.T.sum(axis=1) + model.T_r0 + model.T_nr0
    if np.abs(tot - 1.0).max() > tol:
        bad = int(np.argmax(np.abs(tot - 1.0)))
        return Verdict(False, "RowSumExceedsOne",
                       f"T row {bad}: T e + T_r0 + T_nr0 sums to {tot[bad]:.15g}")
    tot = model.W.sum(axis=1) + model.W_r0 + model.W_nr0
    if np.abs(tot - 1.0).max() > tol:
        bad = int(np.argmax(np.abs(tot - 1.0)))
        return Verdict(False, "RowSumExceedsOne",
                       f"W row {bad}: W e + W_r0 + W_nr0 sums to {tot[bad]:.15g}")
    if not 1 <= model.m1 <= m:
        return Verdict(False, "InvalidMinorCount", f"m1={model.m1} outside 1..{m}")
    if not 0.0 <= model.omega0 <= 1.0:
        return Verdict(False, "NegativeEntry", f"omega0={model.omega0} outside [0,1]")
    for name in ("shock", "inspection"):
        # non-exiting clocks are allowed (an inspection clock that never
        # fires is how preventive maintenance is switched off)
        v = validate_ph(getattr(model, name), require_absorbing=False)
        if not v.ok:
            return Verdict(False, v.kind, f"{name}: {v.detail}")
    return Verdict(True)


def selectors(m: int, m1: int) -> tuple[np.ndarray, np.ndarray]:
    """0/1 diagonal selectors of the minor (first m1) and major internal states.

    ``m1 == m`` is allowed and makes the major selector empty, which
    disables preventive maintenance entirely.
    """
    if not 1 <= m1 <= m:
        raise ModelError("InvalidMinorCount", f"m1={m1} outside 1..{m}")
    d = np.zeros(m)
    d[:m1] = 1.0
    return np.diag(d), np.diag(1.0 - d)


@dataclass(frozen=True)
class EventKernels:
    """All per-step online-unit kernels of one model, built once."""

    o: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    a_last: np.ndarray
    b_last: np.ndarray
    c_last: np.ndarray
    reentry: np.ndarray       # theta: repaired unit goes online, t -> m*t*eps
    shock_step: np.ndarray    # L + L0 gamma: shock clock when no unit is online

    def pick(self, label: str, last_unit: bool) -> np.ndarray:
        if label == "O":
            return self.o
        key = label.lower() + ("_last" if last_unit else "")
        return getattr(self, key)


def build_kernels(model: OnlineUnitModel) -> EventKernels:
    """Assemble the eight event kernels and the re-entry row of a unit model."""
    v = validate_unit(model)
    v.raise_if_invalid(ModelError)
    m = model.m
    T, W = model.T, model.W
    alpha = row(model.alpha)
    Tr0, Tnr0 = col(model.T_r0), col(model.T_nr0)
    Wr0, Wnr0 = col(model.W_r0), col(model.W_nr0)
    w0 = model.omega0
    U1, U2 = selectors(m, model.m1)

    L = model.shock.S
    L0g = np.outer(model.shock.exit, model.shock.alpha)   # L0 gamma, t x t
    M = model.inspection.S
    eta = row(model.inspection.alpha)
    M0 = col(model.inspection.exit)
    M0eta = M0 @ eta
    em = col(ones(m))
    eeps = col(ones(model.inspection.order))

    noshock = L
    shock_ok = L0g * (1.0 - w0)   # shock arrives, unit survives the direct hit

    h_o = (kron_all(T, noshock) + kron_all(T @ W, shock_ok))
    h_o = kron_all(h_o, M) + kron_all(kron_all(U1 @ T, noshock)
                                      + kron_all(U1 @ T @ W, shock_ok), M0eta)

    rep = Tr0 @ alpha
    rep_shock = (Tr0 + T @ Wr0) @ alpha
    h_a = kron_all(rep, noshock, eeps @ eta) + kron_all(rep_shock, shock_ok, eeps @ eta)
    h_a_last = kron_all(Tr0, noshock, eeps) + kron_all(Tr0 + T @ Wr0, shock_ok, eeps)

    surv_int = col(T.sum(axis=1))           # e - T0: no internal failure
    surv_both = col((T @ W).sum(axis=1))    # T (e - W0): survives step plus shock remap
    h_b = kron_all(U2 @ surv_int @ alpha, noshock, M0eta) \
        + kron_all(U2 @ surv_both @ alpha, shock_ok, M0eta)
    h_b_last = kron_all(U2 @ surv_int, noshock, M0) \
        + kron_all(U2 @ surv_both, shock_ok, M0)

    nr = Tnr0 @ alpha
    nr_shock = (Tnr0 + T @ Wnr0) @ alpha
    total = (em @ alpha)
    h_c = kron_all(nr, noshock, eeps @ eta) + kron_all(nr_shock, shock_ok, eeps @ eta) \
        + kron_all(total, L0g * w0, eeps @ eta)
    h_c_last = kron_all(Tnr0, noshock, eeps) + kron_all(Tnr0 + T @ Wnr0, shock_ok, eeps) \
        + kron_all(em, L0g * w0, eeps)

    shock_step = L + L0g
    theta = kron_all(alpha, shock_step, eta)
    return EventKernels(h_o, h_a, h_b, h_c, h_a_last, h_b_last, h_c_last,
                        theta, shock_step)


def event_kernel(model: OnlineUnitModel, label: str, last_unit: bool = False) -> np.ndarray:
    """Kernel of one event class; ``last_unit`` selects the no-substitute variant.

    ``O`` has no primed variant (the unit stays online either way).
    """
    if label not in ("O", "A", "B", "C"):
        raise ModelError("UnknownLabel", f"label {label!r} not one of O, A, B, C")
    return build_kernels(model).pick(label, last_unit and label != "O")
