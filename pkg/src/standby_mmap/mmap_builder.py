"""Assembly of the marked one-step transition matrices.

The chain's one-step kernel splits by event mark into nine matrices:

* ``O`` no event,
* ``A`` repairable failure, ``B`` major inspection, ``C`` non-repairable
  failure (each without a repairperson return),
* ``D`` the repairperson's vacation ends and he stays (no unit event),
* ``AD`` / ``BD`` / ``CD`` a unit event coinciding with a return that
  sticks,
* ``NS`` the last unit fails non-repairably and a fresh n-unit system
  starts.

Their sum ``D`` is stochastic; dropping ``NS`` gives the replacement-
censored kernel ``D'``.  A tenth matrix ``Q`` counts every return of the
repairperson to the workplace, whether he stays or immediately begins
another vacation: it collects the vacation-end-and-restart part of each
``O/A/B/C/NS`` block plus all of ``D/AD/BD/CD``.

Block bookkeeping conventions (head = unit in service, appended = newly
arrived unit at the queue tail):

* a service completion pops the head; the next queued unit enters
  service with its type's initial repair vector (FIFO);
* after a completion that leaves R units operational the repairperson
  starts a fresh vacation;
* a vacation naturally ends each step with the exit mass of the vacation
  phase; the repairperson stays only if fewer than R units are
  operational after the step's unit event, otherwise a new vacation
  period begins immediately;
* when a non-repairable failure drops the number of units below R the
  repairperson interrupts the vacation and returns regardless of the
  vacation phase;
* with no unit online (all in the facility) only the shock clock runs,
  and a completed repair puts the repaired unit online with a fresh
  internal state and inspection clock.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import LayoutMismatch, ModelError, NonStochasticResult
from .ph import DiscretePH, Verdict, col, kron_all, row, validate_ph
from .statespace import FactorDims, StateSpaceLayout, layout as make_layout
from .unit import OnlineUnitModel, build_kernels, validate_unit

LABELS = ("O", "A", "B", "C", "D", "AD", "BD", "CD", "NS")


@dataclass(frozen=True)
class SystemModel:
    """Fleet model: online-unit model plus repair, maintenance and vacation clocks."""

    unit: OnlineUnitModel
    repair: DiscretePH        # corrective repair (type 1)
    maintenance: DiscretePH   # preventive maintenance (type 2)
    vacation: DiscretePH
    n: int
    R: int

    def validate(self) -> Verdict:
        v = validate_unit(self.unit)
        if not v.ok:
            return v
        for name in ("repair", "maintenance", "vacation"):
            v = validate_ph(getattr(self, name), require_absorbing=False)
            if not v.ok:
                return Verdict(False, v.kind, f"{name}: {v.detail}")
        if not 1 <= self.R <= self.n:
            return Verdict(False, "InvalidThreshold",
                           f"R={self.R} outside 1..{self.n}")
        return Verdict(True)

    @property
    def dims(self) -> FactorDims:
        return FactorDims(m=self.unit.m, t=self.unit.shock.order,
                          eps=self.unit.inspection.order,
                          ups=self.vacation.order,
                          z1=self.repair.order, z2=self.maintenance.order)

    def make_layout(self) -> StateSpaceLayout:
        return make_layout(self.n, self.R, self.dims)


@dataclass
class MarkedKernel:
    """The nine event-marked matrices plus the return-counting matrix Q."""

    layout: StateSpaceLayout
    mats: dict[str, np.ndarray]
    Q: np.ndarray

    def __getitem__(self, label: str) -> np.ndarray:
        return self.mats[label]

    @cached_property
    def D(self) -> np.ndarray:
        """Full stochastic one-step kernel (sum over all marks)."""
        out = np.zeros_like(self.mats["O"])
        for m in self.mats.values():
            out += m
        return out

    @cached_property
    def D_prime(self) -> np.ndarray:
        """Replacement-censored kernel: everything except system restarts."""
        return self.D - self.mats["NS"]

    def dump_csv(self, path, cutoff: float = 0.0):
        """Per-label nonzero triplets (label, row, col, value)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "row", "col", "value"])
            for lab in LABELS:
                rows, cols = np.nonzero(self.mats[lab] > cutoff)
                for r, c in zip(rows, cols):
                    w.writerow([lab, int(r), int(c), f"{self.mats[lab][r, c]:.10g}"])


@dataclass
class LightKernel:
    """Sweep-friendly kernel: the total matrix plus per-mark exit-rate vectors.

    ``rate[Y][i]`` is the probability that a step from state i carries
    mark Y, i.e. the i-th row sum of the mark's matrix; ``q_rate`` is the
    row-sum vector of Q.  Enough for every stationary measure, at a
    fraction of the memory of the full nine-matrix kernel.
    """

    layout: StateSpaceLayout
    D: np.ndarray
    rate: dict[str, np.ndarray]
    q_rate: np.ndarray


def build(model: SystemModel, lay: StateSpaceLayout | None = None,
          check: bool = True, collect: str = "full"):
    """Assemble the marked matrices and Q over the model's state space.

    ``check`` verifies the row sums of the assembled total kernel; a
    failure signals a construction bug or an inconsistent model.
    ``collect="light"`` returns a :class:`LightKernel` instead of the
    full per-mark matrices.
    """
    verdict = model.validate()
    verdict.raise_if_invalid(ModelError)
    if lay is None:
        lay = model.make_layout()
    elif (lay.n, lay.R, lay.dims) != (model.n, model.R, model.dims):
        raise LayoutMismatch("layout was built from different model dimensions")
    if collect not in ("full", "light"):
        raise ValueError(f"collect={collect!r}")

    ker = build_kernels(model.unit)
    H_O, H_C = ker.o, ker.c
    dims = lay.dims
    n, R = model.n, model.R

    S = {1: model.repair.S, 2: model.maintenance.S}
    S0 = {1: col(model.repair.exit), 2: col(model.maintenance.exit)}
    beta = {1: row(model.repair.alpha), 2: row(model.maintenance.alpha)}
    V = model.vacation.S
    V0 = col(model.vacation.exit)
    vrow = row(model.vacation.alpha)
    V0v = V0 @ vrow
    e_ups = col(np.ones(dims.ups))

    full = collect == "full"
    if full:
        mats = {lab: np.zeros((lay.total, lay.total)) for lab in LABELS}
        Q = np.zeros((lay.total, lay.total))
    else:
        total_mat = np.zeros((lay.total, lay.total))
        rate = {lab: np.zeros(lay.total) for lab in LABELS}
        q_rate = np.zeros(lay.total)
    memo: dict = {}

    def K(key, fn):
        if key not in memo:
            memo[key] = fn()
        return memo[key]

    def put(lab, src, src_q, dst, dst_q, mat, qmat=None):
        bs = lay.block(*src)
        bd = lay.block(*dst)
        qi_s = bs.ordering_index(src_q)
        qi_d = bd.ordering_index(dst_q)
        if mat.shape != (bs.ord_dims[qi_s], bd.ord_dims[qi_d]):
            raise LayoutMismatch(
                f"{lab} write {src}{src_q} -> {dst}{dst_q}: block is "
                f"{(bs.ord_dims[qi_s], bd.ord_dims[qi_d])}, got {mat.shape}")
        r0 = bs.offset + bs.ord_offsets[qi_s]
        c0 = bd.offset + bd.ord_offsets[qi_d]
        if full:
            mats[lab][r0:r0 + mat.shape[0], c0:c0 + mat.shape[1]] += mat
            if qmat is not None:
                Q[r0:r0 + qmat.shape[0], c0:c0 + qmat.shape[1]] += qmat
        else:
            total_mat[r0:r0 + mat.shape[0], c0:c0 + mat.shape[1]] += mat
            key = ("rs", id(mat))
            rs = K(key, lambda: mat.sum(axis=1))
            rate[lab][r0:r0 + mat.shape[0]] += rs
            if qmat is not None:
                qs = K(("rs", id(qmat)), lambda: qmat.sum(axis=1))
                q_rate[r0:r0 + qmat.shape[0]] += qs

    unit_events = (("A", ker.a, ker.a_last, 1), ("B", ker.b, ker.b_last, 2))

    for k in range(n, 0, -1):
        vac = k >= R
        N = k - R + 1

        if vac:
            for s in range(0, k + 1):
                blk = lay.block(k, s, "v")
                for q in blk.orderings:
                    head = q[0] if q else None
                    if s == k:
                        # only the shock clock runs; a vacation end always sticks
                        put("O", (k, s, "v"), q, (k, s, "v"), q,
                            K(("ovk",), lambda: kron_all(ker.shock_step, V)))
                        m_d = K(("dk", head),
                                lambda: kron_all(ker.shock_step, V0, beta[head]))
                        put("D", (k, s, "v"), q, (k, s, "nv"), q, m_d, qmat=m_d)
                        continue
                    restart = s < N
                    m_o = K(("ov", restart),
                            lambda: kron_all(H_O, V + V0v if restart else V))
                    m_oq = K(("ovq",), lambda: kron_all(H_O, V0v)) if restart else None
                    put("O", (k, s, "v"), q, (k, s, "v"), q, m_o, qmat=m_oq)
                    if s >= N:
                        m_d = K(("dv", head), lambda: kron_all(H_O, V0, beta[head]))
                        put("D", (k, s, "v"), q, (k, s, "nv"), q, m_d, qmat=m_d)
                    for lab, H, H_last, typ in unit_events:
                        Hx = H_last if s == k - 1 else H
                        re2 = s + 1 < N
                        m_ev = K((lab, "v", s == k - 1, re2),
                                 lambda: kron_all(Hx, V + V0v if re2 else V))
                        m_evq = K((lab, "vq", s == k - 1),
                                  lambda: kron_all(Hx, V0v)) if re2 else None
                        put(lab, (k, s, "v"), q, (k, s + 1, "v"), q + (typ,),
                            m_ev, qmat=m_evq)
                        if s + 1 >= N:
                            hd = head if s >= 1 else typ
                            m_rd = K((lab, "rd", s == k - 1, hd),
                                     lambda: kron_all(Hx, V0, beta[hd]))
                            put(lab + "D", (k, s, "v"), q, (k, s + 1, "nv"),
                                q + (typ,), m_rd, qmat=m_rd)
                    if k == 1:
                        # last unit fails while its repairperson is on vacation
                        m_ns = K(("ns_v",), lambda: kron_all(H_C, e_ups @ vrow))
                        m_nsq = K(("ns_vq",), lambda: kron_all(H_C, V0v))
                        put("NS", (1, 0, "v"), q, (n, 0, "v"), (), m_ns, qmat=m_nsq)
                        continue
                    Hx = ker.c_last if s == k - 1 else H_C
                    if k - 1 >= R:
                        re3 = s < N - 1
                        m_c = K(("c", "v", s == k - 1, re3),
                                lambda: kron_all(Hx, V + V0v if re3 else V))
                        m_cq = K(("c", "vq", s == k - 1),
                                 lambda: kron_all(Hx, V0v)) if re3 else None
                        put("C", (k, s, "v"), q, (k - 1, s, "v"), q, m_c, qmat=m_cq)
                        if s >= N - 1:
                            m_cd = K(("cd", s == k - 1, head),
                                     lambda: kron_all(Hx, V0, beta[head]))
                            put("CD", (k, s, "v"), q, (k - 1, s, "nv"), q,
                                m_cd, qmat=m_cd)
                    else:
                        # k == R: the loss leaves fewer than R units, the
                        # vacation is interrupted whatever its phase
                        if s == 0:
                            m_cd = K(("cdi0", s == k - 1),
                                     lambda: kron_all(Hx, e_ups))
                        else:
                            m_cd = K(("cdi", s == k - 1, head),
                                     lambda: kron_all(Hx, e_ups, beta[head]))
                        put("CD", (k, s, "v"), q, (k - 1, s, "nv"), q,
                            m_cd, qmat=m_cd)

        for s in range((N if vac else 0), k + 1):
            blk = lay.block(k, s, "nv")
            for q in blk.orderings:
                head = q[0] if q else None
                if s == 0:
                    put("O", (k, 0, "nv"), q, (k, 0, "nv"), q, H_O)
                    for lab, H, H_last, typ in unit_events:
                        Hx = H_last if k == 1 else H
                        m_ev = K((lab, "nv0", k == 1),
                                 lambda: kron_all(Hx, beta[typ]))
                        put(lab, (k, 0, "nv"), q, (k, 1, "nv"), (typ,), m_ev)
                    if k == 1:
                        m_ns = K(("ns_nv",), lambda: kron_all(H_C, vrow))
                        put("NS", (1, 0, "nv"), q, (n, 0, "v"), (), m_ns)
                    else:
                        put("C", (k, 0, "nv"), q, (k - 1, 0, "nv"), (), H_C)
                elif s < k:
                    put("O", (k, s, "nv"), q, (k, s, "nv"), q,
                        K(("onv", head), lambda: kron_all(H_O, S[head])))
                    if vac and s - 1 == N - 1:
                        # completion leaves R operational: vacation starts
                        m_cv = K(("ovac", head),
                                 lambda: kron_all(H_O, S0[head], vrow))
                        put("O", (k, s, "nv"), q, (k, s - 1, "v"), q[1:], m_cv)
                    elif s == 1:
                        put("O", (k, 1, "nv"), q, (k, 0, "nv"), (),
                            K(("oc1", head), lambda: kron_all(H_O, S0[head])))
                    else:
                        put("O", (k, s, "nv"), q, (k, s - 1, "nv"), q[1:],
                            K(("oc", head, q[1]),
                              lambda: kron_all(H_O, S0[head], beta[q[1]])))
                    for lab, H, H_last, typ in unit_events:
                        Hx = H_last if s == k - 1 else H
                        put(lab, (k, s, "nv"), q, (k, s + 1, "nv"), q + (typ,),
                            K((lab, "arr", s == k - 1, head),
                              lambda: kron_all(Hx, S[head])))
                        newq = q[1:] + (typ,)
                        put(lab, (k, s, "nv"), q, (k, s, "nv"), newq,
                            K((lab, "ca", head, newq[0]),
                              lambda: kron_all(H, S0[head], beta[newq[0]])))
                    Hx = ker.c_last if s == k - 1 else H_C
                    put("C", (k, s, "nv"), q, (k - 1, s, "nv"), q,
                        K(("c", "cont", s == k - 1, head),
                          lambda: kron_all(Hx, S[head])))
                    if s == 1:
                        put("C", (k, 1, "nv"), q, (k - 1, 0, "nv"), (),
                            K(("c", "cc1", head), lambda: kron_all(H_C, S0[head])))
                    else:
                        put("C", (k, s, "nv"), q, (k - 1, s - 1, "nv"), q[1:],
                            K(("c", "cc", head, q[1]),
                              lambda: kron_all(H_C, S0[head], beta[q[1]])))
                else:
                    put("O", (k, k, "nv"), q, (k, k, "nv"), q,
                        K(("onvk", head), lambda: kron_all(ker.shock_step, S[head])))
                    if vac and k - 1 == N - 1:
                        # R == 1: the freshly repaired unit goes online and
                        # the repairperson leaves
                        m_cv = K(("tvac", head),
                                 lambda: kron_all(ker.reentry, S0[head], vrow))
                        put("O", (k, k, "nv"), q, (k, k - 1, "v"), q[1:], m_cv)
                    elif k == 1:
                        put("O", (1, 1, "nv"), q, (1, 0, "nv"), (),
                            K(("tc1", head), lambda: kron_all(ker.reentry, S0[head])))
                    else:
                        put("O", (k, k, "nv"), q, (k, k - 1, "nv"), q[1:],
                            K(("tc", head, q[1]),
                              lambda: kron_all(ker.reentry, S0[head], beta[q[1]])))

    if full:
        kernel = MarkedKernel(lay, mats, Q)
        rowsums = kernel.D.sum(axis=1)
    else:
        kernel = LightKernel(lay, total_mat, rate, q_rate)
        rowsums = total_mat.sum(axis=1)
    if check:
        gap = np.abs(rowsums - 1.0).max()
        if gap > 1e-10:
            bad = int(np.argmax(np.abs(rowsums - 1.0)))
            raise NonStochasticResult(
                f"row {bad} of the assembled kernel sums to {rowsums[bad]:.12g}")
    return kernel


def build_Q(model: SystemModel, lay: StateSpaceLayout, kernel: MarkedKernel) -> np.ndarray:
    """Return-counting matrix of a built kernel (assembled alongside the marks)."""
    if kernel.layout is not lay and kernel.layout.total != lay.total:
        raise LayoutMismatch("kernel was built over a different layout")
    return kernel.Q
