"""Transient and stationary distributions and all derived performance measures.

The stationary solver does the work twice on purpose: once by the
level-censoring recursion that exploits the block skip-free-downward
structure over the macro-states ``U^n .. U^1`` (with the restart block
closing the loop from ``U^1`` back to ``U^n``), and once by a direct
linear solve of the global balance equations restricted to the states
reachable from the initial distribution.  The two must agree to 1e-10 in
the sup norm; a disagreement signals an assembly bug, not roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Reducible, RecursionDirectMismatch, NotAbsorbing
from .mmap_builder import LABELS, MarkedKernel, LightKernel, SystemModel
from .ph import kron_all, renewal_stationary, row
from .statespace import StateSpaceLayout

REACH_CUTOFF = 1e-15

# event groups reported alongside the raw marks
GROUPS = {
    "rep": ("A", "AD"),          # repairable failures
    "mi": ("B", "BD"),           # major inspections
    "nr": ("C", "CD"),           # non-repairable failures that keep the system
    "rejoined": ("D", "AD", "BD", "CD"),   # returns that stick
    "NS": ("NS",),               # system restarts
}


def initial_distribution(model: SystemModel, lay: StateSpaceLayout) -> np.ndarray:
    """All units new, repairperson on vacation, shock clock stationary."""
    gamma_st = renewal_stationary(model.unit.shock)
    phi_block = kron_all(row(model.unit.alpha), row(gamma_st),
                         row(model.unit.inspection.alpha),
                         row(model.vacation.alpha)).ravel()
    phi = np.zeros(lay.total)
    blk = lay.block(model.n, 0, "v")
    phi[blk.offset:blk.offset + blk.dim] = phi_block
    return phi


@dataclass
class TransientPath:
    """Distribution vectors p^0 .. p^h of the chain."""

    layout: StateSpaceLayout
    probs: np.ndarray          # (h+1, total)

    @property
    def horizon(self) -> int:
        return self.probs.shape[0] - 1

    def at(self, nu: int) -> np.ndarray:
        return self.probs[nu]


def transient(kernel: MarkedKernel, horizon: int,
              phi: np.ndarray | None = None,
              model: SystemModel | None = None) -> TransientPath:
    """p^nu = phi D^nu by iterated vector-matrix products."""
    lay = kernel.layout
    if phi is None:
        phi = initial_distribution(model, lay)
    D = kernel.D
    out = np.empty((horizon + 1, lay.total))
    out[0] = phi
    p = phi
    for nu in range(1, horizon + 1):
        p = p @ D
        out[nu] = p
    return TransientPath(lay, out)


# ---------------------------------------------------------------------------
# stationary distribution
# ---------------------------------------------------------------------------

@dataclass
class StationaryResult:
    layout: StateSpaceLayout
    pi: np.ndarray
    macro: dict[int, float]              # mass per U^k
    balance_residual: float
    recursion_direct_gap: float | None   # None when only one solver ran
    reachable: np.ndarray                # boolean mask
    recursion_used: bool

    def block_mass(self, k: int, s: int, mode: str) -> float:
        blk = self.layout.block(k, s, mode)
        return float(self.pi[blk.slice()].sum())


def _reachable_mask(D: np.ndarray, phi: np.ndarray) -> np.ndarray:
    adj = D > REACH_CUTOFF
    reach = phi > 0
    frontier = reach.copy()
    while frontier.any():
        nxt = adj[frontier].any(axis=0) & ~reach
        reach |= nxt
        frontier = nxt
    return reach


def _direct_solve(D: np.ndarray, reach: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(reach)
    A = D[np.ix_(idx, idx)]
    n = idx.size
    M = A.T - np.eye(n)
    M[0, :] = 1.0
    b = np.zeros(n)
    b[0] = 1.0
    try:
        x = np.linalg.solve(M, b)
    except np.linalg.LinAlgError:
        raise Reducible("direct balance solve is singular on the reachable set") from None
    if np.any(x < -1e-9):
        raise Reducible("direct solve produced negative probabilities")
    x = np.clip(x, 0.0, None)
    x /= x.sum()
    pi = np.zeros(D.shape[0])
    pi[idx] = x
    return pi


def _censoring_solve(kernel) -> np.ndarray:
    """Stationary vector via the macro-level censoring recursion.

    pi_j = pi_1 R_j with R_n = G_{1,n}, R_j = R_{j+1} G_{j+1,j} where
    G_{i,j} = D_{i,j} (I - D_{j,j})^{-1}; pi_1 solves the remaining
    balance block with one column swapped for the normalization.
    """
    lay = kernel.layout
    D = kernel.D
    n = lay.n
    sl = {k: lay.macro_slice(k) for k in range(1, n + 1)}
    if n == 1:
        raise Reducible("censoring recursion needs at least two macro levels")

    def G(i, j):
        Dij = D[sl[i], sl[j]]
        Djj = D[sl[j], sl[j]]
        eye = np.eye(Djj.shape[0])
        return np.linalg.solve((eye - Djj).T, Dij.T).T

    Rj = {n: G(1, n)}
    for j in range(n - 1, 1, -1):
        Rj[j] = Rj[j + 1] @ G(j + 1, j)
    d1 = sl[1].stop - sl[1].start
    D11 = D[sl[1], sl[1]]
    D21 = D[sl[2], sl[1]]
    B = np.eye(d1) - D11 - Rj[2] @ D21
    w = np.ones(d1)
    for j in range(2, n + 1):
        w += Rj[j] @ np.ones(sl[j].stop - sl[j].start)
    M = B.copy()
    M[:, 0] = w
    rhs = np.zeros(d1)
    rhs[0] = 1.0
    try:
        pi1 = np.linalg.solve(M.T, rhs)
    except np.linalg.LinAlgError:
        raise Reducible("boundary balance system is singular") from None
    pi = np.zeros(lay.total)
    pi[sl[1]] = pi1
    for j in range(2, n + 1):
        pi[sl[j]] = pi1 @ Rj[j]
    if np.any(pi < -1e-9):
        raise Reducible("censoring recursion produced negative probabilities")
    pi = np.clip(pi, 0.0, None)
    # a numerically failed recursion (near-singular level blocks, e.g. a
    # model whose chain cannot leave a level) surfaces as a bad residual
    resid = np.abs(pi @ D - pi).max()
    if not resid <= 1e-8:
        raise Reducible(f"censoring recursion residual {resid:.3g}")
    return pi


def stationary(kernel: MarkedKernel, model: SystemModel | None = None,
               phi: np.ndarray | None = None,
               cross_check: bool = True) -> StationaryResult:
    """Stationary distribution by censoring recursion, cross-checked directly.

    Falls back to the direct solve alone when the recursion is not
    applicable (single macro level, or a level the chain cannot leave,
    as in failure-free models).
    """
    lay = kernel.layout
    D = kernel.D
    if phi is None:
        phi = initial_distribution(model, lay)
    reach = _reachable_mask(D, phi)

    pi_rec = None
    recursion_used = False
    try:
        pi_rec = _censoring_solve(kernel)
        recursion_used = True
    except (Reducible, np.linalg.LinAlgError):
        pi_rec = None

    if pi_rec is not None and pi_rec[~reach].sum() > 1e-12:
        # the recursion found a stationary vector of an unreachable closed
        # class (reducible chain, e.g. failure-free models); only the
        # reachable class counts
        pi_rec = None
        recursion_used = False

    gap = None
    if pi_rec is not None and not cross_check:
        pi = pi_rec
    else:
        pi_dir = _direct_solve(D, reach)
        if pi_rec is not None:
            gap = float(np.abs(pi_rec - pi_dir).max())
            if gap > 1e-10:
                raise RecursionDirectMismatch(
                    f"censoring vs direct stationary solve differ by {gap:.3g}")
            pi = pi_rec
        else:
            pi = pi_dir

    resid = float(np.abs(pi @ D - pi).max())
    macro = {k: float(pi[lay.macro_slice(k)].sum()) for k in range(1, lay.n + 1)}
    return StationaryResult(lay, pi, macro, resid, gap, reach, recursion_used)


def stationary_fast(D: np.ndarray) -> np.ndarray:
    """Sparse-LU stationary solve of the global balance equations.

    Used in sweep inner loops where the dense double solve would
    dominate the runtime; argmax points are re-verified with
    :func:`stationary`.
    """
    from scipy.sparse import csc_matrix
    from scipy.sparse.linalg import splu

    n = D.shape[0]
    A = D.T - np.eye(n)
    A[0, :] = 1.0
    b = np.zeros(n)
    b[0] = 1.0
    try:
        lu = splu(csc_matrix(A))
        x = lu.solve(b)
    except RuntimeError:
        raise Reducible("sparse balance solve is singular") from None
    if np.any(x < -1e-8):
        raise Reducible("sparse solve produced negative probabilities")
    x = np.clip(x, 0.0, None)
    return x / x.sum()


# ---------------------------------------------------------------------------
# measures over a distribution
# ---------------------------------------------------------------------------

def _down_mask(lay: StateSpaceLayout) -> np.ndarray:
    """Indicator of full-failure states (every remaining unit in the facility)."""
    mask = np.zeros(lay.total, dtype=bool)
    for blk in lay.blocks:
        if blk.s == blk.k:
            mask[blk.slice()] = True
    return mask


def availability(lay: StateSpaceLayout, dist: np.ndarray) -> float:
    """Probability that at least one unit is operational."""
    return float(1.0 - dist @ _down_mask(lay))


def availability_series(lay: StateSpaceLayout, path: TransientPath) -> np.ndarray:
    return 1.0 - path.probs @ _down_mask(lay)


def repairperson_proportions(lay: StateSpaceLayout, pi: np.ndarray):
    """(at workplace, on vacation, working, idle) time fractions."""
    nv = work = 0.0
    for blk in lay.blocks:
        if blk.mode == "nv":
            mass = float(pi[blk.slice()].sum())
            nv += mass
            if blk.s >= 1:
                work += mass
    return nv, 1.0 - nv, work, nv - work


def mean_times_stationary(lay: StateSpaceLayout, pi: np.ndarray):
    """Per-step occupancies: psi[(k,s)], psi_k[k], and the operational mass."""
    psi = {}
    for blk in lay.blocks:
        key = (blk.k, blk.s)
        psi[key] = psi.get(key, 0.0) + float(pi[blk.slice()].sum())
    psi_k = {}
    for (k, s), v in psi.items():
        psi_k[k] = psi_k.get(k, 0.0) + v
    mu_op = sum(v for (k, s), v in psi.items() if s <= k - 1)
    return psi, psi_k, mu_op


def mean_times_transient(lay: StateSpaceLayout, path: TransientPath):
    """Cumulative versions of the occupancy measures up to the horizon."""
    psi = {}
    for blk in lay.blocks:
        key = (blk.k, blk.s)
        series = path.probs[:, blk.slice()].sum(axis=1).cumsum()
        psi[key] = psi.get(key, 0.0) + series
    psi_k = {}
    for (k, s), v in psi.items():
        psi_k[k] = psi_k.get(k, 0.0) + v
    mu_op = sum(v for (k, s), v in psi.items() if s <= k - 1)
    return psi, psi_k, mu_op


@dataclass
class ReplacementResult:
    reliability: np.ndarray   # R(0) .. R(h)
    mean: float


def replacement_time(kernel: MarkedKernel, phi: np.ndarray | None = None,
                     model: SystemModel | None = None,
                     horizon: int = 1000) -> ReplacementResult:
    """Time until the whole fleet has been lost, as a phase-type law.

    Reliability R(nu) = phi D'^nu e and mean phi (I - D')^{-1} e, where
    D' censors the restart transitions.
    """
    lay = kernel.layout
    if phi is None:
        phi = initial_distribution(model, lay)
    Dp = kernel.D_prime
    if not kernel.mats["NS"].any():
        raise NotAbsorbing("restart matrix is identically zero; replacement never occurs")
    rel = np.empty(horizon + 1)
    p = phi.copy()
    rel[0] = p.sum()
    for nu in range(1, horizon + 1):
        p = p @ Dp
        rel[nu] = p.sum()
    try:
        y = np.linalg.solve(np.eye(lay.total) - Dp, np.ones(lay.total))
    except np.linalg.LinAlgError:
        raise NotAbsorbing("I - D' is singular") from None
    return ReplacementResult(rel, float(phi @ y))


def event_rates_stationary(kernel: MarkedKernel | LightKernel,
                           pi: np.ndarray) -> dict[str, float]:
    """Per-step expected counts of each mark, the groups, and returns."""
    if isinstance(kernel, LightKernel):
        per = {lab: float(pi @ kernel.rate[lab]) for lab in LABELS}
        rates = dict(per)
        rates["rb"] = float(pi @ kernel.q_rate)
    else:
        per = {lab: float(pi @ kernel.mats[lab].sum(axis=1)) for lab in LABELS}
        rates = dict(per)
        rates["rb"] = float(pi @ kernel.Q.sum(axis=1))
    for name, labs in GROUPS.items():
        rates[name] = sum(per[lab] for lab in labs)
    return rates


def event_rates_transient(kernel: MarkedKernel, path: TransientPath) -> dict[str, np.ndarray]:
    """Cumulative expected counts Lambda^Y(v) = sum_{u<=v} p^{u-1} D^Y e."""
    out = {}
    pre = path.probs[:-1]    # p^0 .. p^{h-1}
    for lab in LABELS:
        w = kernel.mats[lab].sum(axis=1)
        out[lab] = np.concatenate([[0.0], (pre @ w).cumsum()])
    w = kernel.Q.sum(axis=1)
    out["rb"] = np.concatenate([[0.0], (pre @ w).cumsum()])
    for name, labs in GROUPS.items():
        out[name] = sum(out[lab] for lab in labs)
    return out
