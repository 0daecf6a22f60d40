"""Discrete phase-type distributions and the small matrix toolkit.

A discrete phase-type (PH) random variable is the absorption time of a
finite Markov chain with one absorbing state.  It is represented by an
initial probability row vector ``alpha`` and a square sub-stochastic
matrix ``S`` of per-step transition probabilities among the transient
phases; the exit (absorption) column is ``S0 = e - S e``.

Every duration in the system model lives in this shape: operating time,
inter-shock time, inter-inspection time, vacation time, corrective repair
and preventive maintenance times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonUniqueStationary, NotAbsorbing, PhInvalid

TOL = 1e-12


def row(x) -> np.ndarray:
    """1 x n view of a vector."""
    return np.asarray(x, dtype=float).reshape(1, -1)


def col(x) -> np.ndarray:
    """n x 1 view of a vector."""
    return np.asarray(x, dtype=float).reshape(-1, 1)


def ones(n: int) -> np.ndarray:
    return np.ones(n, dtype=float)


def kron(a, b) -> np.ndarray:
    """Kronecker product, row-major block convention: block (i,j) is a[i,j]*b."""
    return np.kron(np.atleast_2d(np.asarray(a, dtype=float)),
                   np.atleast_2d(np.asarray(b, dtype=float)))


def kron_all(*mats) -> np.ndarray:
    out = np.atleast_2d(np.asarray(mats[0], dtype=float))
    for m in mats[1:]:
        out = np.kron(out, np.atleast_2d(np.asarray(m, dtype=float)))
    return out


def exit_vector(a) -> np.ndarray:
    """Exit column ``e - A e`` of a sub-stochastic matrix.

    Raises
    ------
    ModelError
        ``RowSumExceedsOne`` if some row of ``a`` sums above 1.
    """
    a = np.asarray(a, dtype=float)
    sums = a.sum(axis=1)
    if np.any(sums > 1.0 + TOL):
        bad = int(np.argmax(sums))
        raise PhInvalid("RowSumExceedsOne", f"row {bad} sums to {sums[bad]:.15g}")
    return 1.0 - sums


@dataclass(frozen=True)
class Verdict:
    """Outcome of a validation pass: ``ok`` or the first violated invariant."""

    ok: bool
    kind: str | None = None
    detail: str | None = None

    def raise_if_invalid(self, exc_cls=PhInvalid):
        if not self.ok:
            raise exc_cls(self.kind, self.detail or "")


@dataclass(frozen=True)
class DiscretePH:
    """Discrete phase-type representation (initial row vector, sub-stochastic matrix)."""

    alpha: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float).reshape(-1))
        object.__setattr__(self, "S", np.atleast_2d(np.asarray(self.S, dtype=float)))

    @property
    def order(self) -> int:
        return self.alpha.size

    @property
    def exit(self) -> np.ndarray:
        """Absorption column S0 = e - S e."""
        return 1.0 - self.S.sum(axis=1)

    def validate(self, tol: float = TOL) -> Verdict:
        return validate_ph(self, tol)

    def mean(self) -> float:
        return ph_mean(self)


def validate_ph(ph: DiscretePH, tol: float = TOL, require_absorbing: bool = True) -> Verdict:
    """Check all DiscretePH invariants, reporting the first violation.

    The invariants, in check order: square shape and matching lengths;
    entries of ``alpha`` and ``S`` in [0,1]; ``alpha`` sums to 1; row sums
    of ``S`` at most 1; absorption certain, i.e. ``I - S`` invertible with
    elementwise nonnegative inverse.

    ``require_absorbing=False`` skips the last check.  A clock that never
    fires (row-stochastic ``S``) is a legitimate degenerate component of
    the system model -- it is how inspections are switched off -- but it
    is not a proper phase-type law.
    """
    a, S = ph.alpha, ph.S
    z = a.size
    if S.shape != (z, z):
        return Verdict(False, "DimensionMismatch",
                       f"alpha has length {z} but S has shape {S.shape}")
    if np.any(a < -tol) or np.any(S < -tol):
        return Verdict(False, "NegativeEntry", "alpha or S has a negative entry")
    if np.any(a > 1 + tol) or np.any(S > 1 + tol):
        return Verdict(False, "NegativeEntry", "alpha or S has an entry above 1")
    if abs(a.sum() - 1.0) > 1e-9:
        return Verdict(False, "InitialMassNotOne", f"alpha sums to {a.sum():.15g}")
    sums = S.sum(axis=1)
    if np.any(sums > 1.0 + tol):
        bad = int(np.argmax(sums))
        return Verdict(False, "RowSumExceedsOne", f"S row {bad} sums to {sums[bad]:.15g}")
    if require_absorbing:
        eye = np.eye(z)
        try:
            inv = np.linalg.inv(eye - S)
        except np.linalg.LinAlgError:
            return Verdict(False, "NotAbsorbing", "I - S is singular")
        if np.any(inv < -1e-9):
            return Verdict(False, "NotAbsorbing", "(I - S)^-1 has negative entries")
    return Verdict(True)


def ph_mean(ph: DiscretePH) -> float:
    """Mean absorption time ``alpha (I - S)^-1 e``."""
    z = ph.order
    try:
        x = np.linalg.solve(np.eye(z) - ph.S, ones(z))
    except np.linalg.LinAlgError:
        raise NotAbsorbing("I - S is singular") from None
    return float(ph.alpha @ x)


def stationary_vector(P: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Unique row vector x with x P = x, x e = 1 for a stochastic matrix P.

    Solved as a linear system with one balance equation replaced by the
    normalization.  Raises ``NonUniqueStationary`` when the system is
    singular (reducible chain).
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[0, :] = 1.0
    b = np.zeros(n)
    b[0] = 1.0
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise NonUniqueStationary("singular balance system") from None
    if np.any(x < -1e-9):
        raise NonUniqueStationary("negative entries in the solved vector")
    resid = np.abs(x @ P - x).max()
    if resid > 1e-9:
        raise NonUniqueStationary(f"fixed-point residual {resid:.3g}")
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def renewal_stationary(ph: DiscretePH) -> np.ndarray:
    """Stationary phase distribution of the PH-renewal chain S + S0 alpha."""
    P = ph.S + np.outer(ph.exit, ph.alpha)
    return stationary_vector(P)


def geometric_ph(p: float) -> DiscretePH:
    """Order-1 PH: success probability 1-p each step, support n >= 1."""
    return DiscretePH(np.array([1.0]), np.array([[float(p)]]))


def erlang2_ph(p1: float, p2: float) -> DiscretePH:
    """Generalized Erlang of shape 2: two sequential geometric stages."""
    return DiscretePH(np.array([1.0, 0.0]),
                      np.array([[float(p1), 1.0 - float(p1)], [0.0, float(p2)]]))
