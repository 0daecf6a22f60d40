"""State-space layout: macro-state blocks and flat indexing.

The chain lives on macro-states ``U^k`` (k units left in the system,
k = n..1), each split into blocks ``E_s`` by the number ``s`` of units in
the repair facility and by whether the repairperson is on vacation
(``"v"``) or at the workplace (``"nv"``).  Vacation blocks exist only
while ``k >= R``; workplace blocks for ``k >= R`` start at
``s = N = k - R + 1`` (below that the repairperson would be on vacation).

Within a block the repair queue is an ordered tuple over types
``1`` (corrective) / ``2`` (preventive maintenance), enumerated
lexicographically with the head (unit in service) most significant.  The
phase tuple of one queue ordering is, fastest coordinate last:

===========================  =========================
block                        phase tuple
===========================  =========================
vacation, s < k              (i, j, u, v)
vacation, s = k              (j, v)
workplace, s = 0             (i, j, u)
workplace, 0 < s < k         (i, j, u, r)
workplace, s = k             (j, r)
===========================  =========================

with i internal state, j shock phase, u inspection phase, v vacation
phase, r repair phase of the unit in service (length z1 or z2 by the
head type).  All indices are 0-based in code.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ModelError


@dataclass(frozen=True)
class FactorDims:
    """Orders of the six phase factors."""

    m: int
    t: int
    eps: int
    ups: int
    z1: int
    z2: int

    def z(self, head: int) -> int:
        return self.z1 if head == 1 else self.z2


@dataclass(frozen=True)
class MacroStateId:
    """One first-level macro-state: k units, queue (i1..is), repairperson mode."""

    k: int
    s: int
    mode: str                 # "v" or "nv"
    queue: tuple[int, ...] = ()

    def __post_init__(self):
        if self.mode not in ("v", "nv"):
            raise ModelError("InvalidMacro", f"mode {self.mode!r}")
        if len(self.queue) != self.s:
            raise ModelError("InvalidMacro",
                             f"queue length {len(self.queue)} != s={self.s}")


def queue_dim(k: int, s: int, mode: str, head: int | None, dims: FactorDims) -> int:
    """Phase count of a single queue ordering inside E_s."""
    if mode == "v":
        return dims.t * dims.ups if s == k else dims.m * dims.t * dims.eps * dims.ups
    if s == 0:
        return dims.m * dims.t * dims.eps
    z = dims.z(head)
    return dims.t * z if s == k else dims.m * dims.t * dims.eps * z


def block_dim(macro: MacroStateId, dims: FactorDims) -> int:
    """Total dimension of the whole block E_s the macro-state belongs to."""
    k, s, mode = macro.k, macro.s, macro.mode
    if not 0 <= s <= k:
        raise ModelError("InvalidMacro", f"s={s} outside 0..{k}")
    if mode == "v":
        if s == 0:
            return dims.m * dims.t * dims.eps * dims.ups
        if s == k:
            return dims.t * dims.ups * 2 ** k
        return dims.m * dims.t * dims.eps * dims.ups * 2 ** s
    if s == 0:
        return dims.m * dims.t * dims.eps
    half = 2 ** (s - 1)
    if s == k:
        return dims.t * (dims.z1 + dims.z2) * half
    return dims.m * dims.t * dims.eps * (dims.z1 + dims.z2) * half


@dataclass(frozen=True)
class Block:
    """One block E_s^{k,x} with its queue orderings resolved to offsets."""

    k: int
    s: int
    mode: str
    offset: int
    dim: int
    orderings: tuple[tuple[int, ...], ...]
    ord_offsets: tuple[int, ...]      # within the block
    ord_dims: tuple[int, ...]

    def ordering_index(self, queue: tuple[int, ...]) -> int:
        # lexicographic enumeration: index = sum (q_l - 1) 2^(s-l)
        idx = 0
        for q in queue:
            idx = idx * 2 + (q - 1)
        return idx

    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.dim)


class StateSpaceLayout:
    """Ordered macro-state blocks of the full chain, with flat indexing."""

    def __init__(self, n: int, R: int, dims: FactorDims):
        if not 1 <= R <= n:
            raise ModelError("InvalidThreshold", f"R={R} outside 1..{n}")
        if min(dims.m, dims.t, dims.eps, dims.ups, dims.z1, dims.z2) < 1:
            raise ModelError("InvalidMacro", "all factor dims must be >= 1")
        self.n = n
        self.R = R
        self.dims = dims
        self.blocks: list[Block] = []
        self._by_key: dict[tuple[int, int, str], Block] = {}
        offset = 0
        for k in range(n, 0, -1):
            for s, mode in self._block_order(k):
                blk = self._make_block(k, s, mode, offset)
                self.blocks.append(blk)
                self._by_key[(k, s, mode)] = blk
                offset += blk.dim
        self.total = offset

    def _block_order(self, k: int):
        if k >= self.R:
            N = k - self.R + 1
            for s in range(0, k + 1):
                yield s, "v"
            for s in range(N, k + 1):
                yield s, "nv"
        else:
            for s in range(0, k + 1):
                yield s, "nv"

    def _make_block(self, k: int, s: int, mode: str, offset: int) -> Block:
        orderings = tuple(product((1, 2), repeat=s))
        dims = self.dims
        ord_dims, ord_offsets = [], []
        off = 0
        for q in orderings:
            head = q[0] if q else None
            d = queue_dim(k, s, mode, head, dims)
            ord_offsets.append(off)
            ord_dims.append(d)
            off += d
        return Block(k, s, mode, offset, off, orderings,
                     tuple(ord_offsets), tuple(ord_dims))

    # -- lookups -------------------------------------------------------

    def N(self, k: int) -> int:
        """Facility count at or above which the repairperson must stay."""
        return k - self.R + 1

    def has_block(self, k: int, s: int, mode: str) -> bool:
        return (k, s, mode) in self._by_key

    def block(self, k: int, s: int, mode: str) -> Block:
        try:
            return self._by_key[(k, s, mode)]
        except KeyError:
            raise ModelError("InvalidMacro", f"no block E_{s}^({k},{mode})") from None

    def macro_slice(self, k: int) -> slice:
        """Flat range of the whole U^k macro-state."""
        blks = [b for b in self.blocks if b.k == k]
        return slice(blks[0].offset, blks[-1].offset + blks[-1].dim)

    # -- flat indexing -------------------------------------------------

    def _phase_shape(self, k: int, s: int, mode: str, head: int | None):
        d = self.dims
        if mode == "v":
            return (d.t, d.ups) if s == k else (d.m, d.t, d.eps, d.ups)
        if s == 0:
            return (d.m, d.t, d.eps)
        z = d.z(head)
        return (d.t, z) if s == k else (d.m, d.t, d.eps, z)

    def locate(self, macro: MacroStateId, phase: tuple[int, ...]) -> int:
        blk = self.block(macro.k, macro.s, macro.mode)
        qi = blk.ordering_index(macro.queue)
        head = macro.queue[0] if macro.queue else None
        shape = self._phase_shape(macro.k, macro.s, macro.mode, head)
        if len(phase) != len(shape) or any(not 0 <= p < d for p, d in zip(phase, shape)):
            raise ModelError("OutOfRange", f"phase {phase} outside shape {shape}")
        return blk.offset + blk.ord_offsets[qi] + int(np.ravel_multi_index(phase, shape))

    def unlocate(self, index: int) -> tuple[MacroStateId, tuple[int, ...]]:
        if not 0 <= index < self.total:
            raise ModelError("OutOfRange", f"index {index} outside 0..{self.total - 1}")
        for blk in self.blocks:
            if index < blk.offset + blk.dim:
                rel = index - blk.offset
                qi = int(np.searchsorted(np.asarray(blk.ord_offsets), rel, side="right")) - 1
                queue = blk.orderings[qi]
                head = queue[0] if queue else None
                shape = self._phase_shape(blk.k, blk.s, blk.mode, head)
                phase = np.unravel_index(rel - blk.ord_offsets[qi], shape)
                return MacroStateId(blk.k, blk.s, blk.mode, queue), tuple(int(p) for p in phase)
        raise AssertionError("unreachable")

    # -- reporting -----------------------------------------------------

    def to_rows(self) -> list[dict]:
        rows = []
        for blk in self.blocks:
            for q, off, d in zip(blk.orderings, blk.ord_offsets, blk.ord_dims):
                rows.append({
                    "block": f"E_{blk.s}^({blk.k},{blk.mode})",
                    "k": blk.k, "s": blk.s, "mode": blk.mode,
                    "queue": "".join(str(x) for x in q),
                    "offset": blk.offset + off, "dim": d,
                })
        return rows

    def to_csv(self, path):
        rows = self.to_rows()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)


def layout(n: int, R: int, dims: FactorDims) -> StateSpaceLayout:
    """Build the full ordered layout for an n-unit fleet with threshold R."""
    return StateSpaceLayout(n, R, dims)
