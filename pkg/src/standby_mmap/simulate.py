"""Monte Carlo oracle: step-by-step simulation of the physical system.

The simulator never touches the assembled matrices.  It draws each
clock's one-step outcome directly from the model's probability rows and
applies the operating rules: degradation then shock modification within
the same step, inspections observing the pre-step internal state,
FIFO service only while the repairperson is at the workplace, vacations
restarting unless too few units are operational, interruption of the
vacation when the fleet drops below the threshold, and a full restart
when the last unit is lost.  Agreement with the analytic measures is the
package's end-to-end correctness argument.

Reproducibility: an explicit PCG32 generator with per-replication
streams derived from the master seed, so results are bit-identical for
identical inputs regardless of how replications are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit, uint32, uint64

from .economics import EconomicParams
from .errors import ModelError
from .mmap_builder import LABELS, SystemModel
from .ph import DiscretePH, renewal_stationary

_LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}


@dataclass(frozen=True)
class SimConfig:
    steps: int
    reps: int
    warmup: int = 0
    seed: int = 20240801

    def __post_init__(self):
        if not (self.steps > self.warmup >= 0):
            raise ModelError("InvalidConfig", "need steps > warmup >= 0")
        if self.reps < 1:
            raise ModelError("InvalidConfig", "need at least one replication")


@dataclass
class SimReport:
    """Empirical measures with per-replication values and standard errors."""

    config: SimConfig
    block_keys: list[tuple[int, int, str]]
    occupancy: np.ndarray          # (reps, nblocks), per-step fractions
    label_rates: np.ndarray        # (reps, 9)
    q_rate: np.ndarray             # (reps,)
    availability: np.ndarray       # (reps,)
    idle: np.ndarray               # (reps,)
    working: np.ndarray            # (reps,)
    profit: np.ndarray             # (reps,)

    def _stat(self, values: np.ndarray) -> tuple[float, float]:
        mean = float(values.mean(axis=0))
        if self.config.reps > 1:
            se = float(values.std(axis=0, ddof=1) / np.sqrt(self.config.reps))
        else:
            se = float("nan")
        return mean, se

    def measure(self, key: str) -> tuple[float, float]:
        """(mean, standard error) of a named measure.

        Keys: ``A``, ``Y_nv``, ``Y_v``, ``Y_w``, ``Y_i``, ``L_rb``,
        ``L_<label>`` for each mark, ``L_rep``/``L_mi``/``L_nr``/
        ``L_rejoined``/``L_NS`` groups, ``phi``, ``pi_U<k>``, and
        ``block:<k>:<s>:<mode>``.
        """
        if key == "A":
            return self._stat(self.availability)
        if key == "Y_i":
            return self._stat(self.idle)
        if key == "Y_w":
            return self._stat(self.working)
        if key == "Y_nv":
            return self._stat(self.idle + self.working)
        if key == "Y_v":
            return self._stat(1.0 - self.idle - self.working)
        if key == "phi":
            return self._stat(self.profit)
        if key == "L_rb":
            return self._stat(self.q_rate)
        if key.startswith("L_"):
            name = key[2:]
            groups = {"rep": ("A", "AD"), "mi": ("B", "BD"), "nr": ("C", "CD"),
                      "rejoined": ("D", "AD", "BD", "CD"), "NS": ("NS",)}
            labs = groups.get(name, (name,))
            vals = sum(self.label_rates[:, _LABEL_INDEX[lab]] for lab in labs)
            return self._stat(vals)
        if key.startswith("pi_U"):
            k = int(key[4:])
            cols = [i for i, (bk, _, _) in enumerate(self.block_keys) if bk == k]
            return self._stat(self.occupancy[:, cols].sum(axis=1))
        if key.startswith("block:"):
            _, k, s, mode = key.split(":")
            i = self.block_keys.index((int(k), int(s), mode))
            return self._stat(self.occupancy[:, i])
        raise KeyError(key)

    def rows(self) -> list[dict]:
        keys = (["A", "Y_nv", "Y_v", "Y_w", "Y_i", "phi", "L_rb"]
                + [f"L_{lab}" for lab in LABELS]
                + [f"L_{g}" for g in ("rep", "mi", "nr", "rejoined")]
                + [f"pi_U{k}" for k in sorted({b[0] for b in self.block_keys})])
        out = []
        for key in keys:
            mean, se = self.measure(key)
            out.append({"measure": key, "mean": mean, "se": se})
        return out


# ---------------------------------------------------------------------------
# numba core
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _pcg_next(state, inc):
    old = state
    state = old * uint64(6364136223846793005) + inc
    xorshifted = uint32(((old >> uint64(18)) ^ old) >> uint64(27))
    rot = uint32(old >> uint64(59))
    out = uint32((xorshifted >> rot) | (xorshifted << ((uint32(32) - rot) & uint32(31))))
    return state, out


@njit(cache=True, inline="always")
def _uniform(state, inc):
    state, out = _pcg_next(state, inc)
    return state, np.float64(out) * (1.0 / 4294967296.0)


@njit(cache=True, inline="always")
def _draw(cum, state, inc):
    state, u = _uniform(state, inc)
    x = u * cum[cum.shape[0] - 1]
    for idx in range(cum.shape[0]):
        if x < cum[idx]:
            return state, idx
    return state, cum.shape[0] - 1


@njit(cache=True)
def _run(n, R, m, m1, t, eps, ups, z1, z2, omega0,
         internal_cum, w_cum, shock_cum, gamma_cum, insp_cum, eta_cum,
         vac_cum, vinit_cum, srv1_cum, srv2_cum, beta1_cum, beta2_cum,
         alpha_cum, gst_cum,
         B, C, H, G, fcr, fmi, fnu, c0, cr1, cr2,
         block_index, steps, warmup, seed_state, seed_inc,
         stop_at_ns, trace):
    """One replication.  Returns accumulators and the step count."""
    state = uint64(seed_state)
    inc = uint64(seed_inc | uint64(1))

    nblocks = 0
    for a in range(block_index.shape[0]):
        for b in range(block_index.shape[1]):
            for c in range(2):
                if block_index[a, b, c] + 1 > nblocks:
                    nblocks = block_index[a, b, c] + 1
    occupancy = np.zeros(nblocks)
    counts = np.zeros(9)
    q_count = 0.0
    profit = 0.0
    avail = 0.0
    idle = 0.0
    working = 0.0

    # initial state: fresh fleet, repairperson on vacation
    k = n
    s = 0
    mode = 1
    queue = np.zeros(n + 1, dtype=np.int64)
    state, i = _draw(alpha_cum, state, inc)
    state, j = _draw(gst_cum, state, inc)
    state, u = _draw(eta_cum, state, inc)
    state, vp = _draw(vinit_cum, state, inc)
    rp = -1

    steps_taken = 0
    for step in range(steps):
        steps_taken = step + 1
        pre_all_down = s == k
        pre_k = k

        # shock clock
        state, sidx = _draw(shock_cum[j], state, inc)
        shock_fired = sidx >= t
        if shock_fired:
            state, j = _draw(gamma_cum, state, inc)
        else:
            j = sidx

        # online unit
        event = 0
        i2 = i
        u2 = u
        if not pre_all_down:
            state, iidx = _draw(internal_cum[i], state, inc)
            total = False
            if shock_fired:
                state, uu = _uniform(state, inc)
                total = uu < omega0
            if total:
                event = 3
            elif iidx < m:
                if shock_fired:
                    state, widx = _draw(w_cum[iidx], state, inc)
                    if widx < m:
                        i2 = widx
                    elif widx == m:
                        event = 1
                    else:
                        event = 3
                else:
                    i2 = iidx
            elif iidx == m:
                event = 1
            else:
                event = 3
            state, uidx = _draw(insp_cum[u], state, inc)
            if uidx >= eps:
                state, u2 = _draw(eta_cum, state, inc)
                if event == 0 and i >= m1:
                    event = 2
            else:
                u2 = uidx

        # service
        completed = False
        rp2 = rp
        if mode == 0 and s >= 1:
            if queue[0] == 1:
                state, ridx = _draw(srv1_cum[rp], state, inc)
                completed = ridx >= z1
            else:
                state, ridx = _draw(srv2_cum[rp], state, inc)
                completed = ridx >= z2
            if not completed:
                rp2 = ridx

        # vacation clock
        vend = False
        vp2 = vp
        if mode == 1:
            state, vidx = _draw(vac_cum[vp], state, inc)
            vend = vidx >= ups
            if not vend:
                vp2 = vidx

        # apply
        label = event
        qevent = False
        if completed:
            for l in range(s - 1):
                queue[l] = queue[l + 1]
            s -= 1
        if event == 1 or event == 2:
            queue[s] = 1 if event == 1 else 2
            s += 1
        elif event == 3:
            k -= 1

        if event == 3 and k == 0:
            # the last unit is lost: a new fleet starts, vacation restarts
            label = 8
            if vend:
                qevent = True
            k = n
            s = 0
            mode = 1
            state, vp = _draw(vinit_cum, state, inc)
            state, i = _draw(alpha_cum, state, inc)
            state, u = _draw(eta_cum, state, inc)
            rp = -1
        else:
            if mode == 1:
                returned = False
                if k < R:
                    returned = True          # interruption, any vacation phase
                    qevent = True
                elif vend:
                    qevent = True
                    if k - s < R:
                        returned = True
                    else:
                        state, vp = _draw(vinit_cum, state, inc)
                if returned:
                    mode = 0
                    label = event + 4
                    if s >= 1:
                        if queue[0] == 1:
                            state, rp = _draw(beta1_cum, state, inc)
                        else:
                            state, rp = _draw(beta2_cum, state, inc)
                    else:
                        rp = -1
                elif not vend:
                    vp = vp2
            else:
                if completed and k >= R and k - s >= R:
                    mode = 1
                    state, vp = _draw(vinit_cum, state, inc)
                    rp = -1
                elif s >= 1:
                    if completed or rp < 0:
                        if queue[0] == 1:
                            state, rp = _draw(beta1_cum, state, inc)
                        else:
                            state, rp = _draw(beta2_cum, state, inc)
                    else:
                        rp = rp2
                else:
                    rp = -1
            # online replacement
            if s < k:
                if event != 0 or pre_all_down:
                    state, i = _draw(alpha_cum, state, inc)
                    state, u = _draw(eta_cum, state, inc)
                else:
                    i = i2
                    u = u2

        if trace.shape[0] > step:
            trace[step, 0] = step + 1
            trace[step, 1] = k
            trace[step, 2] = s
            trace[step, 3] = mode
            trace[step, 4] = i if s < k else -1
            trace[step, 5] = j
            trace[step, 6] = u if s < k else -1
            trace[step, 7] = vp if mode == 1 else -1
            trace[step, 8] = rp if (mode == 0 and s >= 1) else -1

        if step >= warmup:
            occupancy[block_index[k, s, mode]] += 1.0
            counts[label] += 1.0
            if qevent:
                q_count += 1.0
            if s < k:
                avail += 1.0
                profit += B - c0[i]
            else:
                profit -= C
            if mode == 0:
                if s == 0:
                    idle += 1.0
                    profit -= H
                else:
                    working += 1.0
                    if queue[0] == 1:
                        profit -= cr1[rp]
                    else:
                        profit -= cr2[rp]
            if label == 1 or label == 5:
                profit -= fcr
            elif label == 2 or label == 6:
                profit -= fmi
            if label == 8:
                profit -= fnu * n
            if qevent:
                profit -= G

        if stop_at_ns and label == 8:
            break

    return occupancy, counts, q_count, profit, avail, idle, working, steps_taken


def _cum(rows: np.ndarray) -> np.ndarray:
    return np.cumsum(np.atleast_2d(rows), axis=1)


def _pack(model: SystemModel, params: EconomicParams):
    u = model.unit
    dims = model.dims
    internal = np.column_stack([u.T, u.T_r0, u.T_nr0])
    w = np.column_stack([u.W, u.W_r0, u.W_nr0])
    shock = np.column_stack([u.shock.S, u.shock.exit])
    insp = np.column_stack([u.inspection.S, u.inspection.exit])
    vac = np.column_stack([model.vacation.S, model.vacation.exit])
    srv1 = np.column_stack([model.repair.S, model.repair.exit])
    srv2 = np.column_stack([model.maintenance.S, model.maintenance.exit])
    gst = renewal_stationary(u.shock)
    return (model.n, model.R, dims.m, u.m1, dims.t, dims.eps, dims.ups,
            dims.z1, dims.z2, u.omega0,
            _cum(internal), _cum(w), _cum(shock), np.cumsum(u.shock.alpha),
            _cum(insp), np.cumsum(u.inspection.alpha),
            _cum(vac), np.cumsum(model.vacation.alpha),
            _cum(srv1), _cum(srv2),
            np.cumsum(model.repair.alpha), np.cumsum(model.maintenance.alpha),
            np.cumsum(u.alpha), np.cumsum(gst),
            params.B, params.C, params.H, params.G,
            params.fcr, params.fmi, params.fnu,
            params.c0, params.cr1, params.cr2)


def _block_index(model: SystemModel):
    lay = model.make_layout()
    keys = [(blk.k, blk.s, blk.mode) for blk in lay.blocks]
    table = np.full((model.n + 1, model.n + 1, 2), -1, dtype=np.int64)
    for idx, (k, s, mode) in enumerate(keys):
        table[k, s, 0 if mode == "nv" else 1] = idx
    return keys, table


def _rep_seeds(master: int, reps: int) -> np.ndarray:
    ss = np.random.SeedSequence(master)
    return ss.generate_state(2 * reps, dtype=np.uint64).reshape(reps, 2)


def simulate(model: SystemModel, params: EconomicParams, cfg: SimConfig,
             trace_steps: int = 0) -> SimReport:
    """Run ``cfg.reps`` independent replications and aggregate them.

    ``trace_steps`` > 0 additionally records the first replication's
    trajectory (step, k, s, mode, i, j, u, v, r) on the report as
    ``trace``.
    """
    packed = _pack(model, params)
    keys, table = _block_index(model)
    seeds = _rep_seeds(cfg.seed, cfg.reps)
    denom = cfg.steps - cfg.warmup
    occ = np.zeros((cfg.reps, len(keys)))
    label_rates = np.zeros((cfg.reps, 9))
    q_rate = np.zeros(cfg.reps)
    avail = np.zeros(cfg.reps)
    idle = np.zeros(cfg.reps)
    working = np.zeros(cfg.reps)
    profit = np.zeros(cfg.reps)
    trace_arr = None
    for r in range(cfg.reps):
        tr = np.zeros((trace_steps if r == 0 else 0, 9), dtype=np.int64)
        out = _run(*packed, table, cfg.steps, cfg.warmup,
                   seeds[r, 0], seeds[r, 1], False, tr)
        occupancy, counts, q_count, prof, av, idl, wrk, _ = out
        occ[r] = occupancy / denom
        label_rates[r] = counts / denom
        q_rate[r] = q_count / denom
        avail[r] = av / denom
        idle[r] = idl / denom
        working[r] = wrk / denom
        profit[r] = prof / denom
        if r == 0 and trace_steps:
            trace_arr = tr
    report = SimReport(cfg, keys, occ, label_rates, q_rate, avail,
                       idle, working, profit)
    report.trace = trace_arr
    return report


def first_replacement_times(model: SystemModel, params: EconomicParams,
                            runs: int, seed: int = 7,
                            max_steps: int = 10_000_000) -> np.ndarray:
    """Steps until the first full fleet loss, over independent fresh starts."""
    packed = _pack(model, params)
    _, table = _block_index(model)
    seeds = _rep_seeds(seed, runs)
    times = np.empty(runs)
    empty = np.zeros((0, 9), dtype=np.int64)
    for r in range(runs):
        out = _run(*packed, table, max_steps, 0,
                   seeds[r, 0], seeds[r, 1], True, empty)
        times[r] = out[7]
    return times


def sample_ph_mean(ph: DiscretePH, nsamples: int, seed: int = 11) -> tuple[float, float]:
    """Empirical mean absorption time of a discrete PH with its standard error."""
    rng = np.random.default_rng(seed)
    z = ph.order
    rows = np.column_stack([ph.S, ph.exit])
    cum = np.cumsum(rows, axis=1)
    phase = rng.choice(z, size=nsamples, p=ph.alpha / ph.alpha.sum())
    steps = np.zeros(nsamples, dtype=np.int64)
    active = np.ones(nsamples, dtype=bool)
    while active.any():
        u = rng.random(active.sum()) * cum[phase[active], -1]
        nxt = (u[:, None] >= cum[phase[active], :-1]).sum(axis=1)
        steps[active] += 1
        absorbed = nxt >= z
        idx = np.flatnonzero(active)
        phase[idx[~absorbed]] = nxt[~absorbed]
        active[idx[absorbed]] = False
    return float(steps.mean()), float(steps.std(ddof=1) / np.sqrt(nsamples))
