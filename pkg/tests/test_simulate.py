import numpy as np
import pytest
from dataclasses import replace

from standby_mmap import (SimConfig, build, build_vectors, simulate,
                          stationary, stationary_profits)
from standby_mmap import measures as ms
from standby_mmap.errors import ModelError
from standby_mmap.ph import DiscretePH
from standby_mmap.simulate import first_replacement_times, sample_ph_mean

from conftest import (REPAIR, example_econ, example_system, example_unit,
                      random_econ, random_system, toy_system)


def _zcheck(report, analytic: dict, zmax=3.5):
    bad = []
    for key, ana in analytic.items():
        mean, se = report.measure(key)
        if se and se > 0:
            z = (mean - ana) / se
            if abs(z) > zmax:
                bad.append((key, mean, ana, z))
        else:
            if abs(mean - ana) > 1e-9:
                bad.append((key, mean, ana, float("inf")))
    assert not bad, f"oracle disagreement: {bad}"


def analytic_measures(model, econ):
    kern = build(model)
    st = stationary(kern, model=model)
    lay = kern.layout
    rates = ms.event_rates_stationary(kern, st.pi)
    vecs = build_vectors(model, lay, econ)
    prof = stationary_profits(kern, vecs, econ, st.pi, rates)
    props = ms.repairperson_proportions(lay, st.pi)
    out = {"A": ms.availability(lay, st.pi), "Y_nv": props[0], "Y_v": props[1],
           "Y_w": props[2], "Y_i": props[3], "phi": prof.phi}
    out.update({f"L_{k}": rates[k] for k in ("rep", "mi", "nr", "rejoined",
                                             "NS", "rb")})
    out.update({f"pi_U{k}": st.macro[k] for k in sorted(st.macro)})
    return kern, st, out


def test_reproducible_bitwise(toy_model):
    econ = example_econ()
    econ = replace(econ, c0=np.array([5.0]), cr1=np.array([18.0]),
                   cr2=np.array([15.5]))
    cfg = SimConfig(steps=50_000, reps=4, warmup=500, seed=123)
    a = simulate(toy_model, econ, cfg)
    b = simulate(toy_model, econ, cfg)
    np.testing.assert_array_equal(a.occupancy, b.occupancy)
    np.testing.assert_array_equal(a.label_rates, b.label_rates)
    np.testing.assert_array_equal(a.profit, b.profit)
    c = simulate(toy_model, econ, SimConfig(steps=50_000, reps=4,
                                            warmup=500, seed=124))
    assert not np.array_equal(a.occupancy, c.occupancy)


def test_no_failure_model_fully_available():
    unit = example_unit()
    m = unit.m
    unit = replace(unit, T=unit.T + np.diag(unit.T_r0 + unit.T_nr0),
                   T_r0=np.zeros(m), T_nr0=np.zeros(m),
                   W=unit.W + np.diag(unit.W_r0 + unit.W_nr0),
                   W_r0=np.zeros(m), W_nr0=np.zeros(m), omega0=0.0, m1=m)
    model = replace(example_system(), unit=unit)
    rep = simulate(model, example_econ(), SimConfig(steps=20_000, reps=2, seed=3))
    assert rep.measure("A")[0] == 1.0
    for lab in ("A", "B", "C", "AD", "BD", "CD", "NS"):
        assert rep.measure(f"L_{lab}")[0] == 0.0


def test_toy_occupancy_matches_analytic(toy_model):
    econ = replace(example_econ(), c0=np.array([5.0]), cr1=np.array([18.0]),
                   cr2=np.array([15.5]))
    kern, st, analytic = analytic_measures(toy_model, econ)
    rep = simulate(toy_model, econ, SimConfig(steps=300_000, reps=8,
                                              warmup=3_000, seed=21))
    analytic["block:1:0:v"] = st.block_mass(1, 0, "v")
    analytic["block:1:1:v"] = st.block_mass(1, 1, "v")
    analytic["block:1:1:nv"] = st.block_mass(1, 1, "nv")
    _zcheck(rep, analytic)


def test_paper_model_smoke_agreement(paper_model, econ):
    kern, st, analytic = analytic_measures(paper_model, econ)
    rep = simulate(paper_model, econ, SimConfig(steps=150_000, reps=6,
                                                warmup=5_000, seed=77))
    _zcheck(rep, analytic, zmax=4.0)


def test_first_replacement_matches_ph_mean(paper_model, paper_kernel, econ):
    res = ms.replacement_time(paper_kernel, model=paper_model, horizon=5)
    times = first_replacement_times(paper_model, econ, runs=4000, seed=13)
    se = times.std(ddof=1) / np.sqrt(times.size)
    assert abs(times.mean() - res.mean) <= 3 * se


def test_sample_ph_mean_oracle():
    mean, se = sample_ph_mean(REPAIR, 1_000_000, seed=4)
    assert abs(mean - 7.380952380952381) <= 3 * se


def test_trace_has_consistent_states(toy_model):
    econ = replace(example_econ(), c0=np.array([5.0]), cr1=np.array([18.0]),
                   cr2=np.array([15.5]))
    rep = simulate(toy_model, econ, SimConfig(steps=2_000, reps=1, seed=9),
                   trace_steps=1000)
    tr = rep.trace
    assert tr.shape == (1000, 9)
    assert set(np.unique(tr[:, 1])) <= {1}          # k is always 1
    assert set(np.unique(tr[:, 2])) <= {0, 1}       # s in {0, 1}
    assert set(np.unique(tr[:, 3])) <= {0, 1}
    # on vacation the repair phase is undefined, at the workplace with a
    # queued unit it must be set
    vac = tr[:, 3] == 1
    assert np.all(tr[vac, 8] == -1)
    busy = (tr[:, 3] == 0) & (tr[:, 2] >= 1)
    assert np.all(tr[busy, 8] >= 0)


def test_config_validation():
    with pytest.raises(ModelError):
        SimConfig(steps=10, reps=0)
    with pytest.raises(ModelError):
        SimConfig(steps=10, reps=1, warmup=10)
