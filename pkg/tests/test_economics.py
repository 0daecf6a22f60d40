import numpy as np
import pytest
from dataclasses import replace

from standby_mmap import build, build_vectors, stationary, stationary_profits
from standby_mmap import measures as ms
from standby_mmap.economics import EconomicParams, transient_profits
from standby_mmap.errors import ModelError

from conftest import example_econ, random_econ, random_system


def test_vector_entries_by_location(paper_model, paper_kernel, econ):
    lay = paper_kernel.layout
    vecs = build_vectors(paper_model, lay, econ)
    # idle workplace: reward B - c0[i], facility cost H
    blk = lay.block(2, 0, "nv")
    for i in range(4):
        idx = blk.offset + i * 4   # phase (i, 0, 0)
        assert vecs.nr[idx] == econ.B - econ.c0[i]
        assert vecs.nc[idx] == econ.H
    # vacation blocks carry no facility cost
    for k, s in ((4, 0), (4, 2), (3, 1)):
        b = lay.block(k, s, "v")
        assert not vecs.nc[b.slice()].any()
    # full-failure blocks: downtime loss
    b = lay.block(4, 4, "nv")
    np.testing.assert_array_equal(vecs.nr[b.slice()], -econ.C)
    b = lay.block(3, 3, "v")
    np.testing.assert_array_equal(vecs.nr[b.slice()], -econ.C)
    # in-service states: the head's task cost
    b = lay.block(3, 1, "nv")
    first_corrective = b.offset   # queue (1,), phase (0,0,0,0)
    assert vecs.mc_cr[first_corrective] == econ.cr1[0]
    second_head = b.offset + b.ord_offsets[1]   # queue (2,)
    assert vecs.mc_pm[second_head] == econ.cr2[0]


def test_partition_of_facility_cost(paper_model, paper_kernel, paper_pi, econ):
    vecs = build_vectors(paper_model, paper_kernel.layout, econ)
    np.testing.assert_allclose(vecs.mc_cr + vecs.mc_pm + vecs.idle, vecs.nc,
                               atol=1e-14)
    prof = stationary_profits(paper_kernel, vecs, econ, paper_pi.pi)
    assert prof.phi_cr + prof.phi_pm + prof.phi_idle == pytest.approx(
        float(paper_pi.pi @ vecs.nc), abs=1e-12)


def test_unit_reward_reduces_to_availability(paper_model, paper_kernel, paper_pi):
    econ0 = EconomicParams(B=1., c0=[0, 0, 0, 0], cr1=[0, 0, 0], cr2=[0, 0, 0],
                           H=0., C=0., G=0., fcr=0., fmi=0., fnu=0.)
    vecs = build_vectors(paper_model, paper_kernel.layout, econ0)
    prof = stationary_profits(paper_kernel, vecs, econ0, paper_pi.pi)
    A = ms.availability(paper_kernel.layout, paper_pi.pi)
    assert prof.phi_w == pytest.approx(A, abs=1e-12)
    assert prof.phi == pytest.approx(A, abs=1e-12)


def test_all_zero_parameters_give_zero_profit(paper_model, paper_kernel, paper_pi):
    econ0 = EconomicParams(B=0., c0=[0, 0, 0, 0], cr1=[0, 0, 0], cr2=[0, 0, 0],
                           H=0., C=0., G=0., fcr=0., fmi=0., fnu=0.)
    vecs = build_vectors(paper_model, paper_kernel.layout, econ0)
    prof = stationary_profits(paper_kernel, vecs, econ0, paper_pi.pi)
    assert prof.phi == 0.0


def test_downtime_loss_sensitivity_is_exact(paper_model, paper_kernel, paper_pi, econ):
    delta = 7.5
    bumped = replace(econ, C=econ.C + delta)
    v0 = build_vectors(paper_model, paper_kernel.layout, econ)
    v1 = build_vectors(paper_model, paper_kernel.layout, bumped)
    p0 = stationary_profits(paper_kernel, v0, econ, paper_pi.pi)
    p1 = stationary_profits(paper_kernel, v1, bumped, paper_pi.pi)
    A = ms.availability(paper_kernel.layout, paper_pi.pi)
    assert p0.phi - p1.phi == pytest.approx(delta * (1 - A), abs=1e-10)


def test_transient_profit_includes_initial_purchase(paper_model, paper_kernel, econ):
    path = ms.transient(paper_kernel, 0, model=paper_model)
    vecs = build_vectors(paper_model, paper_kernel.layout, econ)
    tp = transient_profits(paper_kernel, vecs, econ, path)
    phi0 = tp["phi"][0]
    # at horizon 0: one step of reward flow minus the fleet purchase
    expect = tp["phi_w"][0] - tp["phi_cr"][0] - tp["phi_pm"][0] \
        - tp["phi_idle"][0] - paper_kernel.layout.n * econ.fnu
    assert phi0 == pytest.approx(expect, abs=1e-12)


def test_transient_profit_slope_approaches_stationary(paper_model, paper_kernel,
                                                      paper_pi, econ):
    path = ms.transient(paper_kernel, 1500, model=paper_model)
    vecs = build_vectors(paper_model, paper_kernel.layout, econ)
    tp = transient_profits(paper_kernel, vecs, econ, path)
    prof = stationary_profits(paper_kernel, vecs, econ, paper_pi.pi)
    slope = (tp["phi"][-1] - tp["phi"][-101]) / 100
    assert slope == pytest.approx(prof.phi, abs=1e-3)


def test_dimension_mismatch_raises(paper_model, paper_kernel):
    bad = EconomicParams(B=1., c0=[1, 2], cr1=[0, 0, 0], cr2=[0, 0, 0],
                         H=0., C=0., G=0., fcr=0., fmi=0., fnu=0.)
    with pytest.raises(ModelError):
        build_vectors(paper_model, paper_kernel.layout, bad)


def test_negative_parameters_rejected():
    with pytest.raises(ModelError):
        EconomicParams(B=1., c0=[-1.], cr1=[0.], cr2=[0.], H=0., C=0.,
                       G=0., fcr=0., fmi=0., fnu=0.)


def test_random_models_profit_consistency():
    rng = np.random.default_rng(41)
    for _ in range(8):
        model = random_system(rng)
        econ = random_econ(rng, model)
        kern = build(model)
        st = stationary(kern, model=model)
        vecs = build_vectors(model, kern.layout, econ)
        prof = stationary_profits(kern, vecs, econ, st.pi)
        rates = ms.event_rates_stationary(kern, st.pi)
        manual = (st.pi @ vecs.nr - st.pi @ vecs.nc
                  - rates["NS"] * model.n * econ.fnu - rates["rep"] * econ.fcr
                  - rates["mi"] * econ.fmi - rates["rb"] * econ.G)
        assert prof.phi == pytest.approx(manual, abs=1e-10)
