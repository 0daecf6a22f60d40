import numpy as np
import pytest
from dataclasses import replace

from standby_mmap.ph import DiscretePH
from standby_mmap.unit import (OnlineUnitModel, build_kernels, event_kernel,
                               selectors, validate_unit)

from conftest import example_unit, random_unit


def _completeness(ker):
    unprimed = ker.o.sum(1) + ker.a.sum(1) + ker.b.sum(1) + ker.c.sum(1)
    primed = ker.o.sum(1) + ker.a_last.sum(1) + ker.b_last.sum(1) + ker.c_last.sum(1)
    return unprimed, primed


def test_selectors_small():
    U1, U2 = selectors(2, 1)
    np.testing.assert_array_equal(np.diag(U1), [1, 0])
    np.testing.assert_array_equal(np.diag(U2), [0, 1])


def test_selectors_example():
    U1, U2 = selectors(4, 2)
    np.testing.assert_array_equal(np.diag(U1), [1, 1, 0, 0])
    np.testing.assert_array_equal(np.diag(U2), [0, 0, 1, 1])


def test_selectors_partition_identity():
    for m in range(1, 6):
        for m1 in range(1, m + 1):
            U1, U2 = selectors(m, m1)
            np.testing.assert_array_equal(U1 + U2, np.eye(m))


def test_event_classes_partition_for_example():
    ker = build_kernels(example_unit())
    unprimed, primed = _completeness(ker)
    np.testing.assert_allclose(unprimed, 1.0, atol=1e-12)
    np.testing.assert_allclose(primed, 1.0, atol=1e-12)


def test_event_classes_partition_random_models():
    rng = np.random.default_rng(11)
    for _ in range(40):
        unit = random_unit(rng, int(rng.integers(1, 6)),
                           int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        ker = build_kernels(unit)
        unprimed, primed = _completeness(ker)
        np.testing.assert_allclose(unprimed, 1.0, atol=1e-12)
        np.testing.assert_allclose(primed, 1.0, atol=1e-12)
        for mat in (ker.o, ker.a, ker.b, ker.c,
                    ker.a_last, ker.b_last, ker.c_last):
            assert mat.min() >= -1e-15 and mat.max() <= 1 + 1e-12


def test_certain_destructive_shock():
    # shock every step, always destructive: everything is a loss event
    unit = replace(example_unit(), omega0=1.0,
                   shock=DiscretePH([1, 0], np.zeros((2, 2))))
    ker = build_kernels(unit)
    m, t, eps = 4, 2, 2
    alpha = np.zeros(m)
    alpha[0] = 1
    gamma = np.array([1.0, 0.0])
    eta = np.array([1.0, 0.0])
    expected = np.kron(np.kron(np.outer(np.ones(m), alpha),
                               np.outer(np.ones(t), gamma)),
                       np.outer(np.ones(eps), eta))
    np.testing.assert_allclose(ker.c, expected, atol=1e-14)
    assert not ker.o.any() and not ker.a.any() and not ker.b.any()


def test_loss_kernel_entry_by_scalar_expansion():
    # independent scalar expansion of the loss kernel, no matrix code
    unit = example_unit()
    ker = build_kernels(unit)
    m, t, eps = 4, 2, 2
    L = unit.shock.S
    L0 = unit.shock.exit
    gamma = unit.shock.alpha
    M0 = unit.inspection.exit
    eta = unit.inspection.alpha
    T, W = unit.T, unit.W
    got = ker.c.reshape(m, t, eps, m, t, eps)
    for (i, j, u, i2, j2, u2) in [(3, 0, 0, 0, 0, 0), (3, 0, 0, 0, 1, 0),
                                  (2, 1, 1, 0, 0, 1), (0, 0, 0, 1, 0, 0)]:
        nr = unit.T_nr0[i] * L[j, j2]
        nr_shock = (unit.T_nr0[i] + sum(T[i, x] * unit.W_nr0[x] for x in range(m))) \
            * L0[j] * gamma[j2] * (1 - unit.omega0)
        total = L0[j] * gamma[j2] * unit.omega0
        val = (nr + nr_shock + total) * unit.alpha[i2] * eta[u2]
        assert got[i, j, u, i2, j2, u2] == pytest.approx(val, abs=1e-14)


def test_no_inspection_exit_kills_major_events():
    from standby_mmap.optimize import disable_inspections
    ker = build_kernels(disable_inspections(example_unit()))
    assert np.abs(ker.b).max() <= 1e-15 and np.abs(ker.b_last).max() <= 1e-15
    unprimed, primed = _completeness(ker)
    np.testing.assert_allclose(unprimed, 1.0, atol=1e-12)


def test_major_rows_only():
    # inspection events can only start from major internal states
    unit = example_unit()
    ker = build_kernels(unit)
    by_state = ker.b.reshape(4, -1).copy()
    by_state = ker.b.reshape(4, 2 * 2, -1)
    assert not by_state[:2].any()      # minor states: no maintenance
    assert by_state[2:].any()


def test_event_kernel_surface():
    unit = example_unit()
    h = event_kernel(unit, "A", last_unit=False)
    hp = event_kernel(unit, "A", last_unit=True)
    assert h.shape == (16, 16) and hp.shape == (16, 2)
    with pytest.raises(Exception):
        event_kernel(unit, "X")


def test_validate_unit_reports_rows():
    unit = example_unit()
    bad = replace(unit, T_r0=np.array([0.008, 0.016, 0.2, 0.32]))
    v = validate_unit(bad)
    assert not v.ok and v.kind == "RowSumExceedsOne" and "row 2" in v.detail
