import numpy as np
import pytest

from standby_mmap.errors import NonUniqueStationary, PhInvalid
from standby_mmap.ph import (DiscretePH, erlang2_ph, exit_vector, geometric_ph,
                             kron, ph_mean, renewal_stationary, validate_ph)

from conftest import INSPECT, MAINT, REPAIR, SHOCK, random_ph


def test_validate_accepts_immediate_absorption():
    assert validate_ph(DiscretePH([1.0], [[0.0]])).ok


def test_validate_accepts_example_repair():
    assert validate_ph(REPAIR).ok


def test_validate_rejects_non_absorbing():
    v = validate_ph(DiscretePH([1.0], [[1.0]]))
    assert not v.ok and v.kind == "NotAbsorbing"


def test_validate_first_violation_reported():
    v = validate_ph(DiscretePH([0.5, 0.4], [[0.1, 0.2], [0.3, 0.9]]))
    assert not v.ok and v.kind == "InitialMassNotOne"
    v = validate_ph(DiscretePH([1, 0], [[0.5, 0.6], [0.1, 0.2]]))
    assert not v.ok and v.kind == "RowSumExceedsOne"
    v = validate_ph(DiscretePH([1, 0], [[0.5, -0.1], [0.1, 0.2]]))
    assert not v.ok and v.kind == "NegativeEntry"
    v = validate_ph(DiscretePH([1, 0, 0], [[0.5, 0.1], [0.1, 0.2]]))
    assert not v.ok and v.kind == "DimensionMismatch"


def test_means_of_example_distributions():
    assert ph_mean(REPAIR) == pytest.approx(7.3810, abs=1e-4)
    assert ph_mean(MAINT) == pytest.approx(2.5, abs=1e-4)
    assert ph_mean(SHOCK) == pytest.approx(11.0, abs=1e-4)
    assert ph_mean(DiscretePH([1.0], [[0.0]])) == pytest.approx(1.0, abs=1e-14)


def test_exit_identity_is_exact():
    for ph in (REPAIR, MAINT, SHOCK, INSPECT):
        assert abs(ph.alpha.sum() - 1) <= 1e-14
        np.testing.assert_allclose(ph.S.sum(1) + ph.exit, 1.0, atol=1e-14)


def test_renewal_stationary_order_one():
    np.testing.assert_allclose(renewal_stationary(DiscretePH([1.0], [[0.3]])), [1.0])


def test_renewal_stationary_matches_power_iteration():
    P = SHOCK.S + np.outer(SHOCK.exit, SHOCK.alpha)
    x = np.full(2, 0.5)
    for _ in range(10000):
        nxt = x @ P
        if np.abs(nxt - x).max() < 1e-15:
            break
        x = nxt
    x /= x.sum()
    np.testing.assert_allclose(renewal_stationary(SHOCK), x, atol=1e-12)
    np.testing.assert_allclose(renewal_stationary(SHOCK), [10 / 11, 1 / 11], atol=1e-12)


def test_renewal_stationary_random_fixed_points():
    rng = np.random.default_rng(7)
    for _ in range(25):
        ph = random_ph(rng, int(rng.integers(1, 6)))
        x = renewal_stationary(ph)
        P = ph.S + np.outer(ph.exit, ph.alpha)
        assert np.abs(x @ P - x).max() <= 1e-12
        assert abs(x.sum() - 1) <= 1e-12 and np.all(x >= 0)


def test_kron_identity_and_ones():
    A = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(kron(np.eye(1), A), A)
    e2 = np.ones((2, 1))
    e3 = np.ones((3, 1))
    np.testing.assert_array_equal(kron(e2, e3), np.ones((6, 1)))


def test_kron_mixed_product_property():
    rng = np.random.default_rng(3)
    for _ in range(20):
        A, C = rng.normal(size=(2, 2, 2))
        B, D = rng.normal(size=(2, 3, 3))
        left = kron(A, B) @ kron(C, D)
        right = kron(A @ C, B @ D)
        np.testing.assert_allclose(left, right, atol=1e-12)
        np.testing.assert_allclose(kron(kron(A, B), C), kron(A, kron(B, C)), atol=1e-12)


def test_exit_vector_values():
    np.testing.assert_array_equal(exit_vector(np.zeros((2, 2))), [1, 1])
    np.testing.assert_allclose(exit_vector(INSPECT.S), [0.05, 0.15], atol=1e-14)
    np.testing.assert_allclose(exit_vector(np.array([[0.5, 0.5], [1.0, 0.0]])),
                               [0, 0], atol=1e-14)
    with pytest.raises(PhInvalid):
        exit_vector(np.array([[0.9, 0.3]]))


def test_mean_raises_when_not_absorbing():
    from standby_mmap.errors import NotAbsorbing
    with pytest.raises(NotAbsorbing):
        ph_mean(DiscretePH([1.0], [[1.0]]))


def test_family_constructors():
    g = geometric_ph(0.8)
    assert g.order == 1 and g.S[0, 0] == 0.8
    assert ph_mean(g) == pytest.approx(5.0)
    e = erlang2_ph(0.5, 0.5)
    assert ph_mean(e) == pytest.approx(4.0)   # two stages of mean 2
