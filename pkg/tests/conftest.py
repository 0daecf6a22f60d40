import numpy as np
import pytest

from standby_mmap import (DiscretePH, EconomicParams, OnlineUnitModel,
                          SystemModel, build, erlang2_ph, stationary)
from standby_mmap.optimize import disable_inspections

# ---------------------------------------------------------------------------
# the worked numerical example: 4 units, R = 3, generalized-Erlang vacation
# ---------------------------------------------------------------------------

T = np.array([[0.96, 0.03, 0, 0],
              [0, 0.97, 0.01, 0],
              [0, 0, 0.85, 0.06],
              [0, 0, 0, 0.6]])
W = np.array([[0.2, 0.1, 0.3, 0.1],
              [0, 0.1, 0.3, 0.1],
              [0, 0, 0.3, 0.1],
              [0, 0, 0, 0.1]])
SHOCK = DiscretePH([1, 0], [[0.9, 0.05], [0, 0.5]])
INSPECT = DiscretePH([1, 0], [[0.85, 0.1], [0.45, 0.4]])
REPAIR = DiscretePH([1, 0, 0], [[0.2, 0.4, 0.3], [0.2, 0.2, 0.5], [0.3, 0.2, 0.3]])
MAINT = DiscretePH([1, 0, 0], [[0.2, 0.3, 0.1], [0.1, 0.1, 0.4], [0.2, 0.2, 0.2]])


def example_unit() -> OnlineUnitModel:
    return OnlineUnitModel(
        alpha=[1, 0, 0, 0], T=T,
        T_r0=[0.008, 0.016, 0.072, 0.32], T_nr0=[0.002, 0.004, 0.018, 0.080],
        m1=2, W=W, W_r0=[0.3, 0.4, 0.5, 0.6], W_nr0=[0, 0.1, 0.1, 0.3],
        omega0=0.2, shock=SHOCK, inspection=INSPECT)


def example_system(vacation=None, R=3) -> SystemModel:
    return SystemModel(unit=example_unit(), repair=REPAIR, maintenance=MAINT,
                       vacation=vacation or erlang2_ph(0.67, 0.67), n=4, R=R)


def example_econ() -> EconomicParams:
    return EconomicParams(B=60., c0=[5, 12, 30, 40], cr1=[18, 18, 18],
                          cr2=[15.5, 15.5, 15.5], H=15., C=60., G=20.,
                          fcr=10., fmi=5., fnu=100.)


@pytest.fixture(scope="session")
def paper_model():
    return example_system()


@pytest.fixture(scope="session")
def paper_model_noinsp(paper_model):
    from dataclasses import replace
    return replace(paper_model, unit=disable_inspections(paper_model.unit))


@pytest.fixture(scope="session")
def econ():
    return example_econ()


@pytest.fixture(scope="session")
def paper_kernel(paper_model):
    return build(paper_model)


@pytest.fixture(scope="session")
def paper_kernel_noinsp(paper_model_noinsp):
    return build(paper_model_noinsp)


@pytest.fixture(scope="session")
def paper_pi(paper_kernel, paper_model):
    return stationary(paper_kernel, model=paper_model)


@pytest.fixture(scope="session")
def paper_pi_noinsp(paper_kernel_noinsp, paper_model_noinsp):
    return stationary(paper_kernel_noinsp, model=paper_model_noinsp)


# ---------------------------------------------------------------------------
# the all-scalar single-unit system (everything computable by hand)
# ---------------------------------------------------------------------------

TOY_P = dict(a=0.9, b=0.07, c=0.03, l=0.8, w=0.6, wr=0.3, wn=0.1,
             w0=0.25, mm=0.7, vv=0.65, s1=0.5, s2=0.4)


def toy_system() -> SystemModel:
    p = TOY_P
    unit = OnlineUnitModel(alpha=[1.], T=[[p["a"]]], T_r0=[p["b"]], T_nr0=[p["c"]],
                           m1=1, W=[[p["w"]]], W_r0=[p["wr"]], W_nr0=[p["wn"]],
                           omega0=p["w0"],
                           shock=DiscretePH([1.], [[p["l"]]]),
                           inspection=DiscretePH([1.], [[p["mm"]]]))
    return SystemModel(unit=unit, repair=DiscretePH([1.], [[p["s1"]]]),
                       maintenance=DiscretePH([1.], [[p["s2"]]]),
                       vacation=DiscretePH([1.], [[p["vv"]]]), n=1, R=1)


def toy_scalar_kernels() -> dict:
    """Hand expansion of the scalar event kernels."""
    p = TOY_P
    shock_ok = (1 - p["l"]) * (1 - p["w0"])
    return {
        "H_O": p["a"] * p["l"] + p["a"] * p["w"] * shock_ok,
        "H_A": p["b"] * p["l"] + (p["b"] + p["a"] * p["wr"]) * shock_ok,
        "H_C": (p["c"] * p["l"] + (p["c"] + p["a"] * p["wn"]) * shock_ok
                + (1 - p["l"]) * p["w0"]),
    }


@pytest.fixture(scope="session")
def toy_model():
    return toy_system()


@pytest.fixture(scope="session")
def toy_kernel(toy_model):
    return build(toy_model)


# ---------------------------------------------------------------------------
# randomized valid models
# ---------------------------------------------------------------------------

def random_ph(rng, z, scale=(0.3, 0.95)) -> DiscretePH:
    alpha = rng.dirichlet(np.ones(z))
    S = rng.dirichlet(np.ones(z + 1), size=z)[:, :z] * rng.uniform(*scale)
    return DiscretePH(alpha, S)


def random_unit(rng, m, t, eps) -> OnlineUnitModel:
    rows_t = rng.dirichlet(np.ones(m + 2), size=m)
    rows_w = rng.dirichlet(np.ones(m + 2), size=m)
    return OnlineUnitModel(
        alpha=rng.dirichlet(np.ones(m)),
        T=rows_t[:, :m], T_r0=rows_t[:, m], T_nr0=rows_t[:, m + 1],
        m1=int(rng.integers(1, m + 1)),
        W=rows_w[:, :m], W_r0=rows_w[:, m], W_nr0=rows_w[:, m + 1],
        omega0=float(rng.uniform(0, 1)),
        shock=random_ph(rng, t), inspection=random_ph(rng, eps))


def random_system(rng, max_n=3, max_dim=3) -> SystemModel:
    n = int(rng.integers(1, max_n + 1))
    return SystemModel(
        unit=random_unit(rng, int(rng.integers(1, max_dim + 1)),
                         int(rng.integers(1, max_dim + 1)),
                         int(rng.integers(1, max_dim + 1))),
        repair=random_ph(rng, int(rng.integers(1, max_dim + 1))),
        maintenance=random_ph(rng, int(rng.integers(1, max_dim + 1))),
        vacation=random_ph(rng, int(rng.integers(1, max_dim + 1))),
        n=n, R=int(rng.integers(1, n + 1)))


def random_econ(rng, model) -> EconomicParams:
    d = model.dims
    return EconomicParams(
        B=float(rng.uniform(5, 50)), c0=rng.uniform(0, 5, d.m),
        cr1=rng.uniform(0, 5, d.z1), cr2=rng.uniform(0, 5, d.z2),
        H=float(rng.uniform(0, 5)), C=float(rng.uniform(5, 50)),
        G=float(rng.uniform(0, 5)), fcr=float(rng.uniform(0, 5)),
        fmi=float(rng.uniform(0, 5)), fnu=float(rng.uniform(0, 50)))
