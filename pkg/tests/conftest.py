"""Shared fixtures: mechanism corpus and the expensive composed runs."""

import pytest

from dpgdp import MechanismSpec, RunConfig, run_account

Q_CIFAR = 16384 / 50000


@pytest.fixture(scope="session")
def headline_result():
    """The sigma=9.4, q=16384/50000, T=2000 run used across the suite."""
    config = RunConfig(
        mechanisms=(
            (MechanismSpec(kind="subsampled_gaussian", sigma=9.4, q=Q_CIFAR), 2000),
        ),
        delta_query=1e-5,
    )
    return run_account(config)


@pytest.fixture(scope="session")
def laplace_result():
    config = RunConfig(
        mechanisms=((MechanismSpec(kind="laplace", b=1.0), 1),), delta_query=1e-5
    )
    return run_account(config)


@pytest.fixture(scope="session")
def rr_result():
    config = RunConfig(
        mechanisms=((MechanismSpec(kind="randomized_response", eps=1.0), 1),)
    )
    return run_account(config)


@pytest.fixture(scope="session")
def small_corpus_results():
    """Cheap composed runs covering distinct mechanism families."""
    configs = {
        "gaussian_mu1": RunConfig(
            mechanisms=((MechanismSpec(kind="gaussian", sigma=1.0), 1),)
        ),
        "laplace_b1": RunConfig(
            mechanisms=((MechanismSpec(kind="laplace", b=1.0), 1),)
        ),
        "rr_eps1": RunConfig(
            mechanisms=((MechanismSpec(kind="randomized_response", eps=1.0), 1),)
        ),
        "dpsgd_small": RunConfig(
            mechanisms=(
                (MechanismSpec(kind="subsampled_gaussian", sigma=2.0, q=0.2), 50),
            )
        ),
        "gaussian_seq": RunConfig(
            mechanisms=((MechanismSpec(kind="gaussian", sigma=2.0), 8),)
        ),
    }
    return {name: run_account(cfg) for name, cfg in configs.items()}
