"""Wrapper contract: training-loop shape, coalescing, CLI parity."""

import json
import subprocess
import sys

import pytest

import gdpnum

CLI = [sys.executable, "-m", "dpgdp"]

# small, fast parity corpus spanning the parameter space
PARITY_CONFIGS = [
    (2.0, 0.2, 50),
    (2.0, 0.05, 120),
    (3.0, 0.1, 80),
    (4.0, 0.33, 60),
    (4.0, 0.01, 200),
    (6.0, 0.25, 100),
    (8.0, 0.1, 150),
    (9.4, 0.32768, 40),
    (12.0, 0.5, 30),
    (16.0, 0.02, 250),
]


def cli_report(sigma, q, count, delta=None):
    config = {
        "mechanisms": [
            {"kind": "subsampled_gaussian", "sigma": sigma, "q": q, "count": count}
        ]
    }
    if delta is not None:
        config["delta_query"] = delta
    proc = subprocess.run(
        CLI + ["account", "--config", "/dev/stdin"],
        input=json.dumps(config),
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_training_loop_shape():
    accountant = gdpnum.CTDAccountant()
    for _ in range(40):
        accountant.step(noise_multiplier=2.0, sample_rate=0.1)
    mu, regret = accountant.get_mu_and_regret()
    assert mu > 0
    assert 0 <= regret <= 1


def test_identical_steps_coalesce():
    accountant = gdpnum.CTDAccountant()
    for _ in range(2000):
        accountant.step(noise_multiplier=9.4, sample_rate=0.32768)
    assert accountant.steps == [(9.4, 0.32768, 2000)]


def test_alternating_steps_form_two_groups():
    accountant = gdpnum.CTDAccountant()
    accountant.step(noise_multiplier=1.0, sample_rate=0.1)
    accountant.step(noise_multiplier=2.0, sample_rate=0.1)
    accountant.step(noise_multiplier=2.0, sample_rate=0.1)
    assert accountant.steps == [(1.0, 0.1, 1), (2.0, 0.1, 2)]


def test_empty_accountant_raises():
    accountant = gdpnum.CTDAccountant()
    with pytest.raises(gdpnum.EmptyAccountantError):
        accountant.get_mu_and_regret()


def test_invalid_step_rejected():
    accountant = gdpnum.CTDAccountant()
    with pytest.raises(gdpnum.InvalidStepError):
        accountant.step(noise_multiplier=0.0, sample_rate=0.1)
    with pytest.raises(gdpnum.InvalidStepError):
        accountant.step(noise_multiplier=1.0, sample_rate=1.5)


@pytest.mark.parametrize("sigma,q,count", PARITY_CONFIGS)
def test_parity_with_cli(sigma, q, count):
    accountant = gdpnum.CTDAccountant()
    for _ in range(count):
        accountant.step(noise_multiplier=sigma, sample_rate=q)
    mu, regret = accountant.get_mu_and_regret()
    eps = accountant.get_epsilon(1e-5)
    report = cli_report(sigma, q, count, delta=1e-5)
    assert abs(mu - report["mu"]) <= 1e-9
    assert abs(regret - report["regret"]) <= 1e-9
    assert abs(eps - report["epsilon_at_delta"]) <= 1e-9


def test_get_epsilon_round_trip():
    accountant = gdpnum.CTDAccountant()
    for _ in range(60):
        accountant.step(noise_multiplier=2.0, sample_rate=0.2)
    eps = accountant.get_epsilon(1e-6)
    report = cli_report(2.0, 0.2, 60, delta=1e-6)
    assert report["delta_at_epsilon"] <= 1e-6
    assert abs(eps - report["epsilon_at_delta"]) <= 1e-9


def test_delta_below_residual_raises():
    accountant = gdpnum.CTDAccountant()
    accountant.step(noise_multiplier=2.0, sample_rate=0.2)
    with pytest.raises(gdpnum.AccountantError):
        accountant.get_epsilon(1e-200)


def test_queries_do_not_mutate_state():
    accountant = gdpnum.CTDAccountant()
    for _ in range(10):
        accountant.step(noise_multiplier=3.0, sample_rate=0.1)
    before = accountant.steps
    accountant.get_mu_and_regret()
    assert accountant.steps == before


def test_no_finite_mu_translation():
    from gdpnum.accountant import _translate

    fake = subprocess.CompletedProcess(
        args=[], returncode=3, stdout="",
        stderr="error: no finite GDP parameter exists "
               "(residual_delta_inf=0.05)",
    )
    with pytest.raises(gdpnum.NoFiniteMuError) as err:
        _translate(fake)
    assert err.value.residual_delta_inf == pytest.approx(0.05)
    assert err.value.code == 3


def test_grid_step_forwarded():
    accountant = gdpnum.CTDAccountant(grid_step=2e-4)
    accountant.step(noise_multiplier=2.0, sample_rate=0.2)
    config = accountant._config(delta=None)
    assert config["grid_step"] == 2e-4
