import json
import os

import pytest

from app.bs_engine import BsContext, OptionSpec
from app.levy_core import LevyModel, MertonParams
from app.pide_solver import PideGrid

SIGMA = 0.2
LAMBDA_M = 5.0
GAMMA_J = -0.05
DELTA_J = 0.1
STRIKE = 1.0
MATURITY = 1.0
SPOT = 1.0
ALPHA = 10.0
SEED = 42

# Reference group parameters, evaluated independently
SIGMA_BAR_SQ = 0.095606914
M3 = -0.00516
M4 = 0.0016525
MODEL_FACTOR = 0.0013739

# At-the-money put seller price at ALPHA, evaluated independently
REFERENCE_BS_PRICE = 0.1228648
REFERENCE_LINEAR_PRICE = 0.1240651
REFERENCE_NONLINEAR = 0.0044231
REFERENCE_SELLER_PRICE = 0.128488

REFERENCE_CONFIG = {
    "model": {
        "sigma": SIGMA,
        "lambda_m": LAMBDA_M,
        "gamma_j": GAMMA_J,
        "delta_j": DELTA_J,
        "measure": "memm",
    },
    "option": {"kind": "put", "strike": STRIKE, "maturity": MATURITY, "spot": SPOT},
    "grid": {"n_time": 40, "m_half": 100, "x0": -2.0, "d": 0.02, "k_half": 50, "alpha": ALPHA},
    "run": {"seed": SEED, "n_paths": 200000, "format": "csv"},
}


@pytest.fixture()
def merton_params():
    return MertonParams(sigma=SIGMA, lambda_m=LAMBDA_M, gamma_j=GAMMA_J, delta_j=DELTA_J)


@pytest.fixture()
def merton_model(merton_params):
    return LevyModel.from_merton(merton_params)


@pytest.fixture()
def black_scholes_model():
    return LevyModel(sigma=SIGMA)


@pytest.fixture()
def atm_put():
    return OptionSpec(kind="put", strike=STRIKE, maturity=MATURITY, spot=SPOT)


@pytest.fixture()
def atm_call():
    return OptionSpec(kind="call", strike=STRIKE, maturity=MATURITY, spot=SPOT)


@pytest.fixture()
def bs_context():
    return BsContext(vol=SIGMA)


@pytest.fixture()
def reference_grid():
    return PideGrid.reference(alpha=ALPHA)


@pytest.fixture()
def write_config(tmp_path):
    """Write a run configuration to a temporary JSON file and return its path."""

    def _write(config=None, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(REFERENCE_CONFIG if config is None else config))
        return str(path)

    return _write


# Generate mock environment variables for testing
@pytest.fixture(autouse=True)
def pricer_environment(monkeypatch):
    for key in list(os.environ):
        if key.startswith("PRICER_"):
            monkeypatch.delenv(key)
    monkeypatch.setenv("LOG_LEVEL", "DEBUG")
