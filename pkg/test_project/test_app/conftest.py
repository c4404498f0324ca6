import json

import pytest

from decolab.modes import DecayMode, ModeCatalogue
from decolab.omnes import OmnesConfig
from decolab.poles import DensityOfStates, FormFactor, PoleResult
from decolab.settings import decolab_settings
from test_app.factories import faker
from test_app.utils import FAKER_SEED, scenario_document


@pytest.fixture(autouse=True)
def isolated_settings():
    """Ignore DECOLAB_* variables and reseed the factories for every test."""
    decolab_settings.reload({})
    faker.seed_instance(FAKER_SEED)
    yield
    decolab_settings.reload()


@pytest.fixture
def override_settings():
    def override(**values):
        decolab_settings.reload(values)

    return override


@pytest.fixture
def two_mode_catalogue():
    return ModeCatalogue((DecayMode(1.0, 1.0), DecayMode(1.0, 3.0)))


@pytest.fixture
def flat_band():
    return FormFactor("flat_band", 0.1, (0.0, 10.0))


@pytest.fixture
def unit_density():
    return DensityOfStates()


@pytest.fixture
def omnes_config():
    """m omega / 2 hbar = 1, L0 = 10, gamma0 = 0.01."""
    return OmnesConfig(
        m=1.0,
        omega=2.0,
        L0=10.0,
        amp_a=1.0,
        amp_b=1.0,
        cutoff_n=200,
        pole=PoleResult(0.0, 0.0, 0.01),
        hbar=1.0,
    )


@pytest.fixture
def scenario_file(tmp_path):
    """Write a scenario document and return its path."""

    def write(kind=None, document=None, raw=None, **overrides):
        path = tmp_path / ("%s.json" % (kind or "scenario"))
        if raw is not None:
            path.write_text(raw, encoding="utf-8")
        else:
            document = document or scenario_document(kind, **overrides)
            path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return write
