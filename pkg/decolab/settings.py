import json
import logging
import os
from typing import Dict

import django
from django.conf import settings

if not settings.configured:
    settings.configure(USE_I18N=False)
    django.setup()

from rest_framework.settings import APISettings  # noqa: E402

logger = logging.getLogger(__name__)

SETTINGS_ENV = "DECOLAB_SETTINGS"
OUTPUT_ENV = "DECOLAB_OUT"

DEFAULTS = {
    "HBAR": 1.0,
    "EXTRA_HANDLERS": [],
    "FIELDS_SEPARATOR": ".",
    "OUTPUT_DIR": "decolab-out",
    # quadrature
    "QUAD_TOLERANCE": 1e-10,
    "QUAD_MAX_REFINEMENTS": 200,
    "PV_WINDOW_FRACTION": 0.01,
    # coherent states
    "MAX_CUTOFF": 500,
    "K_LOWER": 5.0,
    "SERIES_PRECISION": 60,
    # eigenbases
    "DEGENERACY_TOL": 1e-8,
    "HERMITIAN_TOL": 1e-12,
    "JACOBI_TOLERANCE": 1e-13,
    "JACOBI_MAX_SWEEPS": 100,
    # crossover search
    "CROSSOVER_ETA": 0.01,
    "CROSSOVER_HORIZON": 1000.0,
}

# List of settings that may be in string import notation
IMPORT_STRINGS = ("EXTRA_HANDLERS",)


def load_user_settings() -> Dict:
    """
    Read user settings from the environment.

    `DECOLAB_SETTINGS` may name a JSON file holding an object of overrides,
    `DECOLAB_OUT` overrides the default output directory.
    """
    user_settings = {}

    path = os.environ.get(SETTINGS_ENV)
    if path:
        logger.debug("Loading user settings from %s" % path)
        with open(path, encoding="utf-8") as fp:
            user_settings.update(json.load(fp))

    output_dir = os.environ.get(OUTPUT_ENV)
    if output_dir:
        user_settings["OUTPUT_DIR"] = output_dir

    return user_settings


class DecolabSettings(APISettings):
    """
    REST framework settings object fed from the environment instead of the
    Django settings module.
    """

    @property
    def user_settings(self) -> Dict:
        if not hasattr(self, "_user_settings"):
            self._user_settings = load_user_settings()
        return self._user_settings

    def reload(self, user_settings: Dict = None):
        super().reload()
        if user_settings is not None:
            self._user_settings = user_settings


decolab_settings = DecolabSettings(None, DEFAULTS, IMPORT_STRINGS)
