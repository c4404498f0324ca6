import copy
import csv
from enum import Enum, unique
from typing import Dict, List

FAKER_SEED = 20240917


@unique
class CurveFiles(Enum):
    MODES = "curve.csv"
    FRIEDRICHS = "survival.csv"
    OMNES = "decay.csv"
    BASIS = "convergence.csv"
    KHALFIN = "profile.csv"
    BIPART = "parts.csv"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def for_kind(cls, kind: str) -> "CurveFiles":
        return cls[kind.upper()]


SCENARIOS = {
    "modes": {
        "kind": "modes",
        "time_grid": {"t_max": 5.0, "n_points": 51},
        "params": {
            "modes": [{"a0": 1.0, "gamma": 1.0}, {"a0": 1.0, "gamma": 3.0}],
        },
    },
    "friedrichs": {
        "kind": "friedrichs",
        "time_grid": {"t_max": 80.0, "n_points": 161},
        "params": {
            "form_factor": {
                "kind": "flat_band",
                "strength": 0.1,
                "support": [0.0, 10.0],
            },
            "omega0": 5.0,
            "n_modes": 2000,
        },
    },
    "omnes": {
        "kind": "omnes",
        "time_grid": {"t_max": 5.0, "n_points": 51},
        "params": {
            "m": 1.0,
            "omega": 2.0,
            "hbar": 1.0,
            "L0": 10.0,
            "a": [1.0, 0.0],
            "b": [1.0, 0.0],
            "N": 200,
            "gamma0": 0.01,
            "omega0p": 0.0,
        },
    },
    "basis": {
        "kind": "basis",
        "time_grid": {"t_max": 20.0, "n_points": 41},
        "params": {"z0": [1.0, -0.01], "z1": [3.0, -0.5]},
    },
    "khalfin": {
        "kind": "khalfin",
        "time_grid": {"t_max": 200.0, "n_points": 201},
        "params": {
            "model": 2,
            "z0": [1.0, -0.02],
            "z1": [3.0, -1.0],
            "weights": [0.0, 1.0, 1.0, 1.0, 1.0],
        },
    },
    "bipart": {
        "kind": "bipart",
        "time_grid": {"t_max": 100.0, "n_points": 201},
        "params": {
            "part1": {
                "level": 2.0,
                "form_factor": {
                    "kind": "flat_band",
                    "strength": 0.08,
                    "support": [0.0, 4.0],
                },
            },
            "part2": {
                "level": 15.0,
                "form_factor": {
                    "kind": "flat_band",
                    "strength": 0.1,
                    "support": [6.0, 24.0],
                },
            },
            "n_grid": 1000,
        },
    },
}


def scenario_document(kind: str, /, params: Dict = None, **overrides) -> Dict:
    """A copy of the reference scenario for `kind` with shallow overrides."""
    document = copy.deepcopy(SCENARIOS[kind])
    if params:
        document["params"].update(params)
    document.update(overrides)
    return document


def read_csv(path) -> List[List[str]]:
    with open(path, encoding="utf-8", newline="") as fp:
        return list(csv.reader(fp))


def handle_error(exc: Exception) -> Exception:
    return exc
