import json

from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

import pytest

from decolab import exception_handler, utils
from decolab.config import config_diagnostics
from decolab.exceptions import (
    ConfigError,
    InvalidParameter,
    NoCrossover,
    OutputError,
    QuadratureError,
)
from decolab.settings import decolab_settings
from test_app.utils import scenario_document


class TestErrors:
    @pytest.mark.parametrize(
        "error_message, expected_response",
        [
            (
                "Error message.",
                {"title": "Invalid configuration.", "detail": ["Error message."]},
            ),
            (
                [f"Error message {i}." for i in range(2)],
                {
                    "title": "Validation error.",
                    "detail": ["Error message 0.", "Error message 1."],
                },
            ),
            (
                {"field": "Error message."},
                {
                    "title": "Validation error.",
                    "invalid_params": [{"name": "field", "reason": ["Error message."]}],
                },
            ),
            (
                {"non_field_errors": ["Error message."]},
                {"title": "Validation error.", "detail": ["Error message."]},
            ),
            (
                {"params": {"modes": {"0": {"gamma": ["Error message."]}}}},
                {
                    "title": "Validation error.",
                    "invalid_params": [
                        {"name": "params.modes.0.gamma", "reason": ["Error message."]}
                    ],
                },
            ),
        ],
    )
    def test_config_error_ok(self, error_message, expected_response):
        data, exit_code = exception_handler(ConfigError(error_message))

        assert data == expected_response
        assert exit_code == 2

    @pytest.mark.parametrize(
        "exc, expected_response, expected_code",
        [
            (ConfigError(), {"title": "Invalid configuration."}, 2),
            (NoCrossover(), {"title": "No crossover on the searched horizon."}, 3),
            (
                QuadratureError("Integrand is singular."),
                {
                    "title": "Quadrature did not converge.",
                    "detail": ["Integrand is singular."],
                },
                3,
            ),
            (
                InvalidParameter({"eta": ["Must lie in (0, 1)."]}),
                {
                    "title": "Invalid parameter.",
                    "invalid_params": [
                        {"name": "eta", "reason": ["Must lie in (0, 1)."]}
                    ],
                },
                3,
            ),
            (OutputError(), {"title": "Could not write outputs."}, 4),
        ],
    )
    def test_decolab_error_ok(self, exc, expected_response, expected_code):
        data, exit_code = exception_handler(exc)

        assert data == expected_response
        assert exit_code == expected_code

    def test_os_error_ok(self):
        data, exit_code = exception_handler(PermissionError("Permission denied"))

        assert data == {
            "title": "Could not write outputs.",
            "detail": ["Permission denied"],
        }
        assert exit_code == 4

    def test_unhandled_error_ok(self, caplog):
        data, exit_code = exception_handler(ZeroDivisionError("boom"))

        assert data == {"title": "Server error."}
        assert exit_code == 1
        assert "boom" in caplog.text

    def test_scenario_context_ok(self):
        data, _ = exception_handler(NoCrossover(), {"scenario": "khalfin.json"})

        assert data["scenario"] == "khalfin.json"

    def test_extra_handlers_ok(self, mocker, override_settings):
        handler = mocker.patch("test_app.utils.handle_error")
        override_settings(EXTRA_HANDLERS=["test_app.utils.handle_error"])

        exc = NoCrossover()
        exception_handler(exc)
        handler.assert_called_once_with(exc)

    def test_serializer_validation_error_ok(self):
        exc = serializers.ValidationError({"eta": ["Must lie in (0, 1)."]})
        data, exit_code = exception_handler(exc)

        assert exit_code == 2
        assert data == {
            "title": "Validation error.",
            "invalid_params": [{"name": "eta", "reason": ["Must lie in (0, 1)."]}],
        }

    def test_django_validation_error_ok(self):
        data, exit_code = exception_handler(DjangoValidationError("Bad grid."))

        assert exit_code == 2
        assert data == {"title": "Validation error.", "detail": ["Bad grid."]}

    def test_extra_handlers_import_error(self, override_settings):
        override_settings(EXTRA_HANDLERS=["test_app.utils.missing_handler"])

        with pytest.raises(ImportError):
            exception_handler(OutputError())


class TestUtils:
    @pytest.mark.parametrize(
        "fields_separator, expected",
        [
            (".", {"a.b.c": 1, "a.d": 2, "e": 3}),
            ("__", {"a__b__c": 1, "a__d": 2, "e": 3}),
        ],
    )
    def test_flatten_dict_ok(self, fields_separator, expected, override_settings):
        override_settings(FIELDS_SEPARATOR=fields_separator)

        data = {"a": {"b": {"c": 1}, "d": 2}, "e": 3}
        assert utils.flatten_dict(data) == expected

    def test_flatten_dict_integer_keys_ok(self):
        assert utils.flatten_dict({"modes": {0: {"gamma": 1}}}) == {
            "modes.0.gamma": 1
        }

    @pytest.mark.parametrize(
        "value, expected",
        [
            (float("inf"), "inf"),
            (float("nan"), None),
            (complex(1.0, -2.0), [1.0, -2.0]),
            ((1, 2.5), [1, 2.5]),
        ],
    )
    def test_jsonable_ok(self, value, expected):
        assert utils.jsonable(value) == expected

    @pytest.mark.parametrize("value", [0.1, 1 / 3, 1e-300, 12345.678])
    def test_format_float_ok(self, value):
        assert float(utils.format_float(value)) == value

    def test_time_grid_ok(self):
        linear = utils.time_grid(2.0, 5)
        log = utils.time_grid(100.0, 3, "log")

        assert linear.tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]
        assert log.tolist() == pytest.approx([0.01, 1.0, 100.0])

    def test_time_grid_error(self):
        with pytest.raises(ValueError):
            utils.time_grid(1.0, 5, "cubic")


class TestSettings:
    def test_user_settings_from_env_ok(self, tmp_path, monkeypatch):
        path = tmp_path / "settings.json"
        path.write_text(json.dumps({"HBAR": 2.0}), encoding="utf-8")
        monkeypatch.setenv("DECOLAB_SETTINGS", str(path))
        monkeypatch.setenv("DECOLAB_OUT", "elsewhere")
        decolab_settings.reload()

        assert decolab_settings.HBAR == 2.0
        assert decolab_settings.OUTPUT_DIR == "elsewhere"
        assert decolab_settings.QUAD_TOLERANCE == 1e-10

    def test_unknown_setting_error(self):
        with pytest.raises(AttributeError):
            decolab_settings.NOT_A_SETTING


class TestConfigDiagnostics:
    def test_valid_ok(self):
        assert config_diagnostics(json.dumps(scenario_document("modes"))) == []

    def test_negative_rate_ok(self):
        document = scenario_document(
            "modes", params={"modes": [{"a0": 1.0, "gamma": -1.0}]}
        )

        assert config_diagnostics(json.dumps(document)) == [
            {
                "name": "params.modes.0.gamma",
                "reason": ["Decay rates must be nonnegative."],
            }
        ]

    def test_overlapping_bands_ok(self):
        document = scenario_document("bipart")
        document["params"]["part2"]["form_factor"]["support"] = [3.0, 24.0]

        diagnostics = config_diagnostics(json.dumps(document))
        assert len(diagnostics) == 1
        assert diagnostics[0]["name"] == "params.non_field_errors"

    def test_all_violations_reported_ok(self):
        document = scenario_document(
            "modes", time_grid={"t_max": -1.0, "n_points": 1}, extra=True
        )

        names = [d["name"] for d in config_diagnostics(json.dumps(document))]
        assert names == ["extra", "time_grid.t_max", "time_grid.n_points"]

    @pytest.mark.parametrize(
        "text, expected",
        [
            ('{"kind": "modes",\n  "params": }', "line 2 column"),
            ("", "line 1 column 1"),
        ],
    )
    def test_malformed_json_ok(self, text, expected):
        diagnostics = config_diagnostics(text)

        assert diagnostics[0]["name"] == "non_field_errors"
        assert expected in diagnostics[0]["reason"][0]

    def test_unknown_kind_ok(self):
        document = scenario_document("modes", kind="cascade")

        assert config_diagnostics(json.dumps(document)) == [
            {"name": "kind", "reason": ['"cascade" is not a valid choice.']}
        ]

    @pytest.mark.parametrize("omega0", [10.0, 10.0 * (1 + 1e-12), 0.0])
    def test_level_on_band_edge_error(self, omega0):
        document = scenario_document("friedrichs", params={"omega0": omega0})

        assert config_diagnostics(json.dumps(document)) == [
            {
                "name": "params.omega0",
                "reason": ["The level must not sit on a band edge."],
            }
        ]

    def test_open_band_ok(self):
        document = scenario_document("bipart")
        document["params"]["part2"]["form_factor"]["support"] = [6.0]

        assert config_diagnostics(json.dumps(document)) == []

    def test_open_band_overlap_error(self):
        document = scenario_document("bipart")
        document["params"]["part2"]["form_factor"]["support"] = [3.0]

        diagnostics = config_diagnostics(json.dumps(document))
        assert [d["name"] for d in diagnostics] == ["params.non_field_errors"]

    @pytest.mark.parametrize("z0", ["1-0.01j", [1.0], [1.0, "x"], [True, 0.0]])
    def test_complex_field_error(self, z0):
        document = scenario_document("basis", params={"z0": z0})

        assert config_diagnostics(json.dumps(document)) == [
            {"name": "params.z0", "reason": ["Expected a pair of numbers [re, im]."]}
        ]
