"""
Scenario files and their serializers.

A scenario is a single JSON object with a `kind` tag, a `time_grid` and a
kind-specific `params` block. Every violation is collected before a
`ConfigError` is raised with the serializer's nested errors.
"""

import json
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Dict, List, Optional

from rest_framework import serializers

from .coherent import macroscopicity_check
from .exception_handler import exception_handler
from .exceptions import ConfigError
from .omnes import alpha_from_length
from .poles import on_band_edge
from .settings import decolab_settings

logger = logging.getLogger(__name__)

SCENARIO_KINDS = ("modes", "friedrichs", "omnes", "basis", "khalfin", "bipart")
FORM_FACTOR_KINDS = ("flat_band", "gaussian", "lorentzian")


def positive(value):
    if not value > 0:
        raise serializers.ValidationError("Ensure this value is greater than 0.")


def nonnegative_rate(value):
    if value < 0:
        raise serializers.ValidationError("Decay rates must be nonnegative.")


class ComplexField(serializers.Field):
    """A complex number written as [re, im]."""

    default_error_messages = {"invalid": "Expected a pair of numbers [re, im]."}

    def to_internal_value(self, data):
        if isinstance(data, (str, bytes, Mapping)) or not isinstance(data, Sequence):
            self.fail("invalid")
        if len(data) != 2 or any(isinstance(v, bool) for v in data):
            self.fail("invalid")
        try:
            return complex(float(data[0]), float(data[1]))
        except (TypeError, ValueError):
            self.fail("invalid")

    def to_representation(self, value):
        return [value.real, value.imag]


class StrictSerializer(serializers.Serializer):
    """Serializer that reports keys no field declares."""

    def to_internal_value(self, data):
        if not isinstance(data, Mapping):
            return super().to_internal_value(data)

        unknown = sorted(set(data) - set(self.fields))
        errors = {name: ["Unknown field."] for name in unknown}
        try:
            attrs = super().to_internal_value(data)
        except serializers.ValidationError as exc:
            errors.update(exc.detail)
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


class TimeGridSerializer(StrictSerializer):
    t_max = serializers.FloatField(validators=[positive])
    n_points = serializers.IntegerField(min_value=2)
    spacing = serializers.ChoiceField(choices=("linear", "log"), default="linear")
    t_min = serializers.FloatField(min_value=0.0, required=False)

    def validate(self, attrs):
        t_min = attrs.get("t_min")
        if t_min is not None and not t_min < attrs["t_max"]:
            raise serializers.ValidationError(
                {"t_min": ["Must be smaller than t_max."]}
            )
        if attrs["spacing"] == "log" and t_min == 0:
            raise serializers.ValidationError(
                {"t_min": ["Log spacing needs a positive start."]}
            )
        return attrs


class ModeSerializer(StrictSerializer):
    a0 = serializers.FloatField()
    gamma = serializers.FloatField(validators=[nonnegative_rate])
    omega = serializers.FloatField(default=0.0)
    phase = serializers.FloatField(default=0.0)


class ModesParamsSerializer(StrictSerializer):
    modes = serializers.ListField(child=ModeSerializer(), min_length=1)
    equilibrium = serializers.FloatField(default=0.0)
    hbar = serializers.FloatField(required=False, validators=[positive])


class FormFactorSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=FORM_FACTOR_KINDS)
    strength = serializers.FloatField(min_value=0.0)
    support = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=2, max_length=2
    )
    center = serializers.FloatField(required=False)
    width = serializers.FloatField(required=False, validators=[positive])

    def validate_support(self, value):
        if len(value) == 2 and not value[0] < value[1]:
            raise serializers.ValidationError("Expected a < b for the support [a, b].")
        return value


class OpenBandFormFactorSerializer(FormFactorSerializer):
    """A single-entry support [b] is the open band [b, omega_max]."""

    support = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=1, max_length=2
    )


class DensitySerializer(StrictSerializer):
    scale = serializers.FloatField(min_value=0.0, default=1.0)
    exponent = serializers.FloatField(min_value=0.0, default=0.0)


class QuadratureSerializer(StrictSerializer):
    tolerance = serializers.FloatField(required=False, validators=[positive])
    max_refinements = serializers.IntegerField(min_value=1, required=False)
    window_fraction = serializers.FloatField(
        max_value=0.5, required=False, validators=[positive]
    )


class FriedrichsParamsSerializer(StrictSerializer):
    form_factor = FormFactorSerializer()
    density = DensitySerializer(required=False)
    omega0 = serializers.FloatField(min_value=0.0)
    n_modes = serializers.IntegerField(min_value=10, default=2000)
    quadrature = QuadratureSerializer(required=False)
    method = serializers.ChoiceField(
        choices=("subtraction", "cauchy"), default="subtraction"
    )
    fit_window = serializers.ListField(
        child=serializers.FloatField(min_value=0.0),
        min_length=2,
        max_length=2,
        required=False,
    )
    hbar = serializers.FloatField(required=False, validators=[positive])

    def validate_fit_window(self, value):
        if not value[0] < value[1]:
            raise serializers.ValidationError("Expected start < end.")
        return value

    def validate(self, attrs):
        if on_band_edge(attrs["omega0"], attrs["form_factor"]["support"]):
            raise serializers.ValidationError(
                {"omega0": ["The level must not sit on a band edge."]}
            )
        return attrs


class OmnesParamsSerializer(StrictSerializer):
    m = serializers.FloatField(validators=[positive])
    omega = serializers.FloatField(validators=[positive])
    hbar = serializers.FloatField(required=False, validators=[positive])
    L0 = serializers.FloatField(min_value=0.0)
    a = ComplexField(default=complex(1.0))
    b = ComplexField(default=complex(1.0))
    N = serializers.IntegerField(min_value=0)
    gamma0 = serializers.FloatField(validators=[nonnegative_rate])
    omega0p = serializers.FloatField(default=0.0)
    k_lower = serializers.FloatField(required=False, validators=[positive])
    fit_fraction = serializers.FloatField(
        max_value=0.1, default=0.05, validators=[positive]
    )

    def validate_N(self, value):
        if value > decolab_settings.MAX_CUTOFF:
            raise serializers.ValidationError(
                "Ensure this value is less than or equal to %d."
                % decolab_settings.MAX_CUTOFF
            )
        return value

    def validate(self, attrs):
        if attrs["a"] == 0 and attrs["b"] == 0:
            raise serializers.ValidationError(
                "Superposition weights must not both vanish."
            )
        hbar = attrs.get("hbar", decolab_settings.HBAR)
        alpha2 = alpha_from_length(attrs["m"], attrs["omega"], hbar, attrs["L0"])
        report = macroscopicity_check(0.0, alpha2, attrs["N"], attrs.get("k_lower"))
        errors = {}
        if not report.lower_ok:
            errors["L0"] = [
                "Separation %r is below the macroscopic threshold."
                % report.delta_alpha
            ]
        if not report.upper_ok:
            errors["N"] = [
                "Cutoff too small, need sqrt(2 (N + 1)) >= %r." % report.delta_alpha
            ]
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


class BasisParamsSerializer(StrictSerializer):
    """
    Either an explicit ladder (`energies` and `coeffs`) or the three-level
    ladder built from the poles `z0` and `z1`.
    """

    energies = serializers.ListField(child=ComplexField(), min_length=1, required=False)
    coeffs = serializers.ListField(child=ComplexField(), min_length=1, required=False)
    z0 = ComplexField(required=False)
    z1 = ComplexField(required=False)
    gamma_eff = serializers.FloatField(required=False, validators=[positive])
    degeneracy_tol = serializers.FloatField(required=False, validators=[positive])
    renormalize = serializers.BooleanField(default=True)
    hbar = serializers.FloatField(required=False, validators=[positive])

    def validate_energies(self, value):
        if any(z.imag > 0 for z in value):
            raise serializers.ValidationError(
                "Decay rates must be nonnegative, expected Im z <= 0."
            )
        return value

    def validate(self, attrs):
        explicit = "energies" in attrs
        poles = "z0" in attrs or "z1" in attrs
        if explicit == poles:
            raise serializers.ValidationError(
                "Give either energies and coeffs, or z0 and z1."
            )

        if explicit:
            if "coeffs" not in attrs:
                raise serializers.ValidationError(
                    {"coeffs": ["This field is required."]}
                )
            if len(attrs["coeffs"]) != len(attrs["energies"]):
                raise serializers.ValidationError(
                    {"coeffs": ["Expected one coefficient per level."]}
                )
            return attrs

        errors = {
            name: ["This field is required."]
            for name in ("z0", "z1")
            if name not in attrs
        }
        if errors:
            raise serializers.ValidationError(errors)
        if attrs["z0"].imag > 0 or attrs["z1"].imag > 0:
            raise serializers.ValidationError(
                "Decay rates must be nonnegative, expected Im z <= 0."
            )
        if "coeffs" in attrs and len(attrs["coeffs"]) != 3:
            raise serializers.ValidationError(
                {"coeffs": ["The pole ladder takes 3 coefficients."]}
            )
        return attrs


class TailSerializer(StrictSerializer):
    amplitude = serializers.FloatField()
    onset = serializers.FloatField(required=False, validators=[positive])
    exponent = serializers.FloatField(default=2.0, validators=[positive])


class KhalfinParamsSerializer(StrictSerializer):
    model = serializers.IntegerField(min_value=1, max_value=2)
    z0 = ComplexField()
    z1 = ComplexField(required=False)
    weights = serializers.ListField(
        child=serializers.FloatField(), min_length=4, max_length=5
    )
    tail = TailSerializer(required=False)
    slow_set = serializers.ListField(
        child=serializers.IntegerField(min_value=0), required=False
    )
    eta = serializers.FloatField(
        max_value=1.0, required=False, validators=[positive]
    )
    horizon = serializers.FloatField(required=False, validators=[positive])
    hbar = serializers.FloatField(required=False, validators=[positive])

    def validate_z0(self, value):
        if not value.imag < 0:
            raise serializers.ValidationError(
                "Decay rates must be positive, expected Im z0 < 0."
            )
        return value

    def validate(self, attrs):
        errors = {}
        expected = 4 if attrs["model"] == 1 else 5
        if len(attrs["weights"]) != expected:
            errors["weights"] = [
                "Model %d takes %d weights." % (attrs["model"], expected)
            ]

        if attrs["model"] == 2:
            z1 = attrs.get("z1")
            if z1 is None:
                errors["z1"] = ["This field is required."]
            elif not 0 < -attrs["z0"].imag <= -z1.imag:
                errors["z1"] = ["Expected 0 < gamma0 <= gamma1."]
            if "tail" in attrs:
                errors["tail"] = ["Model 2 has no Khalfin term."]

        if attrs.get("eta") == 1.0:
            errors["eta"] = ["Must lie in (0, 1)."]
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


class PartSerializer(StrictSerializer):
    level = serializers.FloatField(min_value=0.0)
    form_factor = OpenBandFormFactorSerializer()
    density = DensitySerializer(required=False)


class BiPartParamsSerializer(StrictSerializer):
    part1 = PartSerializer()
    part2 = PartSerializer()
    n_grid = serializers.IntegerField(min_value=10, default=1000)
    omega_max = serializers.FloatField(required=False, validators=[positive])
    perturb = serializers.FloatField(min_value=0.0, default=2.0)
    hbar = serializers.FloatField(required=False, validators=[positive])

    def validate(self, attrs):
        (lo1, hi1), (lo2, hi2) = (
            _band(attrs[name]["form_factor"]["support"]) for name in ("part1", "part2")
        )
        if not (hi1 < lo2 or hi2 < lo1):
            raise serializers.ValidationError(
                "Bands must be disjoint, expected a < b for the upper end a of "
                "one band and the lower end b of the other."
            )
        omega_max = attrs.get("omega_max")
        closed = [hi for hi in (hi1, hi2) if hi != float("inf")]
        if omega_max is not None and closed and max(closed) > omega_max:
            raise serializers.ValidationError(
                {"omega_max": ["Both bands must lie inside [0, omega_max]."]}
            )
        return attrs


def _band(support: List[float]):
    return (support[0], float("inf")) if len(support) == 1 else tuple(support)


PARAMS_SERIALIZERS = {
    "modes": ModesParamsSerializer,
    "friedrichs": FriedrichsParamsSerializer,
    "omnes": OmnesParamsSerializer,
    "basis": BasisParamsSerializer,
    "khalfin": KhalfinParamsSerializer,
    "bipart": BiPartParamsSerializer,
}


class ScenarioSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=SCENARIO_KINDS)
    params = serializers.DictField()
    time_grid = TimeGridSerializer()
    output_dir = serializers.CharField(required=False)

    def to_internal_value(self, data):
        # params can only be checked against the serializer of a valid kind
        errors, attrs = {}, None
        try:
            attrs = super().to_internal_value(data)
        except serializers.ValidationError as exc:
            errors = dict(exc.detail)

        kind = data.get("kind") if isinstance(data, Mapping) else None
        if not isinstance(kind, str):
            kind = None
        if kind in PARAMS_SERIALIZERS and "params" in data and "params" not in errors:
            serializer = PARAMS_SERIALIZERS[kind](data=data["params"])
            if serializer.is_valid():
                if attrs is not None:
                    attrs["params"] = serializer.validated_data
            else:
                errors["params"] = serializer.errors

        if errors:
            raise serializers.ValidationError(errors)
        return attrs


@dataclass(frozen=True)
class TimeGridSpec:
    t_max: float
    n_points: int
    spacing: str = "linear"
    t_min: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    params: Dict
    time_grid: TimeGridSpec
    output_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict) -> "ScenarioConfig":
        serializer = ScenarioSerializer(data=data)
        if not serializer.is_valid():
            raise ConfigError(serializer.errors)

        attrs = serializer.validated_data
        return cls(
            kind=attrs["kind"],
            params=attrs["params"],
            time_grid=TimeGridSpec(**attrs["time_grid"]),
            output_dir=attrs.get("output_dir"),
        )


def _decode_error(e: json.JSONDecodeError) -> ConfigError:
    return ConfigError(
        {
            "non_field_errors": [
                "Invalid JSON at line %d column %d: %s." % (e.lineno, e.colno, e.msg)
            ]
        }
    )


def parse_config(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise _decode_error(e)
    return ScenarioConfig.from_dict(data)


def load_config(path: str) -> ScenarioConfig:
    """Read and validate a scenario file. `OSError` propagates for unreadable files."""
    with open(path, encoding="utf-8") as fp:
        text = fp.read()
    logger.debug("Loaded scenario file %s" % path)
    return parse_config(text)


def config_diagnostics(text: str) -> List[Dict]:
    """
    Every violation in a scenario document as `invalid_params` entries,
    empty for a valid document.
    """
    try:
        parse_config(text)
    except ConfigError as e:
        payload, _ = exception_handler(e)
        diagnostics = list(payload.get("invalid_params", []))
        if payload.get("detail"):
            diagnostics.insert(
                0, {"name": "non_field_errors", "reason": payload["detail"]}
            )
        return diagnostics
    return []
