"""
Omnes pendulum in a bath.

Two Gaussian branches separated by L0 evolve on the damped ladder n z0.
Their interference term decays as

    |rho_12(t)| / |a b| = exp(-k (1 - exp(-gamma0 t / hbar) cos(omega0' t / hbar)))

with k = (m omega / 2 hbar) L0^2, so the decoherence rate is
gamma_eff = k gamma0.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from .coherent import (
    QuasiCoherentState,
    build_quasi_coherent,
    macroscopicity_check,
    overlap_direct,
    survival_amplitude,
)
from .exceptions import (
    InsufficientSamples,
    InvalidParameter,
    InvalidRegime,
    NonRelaxingCatalogue,
    UndefinedEffectiveRate,
)
from .poles import MIN_FIT_SAMPLES, PoleResult
from .settings import decolab_settings

logger = logging.getLogger(__name__)

TimeLike = Union[float, Sequence[float], np.ndarray]

MAX_FIT_FRACTION = 0.1


def alpha_from_length(m: float, omega: float, hbar: float, L0: float) -> float:
    """sqrt(m omega / 2 hbar) L0."""
    if not (m > 0 and omega > 0 and hbar > 0):
        raise InvalidParameter("Mass, frequency and hbar must be positive.")
    if L0 < 0:
        raise InvalidParameter({"L0": ["Must be nonnegative."]})
    return math.sqrt(m * omega / (2 * hbar)) * L0


@dataclass(frozen=True)
class OmnesConfig:
    """
    Superposition a|alpha_1(0)> + b|alpha_2(0)> with alpha_1(0) = 0.

    The weights are rescaled so that |a|^2 + |b|^2 = 1; the small
    <alpha_1|alpha_2> cross term of the truncated states is reported by
    `state_norm` instead of being folded into the weights. Weights that
    normalize the truncated superposition exactly, cross term included,
    are `exact_weights`, the stored ones divided by sqrt(state_norm).
    """

    m: float
    omega: float
    L0: float
    amp_a: complex
    amp_b: complex
    cutoff_n: int
    pole: PoleResult
    hbar: float = None
    k_lower: float = None

    def __post_init__(self):
        hbar = decolab_settings.HBAR if self.hbar is None else float(self.hbar)
        object.__setattr__(self, "hbar", hbar)
        # validates m, omega, hbar and L0
        alpha_from_length(self.m, self.omega, hbar, self.L0)

        a, b = complex(self.amp_a), complex(self.amp_b)
        norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if norm == 0:
            raise InvalidParameter("Superposition weights must not both vanish.")
        object.__setattr__(self, "amp_a", a / norm)
        object.__setattr__(self, "amp_b", b / norm)

    @property
    def alpha1(self) -> float:
        return 0.0

    @property
    def alpha2(self) -> float:
        return alpha_from_length(self.m, self.omega, self.hbar, self.L0)

    @property
    def exponent_scale(self) -> float:
        """(m omega / 2 hbar) L0^2, equal to alpha_2(0)^2."""
        return self.m * self.omega * self.L0**2 / (2 * self.hbar)

    @property
    def state_norm(self) -> float:
        """<psi|psi> of the truncated superposition, cross term included."""
        s1, s2 = initial_states(self)
        cross = np.conj(self.amp_a) * self.amp_b * overlap_direct(s1, s2)
        return float(1.0 + 2 * cross.real)

    @property
    def exact_weights(self) -> Tuple[complex, complex]:
        scale = math.sqrt(self.state_norm)
        return self.amp_a / scale, self.amp_b / scale

    def to_dict(self) -> Dict:
        return {
            "m": self.m,
            "omega": self.omega,
            "hbar": self.hbar,
            "L0": self.L0,
            "a": [self.amp_a.real, self.amp_a.imag],
            "b": [self.amp_b.real, self.amp_b.imag],
            "N": self.cutoff_n,
            "gamma0": self.pole.gamma0,
            "omega0p": self.pole.omega0_prime,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "OmnesConfig":
        pole = PoleResult(float(data.get("omega0p", 0.0)), 0.0, float(data["gamma0"]))
        return cls(
            m=float(data["m"]),
            omega=float(data["omega"]),
            L0=float(data["L0"]),
            amp_a=complex(*data["a"]),
            amp_b=complex(*data["b"]),
            cutoff_n=int(data["N"]),
            pole=pole,
            hbar=data.get("hbar"),
            k_lower=data.get("k_lower"),
        )


def initial_states(cfg: OmnesConfig) -> Tuple[QuasiCoherentState, QuasiCoherentState]:
    return (
        build_quasi_coherent(cfg.alpha1, cfg.cutoff_n),
        build_quasi_coherent(cfg.alpha2, cfg.cutoff_n),
    )


def _evolved_overlaps(cfg: OmnesConfig, t: TimeLike) -> np.ndarray:
    """O[i, k] = <alpha_i(0)|alpha_k(t)>, with time as the leading axis."""
    states = initial_states(cfg)
    z0 = cfg.pole.z0
    overlaps = [
        [survival_amplitude(bra.coeffs, ket.coeffs, z0, t, cfg.hbar) for ket in states]
        for bra in states
    ]
    return np.moveaxis(np.array(overlaps, dtype=complex), (0, 1), (-2, -1))


def nd_components(cfg: OmnesConfig, t: TimeLike) -> np.ndarray:
    """
    Interference part of rho(t) in the {|alpha_1(0)>, |alpha_2(0)>} frame.

    rho_ND(t) = a b* |alpha_1(t)><alpha_2(t)| + h.c., so each entry is built
    from the four overlaps <alpha_i(0)|alpha_k(t)>. Returns a 2x2 matrix, or
    an array of them when `t` is a grid.
    """
    report = macroscopicity_check(cfg.alpha1, cfg.alpha2, cfg.cutoff_n, cfg.k_lower)
    if not report.macroscopic:
        raise InvalidRegime(
            {
                "lower_ok": report.lower_ok,
                "upper_ok": report.upper_ok,
                "delta_alpha": report.delta_alpha,
            }
        )

    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameter({"t": ["Times must be nonnegative."]})

    o = _evolved_overlaps(cfg, t)
    ab = cfg.amp_a * np.conj(cfg.amp_b)
    rho = np.empty(o.shape, dtype=complex)
    for i in range(2):
        for j in range(2):
            rho[..., i, j] = ab * o[..., i, 0] * np.conj(o[..., j, 1]) + np.conj(
                ab
            ) * o[..., i, 1] * np.conj(o[..., j, 0])
    return rho


def decoherence_factor(cfg: OmnesConfig, t: TimeLike) -> Union[complex, np.ndarray]:
    """
    The a b* coefficient of rho_12, <alpha_1(0)|alpha_1(t)> <alpha_2(t)|alpha_2(0)>.

    Computed from the truncated states without a macroscopicity check.
    """
    t = np.asarray(t, dtype=float)
    s1, s2 = initial_states(cfg)
    z0 = cfg.pole.z0
    first = survival_amplitude(s1.coeffs, s1.coeffs, z0, t, cfg.hbar)
    second = np.conj(survival_amplitude(s2.coeffs, s2.coeffs, z0, t, cfg.hbar))
    value = first * second
    return complex(value) if np.ndim(value) == 0 else value


def closed_form_nd_modulus(
    cfg: OmnesConfig, t: TimeLike, envelope: bool = True
) -> Union[float, np.ndarray]:
    t = np.asarray(t, dtype=float)
    damping = np.exp(-cfg.pole.gamma0 * t / cfg.hbar)
    if not envelope:
        damping = damping * np.cos(cfg.pole.omega0_prime * t / cfg.hbar)
    value = np.exp(-cfg.exponent_scale * (1 - damping))
    return float(value) if value.ndim == 0 else value


def gamma_eff_omnes(cfg: OmnesConfig) -> float:
    return cfg.exponent_scale * cfg.pole.gamma0


def relaxation_time_omnes(cfg: OmnesConfig) -> float:
    if cfg.pole.gamma0 == 0:
        raise NonRelaxingCatalogue()
    return cfg.hbar / cfg.pole.gamma0


def decoherence_time_omnes(cfg: OmnesConfig) -> float:
    """t_D = hbar / gamma_eff = (2 hbar / m omega) L0^-2 t_R."""
    gamma_eff = gamma_eff_omnes(cfg)
    if gamma_eff == 0:
        raise UndefinedEffectiveRate("gamma_eff vanishes, no decoherence.")
    return cfg.hbar / gamma_eff


def short_time_rate_fit(
    cfg: OmnesConfig, t_max_fraction: float, n_points: int = 101
) -> float:
    """
    Fit exp(-gamma_fit t) to the envelope on [0, t_max_fraction * t_R].

    The model has no free amplitude, so the fit is a least-squares line
    through the origin in log space. The rate is returned in energy units,
    like gamma_eff.
    """
    if not 0 < t_max_fraction <= MAX_FIT_FRACTION:
        raise InvalidParameter(
            {"t_max_fraction": ["Must lie in (0, %s]." % MAX_FIT_FRACTION]}
        )
    if n_points < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            "Need at least %d points in the fit window." % MIN_FIT_SAMPLES
        )
    if cfg.pole.gamma0 == 0:
        return 0.0

    t = np.linspace(0.0, t_max_fraction * relaxation_time_omnes(cfg), n_points)
    log_modulus = np.log(closed_form_nd_modulus(cfg, t, envelope=True))
    gamma_fit = -np.dot(t, log_modulus) / np.dot(t, t) * cfg.hbar

    logger.debug("Short-time fit over %d points: %r" % (n_points, gamma_fit))
    return float(gamma_fit)


def decay_curve(cfg: OmnesConfig, t_grid: Sequence[float]) -> np.ndarray:
    """Rows of (t, |simulated factor|, envelope, exact modulus)."""
    t_grid = np.asarray(t_grid, dtype=float)
    return np.column_stack(
        [
            t_grid,
            np.abs(decoherence_factor(cfg, t_grid)),
            closed_form_nd_modulus(cfg, t_grid, envelope=True),
            closed_form_nd_modulus(cfg, t_grid, envelope=False),
        ]
    )
