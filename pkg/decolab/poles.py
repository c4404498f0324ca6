"""
Friedrichs resonance poles.

A discrete level omega_0 coupled to a continuum with form factor lambda(w)
and mode density n(w) acquires, to second order in the coupling, the pole

    z_0 = omega_0 + delta_omega_0 - i gamma_0
    gamma_0 = pi n(omega_0) lambda(omega_0)^2
    delta_omega_0 = PV int n(w) lambda(w)^2 / (omega_0 - w) dw

This module evaluates both integrals, builds the oscillator ladder n z_0 and
provides an exact-diagonalization oracle on a discretized band.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum, unique
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg

from .exceptions import (
    EigensolverError,
    InsufficientSamples,
    InvalidParameter,
    InvalidSamples,
    QuadratureError,
)
from .settings import decolab_settings

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 8
MIN_ORACLE_MODES = 10


@unique
class FormFactorKind(Enum):
    FLAT_BAND = "flat_band"
    GAUSSIAN = "gaussian"
    LORENTZIAN = "lorentzian"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FormFactor:
    """
    Coupling profile lambda(w) on a finite band.

    `center` and `width` shape the Gaussian and Lorentzian families and
    default to the band midpoint and a quarter of the band width. The
    profile vanishes outside `support`.
    """

    kind: FormFactorKind
    strength: float
    support: Tuple[float, float]
    center: float = None
    width: float = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FormFactorKind(self.kind))
        lo, hi = (float(x) for x in self.support)
        object.__setattr__(self, "support", (lo, hi))

        if self.strength < 0:
            raise InvalidParameter({"strength": ["Must be nonnegative."]})
        if not 0 <= lo < hi:
            raise InvalidParameter({"support": ["Expected 0 <= lo < hi."]})

        if self.center is None:
            object.__setattr__(self, "center", 0.5 * (lo + hi))
        if self.width is None:
            object.__setattr__(self, "width", 0.25 * (hi - lo))
        if not self.width > 0:
            raise InvalidParameter({"width": ["Must be positive."]})

    @property
    def bandwidth(self) -> float:
        return self.support[1] - self.support[0]

    def contains(self, omega: float) -> bool:
        return self.support[0] <= omega <= self.support[1]

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        x = (omega - self.center) / self.width

        if self.kind is FormFactorKind.FLAT_BAND:
            profile = np.ones_like(omega)
        elif self.kind is FormFactorKind.GAUSSIAN:
            profile = np.exp(-0.5 * x**2)
        else:
            profile = 1.0 / np.sqrt(1.0 + x**2)

        inside = (omega >= self.support[0]) & (omega <= self.support[1])
        value = np.where(inside, self.strength * profile, 0.0)
        return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class DensityOfStates:
    """Mode density n(w) = scale * w**exponent, constant 1 by default."""

    scale: float = 1.0
    exponent: float = 0.0

    def __post_init__(self):
        if self.scale < 0:
            raise InvalidParameter({"scale": ["Must be nonnegative."]})
        if self.exponent < 0:
            raise InvalidParameter({"exponent": ["Must be nonnegative."]})

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        value = self.scale * np.power(omega, self.exponent)
        return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class QuadratureSpec:
    tolerance: float = None
    max_refinements: int = None
    window_fraction: float = None

    def __post_init__(self):
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", decolab_settings.QUAD_TOLERANCE)
        if self.max_refinements is None:
            object.__setattr__(
                self, "max_refinements", decolab_settings.QUAD_MAX_REFINEMENTS
            )
        if self.window_fraction is None:
            object.__setattr__(
                self, "window_fraction", decolab_settings.PV_WINDOW_FRACTION
            )


def pole_rate(z):
    """Decay rate gamma = -Im z of a pole z = w - i gamma, elementwise for arrays."""
    rate = -np.imag(z)
    return float(rate) if np.ndim(rate) == 0 else rate


@dataclass(frozen=True)
class PoleResult:
    omega0: float
    delta_omega: float
    gamma0: float

    def __post_init__(self):
        if self.gamma0 < 0:
            raise InvalidParameter({"gamma0": ["Must be nonnegative."]})

    @classmethod
    def from_z0(cls, z0: complex) -> "PoleResult":
        z0 = complex(z0)
        return cls(z0.real, 0.0, pole_rate(z0))

    @property
    def omega0_prime(self) -> float:
        return self.omega0 + self.delta_omega

    @property
    def z0(self) -> complex:
        return complex(self.omega0_prime, -self.gamma0)


@dataclass(frozen=True)
class FitResult:
    rate: float
    residual_rms: float
    n_samples: int


def on_band_edge(omega0: float, support: Tuple[float, float]) -> bool:
    """Whether `omega0` sits on an endpoint of `support` up to roundoff."""
    return any(math.isclose(omega0, edge) for edge in support)


def coupling_density(ff: FormFactor, dos: DensityOfStates):
    """n(w) lambda(w)^2 as a scalar callable for quadrature."""
    return lambda omega: dos(omega) * ff(omega) ** 2


def decay_rate(ff: FormFactor, dos: DensityOfStates, omega0: float) -> float:
    if not ff.contains(omega0):
        return 0.0
    return math.pi * dos(omega0) * ff(omega0) ** 2


def _quad(func, a: float, b: float, quad: QuadratureSpec, **kwargs) -> float:
    if b <= a:
        return 0.0

    result = integrate.quad(
        func,
        a,
        b,
        epsabs=quad.tolerance,
        epsrel=quad.tolerance,
        limit=quad.max_refinements,
        full_output=1,
        **kwargs,
    )
    # a fourth element is only returned when QUADPACK reports a problem
    if len(result) > 3:
        raise QuadratureError(
            "Quadrature on [%r, %r] failed: %s" % (a, b, result[3].strip())
        )
    return result[0]


def level_shift(
    ff: FormFactor,
    dos: DensityOfStates,
    omega0: float,
    quad: QuadratureSpec = None,
    method: str = "subtraction",
) -> float:
    """
    Principal value of int n(w) lambda(w)^2 / (omega0 - w) dw over the band.

    The default method subtracts g(omega0) on a symmetric window around the
    pole, where the odd part integrates to zero, and integrates the finite
    remainder adaptively. `method="cauchy"` uses QUADPACK's Cauchy weight
    on the whole band instead.
    """
    quad = quad or QuadratureSpec()
    lo, hi = ff.support

    if ff.strength == 0 or dos.scale == 0:
        return 0.0
    if on_band_edge(omega0, ff.support):
        raise InvalidParameter(
            {"omega0": ["The level must not sit on a band edge."]}
        )

    g = coupling_density(ff, dos)

    if not lo < omega0 < hi:
        return _quad(lambda w: g(w) / (omega0 - w), lo, hi, quad)

    if method == "cauchy":
        # QAWC integrates f(w) / (w - omega0)
        return -_quad(g, lo, hi, quad, weight="cauchy", wvar=omega0)
    if method != "subtraction":
        raise InvalidParameter({"method": ["Unknown method '%s'." % method]})

    h = min(quad.window_fraction * ff.bandwidth, omega0 - lo, hi - omega0)
    g0 = g(omega0)
    logger.debug("Principal value window half-width %r around %r" % (h, omega0))

    def subtracted(w):
        return (g(w) - g0) / (omega0 - w)

    def singular(w):
        return g(w) / (omega0 - w)

    window = _quad(subtracted, omega0 - h, omega0, quad) + _quad(
        subtracted, omega0, omega0 + h, quad
    )
    outside = _quad(singular, lo, omega0 - h, quad) + _quad(
        singular, omega0 + h, hi, quad
    )
    return window + outside


def second_order_pole(
    ff: FormFactor,
    dos: DensityOfStates,
    omega0: float,
    quad: QuadratureSpec = None,
    method: str = "subtraction",
) -> PoleResult:
    return PoleResult(
        omega0=float(omega0),
        delta_omega=level_shift(ff, dos, omega0, quad, method),
        gamma0=decay_rate(ff, dos, omega0),
    )


def sector_spectrum(pole: PoleResult, n_max: int) -> List[complex]:
    """Poles of the n-excitation sectors, [n z_0 for n = 0..n_max]."""
    if n_max < 0:
        raise InvalidParameter({"n_max": ["Must be nonnegative."]})
    return [n * pole.z0 for n in range(n_max + 1)]


def effective_hamiltonian_diag(pole: PoleResult, dim: int) -> np.ndarray:
    """
    diag(0, z_0, ..., (dim - 1) z_0) in units of hbar.

    The zero-point term hbar omega / 2 only shifts the real part and is dropped.
    """
    if dim < 1:
        raise InvalidParameter({"dim": ["Must be at least 1."]})
    return np.diag(np.arange(dim) * pole.z0)


class DiscretizedFriedrichs:
    """
    Single-excitation Friedrichs Hamiltonian on a uniform midpoint grid.

    Level 0 is the discrete state, levels 1..M are band modes w_j with
    couplings lambda(w_j) sqrt(n(w_j) dw).
    """

    def __init__(
        self,
        ff: FormFactor,
        dos: DensityOfStates,
        omega0: float,
        n_modes: int,
        hbar: float = None,
    ):
        if n_modes < MIN_ORACLE_MODES:
            raise InvalidParameter(
                {"n_modes": ["At least %d modes are needed." % MIN_ORACLE_MODES]}
            )

        self.hbar = decolab_settings.HBAR if hbar is None else hbar
        lo, hi = ff.support
        self.spacing = (hi - lo) / n_modes
        self.grid = lo + (np.arange(n_modes) + 0.5) * self.spacing
        self.couplings = ff(self.grid) * np.sqrt(dos(self.grid) * self.spacing)

        hamiltonian = np.diag(np.concatenate([[float(omega0)], self.grid]))
        hamiltonian[0, 1:] = self.couplings
        hamiltonian[1:, 0] = self.couplings
        self.hamiltonian = hamiltonian

        try:
            self.energies, self.vectors = linalg.eigh(hamiltonian)
        except linalg.LinAlgError as e:
            raise EigensolverError(str(e))
        logger.debug("Diagonalized %d-level Friedrichs matrix" % (n_modes + 1))

    @property
    def recurrence_time(self) -> float:
        return 2 * math.pi * self.hbar / self.spacing

    def _phases(self, t_grid: Sequence[float]) -> np.ndarray:
        t_grid = np.asarray(t_grid, dtype=float)
        if np.any(t_grid < 0) or np.any(np.diff(t_grid) < 0):
            raise InvalidParameter(
                {"t_grid": ["Times must be nonnegative and ascending."]}
            )
        return np.exp(-1j * np.outer(t_grid, self.energies) / self.hbar)

    def survival_amplitude(self, t_grid: Sequence[float]) -> np.ndarray:
        """A(t) = <0| exp(-iHt/hbar) |0> on the grid."""
        weights = self.vectors[0, :] ** 2
        return self._phases(t_grid) @ weights

    def evolve(self, t_grid: Sequence[float]) -> np.ndarray:
        """Full state exp(-iHt/hbar)|0>, one row per time."""
        return (self._phases(t_grid) * self.vectors[0, :]) @ self.vectors.T


def discretized_oracle(
    ff: FormFactor,
    dos: DensityOfStates,
    omega0: float,
    n_modes: int,
    t_grid: Sequence[float],
    hbar: float = None,
) -> np.ndarray:
    return DiscretizedFriedrichs(ff, dos, omega0, n_modes, hbar).survival_amplitude(
        t_grid
    )


def fit_decay_rate(
    samples: Iterable[Tuple[float, float]], window: Tuple[float, float] = None
) -> FitResult:
    """
    Fit |A(t)|^2 ~ exp(-2 gamma t) to (t, |A|) samples inside `window`.

    The rate is minus half the least-squares slope of log(|A|^2) against t.
    """
    data = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    times, magnitudes = data[:, 0], data[:, 1]

    if window is not None:
        mask = (times >= window[0]) & (times <= window[1])
        times, magnitudes = times[mask], magnitudes[mask]

    if times.size < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            "Found %d samples in the fit window, need %d."
            % (times.size, MIN_FIT_SAMPLES)
        )
    if np.any(magnitudes <= 0):
        raise InvalidSamples()

    log_power = np.log(magnitudes**2)
    slope, intercept = np.polyfit(times, log_power, 1)
    residuals = log_power - (slope * times + intercept)

    return FitResult(
        rate=float(-slope / 2) + 0.0,
        residual_rms=float(np.sqrt(np.mean(residuals**2))),
        n_samples=int(times.size),
    )
