"""
Catalogues of decaying modes.

An observable's mean value relaxes as

    F(t) = F_eq + sum_i a_i(t) exp(-gamma_i t / hbar)

where each mode carries an oscillating amplitude a_i(t) and a rate gamma_i.
The helpers here compute the relaxation time (slowest rate), the effective
rate (amplitude-weighted mean of the rates) and the slow/fast split that
defines the preferred state.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    EmptyCatalogue,
    InvalidParameter,
    NonRelaxingCatalogue,
    UndefinedEffectiveRate,
)
from .settings import decolab_settings

logger = logging.getLogger(__name__)

TimeLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class DecayMode:
    """
    One pole contribution, a(t) = amplitude_0 * cos(frequency * t / hbar + phase).

    With the default zero phase the amplitude at t=0 is `amplitude_0`.
    """

    amplitude_0: float
    rate: float
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        for name in ("amplitude_0", "rate", "frequency", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter({name: ["Must be a finite number."]})
        if self.rate < 0:
            raise InvalidParameter({"rate": ["Decay rates must be nonnegative."]})

    @property
    def initial_amplitude(self) -> float:
        return self.amplitude_0 * math.cos(self.phase)

    def amplitude(self, t: TimeLike, hbar: float = 1.0) -> np.ndarray:
        phase = self.frequency * np.asarray(t) / hbar + self.phase
        return self.amplitude_0 * np.cos(phase)

    def envelope(self, t: TimeLike, hbar: float = 1.0) -> np.ndarray:
        """Magnitude envelope |a_0| exp(-rate t / hbar), ignoring the oscillation."""
        return abs(self.amplitude_0) * np.exp(-self.rate * np.asarray(t) / hbar)

    def evaluate(self, t: TimeLike, hbar: float = 1.0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.amplitude(t, hbar) * np.exp(-self.rate * t / hbar)


@dataclass(frozen=True)
class ModeCatalogue:
    """
    Ordered set of decay modes plus the equilibrium value they relax to.

    Modes are kept sorted by ascending rate, ties broken by ascending
    frequency and then by input order.
    """

    modes: Tuple[DecayMode, ...] = field(default_factory=tuple)
    equilibrium_value: float = 0.0
    hbar: float = None

    def __post_init__(self):
        hbar = decolab_settings.HBAR if self.hbar is None else self.hbar
        if not hbar > 0:
            raise InvalidParameter({"hbar": ["Must be positive."]})

        # sorted() is stable, so equal keys keep their input order
        modes = tuple(sorted(self.modes, key=lambda m: (m.rate, m.frequency)))
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "hbar", float(hbar))

    def __len__(self) -> int:
        return len(self.modes)

    @classmethod
    def from_arrays(
        cls,
        amplitudes: Sequence[float],
        rates: Sequence[float],
        frequencies: Sequence[float] = None,
        phases: Sequence[float] = None,
        equilibrium_value: float = 0.0,
        hbar: float = None,
    ) -> "ModeCatalogue":
        n = len(amplitudes)
        if len(rates) != n:
            raise InvalidParameter("Amplitudes and rates must have the same length.")
        frequencies = [0.0] * n if frequencies is None else frequencies
        phases = [0.0] * n if phases is None else phases

        modes = [
            DecayMode(float(a), float(g), float(w), float(p))
            for a, g, w, p in zip(amplitudes, rates, frequencies, phases)
        ]
        return cls(tuple(modes), float(equilibrium_value), hbar)

    @property
    def rates(self) -> np.ndarray:
        return np.array([m.rate for m in self.modes], dtype=float)

    @property
    def initial_amplitudes(self) -> np.ndarray:
        return np.array([m.initial_amplitude for m in self.modes], dtype=float)

    def _require_modes(self):
        if not self.modes:
            raise EmptyCatalogue()


def evaluate_mode_sum(cat: ModeCatalogue, t: TimeLike) -> Union[float, np.ndarray]:
    """F(t) = equilibrium + sum_i a_i(t) exp(-gamma_i t / hbar)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameter({"t": ["Times must be nonnegative."]})

    total = np.full(t.shape, cat.equilibrium_value, dtype=float)
    for mode in cat.modes:
        total = total + mode.evaluate(t, cat.hbar)

    return float(total) if total.ndim == 0 else total


def sample_curve(cat: ModeCatalogue, t_grid: Sequence[float]) -> np.ndarray:
    """Rows of (t, F(t)) for the `t,F` curve export."""
    t_grid = np.asarray(t_grid, dtype=float)
    return np.column_stack([t_grid, evaluate_mode_sum(cat, t_grid)])


def relaxation_time(cat: ModeCatalogue) -> float:
    """t_R = hbar / gamma_min."""
    cat._require_modes()
    slowest = cat.modes[0].rate
    if slowest == 0:
        raise NonRelaxingCatalogue()
    return cat.hbar / slowest


def effective_rate(cat: ModeCatalogue) -> float:
    """
    Amplitude-weighted mean rate, sum_i a_i(0) gamma_i / sum_i a_i(0).

    Only the t=0 amplitudes enter; the slopes of the oscillating amplitudes
    are ignored.
    """
    cat._require_modes()
    amplitudes = cat.initial_amplitudes
    total = amplitudes.sum()
    if abs(total) <= np.finfo(float).eps * np.abs(amplitudes).sum():
        raise UndefinedEffectiveRate()
    return float(np.dot(amplitudes, cat.rates) / total)


def decoherence_time(cat: ModeCatalogue) -> float:
    gamma_eff = effective_rate(cat)
    if gamma_eff <= 0:
        raise UndefinedEffectiveRate(
            "Effective rate %r is not positive, no decoherence time." % gamma_eff
        )
    return cat.hbar / gamma_eff


def random_distribution_decoherence_time(cat: ModeCatalogue) -> float:
    """hbar / gamma_1, with gamma_1 the second slowest rate."""
    if len(cat.modes) < 2:
        raise InvalidParameter("At least two modes are needed for gamma_1.")
    gamma_1 = cat.modes[1].rate
    if gamma_1 == 0:
        raise NonRelaxingCatalogue()
    return cat.hbar / gamma_1


def characteristic_times(cat: ModeCatalogue) -> List[float]:
    return [cat.hbar / m.rate if m.rate > 0 else math.inf for m in cat.modes]


def split_modes(
    cat: ModeCatalogue, gamma_eff: float
) -> Tuple[ModeCatalogue, ModeCatalogue]:
    """
    Split the catalogue at `gamma_eff`.

    Slow modes have rate strictly below `gamma_eff`, a mode sitting exactly
    on the threshold is fast. The slow part keeps the equilibrium value and
    the fast part gets zero, so the two mode sums add up to the original.
    """
    if not gamma_eff > 0:
        raise InvalidParameter({"gamma_eff": ["Must be positive."]})

    slow = tuple(m for m in cat.modes if m.rate < gamma_eff)
    fast = tuple(m for m in cat.modes if m.rate >= gamma_eff)
    logger.debug("Split at %r: %d slow, %d fast" % (gamma_eff, len(slow), len(fast)))

    return (
        ModeCatalogue(slow, cat.equilibrium_value, cat.hbar),
        ModeCatalogue(fast, 0.0, cat.hbar),
    )


def linearized_envelope(cat: ModeCatalogue, t: TimeLike) -> Union[float, np.ndarray]:
    """f(0) exp(-gamma_eff t / hbar), the first-order approximation of the mode sum."""
    gamma_eff = effective_rate(cat)
    f0 = cat.initial_amplitudes.sum()
    value = f0 * np.exp(-gamma_eff * np.asarray(t, dtype=float) / cat.hbar)
    return float(value) if np.ndim(value) == 0 else value


def equilibrium_bound(cat: ModeCatalogue, t: TimeLike) -> Union[float, np.ndarray]:
    """Upper bound on |F(t) - F_eq|: exp(-gamma_min t / hbar) sum_i |a_i|."""
    cat._require_modes()
    total = np.abs([m.amplitude_0 for m in cat.modes]).sum()
    value = total * np.exp(-cat.modes[0].rate * np.asarray(t, dtype=float) / cat.hbar)
    return float(value) if np.ndim(value) == 0 else value


def catalogue_to_dict(cat: ModeCatalogue) -> Dict:
    return {
        "hbar": cat.hbar,
        "equilibrium": cat.equilibrium_value,
        "modes": [
            {
                "a0": m.amplitude_0,
                "gamma": m.rate,
                "omega": m.frequency,
                "phase": m.phase,
            }
            for m in cat.modes
        ],
    }


def catalogue_from_dict(data: Dict) -> ModeCatalogue:
    modes = tuple(
        DecayMode(
            float(m["a0"]),
            float(m["gamma"]),
            float(m.get("omega", 0.0)),
            float(m.get("phase", 0.0)),
        )
        for m in data.get("modes", [])
    )
    return ModeCatalogue(modes, float(data.get("equilibrium", 0.0)), data.get("hbar"))
