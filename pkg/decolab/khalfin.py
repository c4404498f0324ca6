"""
Pole terms plus a Khalfin tail.

A pole z = w - i gamma enters through its rate gamma = -Im z: the pole term
decays as exp(-gamma t / hbar) and cross terms between two poles decay at
the mean of their rates.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .exceptions import InvalidParameter, NoCrossover, OrderingError
from .modes import DecayMode, ModeCatalogue, evaluate_mode_sum
from .poles import pole_rate
from .settings import decolab_settings

logger = logging.getLogger(__name__)

SCAN_POINTS = 2000


@dataclass(frozen=True)
class KhalfinTail:
    """C (1 + t / onset)^(-exponent), finite at t=0 and asymptotically t^(-exponent)."""

    amplitude: float
    onset: float
    exponent: float = 2.0

    def __post_init__(self):
        if not self.onset > 0:
            raise InvalidParameter({"onset": ["Must be positive."]})
        if not self.exponent > 0:
            raise InvalidParameter({"exponent": ["Must be positive."]})

    @classmethod
    def for_pole(
        cls, amplitude: float, z0: complex, hbar: float = None, exponent: float = 2.0
    ) -> "KhalfinTail":
        """Tail with onset at the relaxation time hbar / gamma0."""
        hbar = decolab_settings.HBAR if hbar is None else hbar
        return cls(amplitude, hbar / pole_rate(z0), exponent)

    def scaled(self, weight: float) -> "KhalfinTail":
        return KhalfinTail(self.amplitude * weight, self.onset, self.exponent)

    def __call__(self, t):
        value = self.amplitude * (1 + np.asarray(t, dtype=float) / self.onset) ** (
            -self.exponent
        )
        return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class EvolutionProfile:
    """
    F(t) = equilibrium + pole terms + tail.

    `characteristic_times` is the table quoted for the model; `slow_set`
    arguments index `pole_terms.modes`, which are sorted by rate.
    """

    pole_terms: ModeCatalogue
    tail: Optional[KhalfinTail] = None
    equilibrium: float = 0.0
    characteristic_times: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def hbar(self) -> float:
        return self.pole_terms.hbar

    def evaluate(self, t):
        value = self.equilibrium + evaluate_mode_sum(self.pole_terms, t)
        if self.tail is not None:
            value = value + self.tail(t)
        return value

    def decay_times(self) -> Tuple[float, ...]:
        return tuple(
            self.hbar / m.rate if m.rate > 0 else math.inf
            for m in self.pole_terms.modes
        )

    def indices_below(self, rate: float) -> Tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.pole_terms.modes) if m.rate < rate)

    def slow_profile(self, slow_set: Iterable[int]) -> "EvolutionProfile":
        """The partial curve keeping only `slow_set` pole terms and the tail."""
        slow_set = set(slow_set)
        modes = tuple(m for i, m in enumerate(self.pole_terms.modes) if i in slow_set)
        return EvolutionProfile(
            ModeCatalogue(modes, 0.0, self.hbar),
            self.tail,
            self.equilibrium,
            self.characteristic_times,
        )

    def envelopes(self, t, slow_set: Iterable[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Magnitude envelopes (fast, slow) where slow includes the tail."""
        slow_set = set(slow_set)
        t = np.asarray(t, dtype=float)
        fast = np.zeros(t.shape)
        slow = np.zeros(t.shape)
        for i, mode in enumerate(self.pole_terms.modes):
            if i in slow_set:
                slow = slow + mode.envelope(t, self.hbar)
            else:
                fast = fast + mode.envelope(t, self.hbar)
        if self.tail is not None:
            slow = slow + np.abs(self.tail(t))
        return fast, slow


def model1_profile(
    z0: complex,
    tail: Optional[KhalfinTail],
    weights: Sequence[float],
    hbar: float = None,
) -> EvolutionProfile:
    """
    One pole plus the Khalfin term.

    Weights are the |pole|^2 term, the two quadratures of the pole-tail
    cross term and the tail scale.
    """
    hbar = decolab_settings.HBAR if hbar is None else hbar
    if len(weights) != 4:
        raise InvalidParameter({"weights": ["Model 1 takes 4 weights."]})
    gamma0 = pole_rate(z0)
    if not gamma0 > 0:
        raise InvalidParameter({"z0": ["The pole must lie in the lower half-plane."]})

    w_pole, w_cos, w_sin, w_tail = (float(w) for w in weights)
    omega0 = complex(z0).real
    modes = (
        DecayMode(w_pole, gamma0),
        DecayMode(w_cos, gamma0 / 2, omega0),
        DecayMode(w_sin, gamma0 / 2, omega0, -math.pi / 2),
    )
    times = (hbar / gamma0, 2 * hbar / gamma0, 2 * hbar / gamma0, math.inf)

    return EvolutionProfile(
        ModeCatalogue(modes, 0.0, hbar),
        tail.scaled(w_tail) if tail is not None else None,
        0.0,
        times,
    )


def model2_profile(
    z0: complex, z1: complex, weights: Sequence[float], hbar: float = None
) -> EvolutionProfile:
    """
    Two poles, no Khalfin term.

    Weights are the equilibrium, the z0 term, the two quadratures of the
    z0-z1 cross term and the z1 term.
    """
    hbar = decolab_settings.HBAR if hbar is None else hbar
    if len(weights) != 5:
        raise InvalidParameter({"weights": ["Model 2 takes 5 weights."]})
    gamma0, gamma1 = pole_rate(z0), pole_rate(z1)
    if not 0 < gamma0 <= gamma1:
        raise OrderingError("Expected 0 < gamma0 < gamma1.")
    if gamma0 == gamma1:
        logger.warning("gamma0 == gamma1, the profile has a single rate.")

    w_eq, w0, w_cos, w_sin, w1 = (float(w) for w in weights)
    gamma_cross = (gamma0 + gamma1) / 2
    beat = complex(z1).real - complex(z0).real
    modes = (
        DecayMode(w0, gamma0),
        DecayMode(w_cos, gamma_cross, beat),
        DecayMode(w_sin, gamma_cross, beat, -math.pi / 2),
        DecayMode(w1, gamma1),
    )
    times = (hbar / gamma0, hbar / (gamma1 + gamma0), hbar / (gamma1 + gamma0))

    return EvolutionProfile(ModeCatalogue(modes, 0.0, hbar), None, w_eq, times)


def model2_times(z0: complex, z1: complex, hbar: float = None) -> Tuple[float, float]:
    """(t_R, t_D) = (hbar / gamma0, hbar / gamma1)."""
    hbar = decolab_settings.HBAR if hbar is None else hbar
    return hbar / pole_rate(z0), hbar / pole_rate(z1)


def _default_horizon(profile: EvolutionProfile) -> float:
    scales = [t for t in profile.decay_times() if math.isfinite(t)]
    if profile.tail is not None:
        scales.append(profile.tail.onset)
    if not scales:
        raise NoCrossover("Nothing decays, no horizon to search.")
    return decolab_settings.CROSSOVER_HORIZON * max(scales)


def crossover_time(
    profile: EvolutionProfile,
    slow_set: Iterable[int],
    eta: float = None,
    horizon: float = None,
) -> float:
    """
    Earliest t where the fast envelope drops to eta times the slow envelope.

    Times are scanned on a geometric grid up to `horizon` and the first
    sign change is refined with Brent's method.
    """
    eta = decolab_settings.CROSSOVER_ETA if eta is None else eta
    if not 0 < eta < 1:
        raise InvalidParameter({"eta": ["Must lie in (0, 1)."]})
    slow_set = tuple(slow_set)

    def gap(t):
        fast, slow = profile.envelopes(t, slow_set)
        return fast - eta * slow

    if gap(0.0) <= 0:
        return 0.0

    horizon = _default_horizon(profile) if horizon is None else horizon
    shortest = min(t for t in profile.decay_times()) if profile.pole_terms else horizon
    start = min(shortest, horizon) * 1e-6
    grid = np.concatenate([[0.0], np.geomspace(start, horizon, SCAN_POINTS)])
    values = gap(grid)

    crossed = np.flatnonzero(values <= 0)
    if crossed.size == 0:
        raise NoCrossover("No crossover before t = %r." % horizon)

    k = crossed[0]
    t_star = optimize.brentq(gap, grid[k - 1], grid[k], xtol=1e-300, rtol=1e-12)
    logger.debug("Crossover bracketed in [%r, %r]: %r" % (grid[k - 1], grid[k], t_star))
    return float(t_star)
