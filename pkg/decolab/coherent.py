"""
Truncated (quasi-)coherent states and their overlaps.

A quasi-coherent state keeps the first N+1 Fock components of a coherent
state and renormalizes them,

    c_n = Z^(-1/2) alpha^n / sqrt(n!),   Z = sum_{k <= N} alpha^(2k) / k!

Factorials are handled in log space so cutoffs up to a few hundred are safe.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Union

import mpmath
import numpy as np
from scipy import special, stats

from .exceptions import InvalidParameter, LengthMismatch, MismatchedCutoffs
from .settings import decolab_settings

logger = logging.getLogger(__name__)

SERIES_GUARD_DIGITS = 10

TimeLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class QuasiCoherentState:
    alpha: float
    cutoff_n: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def norm(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def to_dict(self) -> Dict:
        return {
            "alpha": self.alpha,
            "N": self.cutoff_n,
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "QuasiCoherentState":
        coeffs = [complex(re, im) for re, im in data["coeffs"]]
        if len(coeffs) != int(data["N"]) + 1:
            raise LengthMismatch("Expected N+1 coefficients.")
        return cls(float(data["alpha"]), int(data["N"]), np.array(coeffs))


@dataclass(frozen=True)
class MacroscopicityReport:
    delta_alpha: float
    lower_ok: bool
    upper_ok: bool
    upper_bound: float
    upper_bound_exact: float

    @property
    def macroscopic(self) -> bool:
        return self.lower_ok and self.upper_ok


def _validate_cutoff(cutoff_n: int):
    if cutoff_n < 0:
        raise InvalidParameter({"cutoff_n": ["Must be nonnegative."]})
    if cutoff_n > decolab_settings.MAX_CUTOFF:
        raise InvalidParameter(
            {"cutoff_n": ["Must not exceed %d." % decolab_settings.MAX_CUTOFF]}
        )


def _log_poisson_cdf(cutoff_n: int, mean: float) -> float:
    """log P(X <= N) for X ~ Poisson(mean)."""
    if mean == 0:
        return 0.0
    return float(stats.poisson.logcdf(cutoff_n, mean))


def log_normalization(alpha: float, cutoff_n: int) -> float:
    """log Z for the truncated state, alpha^2 + log P(Poisson(alpha^2) <= N)."""
    return alpha**2 + _log_poisson_cdf(cutoff_n, alpha**2)


def build_quasi_coherent(alpha: float, cutoff_n: int) -> QuasiCoherentState:
    if alpha < 0:
        raise InvalidParameter({"alpha": ["Must be nonnegative."]})
    _validate_cutoff(cutoff_n)

    coeffs = np.zeros(cutoff_n + 1)
    if alpha == 0:
        coeffs[0] = 1.0
        return QuasiCoherentState(0.0, cutoff_n, coeffs)

    n = np.arange(cutoff_n + 1)
    log_c = n * math.log(alpha) - 0.5 * special.gammaln(n + 1)
    log_z = special.logsumexp(2 * log_c)
    coeffs = np.exp(log_c - 0.5 * log_z)

    return QuasiCoherentState(float(alpha), cutoff_n, coeffs)


def overlap_direct(s1: QuasiCoherentState, s2: QuasiCoherentState) -> float:
    """<s1|s2> from the coefficient vectors, each state with its own normalization."""
    if s1.cutoff_n != s2.cutoff_n:
        raise MismatchedCutoffs(
            "Cutoffs %d and %d differ." % (s1.cutoff_n, s2.cutoff_n)
        )
    return float(np.vdot(s1.coeffs, s2.coeffs).real)


def overlap_series(alpha1: float, alpha2: float, cutoff_n: int) -> float:
    """
    sum_{n <= N} (-(alpha1 - alpha2)^2 / 2)^n / n!

    The alternating terms reach exp(|x|) while the sum is near exp(-|x|), so
    the working precision grows by 2 |x| / ln 10 digits on top of
    `SERIES_PRECISION`.
    """
    x = -((alpha1 - alpha2) ** 2) / 2
    dps = decolab_settings.SERIES_PRECISION + math.ceil(-2 * x / math.log(10))
    with mpmath.workdps(dps + SERIES_GUARD_DIGITS):
        x = mpmath.mpf(x)
        total = mpmath.mpf(0)
        term = mpmath.mpf(1)
        for n in range(cutoff_n + 1):
            total += term
            term = term * x / (n + 1)
        return float(total)


def remainder_bound(alpha1: float, alpha2: float, cutoff_n: int) -> float:
    """((alpha1 - alpha2)^2 / 2)^(N+1) / (N+1)!"""
    half_square = (alpha1 - alpha2) ** 2 / 2
    if half_square == 0:
        return 0.0
    log_bound = (cutoff_n + 1) * math.log(half_square) - special.gammaln(cutoff_n + 2)
    return math.exp(log_bound)


def normalization_correction(alpha1: float, alpha2: float, cutoff_n: int) -> float:
    """
    |overlap_direct - exp(-(alpha1 - alpha2)^2 / 2)| in closed form.

    The truncated sums are Poisson cumulative probabilities, so the direct
    overlap equals exp(-delta^2 / 2) * exp(r) with
    r = log F(N; a1 a2) - (log F(N; a1^2) + log F(N; a2^2)) / 2.
    """
    r = _log_poisson_cdf(cutoff_n, alpha1 * alpha2) - 0.5 * (
        _log_poisson_cdf(cutoff_n, alpha1**2) + _log_poisson_cdf(cutoff_n, alpha2**2)
    )
    return math.exp(-((alpha1 - alpha2) ** 2) / 2) * abs(math.expm1(r))


def macroscopicity_check(
    alpha1: float, alpha2: float, cutoff_n: int, k_lower: float = None
) -> MacroscopicityReport:
    """
    Check |delta alpha| >= k_lower and |delta alpha| <= sqrt(2 (N + 1)).

    The exact-factorial threshold, where the remainder bound reaches one, is
    reported alongside the Stirling form used for the flag.
    """
    k_lower = decolab_settings.K_LOWER if k_lower is None else k_lower
    if not k_lower > 0:
        raise InvalidParameter({"k_lower": ["Must be positive."]})

    delta = abs(alpha1 - alpha2)
    upper_bound = math.sqrt(2 * (cutoff_n + 1))
    upper_bound_exact = math.sqrt(2) * math.exp(
        special.gammaln(cutoff_n + 2) / (2 * (cutoff_n + 1))
    )

    return MacroscopicityReport(
        delta_alpha=delta,
        lower_ok=delta >= k_lower,
        upper_ok=delta <= upper_bound,
        upper_bound=upper_bound,
        upper_bound_exact=float(upper_bound_exact),
    )


def evolved_overlap(
    alpha_bra: float,
    alpha_ket: float,
    z0: complex,
    t: TimeLike,
    cutoff_n: int,
    hbar: float = None,
    normalization: str = "exponential",
) -> Union[complex, np.ndarray]:
    """
    <alpha_bra| alpha_ket(t)> for a ket evolved on the ladder n z0.

    `normalization="exponential"` uses exp(-(a^2 + b^2) / 2) as in the
    untruncated states, `"truncated"` uses the per-state Z factors.
    """
    hbar = decolab_settings.HBAR if hbar is None else hbar
    _validate_cutoff(cutoff_n)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameter({"t": ["Times must be nonnegative."]})

    if normalization == "exponential":
        log_prefactor = -(alpha_bra**2 + alpha_ket**2) / 2
    elif normalization == "truncated":
        log_prefactor = -0.5 * (
            log_normalization(alpha_bra, cutoff_n)
            + log_normalization(alpha_ket, cutoff_n)
        )
    else:
        raise InvalidParameter(
            {"normalization": ["Unknown normalization '%s'." % normalization]}
        )

    product = alpha_bra * alpha_ket
    if product == 0:
        value = np.full(t.shape, math.exp(log_prefactor), dtype=complex)
        return complex(value) if value.ndim == 0 else value

    n = np.arange(cutoff_n + 1)
    log_terms = n * math.log(product) - special.gammaln(n + 1) + log_prefactor
    ladder = np.exp(-1j * complex(z0) * np.multiply.outer(t, n) / hbar)
    value = ladder @ np.exp(log_terms)

    return complex(value) if value.ndim == 0 else value


def survival_amplitude(
    bra_coeffs: Sequence[complex],
    ket_coeffs: Sequence[complex],
    z0: complex,
    t: TimeLike,
    hbar: float = None,
) -> Union[complex, np.ndarray]:
    """sum_n ket_n conj(bra_n) exp(-i n z0 t / hbar)"""
    hbar = decolab_settings.HBAR if hbar is None else hbar
    bra = np.asarray(bra_coeffs, dtype=complex)
    ket = np.asarray(ket_coeffs, dtype=complex)
    if bra.shape != ket.shape:
        raise LengthMismatch("Lengths %d and %d differ." % (bra.size, ket.size))

    n = np.arange(bra.size)
    t = np.asarray(t, dtype=float)
    ladder = np.exp(-1j * complex(z0) * np.multiply.outer(t, n) / hbar)
    value = ladder @ (ket * np.conj(bra))

    return complex(value) if value.ndim == 0 else value


def coherent_overlap(alpha1: complex, alpha2: complex) -> complex:
    """
    Untruncated <alpha1|alpha2> = exp(-|alpha1 - alpha2|^2 / 2 + i Im(alpha1* alpha2))
    """
    alpha1, alpha2 = complex(alpha1), complex(alpha2)
    phase = (np.conj(alpha1) * alpha2).imag
    return complex(np.exp(-abs(alpha1 - alpha2) ** 2 / 2 + 1j * phase))
