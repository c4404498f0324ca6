"""
Two Friedrichs parts sharing one continuum.

Part i couples its level Omega_i to its own band. The bands are disjoint
pieces of a single frequency grid, so H = H1 + H2 with [H1, H2] = 0 and a
level projector of one part only sees that part's pole.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from .exceptions import (
    CommutatorError,
    EigensolverError,
    InvalidParameter,
    OverlappingBands,
)
from .poles import (
    DensityOfStates,
    FormFactor,
    PoleResult,
    QuadratureSpec,
    fit_decay_rate,
    second_order_pole,
)
from .settings import decolab_settings

logger = logging.getLogger(__name__)

COMMUTATOR_TOL = 1e-10
DEFAULT_HORIZON_FACTOR = 4.0


@dataclass(frozen=True)
class PartSpec:
    level: float
    form_factor: FormFactor
    density: DensityOfStates = field(default_factory=DensityOfStates)

    @property
    def open_band(self) -> bool:
        return math.isinf(self.form_factor.support[1])

    def closed_at(self, omega_max: float) -> "PartSpec":
        """An open band [b, inf) truncated to [b, omega_max]."""
        if not self.open_band:
            return self
        ff = self.form_factor
        form_factor = replace(
            ff,
            support=(ff.support[0], omega_max),
            center=ff.center if math.isfinite(ff.center) else None,
            width=ff.width if math.isfinite(ff.width) else None,
        )
        return replace(self, form_factor=form_factor)

    def rescaled(self, factor: float) -> "PartSpec":
        """The same part with its coupling strength multiplied by `factor`."""
        form_factor = replace(
            self.form_factor, strength=self.form_factor.strength * factor
        )
        return replace(self, form_factor=form_factor)


@dataclass(frozen=True)
class BiPartSpec:
    """
    Two parts on disjoint bands [0, a] and [b, omega_max].

    The upper band may be given open as [b, inf); it is then truncated at
    `omega_max`, which defaults to 4 b.
    """

    part1: PartSpec
    part2: PartSpec
    n_grid: int = 1000
    omega_max: float = None
    hbar: float = None

    def __post_init__(self):
        lo1, hi1 = self.part1.form_factor.support
        lo2, hi2 = self.part2.form_factor.support
        if not (hi1 < lo2 or hi2 < lo1):
            raise OverlappingBands(
                {"bands": ["Bands must be disjoint, expected a < b."]}
            )
        if self.omega_max is None:
            upper_band_start = max(lo1, lo2)
            object.__setattr__(
                self, "omega_max", DEFAULT_HORIZON_FACTOR * upper_band_start
            )
        for name in ("part1", "part2"):
            object.__setattr__(
                self, name, getattr(self, name).closed_at(self.omega_max)
            )
        hi1, hi2 = (p.form_factor.support[1] for p in (self.part1, self.part2))
        if max(hi1, hi2) > self.omega_max:
            raise InvalidParameter(
                {"omega_max": ["Both bands must lie inside [0, omega_max]."]}
            )
        if self.n_grid < 10:
            raise InvalidParameter({"n_grid": ["At least 10 grid points are needed."]})
        if self.hbar is None:
            object.__setattr__(self, "hbar", decolab_settings.HBAR)

    @classmethod
    def from_band_gap(
        cls,
        a: float,
        b: float,
        levels: Tuple[float, float],
        strengths: Tuple[float, float],
        kind: str = "flat_band",
        **kwargs,
    ) -> "BiPartSpec":
        """Part 1 on [0, a], part 2 on [b, omega_max]."""
        part1 = PartSpec(levels[0], FormFactor(kind, strengths[0], (0.0, a)))
        part2 = PartSpec(levels[1], FormFactor(kind, strengths[1], (b, math.inf)))
        return cls(part1, part2, **kwargs)

    def part(self, index: int) -> PartSpec:
        if index not in (1, 2):
            raise InvalidParameter({"part": ["Must be 1 or 2."]})
        return self.part1 if index == 1 else self.part2


def swap_parts(spec: BiPartSpec) -> BiPartSpec:
    return replace(spec, part1=spec.part2, part2=spec.part1)


@dataclass(frozen=True, eq=False)
class BiPartModel:
    """
    Discretized part Hamiltonians on the shared grid.

    Index 0 is level |1>, index 1 is level |2> and indices 2.. are the grid
    modes. Grid modes inside the part-1 band belong to H1, all others to H2.
    """

    spec: BiPartSpec
    grid: np.ndarray
    spacing: float
    h1: np.ndarray
    h2: np.ndarray

    @property
    def commutator_norm(self) -> float:
        """||H1 H2 - H2 H1||_F relative to ||H1||_F ||H2||_F."""
        scale = np.linalg.norm(self.h1) * np.linalg.norm(self.h2)
        if scale == 0:
            return 0.0
        return float(np.linalg.norm(self.h1 @ self.h2 - self.h2 @ self.h1) / scale)

def build_bipart(spec: BiPartSpec) -> BiPartModel:
    spacing = spec.omega_max / spec.n_grid
    grid = (np.arange(spec.n_grid) + 0.5) * spacing
    lo1, hi1 = spec.part1.form_factor.support
    in_band1 = (grid >= lo1) & (grid <= hi1)

    dim = spec.n_grid + 2
    h1 = np.zeros((dim, dim))
    h2 = np.zeros((dim, dim))
    h1[0, 0] = spec.part1.level
    h2[1, 1] = spec.part2.level
    modes = np.arange(2, dim)
    h1[modes[in_band1], modes[in_band1]] = grid[in_band1]
    h2[modes[~in_band1], modes[~in_band1]] = grid[~in_band1]

    for level, (h, part) in enumerate(((h1, spec.part1), (h2, spec.part2))):
        couplings = part.form_factor(grid) * np.sqrt(part.density(grid) * spacing)
        h[level, 2:] = couplings
        h[2:, level] = couplings

    model = BiPartModel(spec, grid, spacing, h1, h2)
    norm = model.commutator_norm
    logger.debug("Bi-Friedrichs commutator norm %r" % norm)
    if norm > COMMUTATOR_TOL:
        raise CommutatorError("Relative commutator norm %r." % norm)
    return model


def _propagate(hamiltonian: np.ndarray, states: np.ndarray, t_grid, hbar) -> np.ndarray:
    """
    exp(-iHt/hbar) applied row-wise, one state per time.

    Only the indices H acts on are diagonalized; every other component is
    carried over unchanged.
    """
    active = np.flatnonzero(np.any(hamiltonian != 0, axis=1))
    try:
        energies, vectors = linalg.eigh(hamiltonian[np.ix_(active, active)])
    except linalg.LinAlgError as e:
        raise EigensolverError(str(e))

    phases = np.exp(-1j * np.outer(t_grid, energies) / hbar)
    evolved = states.copy()
    evolved[:, active] = ((states[:, active] @ vectors.conj()) * phases) @ vectors.T
    return evolved


def part_observable_expectation(
    model: BiPartModel, part: int, t_grid: Sequence[float]
) -> np.ndarray:
    """
    <O_i>(t) for the level projector O_i = |i><i| starting from |i>.

    The state is evolved with the factorized propagator
    exp(-iH2 t/hbar) then exp(-iH1 t/hbar).
    """
    model.spec.part(part)
    t_grid = np.asarray(t_grid, dtype=float)
    index = part - 1

    states = np.zeros((t_grid.size, model.h1.shape[0]), dtype=complex)
    states[:, index] = 1.0
    states = _propagate(model.h2, states, t_grid, model.spec.hbar)
    states = _propagate(model.h1, states, t_grid, model.spec.hbar)

    return np.abs(states[:, index]) ** 2


def fit_part_rate(
    t_grid: Sequence[float], expectations: Sequence[float], window: Tuple = None
) -> float:
    """Decay rate of <O_i>(t), twice the pole half-width in weak coupling."""
    samples = zip(t_grid, np.sqrt(np.asarray(expectations, dtype=float)))
    return 2 * fit_decay_rate(samples, window).rate


def cross_independence_check(
    model: BiPartModel, perturb: float, t_grid: Sequence[float] = None
) -> float:
    """
    max_t |<O_1>(t) - <O_1>'(t)| after rescaling the part-2 coupling by `perturb`.
    """
    if perturb < 0:
        raise InvalidParameter({"perturb": ["Must be nonnegative."]})
    if t_grid is None:
        recurrence = 2 * math.pi * model.spec.hbar / model.spacing
        t_grid = np.linspace(0.0, 0.5 * recurrence, 64)

    spec = replace(model.spec, part2=model.spec.part2.rescaled(perturb))
    perturbed = build_bipart(spec)
    reference = part_observable_expectation(model, 1, t_grid)
    changed = part_observable_expectation(perturbed, 1, t_grid)
    return float(np.max(np.abs(reference - changed)))


def part_poles(
    model: BiPartModel, quad: QuadratureSpec = None
) -> Tuple[PoleResult, PoleResult]:
    return tuple(
        second_order_pole(p.form_factor, p.density, p.level, quad)
        for p in (model.spec.part1, model.spec.part2)
    )


@dataclass(frozen=True)
class ClassicalityWindow:
    start: float
    end: float

    @property
    def is_empty(self) -> bool:
        return not self.start < self.end


def classicality_window(tR1: float, tR2: float) -> ClassicalityWindow:
    """Times after part 1 has relaxed and before part 2 has."""
    window = ClassicalityWindow(tR1, tR2)
    if window.is_empty:
        logger.warning("Empty classicality window: t_R1=%r >= t_R2=%r" % (tR1, tR2))
    return window
