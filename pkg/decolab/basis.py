"""
Moving preferred basis.

rho_R(t) evolves a ladder state with every pole, rho_P(t) drops the levels
whose rate reaches gamma_eff. The eigenbasis of rho_R(t) approaches the
eigenbasis of rho_P(t), which is what `convergence_profile` measures.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from .coherent import build_quasi_coherent
from .exceptions import (
    DepletedState,
    DimensionMismatch,
    EigensolverError,
    InvalidParameter,
    NonHermitian,
)
from .modes import DecayMode, ModeCatalogue, effective_rate
from .poles import pole_rate
from .settings import decolab_settings

logger = logging.getLogger(__name__)


def _check_hermitian(entries: np.ndarray, tol: float = None) -> np.ndarray:
    tol = decolab_settings.HERMITIAN_TOL if tol is None else tol
    entries = np.asarray(entries, dtype=complex)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DimensionMismatch("Expected a square matrix.")

    deviation = np.max(np.abs(entries - entries.conj().T), initial=0.0)
    scale = max(1.0, np.max(np.abs(entries), initial=0.0))
    if deviation > tol * scale:
        raise NonHermitian("Hermiticity defect %r exceeds %r." % (deviation, tol))
    return entries


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = _check_hermitian(self.entries).copy()
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    @property
    def purity(self) -> float:
        return float(np.vdot(self.entries, self.entries).real)

    def normalized(self) -> "DensityMatrix":
        trace = self.trace
        if not trace > 0:
            raise DepletedState("Trace %r cannot be normalized." % trace)
        return DensityMatrix(self.entries / trace)

    @classmethod
    def from_state(cls, vector: Sequence[complex]) -> "DensityMatrix":
        """Projector onto `vector`, renormalized to unit trace."""
        vector = np.asarray(vector, dtype=complex)
        norm = np.vdot(vector, vector).real
        if not norm > np.finfo(float).tiny:
            raise DepletedState()
        vector = vector / math.sqrt(norm)
        return cls(np.outer(vector, vector.conj()))


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Eigenvalues in descending order, eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def orthonormality_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim)), initial=0.0))

    def clusters(self, degeneracy_tol: float = None) -> List[int]:
        """Start indices of runs of eigenvalues closer than `degeneracy_tol`."""
        tol = degeneracy_tol
        if tol is None:
            tol = decolab_settings.DEGENERACY_TOL
        gaps = -np.diff(self.eigenvalues)
        return [0] + [i + 1 for i, gap in enumerate(gaps) if gap > tol]


def _jacobi_rotation(a_pp: float, a_qq: float, r: float):
    """cos and sin of the smaller rotation zeroing a real 2x2 off-diagonal r."""
    tau = (a_qq - a_pp) / (2 * r)
    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1 + tau * tau))
    c = 1 / math.sqrt(1 + t * t)
    return c, t * c


def hermitian_eigendecomposition(
    rho: Union[DensityMatrix, np.ndarray],
    tolerance: float = None,
    max_sweeps: int = None,
) -> EigenBasis:
    """
    Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Each rotation first makes a_pq real with a phase on column q and then
    zeroes it with a real Givens rotation. Sweeps stop once the off-diagonal
    Frobenius norm is below `tolerance * ||A||_F`. The largest-magnitude
    component of every eigenvector is made real and positive.
    """
    tolerance = decolab_settings.JACOBI_TOLERANCE if tolerance is None else tolerance
    if max_sweeps is None:
        max_sweeps = decolab_settings.JACOBI_MAX_SWEEPS

    entries = rho.entries if isinstance(rho, DensityMatrix) else rho
    a = _check_hermitian(entries).copy()
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)

    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tolerance * scale:
            logger.debug("Jacobi converged after %d sweeps" % sweep)
            break
        if sweep == max_sweeps:
            raise EigensolverError(
                "Jacobi did not converge in %d sweeps (off-diagonal %r)."
                % (max_sweeps, off)
            )

        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r == 0:
                    continue
                phase = a[p, q] / r
                c, s = _jacobi_rotation(a[p, p].real, a[q, q].real, r)
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])

                a[:, [p, q]] = a[:, [p, q]] @ g
                a[[p, q], :] = g.conj().T @ a[[p, q], :]
                a[p, q] = a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ g

    eigenvalues = np.diag(a).real
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    v = v[:, order]

    for k in range(n):
        pivot = v[np.argmax(np.abs(v[:, k])), k]
        v[:, k] *= abs(pivot) / pivot

    return EigenBasis(eigenvalues, v)


def reconstruction_residual(
    rho: Union[DensityMatrix, np.ndarray], basis: EigenBasis
) -> float:
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.linalg.norm(basis.reconstruct() - entries))


def basis_distance(
    b1: EigenBasis, b2: EigenBasis, degeneracy_tol: float = None
) -> float:
    """
    Largest subspace distance ||P1 - P2||_F / sqrt(2) over eigenvalue clusters.

    Both bases are clustered independently and compared on the finest
    clustering that both refine, so degenerate eigenvalues never make the
    distance depend on an arbitrary choice of vectors.
    """
    if b1.dim != b2.dim:
        raise DimensionMismatch("Dimensions %d and %d differ." % (b1.dim, b2.dim))

    starts = sorted(
        set(b1.clusters(degeneracy_tol)) & set(b2.clusters(degeneracy_tol))
    )
    bounds = starts + [b1.dim]
    logger.debug("Comparing bases on clusters starting at %s" % starts)

    distance = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        v1, v2 = b1.eigenvectors[:, lo:hi], b2.eigenvectors[:, lo:hi]
        p1 = v1 @ v1.conj().T
        p2 = v2 @ v2.conj().T
        distance = max(distance, np.linalg.norm(p1 - p2) / math.sqrt(2))
    return float(distance)


def frobenius_distance(
    rho1: Union[DensityMatrix, np.ndarray], rho2: Union[DensityMatrix, np.ndarray]
) -> float:
    a = rho1.entries if isinstance(rho1, DensityMatrix) else np.asarray(rho1)
    b = rho2.entries if isinstance(rho2, DensityMatrix) else np.asarray(rho2)
    return float(np.linalg.norm(a - b))


def offdiag_norm(rho: Union[DensityMatrix, np.ndarray], basis: EigenBasis) -> float:
    """Frobenius norm of the off-diagonal part of rho in the given frame."""
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    v = basis.eigenvectors
    rotated = v.conj().T @ entries @ v
    return float(np.linalg.norm(rotated - np.diag(np.diag(rotated))))


def linear_entropy(rho: Union[DensityMatrix, np.ndarray]) -> float:
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(1.0 - np.vdot(entries, entries).real)


def dephased_linear_entropy(
    rho: Union[DensityMatrix, np.ndarray], basis: EigenBasis
) -> float:
    """1 - sum_i <i|rho|i>^2, the linear entropy after dephasing in `basis`."""
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    v = basis.eigenvectors
    populations = np.einsum("ki,kl,li->i", v.conj(), entries, v).real
    return float(1.0 - np.sum(populations**2))


@dataclass(frozen=True, eq=False)
class LadderScenario:
    """
    Levels with complex energies z_n and initial amplitudes c_n(0).

    c_n(t) = c_n(0) exp(-i z_n t / hbar); the rate of level n is -Im z_n.
    """

    energies: np.ndarray
    coeffs: np.ndarray
    hbar: float = None

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=complex)
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if energies.shape != coeffs.shape or energies.ndim != 1:
            raise DimensionMismatch("Energies and coefficients must match.")
        if np.any(energies.imag > 0):
            raise InvalidParameter({"energies": ["Levels must not grow in time."]})
        if not np.vdot(coeffs, coeffs).real > 0:
            raise DepletedState("Initial state has zero norm.")

        hbar = decolab_settings.HBAR if self.hbar is None else float(self.hbar)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "hbar", hbar)

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def rates(self) -> np.ndarray:
        return pole_rate(self.energies)

    def amplitudes(self, t: float) -> np.ndarray:
        if t < 0:
            raise InvalidParameter({"t": ["Times must be nonnegative."]})
        return self.coeffs * np.exp(-1j * self.energies * t / self.hbar)

    @classmethod
    def from_omnes(cls, cfg) -> "LadderScenario":
        """Two-branch superposition on the ladder z_n = n z0."""
        s1 = build_quasi_coherent(cfg.alpha1, cfg.cutoff_n)
        s2 = build_quasi_coherent(cfg.alpha2, cfg.cutoff_n)
        coeffs = cfg.amp_a * s1.coeffs + cfg.amp_b * s2.coeffs
        energies = np.arange(cfg.cutoff_n + 1) * cfg.pole.z0
        return cls(energies, coeffs, cfg.hbar)

    @classmethod
    def model2(
        cls, z0: complex, z1: complex, coeffs: Sequence[complex] = None, hbar=None
    ) -> "LadderScenario":
        """Equilibrium level plus the two decaying poles z0 and z1."""
        coeffs = np.ones(3) / math.sqrt(3) if coeffs is None else coeffs
        return cls(np.array([0.0, z0, z1]), coeffs, hbar)


def ladder_catalogue(scenario: LadderScenario) -> ModeCatalogue:
    """
    Decaying levels as modes with amplitude |c_n(0)|^2 and rate -Im z_n.

    Non-decaying levels make up the equilibrium value.
    """
    weights = np.abs(scenario.coeffs) ** 2
    rates = scenario.rates
    modes = tuple(
        DecayMode(float(w), float(g)) for w, g in zip(weights, rates) if g > 0
    )
    equilibrium = float(np.sum(weights[rates <= 0]))
    return ModeCatalogue(modes, equilibrium, scenario.hbar)


def _projector(amplitudes: np.ndarray, norm: float) -> DensityMatrix:
    if not norm > np.finfo(float).tiny:
        raise DepletedState("State norm vanished.")
    return DensityMatrix(np.outer(amplitudes, amplitudes.conj()) / norm)


def build_rho_R(scenario: LadderScenario, t: float) -> DensityMatrix:
    amplitudes = scenario.amplitudes(t)
    return _projector(amplitudes, np.vdot(amplitudes, amplitudes).real)


def build_rho_P(
    scenario: LadderScenario, t: float, gamma_eff: float, renormalize: bool = True
) -> DensityMatrix:
    """
    rho_R(t) with every level of rate >= gamma_eff removed.

    Removed levels take the t -> oo limit of their decaying factor, zero.
    With `renormalize=False` the result shares the normalization of rho_R(t)
    and its trace drops below one.
    """
    amplitudes = scenario.amplitudes(t)
    kept = np.where(scenario.rates < gamma_eff, amplitudes, 0.0)

    full_norm = np.vdot(amplitudes, amplitudes).real
    kept_norm = np.vdot(kept, kept).real
    if not kept_norm > np.finfo(float).tiny:
        raise DepletedState("No slow level is populated.")
    return _projector(kept, kept_norm if renormalize else full_norm)


def convergence_profile(
    scenario: LadderScenario,
    t_grid: Sequence[float],
    gamma_eff: float = None,
    degeneracy_tol: float = None,
    renormalize: bool = True,
) -> np.ndarray:
    """
    Rows of (t, basis distance, off-diagonal norm of rho_R in the rho_P frame).

    `gamma_eff` defaults to the effective rate of the ladder catalogue.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise InvalidParameter({"t_grid": ["Times must be strictly increasing."]})
    if gamma_eff is None:
        gamma_eff = effective_rate(ladder_catalogue(scenario))

    rows = []
    for t in t_grid:
        rho_r = build_rho_R(scenario, t)
        rho_p = build_rho_P(scenario, t, gamma_eff, renormalize)
        basis_r = hermitian_eigendecomposition(rho_r)
        basis_p = hermitian_eigendecomposition(rho_p)
        rows.append(
            (
                t,
                basis_distance(basis_r, basis_p, degeneracy_tol),
                offdiag_norm(rho_r, basis_p),
            )
        )
    return np.array(rows, dtype=float).reshape(-1, 3)
