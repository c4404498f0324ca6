"""
Scenario execution.

Every scenario kind writes one curve CSV and a flat `summary.json` into the
output directory. Outputs are staged and only moved into place once the
whole scenario has succeeded.
"""

import logging
import math
import os
from dataclasses import asdict
from typing import Callable, Dict, List

import numpy as np

from .basis import (
    LadderScenario,
    build_rho_P,
    build_rho_R,
    convergence_profile,
    frobenius_distance,
    ladder_catalogue,
)
from .bipart import (
    BiPartSpec,
    PartSpec,
    build_bipart,
    classicality_window,
    cross_independence_check,
    fit_part_rate,
    part_observable_expectation,
    part_poles,
)
from .config import ScenarioConfig, config_diagnostics, load_config
from .exceptions import NoCrossover, NonRelaxingCatalogue
from .khalfin import (
    KhalfinTail,
    crossover_time,
    model1_profile,
    model2_profile,
    model2_times,
)
from .modes import (
    catalogue_from_dict,
    characteristic_times,
    decoherence_time,
    effective_rate,
    random_distribution_decoherence_time,
    relaxation_time,
    sample_curve,
    split_modes,
)
from .omnes import (
    OmnesConfig,
    decay_curve,
    decoherence_time_omnes,
    gamma_eff_omnes,
    relaxation_time_omnes,
    short_time_rate_fit,
)
from .poles import (
    DensityOfStates,
    DiscretizedFriedrichs,
    FormFactor,
    PoleResult,
    QuadratureSpec,
    fit_decay_rate,
    pole_rate,
    second_order_pole,
)
from .settings import decolab_settings
from .utils import as_complex_pair, staged_directory, time_grid, write_csv, write_json

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
BASIS_FIT_POINTS = 41


def build_form_factor(data: Dict) -> FormFactor:
    """A single-entry support `[b]` is the open band `[b, inf)`."""
    support = tuple(data["support"])
    if len(support) == 1:
        support = (support[0], math.inf)
    return FormFactor(
        kind=data["kind"],
        strength=data["strength"],
        support=support,
        center=data.get("center"),
        width=data.get("width"),
    )


def build_density(data: Dict = None) -> DensityOfStates:
    return DensityOfStates(**data) if data else DensityOfStates()


def build_quadrature(data: Dict = None) -> QuadratureSpec:
    return QuadratureSpec(**data) if data else QuadratureSpec()


def _hbar(params: Dict) -> float:
    return params.get("hbar", decolab_settings.HBAR)


def _fit_window(gamma0: float, hbar: float):
    """[0.5 t_R, 2 t_R] around the relaxation time hbar / gamma0."""
    return 0.5 * hbar / gamma0, 2.0 * hbar / gamma0


def run_modes(params: Dict, t: np.ndarray, out: str) -> Dict:
    cat = catalogue_from_dict(params)
    write_csv(os.path.join(out, "curve.csv"), ("t", "F"), sample_curve(cat, t))

    gamma_eff = effective_rate(cat)
    summary = {
        "gamma_eff": gamma_eff,
        "gamma_min": cat.modes[0].rate,
        "t_D": decoherence_time(cat),
        "t_R": relaxation_time(cat),
        "characteristic_times": characteristic_times(cat),
    }
    slow, fast = split_modes(cat, gamma_eff)
    summary["n_slow"], summary["n_fast"] = len(slow), len(fast)
    if len(cat) > 1:
        summary["t_D_random"] = random_distribution_decoherence_time(cat)
    return summary


def run_friedrichs(params: Dict, t: np.ndarray, out: str) -> Dict:
    hbar = _hbar(params)
    ff = build_form_factor(params["form_factor"])
    dos = build_density(params.get("density"))
    quad = build_quadrature(params.get("quadrature"))

    pole = second_order_pole(ff, dos, params["omega0"], quad, params["method"])
    oracle = DiscretizedFriedrichs(ff, dos, params["omega0"], params["n_modes"], hbar)
    if t[-1] > oracle.recurrence_time:
        logger.warning(
            "Time grid runs past the recurrence time %r of the discretized band"
            % oracle.recurrence_time
        )
    amplitude = oracle.survival_amplitude(t)
    write_csv(
        os.path.join(out, "survival.csv"),
        ("t", "re", "im", "abs2"),
        zip(t, amplitude.real, amplitude.imag, np.abs(amplitude) ** 2),
    )

    summary = {
        "omega0": pole.omega0,
        "delta_omega": pole.delta_omega,
        "gamma0": pole.gamma0,
        "z0": as_complex_pair(pole.z0),
        "recurrence_time": oracle.recurrence_time,
    }
    if pole.gamma0 > 0:
        window = params.get("fit_window") or _fit_window(pole.gamma0, hbar)
        fit = fit_decay_rate(zip(t, np.abs(amplitude)), tuple(window))
        summary.update(
            {
                "t_R": hbar / pole.gamma0,
                "fitted_gamma0": fit.rate * hbar,
                "fit_residual_rms": fit.residual_rms,
                "fit_samples": fit.n_samples,
            }
        )
    return summary


def run_omnes(params: Dict, t: np.ndarray, out: str) -> Dict:
    cfg = OmnesConfig(
        m=params["m"],
        omega=params["omega"],
        L0=params["L0"],
        amp_a=params["a"],
        amp_b=params["b"],
        cutoff_n=params["N"],
        pole=PoleResult(params["omega0p"], 0.0, params["gamma0"]),
        hbar=params.get("hbar"),
        k_lower=params.get("k_lower"),
    )
    curve = decay_curve(cfg, t)
    write_csv(
        os.path.join(out, "decay.csv"),
        ("t", "sim_abs", "closed_envelope", "closed_exact"),
        curve,
    )

    summary = {
        "alpha2": cfg.alpha2,
        "exponent_scale": cfg.exponent_scale,
        "gamma0": cfg.pole.gamma0,
        "gamma_eff": gamma_eff_omnes(cfg),
        "state_norm": cfg.state_norm,
        "max_closed_form_error": float(np.max(np.abs(curve[:, 1] - curve[:, 3]))),
    }
    if cfg.pole.gamma0 > 0:
        t_R, t_D = relaxation_time_omnes(cfg), decoherence_time_omnes(cfg)
        summary.update(
            {
                "t_R": t_R,
                "t_D": t_D,
                "t_D_over_t_R": t_D / t_R,
                "fitted_gamma_eff": short_time_rate_fit(cfg, params["fit_fraction"]),
            }
        )
    return summary


def _ladder(params: Dict) -> LadderScenario:
    if "energies" in params:
        return LadderScenario(params["energies"], params["coeffs"], params.get("hbar"))
    return LadderScenario.model2(
        params["z0"], params["z1"], params.get("coeffs"), params.get("hbar")
    )


def run_basis(params: Dict, t: np.ndarray, out: str) -> Dict:
    scenario = _ladder(params)
    cat = ladder_catalogue(scenario)
    gamma_eff = params.get("gamma_eff") or effective_rate(cat)
    t_D = scenario.hbar / gamma_eff
    tol, renormalize = params.get("degeneracy_tol"), params["renormalize"]

    profile = convergence_profile(scenario, t, gamma_eff, tol, renormalize)
    write_csv(
        os.path.join(out, "convergence.csv"),
        ("t", "basis_distance", "offdiag_norm"),
        profile,
    )

    at_3t_D = convergence_profile(scenario, [3 * t_D], gamma_eff, tol, renormalize)
    fit_t = np.linspace(t_D, 5 * t_D, BASIS_FIT_POINTS)
    distances = [
        frobenius_distance(
            build_rho_R(scenario, s), build_rho_P(scenario, s, gamma_eff, renormalize)
        )
        for s in fit_t
    ]
    fit = fit_decay_rate(zip(fit_t, distances))

    summary = {
        "gamma_eff": gamma_eff,
        "t_D": t_D,
        "basis_distance_at_3t_D": at_3t_D[0, 1],
        "basis_distance_final": profile[-1, 1],
        "basis_distance_max": float(np.max(profile[:, 1])),
        "fitted_frobenius_rate": fit.rate * scenario.hbar,
    }
    try:
        summary["t_R"] = relaxation_time(cat)
    except NonRelaxingCatalogue:
        logger.info("Ladder has a non-decaying mode, no relaxation time.")
    return summary


def run_khalfin(params: Dict, t: np.ndarray, out: str) -> Dict:
    hbar = _hbar(params)
    z0 = params["z0"]
    gamma0 = pole_rate(z0)

    if params["model"] == 1:
        tail = None
        if "tail" in params:
            tail_params = params["tail"]
            tail = KhalfinTail(
                tail_params["amplitude"],
                tail_params.get("onset") or hbar / gamma0,
                tail_params["exponent"],
            )
        profile = model1_profile(z0, tail, params["weights"], hbar)
        default_slow = ()
    else:
        profile = model2_profile(z0, params["z1"], params["weights"], hbar)
        default_slow = (0,)

    slow_set = tuple(params.get("slow_set", default_slow))
    write_csv(
        os.path.join(out, "profile.csv"),
        ("t", "F", "F_slow"),
        zip(t, profile.evaluate(t), profile.slow_profile(slow_set).evaluate(t)),
    )

    summary = {
        "gamma0": gamma0,
        "t_R": hbar / gamma0,
        "characteristic_times": list(profile.characteristic_times),
        "decay_times": list(profile.decay_times()),
        "slow_set": list(slow_set),
    }
    if params["model"] == 2:
        summary["t_D"] = model2_times(z0, params["z1"], hbar)[1]

    try:
        summary["crossover_time"] = crossover_time(
            profile, slow_set, params.get("eta"), params.get("horizon")
        )
    except NoCrossover as e:
        logger.warning("No crossover: %s" % e)
        summary["crossover_time"] = None
    return summary


def run_bipart(params: Dict, t: np.ndarray, out: str) -> Dict:
    parts = [
        PartSpec(
            p["level"],
            build_form_factor(p["form_factor"]),
            build_density(p.get("density")),
        )
        for p in (params["part1"], params["part2"])
    ]
    spec = BiPartSpec(
        parts[0],
        parts[1],
        n_grid=params["n_grid"],
        omega_max=params.get("omega_max"),
        hbar=params.get("hbar"),
    )
    model = build_bipart(spec)
    hbar = spec.hbar

    expectations = [part_observable_expectation(model, i, t) for i in (1, 2)]
    write_csv(
        os.path.join(out, "parts.csv"),
        ("t", "part1", "part2"),
        zip(t, *expectations),
    )

    summary = {
        "commutator_norm": model.commutator_norm,
        "cross_independence": cross_independence_check(model, params["perturb"], t),
    }
    relaxation_times = []
    for index, (pole, values) in enumerate(zip(part_poles(model), expectations), 1):
        summary["gamma0_part%d" % index] = pole.gamma0
        if pole.gamma0 > 0:
            window = _fit_window(pole.gamma0, hbar)
            rate = fit_part_rate(t, values, window)
            summary["fitted_gamma0_part%d" % index] = rate * hbar / 2
            relaxation_times.append(hbar / pole.gamma0)
        else:
            relaxation_times.append(math.inf)
        summary["t_R%d" % index] = relaxation_times[-1]

    window = classicality_window(*relaxation_times)
    summary.update(
        {
            "window_start": window.start,
            "window_end": window.end,
            "window_empty": window.is_empty,
        }
    )
    return summary


SCENARIO_RUNNERS: Dict[str, Callable[[Dict, np.ndarray, str], Dict]] = {
    "modes": run_modes,
    "friedrichs": run_friedrichs,
    "omnes": run_omnes,
    "basis": run_basis,
    "khalfin": run_khalfin,
    "bipart": run_bipart,
}


def output_directory(cfg: ScenarioConfig, out_dir: str = None) -> str:
    """--out, then the scenario's `output_dir`, then the OUTPUT_DIR setting."""
    return out_dir or cfg.output_dir or decolab_settings.OUTPUT_DIR


def run_scenario(cfg: ScenarioConfig, out_dir: str = None) -> Dict:
    target = output_directory(cfg, out_dir)
    t = time_grid(**asdict(cfg.time_grid))
    logger.info("Running %s scenario on %d times into %s" % (cfg.kind, t.size, target))

    with staged_directory(target) as staging:
        summary = SCENARIO_RUNNERS[cfg.kind](cfg.params, t, staging)
        summary["kind"] = cfg.kind
        write_json(os.path.join(staging, SUMMARY_FILE), summary)

    logger.info("Wrote %s outputs to %s" % (cfg.kind, target))
    return summary


def run_file(path: str, out_dir: str = None) -> Dict:
    return run_scenario(load_config(path), out_dir)


def validate_config(path: str) -> List[Dict]:
    """Diagnostics for the scenario file at `path`, empty when it is valid."""
    with open(path, encoding="utf-8") as fp:
        text = fp.read()
    return config_diagnostics(text)
