"""The combined pipeline (null steering, bias inversion, WLS, annealing) and SLNR sweeps."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..beamform import ArrayScenario, SLNREvaluator
from ..biasline import BiasLineGeometry, ModeWeights, SampleAndHold
from ..metasurface import PhaseVoltageMap
from .annealing import SAConfig, simulated_annealing
from .lsfit import design_matrix, wls_fit, wls_weights
from .phases import NullSteerConfig, arbitrary_voltage_state, null_steer, voltage_snap

FIRST_N = "first"
STRONGEST_N = "strongest"


@dataclass
class CombinedResult:
    weights: ModeWeights
    voltages: np.ndarray
    phi: np.ndarray
    slnr_db: float
    stages: dict                   # stage name -> SLNR in dB
    arbitrary_voltages: np.ndarray
    null_converged: bool
    repairs: list = field(default_factory=list)
    modes: np.ndarray | None = None


def arbitrary_null_state(scn: ArrayScenario, pmap: PhaseVoltageMap, cfg: NullSteerConfig = NullSteerConfig()):
    """Null steering constrained to realisable phases, then per-element bias.

    Returns ``(ideal NullSteerResult, realisable NullSteerResult, V, phi)``.
    """
    ideal = null_steer(scn, cfg)
    snapped = null_steer(scn, cfg, project=voltage_snap(pmap))
    V, phi = arbitrary_voltage_state(pmap, snapped.phi)
    return ideal, snapped, V, phi


def combined(g: BiasLineGeometry, scn: ArrayScenario, pmap: PhaseVoltageMap, t0: float | None = None,
             cfg_sa: SAConfig = SAConfig(), cfg_null: NullSteerConfig = NullSteerConfig(),
             modes=None, arbitrary=None) -> CombinedResult:
    """Null-steered phases -> per-element bias -> WLS mode fit -> annealing.

    ``arbitrary`` may carry a precomputed ``arbitrary_null_state`` result so
    several seeds can share the deterministic front half.
    """
    t0 = g.default_sample_time() if t0 is None else t0
    evaluate = SLNREvaluator(scn)
    ideal, snapped, V, phi_arb = arbitrary_null_state(scn, pmap, cfg_null) if arbitrary is None else arbitrary
    fit = wls_fit(g, pmap, V, t0, modes)
    sampler = SampleAndHold(t0)
    sa = simulated_annealing(g, scn, sampler, fit.weights, pmap, cfg_sa, modes)
    phi = pmap.coefficient(sa.voltages)
    stages = {
        "ideal": evaluate(ideal.phi),
        "arbitrary": evaluate(phi_arb),
        "wls": evaluate(pmap.coefficient(fit.voltages)),
        "sa": sa.slnr_db,
    }
    return CombinedResult(sa.weights, sa.voltages, phi, sa.slnr_db, stages, V,
                          ideal.converged and snapped.converged, fit.repairs,
                          None if modes is None else np.asarray(modes))


def strongest_modes(g: BiasLineGeometry, pmap: PhaseVoltageMap, target, t0: float, count: int) -> np.ndarray:
    """The ``count`` modes with the largest effective amplitude ``|W_n sin(n w_b t0)|``
    in a slope-weighted fit over modes ``1..g.N``.

    Keep ``g.N`` well below ``M``: near the rank limit, pairs of almost
    aliased modes take large cancelling amplitudes and the ranking becomes
    meaningless. :func:`slnr_sweep` uses ``max(N, M // 2)``.
    """
    if count > g.N:
        raise ValueError(f"cannot pick {count} of {g.N} modes")
    pool = min(g.N, g.max_modes)
    S = design_matrix(g, t0, np.arange(1, pool + 1))
    root = np.sqrt(wls_weights(pmap, target))
    coeffs = np.linalg.lstsq(root[:, None] * S, root * (target - target.mean()), rcond=None)[0]
    effective = np.abs(coeffs * np.sin(np.arange(1, pool + 1) * g.omega_b * t0))
    order = np.argsort(-effective, kind="stable")
    return np.sort(order[:count]) + 1


def derive_seed(seed: int, M: int, N: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, M, N, trial]).generate_state(1, dtype=np.uint64)[0])


@dataclass
class SweepRow:
    M: int
    N: int
    selection: str
    mean_slnr_db: float
    std_db: float
    trials: int
    ideal_slnr_db: float
    arbitrary_slnr_db: float
    values: list


def _sweep_cell(args):
    (geom, scn, pmap, M, N, selection, trials, seed, t0, cfg_sa, cfg_null) = args
    scn_m = scn.with_elements(M)
    line = (geom.M_l, geom.M_r, geom.d_x, geom.f_b)
    front = arbitrary_null_state(scn_m, pmap, cfg_null)
    if selection == STRONGEST_N:
        g = BiasLineGeometry(M, max(N, M // 2), *line)
        t = g.default_sample_time() if t0 is None else t0
        modes = strongest_modes(g, pmap, front[2], t, N)
    else:
        g = BiasLineGeometry(M, N, *line)
        t = g.default_sample_time() if t0 is None else t0
        modes = None
    values, ideal, arb = [], None, None
    for trial in range(trials):
        cfg = SAConfig(cfg_sa.lam, cfg_sa.k_c, cfg_sa.i_max, cfg_sa.revert_patience,
                       derive_seed(seed, M, N, trial))
        res = combined(g, scn_m, pmap, t, cfg, cfg_null, modes, arbitrary=front)
        values.append(res.slnr_db)
        ideal, arb = res.stages["ideal"], res.stages["arbitrary"]
    return SweepRow(M, N, selection, float(np.mean(values)), float(np.std(values)), trials,
                    ideal, arb, values)


def slnr_sweep(geom: BiasLineGeometry, scn: ArrayScenario, pmap: PhaseVoltageMap, M_list, N_list,
               selection: str = FIRST_N, trials: int = 10, seed: int = 0, t0: float | None = None,
               cfg_sa: SAConfig = SAConfig(), cfg_null: NullSteerConfig = NullSteerConfig(),
               workers: int = 1) -> list[SweepRow]:
    """Mean worst-case SLNR of the combined pipeline over an (M, N) grid.

    ``geom`` supplies the line parameters (M_l, M_r, d_x, f_b); its M and N
    are ignored. Trial seeds derive from ``(seed, M, N, trial)`` so each cell
    is reproducible on its own and cells may run in any order.
    """
    M_list, N_list = list(M_list), list(N_list)
    if not M_list or not N_list:
        raise ValueError("M and N lists must be nonempty")
    if selection not in (FIRST_N, STRONGEST_N):
        raise ValueError(f"unknown mode selection {selection!r}")
    if trials < 1:
        raise ValueError("need at least one trial")
    cells = [(geom, scn, pmap, M, N, selection, trials, seed, t0, cfg_sa, cfg_null)
             for M in M_list for N in N_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_sweep_cell, cells))
    return [_sweep_cell(c) for c in cells]
