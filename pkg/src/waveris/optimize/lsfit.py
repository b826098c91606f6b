"""Least-squares fits of sample-and-hold mode weights to a target bias profile."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..biasline import BiasLineGeometry, ModeWeights, check_sample_time
from ..errors import RankConditionError, RepairError
from ..metasurface import PhaseVoltageMap
from ..varactor import V_MAX, V_MIN

# floor added to normalised slopes so flat regions keep some weight
WEIGHT_FLOOR = 0.001
# per-repair nudge of the offending target towards the valid range (volts)
REPAIR_NUDGE = 0.005
MAX_REPAIRS = 20_000


def _modes(g: BiasLineGeometry, modes):
    if modes is None:
        return np.arange(1, g.N + 1)
    modes = np.unique(np.asarray(modes, dtype=int))
    if modes.size == 0 or modes[0] < 1 or modes[-1] > g.N:
        raise ValueError(f"mode numbers must lie in 1..{g.N}")
    return modes


def design_matrix(g: BiasLineGeometry, t0: float, modes=None) -> np.ndarray:
    """Columns ``sin(n pi (m+M_l)/span) sin(n w_b t0)`` for each active mode."""
    tf = check_sample_time(g, t0)
    modes = _modes(g, modes)
    return g.mode_shapes()[:, modes - 1] * tf[modes - 1]


def _solve(S, alpha, resid):
    A = S.T @ (alpha[:, None] * S)
    b = S.T @ (alpha * resid)
    try:
        return cho_solve(cho_factor(A), b)
    except LinAlgError as exc:
        raise RankConditionError("Gram matrix is not positive definite") from exc


def _check_rank(g: BiasLineGeometry, modes):
    if modes.size > g.max_modes:
        raise RankConditionError(
            f"{modes.size} modes exceed the {g.max_modes} the line geometry can resolve")


def _expand(g, modes, coeffs, w0):
    W = np.zeros(g.N)
    W[modes - 1] = coeffs
    return ModeWeights(w0, W)


def ls_fit(g: BiasLineGeometry, target, t0: float, modes=None, alpha=None, w0=None) -> ModeWeights:
    """(Weighted) least-squares weights for a sample-and-hold bias profile.

    ``w0`` defaults to the mean of ``target``; the mode amplitudes then fit
    the remaining deviation. Inactive modes get zero amplitude.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (g.M,):
        raise ValueError(f"target must hold {g.M} voltages")
    modes = _modes(g, modes)
    _check_rank(g, modes)
    S = design_matrix(g, t0, modes)
    alpha = np.ones(g.M) if alpha is None else np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("weights must be positive")
    w0 = float(target.mean()) if w0 is None else float(w0)
    return _expand(g, modes, _solve(S, alpha, target - w0), w0)


def wls_weights(pmap: PhaseVoltageMap, target) -> np.ndarray:
    """Per-element weights following the phase sensitivity at each target bias."""
    v, slope = pmap.slope_curve
    return np.interp(target, v, slope / slope.max() + WEIGHT_FLOOR)


@dataclass
class WLSResult:
    weights: ModeWeights
    voltages: np.ndarray
    alpha: np.ndarray
    repairs: list = field(default_factory=list)  # (element, excess volts)


def wls_fit(g: BiasLineGeometry, pmap: PhaseVoltageMap, target, t0: float, modes=None,
            max_repairs: int = MAX_REPAIRS) -> WLSResult:
    """Slope-weighted fit with out-of-range repair.

    While some sampled bias leaves the varactor range, the lowest element
    (or, if none is too low, the highest) has its weight doubled and its target moves 5 mV back towards the range, and the
    fit is repeated with the DC term held at the original target mean.
    """
    target = np.asarray(target, dtype=float)
    modes = _modes(g, modes)
    _check_rank(g, modes)
    S = design_matrix(g, t0, modes)
    alpha = wls_weights(pmap, target)
    goal = target.copy()
    w0 = float(target.mean())
    repairs = []
    best = None
    for _ in range(max_repairs + 1):
        coeffs = _solve(S, alpha, goal - w0)
        v = w0 + S @ coeffs
        lo, hi = int(np.argmin(v)), int(np.argmax(v))
        if v[lo] >= V_MIN and v[hi] <= V_MAX:
            return WLSResult(_expand(g, modes, coeffs, w0), v, alpha, repairs)
        excess = max(V_MIN - v[lo], v[hi] - V_MAX)
        if best is None or excess < best[0]:
            best = (excess, _expand(g, modes, coeffs, w0), v)
        if v[lo] < V_MIN:
            k, nudge = lo, REPAIR_NUDGE
            repairs.append((k, float(v[lo] - V_MIN)))
        else:
            k, nudge = hi, -REPAIR_NUDGE
            repairs.append((k, float(v[hi] - V_MAX)))
        alpha[k] *= 2
        goal[k] += nudge
    raise RepairError(f"bias still out of range after {max_repairs} repairs "
                      f"(worst excess {best[0]:.4g} V)", best=(best[1], best[2]))
