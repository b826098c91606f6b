"""Weight ranking and step-halving coordinate search for the envelope detector."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..beamform import ArrayScenario, steering_channel
from ..biasline import BiasLineGeometry, ModeWeights, _time_grid, envelope_minimum, ENVELOPE_GRID_PER_MODE
from ..metasurface import PhaseVoltageMap
from ..varactor import V_MAX, V_MIN

AMPLITUDE_STEP = 0.001
_CHUNK = 2048


@dataclass(frozen=True)
class BruteForceConfig:
    initial_step: float = 1.0
    step_floor: float = 0.001
    max_passes: int = 10_000

    def __post_init__(self):
        if not 0 < self.step_floor < self.initial_step:
            raise ValueError("need 0 < step_floor < initial_step")


@dataclass
class ModeRanking:
    order: np.ndarray        # 1-based mode numbers, strongest first
    best_power: np.ndarray   # per mode n (index n-1), linear
    best_amplitude: np.ndarray


@dataclass
class BruteForceResult:
    weights: ModeWeights
    voltages: np.ndarray
    power: float
    trace: list
    evaluations: int


def weight_ranking(g: BiasLineGeometry, scn: ArrayScenario, theta: float, pmap: PhaseVoltageMap,
                   w0: float = V_MAX, step: float = AMPLITUDE_STEP) -> ModeRanking:
    """Rank modes by the best power each reaches on its own towards ``theta``.

    With one active mode the detected bias is ``w0 - |W_n s_n(m)|`` exactly,
    so both amplitude signs give the same voltages; amplitudes are scanned on
    a ``step`` grid up to where the lowest element would drop below the
    varactor floor.
    """
    h = steering_channel(scn, theta) * scn.tx_channel
    shapes = np.abs(g.mode_shapes())
    powers = np.zeros(g.N)
    amps = np.zeros(g.N)
    for k in range(g.N):
        s = shapes[:, k]
        peak = s.max()
        limit = (w0 - V_MIN) / peak if peak > 0 else 0.0
        count = int(np.floor(limit / step + 1e-9))
        best_p, best_a = scn.rho_s * abs(np.sum(pmap.coefficient(np.full(g.M, w0)) * h)) ** 2, 0.0
        for start in range(1, count + 1, _CHUNK):
            a = step * np.arange(start, min(count, start + _CHUNK - 1) + 1)
            v = np.clip(w0 - np.outer(a, s), V_MIN, V_MAX)
            p = scn.rho_s * np.abs(pmap.coefficient(v) @ h) ** 2
            i = int(np.argmax(p))
            if p[i] > best_p:
                best_p, best_a = float(p[i]), float(a[i])
        powers[k], amps[k] = best_p, best_a
    order = np.argsort(-powers, kind="stable") + 1
    return ModeRanking(order, powers, amps)


def brute_force(g: BiasLineGeometry, scn: ArrayScenario, theta: float, order, pmap: PhaseVoltageMap,
                cfg: BruteForceConfig = BruteForceConfig(), w0: float = V_MAX) -> BruteForceResult:
    """Coordinate ascent over mode amplitudes with step halving.

    At each step size, modes are visited in ``order`` and moved by +step or
    -step when that keeps every detected bias inside the varactor range and
    raises the power towards ``theta``; passes repeat until one makes no
    move, then the step halves, down to ``cfg.step_floor``.
    """
    h = steering_channel(scn, theta) * scn.tx_channel
    shapes = g.mode_shapes()
    _, table = _time_grid(g.N, ENVELOPE_GRID_PER_MODE)

    def power(v):
        return scn.rho_s * abs(np.sum(pmap.coefficient(v) * h)) ** 2

    W = np.zeros(g.N)
    coef = shapes * W
    grid = coef @ table
    v = np.full(g.M, w0)
    best = power(v)
    trace = [best]
    evals = 0
    mu = cfg.initial_step
    while mu >= cfg.step_floor:
        for _ in range(cfg.max_passes):
            moved = False
            for n in order:
                k = int(n) - 1
                for delta in (mu, -mu):
                    col = shapes[:, k] * delta
                    cand_grid = grid + np.outer(col, table[k])
                    cand_coef = coef.copy()
                    cand_coef[:, k] += col
                    cand_v = w0 + envelope_minimum(cand_coef, cand_grid)
                    evals += 1
                    if cand_v.min() < V_MIN or cand_v.max() > V_MAX:
                        continue
                    p = power(cand_v)
                    if p > best:
                        W[k] += delta
                        coef, grid, v, best = cand_coef, cand_grid, cand_v, p
                        trace.append(best)
                        moved = True
                        break
            if not moved:
                break
        mu /= 2
    return BruteForceResult(ModeWeights(w0, W), v, best, trace, evals)
