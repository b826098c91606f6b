"""Simulated annealing over standing-wave mode amplitudes, maximising SLNR."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..beamform import ArrayScenario, SLNREvaluator
from ..biasline import BiasLineGeometry, ModeWeights, in_range
from ..metasurface import PhaseVoltageMap

T_START = 100.0
INIT_AMPLITUDE = 3.0


@dataclass(frozen=True)
class SAConfig:
    lam: float = 0.03
    k_c: float = 0.002
    i_max: int = 2000
    revert_patience: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("perturbation scale must be nonnegative")
        if not self.k_c > 0:
            raise ValueError("cooling factor must be positive")
        if self.i_max < 1:
            raise ValueError("i_max must be at least 1")
        if self.revert_patience < 1:
            raise ValueError("revert_patience must be at least 1")


@dataclass
class SAResult:
    weights: ModeWeights
    voltages: np.ndarray
    slnr_db: float
    initial_slnr_db: float
    trace: list = field(default_factory=list)       # current SLNR per iteration
    best_trace: list = field(default_factory=list)  # best-so-far SLNR per iteration


def sa_init(g: BiasLineGeometry, scn: ArrayScenario, sampler, variant: str = "printed") -> ModeWeights:
    """Start point: amplitude 3/K on each desired direction's predicted mode."""
    if not scn.desired:
        raise ValueError("need at least one desired direction")
    w = ModeWeights.zeros(g.N, sampler.default_w0)
    K = len(scn.desired)
    for theta in scn.desired:
        n = sampler.mode_index(g.M, scn.spacing, theta, variant)
        if n == 0:
            continue
        if n > g.N:
            raise ValueError(f"predicted mode {n} exceeds N = {g.N}")
        w.w[n - 1] += INIT_AMPLITUDE / K
    return w


def simulated_annealing(g: BiasLineGeometry, scn: ArrayScenario, sampler, init: ModeWeights,
                        pmap: PhaseVoltageMap, cfg: SAConfig = SAConfig(), modes=None) -> SAResult:
    """Anneal the mode amplitudes ``W_1..W_N``; ``W_0`` stays fixed.

    Proposals add ``lam * N(0, 1)`` to every active mode and are skipped when
    any sampled bias leaves the varactor range. A worse proposal is accepted
    with probability ``exp(-(cur - new) / (k_c T))`` in dB, ``T`` falling
    linearly from 100 to 0. After ``revert_patience`` iterations without a
    new best, the state returns to the best one.
    """
    init.check(g)
    evaluate = SLNREvaluator(scn)
    v = sampler.sample(g, init)
    if not in_range(v):
        raise ValueError("initial weights drive some bias outside the varactor range")
    active = np.arange(g.N) if modes is None else np.asarray(modes, dtype=int) - 1
    rng = np.random.default_rng(cfg.rng_seed)

    W = init.w.copy()
    cur = evaluate(pmap.coefficient(v))
    start = best = cur
    W_best, v_best, i_best = W.copy(), v, 0
    trace, best_trace = [], []
    for i in range(1, cfg.i_max + 1):
        if i - i_best >= cfg.revert_patience:
            W, cur, i_best = W_best.copy(), best, i
        T = T_START * (1 - i / cfg.i_max)
        W_new = W.copy()
        W_new[active] += cfg.lam * rng.standard_normal(active.size)
        v_new = sampler.sample(g, ModeWeights(init.w0, W_new))
        if in_range(v_new):
            s = evaluate(pmap.coefficient(v_new))
            if s > cur:
                accept = True
            else:
                p = np.exp(-(cur - s) / (cfg.k_c * T)) if T > 0 else 0.0
                accept = p >= rng.random()
            if accept:
                W, cur = W_new, s
                if s > best:
                    best, W_best, v_best, i_best = s, W_new.copy(), v_new, i
        trace.append(cur)
        best_trace.append(best)
    return SAResult(ModeWeights(init.w0, W_best), v_best, best, start, trace, best_trace)
