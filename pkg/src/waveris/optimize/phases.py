"""Phase-domain configurations: ideal beams, beam averaging, null steering and
their realisation with arbitrary (per-element) bias voltages."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..beamform import ArrayScenario, steering_channel
from ..metasurface import PhaseVoltageMap

# averaged coefficients smaller than this have no usable phase
ZERO_AVERAGE = 1e-12


def unit_phase(z):
    z = np.asarray(z, dtype=complex)
    out = np.exp(1j * np.angle(z))
    return np.where(np.abs(z) < ZERO_AVERAGE, 1.0 + 0j, out)


def ideal_phases(scn: ArrayScenario, theta: float) -> np.ndarray:
    """Unit-modulus coefficients that add coherently towards ``theta``."""
    cascade = steering_channel(scn, theta) * scn.tx_channel
    return np.exp(-1j * np.angle(cascade))


def multi_beam_phases(scn: ArrayScenario, directions=None) -> np.ndarray:
    """Average the single-beam solutions, then keep only the phase."""
    directions = scn.desired if directions is None else tuple(directions)
    if not directions:
        raise ValueError("need at least one beam direction")
    avg = np.mean([ideal_phases(scn, th) for th in directions], axis=0)
    return unit_phase(avg)


@dataclass(frozen=True)
class NullSteerConfig:
    threshold: float = 1e-4
    max_iters: int = 10_000

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("null threshold must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class NullSteerResult:
    phi: np.ndarray
    converged: bool
    iterations: int
    residual: float


def null_steer(scn: ArrayScenario, cfg: NullSteerConfig = NullSteerConfig(),
               desired=None, undesired=None, project=None) -> NullSteerResult:
    """Carve nulls into the averaged multi-beam state.

    Each pass removes, for every null direction in turn, the mean of
    ``phi(m) exp(-j m kappa)`` and projects back to unit modulus. ``project``
    (if given) is applied after every projection, e.g. to snap phases onto
    what the varactor can realise. Convergence is tested on the current
    state before each pass, so a converged result obeys
    ``|sum_m phi(m) h_j(m)| <= M * threshold`` for every null.
    """
    desired = scn.desired if desired is None else tuple(desired)
    undesired = scn.undesired if undesired is None else tuple(undesired)
    snap = project if project is not None else (lambda p: p)
    phi = snap(multi_beam_phases(scn, desired))
    if not undesired:
        return NullSteerResult(phi, True, 0, 0.0)
    H = steering_channel(scn, np.array(undesired)) * scn.tx_channel
    best_phi, best_res = phi, np.inf
    for it in range(cfg.max_iters + 1):
        res = float(np.max(np.abs(H @ phi)) / scn.M)
        if res < best_res:
            best_phi, best_res = phi, res
        if res <= cfg.threshold:
            return NullSteerResult(phi, True, it, res)
        if it == cfg.max_iters:
            break
        for h in H:
            r = phi * h
            phi = snap(unit_phase((r - r.mean()) / h))
    return NullSteerResult(best_phi, False, cfg.max_iters, best_res)


def arbitrary_voltage_state(pmap: PhaseVoltageMap, ideal):
    """Per-element bias realising the clamped ideal phase, and the resulting
    (lossy) reflection coefficients."""
    V = pmap.voltage_of_phase(np.angle(ideal))
    return V, pmap.coefficient(V)


def voltage_snap(pmap: PhaseVoltageMap):
    """Round trip phase -> bias -> realised phase, keeping unit modulus."""
    def snap(phi):
        V = pmap.voltage_of_phase(np.angle(phi))
        return np.exp(1j * np.angle(pmap.coefficient(V)))
    return snap
