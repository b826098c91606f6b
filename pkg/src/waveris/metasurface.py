"""Unit-cell equivalent circuit, reflection coefficient and phase/voltage maps.

All circuit quantities are SI (ohms, henries, farads, rad/s). The unit cell is
a patch branch ``R_d + jwL_d + 1/(jwC_d)`` shunted by the grounded-substrate
inductance ``L_s``; the varactor (``R_v + jwL_v + 1/(jwC_v)``) sits across the
gap capacitance ``C_d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.constants import mu_0

from .errors import CircuitDomainError, FrequencyUnsupportedError
from .varactor import VaractorBiasTable

FREE_SPACE_IMPEDANCE = 376.730313668

# phase/voltage grid step used for the inverse map
MAP_STEP = 0.005
# grid step of the phase-slope curve used for WLS weights
SLOPE_STEP = 0.001


def _parallel(a, b):
    return a * b / (a + b)


@dataclass(frozen=True)
class UnitCellCircuit:
    r_d: float = 0.08
    l_d: float = 0.39e-9
    c_d: float = 0.53e-12
    l_s: float = 1.6e-9
    l_v: float = 2.34e-9
    z0: float = FREE_SPACE_IMPEDANCE

    def __post_init__(self):
        if self.r_d < 0:
            raise ValueError("R_d must be nonnegative")
        for name in ("l_d", "c_d", "l_s", "l_v", "z0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def omega_m(self) -> float:
        """Magnetic (parallel, high-impedance) resonance of the bare cell."""
        return 1.0 / np.sqrt(self.c_d * (self.l_d + self.l_s))

    @property
    def omega_e(self) -> float:
        """Electric (series, short-circuit) resonance of the bare cell."""
        return 1.0 / np.sqrt(self.c_d * self.l_d)

    def with_lossless(self) -> "UnitCellCircuit":
        return UnitCellCircuit(0.0, self.l_d, self.c_d, self.l_s, self.l_v, self.z0)


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise CircuitDomainError("angular frequency must be positive (capacitor branch singular at 0)")
    return omega


def equivalent_impedance(circuit: UnitCellCircuit, omega):
    """Impedance of the bare cell (no varactor) seen by a normal plane wave."""
    w = _check_omega(omega)
    patch = circuit.r_d + 1j * w * circuit.l_d + 1.0 / (1j * w * circuit.c_d)
    return _parallel(patch, 1j * w * circuit.l_s)


def equivalent_impedance_resonant(circuit: UnitCellCircuit, omega):
    """Same impedance written through the two resonances of the cell."""
    w = _check_omega(omega)
    loss = 1j * w * circuit.r_d * circuit.c_d
    num = 1.0 + loss - (w / circuit.omega_e) ** 2
    den = 1.0 + loss - (w / circuit.omega_m) ** 2
    return 1j * w * circuit.l_s * num / den


def circuit_from_resonances(omega_e: float, omega_m: float, h: float, re_zeq_at_omega_m: float,
                            l_v: float = 2.34e-9, z0: float = FREE_SPACE_IMPEDANCE) -> UnitCellCircuit:
    """Recover the cell constants from its two resonances.

    ``h`` is the substrate thickness (``L_s = mu_0 h``) and ``re_zeq_at_omega_m``
    the real part of the bare-cell impedance at the magnetic resonance.
    Requires ``omega_e > omega_m > 0``.
    """
    if not (omega_m > 0 and omega_e > omega_m):
        raise CircuitDomainError("need omega_e > omega_m > 0; otherwise L_d would be negative")
    if h <= 0:
        raise CircuitDomainError("substrate thickness must be positive")
    if re_zeq_at_omega_m <= 0:
        raise CircuitDomainError("Re(Z_eq) at the magnetic resonance must be positive")
    l_s = mu_0 * h
    l_d = l_s / ((omega_e / omega_m) ** 2 - 1.0)
    c_d = 1.0 / (l_d * omega_e**2)
    r_d = l_s / (c_d * (1.0 + l_d / l_s) * re_zeq_at_omega_m)
    return UnitCellCircuit(r_d=r_d, l_d=l_d, c_d=c_d, l_s=l_s, l_v=l_v, z0=z0)


def ris_impedance(circuit: UnitCellCircuit, c_v, r_v, omega):
    """Total cell impedance with the varactor loading the gap capacitance.

    ``c_v == 0`` is treated as an open varactor branch.
    """
    w = _check_omega(omega)
    c_v = np.asarray(c_v, dtype=float)
    r_v = np.asarray(r_v, dtype=float)
    if np.any(c_v < 0) or np.any(r_v < 0):
        raise CircuitDomainError("C_v and R_v must be nonnegative")
    gap = 1.0 / (1j * w * circuit.c_d)
    open_branch = c_v == 0
    c_safe = np.where(open_branch, 1.0, c_v)
    varactor = r_v + 1j * w * circuit.l_v + 1.0 / (1j * w * c_safe)
    loaded_gap = np.where(open_branch, gap, _parallel(varactor, gap))
    patch = circuit.r_d + 1j * w * circuit.l_d + loaded_gap
    z = _parallel(patch, 1j * w * circuit.l_s)
    return z[()] if np.ndim(z) == 0 else z


def reflection_coefficient(circuit: UnitCellCircuit, table: VaractorBiasTable, V, f):
    """Complex reflection coefficient at bias ``V`` (volts) and frequency ``f`` (Hz)."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise CircuitDomainError("frequency must be positive")
    c_v, r_v = table.params(V)
    z = ris_impedance(circuit, c_v, r_v, 2 * np.pi * f)
    return (z - circuit.z0) / (z + circuit.z0)


@dataclass(frozen=True, eq=False)
class PhaseVoltageMap:
    """One-to-one phase(V) curve at a single frequency on a 5 mV grid.

    ``phases`` are unwrapped along the voltage grid. Holds the circuit and
    varactor table so the complex coefficient can be evaluated exactly.
    """

    frequency: float
    voltages: np.ndarray
    phases: np.ndarray
    magnitudes: np.ndarray
    circuit: UnitCellCircuit
    table: VaractorBiasTable

    @property
    def phase_min(self) -> float:
        return float(self.phases.min())

    @property
    def phase_max(self) -> float:
        return float(self.phases.max())

    @property
    def decreasing(self) -> bool:
        return bool(self.phases[-1] < self.phases[0])

    def coefficient(self, V):
        """Exact complex reflection coefficient at bias ``V``."""
        return reflection_coefficient(self.circuit, self.table, V, self.frequency)

    def phase_of(self, V):
        """Unwrapped phase at ``V`` on this map's branch."""
        raw = np.angle(self.coefficient(V))
        ref = np.interp(V, self.voltages, self.phases)
        return raw + 2 * np.pi * np.round((ref - raw) / (2 * np.pi))

    def clamp_phase(self, target):
        """Bring ``target`` onto the map's 2*pi branch, then clip to the reachable range."""
        target = np.asarray(target, dtype=float)
        centre = 0.5 * (self.phase_min + self.phase_max)
        wrapped = centre + np.mod(target - centre + np.pi, 2 * np.pi) - np.pi
        return np.clip(wrapped, self.phase_min, self.phase_max)

    def voltage_of_phase(self, target):
        """Bias voltage realising ``target`` phase (clamped, linear interpolation)."""
        p = self.clamp_phase(target)
        if self.decreasing:
            v = np.interp(p, self.phases[::-1], self.voltages[::-1])
        else:
            v = np.interp(p, self.phases, self.voltages)
        return float(v) if v.ndim == 0 else v

    @cached_property
    def slope_curve(self):
        """``(V, |dphase/dV|)`` on a 1 mV grid by forward differences."""
        n = int(round((self.table.v_max - self.table.v_min) / SLOPE_STEP))
        v = np.round(self.table.v_min + SLOPE_STEP * np.arange(n + 1), 9)
        v[-1] = self.table.v_max
        ph = np.unwrap(np.angle(self.coefficient(v)))
        d = np.abs(np.diff(ph)) / SLOPE_STEP
        return v, np.append(d, d[-1])


def voltage_grid(table: VaractorBiasTable, step: float = MAP_STEP) -> np.ndarray:
    n = int(round((table.v_max - table.v_min) / step))
    v = np.round(table.v_min + step * np.arange(n + 1), 9)
    v[-1] = table.v_max
    return v


def build_phase_voltage_map(circuit: UnitCellCircuit, table: VaractorBiasTable, f: float) -> PhaseVoltageMap:
    """Sample phase(V) at ``f`` on the 5 mV grid and check it is one-to-one."""
    v = voltage_grid(table)
    phi = reflection_coefficient(circuit, table, v, f)
    phases = np.unwrap(np.angle(phi))
    d = np.diff(phases)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise FrequencyUnsupportedError(
            f"phase is not strictly monotone in bias voltage at {f / 1e9:.4g} GHz")
    for arr in (v, phases):
        arr.setflags(write=False)
    return PhaseVoltageMap(float(f), v, phases, np.abs(phi), circuit, table)


def phase_span(circuit: UnitCellCircuit, table: VaractorBiasTable, f) -> np.ndarray:
    """Attainable phase dynamic range (radians) at each frequency in ``f``."""
    f = np.atleast_1d(np.asarray(f, dtype=float))
    v = voltage_grid(table)
    out = np.empty(f.size)
    for i, fi in enumerate(f):
        ph = np.unwrap(np.angle(reflection_coefficient(circuit, table, v, fi)))
        out[i] = ph.max() - ph.min()
    return out
