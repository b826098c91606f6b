"""Standing waves on the biasing line and their conversion to DC bias voltages.

The line carries ``W_0 + sum_n W_n sin(n*pi*(m+M_l)/(M-1+M_l+M_r)) sin(n*w_b*t)``
sampled at element ``m``. Two samplers turn that into a DC bias per element:
an envelope detector (negative peak over one period) and a sample-and-hold
reading every element at the same instant ``t0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import SampleTimeError
from .varactor import V_MAX, V_MIN

# envelope search: uniform grid density per mode, Newton polishing steps
ENVELOPE_GRID_PER_MODE = 16
NEWTON_STEPS = 6


@dataclass(frozen=True)
class BiasLineGeometry:
    M: int
    N: int
    M_l: float = 2
    M_r: float = 2
    d_x: float = 0.019
    f_b: float = 12.9e6

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("need at least two elements (M >= 2)")
        if self.N < 1:
            raise ValueError("need at least one mode (N >= 1)")
        if self.M_l < 0 or self.M_r < 0:
            raise ValueError("line extensions M_l, M_r must be nonnegative")
        if self.d_x <= 0 or self.f_b <= 0:
            raise ValueError("d_x and f_b must be positive")

    @property
    def omega_b(self) -> float:
        return 2 * math.pi * self.f_b

    @property
    def span(self) -> float:
        """Line length in element pitches, ``M - 1 + M_l + M_r``."""
        return self.M - 1 + self.M_l + self.M_r

    @property
    def max_modes(self) -> int:
        """Largest mode count for which the LS Gram matrix is nonsingular."""
        return self.M - 2 + min(self.M_l, 1) + min(self.M_r, 1)

    def mode_shapes(self) -> np.ndarray:
        """(M, N) matrix of spatial factors ``sin(n*pi*(m+M_l)/span)``."""
        return _mode_shapes(self.M, self.N, float(self.M_l), float(self.M_r))

    def default_sample_time(self) -> float:
        return 8.0 / self.omega_b


def fundamental_frequency(line_length: float, slowness: float, c: float = 299792458.0) -> float:
    """``f_b`` of a line of total length ``line_length`` with slowness factor ``slowness``."""
    if line_length <= 0 or slowness <= 0:
        raise ValueError("line length and slowness must be positive")
    v_ph = c / slowness
    return v_ph / (2.0 * line_length)


@lru_cache(maxsize=64)
def _mode_shapes(M, N, M_l, M_r):
    m = np.arange(M)[:, None]
    n = np.arange(1, N + 1)[None, :]
    s = np.sin(n * np.pi * (m + M_l) / (M - 1 + M_l + M_r))
    s.setflags(write=False)
    return s


@dataclass
class ModeWeights:
    """DC term ``w0`` and mode amplitudes ``w[n-1]`` for n = 1..N, in volts."""

    w0: float
    w: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.w0 = float(self.w0)
        self.w = np.array(self.w, dtype=float)

    @classmethod
    def zeros(cls, N: int, w0: float = 0.0) -> "ModeWeights":
        return cls(w0, np.zeros(N))

    @property
    def N(self) -> int:
        return self.w.size

    def copy(self) -> "ModeWeights":
        return ModeWeights(self.w0, self.w.copy())

    def check(self, g: BiasLineGeometry):
        if self.w.size != g.N:
            raise ValueError(f"expected {g.N} mode amplitudes, got {self.w.size}")

    def to_dict(self) -> dict:
        return {"W0": self.w0, "W": [float(x) for x in self.w]}

    @classmethod
    def from_dict(cls, data: dict) -> "ModeWeights":
        return cls(data["W0"], data["W"])


def standing_wave_value(g: BiasLineGeometry, w: ModeWeights, m, t):
    """Instantaneous line voltage at element ``m`` and time ``t`` (seconds)."""
    w.check(g)
    m = np.asarray(m)
    if np.any(m < 0) or np.any(m > g.M - 1):
        raise IndexError(f"element index must lie in [0, {g.M - 1}]")
    n = np.arange(1, g.N + 1)
    spatial = np.sin(np.multiply.outer(m + g.M_l, n) * np.pi / g.span)
    temporal = np.sin(np.multiply.outer(np.asarray(t, dtype=float), n) * g.omega_b)
    return w.w0 + np.sum(w.w * spatial * temporal, axis=-1)


def time_factors(g: BiasLineGeometry, t0: float) -> np.ndarray:
    return np.sin(np.arange(1, g.N + 1) * g.omega_b * t0)


def check_sample_time(g: BiasLineGeometry, t0: float, tol: float = 1e-12):
    tf = time_factors(g, t0)
    bad = np.flatnonzero(np.abs(tf) <= tol)
    if bad.size:
        raise SampleTimeError(int(bad[0]) + 1)
    return tf


def sample_hold(g: BiasLineGeometry, w: ModeWeights, t0: float) -> np.ndarray:
    """Bias voltages when every element samples the line at ``t0``."""
    w.check(g)
    tf = check_sample_time(g, t0)
    return w.w0 + g.mode_shapes() @ (w.w * tf)


# ---------------------------------------------------------------- envelope


@lru_cache(maxsize=16)
def _time_grid(N, per_mode):
    T = per_mode * N
    theta = 2 * np.pi * np.arange(T) / T
    table = np.sin(np.arange(1, N + 1)[:, None] * theta[None, :])
    theta.setflags(write=False)
    table.setflags(write=False)
    return theta, table


def _trig_eval(coef, x, n, deriv=0):
    """Sum_n coef[k,n] * d^deriv/dx^deriv sin(n x[k])."""
    arg = np.multiply.outer(x, n)
    if deriv == 0:
        basis = np.sin(arg)
    elif deriv == 1:
        basis = n * np.cos(arg)
    else:
        basis = -(n**2) * np.sin(arg)
    return np.einsum("kn,kn->k", coef, basis)


def envelope_minimum(coef: np.ndarray, grid_values: np.ndarray | None = None,
                     per_mode: int = ENVELOPE_GRID_PER_MODE) -> np.ndarray:
    """Per-row minimum over one period of ``sum_n coef[:, n] sin(n*theta)``.

    A uniform grid of ``per_mode * N`` phases brackets every candidate basin:
    with curvature bound ``B = sum n^2 |c_n|`` the grid value nearest the true
    minimiser exceeds it by at most ``B h^2 / 8``. Every grid point within that
    margin of the grid minimum is polished by safeguarded Newton steps confined
    to its own cell.
    """
    coef = np.atleast_2d(coef)
    rows, N = coef.shape
    theta, table = _time_grid(N, per_mode)
    vals = coef @ table if grid_values is None else grid_values
    gmin = vals.min(axis=1)
    h = theta[1]
    n = np.arange(1, N + 1, dtype=float)
    margin = 0.125 * (np.abs(coef) @ n**2) * h**2
    ri, ti = np.nonzero(vals <= (gmin + margin + 1e-12)[:, None])
    c = coef[ri]
    x0 = theta[ti]
    x = x0.copy()
    for _ in range(NEWTON_STEPS):
        d1 = _trig_eval(c, x, n, 1)
        d2 = _trig_eval(c, x, n, 2)
        step = np.where(d2 > 0, -d1 / np.where(d2 > 0, d2, 1.0), 0.0)
        x = np.clip(x + step, x0 - h, x0 + h)
    polished = np.minimum(_trig_eval(c, x, n), vals[ri, ti])
    out = np.full(rows, np.inf)
    np.minimum.at(out, ri, polished)
    return out


def sample_envelope(g: BiasLineGeometry, w: ModeWeights) -> np.ndarray:
    """Bias voltages from negative-peak envelope detection over one period."""
    w.check(g)
    coef = g.mode_shapes() * w.w
    if not np.any(coef):
        return np.full(g.M, w.w0)
    return w.w0 + envelope_minimum(coef)


def envelope_lower_bound(g: BiasLineGeometry, w: ModeWeights) -> np.ndarray:
    return w.w0 - np.abs(g.mode_shapes()) @ np.abs(w.w)


# ----------------------------------------------------------------- samplers


@dataclass(frozen=True)
class EnvelopeDetector:
    name = "envelope"

    def sample(self, g: BiasLineGeometry, w: ModeWeights) -> np.ndarray:
        return sample_envelope(g, w)

    def mode_index(self, M, delta, theta, variant="printed"):
        return mode_index_pd(M, delta, theta, variant)

    default_w0 = V_MAX


@dataclass(frozen=True)
class SampleAndHold:
    t0: float

    name = "sample-hold"
    default_w0 = 0.5 * (V_MIN + V_MAX)

    def sample(self, g: BiasLineGeometry, w: ModeWeights) -> np.ndarray:
        return sample_hold(g, w, self.t0)

    def mode_index(self, M, delta, theta, variant="printed"):
        return mode_index_sh(M, delta, theta, variant)

    def check(self, g: BiasLineGeometry):
        check_sample_time(g, self.t0)


def validate_range(v, low: float = V_MIN, high: float = V_MAX) -> list[tuple[int, float]]:
    """``(index, signed excess)`` for every entry outside ``[low, high]``."""
    v = np.asarray(v, dtype=float)
    out = []
    for i in np.flatnonzero((v < low) | (v > high)):
        x = float(v[i])
        out.append((int(i), x - low if x < low else x - high))
    return out


def in_range(v, low: float = V_MIN, high: float = V_MAX) -> bool:
    v = np.asarray(v)
    return bool(v.min() >= low and v.max() <= high)


# -------------------------------------------------------------- mode index


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def mode_index_sh(M: int, delta: float, theta: float, variant: str = "printed") -> int:
    """Mode whose single excitation steers a sample-and-hold beam to ``theta``.

    ``variant="printed"`` uses ``2(M+1)`` and ``"appendix"`` the ``2(M-1)``
    factor from the single-mode derivation.
    """
    if abs(theta) >= math.pi / 2:
        raise ValueError("steering angle must satisfy |theta| < pi/2")
    factor = {"printed": M + 1, "appendix": M - 1}[variant]
    return _round_half_up(abs(2 * factor * delta * math.sin(theta)))


def mode_index_pd(M: int, delta: float, theta: float, variant: str = "printed") -> int:
    """Envelope-detector counterpart: half the sample-and-hold index.

    Returns 0 for broadside (no oscillating mode needed), else at least 1.
    """
    n_sh = mode_index_sh(M, delta, theta, variant)
    if n_sh == 0:
        return 0
    return max(1, _round_half_up(n_sh / 2))
