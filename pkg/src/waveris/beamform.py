"""Far-field line-of-sight channels, radiation patterns and the SNR/SLNR metrics."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

DB_FLOOR = -100.0


def db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class ArrayScenario:
    """Uniform linear RIS illuminated at normal incidence.

    ``spacing`` is the element pitch in wavelengths. Angles are radians.
    ``incident`` optionally replaces the all-ones transmitter channel.
    """

    M: int
    spacing: float = 0.2
    rho_s: float = 1.0
    noise: float = 1.0
    desired: tuple = ()
    undesired: tuple = ()
    incident: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        if self.spacing <= 0:
            raise ValueError("element spacing must be positive")
        if self.rho_s <= 0:
            raise ValueError("symbol power must be positive")
        if self.noise < 0:
            raise ValueError("noise power must be nonnegative")
        object.__setattr__(self, "desired", tuple(float(a) for a in self.desired))
        object.__setattr__(self, "undesired", tuple(float(a) for a in self.undesired))
        for a in self.desired + self.undesired:
            if not abs(a) < np.pi / 2:
                raise ValueError(f"direction {a!r} rad outside (-pi/2, pi/2)")
        if self.incident is not None:
            g = np.asarray(self.incident, dtype=complex)
            if g.shape != (self.M,):
                raise ValueError("incident channel must have M entries")
            object.__setattr__(self, "incident", g)

    @classmethod
    def from_degrees(cls, M, spacing=0.2, desired=(), undesired=(), **kw):
        return cls(M, spacing, desired=np.radians(desired), undesired=np.radians(undesired), **kw)

    def with_elements(self, M: int) -> "ArrayScenario":
        return replace(self, M=M, incident=None)

    @property
    def tx_channel(self) -> np.ndarray:
        return np.ones(self.M, dtype=complex) if self.incident is None else self.incident


def kappa(spacing, theta):
    return 2 * np.pi * spacing * np.sin(theta)


def steering_channel(scn: ArrayScenario, theta) -> np.ndarray:
    """``exp(-j m kappa(theta))``; one row per angle when ``theta`` is an array."""
    m = np.arange(scn.M)
    return np.exp(-1j * np.multiply.outer(kappa(scn.spacing, np.asarray(theta, dtype=float)), m))


def directed_power(scn: ArrayScenario, phi, theta):
    """``rho_s |h(theta)^T diag(phi) g|^2`` for scalar or array ``theta``."""
    phi = np.asarray(phi)
    if phi.shape != (scn.M,):
        raise ValueError(f"state must hold {scn.M} reflection coefficients")
    field_ = steering_channel(scn, theta) @ (phi * scn.tx_channel)
    return scn.rho_s * np.abs(field_) ** 2


def default_grid() -> np.ndarray:
    return np.radians(np.arange(-90.0, 90.0 + 1e-9, 0.25))


def radiation_pattern(scn: ArrayScenario, phi, theta_grid=None):
    """``(theta, gain_dB)`` over the grid; gains clipped at 100 dB below peak."""
    theta = default_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    if theta.size == 0:
        raise ValueError("empty angle grid")
    p = directed_power(scn, phi, theta)
    peak = p.max()
    floor = peak * 10 ** (DB_FLOOR / 10) if peak > 0 else np.finfo(float).tiny
    return theta, db(np.maximum(p, floor))


def snr(scn: ArrayScenario, phi, theta) -> float:
    return float(directed_power(scn, phi, theta)) / scn.noise


def slnr(scn: ArrayScenario, phi) -> float:
    """Worst desired-beam power over (strongest leakage + noise), linear."""
    if not scn.desired:
        raise ValueError("SLNR needs at least one desired direction")
    signal = directed_power(scn, phi, np.array(scn.desired)).min()
    leak = directed_power(scn, phi, np.array(scn.undesired)).max() if scn.undesired else 0.0
    return float(signal / (leak + scn.noise))


def slnr_db(scn: ArrayScenario, phi) -> float:
    return float(db(slnr(scn, phi)))


class SLNREvaluator:
    """Precomputed steering rows for repeated SLNR evaluation inside optimizers."""

    def __init__(self, scn: ArrayScenario):
        if not scn.desired:
            raise ValueError("SLNR needs at least one desired direction")
        self.scn = scn
        g = scn.tx_channel
        self._hd = steering_channel(scn, np.array(scn.desired)) * g
        self._he = steering_channel(scn, np.array(scn.undesired)) * g if scn.undesired else None

    def powers(self, phi):
        pd = self.scn.rho_s * np.abs(self._hd @ phi) ** 2
        pe = self.scn.rho_s * np.abs(self._he @ phi) ** 2 if self._he is not None else np.zeros(0)
        return pd, pe

    def __call__(self, phi) -> float:
        pd, pe = self.powers(phi)
        leak = pe.max() if pe.size else 0.0
        return float(db(pd.min() / (leak + self.scn.noise)))
