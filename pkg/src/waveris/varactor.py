"""Small-signal varactor data and its interpolation in bias voltage."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import VoltageRangeError

V_MIN = -15.0
V_MAX = -4.0

# package inductance of the SMV1231 varactor
DEFAULT_LSP = 0.45e-9

_COLUMNS = ("V_volts", "Cv_pF", "Rv_ohm")


@dataclass(frozen=True)
class VaractorBiasTable:
    """Tabulated bias voltage -> (capacitance, resistance) of a varactor.

    Voltages in volts, capacitances in farads, resistances in ohms.
    ``series_inductance`` is the static package inductance in henries.
    """

    voltages: np.ndarray
    capacitances: np.ndarray
    resistances: np.ndarray
    series_inductance: float = DEFAULT_LSP

    def __post_init__(self):
        v = np.asarray(self.voltages, dtype=float)
        c = np.asarray(self.capacitances, dtype=float)
        r = np.asarray(self.resistances, dtype=float)
        if not (v.shape == c.shape == r.shape) or v.ndim != 1 or v.size < 2:
            raise ValueError("table columns must be 1-D and of equal length >= 2")
        if np.any(np.diff(v) <= 0):
            raise ValueError("bias voltages must be strictly increasing")
        if np.any(c <= 0) or np.any(r < 0):
            raise ValueError("capacitances must be positive and resistances nonnegative")
        for arr in (v, c, r):
            arr.setflags(write=False)
        object.__setattr__(self, "voltages", v)
        object.__setattr__(self, "capacitances", c)
        object.__setattr__(self, "resistances", r)

    @property
    def v_min(self) -> float:
        return float(self.voltages[0])

    @property
    def v_max(self) -> float:
        return float(self.voltages[-1])

    def params(self, V):
        """Interpolated ``(C_v, R_v)`` at bias ``V`` (scalar or array).

        Piecewise linear between rows; grid points are reproduced exactly.
        Raises :class:`VoltageRangeError` outside the tabulated interval.
        """
        V = np.asarray(V, dtype=float)
        if V.size:
            lo, hi = V.min(), V.max()
            if lo < self.v_min or hi > self.v_max or np.isnan(lo):
                bad = lo if (lo < self.v_min or np.isnan(lo)) else hi
                raise VoltageRangeError(float(bad), self.v_min, self.v_max)
        C = np.interp(V, self.voltages, self.capacitances)
        R = np.interp(V, self.voltages, self.resistances)
        if V.ndim == 0:
            return float(C), float(R)
        return C, R

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for v, c, r in zip(self.voltages, self.capacitances, self.resistances):
            writer.writerow([repr(float(v)), repr(float(c * 1e12)), repr(float(r))])
        return buf.getvalue()


def parse_varactor_csv(text: str, series_inductance: float = DEFAULT_LSP) -> VaractorBiasTable:
    """Parse ``V_volts, Cv_pF, Rv_ohm`` text (header row required)."""
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError("empty varactor table")
    header = tuple(cell.strip() for cell in rows[0])
    if header != _COLUMNS:
        raise ValueError(f"varactor table header must be {','.join(_COLUMNS)}, got {','.join(header)}")
    data = np.array([[float(cell) for cell in row] for row in rows[1:]], dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError("varactor table rows must have exactly three columns")
    return VaractorBiasTable(data[:, 0], data[:, 1] * 1e-12, data[:, 2], series_inductance)


def load_varactor_table(path: str | Path | None = None,
                        series_inductance: float = DEFAULT_LSP) -> VaractorBiasTable:
    """Load a varactor table; the bundled SMV1231 data when ``path`` is None."""
    if path is None:
        text = resources.files("waveris.data").joinpath("smv1231.csv").read_text()
    else:
        text = Path(path).read_text()
    return parse_varactor_csv(text, series_inductance)


def varactor_params(table: VaractorBiasTable, V):
    return table.params(V)
