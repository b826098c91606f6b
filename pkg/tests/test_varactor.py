import numpy as np
import pytest
from hypothesis import given, strategies as st

from waveris.errors import VoltageRangeError
from waveris.varactor import (V_MAX, V_MIN, VaractorBiasTable, load_varactor_table, parse_varactor_csv,
                              varactor_params)

# SMV1231 small-signal data: (V, pF, ohm)
ROWS = [(-15, 0.460, 0.005), (-14, 0.465, 0.007), (-13, 0.471, 0.011), (-12, 0.478, 0.016),
        (-11, 0.488, 0.024), (-10, 0.501, 0.037), (-9, 0.519, 0.058), (-8, 0.544, 0.091),
        (-7, 0.578, 0.142), (-6, 0.626, 0.221), (-5, 0.697, 0.340), (-4, 0.802, 0.509)]


def test_bundled_table_matches_datasheet(table):
    assert table.v_min == V_MIN and table.v_max == V_MAX
    for v, c, r in ROWS:
        C, R = varactor_params(table, v)
        assert C == pytest.approx(c * 1e-12, rel=1e-12)
        assert R == r
    assert table.series_inductance == pytest.approx(0.45e-9)


def test_endpoints(table):
    assert varactor_params(table, -15.0) == pytest.approx((0.460e-12, 0.005))
    assert varactor_params(table, -4.0) == pytest.approx((0.802e-12, 0.509))


def test_midpoint_interpolation(table):
    C, R = varactor_params(table, -14.5)
    assert C == pytest.approx(0.4625e-12, rel=1e-12)
    assert R == pytest.approx(0.006, rel=1e-12)


@pytest.mark.parametrize("v", [-15.001, -3.999, np.nan])
def test_out_of_range(table, v):
    with pytest.raises(VoltageRangeError) as exc:
        varactor_params(table, v)
    assert exc.value.low == V_MIN and exc.value.high == V_MAX


def test_array_input(table):
    C, R = table.params(np.array([-15.0, -4.0]))
    assert C.shape == (2,) and R[1] == 0.509


def test_monotone_columns(table):
    assert np.all(np.diff(table.capacitances) > 0)
    assert np.all(np.diff(table.resistances) > 0)


def test_csv_round_trip(table):
    again = parse_varactor_csv(table.to_csv())
    np.testing.assert_array_equal(again.voltages, table.voltages)
    np.testing.assert_allclose(again.capacitances, table.capacitances, rtol=1e-15)
    assert again.to_csv() == table.to_csv()


def test_load_from_path(tmp_path, table):
    p = tmp_path / "t.csv"
    p.write_text(table.to_csv())
    assert load_varactor_table(p).to_csv() == table.to_csv()


@pytest.mark.parametrize("text", [
    "", "V,C,R\n-15,0.4,0.1\n-4,0.5,0.2\n",
    "V_volts,Cv_pF,Rv_ohm\n-4,0.4,0.1\n-15,0.5,0.2\n",
    "V_volts,Cv_pF,Rv_ohm\n-15,0.4\n-4,0.5\n",
])
def test_bad_csv(text):
    with pytest.raises(ValueError):
        parse_varactor_csv(text)


def test_rejects_nonpositive_capacitance():
    with pytest.raises(ValueError):
        VaractorBiasTable(np.array([-2.0, -1.0]), np.array([0.0, 1e-12]), np.array([0.1, 0.1]))


def test_read_only(table):
    with pytest.raises(ValueError):
        table.voltages[0] = 3.0


@given(st.floats(V_MIN, V_MAX), st.floats(V_MIN, V_MAX))
def test_monotone_and_bounded(a, b):
    table = load_varactor_table()
    lo, hi = min(a, b), max(a, b)
    (c_lo, r_lo), (c_hi, r_hi) = table.params(lo), table.params(hi)
    assert c_lo <= c_hi and r_lo <= r_hi
    assert 0.460e-12 - 1e-24 <= c_lo <= 0.802e-12 + 1e-24
    assert 0.005 <= r_lo <= 0.509


@given(st.floats(V_MIN, V_MAX - 1e-6))
def test_continuity(v):
    table = load_varactor_table()
    c0, r0 = table.params(v)
    c1, r1 = table.params(v + 1e-6)
    assert abs(c1 - c0) < 1e-18 and abs(r1 - r0) < 1e-6
