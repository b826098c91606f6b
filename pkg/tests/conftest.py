import pytest

from waveris.metasurface import UnitCellCircuit, build_phase_voltage_map
from waveris.varactor import load_varactor_table


@pytest.fixture(scope="session")
def table():
    return load_varactor_table()


@pytest.fixture(scope="session")
def circuit():
    return UnitCellCircuit()


@pytest.fixture(scope="session")
def pmap(circuit, table):
    return build_phase_voltage_map(circuit, table, 3e9)
