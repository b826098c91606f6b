"""Configuration search: phase-domain beams and nulls, mode-weight fitting and annealing."""
from .annealing import SAConfig, SAResult, sa_init, simulated_annealing
from .combined import (FIRST_N, STRONGEST_N, CombinedResult, SweepRow, arbitrary_null_state, combined,
                       derive_seed, slnr_sweep, strongest_modes)
from .hillclimb import BruteForceConfig, BruteForceResult, ModeRanking, brute_force, weight_ranking
from .lsfit import WLSResult, design_matrix, ls_fit, wls_fit, wls_weights
from .phases import (NullSteerConfig, NullSteerResult, arbitrary_voltage_state, ideal_phases,
                     multi_beam_phases, null_steer, voltage_snap)

__all__ = [
    "SAConfig", "SAResult", "sa_init", "simulated_annealing",
    "FIRST_N", "STRONGEST_N", "CombinedResult", "SweepRow", "arbitrary_null_state", "combined",
    "derive_seed", "slnr_sweep", "strongest_modes",
    "BruteForceConfig", "BruteForceResult", "ModeRanking", "brute_force", "weight_ranking",
    "WLSResult", "design_matrix", "ls_fit", "wls_fit", "wls_weights",
    "NullSteerConfig", "NullSteerResult", "arbitrary_voltage_state", "ideal_phases",
    "multi_beam_phases", "null_steer", "voltage_snap",
]
