"""Inverse scattering for the modified Camassa-Holm equation m_t + (m(u^2-u_x^2))_x + kappa u_x = 0."""
from .direct import ScatteringData, forward, prepare_profile
from .errors import IstError
from .grids import GridConfig, SpectralGrid, build_grids
from .kernels import BACKEND
from .pipeline import Snapshot, evolve, inverse, roundtrip_error, run_forward, y_window
from .soliton import soliton_data, soliton_field, soliton_profile
from .validate import SuiteConfig, run_invariant_suite

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "GridConfig", "IstError", "ScatteringData", "Snapshot", "SpectralGrid", "SuiteConfig",
    "build_grids", "evolve", "forward", "inverse", "prepare_profile", "roundtrip_error", "run_forward",
    "run_invariant_suite", "soliton_data", "soliton_field", "soliton_profile", "y_window",
]
