"""Locality-based scan statistics for change-point detection in graph time series."""
from __future__ import annotations

from locscan.errors import InputError, ScopeError
from locscan.generators import RdpgSpec, SbmSpec, sample_rdpg_series, sample_sbm, sample_series
from locscan.graph_core import GraphSeries, GraphSnapshot
from locscan.locality import StatKind, phi, phi_all, psi, psi_all
from locscan.normalize import ScanConfig, ScanValue, m_stat, scan_series, scan_stat, vertex_normalized

__all__ = [
    "InputError",
    "ScopeError",
    "GraphSnapshot",
    "GraphSeries",
    "StatKind",
    "psi",
    "phi",
    "psi_all",
    "phi_all",
    "ScanConfig",
    "ScanValue",
    "vertex_normalized",
    "m_stat",
    "scan_stat",
    "scan_series",
    "SbmSpec",
    "RdpgSpec",
    "sample_sbm",
    "sample_series",
    "sample_rdpg_series",
]

__version__ = "0.1.0"
