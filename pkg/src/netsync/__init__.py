"""Simulation and synchronization-stability analysis of coupled oscillator networks."""
from __future__ import annotations

from netsync.analysis import (
    EquilibriumResult,
    SyncVerdict,
    detect_sync,
    find_equilibrium,
    phase_differences,
    phase_of,
    sync_error,
)
from netsync.floquet import (
    FloquetResult,
    MonodromyMatrix,
    MsfCurve,
    NetworkMsfReport,
    evaluate_network_msf,
    floquet_multipliers,
    monodromy,
    msf_sweep,
)
from netsync.graph import (
    Graph,
    GershgorinDisc,
    LaplacianMatrix,
    SpectralDecomposition,
    build_from_edges,
    build_scale_free,
    build_star,
    eigendecompose,
    gershgorin_discs,
    laplacian,
)
from netsync.integrate import (
    BlowUpError,
    IntegratorConfig,
    LimitCycle,
    NoPeriodError,
    Trajectory,
    integrate,
    settle_to_limit_cycle,
)
from netsync.models import (
    FhnParams,
    HarmonicParams,
    KuramotoStarParams,
    SystemSpec,
    WienParams,
)

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "EquilibriumResult", "FhnParams", "FloquetResult", "GershgorinDisc",
    "Graph", "HarmonicParams", "IntegratorConfig", "KuramotoStarParams", "LaplacianMatrix",
    "LimitCycle", "MonodromyMatrix", "MsfCurve", "NetworkMsfReport", "NoPeriodError",
    "SpectralDecomposition", "SyncVerdict", "SystemSpec", "Trajectory", "WienParams",
    "build_from_edges", "build_scale_free", "build_star", "detect_sync", "eigendecompose",
    "evaluate_network_msf", "find_equilibrium", "floquet_multipliers", "gershgorin_discs",
    "integrate", "laplacian", "monodromy", "msf_sweep", "phase_differences", "phase_of",
    "settle_to_limit_cycle", "sync_error",
]
