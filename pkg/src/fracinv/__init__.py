"""Forward solvers and order/weight recovery for time-fractional diffusion."""

from __future__ import annotations

from importlib import metadata as _metadata

from fracinv.forward import (
    BoundaryData,
    ObservationSeries,
    OrderSpectrum,
    SolutionField,
    TimeGrid,
    WeightFunction,
    observe,
    solve_distributed_modal,
    solve_multi_modal,
    solve_single_modal,
    solve_spacetime_modal,
)
from fracinv.mittag_leffler import MLParams, ml_eval, ml_relax
from fracinv.spectral import DomainSpec, EigenSystem, build_interval_eigensystem, project

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:  # pragma: no cover - running from a checkout
    __version__ = "0.1.0"

__all__ = [
    "BoundaryData",
    "DomainSpec",
    "EigenSystem",
    "MLParams",
    "ObservationSeries",
    "OrderSpectrum",
    "SolutionField",
    "TimeGrid",
    "WeightFunction",
    "build_interval_eigensystem",
    "ml_eval",
    "ml_relax",
    "observe",
    "project",
    "solve_distributed_modal",
    "solve_multi_modal",
    "solve_single_modal",
    "solve_spacetime_modal",
]
