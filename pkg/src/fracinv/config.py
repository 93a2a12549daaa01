"""Run configuration: a strict YAML schema mirroring the experiment setup."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from fracinv.forward import (
    BoundaryData,
    OrderSpectrum,
    TimeGrid,
    WeightFunction,
)
from fracinv.spectral import EigenSystem, build_interval_eigensystem, project


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class WeightSpec(_Strict):
    preset: Literal["constant", "linear", "bump", "nodes"] = "constant"
    value: float = Field(1.0, gt=0.0)
    center: float = Field(0.5, gt=0.0, lt=1.0)
    width: float = Field(0.1, gt=0.0, le=0.5)
    nodes: Optional[list[float]] = None
    values: Optional[list[float]] = None

    def build(self) -> WeightFunction:
        if self.preset == "constant":
            return WeightFunction.uniform([self.value, self.value])
        if self.preset == "linear":
            return WeightFunction.uniform([0.0, 2.0 * self.value])
        if self.preset == "bump":
            return triangle_weight(self.center, self.width, self.value)
        if self.nodes is None or self.values is None:
            raise ValueError("the 'nodes' weight preset needs nodes and values")
        return WeightFunction(np.array(self.nodes), np.array(self.values))


def triangle_weight(center: float, width: float, mass: float = 1.0) -> WeightFunction:
    """Hat of half-width ``width`` around ``center`` with total mass ``mass``."""
    lo, hi = center - width, center + width
    if lo < 0.0 or hi > 1.0:
        raise ValueError("bump must fit inside [0, 1]")
    nodes = [0.0, lo, center, hi, 1.0]
    values = [0.0, 0.0, mass / width, 0.0, 0.0]
    nodes, idx = np.unique(nodes, return_index=True)
    return WeightFunction(nodes, np.array(values)[idx])


class ModelSpec(_Strict):
    kind: Literal["single", "spacetime", "multiterm", "distributed"] = "single"
    alpha: float = Field(0.5, gt=0.0, le=1.0)
    gamma: float = Field(2.0, gt=0.0, le=2.0)
    alphas: Optional[list[float]] = None
    weights: Optional[list[float]] = None
    mu: WeightSpec = WeightSpec()
    quad_order: int = Field(16, ge=4, le=128)

    @model_validator(mode="after")
    def _check(self) -> ModelSpec:
        if self.kind == "multiterm":
            if self.alphas is None or self.weights is None:
                raise ValueError("multiterm model needs 'alphas' and 'weights'")
            OrderSpectrum(tuple(self.alphas), tuple(self.weights))
        if self.kind == "spacetime" and self.alpha == 1.0:
            raise ValueError("spacetime model needs alpha < 1")
        return self

    def spectrum(self) -> OrderSpectrum:
        if self.kind == "multiterm":
            return OrderSpectrum(tuple(self.alphas), tuple(self.weights))
        return OrderSpectrum.single(self.alpha)


class DomainConfig(_Strict):
    length: float = Field(1.0, gt=0.0)


class InitialSpec(_Strict):
    preset: Literal["mode", "bump", "polynomial", "nodes", "coefficients", "zero"] = "mode"
    k: int = Field(1, ge=1)
    scale: float = 1.0
    center: float = 0.5
    width: float = Field(0.2, gt=0.0)
    nodes: Optional[list[float]] = None
    values: Optional[list[float]] = None
    coefficients: Optional[list[float]] = None
    power: float = Field(-2.0, description="a_n = scale * n**power for 'coefficients' without a list")

    def function(self, length: float):
        """Initial data as a function of x (None for coefficient presets)."""
        if self.preset == "bump":
            c, w = self.center * length, self.width * length
            return lambda x: self.scale * np.where(
                np.abs(x - c) < w, np.cos(0.5 * math.pi * (x - c) / w) ** 2, 0.0
            )
        if self.preset == "polynomial":
            return lambda x: self.scale * 4.0 * x * (length - x) / length**2
        if self.preset == "nodes":
            if self.nodes is None or self.values is None:
                raise ValueError("the 'nodes' initial preset needs nodes and values")
            xs = np.asarray(self.nodes) * length
            return lambda x: np.interp(x, xs, self.values)
        return None

    def coefficients_for(self, eig: EigenSystem) -> np.ndarray:
        if self.preset == "zero":
            return np.zeros(eig.count)
        if self.preset == "mode":
            a = np.zeros(eig.count)
            if self.k <= eig.count:
                a[self.k - 1] = self.scale
            return a
        if self.preset == "coefficients":
            if self.coefficients is not None:
                a = np.zeros(eig.count)
                c = np.asarray(self.coefficients[: eig.count])
                a[: c.size] = c
                return self.scale * a
            return self.scale * eig.modes.astype(np.float64) ** self.power
        return project(self.function(eig.length), eig)

    def values_at(self, x, eig: EigenSystem) -> np.ndarray:
        f = self.function(eig.length)
        x = np.asarray(x, dtype=np.float64)
        if f is None:
            from fracinv.spectral import synthesize

            return synthesize(self.coefficients_for(eig), eig, x)
        return np.asarray(f(x), dtype=np.float64)


class BoundarySide(_Strict):
    preset: Literal["zero", "constant", "bump"] = "zero"
    value: float = 1.0
    start: float = 0.25
    stop: float = 0.5

    def build(self, horizon: float):
        if self.preset == "zero":
            return None
        if self.preset == "constant":
            v = self.value
            return lambda t: np.full_like(t, v)
        return smooth_bump(self.start * horizon, self.stop * horizon, self.value)


def smooth_bump(start: float, stop: float, height: float = 1.0):
    """C-infinity bump supported on ``(start, stop)``."""
    if not stop > start:
        raise ValueError("bump needs start < stop")

    def g(t):
        t = np.asarray(t, dtype=np.float64)
        s = (t - start) / (stop - start)
        inside = (s > 0.0) & (s < 1.0)
        sc = np.where(inside, s, 0.5)
        out = np.exp(1.0 - 1.0 / (1.0 - (2.0 * sc - 1.0) ** 2))
        return height * np.where(inside, out, 0.0)

    return g


class BoundarySpec(_Strict):
    left: BoundarySide = BoundarySide()
    right: BoundarySide = BoundarySide()

    def build(self, horizon: float) -> BoundaryData | None:
        left, right = self.left.build(horizon), self.right.build(horizon)
        if left is None and right is None:
            return None
        compact = all(s.preset in ("zero", "bump") for s in (self.left, self.right))
        return BoundaryData(left, right, compact_support=compact)


class GridSpec(_Strict):
    horizon: float = Field(1.0, gt=0.0)
    steps: int = Field(256, ge=2, le=20000)
    grading: Literal["uniform", "graded", "log"] = "uniform"
    exponent: float = Field(2.0, ge=1.0)
    first: float = Field(1.0e-8, gt=0.0)
    modes: int = Field(32, ge=1, le=4096)
    # inverse-crime guard for data generated by time stepping
    data_refine: int = Field(4, ge=1, le=16)
    data_mode_factor: int = Field(2, ge=1, le=8)
    nx: int = Field(21, ge=2, le=2001)

    @model_validator(mode="after")
    def _check(self) -> GridSpec:
        if self.grading == "log" and not self.first < self.horizon:
            raise ValueError("log grid needs first < horizon")
        return self

    def build(self) -> TimeGrid:
        if self.grading == "uniform":
            return TimeGrid.uniform(self.horizon, self.steps)
        if self.grading == "graded":
            return TimeGrid.graded(self.horizon, self.steps, self.exponent)
        return TimeGrid.logarithmic(self.horizon, self.steps, self.first)


class SensorSpec(_Strict):
    x0: float = Field(0.5, gt=0.0)


class NoiseSpec(_Strict):
    level: float = Field(0.0, ge=0.0)
    seed: int = Field(42, ge=0, lt=2**64)


class InversionSpec(_Strict):
    method: Literal["short-time", "long-time", "spacetime", "multiterm", "weight"] = "short-time"
    ell: int = Field(1, ge=1, le=3)
    epsilon: float = Field(0.0, ge=0.0)
    nodes: int = Field(6, ge=2, le=16)
    starts: int = Field(8, ge=1, le=64)
    seed: int = Field(42, ge=0, lt=2**64)
    input: Optional[str] = None


class RunConfig(_Strict):
    name: str = "run"
    model: ModelSpec = ModelSpec()
    domain: DomainConfig = DomainConfig()
    initial: InitialSpec = InitialSpec()
    boundary: BoundarySpec = BoundarySpec()
    grid: GridSpec = GridSpec()
    sensor: SensorSpec = SensorSpec()
    noise: NoiseSpec = NoiseSpec()
    inversion: InversionSpec = InversionSpec()

    @model_validator(mode="after")
    def _check(self) -> RunConfig:
        if not self.sensor.x0 < self.domain.length:
            raise ValueError("sensor.x0 must lie strictly inside the domain")
        if self.model.kind in ("single", "spacetime") and self.boundary.build(1.0) is not None:
            raise ValueError("nonhomogeneous boundary data needs a multiterm or distributed model")
        return self

    def eigensystem(self, factor: int = 1) -> EigenSystem:
        return build_interval_eigensystem(self.domain.length, self.grid.modes * factor)

    def digest(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict | None) -> RunConfig:
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return parse_config({})
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return parse_config(data)
