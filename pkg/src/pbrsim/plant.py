"""Continuous plant, light schedules, and the measurement channel.

The reactor is a chemostat in biomass: dX/dt = r_X(X, q0) - D * X, where the
dilution rate D is the single manipulated input.  Integration uses a fixed
step Runge-Kutta 4 scheme with the control held constant over the sampling
period (zero-order hold) while the light schedule is evaluated at the actual
stage times, so intra-sample light changes are seen by the integrator.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from math import isfinite, pi, sin

import numpy as np

from .kinetics import FullModelParams, SimplifiedModelParams, growth_rate
from .radiative import Geometry

__all__ = [
    "PiecewiseConstantLight",
    "DayNightLight",
    "LightProfile",
    "LIGHT_STEP_PROFILE",
    "NoiseConfig",
    "SamplingConfig",
    "PlantState",
    "IntegrationError",
    "light_at",
    "plant_derivative",
    "step",
    "measure",
]


@dataclass(frozen=True)
class PiecewiseConstantLight:
    """Light schedule made of constant segments.

    Each entry is (start_time_h, q0).  A new level takes effect strictly
    after its start time, so the sample taken exactly at a switch still sees
    the previous level.
    """

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        segs = tuple((float(t), float(q)) for t, q in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("segments must be non-empty")
        if segs[0][0] != 0.0:
            raise ValueError("first segment must start at t = 0")
        starts = [t for t, _ in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must be strictly increasing")
        if any(q <= 0 for _, q in segs):
            raise ValueError("q0 must be positive in every segment")


@dataclass(frozen=True)
class DayNightLight:
    """Half-sine daylight over a fraction of the period, floor at night."""

    period_h: float = 24.0
    floor: float = 100.0  # umol/m2/s
    peak: float = 600.0  # umol/m2/s
    day_fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.period_h <= 0:
            raise ValueError("period_h must be positive")
        if not 0 < self.day_fraction <= 1:
            raise ValueError("day_fraction must lie in (0, 1]")
        if self.floor <= 0 or self.peak < self.floor:
            raise ValueError("need 0 < floor <= peak")


LightProfile = PiecewiseConstantLight | DayNightLight

# Benchmark schedule: strong light, then a step down to dim light at 30 h.
LIGHT_STEP_PROFILE = PiecewiseConstantLight(((0.0, 600.0), (30.0, 100.0)))


def light_at(t: float, profile: LightProfile) -> float:
    """Incident photon flux q0 at time t (hours)."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if isinstance(profile, PiecewiseConstantLight):
        starts = [s for s, _ in profile.segments]
        idx = bisect_left(starts, t)  # first segment starting at or after t
        return profile.segments[max(idx - 1, 0)][1]
    phase = (t % profile.period_h) / profile.period_h
    if phase >= profile.day_fraction:
        return profile.floor
    lift = sin(pi * phase / profile.day_fraction)
    return profile.floor + (profile.peak - profile.floor) * max(lift, 0.0)


@dataclass(frozen=True)
class NoiseConfig:
    """Multiplicative Gaussian measurement noise."""

    relative_std: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if self.relative_std < 0:
            raise ValueError("relative_std must be nonnegative")


@dataclass(frozen=True)
class SamplingConfig:
    """Controller sampling period and integrator resolution."""

    period_h: float = 0.1  # 6 min
    substeps: int = 10  # RK4 steps per sampling period

    def __post_init__(self) -> None:
        if self.period_h <= 0:
            raise ValueError("period_h must be positive")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


@dataclass(frozen=True)
class PlantState:
    X: float  # biomass concentration, kg/m3
    t: float  # time, h


class IntegrationError(RuntimeError):
    """Raised when the integrator produces a non-finite state."""

    def __init__(self, message: str, *, t: float, X: float, D: float) -> None:
        super().__init__(f"{message} (t={t:.6g} h, X={X:.6g}, D={D:.6g})")
        self.t = t
        self.X = X
        self.D = D


def plant_derivative(
    X: float,
    D: float,
    q0: float,
    params: FullModelParams | SimplifiedModelParams = FullModelParams(),
    geom: Geometry = Geometry(),
    n_nodes: int = 101,
) -> float:
    """dX/dt in kg/m3/h at dilution rate D (1/h)."""
    if D < 0:
        raise ValueError(f"D must be nonnegative, got {D}")
    return growth_rate(X, q0, params, geom, n_nodes) - D * X


def step(
    state: PlantState,
    D: float,
    profile: LightProfile,
    dt: float,
    params: FullModelParams | SimplifiedModelParams = FullModelParams(),
    geom: Geometry = Geometry(),
    substeps: int = 10,
    n_nodes: int = 101,
) -> PlantState:
    """Advance the plant by dt hours under constant D (zero-order hold).

    Biomass is clamped at zero from below: the vessel cannot hold negative
    concentration, and RK4 stage excursions below zero are cut the same way.
    Raises IntegrationError if the state stops being finite.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    h = dt / substeps
    X = state.X

    def f(x: float, t: float) -> float:
        q0 = light_at(t, profile)
        return plant_derivative(max(x, 0.0), D, q0, params, geom, n_nodes)

    for i in range(substeps):
        t0 = state.t + i * h
        k1 = f(X, t0)
        k2 = f(X + 0.5 * h * k1, t0 + 0.5 * h)
        k3 = f(X + 0.5 * h * k2, t0 + 0.5 * h)
        k4 = f(X + h * k3, t0 + h)
        X = X + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not isfinite(X):
            raise IntegrationError("state became non-finite", t=t0 + h, X=X, D=D)
        X = max(X, 0.0)
    return PlantState(X=X, t=state.t + dt)


def measure(X: float, noise: NoiseConfig, rng: np.random.Generator) -> float:
    """Noisy biomass measurement y = X * (1 + nu), clamped at zero."""
    nu = rng.normal(0.0, noise.relative_std)
    return max(X * (1.0 + nu), 0.0)
