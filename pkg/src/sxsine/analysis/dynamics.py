"""Closed-form solution, vector field and RK4 simulation of the sine ODE.

State ordering is always (x, y, t) with

    x' = y
    y' = -omega^2 (x - mu t)
    t' = 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..errors import NonFiniteError
from ..sine_builder import SineParams

STATE_VARS = ("x", "y", "t")


@dataclass(frozen=True)
class StateVector:
    x: float
    y: float
    t: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.t)):
            raise ValueError(f"state must be finite: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.t], dtype=float)

    @classmethod
    def from_array(cls, a) -> "StateVector":
        x, y, t = (float(v) for v in a)
        return cls(x, y, t)


@dataclass(frozen=True, eq=False)
class AffineSystem:
    """s' = M s + b."""

    M: np.ndarray
    b: np.ndarray

    def __call__(self, s) -> np.ndarray:
        return self.M @ np.asarray(s, dtype=float) + self.b


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped states; ``states[i]`` is (x, y, t) at ``times[i]``."""

    times: np.ndarray
    states: np.ndarray
    method: str

    def __post_init__(self):
        if self.method not in ("analytic", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(self.times) and (self.times[0] < 0 or np.any(np.diff(self.times) <= 0)):
            raise ValueError("times must be non-negative and strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[tuple[float, StateVector]]:
        for t, s in zip(self.times, self.states):
            yield float(t), StateVector.from_array(s)


def analytic_state(p: SineParams, t: float) -> StateVector:
    arg = p.omega * t + p.phase
    return StateVector(
        x=-(p.amplitude / p.omega) * math.cos(arg) + p.bias * t,
        y=p.amplitude * math.sin(arg) + p.bias,
        t=t,
    )


def analytic_trajectory(p: SineParams, times: Sequence[float]) -> Trajectory:
    t = np.asarray(times, dtype=float)
    arg = p.omega * t + p.phase
    states = np.column_stack([
        -(p.amplitude / p.omega) * np.cos(arg) + p.bias * t,
        p.amplitude * np.sin(arg) + p.bias,
        t,
    ])
    return Trajectory(t, states, "analytic")


def sine_through(omega: float, bias: float, s0) -> SineParams:
    """Signal parameters whose closed-form solution passes through ``s0`` at t=0."""
    x0, y0 = float(s0[0]), float(s0[1])
    v0 = y0 - bias
    c = -omega * x0
    return SineParams(math.hypot(v0, c), omega, bias, math.atan2(v0, c))


def vector_field(p: SineParams, s) -> np.ndarray:
    x, y, t = (float(v) for v in (s.as_array() if isinstance(s, StateVector) else s))
    return np.array([y, -p.omega * p.omega * (x - p.bias * t), 1.0])


def affine_system(p: SineParams) -> AffineSystem:
    w2 = p.omega * p.omega
    M = np.array([
        [0.0, 1.0, 0.0],
        [-w2, 0.0, w2 * p.bias],
        [0.0, 0.0, 0.0],
    ])
    return AffineSystem(M, np.array([0.0, 0.0, 1.0]))


def conservation_residual(p: SineParams, s) -> float:
    """|(y - mu)^2 + omega^2 (x - mu t)^2 - A^2|, zero along exact solutions."""
    x, y, t = (float(v) for v in (s.as_array() if isinstance(s, StateVector) else s))
    u = x - p.bias * t
    v = y - p.bias
    return abs(v * v + p.omega * p.omega * u * u - p.amplitude * p.amplitude)


def time_grid(step: float, horizon: float) -> np.ndarray:
    """0, step, 2*step, ... up to ``horizon``, with a final partial step if needed."""
    if not step > 0:
        raise ValueError("step must be > 0")
    if not horizon >= step:
        raise ValueError("horizon must be >= step")
    ratio = horizon / step
    n = round(ratio)
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        n = math.floor(ratio)
    grid = np.arange(n + 1) * step
    if abs(grid[-1] - horizon) <= 1e-12 * horizon:
        grid[-1] = horizon
    else:
        grid = np.append(grid, horizon)
    return grid


def simulate(p: SineParams, init, step: float, horizon: float) -> Trajectory:
    """Classical fixed-step RK4; samples at multiples of ``step`` plus ``horizon``."""
    s = np.asarray(init.as_array() if isinstance(init, StateVector) else init, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError("initial state must be finite")
    times = time_grid(step, horizon)
    w2 = p.omega * p.omega
    mu = p.bias

    def f(x, y, t):
        return y, -w2 * (x - mu * t), 1.0

    out = np.empty((len(times), 3))
    out[0] = s
    x, y, t = (float(v) for v in s)
    for k in range(1, len(times)):
        h = float(times[k] - times[k - 1])
        k1 = f(x, y, t)
        k2 = f(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], t + 0.5 * h)
        k3 = f(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], t + 0.5 * h)
        k4 = f(x + h * k3[0], y + h * k3[1], t + h)
        x += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t += h
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NonFiniteError(k, f"state overflowed at t={times[k]}")
        out[k] = (x, y, t)
    return Trajectory(times, out, "rk4")
