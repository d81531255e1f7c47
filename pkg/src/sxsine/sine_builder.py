"""Build the sine and clock automata, their network, and initial conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonZeroSampleTimeError, SampleBasedUnsupportedError
from .expr import parse
from .ha_model import (
    BaseComponent,
    Bind,
    Literal,
    Location,
    Model,
    NetworkComponent,
    ParamDecl,
)

NETWORK_ID = "system"
SINE_ALIAS = "sin_1"
CLOCK_ALIAS = "clock_1"


@dataclass(frozen=True)
class SineParams:
    """Signal ``y(t) = amplitude*sin(omega*t + phase) + bias``."""

    amplitude: float
    omega: float
    bias: float
    phase: float = 0.0

    def __post_init__(self):
        for name in ("amplitude", "omega", "bias", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.omega == 0:
            raise ValueError("omega must be nonzero")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0; use SineParams.normalized for negative values")

    @classmethod
    def normalized(cls, amplitude, omega, bias, phase=0.0) -> "SineParams":
        """Fold a negative amplitude into the phase: (-A, phi) == (A, phi + pi)."""
        if amplitude < 0:
            return cls(-amplitude, omega, bias, phase + math.pi)
        return cls(amplitude, omega, bias, phase)


@dataclass(frozen=True)
class InitState:
    x0: float
    y0: float
    t0: float = 0.0

    def __post_init__(self):
        if self.t0 != 0:
            raise ValueError("t0 must be 0")


@dataclass(frozen=True)
class StateBox:
    """Closed intervals for (x, y, t)."""

    x: tuple[float, float]
    y: tuple[float, float]
    t: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("x", "y", "t"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} interval is empty: [{lo}, {hi}]")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.x[0], self.y[0], self.t[0]], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.x[1], self.y[1], self.t[1]], dtype=float)

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(self.lower <= p) and np.all(p <= self.upper))

    @classmethod
    def point(cls, s: InitState) -> "StateBox":
        return cls((s.x0, s.x0), (s.y0, s.y0), (s.t0, s.t0))


@dataclass(frozen=True)
class SimulinkSineBlock:
    amplitude: float
    bias: float
    frequency: float
    phase: float = 0.0
    sample_time: float = 0.0
    sine_type: str = "time_based"


def initial_conditions(p: SineParams) -> InitState:
    return InitState(
        x0=-(p.amplitude / p.omega) * math.cos(p.phase),
        y0=p.amplitude * math.sin(p.phase) + p.bias,
        t0=0.0,
    )


def enlarge_initial(s: InitState, fraction: float) -> StateBox:
    """Centered box whose x and y widths are ``fraction * |nominal|``; t stays at 0."""
    if not fraction >= 0:
        raise ValueError("fraction must be >= 0")

    def widen(c):
        half = 0.5 * fraction * abs(c)
        return (c - half, c + half)

    return StateBox(widen(s.x0), widen(s.y0), (s.t0, s.t0))


def build_sine_component() -> BaseComponent:
    params = (
        ParamDecl.variable("x", local=True),
        ParamDecl.variable("y", local=False),
        ParamDecl.variable("t", local=True),
        ParamDecl.constant("omega"),
        ParamDecl.constant("mu"),
    )
    # omega*omega instead of a power operator, which SpaceEx's parser mishandles
    flow = (
        ("x", parse("y")),
        ("y", parse("-omega*omega*(x - mu*t)")),
        ("t", parse("1")),
    )
    return BaseComponent("sin", params, (Location(1, "loc1", flow),))


def build_clock_component() -> BaseComponent:
    return BaseComponent(
        "clock",
        (ParamDecl.variable("t_gl", local=False),),
        (Location(1, "loc1", (("t_gl", parse("1")),)),),
    )


def build_network(p: SineParams) -> Model:
    network = NetworkComponent(
        NETWORK_ID,
        (ParamDecl.variable("y"), ParamDecl.variable("t_gl")),
        (
            Bind("sin", SINE_ALIAS, (
                ("y", "y"),
                ("omega", Literal.of(p.omega)),
                ("mu", Literal.of(p.bias)),
            )),
            Bind("clock", CLOCK_ALIAS, (("t_gl", "t_gl"),)),
        ),
    )
    return Model((build_sine_component(), build_clock_component()), network)


def from_simulink(b: SimulinkSineBlock) -> SineParams:
    """Map sine-wave block settings onto signal parameters (frequency is taken as rad/s)."""
    if b.sine_type != "time_based":
        raise SampleBasedUnsupportedError(
            f"sine type {b.sine_type!r} has no ODE encoding; use time_based")
    if b.sample_time != 0:
        raise NonZeroSampleTimeError(
            f"sample time must be 0 (continuous-time semantics), got {b.sample_time}")
    return SineParams.normalized(b.amplitude, b.frequency, b.bias, b.phase)


def to_simulink(p: SineParams) -> SimulinkSineBlock:
    return SimulinkSineBlock(p.amplitude, p.bias, p.omega, p.phase, 0.0, "time_based")
