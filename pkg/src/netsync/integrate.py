"""Fixed-step RK4 integration, period detection and limit-cycle settling."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from netsync.models import SystemSpec

Vector = NDArray[np.float64]
VectorField = Callable[[Vector], Vector]
System = Union[SystemSpec, VectorField]

BLOWUP_THRESHOLD = 1e6


class BlowUpError(ArithmeticError):
    """State became non-finite or exceeded the blow-up threshold."""

    def __init__(self, time: float, state: ArrayLike, reason: str = "") -> None:
        self.time = float(time)
        self.state = np.asarray(state)
        msg = f"integration blew up at t={self.time:.6g}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class NoPeriodError(RuntimeError):
    """No sustained oscillation found (fixed point, decay, or too short a horizon)."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 400.0
    transient: float = 200.0
    method: str = "rk4"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and math.isfinite(self.t_end)):
            raise ValueError("dt and t_end must be finite")
        if not 0.0 < self.dt <= self.t_end:
            raise ValueError(f"need 0 < dt <= t_end, got dt={self.dt}, t_end={self.t_end}")
        if not 0.0 <= self.transient < self.t_end:
            raise ValueError(
                f"need 0 <= transient < t_end, got transient={self.transient}, t_end={self.t_end}"
            )
        if self.method != "rk4":
            raise ValueError(f"only the 'rk4' method is supported, got {self.method!r}")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution; row ``k`` of ``states`` is the state at ``times[k]``."""

    times: NDArray[np.float64]
    states: NDArray[np.float64]
    spec: SystemSpec | None = None
    transient: float = 0.0

    def __post_init__(self) -> None:
        if self.times.ndim != 1 or self.states.ndim != 2:
            raise ValueError("times must be 1-D and states 2-D")
        if self.times.shape[0] != self.states.shape[0]:
            raise ValueError("times and states disagree in length")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def final_state(self) -> Vector:
        return self.states[-1]

    def after(self, t: float) -> slice:
        """Index slice of samples with ``time >= t``."""
        start = int(np.searchsorted(self.times, t - 1e-12 * max(1.0, abs(t))))
        return slice(start, None)

    @property
    def post_transient(self) -> slice:
        return self.after(self.times[0] + self.transient)

    def to_csv(self, path: str | Path | None = None, stride: int = 1) -> str:
        """CSV with header ``t,x0,x1,...`` and 17 significant digits."""
        if stride < 1:
            raise ValueError("stride must be positive")
        data = np.column_stack([self.times, self.states])[::stride]
        header = ",".join(["t"] + [f"x{k}" for k in range(self.states.shape[1])])
        buf = io.StringIO()
        np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=header, comments="",
                   newline="\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="\n")
        return text


def _field(system: System) -> VectorField:
    return system.rhs if isinstance(system, SystemSpec) else system


def rk4_step(f: VectorField, x: Vector, h: float) -> Vector:
    half = 0.5 * h
    k1 = f(x)
    k2 = f(x + half * k1)
    k3 = f(x + half * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + k4 + 2.0 * (k2 + k3))


def _check(x: Vector, t: float) -> None:
    m = abs(x).max()
    if not m <= BLOWUP_THRESHOLD:  # also catches NaN
        reason = "non-finite state" if not np.all(np.isfinite(x)) else f"|x| > {BLOWUP_THRESHOLD:g}"
        raise BlowUpError(t, x, reason)


def integrate(system: System, x0: ArrayLike, cfg: IntegratorConfig) -> Trajectory:
    """Classical RK4 with fixed ``cfg.dt`` from ``t = 0`` to ``cfg.t_end``.

    ``system`` is a :class:`SystemSpec` or any autonomous vector field
    ``x -> dx/dt``. The whole path, transient included, is returned; the
    transient length travels with the trajectory for later analysis.
    """
    f = _field(system)
    x = np.array(x0, dtype=float)
    if x.ndim != 1:
        raise ValueError("initial state must be a 1-D vector")
    if isinstance(system, SystemSpec) and x.shape[0] != system.state_dim:
        raise ValueError(
            f"initial state has length {x.shape[0]}, model {system.model} needs {system.state_dim}"
        )
    _check(x, 0.0)
    n = cfg.n_steps
    dt = cfg.dt
    states = np.empty((n + 1, x.shape[0]))
    states[0] = x
    for k in range(1, n + 1):
        x = rk4_step(f, x, dt)
        _check(x, k * dt)
        states[k] = x
    times = np.arange(n + 1) * dt
    return Trajectory(times, states, system if isinstance(system, SystemSpec) else None,
                      cfg.transient)


def flow(
    f: VectorField, x0: ArrayLike, duration: float, dt: float, keep: bool = False
) -> tuple[Vector, NDArray[np.float64] | None, NDArray[np.float64] | None]:
    """Advance ``x0`` by exactly ``duration``: whole ``dt`` steps plus one final
    partial step. With ``keep`` the grid times and states are returned too."""
    x = np.array(x0, dtype=float)
    n = int(math.floor(duration / dt + 1e-9))
    rem = duration - n * dt
    if rem <= 1e-12 * dt:
        rem = 0.0
    times = [0.0] if keep else None
    states = [x] if keep else None
    for k in range(1, n + 1):
        x = rk4_step(f, x, dt)
        _check(x, k * dt)
        if keep:
            times.append(k * dt)
            states.append(x)
    if rem > 0.0:
        x = rk4_step(f, x, rem)
        _check(x, duration)
        if keep:
            times.append(duration)
            states.append(x)
    if keep:
        return x, np.array(times), np.array(states)
    return x, None, None


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    spread: float
    crossings: NDArray[np.float64]
    indices: NDArray[np.int64]
    level: float


def estimate_period(
    traj: Trajectory, component: int = 0, level: float | None = None,
    start: float | None = None,
) -> PeriodEstimate:
    """Mean spacing of upward level crossings of one state component.

    Only samples at or after ``start`` (default: end of the transient) are
    used. ``level`` defaults to the component's mean over that window. Each
    crossing time is located by linear interpolation between the bracketing
    samples; ``spread`` is the standard deviation of the spacings.
    """
    t0 = traj.times[0] + traj.transient if start is None else start
    sl = traj.after(t0)
    t = traj.times[sl]
    x = traj.states[sl, component]
    if x.size < 2:
        raise NoPeriodError("analysis window is empty")
    if level is None:
        level = float(np.mean(x))
    if np.ptp(x) <= 1e-9 * max(1.0, abs(level)):
        raise NoPeriodError(f"component {component} is (numerically) constant")
    idx = np.flatnonzero((x[:-1] < level) & (x[1:] >= level))
    if idx.size < 3:
        raise NoPeriodError(
            f"only {idx.size} upward crossings of level {level:.6g} in component {component}"
        )
    tc = t[idx] + (level - x[idx]) / (x[idx + 1] - x[idx]) * (t[idx + 1] - t[idx])
    gaps = np.diff(tc)
    offset = sl.start or 0
    return PeriodEstimate(float(gaps.mean()), float(gaps.std()), tc, idx + offset, level)


@dataclass(frozen=True)
class LimitCycle:
    """A point on a settled periodic orbit and the orbit period."""

    anchor: Vector
    period: float
    return_error: float
    spread: float
    scale: float


def settle_to_limit_cycle(
    system: System, x0: ArrayLike, cfg: IntegratorConfig, component: int = 0,
    cycle_tol: float = 1e-3,
) -> LimitCycle:
    """Integrate past the transient, measure the period and pick an anchor.

    The anchor is the state at the last detected upward crossing, reached by
    a fractional RK4 step from the preceding grid sample. The orbit is
    accepted when one more period from the anchor returns within
    ``cycle_tol`` times the orbit's peak-to-peak size.

    Raises
    ------
    NoPeriodError
        If no periodic orbit is found.
    """
    f = _field(system)
    traj = integrate(system, x0, cfg)
    est = estimate_period(traj, component)
    i = int(est.indices[-1])
    frac = float(est.crossings[-1] - traj.times[i])
    anchor = rk4_step(f, traj.states[i], frac) if frac > 0 else traj.states[i].copy()
    scale = float(np.linalg.norm(np.ptp(traj.states[traj.post_transient], axis=0)))
    back, _, _ = flow(f, anchor, est.period, cfg.dt)
    err = float(np.linalg.norm(back - anchor))
    if not err <= cycle_tol * scale:
        raise NoPeriodError(
            f"orbit does not close: return error {err:.3g} vs orbit size {scale:.3g}"
        )
    return LimitCycle(anchor, est.period, err, est.spread, scale)
