"""Phase extraction, synchronization measures and reduced-system equilibria."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from netsync.integrate import Trajectory
from netsync.linalg import eigvals
from netsync.models import (
    KuramotoStarParams,
    kuramoto_reduced_jacobian,
    kuramoto_reduced_rhs,
)

DEFAULT_TOLERANCE = 1e-2
MEASURE_FRACTION = 0.25
MIN_CYCLES = 5.0

Series = NDArray[np.float64]


class DegenerateNodeError(ValueError):
    """A node does not oscillate, so it has no meaningful phase."""


class WindowTooShortError(ValueError):
    """Too few oscillation cycles after the transient for a verdict."""


class EquilibriumError(RuntimeError):
    def __init__(self, message: str, iterate: ArrayLike) -> None:
        super().__init__(message)
        self.iterate = np.asarray(iterate)


class SingularJacobianError(EquilibriumError):
    pass


def _is_phase_model(traj: Trajectory) -> bool:
    return traj.spec is not None and traj.spec.is_phase_model


def _node_columns(traj: Trajectory, node: int) -> slice:
    if traj.spec is not None:
        if traj.spec.model == "kuramoto_reduced":
            raise DegenerateNodeError("phase-difference coordinates have no per-node phase")
        return traj.spec.node_slice(node)
    if not 0 <= 2 * node < traj.states.shape[1] - 1:
        raise IndexError(f"node {node} out of range")
    return slice(2 * node, 2 * node + 2)


def phase_of(traj: Trajectory, node: int) -> Series:
    """Unwrapped phase of one node over the whole trajectory.

    Phase models return the state component as is. Planar oscillators use
    ``atan2(w - w_mean, v - v_mean)`` with means over the post-transient
    window, then unwrap.
    """
    cols = _node_columns(traj, node)
    if _is_phase_model(traj):
        return traj.states[:, cols.start].copy()
    sub = traj.states[:, cols]
    window = sub[traj.post_transient]
    if window.shape[0] < 2 or np.all(np.ptp(window, axis=0) <= 1e-9):
        raise DegenerateNodeError(f"node {node} does not oscillate after the transient")
    centre = window.mean(axis=0)
    return np.unwrap(np.arctan2(sub[:, 1] - centre[1], sub[:, 0] - centre[0]))


def wrap_phase(x: ArrayLike) -> NDArray[np.float64]:
    """Map angles to the interval (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    out = x - 2.0 * np.pi * np.ceil((x - np.pi) / (2.0 * np.pi))
    # guard rounding at the open end
    return np.where(out <= -np.pi, out + 2.0 * np.pi, out)


def phase_differences(
    traj: Trajectory, pairs: Iterable[tuple[int, int]]
) -> dict[tuple[int, int], Series]:
    """Wrapped ``phase_i - phase_j`` series for each ``(i, j)``."""
    pairs = [tuple(p) for p in pairs]
    cache: dict[int, Series] = {}
    for node in {k for p in pairs for k in p}:
        cache[node] = phase_of(traj, node)
    return {(i, j): wrap_phase(cache[i] - cache[j]) for i, j in pairs}


def series_to_csv(times: ArrayLike, columns: dict[str, ArrayLike], stride: int = 1) -> str:
    buf = io.StringIO()
    names = list(columns)
    buf.write(",".join(["t", *names]) + "\n")
    data = np.column_stack([np.asarray(times)] + [np.asarray(columns[k]) for k in names])
    np.savetxt(buf, data[::stride], fmt="%.17g", delimiter=",", newline="\n")
    return buf.getvalue()


@dataclass(frozen=True)
class SyncVerdict:
    classification: str
    peripheral_residual: float
    hub_residual: float
    convergence_time: float | None
    tolerance: float

    def to_json(self) -> dict:
        return {
            "classification": self.classification,
            "peripheral_residual": self.peripheral_residual,
            "hub_residual": self.hub_residual,
            "convergence_time": self.convergence_time,
            "tolerance": self.tolerance,
        }


def _settle_time(times: Series, residual: Series, tol: float) -> float | None:
    above = np.flatnonzero(residual > tol)
    if above.size == 0:
        return float(times[0])
    last = int(above[-1])
    return None if last + 1 >= len(times) else float(times[last + 1])


def detect_sync(
    traj: Trajectory,
    hub: int,
    tolerance: float = DEFAULT_TOLERANCE,
    peripherals: Sequence[int] | None = None,
    min_cycles: float = MIN_CYCLES,
) -> SyncVerdict:
    """Classify hub/peripheral phase locking.

    Residuals are maximum absolute wrapped phase differences over the last
    quarter of the post-transient window: among peripherals, and between
    the hub and each peripheral.

    Raises
    ------
    WindowTooShortError
        If the hub completes fewer than ``min_cycles`` cycles after the
        transient.
    """
    n_nodes = traj.spec.n_nodes if traj.spec is not None else traj.states.shape[1] // 2
    if peripherals is None:
        peripherals = [k for k in range(n_nodes) if k != hub]
    peripherals = list(peripherals)
    if hub in peripherals:
        raise ValueError("hub cannot also be a peripheral")
    phases = {k: phase_of(traj, k) for k in [hub, *peripherals]}
    post = traj.post_transient
    hub_post = phases[hub][post]
    if hub_post.size < 2:
        raise WindowTooShortError("no samples after the transient")
    cycles = abs(hub_post[-1] - hub_post[0]) / (2.0 * math.pi)
    if cycles < min_cycles:
        raise WindowTooShortError(
            f"only {cycles:.2f} cycles after the transient (need {min_cycles:g})"
        )
    n_post = hub_post.size
    start = (post.start or 0) + int(math.floor((1.0 - MEASURE_FRACTION) * n_post))

    def resid(pairs: list[tuple[int, int]]) -> Series:
        if not pairs:
            return np.zeros(len(traj.times))
        return np.max([np.abs(wrap_phase(phases[i] - phases[j])) for i, j in pairs], axis=0)

    per_series = resid(list(combinations(peripherals, 2)))
    hub_series = resid([(hub, k) for k in peripherals])
    per_res = float(per_series[start:].max())
    hub_res = float(hub_series[start:].max())
    if per_res <= tolerance and hub_res <= tolerance:
        cls = "complete_sync"
        settle = _settle_time(traj.times, np.maximum(per_series, hub_series), tolerance)
    elif per_res <= tolerance:
        cls = "remote_sync"
        settle = _settle_time(traj.times, per_series, tolerance)
    else:
        cls = "unsynchronized"
        settle = None
    return SyncVerdict(cls, per_res, hub_res, settle, float(tolerance))


def sync_error(traj: Trajectory, nodes: Sequence[int]) -> Series:
    """Largest Euclidean distance between any two listed nodes' sub-states, per sample."""
    nodes = list(nodes)
    if len(nodes) < 2:
        raise ValueError("sync_error needs at least two nodes")
    subs = [traj.states[:, _node_columns(traj, k)] for k in nodes]
    return np.max(
        [np.linalg.norm(subs[a] - subs[b], axis=1) for a, b in combinations(range(len(nodes)), 2)],
        axis=0,
    )


@dataclass(frozen=True)
class EquilibriumResult:
    x_star: NDArray[np.float64]
    residual: float
    jacobian_eigenvalues: tuple[complex, ...]
    locally_stable: bool
    iterations: int

    @property
    def normalized(self) -> NDArray[np.float64]:
        """``x_star`` reduced modulo 2 pi into [0, 2 pi)."""
        return np.mod(self.x_star, 2.0 * np.pi)

    def to_json(self) -> dict:
        return {
            "x_star": [float(x) for x in self.x_star],
            "x_star_mod_2pi": [float(x) for x in self.normalized],
            "residual": self.residual,
            "jacobian_eigenvalues": [[z.real, z.imag] for z in self.jacobian_eigenvalues],
            "locally_stable": self.locally_stable,
            "iterations": self.iterations,
        }


def find_equilibrium(
    p: KuramotoStarParams,
    guess: ArrayLike,
    tol: float = 1e-10,
    max_iter: int = 100,
    max_halvings: int = 20,
) -> EquilibriumResult:
    """Damped Newton on the reduced phase-difference system.

    Each Newton step is halved until the residual norm drops (at most
    ``max_halvings`` times).
    """
    x = np.array(guess, dtype=float)
    gain = max(abs(g) for g in (*p.incoming, *p.outgoing))
    r = kuramoto_reduced_rhs(x, p)
    norm = float(np.linalg.norm(r))
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise EquilibriumError(f"Newton did not converge in {max_iter} iterations", x)
        J = kuramoto_reduced_jacobian(x, p)
        if np.abs(J).max() <= 1e-12 * gain or np.linalg.cond(J) > 1e13:
            raise SingularJacobianError("singular Jacobian at Newton iterate", x)
        step = np.linalg.solve(J, -r)
        scale = 1.0
        for _ in range(max_halvings + 1):
            trial = x + scale * step
            r_trial = kuramoto_reduced_rhs(trial, p)
            n_trial = float(np.linalg.norm(r_trial))
            if n_trial < norm:
                break
            scale *= 0.5
        else:
            raise EquilibriumError("damped Newton step failed to reduce the residual", x)
        x, r, norm = trial, r_trial, n_trial
        it += 1
    ev = tuple(complex(z) for z in sorted(eigvals(kuramoto_reduced_jacobian(x, p)),
                                          key=lambda z: (z.real, z.imag)))
    stable = all(z.real < 0 for z in ev)
    return EquilibriumResult(x, norm, ev, stable, it)
