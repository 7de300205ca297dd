"""Monodromy matrices, Floquet multipliers and master-stability sweeps."""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from netsync.graph import SpectralDecomposition
from netsync.integrate import (
    BlowUpError,
    IntegratorConfig,
    LimitCycle,
    System,
    _field,
    flow,
    settle_to_limit_cycle,
)
from netsync.linalg import eigvals
from netsync.models import FhnParams, SystemSpec, msf_block_matrix

TRIVIAL_TOLERANCE = 0.05
# moduli within this of 1 are neutral, neither contracting nor expanding
NEUTRAL_TOLERANCE = 1e-6
# |ln(max modulus)| at or below this counts as neutral
MARGINAL_LOG_TOLERANCE = 5e-3

Variational = Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class MonodromyMatrix:
    """State-transition matrix over one period, ``Phi(T, 0)``.

    ``trace_integral`` is the trapezoid-rule integral of ``tr J(x(t))`` over
    the same period, kept so the Liouville identity
    ``det Phi = exp(int tr J)`` can be checked independently of ``Phi``.
    """

    matrix: NDArray[np.float64]
    period: float
    anchor: NDArray[np.float64]
    trace_integral: float = math.nan

    @property
    def liouville_error(self) -> float:
        """Relative mismatch between ``det Phi`` and ``exp(int tr J dt)``."""
        expected = math.exp(self.trace_integral)
        return abs(float(np.linalg.det(self.matrix)) - expected) / expected


def _as_cycle(cycle: LimitCycle | tuple[ArrayLike, float]) -> tuple[NDArray[np.float64], float]:
    if isinstance(cycle, LimitCycle):
        return np.asarray(cycle.anchor, dtype=float), float(cycle.period)
    anchor, period = cycle
    return np.asarray(anchor, dtype=float), float(period)


def monodromy(
    variational: Variational,
    cycle: LimitCycle | tuple[ArrayLike, float],
    system: System,
    cfg: IntegratorConfig,
) -> MonodromyMatrix:
    """Co-integrate the orbit and ``Phi' = J(x(t)) Phi`` with ``Phi(0) = I``.

    Both use the same RK4 grid (whole steps of ``cfg.dt`` plus a final
    partial step landing exactly on the period).

    Raises
    ------
    BlowUpError
        If the orbit or any entry of ``Phi`` leaves the blow-up bound.
    """
    anchor, period = _as_cycle(cycle)
    if not period > 0:
        raise ValueError("period must be positive")
    f = _field(system)
    n = anchor.shape[0]
    m = np.asarray(variational(anchor)).shape[0]

    def augmented(y: NDArray[np.float64]) -> NDArray[np.float64]:
        x = y[:n]
        phi = y[n:].reshape(m, m)
        return np.concatenate([f(x), (variational(x) @ phi).ravel()])

    y0 = np.concatenate([anchor, np.eye(m).ravel()])
    y, times, states = flow(augmented, y0, period, cfg.dt, keep=True)
    traces = np.array([np.trace(variational(s[:n])) for s in states])
    trace_integral = float(np.sum(0.5 * (traces[1:] + traces[:-1]) * np.diff(times)))
    phi_T = y[n:].reshape(m, m).copy()
    return MonodromyMatrix(phi_T, period, anchor, trace_integral)


@dataclass(frozen=True)
class FloquetResult:
    multipliers: tuple[complex, ...]
    trivial_index: int | None
    max_nontrivial_modulus: float
    stable: bool
    trivial_tolerance: float = TRIVIAL_TOLERANCE

    @property
    def moduli(self) -> list[float]:
        return [abs(z) for z in self.multipliers]

    @property
    def verdict(self) -> str:
        """``stable``, ``marginal`` (neutral within tolerance) or ``unstable``."""
        if self.stable:
            return "stable"
        trivial_ok = self.trivial_index is None or (
            abs(self.multipliers[self.trivial_index] - 1.0) <= self.trivial_tolerance
        )
        if trivial_ok and self.max_nontrivial_modulus <= 1.0 + self.trivial_tolerance:
            return "marginal"
        return "unstable"

    def to_json(self) -> dict:
        return {
            "multipliers": [[z.real, z.imag] for z in self.multipliers],
            "moduli": self.moduli,
            "trivial_index": self.trivial_index,
            "max_nontrivial_modulus": self.max_nontrivial_modulus,
            "stable": self.stable,
            "verdict": self.verdict,
            "trivial_tolerance": self.trivial_tolerance,
        }


def floquet_multipliers(
    m: MonodromyMatrix | ArrayLike,
    trivial_tolerance: float = TRIVIAL_TOLERANCE,
    autonomous: bool = True,
) -> FloquetResult:
    """Eigenvalues of the monodromy matrix with a stability verdict.

    For an autonomous limit cycle one multiplier belongs to the flow
    direction and should sit at 1; it is excluded from the stability test.
    Pass ``autonomous=False`` for a periodically forced linear system
    (such as a master-stability block), where every multiplier counts.
    """
    M = m.matrix if isinstance(m, MonodromyMatrix) else np.asarray(m, dtype=float)
    ev = [complex(z) for z in eigvals(M)]
    ev.sort(key=lambda z: (-abs(z), -z.real, -z.imag))
    if autonomous:
        trivial = min(range(len(ev)), key=lambda k: (abs(ev[k] - 1.0), k))
        rest = [abs(z) for k, z in enumerate(ev) if k != trivial]
        max_rest = max(rest) if rest else 0.0
        stable = abs(ev[trivial] - 1.0) <= trivial_tolerance and max_rest < 1.0 - NEUTRAL_TOLERANCE
    else:
        trivial = None
        max_rest = max(abs(z) for z in ev)
        stable = max_rest < 1.0 - NEUTRAL_TOLERANCE
    return FloquetResult(tuple(ev), trivial, float(max_rest), bool(stable), trivial_tolerance)


# --- master stability function ---------------------------------------------

@dataclass(frozen=True)
class MsfPoint:
    gamma: float
    max_floquet_modulus: float
    msf: float
    diverged: bool
    moduli: tuple[float, ...] = ()


@dataclass(frozen=True)
class MsfCurve:
    """Largest transverse Floquet multiplier (and its exponent ``ln|mu|/T``)
    against ``gamma = coupling * Laplacian eigenvalue``."""

    gammas: NDArray[np.float64]
    values: tuple[MsfPoint, ...]
    period: float
    anchor: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if len(self.gammas) != len(self.values):
            raise ValueError("gammas and values differ in length")
        if np.any(np.diff(self.gammas) <= 0):
            raise ValueError("gammas must be strictly increasing")

    @property
    def max_modulus(self) -> NDArray[np.float64]:
        return np.array([v.max_floquet_modulus for v in self.values])

    @property
    def msf(self) -> NDArray[np.float64]:
        return np.array([v.msf for v in self.values])

    def log_modulus_at(self, gamma: float) -> float:
        """``ln(max modulus)`` linearly interpolated in ``gamma``; no extrapolation."""
        g = self.gammas
        span = 1e-12 * max(1.0, float(np.max(np.abs(g))))
        if not (g[0] - span <= gamma <= g[-1] + span):
            raise ValueError(f"gamma={gamma:.6g} outside the swept range [{g[0]:.6g}, {g[-1]:.6g}]")
        k = int(np.clip(np.searchsorted(g, gamma), 1, len(g) - 1))
        lo, hi = self.values[k - 1], self.values[k]
        if abs(gamma - g[k - 1]) <= span:
            return math.log(lo.max_floquet_modulus)
        if abs(gamma - g[k]) <= span:
            return math.log(hi.max_floquet_modulus)
        if lo.diverged or hi.diverged:
            return math.inf
        w = (gamma - g[k - 1]) / (g[k] - g[k - 1])
        return (1 - w) * math.log(lo.max_floquet_modulus) + w * math.log(hi.max_floquet_modulus)

    def msf_at(self, gamma: float) -> float:
        return self.log_modulus_at(gamma) / self.period

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("gamma,max_modulus,msf,diverged\n")
        for v in self.values:
            buf.write(f"{v.gamma:.17g},{v.max_floquet_modulus:.17g},{v.msf:.17g},"
                      f"{str(v.diverged).lower()}\n")
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "anchor": [float(x) for x in self.anchor],
            "points": [
                {"gamma": v.gamma, "max_modulus": v.max_floquet_modulus, "msf": v.msf,
                 "diverged": v.diverged, "moduli": list(v.moduli)}
                for v in self.values
            ],
        }


def msf_point(p: FhnParams, gamma: float, cycle: tuple[NDArray[np.float64], float],
              dt: float) -> MsfPoint:
    """Floquet analysis of ``J(x_s(t)) - gamma I`` along one stored cycle."""
    spec = SystemSpec("fhn_single", p)
    period = cycle[1]
    try:
        mono = monodromy(lambda x: msf_block_matrix(x, p, gamma), cycle, spec,
                         IntegratorConfig(dt=dt, t_end=max(period, dt), transient=0.0))
    except BlowUpError:
        return MsfPoint(float(gamma), math.inf, math.inf, True)
    res = floquet_multipliers(mono, autonomous=False)
    top = res.max_nontrivial_modulus
    msf = math.log(top) / period if top > 0 else -math.inf
    return MsfPoint(float(gamma), top, msf, False, tuple(res.moduli))


def _msf_task(args: tuple) -> MsfPoint:
    return msf_point(*args)


def msf_sweep(
    p: FhnParams,
    gamma_range: tuple[float, float],
    steps: int,
    cfg: IntegratorConfig,
    x0: ArrayLike = (0.0, 0.0),
    workers: int = 1,
) -> MsfCurve:
    """Master stability function of identity-coupled FHN oscillators.

    The isolated oscillator is settled once; each grid value of ``gamma``
    then gets its own monodromy of the 2x2 block along that cycle. Points
    whose variational solution exceeds the blow-up bound are kept, flagged
    ``diverged`` with infinite modulus.

    Raises
    ------
    NoPeriodError
        If the isolated oscillator has no limit cycle.
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    lo, hi = float(gamma_range[0]), float(gamma_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"bad gamma range {gamma_range}")
    cycle = settle_to_limit_cycle(SystemSpec("fhn_single", p), x0, cfg)
    gammas = np.linspace(lo, hi, steps)
    tasks = [(p, float(g), (cycle.anchor, cycle.period), cfg.dt) for g in gammas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_msf_task, tasks))
    else:
        points = [_msf_task(t) for t in tasks]
    return MsfCurve(gammas, tuple(points), cycle.period, cycle.anchor)


@dataclass(frozen=True)
class ModeStability:
    index: int
    eigenvalue: float
    gamma: float
    msf: float
    max_modulus: float
    status: str


@dataclass(frozen=True)
class NetworkMsfReport:
    coupling: float
    modes: tuple[ModeStability, ...]
    verdict: str

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"

    def to_json(self) -> dict:
        return {
            "coupling": self.coupling,
            "verdict": self.verdict,
            "modes": [
                {"index": m.index, "eigenvalue": m.eigenvalue, "gamma": m.gamma,
                 "msf": m.msf, "max_modulus": m.max_modulus, "status": m.status}
                for m in self.modes
            ],
        }


def evaluate_network_msf(
    curve: MsfCurve,
    spectrum: SpectralDecomposition | Sequence[float],
    phi: float,
    marginal_tol: float = MARGINAL_LOG_TOLERANCE,
) -> NetworkMsfReport:
    """Read the MSF at ``gamma = phi * lambda`` for every Laplacian eigenvalue
    but the first (the synchronous mode).

    A mode is ``stable`` when ``ln(max modulus) < -marginal_tol``,
    ``unstable`` above ``+marginal_tol`` and ``marginal`` in between. The
    network is stable only if every mode is.
    """
    lams = spectrum.eigenvalues if isinstance(spectrum, SpectralDecomposition) else spectrum
    lams = [float(x) for x in sorted(lams)]
    modes = []
    for k, lam in enumerate(lams[1:], start=1):
        gamma = phi * lam
        logmod = curve.log_modulus_at(gamma)
        if logmod < -marginal_tol:
            status = "stable"
        elif logmod > marginal_tol:
            status = "unstable"
        else:
            status = "marginal"
        modes.append(ModeStability(k, lam, gamma, logmod / curve.period, math.exp(logmod)
                                   if logmod < 700 else math.inf, status))
    statuses = {m.status for m in modes}
    if "unstable" in statuses:
        verdict = "unstable"
    elif "marginal" in statuses:
        verdict = "marginal"
    else:
        verdict = "stable"
    return NetworkMsfReport(float(phi), tuple(modes), verdict)
