"""Vector fields and Jacobians for the oscillator systems.

Every model comes as a pair ``<name>_rhs`` / ``<name>_jacobian`` (or, for the
FHN star, ``fhn_star_variational_matrix``). States are flat float arrays;
coupled planar oscillators are stored node-major, ``(v_0, w_0, v_1, w_1, ...)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from netsync.graph import Graph, build_star, laplacian

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]

MODELS = (
    "kuramoto_star",
    "kuramoto_reduced",
    "fhn_single",
    "fhn_star",
    "fhn_network",
    "wien_bridge",
    "harmonic",
)


def _vec(x: ArrayLike, n: int | None = None, what: str = "state") -> Vector:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{what} must be a 1-D vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{what} has length {arr.shape[0]}, expected {n}")
    return arr


# --- parameter records ----------------------------------------------------

@dataclass(frozen=True)
class KuramotoStarParams:
    """Star of phase oscillators: hub frequency, peripheral frequency,
    peripheral-to-hub (``incoming``) and hub-to-peripheral (``outgoing``) gains."""

    omega_hub: float
    omega_peripheral: float
    incoming: tuple[float, ...]
    outgoing: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "incoming", tuple(float(x) for x in self.incoming))
        object.__setattr__(self, "outgoing", tuple(float(x) for x in self.outgoing))
        if len(self.incoming) != len(self.outgoing) or not self.incoming:
            raise ValueError("incoming and outgoing couplings need equal, nonzero length")
        vals = (self.omega_hub, self.omega_peripheral, *self.incoming, *self.outgoing)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("Kuramoto parameters must be finite")

    @property
    def n_peripheral(self) -> int:
        return len(self.incoming)

    @classmethod
    def identical(
        cls, n_peripheral: int, phi: float = 1.0, a: float | None = None,
        omega_hub: float = 1.0, omega_peripheral: float | None = None,
    ) -> KuramotoStarParams:
        a = phi if a is None else a
        omega_peripheral = omega_hub if omega_peripheral is None else omega_peripheral
        return cls(omega_hub, omega_peripheral, (phi,) * n_peripheral, (a,) * n_peripheral)


@dataclass(frozen=True)
class FhnParams:
    """FitzHugh-Nagumo constants; defaults are the published simulation values."""

    a: float = 3.0
    b: float = 2.0
    c: float = 1.0
    d: float = 0.2799991
    drive: float = 2.1

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c, self.d, self.drive)):
            raise ValueError("FHN parameters must be finite")
        if self.c == 0.0:
            raise ValueError("FHN parameter c must be nonzero")


REFERENCE_COUPLING = 0.115


@dataclass(frozen=True)
class WienParams:
    """Diode-stabilized Wien-bridge oscillator in van der Pol form.

    ``omega0 = 1/(R C)`` in rad/s, ``g0`` the small-signal amplifier gain and
    ``k_nl`` (1/V^2) the cubic gain-compression coefficient.
    """

    omega0: float
    g0: float
    k_nl: float
    devices: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError("omega0 must be positive")
        if not (self.k_nl > 0 and math.isfinite(self.k_nl)):
            raise ValueError("k_nl must be positive")
        if not math.isfinite(self.g0):
            raise ValueError("g0 must be finite")

    @property
    def natural_frequency_hz(self) -> float:
        return self.omega0 / (2.0 * math.pi)

    @property
    def weakly_nonlinear_amplitude(self) -> float:
        """Averaging-theory amplitude ``2 sqrt((g0 - 3) / k_nl)``; 0 when g0 <= 3."""
        return 2.0 * math.sqrt((self.g0 - 3.0) / self.k_nl) if self.g0 > 3.0 else 0.0

    @classmethod
    def from_rc(cls, r: float, c: float, g0: float, k_nl: float) -> WienParams:
        return cls(1.0 / (r * c), g0, k_nl, {"R": r, "C": c})

    @classmethod
    def from_devices(
        cls, r: float, c: float, g0: float, i_s: float, r_f2: float, n: float, v_t: float
    ) -> WienParams:
        k_nl = 8.0 * i_s * r_f2 / (9.0 * (n * v_t) ** 3)
        return cls(1.0 / (r * c), g0, k_nl,
                   {"R": r, "C": c, "I_s": i_s, "R_f2": r_f2, "n": n, "V_T": v_t})


@dataclass(frozen=True)
class HarmonicParams:
    """Linear oscillator ``x'' = -omega^2 x``; a reference system with known answers."""

    omega: float = 2.0 * math.pi


# --- Kuramoto star ----------------------------------------------------------

def kuramoto_star_rhs(state: ArrayLike, p: KuramotoStarParams) -> Vector:
    th = _vec(state, p.n_peripheral + 1)
    phi = np.asarray(p.incoming)
    amp = np.asarray(p.outgoing)
    diff = th[1:] - th[0]
    out = np.empty_like(th)
    out[0] = p.omega_hub + np.sum(phi * np.sin(diff))
    out[1:] = p.omega_peripheral - amp * np.sin(diff)
    return out


def kuramoto_star_jacobian(state: ArrayLike, p: KuramotoStarParams) -> Matrix:
    th = _vec(state, p.n_peripheral + 1)
    phi = np.asarray(p.incoming)
    amp = np.asarray(p.outgoing)
    cosd = np.cos(th[1:] - th[0])
    n = th.shape[0]
    J = np.zeros((n, n))
    J[0, 1:] = phi * cosd
    J[0, 0] = -np.sum(phi * cosd)
    J[1:, 0] = amp * cosd
    J[np.arange(1, n), np.arange(1, n)] = -amp * cosd
    return J


def kuramoto_reduced_rhs(x: ArrayLike, p: KuramotoStarParams) -> Vector:
    """Dynamics of the hub-minus-peripheral differences ``x_i = theta_0 - theta_i``.

    ``x_i' = (w0 - w) - (phi_i + A_i) sin x_i - sum_{j != i} phi_j sin x_j``
    """
    x = _vec(x, p.n_peripheral, "phase-difference vector")
    phi = np.asarray(p.incoming)
    amp = np.asarray(p.outgoing)
    s = np.sin(x)
    return (p.omega_hub - p.omega_peripheral) - np.sum(phi * s) - amp * s


def kuramoto_reduced_jacobian(x: ArrayLike, p: KuramotoStarParams) -> Matrix:
    x = _vec(x, p.n_peripheral, "phase-difference vector")
    phi = np.asarray(p.incoming)
    amp = np.asarray(p.outgoing)
    c = np.cos(x)
    J = np.tile(-phi * c, (x.shape[0], 1))
    J[np.diag_indices_from(J)] -= amp * c
    return J


# --- FitzHugh-Nagumo ----------------------------------------------------------

def fhn_rhs(state: ArrayLike, p: FhnParams) -> Vector:
    v, w = _vec(state, 2)
    return np.array([p.c * (v - w - v**3 / 3.0) + p.drive, p.d * (p.a + p.b * v - w)])


def fhn_jacobian(state: ArrayLike, p: FhnParams) -> Matrix:
    v = float(_vec(state, 2)[0])
    return np.array([[p.c * (1.0 - v * v), -p.c], [p.d * p.b, -p.d]])


def _fhn_nodes(V: Matrix, p: FhnParams) -> Matrix:
    v = V[:, 0]
    w = V[:, 1]
    out = np.empty_like(V)
    out[:, 0] = p.c * (v - w - v**3 / 3.0) + p.drive
    out[:, 1] = p.d * (p.a + p.b * v - w)
    return out


def fhn_star_rhs(
    state: ArrayLike, p: FhnParams, incoming: Sequence[float], outgoing: Sequence[float]
) -> Vector:
    """Hub (node 0) with peripherals; hub feels ``phi_i (x_i - x_H)`` and
    peripheral ``i`` feels ``A_i (x_H - x_i)`` on both ``v`` and ``w``."""
    phi = np.asarray(incoming, dtype=float)
    amp = np.asarray(outgoing, dtype=float)
    if phi.shape != amp.shape:
        raise ValueError("incoming and outgoing couplings must have equal length")
    X = _vec(state, 2 * (phi.shape[0] + 1)).reshape(-1, 2)
    out = _fhn_nodes(X, p)
    diff = X[1:] - X[0]
    out[0] += phi @ diff
    out[1:] -= amp[:, None] * diff
    return out.ravel()


def fhn_star_variational_matrix(
    state: ArrayLike, p: FhnParams, incoming: Sequence[float], outgoing: Sequence[float]
) -> Matrix:
    """Linearization of :func:`fhn_star_rhs` (both hub diagonals carry ``-sum phi``)."""
    phi = np.asarray(incoming, dtype=float)
    amp = np.asarray(outgoing, dtype=float)
    n = phi.shape[0] + 1
    X = _vec(state, 2 * n).reshape(-1, 2)
    J = np.zeros((2 * n, 2 * n))
    for k in range(n):
        J[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = fhn_jacobian(X[k], p)
    total = phi.sum()
    J[0, 0] -= total
    J[1, 1] -= total
    for i in range(1, n):
        g_in, g_out = phi[i - 1], amp[i - 1]
        J[0, 2 * i] = J[1, 2 * i + 1] = g_in
        J[2 * i, 0] = J[2 * i + 1, 1] = g_out
        J[2 * i, 2 * i] -= g_out
        J[2 * i + 1, 2 * i + 1] -= g_out
    return J


def fhn_network_rhs(state: ArrayLike, p: FhnParams, g: Graph, phi: float) -> Vector:
    X = _vec(state, 2 * g.n_nodes).reshape(-1, 2)
    L = laplacian(g).matrix
    return (_fhn_nodes(X, p) - phi * (L @ X)).ravel()


def fhn_network_jacobian(state: ArrayLike, p: FhnParams, g: Graph, phi: float) -> Matrix:
    X = _vec(state, 2 * g.n_nodes).reshape(-1, 2)
    J = -phi * np.kron(laplacian(g).matrix, np.eye(2))
    for k in range(g.n_nodes):
        J[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] += fhn_jacobian(X[k], p)
    return J


def msf_block_matrix(sync_state: ArrayLike, p: FhnParams, gamma: float) -> Matrix:
    """Transverse variational block ``J(x_s) - gamma I`` for identity coupling."""
    if not math.isfinite(gamma):
        raise ValueError("gamma must be finite")
    M = fhn_jacobian(sync_state, p)
    M[0, 0] -= gamma
    M[1, 1] -= gamma
    return M


# --- Wien bridge / harmonic reference ------------------------------------------

def wien_bridge_rhs(state: ArrayLike, p: WienParams) -> Vector:
    v, u = _vec(state, 2)
    damping = p.omega0 * ((3.0 - p.g0) + p.k_nl * v * v)
    return np.array([u, -damping * u - p.omega0**2 * v])


def wien_bridge_jacobian(state: ArrayLike, p: WienParams) -> Matrix:
    v, u = _vec(state, 2)
    w0 = p.omega0
    return np.array([
        [0.0, 1.0],
        [-2.0 * w0 * p.k_nl * v * u - w0**2, -w0 * ((3.0 - p.g0) + p.k_nl * v * v)],
    ])


def harmonic_rhs(state: ArrayLike, p: HarmonicParams) -> Vector:
    x, y = _vec(state, 2)
    return np.array([y, -p.omega**2 * x])


def harmonic_jacobian(state: ArrayLike, p: HarmonicParams) -> Matrix:
    _vec(state, 2)
    return np.array([[0.0, 1.0], [-p.omega**2, 0.0]])


def _coupled_fhn_field(
    p: FhnParams, incidence: Matrix, gather: Matrix
) -> Callable[[Vector], Vector]:
    # scalar loop: cheaper than numpy ufuncs on a handful of nodes
    a, b, c, d, drive = p.a, p.b, p.c, p.d, p.drive
    n_nodes = incidence.shape[1]

    def field_(x: Vector) -> Vector:
        if x.shape[0] != 2 * n_nodes:
            raise ValueError(f"state has length {x.shape[0]}, expected {2 * n_nodes}")
        xs = x.tolist()
        local = []
        for k in range(n_nodes):
            v = xs[2 * k]
            w = xs[2 * k + 1]
            local.append(c * (v - w - v * v * v / 3.0) + drive)
            local.append(d * (a + b * v - w))
        coupling = gather @ (incidence @ x.reshape(n_nodes, 2))
        return coupling.ravel() + local

    return field_


# --- system description -----------------------------------------------------------

Params = Union[KuramotoStarParams, FhnParams, WienParams, HarmonicParams]

_PARAM_TYPES = {
    "kuramoto_star": KuramotoStarParams,
    "kuramoto_reduced": KuramotoStarParams,
    "fhn_single": FhnParams,
    "fhn_star": FhnParams,
    "fhn_network": FhnParams,
    "wien_bridge": WienParams,
    "harmonic": HarmonicParams,
}


@dataclass(frozen=True)
class SystemSpec:
    """Model name + parameters (+ topology and coupling) -- everything needed
    to integrate one system.

    For ``fhn_star``, per-link gains go in ``incoming``/``outgoing``; when
    omitted both default to ``coupling`` on a star with ``graph`` (or two
    peripherals if no graph is given).
    """

    model: str
    params: Params
    graph: Graph | None = None
    coupling: float = 0.0
    incoming: tuple[float, ...] | None = None
    outgoing: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        if not isinstance(self.params, _PARAM_TYPES[self.model]):
            raise TypeError(
                f"model {self.model!r} needs {_PARAM_TYPES[self.model].__name__}, "
                f"got {type(self.params).__name__}"
            )
        if not (math.isfinite(self.coupling) and self.coupling >= 0.0):
            raise ValueError("coupling must be a finite, nonnegative number")
        if self.model == "fhn_network" and self.graph is None:
            raise ValueError("fhn_network needs a graph")
        if self.model == "fhn_star":
            inc, out = self.incoming, self.outgoing
            if inc is None and out is None:
                g = self.graph or build_star(2)
                if any(0 not in e for e in g.edges) or g.n_edges != g.n_nodes - 1:
                    raise ValueError("fhn_star graph must be a star with hub 0")
                inc = out = (self.coupling,) * (g.n_nodes - 1)
            elif inc is None or out is None:
                raise ValueError("fhn_star needs both incoming and outgoing couplings")
            if len(inc) != len(out) or not inc:
                raise ValueError("incoming and outgoing couplings need equal, nonzero length")
            object.__setattr__(self, "incoming", tuple(float(x) for x in inc))
            object.__setattr__(self, "outgoing", tuple(float(x) for x in out))
            if self.graph is None:
                object.__setattr__(self, "graph", build_star(len(inc)))
            elif self.graph.n_nodes != len(inc) + 1:
                raise ValueError("fhn_star graph size does not match the coupling lists")

    @property
    def n_nodes(self) -> int:
        if self.model == "kuramoto_star":
            return self.params.n_peripheral + 1
        if self.model == "kuramoto_reduced":
            return self.params.n_peripheral
        if self.model in ("fhn_star", "fhn_network"):
            return self.graph.n_nodes
        return 1

    @property
    def node_dim(self) -> int:
        return 1 if self.model.startswith("kuramoto") else 2

    @property
    def state_dim(self) -> int:
        return self.n_nodes * self.node_dim

    @property
    def is_phase_model(self) -> bool:
        return self.model == "kuramoto_star"

    def node_slice(self, node: int) -> slice:
        if not 0 <= node < self.n_nodes:
            raise IndexError(f"node {node} out of range for {self.n_nodes} nodes")
        return slice(node * self.node_dim, (node + 1) * self.node_dim)

    @cached_property
    def rhs(self) -> Callable[[Vector], Vector]:
        """Autonomous vector field ``x -> dx/dt`` with topology precomputed."""
        p = self.params
        if self.model == "kuramoto_star":
            return lambda x: kuramoto_star_rhs(x, p)
        if self.model == "kuramoto_reduced":
            return lambda x: kuramoto_reduced_rhs(x, p)
        if self.model == "fhn_single":
            a, b, c, d, drive = p.a, p.b, p.c, p.d, p.drive

            def single(x: Vector) -> Vector:
                v = float(x[0])
                w = float(x[1])
                return np.array([c * (v - w - v * v * v / 3.0) + drive, d * (a + b * v - w)])

            return single
        if self.model in ("fhn_star", "fhn_network"):
            return _coupled_fhn_field(p, *self._link_operators())
        if self.model == "wien_bridge":
            w0, gain_margin, k_nl = p.omega0, 3.0 - p.g0, p.k_nl

            def wien(x: Vector) -> Vector:
                v = float(x[0])
                u = float(x[1])
                return np.array([u, -w0 * (gain_margin + k_nl * v * v) * u - w0 * w0 * v])

            return wien
        w2 = p.omega**2
        return lambda x: np.array([float(x[1]), -w2 * float(x[0])])

    @cached_property
    def jacobian(self) -> Callable[[Vector], Matrix]:
        p = self.params
        if self.model == "kuramoto_star":
            return lambda x: kuramoto_star_jacobian(x, p)
        if self.model == "kuramoto_reduced":
            return lambda x: kuramoto_reduced_jacobian(x, p)
        if self.model == "fhn_single":
            return lambda x: fhn_jacobian(x, p)
        if self.model == "fhn_star":
            return lambda x: fhn_star_variational_matrix(x, p, self.incoming, self.outgoing)
        if self.model == "fhn_network":
            return lambda x: fhn_network_jacobian(x, p, self.graph, self.coupling)
        if self.model == "wien_bridge":
            return lambda x: wien_bridge_jacobian(x, p)
        return lambda x: harmonic_jacobian(x, p)

    def coupling_links(self) -> list[tuple[int, int, float]]:
        """Directed links ``(source, target, gain)``: node ``target`` receives
        ``gain * (x_source - x_target)``."""
        if self.model == "fhn_network":
            links = []
            for i, j in self.graph.sorted_edges():
                links += [(j, i, self.coupling), (i, j, self.coupling)]
            return links
        if self.model == "fhn_star":
            links = []
            for i, (g_in, g_out) in enumerate(zip(self.incoming, self.outgoing), start=1):
                links += [(i, 0, g_in), (0, i, g_out)]
            return links
        raise ValueError(f"{self.model} is not a coupled FHN model")

    def _link_operators(self) -> tuple[Matrix, Matrix]:
        # difference operator with +-1 entries, then gain-weighted sum per target;
        # both are exact on identical node states, so coupling vanishes there exactly
        links = self.coupling_links()
        n = self.n_nodes
        incidence = np.zeros((len(links), n))
        gather = np.zeros((n, len(links)))
        for k, (src, tgt, gain) in enumerate(links):
            incidence[k, src] += 1.0
            incidence[k, tgt] -= 1.0
            gather[tgt, k] = gain
        return incidence, gather

    def coupling_term(self, x: ArrayLike) -> Vector:
        """Coupling contribution to the vector field at state ``x``."""
        incidence, gather = self._link_operators()
        X = _vec(x, self.state_dim).reshape(self.n_nodes, 2)
        return (gather @ (incidence @ X)).ravel()

    def coupling_matrix(self) -> Matrix:
        """The coupling term as one linear map on the full state."""
        incidence, gather = self._link_operators()
        return np.kron(gather @ incidence, np.eye(2))

    def isolated(self) -> SystemSpec:
        """The single-node system each node of a coupled model runs."""
        if self.model in ("fhn_star", "fhn_network", "fhn_single"):
            return SystemSpec("fhn_single", self.params)
        raise ValueError(f"{self.model} has no planar isolated-node model")
