"""Network topologies, Laplacians, spectra and Gershgorin discs."""
from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from netsync.linalg import jacobi_eigh

Axis = Literal["row", "column"]

ASYMMETRY_TOL = 1e-10


class GraphError(ValueError):
    """Invalid topology description."""


@dataclass(frozen=True)
class Graph:
    """Undirected, unweighted simple graph on nodes ``0 .. n_nodes-1``.

    Edges are stored as sorted ``(i, j)`` pairs with ``i < j``.
    """

    n_nodes: int
    edges: frozenset[tuple[int, int]]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_nodes < 1:
            raise GraphError(f"n_nodes must be positive, got {self.n_nodes}")
        for i, j in self.edges:
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (0 <= i < j < self.n_nodes):
                raise GraphError(f"edge ({i}, {j}) out of range for {self.n_nodes} nodes")
        if self.labels is not None and len(self.labels) != self.n_nodes:
            raise GraphError("labels must have one entry per node")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbors(self, i: int) -> list[int]:
        return sorted(b if a == i else a for a, b in self.edges if i in (a, b))

    def degree(self, i: int) -> int:
        return sum(1 for a, b in self.edges if i in (a, b))

    def degrees(self) -> list[int]:
        deg = [0] * self.n_nodes
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def to_json(self) -> dict:
        out: dict = {"n": self.n_nodes, "edges": [list(e) for e in self.sorted_edges()]}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> Graph:
        if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
            raise GraphError('graph JSON must be an object with "n" and "edges"')
        unknown = set(obj) - {"n", "edges", "labels"}
        if unknown:
            raise GraphError(f"unknown graph keys: {sorted(unknown)}")
        n = obj["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise GraphError('"n" must be an integer')
        edges = obj["edges"]
        if not isinstance(edges, list) or not all(
            isinstance(e, (list, tuple))
            and len(e) == 2
            and all(isinstance(k, int) and not isinstance(k, bool) for k in e)
            for e in edges
        ):
            raise GraphError('"edges" must be a list of integer pairs')
        labels = obj.get("labels")
        return build_from_edges(n, [tuple(e) for e in edges], labels=labels)


def build_from_edges(
    n: int, edges: Iterable[Sequence[int]], labels: Sequence[str] | None = None
) -> Graph:
    """Graph with exactly the given undirected edges (duplicates collapse)."""
    if n < 1:
        raise GraphError(f"n must be positive, got {n}")
    normalized = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise GraphError(f"self-loop at node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) out of range for {n} nodes")
        normalized.add((min(i, j), max(i, j)))
    return Graph(n, frozenset(normalized), tuple(labels) if labels is not None else None)


def build_star(n_peripheral: int) -> Graph:
    """Star with hub node 0 joined to peripherals ``1 .. n_peripheral``."""
    if n_peripheral < 1:
        raise GraphError(f"a star needs at least one peripheral node, got {n_peripheral}")
    return build_from_edges(n_peripheral + 1, [(0, k) for k in range(1, n_peripheral + 1)])


def build_scale_free(n: int, m: int, seed: int) -> Graph:
    """Preferential-attachment graph (Barabasi-Albert growth).

    Growth starts from a complete graph on ``m + 1`` nodes; every later node
    attaches to ``m`` distinct existing nodes drawn with probability
    proportional to their current degree.
    """
    if m < 1:
        raise GraphError(f"m must be at least 1, got {m}")
    if n <= m:
        raise GraphError(f"need n > m, got n={n}, m={m}")
    rng = random.Random(seed)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # each node appears once per incident edge end
    ends = [k for e in edges for k in e]
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(rng.choice(ends))
        for t in sorted(targets):
            edges.append((t, new))
            ends.extend((t, new))
    return build_from_edges(n, edges)


def five_node_graph() -> Graph:
    """The five-node example network (nodes X1..X5 mapped to 0..4)."""
    return build_from_edges(
        5,
        [(0, 1), (0, 3), (1, 2), (1, 4), (3, 4)],
        labels=("X1", "X2", "X3", "X4", "X5"),
    )


def connected_components(g: Graph) -> list[list[int]]:
    seen = [False] * g.n_nodes
    adj: list[list[int]] = [[] for _ in range(g.n_nodes)]
    for a, b in g.edges:
        adj[a].append(b)
        adj[b].append(a)
    comps = []
    for start in range(g.n_nodes):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


@dataclass(frozen=True)
class LaplacianMatrix:
    """Graph Laplacian ``D - A`` of an unweighted graph."""

    matrix: NDArray[np.float64]

    @property
    def row_sums(self) -> NDArray[np.float64]:
        return self.matrix.sum(axis=1)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def laplacian(g: Graph) -> LaplacianMatrix:
    L = np.zeros((g.n_nodes, g.n_nodes))
    for i, j in g.edges:
        L[i, j] = L[j, i] = -1.0
        L[i, i] += 1.0
        L[j, j] += 1.0
    L.setflags(write=False)
    return LaplacianMatrix(L)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues with paired orthonormal eigenvectors (columns)."""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    def residuals(self, m: LaplacianMatrix | ArrayLike) -> NDArray[np.float64]:
        """``||M v_k - lambda_k v_k||`` for each pair."""
        M = np.asarray(m.matrix if isinstance(m, LaplacianMatrix) else m, dtype=float)
        V = self.eigenvectors
        return np.linalg.norm(M @ V - V * self.eigenvalues, axis=0)

    def to_json(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "eigenvectors": [[float(x) for x in row] for row in self.eigenvectors],
        }


def eigendecompose(m: LaplacianMatrix | ArrayLike, tie_tol: float = 1e-9) -> SpectralDecomposition:
    """Symmetric eigen-decomposition with a deterministic ordering.

    Each eigenvector is sign-normalized so its first nonzero component is
    positive. Eigenvalues are sorted ascending; values within ``tie_tol``
    (relative to the spectral scale) are ordered by that first nonzero
    component, ascending.
    """
    M = np.asarray(m.matrix if isinstance(m, LaplacianMatrix) else m, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > ASYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3g})")
    w, V = jacobi_eigh(M)
    n = len(w)
    lead = np.zeros(n)
    for k in range(n):
        nz = np.flatnonzero(np.abs(V[:, k]) > 1e-12)
        if nz.size:
            if V[nz[0], k] < 0:
                V[:, k] = -V[:, k]
            lead[k] = V[nz[0], k]
    scale = max(1.0, float(np.max(np.abs(w)))) if n else 1.0
    order = sorted(range(n), key=lambda k: w[k])
    # stable pass: within a tie cluster, order by leading component
    out: list[int] = []
    i = 0
    while i < n:
        j = i + 1
        while j < n and w[order[j]] - w[order[i]] <= tie_tol * scale:
            j += 1
        out.extend(sorted(order[i:j], key=lambda k: lead[k]))
        i = j
    w = w[out]
    V = V[:, out]
    w.setflags(write=False)
    V.setflags(write=False)
    return SpectralDecomposition(w, V)


@dataclass(frozen=True)
class GershgorinDisc:
    center: complex
    radius: float
    axis: Axis = "row"

    def contains(self, z: complex, tol: float = 1e-9) -> bool:
        return abs(z - self.center) <= self.radius + tol * max(1.0, abs(self.center) + self.radius)

    def to_json(self) -> dict:
        c = complex(self.center)
        return {"center": [c.real, c.imag], "radius": float(self.radius), "axis": self.axis}


def gershgorin_discs(m: ArrayLike, axis: Axis = "row") -> list[GershgorinDisc]:
    """One disc per row (or column): centre ``m[i, i]``, radius the off-diagonal abs sum."""
    M = np.asarray(m)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"Gershgorin discs need a square matrix, got shape {M.shape}")
    if axis not in ("row", "column"):
        raise ValueError(f"axis must be 'row' or 'column', got {axis!r}")
    absM = np.abs(M)
    sums = absM.sum(axis=1 if axis == "row" else 0) - np.abs(np.diag(M))
    return [
        GershgorinDisc(complex(M[i, i]), float(sums[i]), axis) for i in range(M.shape[0])
    ]


def discs_bound_left_half_plane(discs: Iterable[GershgorinDisc]) -> bool:
    """True iff every disc lies in the closed left half-plane."""
    return all(complex(d.center).real + d.radius <= 0.0 for d in discs)


def in_disc_union(z: complex, discs: Sequence[GershgorinDisc], tol: float = 1e-9) -> bool:
    return any(d.contains(z, tol) for d in discs)


# --- serialization -------------------------------------------------------

def load_graph(path: str | Path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"{path}: invalid JSON ({exc})") from exc
    return Graph.from_json(obj)


def save_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_json(), indent=2) + "\n", encoding="utf-8")


def matrix_to_csv(m: ArrayLike, header: bool = True) -> str:
    """Matrix as CSV; the optional header row names columns ``c0, c1, ...``."""
    M = np.atleast_2d(np.asarray(m, dtype=float))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow([f"c{k}" for k in range(M.shape[1])])
    for row in M:
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def matrix_from_csv(text: str) -> NDArray[np.float64]:
    """Parse a numeric CSV; rows must have equal length.

    A first row with no numeric cell is taken as a header and skipped.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not any(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValueError("empty matrix CSV")
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise ValueError(f"non-numeric matrix entry: {exc}") from exc
    if len({len(r) for r in data}) != 1:
        raise ValueError("ragged matrix CSV")
    return np.array(data)

