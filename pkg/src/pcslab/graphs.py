"""Graph states with tracked local frames and local Pauli measurement rules.

A :class:`GraphState` stands for ``(prod_v F_v) |G>``, where ``|G>`` is the
graph state of ``graph`` and ``F_v`` is the single-qubit unitary ``frames[v]``.
Measurements are taken relative to the frame: ``measure_x(g, a, ...)`` projects
qubit ``a`` onto ``F_a|+>`` or ``F_a|->``, so the graph rules below apply
unchanged and their corrections are appended to the remaining frames.

Outcome bits: 0 for the ``+1`` eigenvector (``|+>``, ``|+i>``, ``|0>``), 1 for
the ``-1`` eigenvector.  Global phases are ignored throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import DimensionError, ResourceError, ValidationError

STATE_CAP = 14

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
SDG = S.conj().T


def _sqrt_pauli(p: np.ndarray, sign: int) -> np.ndarray:
    """``sqrt(sign * i * P) = exp(sign * i pi/4 P)`` up to global phase."""
    return (I2 + sign * 1j * p) / np.sqrt(2)


SQRT_MINUS_IX = _sqrt_pauli(X, -1)
SQRT_IZ = _sqrt_pauli(Z, +1)
SQRT_IY = _sqrt_pauli(Y, +1)  # equals H X up to phase
SQRT_MINUS_IY = _sqrt_pauli(Y, -1)

BASIS_STATES = {
    "X": (np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)),
    "Y": (np.array([1, 1j]) / np.sqrt(2), np.array([1, -1j]) / np.sqrt(2)),
    "Z": (np.array([1, 0]), np.array([0, 1])),
}


@dataclass
class GraphState:
    graph: nx.Graph
    frames: dict = field(default_factory=dict)

    def __post_init__(self):
        if nx.number_of_selfloops(self.graph):
            raise ValidationError("graph states have no self-loops")
        for v in self.graph.nodes:
            self.frames.setdefault(v, I2.copy())
        for v, f in self.frames.items():
            if v not in self.graph:
                raise ValidationError(f"frame for unknown vertex {v}")
            f = np.asarray(f, dtype=complex)
            if f.shape != (2, 2) or not np.allclose(f.conj().T @ f, I2, atol=1e-10):
                raise ValidationError(f"frame on {v} is not a single-qubit unitary")

    @classmethod
    def from_edges(cls, edges, nodes=()) -> "GraphState":
        g = nx.Graph()
        g.add_nodes_from(nodes)
        g.add_edges_from(edges)
        return cls(g)

    def copy(self) -> "GraphState":
        return GraphState(self.graph.copy(), {v: f.copy() for v, f in self.frames.items()})

    @property
    def vertices(self) -> list:
        return sorted(self.graph.nodes, key=_sort_key)

    def neighbors(self, a) -> set:
        return set(self.graph[a])

    def apply_local(self, v, u: np.ndarray) -> None:
        """Record that ``u`` was applied physically on ``v`` after the frame."""
        self.frames[v] = np.asarray(u, dtype=complex) @ self.frames[v]

    def frame_is_identity(self, v, tol: float = 1e-10) -> bool:
        f = self.frames[v]
        return abs(abs(f[0, 0]) - 1) < tol and abs(f[0, 1]) < tol and abs(f[1, 0]) < tol and abs(f[0, 0] - f[1, 1]) < tol


def _sort_key(v):
    return (0, v, "") if isinstance(v, (int, np.integer)) else (1, 0, str(v))


def _require(g: GraphState, a) -> None:
    if a not in g.graph:
        raise ValidationError(f"vertex {a!r} not in graph")


def _toggle(graph: nx.Graph, vs) -> None:
    vs = sorted(vs, key=_sort_key)
    for i, u in enumerate(vs):
        for w in vs[i + 1 :]:
            if graph.has_edge(u, w):
                graph.remove_edge(u, w)
            else:
                graph.add_edge(u, w)


def tau(graph: nx.Graph, a) -> nx.Graph:
    """Local complementation of the bare graph at ``a``."""
    out = graph.copy()
    _toggle(out, graph[a])
    return out


def _push(g: GraphState, v, u: np.ndarray) -> None:
    """Right-multiply the frame: the graph part now carries ``u`` on ``v``."""
    g.frames[v] = g.frames[v] @ u


def local_complement(g: GraphState, a) -> GraphState:
    """``tau_a`` with frame tracking so :func:`to_state` is unchanged.

    Uses ``|tau_a(G)> = sqrt(-iX_a) prod_{b in N_a} sqrt(iZ_b) |G>``.
    """
    _require(g, a)
    out = g.copy()
    out.graph = tau(g.graph, a)
    _push(out, a, SQRT_MINUS_IX.conj().T)
    for b in g.graph[a]:
        _push(out, b, SQRT_IZ.conj().T)
    return out


def _remove(out: GraphState, a) -> None:
    out.graph.remove_node(a)
    del out.frames[a]


def _check_outcome(outcome: int) -> None:
    if outcome not in (0, 1):
        raise ValidationError("outcome must be 0 or 1")


def measure_z(g: GraphState, a, outcome: int = 0) -> GraphState:
    """``|G - a>`` with ``Z`` on every neighbour for outcome 1."""
    _require(g, a)
    _check_outcome(outcome)
    out = g.copy()
    nbrs = list(g.graph[a])
    _remove(out, a)
    if outcome:
        for b in nbrs:
            _push(out, b, Z)
    return out


def measure_y(g: GraphState, a, outcome: int = 0) -> GraphState:
    """``|tau_a(G) - a>`` with ``S`` (outcome 0) or ``S^dag`` (outcome 1) on ``N_a``."""
    _require(g, a)
    _check_outcome(outcome)
    out = g.copy()
    nbrs = list(g.graph[a])
    out.graph = tau(g.graph, a)
    _remove(out, a)
    for b in nbrs:
        _push(out, b, S if outcome == 0 else SDG)
    return out


def measure_x(g: GraphState, a, b0=None, outcome: int = 0) -> GraphState:
    """X-basis rule with designated neighbour ``b0``.

    Outcome 0: ``O_{b0} Z_{N_a \\ (N_b0 + b0)} |tau_b0(tau_a(tau_b0(G)) - a)>``;
    outcome 1 uses ``O^dag`` on ``b0`` and ``Z`` on ``N_b0 \\ (N_a + a)``, with
    ``O = sqrt(iY)``.  An isolated ``a`` is simply removed (outcome 1 is then
    impossible).
    """
    _require(g, a)
    _check_outcome(outcome)
    na = set(g.graph[a])
    out = g.copy()
    if not na:
        if outcome:
            raise ValidationError(f"isolated vertex {a!r} cannot give X outcome 1")
        _remove(out, a)
        return out
    if b0 is None:
        b0 = min(na, key=_sort_key)
    if b0 not in na:
        raise ValidationError(f"b0={b0!r} is not a neighbour of {a!r}")
    nb = set(g.graph[b0])
    graph = tau(tau(tau(g.graph, b0), a), b0)
    graph.remove_node(a)
    out.graph = graph
    del out.frames[a]
    if outcome == 0:
        _push(out, b0, SQRT_IY)
        zs = na - nb - {b0}
    else:
        _push(out, b0, SQRT_MINUS_IY)
        zs = nb - na - {a}
    for b in zs:
        _push(out, b, Z)
    return out


MEASUREMENTS = {"X": measure_x, "Y": measure_y, "Z": measure_z}


def measure(g: GraphState, basis: str, a, outcome: int = 0, b0=None) -> GraphState:
    if basis == "X":
        return measure_x(g, a, b0, outcome)
    if basis in MEASUREMENTS:
        return MEASUREMENTS[basis](g, a, outcome)
    raise ValidationError(f"unknown basis {basis}")


# -- dense oracle ------------------------------------------------------------


def graph_ket(graph: nx.Graph, order) -> np.ndarray:
    n = len(order)
    if n > STATE_CAP:
        raise ResourceError(f"{n} qubits exceed the state-vector cap {STATE_CAP}")
    pos = {v: i for i, v in enumerate(order)}
    idx = np.arange(2**n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    parity = np.zeros(2**n, dtype=np.int64)
    for u, v in graph.edges:
        parity ^= bits[:, pos[u]] & bits[:, pos[v]]
    return (1 - 2 * parity).astype(complex) / np.sqrt(2**n)


def apply_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def to_state(g: GraphState, order=None) -> np.ndarray:
    """State vector of ``(prod F_v)|G>`` with qubits in ``order`` (default sorted)."""
    order = list(order) if order is not None else g.vertices
    if set(order) != set(g.graph.nodes) or len(order) != g.graph.number_of_nodes():
        raise DimensionError("order must list every vertex exactly once")
    psi = graph_ket(g.graph, order)
    for i, v in enumerate(order):
        psi = apply_1q(psi, g.frames[v], i, len(order))
    return psi


def overlap_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2`` for unit vectors; global phase irrelevant."""
    return float(abs(np.vdot(a, b)) ** 2)


def project_vertex(g: GraphState, a, basis: str, outcome: int) -> tuple[float, np.ndarray | None]:
    """Dense projection of ``a`` onto ``F_a|basis, outcome>``.

    Returns the outcome probability and the normalised state of the other
    vertices (sorted order), or ``None`` when the probability vanishes.
    """
    order = g.vertices
    n = len(order)
    q = order.index(a)
    psi = to_state(g, order).reshape((2,) * n)
    bra = (g.frames[a] @ BASIS_STATES[basis][outcome]).conj()
    rest = np.tensordot(bra, psi, axes=([0], [q])).reshape(-1)
    prob = float(np.vdot(rest, rest).real)
    if prob < 1e-14:
        return prob, None
    return prob, rest / np.sqrt(prob)


def rule_fidelity(g: GraphState, a, basis: str, outcome: int, b0=None) -> float:
    """Fidelity between the rule's output and the dense projection."""
    _, ref = project_vertex(g, a, basis, outcome)
    if ref is None:
        raise ValidationError("outcome has zero probability")
    res = measure(g, basis, a, outcome, b0)
    return overlap_fidelity(ref, to_state(res))


# -- lossy PCS X checks ------------------------------------------------------


@dataclass(frozen=True)
class LossyCheck:
    """Ancillas of a lossy X check on ``data``.

    Each ancilla ``A`` certifies the check independently: the joint observable
    ``X_A X_data`` (physical frame) equals ``+1`` when no error occurred, which
    is what the right check followed by an X measurement of ``A`` reads out.
    """

    data: object
    ancillas: tuple

    def check_paulis(self) -> dict:
        return {a: {a: "X", self.data: "X"} for a in self.ancillas}


def attach_lossy_pcs_x(g: GraphState, data, names=None) -> tuple[GraphState, LossyCheck]:
    """Attach two redundant X-check ancillas to ``data``.

    The left-check circuit ``H_data``, ``CNOT(A1 -> data)``, ``CNOT(A2 -> data)``
    with ``A1, A2`` in ``|+>`` equals ``H_data`` applied after ``CZ(A1, data)``
    and ``CZ(A2, data)``: a graph state with two new leaves on ``data`` and a
    Hadamard frame on ``data``.  ``data`` must carry the identity frame.
    """
    _require(g, data)
    if not g.frame_is_identity(data):
        raise ValidationError("data vertex must have the identity frame")
    a1, a2 = names if names is not None else (f"{data}_A1", f"{data}_A2")
    for v in (a1, a2):
        if v in g.graph:
            raise ValidationError(f"vertex {v!r} already exists")
    out = g.copy()
    out.graph.add_edges_from([(data, a1), (data, a2)])
    out.frames[a1] = I2.copy()
    out.frames[a2] = I2.copy()
    out.frames[data] = H.copy()
    return out, LossyCheck(data, (a1, a2))


def pauli_expectation(g: GraphState, paulis: dict) -> float:
    order = g.vertices
    psi = to_state(g, order)
    phi = psi
    mats = {"X": X, "Y": Y, "Z": Z}
    for v, k in paulis.items():
        phi = apply_1q(phi, mats[k], order.index(v), len(order))
    return float(np.vdot(psi, phi).real)


@dataclass(frozen=True)
class DisconnectResult:
    state: GraphState
    measured: object
    basis: str


def lossy_disconnect(g: GraphState, region, surviving, outcome: int = 0) -> DisconnectResult:
    """Cut the region ``(N3, A1, A2)`` from the rest with a single measurement.

    If ``N3`` survives it is measured in Z (relative to its frame, i.e. the
    rotated basis set by the check structure); otherwise a surviving ancilla is
    measured in X with ``b0 = N3``, an indirect Z measurement of the lost
    ``N3``.  Lost qubits are kept as vertices.
    """
    n3, a1, a2 = region
    surviving = set(surviving)
    if not surviving:
        raise ValidationError("disconnect impossible: every qubit of the region is lost")
    if not surviving <= {n3, a1, a2}:
        raise ValidationError("surviving qubits must belong to the region")
    if n3 in surviving:
        return DisconnectResult(measure_z(g, n3, outcome), n3, "Z")
    anc = a1 if a1 in surviving else a2
    return DisconnectResult(measure_x(g, anc, n3, outcome), anc, "X")


def is_disconnected(g: GraphState, region, rest) -> bool:
    region = set(region) & set(g.graph.nodes)
    return not any(g.graph.has_edge(u, v) for u in region for v in rest if v in g.graph)


def tree_example() -> GraphState:
    """Data ``N3`` between ``N1`` and ``N2`` with its two check ancillas attached."""
    g = GraphState.from_edges([("N1", "N3"), ("N3", "N2")])
    g, _ = attach_lossy_pcs_x(g, "N3", names=("A1", "A2"))
    return g


# -- edge lists --------------------------------------------------------------


def _parse_vertex(tok: str):
    return int(tok) if tok.lstrip("-").isdigit() else tok


def read_edgelist(text: str) -> GraphState:
    """One edge ``u v`` or one isolated vertex per line; ``#`` starts a comment."""
    g = nx.Graph()
    for raw in text.splitlines():
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if len(toks) > 2:
            raise ValidationError(f"bad edge-list line: {raw!r}")
        vs = [_parse_vertex(t) for t in toks]
        if len(vs) == 1:
            g.add_node(vs[0])
        else:
            if vs[0] == vs[1]:
                raise ValidationError(f"self-loop in line {raw!r}")
            g.add_edge(*vs)
    return GraphState(g)


def write_edgelist(g: GraphState) -> str:
    lines = []
    for v in g.vertices:
        if g.graph.degree(v) == 0:
            lines.append(str(v))
    for u, v in sorted((tuple(sorted(e, key=_sort_key)) for e in g.graph.edges), key=lambda e: (_sort_key(e[0]), _sort_key(e[1]))):
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def random_graph(n: int, p: float, rng) -> GraphState:
    g = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
    return GraphState(g)
