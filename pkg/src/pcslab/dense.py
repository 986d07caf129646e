"""Small exact density-matrix engine used as ground truth.

Operators are stored as ``2**n x 2**n`` arrays with qubit 0 as the leftmost
Kronecker factor (most significant bit of the row index).

Choi convention: ``J = sum_ij |i><j| (x) E(|i><j|)``, input factor first.  The
identity channel on one qubit therefore has ``J = |Omega><Omega|`` with
``|Omega> = |00> + |11>`` (unnormalised).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .circuit import (
    GATE_MATRICES,
    Circuit,
    Gate,
    Measurement,
    NoiseSite,
    ParityCondition,
    PauliCorrection,
)
from .errors import DimensionError, ResourceError, ValidationError

STATE_CAP = 14
DENSITY_CAP = 8
IMPOSSIBLE = 1e-14

PAULI_1Q = {k: GATE_MATRICES[k] for k in ("I", "X", "Y", "Z")}
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
_BASIS_KETS = {
    ("Z", 0): np.array([1, 0], dtype=complex),
    ("Z", 1): np.array([0, 1], dtype=complex),
    ("X", 0): np.array([1, 1], dtype=complex) / np.sqrt(2),
    ("X", 1): np.array([1, -1], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True)
class DensityMatrix:
    n: int
    data: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        if self.n > DENSITY_CAP:
            raise ResourceError(f"{self.n} qubits exceeds density-matrix cap {DENSITY_CAP}")
        data = np.asarray(self.data, dtype=complex)
        if data.shape != (2**self.n, 2**self.n):
            raise DimensionError(f"expected {2**self.n}x{2**self.n} matrix, got {data.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_ket(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        n = int(round(np.log2(psi.size)))
        return cls(n, np.outer(psi, psi.conj()))

    @classmethod
    def zero(cls, n: int) -> "DensityMatrix":
        data = np.zeros((2**n, 2**n), dtype=complex)
        data[0, 0] = 1
        return cls(n, data)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(n, np.eye(2**n, dtype=complex) / 2**n)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def check(self, tol_herm=1e-12, tol_trace=1e-12, tol_psd=1e-10) -> None:
        """Raise :class:`ValidationError` unless Hermitian, PSD and (if normalised) unit trace."""
        d = self.data
        if np.max(np.abs(d - d.conj().T), initial=0.0) > tol_herm:
            raise ValidationError("density matrix is not Hermitian")
        if self.normalized and abs(np.trace(d) - 1) > tol_trace:
            raise ValidationError(f"trace {np.trace(d).real:.3g} != 1")
        if np.linalg.eigvalsh((d + d.conj().T) / 2).min() < -tol_psd:
            raise ValidationError("density matrix is not positive semidefinite")


class KrausChannel:
    """List of Kraus operators acting on ``n_targets`` qubits.

    Completeness ``sum K^dag K = I`` is enforced unless ``trace_preserving`` is
    False (postselected maps are trace non-increasing).
    """

    def __init__(self, operators, trace_preserving: bool = True, tol: float = 1e-12):
        ops = [np.asarray(k, dtype=complex) for k in operators]
        if not ops:
            raise ValidationError("empty Kraus list")
        d = ops[0].shape[1]
        self.n_targets = int(round(np.log2(d)))
        if any(k.shape[1] != d for k in ops):
            raise DimensionError("Kraus operators disagree on input dimension")
        self.operators = ops
        if trace_preserving:
            defect = sum(k.conj().T @ k for k in ops) - np.eye(d)
            if np.max(np.abs(defect)) > tol:
                raise ValidationError("Kraus operators are not complete")

    def choi(self) -> np.ndarray:
        return choi_from_kraus(self.operators)

    def completeness(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.operators)


def choi_from_kraus(operators) -> np.ndarray:
    vecs = [np.asarray(k, dtype=complex).T.reshape(-1) for k in operators]
    return sum(np.outer(v, v.conj()) for v in vecs)


def kraus_from_choi(choi: np.ndarray, d_in: int, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators from the eigenvectors of a (PSD) Choi matrix."""
    vals, vecs = np.linalg.eigh((choi + choi.conj().T) / 2)
    d_out = choi.shape[0] // d_in
    ops = []
    for lam, v in zip(vals[::-1], vecs.T[::-1]):
        if lam > tol:
            ops.append(np.sqrt(lam) * v.reshape(d_in, d_out).T)
    return ops


def choi_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest absolute entrywise difference between two Choi matrices."""
    return float(np.max(np.abs(a - b)))


# -- embedding ---------------------------------------------------------------


def _left(mat: np.ndarray, op: np.ndarray, targets, n: int) -> np.ndarray:
    """``(op on targets) @ mat`` for a ``2**n``-row matrix."""
    k = len(targets)
    cols = mat.shape[1]
    t = mat.reshape((2,) * n + (cols,))
    o = op.reshape((2,) * (2 * k))
    t = np.tensordot(o, t, axes=(list(range(k, 2 * k)), list(targets)))
    t = np.moveaxis(t, list(range(k)), list(targets))
    return t.reshape(2**n, cols)


def _conj_apply(mat: np.ndarray, op: np.ndarray, targets, n: int) -> np.ndarray:
    """``O mat O^dag`` with ``O`` acting on ``targets``."""
    m = _left(mat, op, targets, n)
    return _left(m.conj().T, op, targets, n).conj().T


def _check_targets(targets, n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets) or any(not 0 <= t < n for t in targets):
        raise DimensionError(f"invalid targets {targets} for {n} qubits")
    return targets


def apply_unitary(rho: DensityMatrix, u, targets, tol: float = 1e-12) -> DensityMatrix:
    targets = _check_targets(targets, rho.n)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2 ** len(targets),) * 2:
        raise DimensionError("unitary size does not match targets")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise ValidationError("operator is not unitary")
    return DensityMatrix(rho.n, _conj_apply(rho.data, u, targets, rho.n), rho.normalized)


def apply_channel(rho: DensityMatrix, ch: KrausChannel, targets) -> DensityMatrix:
    targets = _check_targets(targets, rho.n)
    if ch.n_targets != len(targets):
        raise DimensionError("channel arity does not match targets")
    out = sum(_conj_apply(rho.data, k, targets, rho.n) for k in ch.operators)
    return DensityMatrix(rho.n, out, rho.normalized)


def postselect(rho: DensityMatrix, projector, targets=None):
    """Project with ``projector`` (on ``targets``, default all qubits).

    Returns ``(prob, state)``; ``state`` is normalised, or None when
    ``prob < 1e-14`` (an impossible branch).
    """
    proj = np.asarray(projector, dtype=complex)
    if np.max(np.abs(proj @ proj - proj)) > 1e-10 or np.max(np.abs(proj - proj.conj().T)) > 1e-10:
        raise ValidationError("projector must be idempotent and Hermitian")
    targets = tuple(range(rho.n)) if targets is None else _check_targets(targets, rho.n)
    out = _conj_apply(rho.data, proj, targets, rho.n)
    prob = float(np.trace(out).real)
    if prob < IMPOSSIBLE:
        return prob, None
    return prob, DensityMatrix(rho.n, out / prob)


def _partial_trace_array(mat: np.ndarray, keep, n: int) -> np.ndarray:
    keep = list(keep)
    drop = [q for q in range(n) if q not in keep]
    t = mat.reshape((2,) * (2 * n))
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    row = letters[:n]
    col = letters[n:]
    for q in drop:
        col[q] = row[q]
    out = [row[q] for q in keep] + [col[q] for q in keep]
    t = np.einsum("".join(row + col) + "->" + "".join(out), t)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    keep = _check_targets(keep, rho.n)
    if not keep:
        raise ValidationError("keep-set must be nonempty")
    return DensityMatrix(len(keep), _partial_trace_array(rho.data, keep, rho.n), rho.normalized)


def _psd_sqrt(mat: np.ndarray, clamp: float = -1e-10) -> np.ndarray:
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    if vals.min() < clamp:
        raise ValidationError(f"matrix not PSD (smallest eigenvalue {vals.min():.3g})")
    vals = np.clip(vals, 0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(rho1, rho2) -> float:
    """Uhlmann fidelity ``tr(sqrt(sqrt(r1) r2 sqrt(r1)))**2``."""
    a = rho1.data if isinstance(rho1, DensityMatrix) else np.asarray(rho1, dtype=complex)
    b = rho2.data if isinstance(rho2, DensityMatrix) else np.asarray(rho2, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError("fidelity of states with different dimensions")
    s = _psd_sqrt(a)
    vals = np.linalg.eigvalsh(_hermitian(s @ b @ s))
    if vals.min() < -1e-10:
        raise ValidationError("non-PSD input to fidelity")
    f = float(np.sum(np.sqrt(np.clip(vals, 0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def _hermitian(m):
    return (m + m.conj().T) / 2


def _two_qubit(rho: DensityMatrix, qubits) -> np.ndarray:
    qubits = tuple(qubits)
    if rho.n == 2 and qubits == (0, 1):
        return rho.data
    return _partial_trace_array(rho.data, qubits, rho.n)


def bell_fidelity(rho: DensityMatrix, qubits=(0, 1)) -> float:
    """``<Phi+| rho_q |Phi+>`` for the designated pair (others traced out)."""
    r = _two_qubit(rho, qubits)
    return float((PHI_PLUS.conj() @ r @ PHI_PLUS).real)


def bell_fidelity_from_paulis(rho: DensityMatrix, qubits=(0, 1)) -> float:
    """Same quantity via ``(<II> + <XX> - <YY> + <ZZ>) / 4``."""
    r = _two_qubit(rho, qubits)
    ev = {k: float(np.trace(r @ np.kron(PAULI_1Q[k], PAULI_1Q[k])).real) for k in "IXYZ"}
    return (ev["I"] + ev["X"] - ev["Y"] + ev["Z"]) / 4


def werner_state(F: float) -> DensityMatrix:
    """Two-qubit Werner state with Bell fidelity ``F``."""
    phi = np.outer(PHI_PLUS, PHI_PLUS.conj())
    return DensityMatrix(2, F * phi + (1 - F) / 3 * (np.eye(4) - phi))


# -- circuits ----------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    pass_prob: float
    bell_fidelity: float | None
    state: DensityMatrix | None


def _run_branches(circuit: Circuit, mat: np.ndarray):
    """Propagate an operator through ``circuit`` keeping one branch per
    measurement record; returns the passing branches' operators summed."""
    n = circuit.n_qubits
    branches = [({}, mat)]
    for op in circuit.ops:
        if isinstance(op, Gate):
            u = GATE_MATRICES[op.name]
            branches = [(b, _conj_apply(m, u, op.qubits, n)) for b, m in branches]
        elif isinstance(op, NoiseSite):
            kraus = [np.sqrt(w) * PAULI_1Q[k] for w, k in zip(op.probs, "IXYZ") if w > 0]
            branches = [
                (b, sum(_conj_apply(m, k, (op.qubit,), n) for k in kraus)) for b, m in branches
            ]
        elif isinstance(op, Measurement):
            new = []
            for b, m in branches:
                for bit in (0, 1):
                    ket = _BASIS_KETS[(op.basis, bit)]
                    proj = np.outer(ket, ket.conj())
                    pm = _conj_apply(m, proj, (op.qubit,), n)
                    if np.max(np.abs(pm)) > IMPOSSIBLE:
                        new.append(({**b, op.label: bit}, pm))
            branches = new
        elif isinstance(op, ParityCondition):
            branches = [
                (b, m) for b, m in branches if sum(b[lab] for lab in op.labels) % 2 == op.parity
            ]
        elif isinstance(op, PauliCorrection):
            p = PAULI_1Q[op.pauli]
            branches = [
                (b, _conj_apply(m, p, (op.qubit,), n) if sum(b[x] for x in op.labels) % 2 else m)
                for b, m in branches
            ]
    if not branches:
        return np.zeros_like(mat)
    return sum(m for _, m in branches)


def simulate_circuit(circuit: Circuit, initial: DensityMatrix | None = None) -> OracleResult:
    """Exact pass probability and postselected Bell fidelity of ``circuit``."""
    n = circuit.n_qubits
    if n > DENSITY_CAP:
        raise ResourceError(f"{n} qubits exceeds density-matrix cap {DENSITY_CAP}")
    rho = DensityMatrix.zero(n) if initial is None else initial
    out = _run_branches(circuit, rho.data)
    prob = float(np.trace(out).real)
    if prob < IMPOSSIBLE or circuit.data_qubits is None:
        return OracleResult(prob, None, None)
    keep = circuit.data_qubits
    reduced = DensityMatrix(len(keep), _partial_trace_array(out, keep, n) / prob)
    return OracleResult(prob, bell_fidelity(reduced, range(len(keep))) if len(keep) == 2 else None, reduced)


def extract_channel(circuit: Circuit, data_qubits) -> tuple[np.ndarray, KrausChannel]:
    """Postselected map from the ``data_qubits`` input to their output.

    Every other qubit starts in ``|0>``.  Returns the Choi matrix and a Kraus
    decomposition from its eigenvectors (trace non-increasing).
    """
    data_qubits = _check_targets(data_qubits, circuit.n_qubits)
    k = len(data_qubits)
    if k > 3:
        raise ResourceError("channel extraction supports at most 3 data qubits")
    n = circuit.n_qubits
    if n > DENSITY_CAP:
        raise ResourceError(f"{n} qubits exceeds density-matrix cap {DENSITY_CAP}")
    d = 2**k
    others = [q for q in range(n) if q not in data_qubits]
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i, j in itertools.product(range(d), repeat=2):
        ibits = [(i >> (k - 1 - t)) & 1 for t in range(k)]
        jbits = [(j >> (k - 1 - t)) & 1 for t in range(k)]
        row = _index(n, dict(zip(data_qubits, ibits)), others)
        col = _index(n, dict(zip(data_qubits, jbits)), others)
        mat = np.zeros((2**n, 2**n), dtype=complex)
        mat[row, col] = 1
        out = _partial_trace_array(_run_branches(circuit, mat), data_qubits, n)
        eij = np.zeros((d, d), dtype=complex)
        eij[i, j] = 1
        choi += np.kron(eij, out)
    return choi, KrausChannel(kraus_from_choi(choi, d), trace_preserving=False)


def _index(n: int, assigned: dict, zeros) -> int:
    idx = 0
    for q in range(n):
        idx = (idx << 1) | assigned.get(q, 0)
    return idx


def dump_matrix(mat: np.ndarray) -> str:
    """Plain-text dump, one row per line of ``re,im`` pairs."""
    return "\n".join(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row) for row in np.asarray(mat))
