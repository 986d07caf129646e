"""Stabilizer codes defined by PCS left-check encoders.

The left checks of a PCS X&Z block map ``rho (x) |+...+>`` to a code state.
Each ancilla starts in ``|0>`` (stabilizer ``Z_a``); pushing ``Z_a`` through the
encoder, preparation Hadamards included, gives the code generators, and the
pushed ``X_rho``/``Z_rho`` are the logical operators.

Qubit order everywhere is ``rho, a1, a2, ...`` (encoder order, see
:mod:`pcslab.protocols`).  Signs are dropped: only the symplectic part matters
for distance, weights, CSS structure and syndromes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, Measurement, NoiseSite
from .errors import ResourceError, UnsupportedCircuitError, ValidationError
from .pauli import PauliString, commutes, weight
from .protocols import build_encoder, measure_checks, right_checks
from .stabilizer import _frame_gate, conjugate_circuit

ENUM_BUDGET = 5 * 10**6
GROUP_BUDGET = 20

# -- GF(2) -------------------------------------------------------------------


def gf2_rref(mat) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and pivot columns."""
    m = np.array(mat, dtype=np.uint8) % 2
    pivots = []
    row = 0
    for col in range(m.shape[1]):
        hits = np.nonzero(m[row:, col])[0]
        if hits.size == 0:
            continue
        piv = row + hits[0]
        m[[row, piv]] = m[[piv, row]]
        others = np.nonzero(m[:, col])[0]
        others = others[others != row]
        m[others] ^= m[row]
        pivots.append(col)
        row += 1
        if row == m.shape[0]:
            break
    return m, pivots


def gf2_rank(mat) -> int:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    return len(gf2_rref(mat)[1])


def gf2_in_span(rows, v) -> bool:
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.size == 0:
        return not np.any(v)
    return gf2_rank(np.vstack([rows, v])) == gf2_rank(rows)


def gf2_nullspace(mat) -> np.ndarray:
    """Basis (rows) of ``{v : mat @ v = 0 mod 2}``."""
    mat = np.asarray(mat, dtype=np.uint8)
    n = mat.shape[1]
    r, pivots = gf2_rref(mat)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        for i, p in enumerate(pivots):
            v[p] = r[i, f]
        basis.append(v)
    return np.array(basis, dtype=np.uint8).reshape(len(basis), n)


def symplectic_matrix(paulis) -> np.ndarray:
    """Rows ``[x | z]`` of the given Pauli strings."""
    return np.array([np.concatenate([p.xs, p.zs]) for p in paulis], dtype=np.uint8)


def _from_row(row: np.ndarray) -> PauliString:
    n = row.size // 2
    return PauliString(row[:n], row[n:], 0)


# -- codes -------------------------------------------------------------------


@dataclass(frozen=True)
class CodeSpec:
    n: int
    k: int
    generators: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    names: tuple[str, ...] = ()

    def __post_init__(self):
        gens = self.generators
        for a, b in itertools.combinations(gens, 2):
            if not commutes(a, b):
                raise ValidationError(f"generators {a} and {b} anticommute")
        if gf2_rank(symplectic_matrix(gens)) != len(gens):
            raise ValidationError("generators are not independent")
        if self.n - len(gens) != self.k:
            raise ValidationError("n - rank must equal k")
        for g in gens:
            if not (commutes(g, self.logical_x) and commutes(g, self.logical_z)):
                raise ValidationError(f"logical operators must commute with {g}")
        if commutes(self.logical_x, self.logical_z):
            raise ValidationError("logical X and Z must anticommute")

    def stabilizer_rows(self) -> np.ndarray:
        return symplectic_matrix(self.generators)

    def in_group(self, p: PauliString) -> bool:
        """Membership in the stabilizer group, up to sign."""
        return gf2_in_span(self.stabilizer_rows(), np.concatenate([p.xs, p.zs]))

    def syndrome(self, p: PauliString) -> tuple[int, ...]:
        """Anticommutation pattern with the generators (1 = anticommutes)."""
        return tuple(int(not commutes(p, g)) for g in self.generators)

    def is_logical(self, p: PauliString) -> bool:
        """Nontrivial logical: commutes with every generator, outside the group."""
        return not any(self.syndrome(p)) and not self.in_group(p)


def extract_code(encoding: Circuit, data: int = 0) -> CodeSpec:
    """Code of a Clifford encoder acting on ``|0>`` ancillas plus data qubit ``data``.

    The encoder must contain only gates (noise sites are ignored); ancillas start
    in ``|0>`` so each contributes ``Z_a`` pushed through the circuit.
    """
    for op in encoding.ops:
        if not isinstance(op, (Gate, NoiseSite)):
            raise UnsupportedCircuitError(f"encoder may contain only gates, found {op}")
    n = encoding.n_qubits
    gens = []
    for q in range(n):
        if q == data:
            continue
        gens.append(conjugate_circuit(PauliString.from_sparse(n, {q: "Z"}), encoding))
    lx = conjugate_circuit(PauliString.from_sparse(n, {data: "X"}), encoding)
    lz = conjugate_circuit(PauliString.from_sparse(n, {data: "Z"}), encoding)
    return CodeSpec(n, n - len(gens), tuple(gens), lx, lz, encoding.names)


def pcs_code(r: int) -> CodeSpec:
    """Code of the recursion-``r`` PCS X&Z encoder on one data qubit."""
    enc, _ = build_encoder(r)
    return extract_code(enc, 0)


def iter_paulis(n: int, w: int):
    """All Pauli strings of weight exactly ``w`` on ``n`` qubits."""
    for support in itertools.combinations(range(n), w):
        for kinds in itertools.product("XYZ", repeat=w):
            yield PauliString.from_sparse(n, dict(zip(support, kinds)))


def _count(n: int, w: int) -> int:
    return math.comb(n, w) * 3**w


@dataclass(frozen=True)
class DistanceResult:
    """``value`` is exact when ``exact``; otherwise the distance exceeds ``cap``."""

    value: int
    exact: bool
    witness: PauliString | None

    def __int__(self) -> int:
        return self.value


def distance(code: CodeSpec, cap: int = 3, budget: int = ENUM_BUDGET) -> DistanceResult:
    """Smallest weight of a nontrivial logical, by exhaustive search up to ``cap``."""
    if cap < 1:
        raise ValidationError("cap must be >= 1")
    total = sum(_count(code.n, w) for w in range(1, cap + 1))
    if total > budget:
        raise ResourceError(f"{total} Paulis to test exceed budget {budget}")
    for w in range(1, cap + 1):
        for p in iter_paulis(code.n, w):
            if code.is_logical(p):
                return DistanceResult(w, True, p)
    return DistanceResult(cap + 1, False, None)


def undetected_logicals(code: CodeSpec, w: int) -> list[PauliString]:
    return [p for p in iter_paulis(code.n, w) if code.is_logical(p)]


def stabilizer_group(code: CodeSpec) -> list[PauliString]:
    """Every element of the group (unsigned), identity included."""
    m = len(code.generators)
    if m > GROUP_BUDGET:
        raise ResourceError(f"group of size 2^{m} is too large to enumerate")
    rows = code.stabilizer_rows()
    out = []
    for bits in itertools.product((0, 1), repeat=m):
        v = (np.array(bits, dtype=np.uint8) @ rows) % 2
        out.append(_from_row(v.astype(np.uint8)))
    return out


def min_weight_generating_set(
    code: CodeSpec, required: PauliString | None = None
) -> tuple[list[PauliString], int]:
    """Generating set minimising the maximum weight.

    Greedy selection of independent group elements in order of weight yields a
    basis of minimum total weight (independent sets form a matroid), which also
    minimises the maximum weight.  ``required`` is placed first when given; it
    must lie in the group.
    """
    own = {str(g.unsigned()) for g in code.generators}
    elems = [p for p in stabilizer_group(code) if weight(p) > 0]
    # ties go to the encoder's own generators, then lexicographic order
    elems.sort(key=lambda p: (weight(p), str(p) not in own, str(p)))
    chosen: list[PauliString] = []
    rows = np.zeros((0, 2 * code.n), dtype=np.uint8)
    if required is not None:
        if not code.in_group(required):
            raise ValidationError(f"{required} is not in the stabilizer group")
        chosen.append(required.unsigned())
        rows = symplectic_matrix(chosen)
    for p in elems:
        if len(chosen) == len(code.generators):
            break
        row = np.concatenate([p.xs, p.zs])
        if not gf2_in_span(rows, row):
            chosen.append(p)
            rows = np.vstack([rows, row])
    return chosen, max(weight(p) for p in chosen)


def default_h_pattern(r: int) -> list[int]:
    """Qubit indices of ancillas ``a_j`` with ``j mod 4`` in {2, 3}."""
    return [j for j in range(1, 2 * r + 3) if j % 4 in (2, 3)]


@dataclass(frozen=True)
class CSSResult:
    is_css: bool
    x_generators: tuple[PauliString, ...]
    z_generators: tuple[PauliString, ...]
    transformed: tuple[PauliString, ...]


def apply_hadamards(p: PauliString, qubits) -> PauliString:
    xs, zs = p.xs.copy(), p.zs.copy()
    for q in qubits:
        xs[q], zs[q] = zs[q], xs[q]
    return PauliString(xs, zs, 0)


def css_equivalence_check(code: CodeSpec, h_pattern) -> CSSResult:
    """Whether the code is CSS after Hadamards on ``h_pattern``.

    After conjugation, the X-type subgroup has dimension ``m - rank(Z block)``
    and the Z-type subgroup ``m - rank(X block)``; the code is CSS exactly when
    the two together span all ``m`` generators.
    """
    gens = [apply_hadamards(g, h_pattern) for g in code.generators]
    rows = symplectic_matrix(gens)
    n, m = code.n, len(gens)
    xblock, zblock = rows[:, :n], rows[:, n:]
    x_combos = gf2_nullspace(zblock.T)  # combinations with no Z part
    z_combos = gf2_nullspace(xblock.T)
    xg = tuple(_from_row((c @ rows % 2).astype(np.uint8)) for c in x_combos)
    zg = tuple(_from_row((c @ rows % 2).astype(np.uint8)) for c in z_combos)
    return CSSResult(len(xg) + len(zg) == m, xg, zg, tuple(gens))


# -- syndromes ---------------------------------------------------------------


def build_check_circuit(r: int) -> tuple[Circuit, int]:
    """Noiseless PCS X&Z block on ``rho`` (left checks, right checks, ancilla
    measurements) and the index of the last left-check op, after which errors
    are inserted."""
    from .circuit import CircuitBuilder
    from .protocols import left_checks, pcs_block, prepare_ancillas

    b = CircuitBuilder()
    rho = b.qubit("rho")
    blk = pcs_block(b, rho, "XZ", r)
    prepare_ancillas(b, blk)
    left_checks(b, blk)
    split = len(b.ops) - 1
    right_checks(b, blk)
    measure_checks(b, blk)
    return b.build(), split


def circuit_syndrome(circuit: Circuit, after: int, error: PauliString) -> tuple[int, ...]:
    """Measurement flips caused by ``error`` inserted after op index ``after``."""
    x = error.xs.copy()
    z = error.zs.copy()
    flips = []
    for op in circuit.ops[after + 1 :]:
        if isinstance(op, Gate):
            _frame_gate(x, z, op.name, op.qubits)
        elif isinstance(op, Measurement):
            flips.append(int(z[op.qubit] if op.basis == "X" else x[op.qubit]))
    return tuple(flips)


def syndrome_table(r: int = 1, max_weight: int = 2) -> dict[tuple[int, ...], list[PauliString]]:
    """Group every error of weight ``<= max_weight`` (inserted between left and
    right checks) by the ancilla outcome pattern ``a1 a2 ...``."""
    if not 0 <= max_weight <= 2:
        raise ValidationError("max_weight must be 0, 1 or 2")
    circ, split = build_check_circuit(r)
    table: dict[tuple[int, ...], list[PauliString]] = {}
    for w in range(max_weight + 1):
        for e in iter_paulis(circ.n_qubits, w):
            table.setdefault(circuit_syndrome(circ, split, e), []).append(e)
    return table


def syndrome_str(s) -> str:
    return "[" + "".join(map(str, s)) + "]"


@dataclass(frozen=True)
class Certificate:
    r: int
    n: int
    k: int
    distance: int
    distance_exact: bool
    max_generator_weight: int
    generators: tuple[str, ...]
    css: bool
    h_pattern: tuple[int, ...]

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def certify(r: int) -> Certificate:
    code = pcs_code(r)
    d = distance(code, cap=3)
    gens, wmax = min_weight_generating_set(code)
    pattern = default_h_pattern(r)
    css = css_equivalence_check(code, pattern).is_css
    return Certificate(r, code.n, code.k, d.value, d.exact, wmax, tuple(str(g) for g in gens), css, tuple(pattern))
