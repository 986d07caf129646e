"""Circuit representation shared by the simulators.

A :class:`Circuit` is an ordered tuple of operations on ``n_qubits`` qubits,
all starting in ``|0>``:

* :class:`Gate` -- Clifford gate from :data:`GATES`.
* :class:`NoiseSite` -- single-qubit Pauli channel, probabilities of (I, X, Y, Z).
* :class:`Measurement` -- destructive measurement in the Z or X basis; the
  outcome bit is stored under ``label``.  A measured qubit may not be used again.
* :class:`ParityCondition` -- postselect on the XOR of labelled bits.
* :class:`PauliCorrection` -- classically controlled Pauli (Pauli frame update),
  applied when the XOR of the labelled bits is 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError

_S2 = 1 / np.sqrt(2)
GATE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}


def _controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


GATE_MATRICES.update(
    CNOT=_controlled(GATE_MATRICES["X"]),
    CY=_controlled(GATE_MATRICES["Y"]),
    CZ=_controlled(GATE_MATRICES["Z"]),
)


def main_depolarizing(p: float) -> tuple[float, float, float, float]:
    """(I, X, Y, Z) weights of MAIN-convention depolarizing noise."""
    return (1 - 3 * p / 4, p / 4, p / 4, p / 4)


GATES = {name: (1 if m.shape == (2, 2) else 2) for name, m in GATE_MATRICES.items()}
TWO_QUBIT_GATES = frozenset(g for g, k in GATES.items() if k == 2)


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    tag: str = ""


@dataclass(frozen=True)
class NoiseSite:
    qubit: int
    probs: tuple[float, float, float, float]
    tag: str = ""


@dataclass(frozen=True)
class Measurement:
    basis: str
    qubit: int
    label: str


@dataclass(frozen=True)
class ParityCondition:
    labels: tuple[str, ...]
    parity: int = 0


@dataclass(frozen=True)
class PauliCorrection:
    pauli: str
    qubit: int
    labels: tuple[str, ...]


Op = Gate | NoiseSite | Measurement | ParityCondition | PauliCorrection


def _op_qubits(op) -> tuple[int, ...]:
    if isinstance(op, Gate):
        return op.qubits
    if isinstance(op, (NoiseSite, Measurement, PauliCorrection)):
        return (op.qubit,)
    return ()


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple
    data_qubits: tuple[int, ...] | None = None
    names: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"q{i}" for i in range(self.n_qubits)))
        if len(self.names) != self.n_qubits:
            raise DimensionError("one name per qubit required")
        self._validate()

    def _validate(self) -> None:
        labels: set[str] = set()
        measured: set[int] = set()
        for op in self.ops:
            qs = _op_qubits(op)
            for q in qs:
                if not 0 <= q < self.n_qubits:
                    raise DimensionError(f"qubit {q} out of range in {op}")
                if q in measured:
                    raise ValidationError(f"qubit {q} used after measurement in {op}")
            if isinstance(op, Gate):
                if op.name not in GATES:
                    raise ValidationError(f"unknown gate {op.name}")
                if len(qs) != GATES[op.name] or len(set(qs)) != len(qs):
                    raise ValidationError(f"bad qubit list for {op}")
            elif isinstance(op, NoiseSite):
                if len(op.probs) != 4 or min(op.probs) < -1e-15 or abs(sum(op.probs) - 1) > 1e-9:
                    raise ValidationError(f"noise probabilities must be a distribution: {op}")
            elif isinstance(op, Measurement):
                if op.basis not in ("X", "Z"):
                    raise ValidationError(f"unsupported basis {op.basis}")
                if op.label in labels:
                    raise ValidationError(f"duplicate label {op.label}")
                labels.add(op.label)
                measured.add(op.qubit)
            elif isinstance(op, (ParityCondition, PauliCorrection)):
                missing = [lab for lab in op.labels if lab not in labels]
                if missing:
                    raise ValidationError(f"{op} references undefined labels {missing}")
                if isinstance(op, PauliCorrection) and op.pauli not in ("X", "Y", "Z"):
                    raise ValidationError(f"bad correction Pauli {op.pauli}")
            else:
                raise ValidationError(f"unknown operation {op!r}")
        if self.data_qubits is not None:
            for q in self.data_qubits:
                if not 0 <= q < self.n_qubits or q in measured:
                    raise ValidationError(f"data qubit {q} invalid or measured")

    # -- queries -----------------------------------------------------------

    def noise_sites(self) -> list[NoiseSite]:
        return [op for op in self.ops if isinstance(op, NoiseSite)]

    def measurements(self) -> list[Measurement]:
        return [op for op in self.ops if isinstance(op, Measurement)]

    def parity_conditions(self) -> list[ParityCondition]:
        return [op for op in self.ops if isinstance(op, ParityCondition)]

    def count(self, name: str | None = None, tag: str | None = None, two_qubit=False) -> int:
        """Number of gates matching ``name`` and/or ``tag`` (prefix match)."""
        total = 0
        for op in self.ops:
            if not isinstance(op, Gate):
                continue
            if name is not None and op.name != name:
                continue
            if tag is not None and not op.tag.startswith(tag):
                continue
            if two_qubit and op.name not in TWO_QUBIT_GATES:
                continue
            total += 1
        return total

    def noiseless(self) -> "Circuit":
        ops = [op for op in self.ops if not isinstance(op, NoiseSite)]
        return Circuit(self.n_qubits, ops, self.data_qubits, self.names, dict(self.meta))

    def index(self, name: str) -> int:
        return self.names.index(name)

    # -- text form ---------------------------------------------------------

    def to_text(self) -> str:
        lines = ["QUBITS " + " ".join([str(self.n_qubits), *self.names])]
        if self.data_qubits is not None:
            lines.append("DATA " + " ".join(map(str, self.data_qubits)))
        for op in self.ops:
            if isinstance(op, Gate):
                line = " ".join([op.name, *map(str, op.qubits)])
            elif isinstance(op, NoiseSite):
                line = " ".join(["NOISE", str(op.qubit), *(repr(float(p)) for p in op.probs)])
            elif isinstance(op, Measurement):
                line = f"MEASURE {op.basis} {op.qubit} {op.label}"
            elif isinstance(op, ParityCondition):
                line = " ".join(["PARITY", str(op.parity), *op.labels])
            else:
                line = " ".join(["CORRECT", op.pauli, str(op.qubit), *op.labels])
            tag = getattr(op, "tag", "")
            lines.append(line + (f" @{tag}" if tag else ""))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        n = None
        names: tuple[str, ...] = ()
        data = None
        ops = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tag = ""
            parts = line.split()
            if parts[-1].startswith("@"):
                tag = parts.pop()[1:]
            head, args = parts[0], parts[1:]
            if head == "QUBITS":
                n = int(args[0])
                names = tuple(args[1:])
            elif head == "DATA":
                data = tuple(int(a) for a in args)
            elif head == "NOISE":
                ops.append(NoiseSite(int(args[0]), tuple(float(a) for a in args[1:5]), tag))
            elif head == "MEASURE":
                ops.append(Measurement(args[0], int(args[1]), args[2]))
            elif head == "PARITY":
                ops.append(ParityCondition(tuple(args[1:]), int(args[0])))
            elif head == "CORRECT":
                ops.append(PauliCorrection(args[0], int(args[1]), tuple(args[2:])))
            elif head in GATES:
                ops.append(Gate(head, tuple(int(a) for a in args), tag))
            else:
                raise ValidationError(f"unrecognised line: {raw!r}")
        if n is None:
            raise ValidationError("missing QUBITS header")
        return cls(n, ops, data, names)


class CircuitBuilder:
    """Mutable helper that accumulates operations and named qubits.

    With ``gate_noise=(p_1q, p_2q)`` every gate is followed by MAIN-convention
    depolarizing noise on each of its qubits (independent channels on both
    qubits of a two-qubit gate).
    """

    def __init__(self, gate_noise: tuple[float, float] | None = None):
        self.names: list[str] = []
        self.ops: list = []
        self.gate_noise = gate_noise
        self.meta: dict = {}

    def qubit(self, name: str) -> int:
        if name in self.names:
            raise ValidationError(f"duplicate qubit name {name}")
        self.names.append(name)
        return len(self.names) - 1

    def gate(self, name: str, *qubits: int, tag: str = "", noisy: bool = True) -> None:
        self.ops.append(Gate(name, tuple(qubits), tag))
        if noisy and self.gate_noise is not None:
            p = self.gate_noise[0] if len(qubits) == 1 else self.gate_noise[1]
            if p > 0:
                for q in qubits:
                    self.ops.append(NoiseSite(q, main_depolarizing(p), "gate"))

    def h(self, q, **kw):
        self.gate("H", q, **kw)

    def cnot(self, c, t, **kw):
        self.gate("CNOT", c, t, **kw)

    def cz(self, a, b, **kw):
        self.gate("CZ", a, b, **kw)

    def controlled_pauli(self, kind: str, c: int, t: int, **kw) -> None:
        self.gate({"X": "CNOT", "Y": "CY", "Z": "CZ"}[kind], c, t, **kw)

    def noise(self, q: int, probs, tag: str = "") -> None:
        self.ops.append(NoiseSite(q, tuple(float(p) for p in probs), tag))

    def depolarize(self, q: int, p: float, tag: str = "channel") -> None:
        if p > 0:
            self.noise(q, main_depolarizing(p), tag)

    def measure(self, q: int, label: str, basis: str = "Z") -> None:
        self.ops.append(Measurement(basis, q, label))

    def parity(self, labels, parity: int = 0) -> None:
        self.ops.append(ParityCondition(tuple(labels), parity))

    def correct(self, pauli: str, q: int, labels) -> None:
        self.ops.append(PauliCorrection(pauli, q, tuple(labels)))

    def build(self, data_qubits=None) -> Circuit:
        data = None if data_qubits is None else tuple(data_qubits)
        return Circuit(len(self.names), self.ops, data, tuple(self.names), dict(self.meta))
