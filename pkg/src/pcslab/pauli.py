"""Signed Pauli strings in symplectic form.

Qubit 0 is the leftmost tensor factor everywhere in this package.  A string is
stored as ``i**phase * s(x_0, z_0) (x) ... (x) s(x_{n-1}, z_{n-1})`` where
``s(1, 0) = X``, ``s(0, 1) = Z`` and ``s(1, 1) = Y``.
"""

from __future__ import annotations

import re
from functools import reduce

import numpy as np

from .errors import DimensionError, ResourceError

MATRIX_CAP = 14

_SINGLE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
}
_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}
_SIGNS = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_RE = re.compile(r"^([+-]?i?)([IXYZ]*)$")


def _phase_exponent(x1, z1, x2, z2):
    """Exponent of i picked up by ``s(x1, z1) @ s(x2, z2)``, summed over qubits."""
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    g = np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
    )
    return int(g.sum())


def _frozen_bits(bits, n=None):
    arr = np.array(bits, dtype=np.uint8).reshape(-1) & 1
    if n is not None and arr.size != n:
        raise DimensionError(f"expected {n} bits, got {arr.size}")
    arr.setflags(write=False)
    return arr


class PauliString:
    """Immutable n-qubit Pauli operator with a phase in {+1, +i, -1, -i}."""

    __slots__ = ("xs", "zs", "phase")

    def __init__(self, xs, zs, phase: int = 0):
        xs = _frozen_bits(xs)
        zs = _frozen_bits(zs, xs.size)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "phase", int(phase) % 4)

    def __setattr__(self, key, value):
        raise AttributeError("PauliString is immutable")

    @property
    def n(self) -> int:
        return int(self.xs.size)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        """Parse ``"-iXZY"``-style text (sign prefix optional)."""
        m = _TEXT_RE.match(text.strip())
        if m is None:
            raise ValueError(f"not a Pauli string: {text!r}")
        sign, body = m.groups()
        bits = [_CHAR_TO_BITS[c] for c in body]
        xs = [b[0] for b in bits]
        zs = [b[1] for b in bits]
        return cls(xs, zs, _SIGNS[sign])

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        """``kind`` in {I, X, Y, Z} on ``qubit``, identity elsewhere."""
        return cls.from_sparse(n, {qubit: kind})

    @classmethod
    def from_sparse(cls, n: int, terms: dict, phase: int = 0) -> "PauliString":
        xs = np.zeros(n, np.uint8)
        zs = np.zeros(n, np.uint8)
        for q, kind in terms.items():
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} outside 0..{n - 1}")
            xs[q], zs[q] = _CHAR_TO_BITS[kind]
        return cls(xs, zs, phase)

    def __str__(self) -> str:
        body = "".join(_BITS_TO_CHAR[(int(x), int(z))] for x, z in zip(self.xs, self.zs))
        return _PHASE_TEXT[self.phase] + body

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.phase == other.phase
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.zs, other.zs)
        )

    def __hash__(self) -> int:
        return hash((self.phase, self.xs.tobytes(), self.zs.tobytes()))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __getitem__(self, qubit: int) -> str:
        return _BITS_TO_CHAR[(int(self.xs[qubit]), int(self.zs[qubit]))]

    def support(self) -> list[int]:
        return [int(q) for q in np.flatnonzero(self.xs | self.zs)]

    def unsigned(self) -> "PauliString":
        return PauliString(self.xs, self.zs, 0)

    def is_x_type(self) -> bool:
        return not self.zs.any()

    def is_z_type(self) -> bool:
        return not self.xs.any()


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"size mismatch: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with exact phase."""
    _check_sizes(a, b)
    phase = a.phase + b.phase + _phase_exponent(a.xs, a.zs, b.xs, b.zs)
    return PauliString(a.xs ^ b.xs, a.zs ^ b.zs, phase)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    _check_sizes(a, b)
    return int((np.sum(a.xs & b.zs) + np.sum(a.zs & b.xs)) % 2)


def commutes(a: PauliString, b: PauliString) -> bool:
    return symplectic_product(a, b) == 0


def weight(a: PauliString) -> int:
    return int(np.count_nonzero(a.xs | a.zs))


def to_matrix(a: PauliString, cap: int = MATRIX_CAP) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``a`` (qubit 0 = leftmost Kronecker factor)."""
    if a.n > cap:
        raise ResourceError(f"{a.n} qubits exceeds dense cap {cap}")
    factors = [_SINGLE[(int(x), int(z))] for x, z in zip(a.xs, a.zs)]
    mat = reduce(np.kron, factors, np.ones((1, 1), dtype=complex))
    return (1j**a.phase) * mat
