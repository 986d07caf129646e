"""Depolarizing conventions and the postselected single-check channel.

Two parameterisations of the single-qubit depolarizing channel are in use:

* ``MAIN``: weights ``1 - 3p/4`` on I and ``p/4`` on each of X, Y, Z, so
  ``p = 1`` is completely depolarizing.
* ``APPENDIX``: weights ``1 - p`` and ``p/3``; ``p = 3/4`` is completely
  depolarizing.

``MAIN(p)`` and ``APPENDIX(3p/4)`` are the same channel.  Every public function
here takes the MAIN convention unless told otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dense import KrausChannel, choi_from_kraus
from .errors import DomainError, ValidationError

_PAULI_MATS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class Convention(str, enum.Enum):
    MAIN = "main"
    APPENDIX = "appendix"


@dataclass(frozen=True)
class DepolarizingSpec:
    p: float
    convention: Convention = Convention.MAIN

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"depolarizing probability {self.p} outside [0, 1]")
        object.__setattr__(self, "convention", Convention(self.convention))

    def probs(self) -> tuple[float, float, float, float]:
        """Probabilities of (I, X, Y, Z)."""
        if self.convention is Convention.MAIN:
            e = self.p / 4
            return (1 - 3 * e, e, e, e)
        e = self.p / 3
        return (1 - self.p, e, e, e)

    def to_main(self) -> "DepolarizingSpec":
        if self.convention is Convention.MAIN:
            return self
        p = 4 * self.p / 3
        if p > 1 + 1e-12:
            raise DomainError(f"APPENDIX p={self.p} has no MAIN equivalent (p > 3/4)")
        return DepolarizingSpec(min(p, 1.0), Convention.MAIN)

    def to_appendix(self) -> "DepolarizingSpec":
        if self.convention is Convention.APPENDIX:
            return self
        return DepolarizingSpec(3 * self.p / 4, Convention.APPENDIX)


def depolarizing_probs(p: float, convention=Convention.MAIN) -> tuple[float, float, float, float]:
    return DepolarizingSpec(p, convention).probs()


def pauli_kraus(probs) -> KrausChannel:
    """Single-qubit Pauli channel with (I, X, Y, Z) probabilities ``probs``."""
    return KrausChannel([math.sqrt(max(w, 0.0)) * m for w, m in zip(probs, _PAULI_MATS)])


def depolarizing_kraus(spec: DepolarizingSpec) -> KrausChannel:
    return pauli_kraus(spec.probs())


@dataclass(frozen=True)
class EffectiveChannel:
    """Unnormalised postselected map of one PCS X check.

    ``kraus`` satisfies ``sum K^dag K = norm * I``; dividing each operator by
    ``sqrt(norm)`` gives the trace-preserving conditional channel.
    """

    kraus: tuple[np.ndarray, ...]
    norm: float

    def choi(self) -> np.ndarray:
        return choi_from_kraus(self.kraus)

    def normalized(self) -> KrausChannel:
        return KrausChannel([k / math.sqrt(self.norm) for k in self.kraus])


def effective_pcs_x_channel(p1: float, convention=Convention.MAIN) -> EffectiveChannel:
    """Channel on a qubit protected by one X check whose ancilla and data both
    see depolarizing noise of strength ``p1``, conditioned on the check passing."""
    q = DepolarizingSpec(p1, convention).to_appendix().p
    ops = (
        math.sqrt((1 - q) ** 2 + q**2 / 9) * _PAULI_MATS[0],
        math.sqrt((1 - q) * 2 * q / 3) * _PAULI_MATS[1],
        (math.sqrt(2) * q / 3) * _PAULI_MATS[2],
        (math.sqrt(2) * q / 3) * _PAULI_MATS[3],
    )
    norm = (1 - q) ** 2 + q**2 / 9 + (1 - q) * 2 * q / 3 + 4 * q**2 / 9
    return EffectiveChannel(ops, norm)


def fidelity_from_p(p: float) -> float:
    """Bell fidelity after MAIN-convention depolarizing ``p`` on both halves."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p} outside [0, 1]")
    return 1 + 0.75 * (p - 2) * p


def p_from_fidelity(F: float) -> float:
    """Inverse of :func:`fidelity_from_p` on ``F`` in [1/4, 1]."""
    if F < 0.25 - 1e-15 or F > 1 + 1e-15:
        raise DomainError(f"F={F} outside [0.25, 1]")
    return (3 - math.sqrt(3) * math.sqrt(max(4 * F - 1, 0.0))) / 3
