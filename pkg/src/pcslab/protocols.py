"""Circuit builders for the PCS network protocols.

Conventions used by every builder:

* Check ancillas start in ``|+>`` (H on ``|0>``), control the check Pauli, and
  are measured in the X basis; a check passes on outcome 0.
* A PCS X&Z block on data qubit ``d`` uses ancillas ``d_1 .. d_{2r+2}``:
  ``d_1`` carries the X check, ``d_2`` the Z check and, for recursion level
  ``l``, ``d_{2l+1}`` and ``d_{2l+2}`` check ``d_{2l-1}`` and ``d_{2l}``.
  Recursion checks are CZ gates, i.e. X checks on the previous ancillas in the
  Hadamard-rotated frame where those ancillas are prepared in ``|0>``; they
  catch the ancilla bit flips that would otherwise leak onto the data as
  undetected phase errors.
* Left checks run ``CZ(d_2, d)``, ``CNOT(d_1, d)``, then the recursion layers
  outward; right checks replay the same gates in reverse order.
* A Bell measurement on ``(p, q)`` is ``CNOT(p, q)``, ``H(p)`` and Z
  measurements; the bit on ``p`` (suffix ``1``) is the XX parity and the bit on
  ``q`` (suffix ``2``) the ZZ parity.  Corrections are classical Pauli frame
  updates on the second output qubit.

Teleported PCS bit labels (the three Bell measurements of the flying qubits):

=====  ================  ================
label  Bell pair         meaning
=====  ================  ================
v1/v2  (a0, b0) data     XX / ZZ parity
w1/w2  (a0_1, b0_1)      X-check ancillas
u1/u2  (a0_2, b0_2)      Z-check ancillas
=====  ================  ================

With this table the noiseless outcomes always satisfy ``w1+v1 = 0`` and
``u1+v2+w2 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .circuit import Circuit, CircuitBuilder
from .errors import ValidationError
from .pauli import PauliString

CHECK_MODES = ("none", "X", "XZ")
PROTECT_MODES = ("none", "flying", "flying+memory")


@dataclass(frozen=True)
class CheckSpec:
    """One PCS check: ``pauli`` on the payload register controlled by ``ancilla``."""

    pauli: PauliString
    ancilla: int


def pcs_cost(r: int) -> int:
    """Ancillas (and right-check two-qubit gates) used by recursion level ``r``."""
    return 4 * (r + 1)


def build_bell_pair(b: CircuitBuilder, q0: int, q1: int) -> None:
    b.h(q0, tag="bell")
    b.cnot(q0, q1, tag="bell")


def bell_measure(b: CircuitBuilder, p: int, q: int, prefix: str) -> tuple[str, str]:
    b.cnot(p, q, tag="bsm")
    b.h(p, tag="bsm")
    b.measure(p, prefix + "1")
    b.measure(q, prefix + "2")
    return prefix + "1", prefix + "2"


# -- PCS blocks --------------------------------------------------------------


@dataclass
class PCSBlock:
    """Ancillas and gate list of the checks protecting one data qubit."""

    data: int
    ancillas: list[int]
    gates: list[tuple[str, int, int]]


def pcs_block(b: CircuitBuilder, data: int, mode: str = "XZ", r: int = 0) -> PCSBlock:
    """Allocate ancillas for the checks on ``data`` (no gates emitted yet)."""
    if mode not in ("X", "XZ"):
        raise ValidationError(f"unknown check mode {mode}")
    if r < 0:
        raise ValidationError("recursion level must be >= 0")
    if mode == "X" and r > 0:
        raise ValidationError("recursion is defined on top of PCS X&Z")
    base = b.names[data]
    count = 1 if mode == "X" else 2 * r + 2
    anc = [b.qubit(f"{base}_{k}") for k in range(1, count + 1)]
    if mode == "X":
        gates = [("CNOT", anc[0], data)]
    else:
        gates = [("CZ", anc[1], data), ("CNOT", anc[0], data)]
        for level in range(1, r + 1):
            gates.append(("CZ", anc[2 * level], anc[2 * level - 2]))
            gates.append(("CZ", anc[2 * level + 1], anc[2 * level - 1]))
    return PCSBlock(data, anc, gates)


def prepare_ancillas(b: CircuitBuilder, block: PCSBlock) -> None:
    for a in block.ancillas:
        b.h(a, tag="prep")


def left_checks(b: CircuitBuilder, block: PCSBlock) -> None:
    for name, c, t in block.gates:
        b.gate(name, c, t, tag="left")


def right_checks(b: CircuitBuilder, block: PCSBlock) -> None:
    for name, c, t in reversed(block.gates):
        b.gate(name, c, t, tag="right")


def measure_checks(b: CircuitBuilder, block: PCSBlock) -> list[str]:
    labels = []
    for a in block.ancillas:
        lab = "m_" + b.names[a]
        b.measure(a, lab, basis="X")
        b.parity([lab], 0)
        labels.append(lab)
    return labels


def _noise(b: CircuitBuilder, qubits, p: float, tag: str = "channel") -> None:
    for q in qubits:
        b.depolarize(q, p, tag)


# -- generic sandwich --------------------------------------------------------


def build_pcs_sandwich(
    n_payload: int,
    checks: list[PauliString],
    noise_site_factory: Callable[[CircuitBuilder, int], None] | None = None,
    prepare: Callable[[CircuitBuilder, list[int]], None] | None = None,
    data_qubits=None,
) -> Circuit:
    """Identity payload on ``n_payload`` qubits sandwiched by Pauli checks.

    ``checks`` are Paulis on the payload register; each gets its own ancilla.
    ``noise_site_factory(builder, qubit)`` is called for every qubit (payload
    and ancilla) between the left and right checks.
    """
    b = CircuitBuilder()
    payload = [b.qubit(f"d{i}") for i in range(n_payload)]
    specs = []
    for k, p in enumerate(checks):
        if p.n != n_payload:
            raise ValidationError("check Pauli must act on the payload register")
        specs.append(CheckSpec(p, b.qubit(f"c{k}")))
    if prepare is not None:
        prepare(b, payload)
    for spec in specs:
        b.h(spec.ancilla, tag="prep")
    gates = []
    for spec in specs:
        for q in spec.pauli.support():
            gates.append((spec.pauli[q], spec.ancilla, payload[q]))
    for kind, c, t in gates:
        b.controlled_pauli(kind, c, t, tag="left")
    if noise_site_factory is not None:
        for q in range(len(b.names)):
            noise_site_factory(b, q)
    for kind, c, t in reversed(gates):
        b.controlled_pauli(kind, c, t, tag="right")
    for spec in specs:
        lab = f"m_c{spec.ancilla}"
        b.measure(spec.ancilla, lab, basis="X")
        b.parity([lab])
    if data_qubits is None and n_payload == 2:
        data_qubits = payload
    return b.build(data_qubits)


# -- Bell-pair purification scenarios ----------------------------------------


def build_recursive_pcs(
    r: int,
    p1: float = 0.0,
    p2: float = 0.0,
    gate_noise: tuple[float, float] | None = None,
    mode: str = "XZ",
) -> Circuit:
    """Bell pair ``(a0, a1)`` with PCS checks of recursion level ``r`` on each half.

    Depolarizing noise (MAIN convention) acts once between left and right
    checks on every qubit: strength ``p1`` on ``a0`` and its ancillas, ``p2`` on
    ``a1`` and its ancillas.
    """
    b = CircuitBuilder(gate_noise)
    a0 = b.qubit("a0")
    a1 = b.qubit("a1")
    blocks = [pcs_block(b, a0, mode, r), pcs_block(b, a1, mode, r)]
    build_bell_pair(b, a0, a1)
    for blk in blocks:
        prepare_ancillas(b, blk)
    for blk in blocks:
        left_checks(b, blk)
    for blk, p in zip(blocks, (p1, p2)):
        _noise(b, [blk.data, *blk.ancillas], p)
    for blk in blocks:
        right_checks(b, blk)
    for blk in blocks:
        measure_checks(b, blk)
    b.meta.update(scenario="recursive_pcs", r=r, mode=mode)
    return b.build((a0, a1))


def build_pcs_x_pair(p1: float = 0.0, p2: float = 0.0, gate_noise=None) -> Circuit:
    """Bell pair with one X check per half (4 qubits)."""
    return build_recursive_pcs(0, p1, p2, gate_noise, mode="X")


def build_pcs_xz_pair(p1: float = 0.0, p2: float = 0.0, gate_noise=None) -> Circuit:
    """Bell pair with X and Z checks per half (6 qubits)."""
    return build_recursive_pcs(0, p1, p2, gate_noise, mode="XZ")


def build_noisy_pair(p1: float = 0.0, p2: float = 0.0, gate_noise=None) -> Circuit:
    """Unprotected Bell pair with depolarizing ``p1`` / ``p2`` on its halves."""
    b = CircuitBuilder(gate_noise)
    a0 = b.qubit("a0")
    a1 = b.qubit("a1")
    build_bell_pair(b, a0, a1)
    b.depolarize(a0, p1)
    b.depolarize(a1, p2)
    return b.build((a0, a1))


def build_half_pcs_x(p: float = 0.0) -> Circuit:
    """One qubit (index 0, no preparation) guarded by one X check, with
    depolarizing ``p`` on data and ancilla between the checks."""
    b = CircuitBuilder()
    d = b.qubit("rho")
    blk = pcs_block(b, d, "X")
    prepare_ancillas(b, blk)
    left_checks(b, blk)
    _noise(b, [d, *blk.ancillas], p)
    right_checks(b, blk)
    measure_checks(b, blk)
    return b.build()


def build_encoder(r: int, mode: str = "XZ") -> tuple[Circuit, PCSBlock]:
    """Left-check fragment for a single data qubit ``rho`` (index 0)."""
    b = CircuitBuilder()
    rho = b.qubit("rho")
    blk = pcs_block(b, rho, mode, r)
    prepare_ancillas(b, blk)
    left_checks(b, blk)
    return b.build(), blk


# -- entanglement swapping ---------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """Noise for the swapping scenarios.

    ``p_channel`` acts on every transmitted qubit (flying data and its
    ancillas) and ``p_memory`` (default: equal to ``p_channel``) on memory
    qubits and their ancillas during the same window.  ``gate_noise`` is
    ``(p_1q, p_2q)`` after every gate.
    """

    p_channel: float = 0.0
    p_memory: float | None = None
    gate_noise: tuple[float, float] | None = None

    @property
    def memory(self) -> float:
        return self.p_channel if self.p_memory is None else self.p_memory


def build_swap_with_pcs(
    check_mode: str = "XZ",
    noise: NoiseSpec = NoiseSpec(),
    protect: str = "flying",
    r: int = 0,
) -> Circuit:
    """Alice (a0 flying, a1 memory) and Bob (b0, b1) swap at Charlie.

    Output pair is ``(a1, b1)``.  ``protect`` selects which qubits carry checks;
    ``check_mode='none'`` or ``protect='none'`` gives plain swapping.
    """
    if check_mode not in CHECK_MODES:
        raise ValidationError(f"check_mode must be one of {CHECK_MODES}")
    if protect not in PROTECT_MODES:
        raise ValidationError(f"protect must be one of {PROTECT_MODES}")
    if check_mode == "none":
        protect = "none"
    b = CircuitBuilder(noise.gate_noise)
    a0, a1 = b.qubit("a0"), b.qubit("a1")
    b0, b1 = b.qubit("b0"), b.qubit("b1")
    flying_blocks, memory_blocks = [], []
    if protect != "none":
        flying_blocks = [pcs_block(b, q, check_mode, r) for q in (a0, b0)]
    if protect == "flying+memory":
        memory_blocks = [pcs_block(b, q, check_mode, r) for q in (a1, b1)]
    blocks = flying_blocks + memory_blocks
    build_bell_pair(b, a0, a1)
    build_bell_pair(b, b0, b1)
    for blk in blocks:
        prepare_ancillas(b, blk)
    for blk in blocks:
        left_checks(b, blk)
    flying = [a0, b0] + [a for blk in flying_blocks for a in blk.ancillas]
    memory = [a1, b1] + [a for blk in memory_blocks for a in blk.ancillas]
    _noise(b, flying, noise.p_channel)
    _noise(b, memory, noise.memory, tag="memory")
    for blk in blocks:
        right_checks(b, blk)
    for blk in blocks:
        measure_checks(b, blk)
    x_bit, z_bit = bell_measure(b, a0, b0, "s")
    b.correct("Z", b1, [x_bit])
    b.correct("X", b1, [z_bit])
    b.meta.update(scenario="swap", check_mode=check_mode, protect=protect, r=r)
    return b.build((a1, b1))


def build_teleported_pcs(noise: NoiseSpec = NoiseSpec()) -> Circuit:
    """Teleported PCS X&Z: left encodings at both ends, Bell measurements across
    data and ancilla pairs, parity postselection ``w1+v1=0``, ``u1+v2+w2=0``."""
    b = CircuitBuilder(noise.gate_noise)
    a0, a1 = b.qubit("a0"), b.qubit("a1")
    b0, b1 = b.qubit("b0"), b.qubit("b1")
    blk_a = pcs_block(b, a0, "XZ")
    blk_b = pcs_block(b, b0, "XZ")
    build_bell_pair(b, a0, a1)
    build_bell_pair(b, b0, b1)
    for blk in (blk_a, blk_b):
        prepare_ancillas(b, blk)
        left_checks(b, blk)
    flying = [a0, b0, *blk_a.ancillas, *blk_b.ancillas]
    _noise(b, flying, noise.p_channel)
    _noise(b, [a1, b1], noise.memory, tag="memory")
    v1, v2 = bell_measure(b, a0, b0, "v")
    w1, w2 = bell_measure(b, blk_a.ancillas[0], blk_b.ancillas[0], "w")
    u1, u2 = bell_measure(b, blk_a.ancillas[1], blk_b.ancillas[1], "u")
    b.parity([w1, v1], 0)
    b.parity([u1, v2, w2], 0)
    b.correct("Z", b1, [v1, u2])
    b.correct("X", b1, [v2, w2])
    b.meta.update(scenario="teleported_pcs")
    return b.build((a1, b1))


# -- BBPSSW ------------------------------------------------------------------


def werner_probs(F: float) -> tuple[float, float, float, float]:
    """Pauli weights that turn ``|Phi+>`` into a Werner state of fidelity ``F``."""
    if not 0.0 <= F <= 1.0:
        raise ValidationError(f"F={F} outside [0, 1]")
    e = (1 - F) / 3
    return (F, e, e, e)


def build_bbpssw_round(F: float | None = None) -> Circuit:
    """One BBPSSW round on pairs ``(a1, b1)`` and ``(a2, b2)``.

    With ``F`` given, each input pair is first made a Werner state of fidelity
    ``F`` (a Pauli channel on its second qubit), standing in for the twirl.
    Keeps ``(a1, b1)`` when the Z outcomes on ``a2`` and ``b2`` coincide.
    """
    b = CircuitBuilder()
    a1, b1, a2, b2 = (b.qubit(n) for n in ("a1", "b1", "a2", "b2"))
    build_bell_pair(b, a1, b1)
    build_bell_pair(b, a2, b2)
    if F is not None:
        b.noise(b1, werner_probs(F), "werner")
        b.noise(b2, werner_probs(F), "werner")
    b.cnot(a1, a2, tag="bilateral")
    b.cnot(b1, b2, tag="bilateral")
    b.measure(a2, "m_a2")
    b.measure(b2, "m_b2")
    b.parity(["m_a2", "m_b2"], 0)
    b.meta.update(scenario="bbpssw")
    return b.build((a1, b1))
