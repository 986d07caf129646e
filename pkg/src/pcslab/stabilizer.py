"""Clifford tableau simulation, Pauli-frame sampling and exact error-path sums.

Two routes are provided for noisy Clifford circuits whose noise sites are all
Pauli channels:

* :func:`run_shot` simulates one shot with a full stabilizer tableau, sampling
  a Pauli at each noise site and a random outcome at each random measurement.
* Frame methods (:func:`enumerate_paths`, :func:`sample_frames`) propagate each
  error through the circuit as a Pauli frame.  Every Pauli error acts linearly
  on the outcome flips, so the effect of an error path is the XOR of the
  effects of its single-site components.

Frame methods assume the noiseless circuit passes every parity condition with
certainty and leaves the data pair in ``|Phi+>`` after corrections; every
builder in :mod:`pcslab.protocols` satisfies this.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

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
from .errors import EstimationError, ResourceError, UnsupportedCircuitError
from .pauli import PauliString, _phase_exponent, commutes, multiply, to_matrix

PATH_CAP = 10**7
SHARD_SIZE = 10_000

# -- Clifford conjugation of signed Pauli strings ----------------------------


def _build_conjugation_tables():
    tables = {}
    for name, u in GATE_MATRICES.items():
        k = 1 if u.shape == (2, 2) else 2
        table = {}
        for chars in itertools.product("IXYZ", repeat=k):
            p = PauliString.from_str("".join(chars))
            m = u @ to_matrix(p) @ u.conj().T
            for cand_chars in itertools.product("IXYZ", repeat=k):
                c = PauliString.from_str("".join(cand_chars))
                cm = to_matrix(c)
                overlap = np.trace(cm.conj().T @ m) / 2**k
                if abs(abs(overlap) - 1) < 1e-9:
                    phase = int(round(np.angle(overlap) / (np.pi / 2))) % 4
                    table[chars] = PauliString(c.xs, c.zs, phase)
                    break
        tables[name] = table
    return tables


_CONJ = _build_conjugation_tables()


def conjugate(p: PauliString, gate: str, qubits) -> PauliString:
    """``U p U^dag`` for the named gate acting on ``qubits``."""
    qubits = tuple(qubits)
    local = _CONJ[gate][tuple(p[q] for q in qubits)]
    xs = p.xs.copy()
    zs = p.zs.copy()
    for j, q in enumerate(qubits):
        xs[q] = local.xs[j]
        zs[q] = local.zs[j]
    return PauliString(xs, zs, p.phase + local.phase)


def conjugate_circuit(p: PauliString, circuit: Circuit) -> PauliString:
    """Push ``p`` through every gate of a measurement-free Clifford circuit."""
    for op in circuit.ops:
        if isinstance(op, Gate):
            p = conjugate(p, op.name, op.qubits)
        elif not isinstance(op, NoiseSite):
            raise UnsupportedCircuitError(f"conjugate_circuit cannot pass {op}")
    return p


# -- tableau -----------------------------------------------------------------


class StabilizerTableau:
    """Aaronson-Gottesman tableau: rows ``0..n-1`` destabilizers, ``n..2n-1``
    stabilizers, each row ``(-1)**r * s(x, z)``."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1
            self.z[n + i, i] = 1

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    def _check(self, *qubits):
        for q in qubits:
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range for {self.n} qubits")

    def h(self, q):
        self._check(q)
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q):
        self._check(q)
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cnot(self, c, t):
        self._check(c, t)
        x, z = self.x, self.z
        self.r ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
        x[:, t] ^= x[:, c]
        z[:, c] ^= z[:, t]

    def pauli(self, kind: str, q: int):
        self._check(q)
        if kind in ("X", "Y"):
            self.r ^= self.z[:, q]
        if kind in ("Z", "Y"):
            self.r ^= self.x[:, q]

    def apply_gate(self, name: str, qubits) -> None:
        qubits = tuple(qubits)
        if name == "H":
            self.h(*qubits)
        elif name == "S":
            self.s(*qubits)
        elif name == "SDG":
            for _ in range(3):
                self.s(*qubits)
        elif name in ("X", "Y", "Z"):
            self.pauli(name, *qubits)
        elif name == "I":
            self._check(*qubits)
        elif name == "CNOT":
            self.cnot(*qubits)
        elif name == "CZ":
            c, t = qubits
            self.h(t)
            self.cnot(c, t)
            self.h(t)
        elif name == "CY":
            c, t = qubits
            for _ in range(3):
                self.s(t)
            self.cnot(c, t)
            self.s(t)
        else:
            raise UnsupportedCircuitError(f"gate {name} is not a supported Clifford")

    def _rowsum(self, h: int, i: int) -> None:
        g = _phase_exponent(self.x[i], self.z[i], self.x[h], self.z[h])
        total = (2 * int(self.r[h]) + 2 * int(self.r[i]) + g) % 4
        self.r[h] = total // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure_z(self, q: int, rng=None, forced: int | None = None) -> tuple[int, bool]:
        """Measure qubit ``q`` in Z; returns ``(outcome, was_random)``."""
        self._check(q)
        n = self.n
        hits = np.flatnonzero(self.x[n:, q])
        if hits.size:
            p = n + int(hits[0])
            for i in np.flatnonzero(self.x[:, q]):
                if i != p:
                    self._rowsum(int(i), p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p], self.z[p], self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, q] = 1
            if forced is not None:
                bit = forced
            else:
                bit = int((rng if rng is not None else np.random.default_rng()).integers(2))
            self.r[p] = bit
            return bit, True
        # deterministic: accumulate stabilizers flagged by destabilizers
        acc = PauliString.identity(n)
        for i in np.flatnonzero(self.x[:n, q]):
            acc = multiply(acc, self.row(n + int(i)))
        return (0 if acc.phase == 0 else 1), False

    def measure_x(self, q: int, rng=None) -> tuple[int, bool]:
        self.h(q)
        return self.measure_z(q, rng)

    def row(self, i: int) -> PauliString:
        return PauliString(self.x[i], self.z[i], 2 * int(self.r[i]))

    def stabilizers(self) -> list[PauliString]:
        return [self.row(self.n + i) for i in range(self.n)]

    def destabilizers(self) -> list[PauliString]:
        return [self.row(i) for i in range(self.n)]

    def expectation(self, p: PauliString) -> int:
        """``<p>`` for Hermitian ``p``: +1, -1, or 0 when ``p`` is not in the group."""
        stabs = self.stabilizers()
        if not all(commutes(p, s) for s in stabs):
            return 0
        acc = PauliString.identity(self.n)
        for i, d in enumerate(self.destabilizers()):
            if not commutes(p, d):
                acc = multiply(acc, stabs[i])
        rel = multiply(acc, p)
        # acc and p agree up to sign; acc * p = +-I
        return 1 if rel.phase == 0 else -1

    def check_invariants(self) -> bool:
        rows = [self.row(i) for i in range(2 * self.n)]
        n = self.n
        for i in range(n):
            for j in range(n):
                if not commutes(rows[n + i], rows[n + j]):
                    return False
                if commutes(rows[i], rows[n + j]) != (i != j):
                    return False
        return True


# -- single shots ------------------------------------------------------------


@dataclass
class ShotRecord:
    bits: dict
    passed: bool
    frame: PauliString | None = None
    expectations: dict = field(default_factory=dict)


_BELL_OBS = {
    "XX": PauliString.from_str("XX"),
    "YY": PauliString.from_str("YY"),
    "ZZ": PauliString.from_str("ZZ"),
}
_BELL_SIGN = {"XX": 1, "YY": -1, "ZZ": 1}


def _sample_pauli(probs, rng) -> str:
    u = rng.random()
    acc = 0.0
    for kind, w in zip("IXYZ", probs):
        acc += w
        if u < acc:
            return kind
    return "I"


def run_shot(circuit: Circuit, rng) -> ShotRecord:
    """Simulate one shot with a stabilizer tableau.

    The record holds measurement bits, whether every parity condition held and,
    when the circuit designates a data pair, the Pauli frame ``F`` with output
    ``F |Phi+>`` (valid because all non-data qubits are measured).
    """
    t = StabilizerTableau(circuit.n_qubits)
    bits: dict[str, int] = {}
    passed = True
    for op in circuit.ops:
        if isinstance(op, Gate):
            t.apply_gate(op.name, op.qubits)
        elif isinstance(op, NoiseSite):
            kind = _sample_pauli(op.probs, rng)
            if kind != "I":
                t.pauli(kind, op.qubit)
        elif isinstance(op, Measurement):
            if op.basis == "X":
                t.h(op.qubit)
            bits[op.label], _ = t.measure_z(op.qubit, rng)
        elif isinstance(op, ParityCondition):
            if sum(bits[lab] for lab in op.labels) % 2 != op.parity:
                passed = False
        elif isinstance(op, PauliCorrection):
            if sum(bits[lab] for lab in op.labels) % 2:
                t.pauli(op.pauli, op.qubit)
        else:
            raise UnsupportedCircuitError(f"unsupported operation {op!r}")
    record = ShotRecord(bits, passed)
    if circuit.data_qubits is not None and len(circuit.data_qubits) == 2:
        a, b = circuit.data_qubits
        ev = {}
        for name, obs in _BELL_OBS.items():
            full = PauliString.from_sparse(circuit.n_qubits, {a: name[0], b: name[1]})
            ev[name] = t.expectation(full)
        record.expectations = ev
        if all(v != 0 for v in ev.values()):
            # F |Phi+> with F on the second qubit: X flips ZZ, Z flips XX
            fx = ev["ZZ"] != 1
            fz = ev["XX"] != 1
            record.frame = PauliString([0, fx], [0, fz])
    return record


# -- Pauli frame propagation -------------------------------------------------


def _frame_gate(x, z, name, qubits):
    """Unsigned conjugation of frame bit arrays (last axis = qubit)."""
    if name in ("H",):
        (q,) = qubits
        x[..., q], z[..., q] = z[..., q].copy(), x[..., q].copy()
    elif name in ("S", "SDG"):
        (q,) = qubits
        z[..., q] ^= x[..., q]
    elif name == "CNOT":
        c, t = qubits
        x[..., t] ^= x[..., c]
        z[..., c] ^= z[..., t]
    elif name == "CZ":
        a, b = qubits
        z[..., a] ^= x[..., b]
        z[..., b] ^= x[..., a]
    elif name == "CY":
        c, t = qubits
        z[..., t] ^= x[..., t]
        x[..., t] ^= x[..., c]
        z[..., c] ^= z[..., t]
        z[..., t] ^= x[..., t]
    elif name in ("I", "X", "Y", "Z"):
        pass
    else:
        raise UnsupportedCircuitError(f"gate {name} is not a supported Clifford")


@dataclass(frozen=True)
class FrameModel:
    """Linear effect of every noise site on (parity violations, output frame).

    Effect bits: ``0..n_parity-1`` are parity-condition violations; the next
    four are the output frame ``(x_a, z_a, x_b, z_b)`` on the data pair.
    """

    sites: tuple[NoiseSite, ...]
    x_effects: np.ndarray
    z_effects: np.ndarray
    n_parity: int

    @property
    def pass_mask(self) -> int:
        return (1 << self.n_parity) - 1

    def branch_effects(self, i: int) -> np.ndarray:
        ex, ez = int(self.x_effects[i]), int(self.z_effects[i])
        return np.array([0, ex, ex ^ ez, ez], dtype=np.int64)


def _propagate_single(circuit: Circuit, start: int, qubit: int, kind: str) -> int:
    """Effect bits of a Pauli ``kind`` inserted on ``qubit`` just after op ``start``."""
    n = circuit.n_qubits
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    x[qubit] = kind in ("X", "Y")
    z[qubit] = kind in ("Z", "Y")
    flips: dict[str, int] = {}
    effect = 0
    # parity bits are numbered over the whole circuit
    k = sum(isinstance(op, ParityCondition) for op in circuit.ops[: start + 1])
    for op in circuit.ops[start + 1 :]:
        if isinstance(op, Gate):
            _frame_gate(x, z, op.name, op.qubits)
        elif isinstance(op, Measurement):
            q = op.qubit
            flips[op.label] = int(z[q] if op.basis == "X" else x[q])
            x[q] = z[q] = 0
        elif isinstance(op, ParityCondition):
            if sum(flips.get(lab, 0) for lab in op.labels) % 2:
                effect |= 1 << k
            k += 1
        elif isinstance(op, PauliCorrection):
            if sum(flips.get(lab, 0) for lab in op.labels) % 2:
                x[op.qubit] ^= op.pauli in ("X", "Y")
                z[op.qubit] ^= op.pauli in ("Z", "Y")
    if circuit.data_qubits is not None:
        a, b = circuit.data_qubits[:2]
        for j, bit in enumerate((x[a], z[a], x[b], z[b])):
            if bit:
                effect |= 1 << (k + j)
    return effect


def frame_model(circuit: Circuit) -> FrameModel:
    n_parity = len(circuit.parity_conditions())
    if n_parity + 4 > 62:
        raise ResourceError("too many parity conditions for the frame encoding")
    sites, xe, ze = [], [], []
    for idx, op in enumerate(circuit.ops):
        if isinstance(op, NoiseSite):
            sites.append(op)
            xe.append(_propagate_single(circuit, idx, op.qubit, "X"))
            ze.append(_propagate_single(circuit, idx, op.qubit, "Z"))
    return FrameModel(tuple(sites), np.array(xe, dtype=np.int64), np.array(ze, dtype=np.int64), n_parity)


def output_frame_good(frame_bits):
    """True where the 4-bit output frame leaves ``|Phi+>`` invariant."""
    frame_bits = np.asarray(frame_bits)
    xa, za, xb, zb = ((frame_bits >> j) & 1 for j in range(4))
    return (xa == xb) & (za == zb)


@dataclass(frozen=True)
class ErrorPath:
    assignment: tuple[int, ...]
    probability: float


@dataclass(frozen=True)
class ExactResult:
    pass_prob: float
    bell_fidelity: float | None
    n_paths: int


def iter_paths(circuit: Circuit):
    """Yield every error path (one Pauli index 0..3 = I, X, Y, Z per noise site)
    with nonzero probability."""
    sites = circuit.noise_sites()
    choices = [[k for k in range(4) if s.probs[k] > 0] for s in sites]
    for assignment in itertools.product(*choices):
        prob = 1.0
        for s, k in zip(sites, assignment):
            prob *= s.probs[k]
        yield ErrorPath(tuple(assignment), prob)


def path_effect(model: FrameModel, assignment) -> int:
    eff = 0
    for i, k in enumerate(assignment):
        eff ^= int(model.branch_effects(i)[k])
    return eff


def _summarize(model: FrameModel, keys: np.ndarray, probs: np.ndarray, n_paths: int) -> ExactResult:
    passed = (keys & model.pass_mask) == 0
    p_pass = float(probs[passed].sum())
    if p_pass <= 0:
        return ExactResult(p_pass, None, n_paths)
    frames = keys[passed] >> model.n_parity
    good = output_frame_good(frames)
    fid = float(probs[passed][good].sum() / p_pass)
    return ExactResult(p_pass, fid, n_paths)


def enumerate_paths(circuit: Circuit, cap: int = PATH_CAP, merge: bool = True) -> ExactResult:
    """Exact pass probability and postselected Bell fidelity over all error paths.

    Each path's effect is the XOR of its sites' frame effects.  With
    ``merge=False`` all paths are materialised (raises :class:`ResourceError`
    above ``cap``); with ``merge=True`` paths sharing an effect are summed after
    every site, which is exact and keeps the work bounded by the number of
    distinct effects.
    """
    model = frame_model(circuit)
    counts = [int(np.count_nonzero(np.array(s.probs) > 0)) for s in model.sites]
    n_paths = math.prod(counts)
    if not merge and n_paths > cap:
        raise ResourceError(f"{n_paths} error paths exceed cap {cap}")
    keys = np.zeros(1, dtype=np.int64)
    probs = np.ones(1)
    for i, site in enumerate(model.sites):
        p = np.asarray(site.probs, dtype=float)
        nz = p > 0
        eff = model.branch_effects(i)[nz]
        keys = (keys[:, None] ^ eff[None, :]).ravel()
        probs = (probs[:, None] * p[nz][None, :]).ravel()
        if merge:
            keys, inv = np.unique(keys, return_inverse=True)
            probs = np.bincount(inv.ravel(), weights=probs, minlength=keys.size)
            if keys.size > cap:
                raise ResourceError(f"{keys.size} distinct effects exceed cap {cap}")
    return _summarize(model, keys, probs, n_paths)


# -- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class ShotBatch:
    passed: np.ndarray
    frames: np.ndarray


def sample_frames(circuit: Circuit, n_shots: int, rng, model: FrameModel | None = None) -> ShotBatch:
    """Sample ``n_shots`` error paths and return their pass flags and output frames."""
    model = frame_model(circuit) if model is None else model
    effects = np.zeros(n_shots, dtype=np.int64)
    for i, site in enumerate(model.sites):
        cdf = np.cumsum(site.probs)
        choice = np.searchsorted(cdf, rng.random(n_shots), side="right").clip(0, 3)
        effects ^= model.branch_effects(i)[choice]
    passed = (effects & model.pass_mask) == 0
    return ShotBatch(passed, effects >> model.n_parity)


@dataclass(frozen=True)
class Tally:
    """Additive shot counts; merging tallies is plain summation."""

    shots: int = 0
    passed: int = 0
    obs_counts: tuple[int, int, int] = (0, 0, 0)
    obs_sums: tuple[int, int, int] = (0, 0, 0)

    def __add__(self, other: "Tally") -> "Tally":
        return Tally(
            self.shots + other.shots,
            self.passed + other.passed,
            tuple(a + b for a, b in zip(self.obs_counts, other.obs_counts)),
            tuple(a + b for a, b in zip(self.obs_sums, other.obs_sums)),
        )


def _observable_values(frames: np.ndarray) -> np.ndarray:
    """Measured eigenvalues of XX, YY, ZZ (signed as in ``|Phi+>``) per frame."""
    xa, za, xb, zb = ((frames >> j) & 1 for j in range(4))
    flip_xx = za ^ zb
    flip_yy = (xa ^ za) ^ (xb ^ zb)
    flip_zz = xa ^ xb
    return np.stack([1 - 2 * flip_xx, -(1 - 2 * flip_yy), 1 - 2 * flip_zz])


def _tally_shard(circuit: Circuit, n_shots: int, offset: int, seed_seq, model=None) -> Tally:
    rng = np.random.default_rng(seed_seq)
    batch = sample_frames(circuit, n_shots, rng, model)
    which = (np.arange(offset, offset + n_shots) % 3)
    vals = _observable_values(batch.frames)
    counts, sums = [], []
    for k in range(3):
        sel = batch.passed & (which == k)
        counts.append(int(sel.sum()))
        sums.append(int(vals[k][sel].sum()))
    return Tally(n_shots, int(batch.passed.sum()), tuple(counts), tuple(sums))


@dataclass(frozen=True)
class Estimate:
    fidelity: float
    fidelity_stderr: float
    pass_rate: float
    pass_stderr: float
    tally: Tally
    seed: int | None


def estimate_from_tally(tally: Tally, seed=None) -> Estimate:
    if tally.shots == 0:
        raise EstimationError("no shots")
    pr = tally.passed / tally.shots
    pse = math.sqrt(pr * (1 - pr) / tally.shots)
    if min(tally.obs_counts) == 0:
        raise EstimationError("no postselected shots for at least one observable")
    means = [s / c for s, c in zip(tally.obs_sums, tally.obs_counts)]
    var = [(1 - m * m) / c for m, c in zip(means, tally.obs_counts)]
    fid = (1 + means[0] - means[1] + means[2]) / 4
    fse = math.sqrt(sum(var)) / 4
    return Estimate(fid, fse, pr, pse, tally, seed)


def _shard_job(args):
    circuit, n, offset, ss = args
    return _tally_shard(circuit, n, offset, ss)


def estimate_bell_fidelity(
    circuit: Circuit,
    n_shots: int,
    seed: int = 0,
    workers: int = 1,
    shard_size: int = SHARD_SIZE,
) -> Estimate:
    """Monte Carlo Bell fidelity and pass rate.

    Shot ``i`` measures XX, YY, ZZ in round-robin order (``i % 3``); the
    estimate ``(1 + <XX> - <YY> + <ZZ>) / 4`` uses postselected shots only.
    Shots are cut into fixed shards, each with its own child of
    ``SeedSequence(seed)``, so the result does not depend on ``workers``.
    """
    if circuit.data_qubits is None or len(circuit.data_qubits) != 2:
        raise UnsupportedCircuitError("circuit must designate two data qubits")
    n_shards = max(1, math.ceil(n_shots / shard_size))
    seqs = np.random.SeedSequence(seed).spawn(n_shards)
    jobs = []
    for k in range(n_shards):
        n = min(shard_size, n_shots - k * shard_size)
        jobs.append((circuit, n, k * shard_size, seqs[k]))
    if workers > 1 and n_shards > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(_shard_job, jobs))
    else:
        model = frame_model(circuit)
        tallies = [_tally_shard(c, n, off, ss, model) for c, n, off, ss in jobs]
    total = Tally()
    for t in tallies:
        total = total + t
    return estimate_from_tally(total, seed)


def estimate_with_tableau(circuit: Circuit, n_shots: int, seed: int = 0) -> Estimate:
    """Slow reference estimator: one tableau simulation per shot."""
    rng = np.random.default_rng(seed)
    counts = [0, 0, 0]
    sums = [0, 0, 0]
    passed = 0
    names = ("XX", "YY", "ZZ")
    for i in range(n_shots):
        rec = run_shot(circuit, rng)
        if not rec.passed:
            continue
        passed += 1
        k = i % 3
        ev = rec.expectations[names[k]]
        outcome = ev if ev != 0 else (1 if rng.random() < 0.5 else -1)
        counts[k] += 1
        sums[k] += outcome
    return estimate_from_tally(Tally(n_shots, passed, tuple(counts), tuple(sums)), seed)
