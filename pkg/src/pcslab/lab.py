"""Experiment configuration, sweeps, engine cross-checks and figure series.

Configuration files are flat ``key = value`` text (``#`` comments).  Grids are
written either as a comma list ``0, 0.1, 0.2`` or as an inclusive range
``start:stop:step``.  Recognised keys are the fields of
:class:`ExperimentConfig`.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import analytic
from .circuit import Circuit
from .dense import DENSITY_CAP, simulate_circuit
from .errors import ResourceError, UnsupportedCircuitError, ValidationError
from .noise import fidelity_from_p, p_from_fidelity
from .protocols import (
    NoiseSpec,
    build_bbpssw_round,
    build_recursive_pcs,
    build_swap_with_pcs,
    build_teleported_pcs,
)
from .stabilizer import enumerate_paths, estimate_bell_fidelity

SCENARIOS = ("pcs_x_pair", "pcs_xz_pair", "recursive_pcs", "swap", "teleported_pcs", "bbpssw")
ENGINES = ("analytic", "enumerate", "monte_carlo", "oracle")
SWEEP_PARAMS = ("p_channel", "F_in")
CSV_COLUMNS = (
    "scenario", "engine", "r", "p_channel", "p_1q", "p_2q", "F_in", "n_shots",
    "pass_rate", "pass_stderr", "fidelity", "fidelity_stderr", "seed", "config_hash",
)
GATE_NOISE_PLACEMENT = (
    "gate noise: MAIN depolarizing after every gate, independent on each target; "
    "channel noise: once on every transmitted qubit (data and check ancillas); "
    "memory noise: same window on memory qubits and their ancillas"
)
GATE_SIGMA = 4.0
WARN_SIGMA = 3.0
EXACT_TOL = 1e-9


def parse_grid(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        parts = [float(t) for t in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValidationError(f"range grid must be start:stop:step, got {text!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    vals = [float(t) for t in text.replace(",", " ").split()]
    return vals


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "pcs_xz_pair"
    engine: str = "enumerate"
    sweep: str = "p_channel"
    grid: tuple[float, ...] = (0.0, 0.1, 0.2)
    r: int = 0
    check_mode: str = "XZ"
    protect: str = "flying"
    rounds: int = 1
    p_1q: float = 0.0
    p_2q: float = 0.0
    p_memory: float | None = None
    n_shots: int = 0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"scenario must be one of {SCENARIOS}")
        if self.engine not in ENGINES:
            raise ValidationError(f"engine must be one of {ENGINES}")
        if self.sweep not in SWEEP_PARAMS:
            raise ValidationError(f"sweep must be one of {SWEEP_PARAMS}")
        if not self.grid:
            raise ValidationError("grid must be nonempty")
        lo = 0.25 if self.sweep == "F_in" else 0.0
        for v in self.grid:
            if not lo <= v <= 1.0:
                raise ValidationError(f"grid value {v} outside [{lo}, 1]")
        for name in ("p_1q", "p_2q"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} outside [0, 1]")
        if self.p_memory is not None and not 0.0 <= self.p_memory <= 1.0:
            raise ValidationError("p_memory outside [0, 1]")
        if self.r < 0 or self.rounds < 1 or self.n_shots < 0 or self.workers < 1:
            raise ValidationError("r >= 0, rounds >= 1, n_shots >= 0, workers >= 1 required")
        if self.engine == "monte_carlo" and self.n_shots == 0:
            raise ValidationError("monte_carlo needs n_shots > 0")

    @property
    def gate_noise(self) -> tuple[float, float] | None:
        if self.p_1q == 0 and self.p_2q == 0:
            return None
        return (self.p_1q, self.p_2q)

    def canonical(self) -> str:
        d = asdict(self)
        d.pop("workers")  # results do not depend on it
        return "\n".join(f"{k} = {_fmt_value(d[k])}" for k in sorted(d))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]

    def label(self) -> str:
        if self.scenario == "swap":
            return f"swap[{self.check_mode},{self.protect}]"
        if self.scenario == "bbpssw":
            return f"bbpssw[{self.rounds}]"
        if self.scenario == "recursive_pcs":
            return f"recursive_pcs[{self.r}]"
        return self.scenario


def _fmt_value(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return "none" if v is None else str(v)


_INT_KEYS = ("r", "rounds", "n_shots", "seed", "workers")
_FLOAT_KEYS = ("p_1q", "p_2q")


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ValidationError(f"malformed config: {exc}") from None
    raw = dict(cp["experiment"])
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    kw: dict = {}
    try:
        for k, v in raw.items():
            if k == "grid":
                kw[k] = parse_grid(v)
            elif k in _INT_KEYS:
                kw[k] = int(v)
            elif k in _FLOAT_KEYS:
                kw[k] = float(v)
            elif k == "p_memory":
                kw[k] = None if v.lower() in ("", "none") else float(v)
            else:
                kw[k] = v.strip()
    except ValueError as exc:
        raise ValidationError(f"bad config value: {exc}") from None
    return ExperimentConfig(**kw)


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# -- grid points -------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    p_channel: float | None
    F_in: float


def grid_points(cfg: ExperimentConfig) -> list[Point]:
    pts = []
    for v in cfg.grid:
        if cfg.sweep == "p_channel":
            pts.append(Point(v, fidelity_from_p(v)))
        else:
            pts.append(Point(p_from_fidelity(v), v))
    return pts


def build_circuit(cfg: ExperimentConfig, pt: Point) -> Circuit:
    p, gn = pt.p_channel, cfg.gate_noise
    if cfg.scenario == "pcs_x_pair":
        return build_recursive_pcs(0, p, p, gn, mode="X")
    if cfg.scenario == "pcs_xz_pair":
        return build_recursive_pcs(0, p, p, gn)
    if cfg.scenario == "recursive_pcs":
        return build_recursive_pcs(cfg.r, p, p, gn)
    if cfg.scenario == "swap":
        return build_swap_with_pcs(cfg.check_mode, NoiseSpec(p, cfg.p_memory, gn), cfg.protect, cfg.r)
    if cfg.scenario == "teleported_pcs":
        return build_teleported_pcs(NoiseSpec(p, cfg.p_memory, gn))
    if cfg.rounds != 1:
        raise UnsupportedCircuitError("circuit engines cover one BBPSSW round; use engine analytic")
    return build_bbpssw_round(pt.F_in)


def _analytic(cfg: ExperimentConfig, pt: Point) -> tuple[float, float]:
    if cfg.gate_noise is not None:
        raise UnsupportedCircuitError("closed forms exclude gate noise")
    if cfg.scenario == "pcs_x_pair":
        res = analytic.pcs_x_point_p(pt.p_channel, pt.p_channel)
    elif cfg.scenario == "pcs_xz_pair" or (cfg.scenario == "recursive_pcs" and cfg.r == 0):
        res = analytic.pcs_xz_point_p(pt.p_channel, pt.p_channel)
    elif cfg.scenario == "bbpssw":
        res = analytic.bbpssw_recursive(pt.F_in, cfg.rounds)
    else:
        raise UnsupportedCircuitError(f"no closed form for scenario {cfg.label()}")
    return res.rate, res.F_out


@dataclass(frozen=True)
class Row:
    scenario: str
    engine: str
    r: int
    p_channel: float | None
    p_1q: float
    p_2q: float
    F_in: float
    n_shots: int
    pass_rate: float
    pass_stderr: float
    fidelity: float | None
    fidelity_stderr: float
    seed: int
    config_hash: str


def point_seed(seed: int, index: int) -> int:
    """Independent stream seed for grid point ``index`` of a master ``seed``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def evaluate_point(cfg: ExperimentConfig, pt: Point, index: int = 0, engine: str | None = None) -> Row:
    engine = engine or cfg.engine
    n_shots, pse, fse = 0, 0.0, 0.0
    if engine == "analytic":
        rate, fid = _analytic(cfg, pt)
    else:
        circ = build_circuit(cfg, pt)
        if engine == "enumerate":
            res = enumerate_paths(circ)
            rate, fid = res.pass_prob, res.bell_fidelity
        elif engine == "oracle":
            if circ.n_qubits > DENSITY_CAP:
                raise ResourceError(
                    f"oracle engine supports at most {DENSITY_CAP} qubits; {cfg.label()} needs {circ.n_qubits}"
                )
            res = simulate_circuit(circ)
            rate, fid = res.pass_prob, res.bell_fidelity
        elif engine == "monte_carlo":
            if cfg.n_shots <= 0:
                raise ValidationError("monte_carlo needs n_shots > 0")
            est = estimate_bell_fidelity(circ, cfg.n_shots, point_seed(cfg.seed, index), cfg.workers)
            rate, fid, pse, fse = est.pass_rate, est.fidelity, est.pass_stderr, est.fidelity_stderr
            n_shots = cfg.n_shots
        else:
            raise ValidationError(f"unknown engine {engine}")
    return Row(
        cfg.label(), engine, cfg.r, pt.p_channel, cfg.p_1q, cfg.p_2q, pt.F_in, n_shots,
        rate, pse, fid, fse, cfg.seed, cfg.config_hash(),
    )


@dataclass
class SweepResult:
    rows: list[Row] = field(default_factory=list)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        d = asdict(row) if not isinstance(row, dict) else row
        w.writerow([_cell(d[c]) for c in columns])
    return buf.getvalue()


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Evaluate every grid point with the configured engine."""
    return SweepResult([evaluate_point(cfg, pt, i) for i, pt in enumerate(grid_points(cfg))])


# -- engine comparison -------------------------------------------------------


def supported_engines(cfg: ExperimentConfig) -> list[str]:
    """Engines applicable to the scenario at its first grid point."""
    out = []
    pt = grid_points(cfg)[0]
    for eng in ENGINES:
        if eng == "monte_carlo" and cfg.n_shots == 0:
            continue
        try:
            if eng == "analytic":
                _analytic(cfg, pt)
            else:
                circ = build_circuit(cfg, pt)
                if eng == "oracle" and circ.n_qubits > DENSITY_CAP:
                    continue
        except (UnsupportedCircuitError, ResourceError):
            continue
        out.append(eng)
    return out


@dataclass
class Comparison:
    rows: list[Row]
    max_exact_deviation: float
    max_sigma: float
    exact_ok: bool
    mc_ok: bool
    mc_warn: bool

    def report(self) -> str:
        lines = [f"{'engine':<12} {'p_channel':>10} {'F_in':>8} {'pass_rate':>12} {'fidelity':>12}"]
        for r in self.rows:
            fid = "nan" if r.fidelity is None else f"{r.fidelity:.10f}"
            p = "" if r.p_channel is None else f"{r.p_channel:.4f}"
            lines.append(f"{r.engine:<12} {p:>10} {r.F_in:>8.4f} {r.pass_rate:>12.10f} {fid:>12}")
        lines.append(f"max exact deviation: {self.max_exact_deviation:.3e} (tolerance {EXACT_TOL:g})")
        if not math.isnan(self.max_sigma):
            lines.append(f"max Monte Carlo sigma distance: {self.max_sigma:.2f} (gate {GATE_SIGMA}, warn {WARN_SIGMA})")
        status = "PASS" if self.exact_ok and self.mc_ok else "FAIL"
        if status == "PASS" and self.mc_warn:
            status = "PASS (warning: beyond 3 sigma)"
        lines.append(f"status: {status}")
        return "\n".join(lines)


def compare_engines(cfg: ExperimentConfig, engines=None) -> Comparison:
    """Run several engines on every grid point and measure their agreement."""
    engines = list(engines) if engines is not None else supported_engines(cfg)
    exact = [e for e in engines if e != "monte_carlo"]
    if len(engines) < 2:
        raise ValidationError(f"scenario {cfg.label()} is supported by fewer than two engines")
    rows: list[Row] = []
    dev, sig = 0.0, float("nan")
    for i, pt in enumerate(grid_points(cfg)):
        by = {e: evaluate_point(cfg, pt, i, e) for e in engines}
        rows.extend(by.values())
        for a in exact:
            for b in exact:
                ra, rb = by[a], by[b]
                dev = max(dev, abs(ra.pass_rate - rb.pass_rate))
                if ra.fidelity is not None and rb.fidelity is not None:
                    dev = max(dev, abs(ra.fidelity - rb.fidelity))
        if "monte_carlo" in by and exact:
            ref, mc = by[exact[0]], by["monte_carlo"]
            s = _sigma(mc.pass_rate, ref.pass_rate, mc.pass_stderr)
            if mc.fidelity is not None and ref.fidelity is not None:
                s = max(s, _sigma(mc.fidelity, ref.fidelity, mc.fidelity_stderr))
            sig = s if math.isnan(sig) else max(sig, s)
    mc_ok = math.isnan(sig) or sig <= GATE_SIGMA
    mc_warn = not math.isnan(sig) and sig > WARN_SIGMA
    return Comparison(rows, dev, sig, dev <= EXACT_TOL, mc_ok, mc_warn)


def _sigma(est: float, ref: float, se: float) -> float:
    if se == 0:
        return 0.0 if abs(est - ref) < 1e-12 else math.inf
    return abs(est - ref) / se


# -- figure series -----------------------------------------------------------

FIGURES = ("fig2a", "fig2b", "fig3b", "fig7a", "fig7b", "fig8")
REFERENCE_GATE_NOISE = (0.001, 0.01)
CHANNEL_GRID = tuple(round(0.05 * i, 2) for i in range(11))


@dataclass
class FigureData:
    name: str
    columns: tuple[str, ...]
    rows: list[dict]
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows, self.columns)


def _f_grid(step: float = 0.01) -> list[float]:
    n = int(round(0.75 / step))
    return [round(0.25 + i * step, 10) for i in range(n + 1)]


def _analytic_figure(name: str) -> FigureData:
    rows = []
    for F in _f_grid():
        if name == "fig2a":
            rows.append({"F": F, "F_pcs_x": analytic.pcs_x_point_F(F).F_out,
                         "F_bbpssw1": analytic.bbpssw_step(F).F_out, "diagonal": F})
        elif name == "fig2b":
            rows.append({"F": F, "F_pcs_xz": analytic.pcs_xz_point_F(F).F_out,
                         "F_bbpssw2": analytic.bbpssw_recursive(F, 2).F_out,
                         "F_bbpssw3": analytic.bbpssw_recursive(F, 3).F_out, "diagonal": F})
        else:
            rows.append({"F": F, "c_pcs_xz": analytic.pcs_xz_point_F(F).rate,
                         "c_bbpssw3": analytic.bbpssw_recursive(F, 3).rate})
    return FigureData(name, tuple(rows[0]), rows, ["closed-form curves"])


def _series(cfg: ExperimentConfig, engine: str) -> list[Row]:
    return [evaluate_point(cfg, pt, i, engine) for i, pt in enumerate(grid_points(cfg))]


def ordering_check(lower: list[Row], upper: list[Row], sigma: float = WARN_SIGMA) -> list[bool]:
    """Per grid point: ``upper`` fidelity >= ``lower`` fidelity within ``sigma``."""
    out = []
    for lo, hi in zip(lower, upper):
        se = math.hypot(lo.fidelity_stderr, hi.fidelity_stderr)
        out.append(hi.fidelity - lo.fidelity >= -sigma * se - 1e-12)
    return out


def reproduce_figure(
    name: str, n_shots: int = 100_000, seed: int = 0, engine: str = "monte_carlo", workers: int = 1
) -> FigureData:
    """Series of the named figure.

    ``fig2a``, ``fig2b`` and ``fig3b`` are closed-form curves over ``F``.
    ``fig7a``, ``fig7b`` and ``fig8`` are simulated over the channel grid
    0, 0.05, ..., 0.5 with gate noise ``(0.001, 0.01)``; their notes record
    ordering checks, since only orderings are available to compare against.
    """
    if name not in FIGURES:
        raise ValidationError(f"unknown figure {name!r}; expected one of {FIGURES}")
    if name in ("fig2a", "fig2b", "fig3b"):
        return _analytic_figure(name)
    if engine not in ("monte_carlo", "enumerate"):
        raise ValidationError("fig7a, fig7b and fig8 use engine monte_carlo or enumerate")
    base = ExperimentConfig(
        scenario="swap", engine=engine, grid=CHANNEL_GRID, p_1q=REFERENCE_GATE_NOISE[0],
        p_2q=REFERENCE_GATE_NOISE[1], n_shots=n_shots if engine == "monte_carlo" else 0,
        seed=seed, workers=workers,
    )
    notes = [GATE_NOISE_PLACEMENT]
    if name in ("fig7a", "fig7b"):
        protect = "flying" if name == "fig7a" else "flying+memory"
        unprot = _series(replace(base, check_mode="none", protect="none"), engine)
        prot = _series(replace(base, check_mode="XZ", protect=protect), engine)
        ok = ordering_check(unprot, prot)
        rows = []
        for u, q, good in zip(unprot, prot, ok):
            rows.append({
                "p_channel": u.p_channel, "F_unprotected": u.fidelity, "F_unprotected_stderr": u.fidelity_stderr,
                "F_protected": q.fidelity, "F_protected_stderr": q.fidelity_stderr,
                "pass_rate": q.pass_rate, "pass_stderr": q.pass_stderr, "protected_ge_unprotected": int(good),
            })
        notes.append(f"protected >= unprotected within 3 sigma at {sum(ok)}/{len(ok)} grid points")
        return FigureData(name, tuple(rows[0]), rows, notes)
    series = [_series(replace(base, scenario="recursive_pcs", r=r), engine) for r in range(3)]
    ok10 = ordering_check(series[0], series[1])
    ok21 = ordering_check(series[1], series[2])
    rows = []
    for i in range(len(CHANNEL_GRID)):
        row = {"p_channel": series[0][i].p_channel}
        for r in range(3):
            row[f"F_r{r}"] = series[r][i].fidelity
            row[f"F_r{r}_stderr"] = series[r][i].fidelity_stderr
            row[f"pass_r{r}"] = series[r][i].pass_rate
        row["ordered"] = int(ok10[i] and ok21[i])
        rows.append(row)
    qubits = [build_recursive_pcs(r).n_qubits for r in range(3)]
    notes.append(f"F(r=2) >= F(r=1) >= F(r=0) within 3 sigma at {sum(a and b for a, b in zip(ok10, ok21))}/{len(rows)} grid points")
    notes.append(f"qubits per recursion level: {qubits}")
    return FigureData(name, tuple(rows[0]), rows, notes)
