"""Closed-form fidelities and postselection rates.

All ``p`` arguments use the MAIN depolarizing convention (weights ``1 - 3p/4``
and ``p/4``).  ``F`` is the Bell fidelity of the unprotected noisy pair, related
to ``p`` by :func:`pcslab.noise.fidelity_from_p`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ValidationError

F_FLOOR = 0.25


@dataclass(frozen=True)
class PurificationPoint:
    F_in: float
    F_out: float
    rate: float
    qubit_cost: int

    def __post_init__(self):
        for name in ("F_out", "rate"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValidationError(f"{name}={v} outside [0, 1]")


def _check_p(*ps: float) -> None:
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p={p} outside [0, 1]")


def _check_F(F: float, lo: float = 0.0) -> None:
    if not lo - 1e-15 <= F <= 1 + 1e-15:
        raise DomainError(f"F={F} outside [{lo}, 1]")


# -- BBPSSW ------------------------------------------------------------------


def bbpssw_step(F: float) -> PurificationPoint:
    """One recurrence round on two Werner pairs of fidelity ``F``."""
    _check_F(F)
    e = (1 - F) / 3
    c = F**2 + 2 * F * (1 - F) / 3 + 5 * e**2
    return PurificationPoint(F, (F**2 + e**2) / c, c, 4)


def bbpssw_recursive(F: float, rounds: int) -> PurificationPoint:
    """``rounds`` iterations; ``rate`` is the product of per-round success
    probabilities and ``qubit_cost`` is ``2**(rounds + 1)``."""
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    f, rate = F, 1.0
    for _ in range(rounds):
        pt = bbpssw_step(f)
        f, rate = pt.F_out, rate * pt.rate
    return PurificationPoint(F, f, rate, 2 ** (rounds + 1))


def bbpssw_sequence(F: float, rounds: int) -> list[float]:
    out = [F]
    for _ in range(rounds):
        out.append(bbpssw_step(out[-1]).F_out)
    return out


# -- PCS X -------------------------------------------------------------------


def pcs_x_rate(p1: float, p2: float) -> float:
    return 0.25 * ((p1 - 2) * p1 + 2) * ((p2 - 2) * p2 + 2)


def pcs_x_fidelity(p1: float, p2: float) -> float:
    num = (
        (9 * (p1 - 2) * p1 + 10) * p2**2
        + 2 * (20 - 9 * p1) * p1 * p2
        + 2 * p1 * (5 * p1 - 12)
        - 24 * p2
        + 16
    )
    return num / (4 * ((p1 - 2) * p1 + 2) * ((p2 - 2) * p2 + 2))


def pcs_x_point_p(p1: float, p2: float) -> PurificationPoint:
    """Bell pair with one X check per half; depolarizing ``p1``/``p2`` per half."""
    _check_p(p1, p2)
    F_in = 1 - 0.75 * (p1 + p2) + 0.75 * p1 * p2
    return PurificationPoint(F_in, pcs_x_fidelity(p1, p2), pcs_x_rate(p1, p2), 4)


def pcs_x_point_F(F: float) -> PurificationPoint:
    _check_F(F, F_FLOOR)
    return PurificationPoint(F, 9 * F**2 / (1 + 2 * F) ** 2, (1 + 2 * F) ** 2 / 9, 4)


# -- PCS X&Z -----------------------------------------------------------------


def pcs_xz_rate(p1: float, p2: float) -> float:
    return (p1 - 2) * (p1 * (2 * p1 - 3) + 2) * (p2 - 2) * (p2 * (2 * p2 - 3) + 2) / 16


def pcs_xz_fidelity(p1: float, p2: float) -> float:
    num = (
        (p1 * (13 * p1 - 25) + 14) * p2**2
        - 25 * (p1 - 2) * p1 * p2
        + 14 * (p1 - 2) * p1
        - 28 * p2
        + 16
    )
    return num / (4 * (p1 * (2 * p1 - 3) + 2) * (p2 * (2 * p2 - 3) + 2))


def pcs_xz_point_p(p1: float, p2: float) -> PurificationPoint:
    _check_p(p1, p2)
    F_in = 1 - 0.75 * (p1 + p2) + 0.75 * p1 * p2
    return PurificationPoint(F_in, pcs_xz_fidelity(p1, p2), pcs_xz_rate(p1, p2), 6)


def pcs_xz_point_F(F: float) -> PurificationPoint:
    _check_F(F, F_FLOOR)
    s = math.sqrt(max(12 * F - 3, 0.0))
    rate = (3 + 6 * F - s + 4 * F * s) ** 2 / 324
    f_out = (1 + 52 * F**2 - s - 2 * F * (4 + s)) / (s - 1 - 8 * F) ** 2
    return PurificationPoint(F, f_out, rate, 6)


# -- single-check channel ----------------------------------------------------


def appendix_half_channel(p1: float) -> tuple[float, float]:
    """``(c1, F'_1)`` for one X check on one Bell half, the other half ideal."""
    _check_p(p1)
    c1 = 0.5 * (2 + p1 * (p1 - 2))
    f1 = (8 + p1 * (5 * p1 - 12)) / (8 + 4 * p1 * (p1 - 2))
    return c1, f1


# -- crossover ---------------------------------------------------------------

SCHEMES = {
    "PCS_X": lambda F: pcs_x_point_F(F).F_out,
    "PCS_XZ": lambda F: pcs_xz_point_F(F).F_out,
    "BBPSSW": lambda F: bbpssw_step(F).F_out,
}


@dataclass(frozen=True)
class Crossover:
    scheme: str
    roots: tuple[float, ...]
    intervals: tuple[tuple[float, float], ...]


def crossover_region(scheme: str, n_grid: int = 2001, tol: float = 1e-12) -> Crossover:
    """Roots of ``F'(F) - F`` on ``[1/4, 1]`` and the intervals where ``F' > F``.

    Sign changes on a grid are refined with Brent's method; grid points and the
    domain ends where the gap vanishes to ``tol`` also count as roots.
    """
    try:
        f = SCHEMES[scheme]
    except KeyError:
        raise ValidationError(f"unknown scheme {scheme}; expected one of {sorted(SCHEMES)}") from None

    def gap(F):
        return f(F) - F

    grid = np.linspace(F_FLOOR, 1.0, n_grid)
    vals = np.array([gap(F) for F in grid])
    roots: list[float] = []
    for i, (F, g) in enumerate(zip(grid, vals)):
        if abs(g) <= tol:
            roots.append(float(F))
        elif i + 1 < len(grid) and abs(vals[i + 1]) > tol and g * vals[i + 1] < 0:
            roots.append(brentq(gap, F, grid[i + 1], xtol=1e-15, rtol=1e-15))
    roots = sorted(set(roots))
    # merge near-duplicates produced by flat zero runs
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-9:
            merged.append(r)
    edges = [F_FLOOR, *merged, 1.0]
    intervals = []
    for lo, hi in zip(edges, edges[1:]):
        if hi - lo > 1e-9 and gap(0.5 * (lo + hi)) > 0:
            intervals.append((lo, hi))
    return Crossover(scheme, tuple(merged), tuple(intervals))
