"""The consumer game for a fixed producer profile.

Given QoS levels ``t_0..t_{n-1}``, a consumer of type ``d`` may use any
producer with ``t_j <= d`` and goes to the least loaded one. This module
computes the resulting loads, builds an explicit symmetric equilibrium by
the vessel-pouring construction, turns it into a pure one when the measure
has no atoms, and checks candidate equilibria.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AtomsPresent, CellMismatch, NegativeInput, NotSorted
from .measure import TAIL, TOL, Measure

NOCONSUME = "noconsume"
Target = Union[int, str]

# remainders below this are treated as zero when finishing a pour
_SNAP = 1e-13


@dataclass(frozen=True)
class LoadVector:
    noconsume: float
    loads: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.loads)

    def total(self) -> float:
        return self.noconsume + sum(self.loads)

    def to_dict(self) -> dict:
        return {"noconsume": self.noconsume, "loads": list(self.loads)}


@dataclass(frozen=True)
class Cell:
    lo: float
    hi: float
    weights: dict
    closed: bool = False  # True only for the last cell, which includes 1

    def mass(self, mu: Measure) -> float:
        return mu.mass_co(self.lo, TAIL if self.closed else self.hi)


@dataclass(frozen=True)
class ConsumerStrategy:
    """One weight profile per effective type (cell of consumer types)."""

    n: int
    cells: tuple[Cell, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "cells": [
                {"lo": c.lo, "hi": c.hi, "closed": c.closed,
                 "weights": {str(k): w for k, w in c.weights.items()}}
                for c in self.cells
            ],
        }


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    target: Target
    closed: bool = False

    def mass(self, mu: Measure) -> float:
        return mu.mass_co(self.lo, TAIL if self.closed else self.hi)


@dataclass(frozen=True)
class PureAssignment:
    n: int
    pieces: tuple[Piece, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "pieces": [{"lo": p.lo, "hi": p.hi, "closed": p.closed, "target": p.target}
                       for p in self.pieces],
        }


@dataclass
class EquilibriumReport:
    ok: bool
    loads: LoadVector
    worst_violation: float
    problems: list[str] = field(default_factory=list)


def add_water(levels: Sequence[float], m: float, tol: float = TOL) -> list[float]:
    """Pour ``m`` into vessels with nonincreasing ``levels``.

    Liquid enters at the rightmost vessel and spills left over one-way
    valves; returns how much each vessel rises. Runs in O(n) using the
    running surface height of the filled suffix.
    """
    n = len(levels)
    if n == 0:
        raise NegativeInput("need at least one vessel")
    if m < 0 or any(x < 0 for x in levels):
        raise NegativeInput("levels and poured mass must be nonnegative")
    for a, b in zip(levels, levels[1:]):
        if b > a + tol:
            raise NotSorted(f"levels must be nonincreasing, got {a} then {b}")
    if m == 0:
        return [0.0] * n

    height = levels[-1]  # surface of the filled suffix i..n-1
    poured = 0.0
    start = n - 1
    for i in range(n - 1, -1, -1):
        width = n - i
        rest = m - poured
        if i > 0:
            room = width * max(0.0, levels[i - 1] - height)
            amount = rest if rest - room <= _SNAP * max(1.0, m) else room
        else:
            amount = rest
        height += amount / width
        poured += amount
        start = i
        if amount == rest:
            break
    return [0.0] * start + [max(0.0, height - levels[j]) for j in range(start, n)]


def _sorted_view(levels: Sequence[float]):
    order = sorted(range(len(levels)), key=lambda j: levels[j])
    return order, [float(levels[j]) for j in order]


def compute_loads(mu: Measure, levels: Sequence[float], tol: float = TOL) -> LoadVector:
    """Equilibrium loads: repeatedly split off the block with the largest average."""
    n = len(levels)
    if n == 0:
        return LoadVector(mu.total, ())
    order, ts = _sorted_view(levels)
    F = [mu.prefix(t) for t in ts] + [mu.total]
    sorted_loads = [0.0] * n
    k = 0
    while k < n:
        avgs = [(F[kp] - F[k]) / (kp - k) for kp in range(k + 1, n + 1)]
        top = max(avgs)
        kp = k + 1 + max(i for i, a in enumerate(avgs) if a >= top - tol)
        avg = (F[kp] - F[k]) / (kp - k)
        for j in range(k, kp):
            sorted_loads[j] = avg
        k = kp
    loads = [0.0] * n
    for pos, j in enumerate(order):
        loads[j] = sorted_loads[pos]
    return LoadVector(F[0], tuple(loads))


def loads_many(mu: Measure, profiles) -> tuple[np.ndarray, np.ndarray]:
    """Loads for many profiles at once, rows of ``profiles``.

    Uses the closed form: with sorted levels and ``F_n = mu(T)``, the k-th
    sorted load is ``max_{j>k} (F(t_j) - noconsume - sum_{i<k} l_i) / (j-k)``.
    Returns ``(noconsume, loads)`` with loads in the original column order.
    """
    P = np.atleast_2d(np.asarray(profiles, dtype=float))
    rows, n = P.shape
    if n == 0:
        return np.full(rows, mu.total), np.zeros((rows, 0))
    order = np.argsort(P, axis=1, kind="stable")
    S = np.take_along_axis(P, order, axis=1)
    F = np.concatenate([mu.prefix_many(S), np.full((rows, 1), mu.total)], axis=1)
    noconsume = F[:, 0].copy()
    used = noconsume.copy()
    L = np.empty((rows, n))
    for k in range(n):
        steps = np.arange(1, n - k + 1, dtype=float)
        L[:, k] = ((F[:, k + 1:] - used[:, None]) / steps).max(axis=1)
        used += L[:, k]
    out = np.empty_like(L)
    np.put_along_axis(out, order, L, axis=1)
    return noconsume, out


def symmetric_equilibrium(mu: Measure, levels: Sequence[float], tol: float = TOL) -> ConsumerStrategy:
    """Build a symmetric consumer equilibrium by pouring cell after cell.

    Producers are visited in increasing QoS order. The consumers that
    become able to use producer ``i`` but not ``i+1`` are poured into vessel
    ``i`` and spill left as needed; the rises divided by the poured amount
    are that cell's weights.
    """
    n = len(levels)
    if n == 0:
        return ConsumerStrategy(0, (Cell(0.0, 1.0, {NOCONSUME: 1.0}, closed=True),))
    order, ts = _sorted_view(levels)
    F = [mu.prefix(t) for t in ts] + [mu.total]

    cells = []
    if ts[0] > 0:
        cells.append(Cell(0.0, ts[0], {NOCONSUME: 1.0}))
    vessels: list[float] = []
    for i in range(n):
        vessels.append(0.0)
        if i < n - 1 and ts[i] == ts[i + 1]:
            continue  # empty cell; the tied producer joins at the next value
        m = F[i + 1] - F[i]
        if m > tol:
            rise = add_water(vessels, m, tol)
            weights = {order[j]: r / m for j, r in enumerate(rise) if r > 0}
        else:
            # no mass here: send it where an infinitesimal pour would go
            block = [j for j in range(i + 1) if vessels[j] <= vessels[i] + tol]
            weights = {order[j]: 1.0 / len(block) for j in block}
            rise = [weights.get(order[j], 0.0) * m for j in range(i + 1)]
        vessels = [v + r for v, r in zip(vessels, rise)]
        last = i == n - 1
        cells.append(Cell(ts[i], 1.0 if last else ts[i + 1], weights, closed=last))
    return ConsumerStrategy(n, tuple(cells))


def strategy_loads(mu: Measure, strategy: Union[ConsumerStrategy, PureAssignment]) -> LoadVector:
    loads = [0.0] * strategy.n
    noconsume = 0.0
    if isinstance(strategy, PureAssignment):
        parts = [(p.mass(mu), {p.target: 1.0}) for p in strategy.pieces]
    else:
        parts = [(c.mass(mu), c.weights) for c in strategy.cells]
    for mass, weights in parts:
        for target, w in weights.items():
            if target == NOCONSUME:
                noconsume += w * mass
            else:
                loads[target] += w * mass
    return LoadVector(noconsume, tuple(loads))


def purify(mu: Measure, strategy: ConsumerStrategy) -> PureAssignment:
    """Split every cell into consecutive intervals, one per supported target."""
    if mu.has_atoms:
        raise AtomsPresent("pure equilibria need an atomless measure")
    pieces: list[Piece] = []
    for cell in strategy.cells:
        targets = sorted(
            ((k, w) for k, w in cell.weights.items() if w > 0),
            key=lambda kw: -1 if kw[0] == NOCONSUME else kw[0],
        )
        mass = cell.mass(mu)
        if mass <= 0 or len(targets) == 1:
            pieces.append(Piece(cell.lo, cell.hi, targets[0][0], cell.closed))
            continue
        cum = mu.prefix(cell.lo)
        lo = cell.lo
        for target, w in targets[:-1]:
            cum += w * mass
            cut = min(cell.hi, max(lo, mu.sup_prefix(cum)))
            if cut > lo:
                pieces.append(Piece(lo, cut, target))
            lo = cut
        pieces.append(Piece(lo, cell.hi, targets[-1][0], cell.closed))

    merged: list[Piece] = []
    for p in pieces:
        if merged and merged[-1].target == p.target:
            prev = merged.pop()
            p = Piece(prev.lo, p.hi, p.target, p.closed)
        merged.append(p)
    return PureAssignment(strategy.n, tuple(merged))


def _expected_cells(levels: Sequence[float]) -> list[tuple[float, float]]:
    if not levels:
        return [(0.0, 1.0)]
    vals = sorted(set(float(t) for t in levels))
    bounds = ([0.0] if vals[0] > 0 else []) + vals + [1.0]
    return list(zip(bounds, bounds[1:]))


def verify_equilibrium(
    mu: Measure,
    levels: Sequence[float],
    strategy: Union[ConsumerStrategy, PureAssignment],
    tol: float = TOL,
) -> EquilibriumReport:
    """Check the equilibrium conditions on every cell or piece.

    A consumer may abstain only when no producer is acceptable, and may
    only use producers whose load is minimal among the acceptable ones.
    """
    levels = [float(t) for t in levels]
    if isinstance(strategy, ConsumerStrategy):
        got = [(c.lo, c.hi) for c in strategy.cells]
        want = _expected_cells(levels)
        if len(got) != len(want) or any(
            abs(a - c) > 1e-12 or abs(b - d) > 1e-12 for (a, b), (c, d) in zip(got, want)
        ):
            raise CellMismatch(f"cells {got} do not match effective types {want}")
        parts = [(c.lo, c.weights) for c in strategy.cells]
    else:
        pieces = strategy.pieces
        if abs(pieces[0].lo) > 1e-12 or abs(pieces[-1].hi - 1.0) > 1e-12 or any(
            abs(a.hi - b.lo) > 1e-12 for a, b in zip(pieces, pieces[1:])
        ):
            raise CellMismatch("pieces do not partition [0, 1]")
        # a piece may span several effective types; check each of them
        parts = []
        for p in pieces:
            inner = sorted(t for t in set(levels) if p.lo < t < p.hi)
            parts.extend((lo, {p.target: 1.0}) for lo in [p.lo, *inner])

    loads = strategy_loads(mu, strategy)
    problems: list[str] = []
    worst = 0.0
    for lo, weights in parts:
        if abs(sum(weights.values()) - 1.0) > tol:
            problems.append(f"weights at {lo} sum to {sum(weights.values())}")
        ok_set = [j for j, t in enumerate(levels) if t <= lo]
        for target, w in weights.items():
            if w <= tol:
                continue
            if target == NOCONSUME:
                if ok_set:
                    problems.append(f"abstention at {lo} although producers {ok_set} are acceptable")
                continue
            if target not in ok_set:
                problems.append(f"producer {target} used at {lo} but not acceptable")
                continue
            gap = loads.loads[target] - min(loads.loads[j] for j in ok_set)
            worst = max(worst, gap)
    if worst > tol:
        problems.append(f"a supported producer is overloaded by {worst}")
    return EquilibriumReport(not problems, loads, worst, problems)
