"""Brute-force cross-checks for the constructive algorithms.

Nothing here shares code paths with the fast implementations beyond the
measure itself and the vectorized closed-form load evaluator:

* ``pour_loads`` literally pours small increments of consumers, one at a
  time, into the currently lowest acceptable vessel;
* ``grid_best_response`` and ``coalition_search`` enumerate candidate
  levels and keep the best ones;
* ``water_fill_bisect`` bisects on the common level;
* ``two_good_loads`` solves the two-good consumer game as a convex program.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit
from scipy.optimize import minimize

from .consumer import LoadVector, loads_many
from .errors import SearchSpaceTooLarge
from .hetero import ResponseFunction
from .measure import TOL, Measure

# ---------------------------------------------------------------------------
# epsilon pouring


@njit(cache=True)
def _level(j, x, xs, ys, nbp, use_f):
    if not use_f:
        return x
    k = nbp[j]
    i = 0
    while i < k - 2 and x >= xs[j, i + 1]:
        i += 1
    return ys[j, i] + (x - xs[j, i]) * (ys[j, i + 1] - ys[j, i]) / (xs[j, i + 1] - xs[j, i])


@njit(cache=True)
def _pour(cell_mass, step, xs, ys, nbp, use_f):
    n = cell_mass.shape[0]
    loads = np.zeros(n)
    lv = np.zeros(n)
    for i in range(n):
        m = cell_mass[i]
        if m <= 0.0:
            continue
        count = int(math.ceil(m / step))
        inc = m / count
        for j in range(i + 1):
            lv[j] = _level(j, loads[j], xs, ys, nbp, use_f)
        for _ in range(count):
            low = lv[0]
            for j in range(1, i + 1):
                if lv[j] < low:
                    low = lv[j]
            ties = 0
            for j in range(i + 1):
                if lv[j] == low:
                    ties += 1
            share = inc / ties
            for j in range(i + 1):
                if lv[j] == low:
                    loads[j] += share
                    lv[j] = _level(j, loads[j], xs, ys, nbp, use_f)
    return loads


def pour_loads(mu: Measure, levels: Sequence[float], fs: Optional[Sequence[ResponseFunction]] = None,
               step: float = 1e-4) -> LoadVector:
    """Loads by pouring consumers in increments of at most ``step``.

    Consumers are poured in order of type; the consumers between two
    consecutive sorted levels can reach exactly the producers up to the
    lower one, and each increment lands in the lowest of those vessels
    (lowest f-level when ``fs`` is given), split evenly on exact ties.
    """
    n = len(levels)
    if n == 0:
        return LoadVector(mu.total, ())
    order = sorted(range(n), key=lambda j: levels[j])
    F = [mu.prefix(levels[j]) for j in order] + [mu.total]
    cell_mass = np.array([F[i + 1] - F[i] for i in range(n)])
    if fs is None:
        xs = ys = np.zeros((n, 2))
        nbp = np.full(n, 2, dtype=np.int64)
    else:
        width = max(len(f.breakpoints) for f in fs)
        xs, ys = np.zeros((n, width)), np.zeros((n, width))
        nbp = np.zeros(n, dtype=np.int64)
        for pos, j in enumerate(order):
            bp = fs[j].breakpoints
            nbp[pos] = len(bp)
            xs[pos, : len(bp)] = [x for x, _ in bp]
            ys[pos, : len(bp)] = [y for _, y in bp]
    sorted_loads = _pour(cell_mass, float(step), xs, ys, nbp, fs is not None)
    loads = [0.0] * n
    for pos, j in enumerate(order):
        loads[j] = float(sorted_loads[pos])
    return LoadVector(F[0], tuple(loads))


def water_fill_bisect(fs: Sequence[ResponseFunction], M: float, tol: float = 1e-12) -> tuple[float, ...]:
    if M <= 0:
        return tuple(0.0 for _ in fs)
    lo = min(f(0.0) for f in fs)
    hi = max(f(M) for f in fs)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if sum(f.inverse(mid) for f in fs) < M:
            lo = mid
        else:
            hi = mid
    return tuple(f.inverse((lo + hi) / 2) for f in fs)


# ---------------------------------------------------------------------------
# grid searches


def quantile_points(mu: Measure, grid: int) -> np.ndarray:
    total = mu.total
    return np.array([mu.sup_prefix(q * total / grid) for q in range(grid + 1)])


def grid_best_response(mu: Measure, others: Sequence[float], grid: int = 1000,
                       preference: str = "fine", tol: float = TOL) -> float:
    """Best level against ``others`` among quantile, uniform and nearby points.

    Returns the largest candidate whose load is within ``tol`` of the best
    load found. For coarse preferences any such candidate is a best
    response; the largest one is the canonical representative.
    """
    if preference not in ("fine", "coarse"):
        raise ValueError(f"unknown preference {preference!r}")
    near = [x + d for x in others for d in (-1e-9, 0.0, 1e-9)]
    cands = np.unique(np.clip(np.concatenate([
        quantile_points(mu, grid), np.linspace(0.0, 1.0, grid + 1), near,
    ]), 0.0, 1.0))
    profiles = np.column_stack([cands, np.tile(np.asarray(others, dtype=float), (len(cands), 1))])
    _, L = loads_many(mu, profiles)
    mine = L[:, 0]
    return float(cands[mine >= mine.max() - tol].max())


@dataclass(frozen=True)
class Deviation:
    moves: dict
    before: tuple[float, ...]
    after: tuple[float, ...]


def coalition_search(mu: Measure, levels: Sequence[float], coalition: Sequence[int], grid: int = 100,
                     preference: str = "coarse", cap: int = 3, tol: float = TOL,
                     chunk: int = 200_000) -> Optional[Deviation]:
    """Exhaustive joint deviations of ``coalition`` over a product grid.

    Each member ranges over the mass-quantile points, the atom locations and
    its current level. Loads depend on a level only through the mass below
    it, and among levels with equal mass below the largest is the only one
    fine preferences could want, so this grid covers every load outcome up
    to the quantile resolution. Returns the deviation with the largest
    total load gain, or ``None``.
    """
    coalition = sorted(set(coalition))
    if not coalition:
        raise ValueError("empty coalition")
    if len(coalition) > cap:
        raise SearchSpaceTooLarge(f"coalition of {len(coalition)} exceeds cap {cap}")
    levels = np.asarray(levels, dtype=float)
    base = np.asarray(loads_many(mu, levels[None, :])[1][0])
    common = np.concatenate([quantile_points(mu, grid), [t for t, _ in mu.atoms]])
    axes = [np.unique(np.append(common, levels[j])) for j in coalition]

    best, best_gain = None, 0.0
    combos = itertools.product(*axes)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)))
        if block.size == 0:
            break
        P = np.tile(levels, (len(block), 1))
        P[:, coalition] = block
        _, L = loads_many(mu, P)
        gain = L[:, coalition] - base[coalition]
        if preference == "coarse":
            weak = (gain >= -tol).all(axis=1)
            strict = (gain > tol).any(axis=1)
        else:
            moved = block - levels[coalition]
            even = np.abs(gain) <= tol
            weak = ((gain > tol) | (even & (moved >= -tol))).all(axis=1)
            strict = ((gain > tol) | (even & (moved > tol))).any(axis=1)
        hits = np.flatnonzero(weak & strict)
        if hits.size:
            totals = gain[hits].sum(axis=1)
            i = hits[np.argmax(totals)]
            if best is None or totals.max() > best_gain:
                best_gain = float(totals.max())
                best = Deviation(dict(zip(coalition, map(float, block[i]))),
                                 tuple(map(float, base)), tuple(map(float, L[i])))
    return best


# ---------------------------------------------------------------------------
# two goods in the plane


def _perimeter(p, q) -> float:
    (r1, a1), (r2, a2) = p, q
    gap = math.sqrt(max(0.0, r1 * r1 + r2 * r2 - 2 * r1 * r2 * math.cos(a1 - a2)))
    return r1 + r2 + gap


def two_good_loads(mu: Measure, fs1: Sequence[ResponseFunction], fs2: Sequence[ResponseFunction],
                   places1: Sequence[tuple[float, float]], places2: Sequence[tuple[float, float]],
                   ) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Consumer equilibrium loads when every consumer buys one unit of each good.

    ``places`` are (radius, angle) per producer. A consumer of type ``d`` may
    use the pair (j, k) when the triangle origin-j-k has perimeter at most
    ``2d``, and picks a feasible pair minimizing ``f1_j + f2_k``. That is a
    congestion game with a convex potential (sum of integrals of the f's),
    which we minimize over cell-by-pair flows.
    """
    n1, n2 = len(fs1), len(fs2)
    pairs = [(j, k) for j in range(n1) for k in range(n2)]
    need = [_perimeter(places1[j], places2[k]) / 2 for j, k in pairs]
    cuts = sorted({c for c in need if c <= 1.0})
    if not cuts:
        return (0.0,) * n1, (0.0,) * n2
    bounds = cuts + [2.0]
    var = []  # (cell mass index, pair index)
    masses = []
    for c, (a, b) in enumerate(zip(bounds, bounds[1:])):
        masses.append(mu.mass_co(a, b))
        var.extend((c, p) for p, r in enumerate(need) if r <= a)
    masses = np.array(masses)
    A1 = np.zeros((n1, len(var)))
    A2 = np.zeros((n2, len(var)))
    C = np.zeros((len(masses), len(var)))
    for v, (c, p) in enumerate(var):
        j, k = pairs[p]
        A1[j, v] = A2[k, v] = C[c, v] = 1.0

    def potential(x):
        l1, l2 = A1 @ x, A2 @ x
        return sum(f.integral(l) for f, l in zip(fs1, l1)) + sum(f.integral(l) for f, l in zip(fs2, l2))

    def grad(x):
        l1, l2 = A1 @ x, A2 @ x
        c1 = np.array([f(l) for f, l in zip(fs1, l1)])
        c2 = np.array([f(l) for f, l in zip(fs2, l2)])
        return A1.T @ c1 + A2.T @ c2

    # start from an even split inside each cell
    x0 = np.zeros(len(var))
    for v, (c, _) in enumerate(var):
        x0[v] = masses[c] / C[c].sum()
    res = minimize(potential, x0, jac=grad, method="SLSQP",
                   bounds=[(0.0, None)] * len(var),
                   constraints=[{"type": "eq", "fun": lambda x: C @ x - masses, "jac": lambda x: C}],
                   options={"ftol": 1e-14, "maxiter": 500})
    x = np.clip(res.x, 0.0, None)
    return tuple(map(float, A1 @ x)), tuple(map(float, A2 @ x))


def mainstreet_deviation_search(mu: Measure, fs1, fs2, places1, places2, good: int, index: int,
                                angles: int = 36, radii: int = 50, tol: float = 1e-6):
    """Try every polar grid point for one producer; report a fine improvement.

    Improvement means a larger load, or the same load (within ``tol``) at a
    larger distance from the origin.
    """
    places = [list(places1), list(places2)]
    mine = places[good - 1][index]
    base = two_good_loads(mu, fs1, fs2, *places)[good - 1][index]
    for a in np.linspace(0.0, 2 * math.pi, angles, endpoint=False):
        for r in np.linspace(0.0, 1.0, radii):
            trial = [list(places1), list(places2)]
            trial[good - 1][index] = (float(r), float(a))
            load = two_good_loads(mu, fs1, fs2, *trial)[good - 1][index]
            if load > base + tol or (abs(load - base) <= tol and r > mine[0] + tol):
                return {"radius": float(r), "angle": float(a), "load": load, "base": base}
    return None
