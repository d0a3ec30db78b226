"""Heterogeneous producers: consumers compare ``f_j(load_j)`` instead of loads.

Each ``f_j`` is a strictly increasing piecewise-linear function. With all
``f_j`` equal everything reduces to the homogeneous case.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional, Sequence

from .consumer import LoadVector
from .errors import ArityMismatch, InvalidPermutation, NegativeInput, NonIncreasingFunction
from .measure import TOL, Measure


@dataclass(frozen=True)
class ResponseFunction:
    """Piecewise-linear, strictly increasing; extended linearly past the last breakpoint."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bps = tuple((float(x), float(y)) for x, y in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if len(bps) < 2:
            raise NonIncreasingFunction("need at least two breakpoints")
        if bps[0][0] != 0.0:
            raise NonIncreasingFunction("first breakpoint must sit at load 0")
        for (x0, y0), (x1, y1) in zip(bps, bps[1:]):
            if not (x1 > x0 and y1 > y0):
                raise NonIncreasingFunction(f"not strictly increasing between loads {x0} and {x1}")

    @classmethod
    def linear(cls, slope: float, intercept: float = 0.0) -> "ResponseFunction":
        return cls(((0.0, intercept), (1.0, intercept + slope)))

    @property
    def xs(self):
        return [x for x, _ in self.breakpoints]

    @property
    def ys(self):
        return [y for _, y in self.breakpoints]

    def _piece(self, keys, v):
        return min(max(bisect_right(keys, v) - 1, 0), len(keys) - 2)

    def __call__(self, x: float) -> float:
        xs, ys = self.xs, self.ys
        i = self._piece(xs, x)
        return ys[i] + (x - xs[i]) * (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])

    def inverse(self, y: float) -> float:
        """Load reaching level ``y``; 0 when ``y`` is at or below ``f(0)``."""
        xs, ys = self.xs, self.ys
        if y <= ys[0]:
            return 0.0
        i = self._piece(ys, y)
        return xs[i] + (y - ys[i]) * (xs[i + 1] - xs[i]) / (ys[i + 1] - ys[i])

    def integral(self, x: float) -> float:
        """Area under f on [0, x]."""
        total = 0.0
        bps = self.breakpoints
        for (x0, y0), (x1, _) in zip(bps, bps[1:]):
            if x <= x0:
                break
            hi = min(x, x1)
            total += (hi - x0) * (y0 + self(hi)) / 2
        if x > bps[-1][0]:
            x0 = bps[-1][0]
            total += (x - x0) * (self(x0) + self(x)) / 2
        return total

    def to_dict(self) -> dict:
        return {"breakpoints": [{"load": x, "value": y} for x, y in self.breakpoints]}

    @classmethod
    def from_dict(cls, data: dict) -> "ResponseFunction":
        return cls(tuple((b["load"], b["value"]) for b in data["breakpoints"]))


IDENTITY = ResponseFunction(((0.0, 0.0), (1.0, 1.0)))


def _fill(fs: Sequence[ResponseFunction], M: float) -> tuple[float, list[float]]:
    """Common level and loads when ``M`` is spread freely over ``fs``."""
    if M < 0:
        raise NegativeInput("cannot pour a negative amount")
    n = len(fs)
    if M == 0:
        return min(f.ys[0] for f in fs), [0.0] * n
    if all(f == fs[0] for f in fs):
        share = M / n
        return fs[0](share), [share] * n

    def spread(h):
        return sum(f.inverse(h) for f in fs)

    # spread() is linear between consecutive breakpoint values
    levels = sorted({y for f in fs for y in f.ys})
    lo = levels[0]
    for hi in levels[1:]:
        s_hi = spread(hi)
        if s_hi >= M:
            s_lo = spread(lo)
            h = lo + (M - s_lo) * (hi - lo) / (s_hi - s_lo)
            break
        lo = hi
    else:
        rate = sum((f.xs[-1] - f.xs[-2]) / (f.ys[-1] - f.ys[-2]) for f in fs)
        h = lo + (M - spread(lo)) / rate
    return h, [f.inverse(h) for f in fs]


def water_fill(fs: Sequence[ResponseFunction], M: float) -> tuple[float, ...]:
    """Split ``M`` so that every loaded producer sits at the same f-level."""
    return tuple(_fill(fs, M)[1])


def fill_level(fs: Sequence[ResponseFunction], M: float) -> float:
    return _fill(fs, M)[0]


def hetero_loads(mu: Measure, levels: Sequence[float], fs: Sequence[ResponseFunction],
                 tol: float = TOL) -> LoadVector:
    """Equilibrium loads when consumers minimize ``f_j(load_j)``.

    Same block decomposition as the homogeneous algorithm, except a
    candidate block is scored by the common f-level its mass reaches when
    spread over the block's producers.
    """
    n = len(levels)
    if len(fs) != n:
        raise ArityMismatch(f"{n} levels but {len(fs)} response functions")
    if n == 0:
        return LoadVector(mu.total, ())
    order = sorted(range(n), key=lambda j: levels[j])
    F = [mu.prefix(levels[j]) for j in order] + [mu.total]
    loads = [0.0] * n
    k = 0
    while k < n:
        fills = [_fill([fs[order[j]] for j in range(k, kp)], F[kp] - F[k]) for kp in range(k + 1, n + 1)]
        top = max(h for h, _ in fills)
        i = max(i for i, (h, _) in enumerate(fills) if h >= top - tol)
        for j, x in zip(range(k, k + i + 1), fills[i][1]):
            loads[order[j]] = x
        k += i + 1
    return LoadVector(F[0], tuple(loads))


def tilde_loads(mu: Measure, fs: Sequence[ResponseFunction]) -> tuple[float, ...]:
    """Equilibrium loads with every producer at level 0 (the whole market poured freely)."""
    return water_fill(fs, mu.total)


def hetero_fine_nash(mu: Measure, fs: Sequence[ResponseFunction],
                     perm: Optional[Sequence[int]] = None, tol: float = TOL) -> tuple[float, ...]:
    """Fine equilibrium with producers ordered by ``perm`` (``perm[pos]`` = producer).

    Without ``perm``, index order with zero-share producers moved to the end.
    """
    n = len(fs)
    shares = tilde_loads(mu, fs)
    if perm is None:
        perm = sorted(range(n), key=lambda j: shares[j] <= tol)
    perm = [int(j) for j in perm]
    if sorted(perm) != list(range(n)):
        raise InvalidPermutation(f"{perm} is not a permutation of 0..{n - 1}")
    seen_zero = False
    for j in perm:
        if shares[j] <= tol:
            seen_zero = True
        elif seen_zero:
            raise InvalidPermutation("producers with zero load must come last")
    out = [0.0] * n
    same = all(f == fs[0] for f in fs)
    acc = 0.0
    for pos, j in enumerate(perm):
        # identical producers: multiply rather than accumulate so the result matches fine_nash bit for bit
        out[j] = mu.sup_prefix(pos * mu.total / n if same else acc, tol)
        acc += shares[j]
    return tuple(out)


def is_hetero_coarse_nash(mu: Measure, levels: Sequence[float], fs: Sequence[ResponseFunction],
                          tol: float = TOL) -> bool:
    loads = hetero_loads(mu, levels, fs, tol).loads
    return all(abs(a - b) <= tol for a, b in zip(loads, tilde_loads(mu, fs)))


def hetero_best_response(mu: Measure, j: int, levels: Sequence[float], fs: Sequence[ResponseFunction],
                         tol: float = TOL) -> float:
    """Largest level for producer ``j`` that still earns its maximal load.

    The load is nonincreasing in the prefix mass below the chosen level, so
    the answer is a prefix quantile found by bisection on that mass.
    """
    levels = list(levels)

    def load_at(m):
        levels[j] = mu.sup_prefix(m, tol)
        # near-ties merge to (almost) the same loads either way, so a tight
        # tie tolerance costs nothing here and keeps the cut point sharp
        return hetero_loads(mu, levels, fs, 1e-14).loads[j]

    # compare loads much tighter than tol: the cut point moves by about
    # (load slack) / (rate of loss), and we want the level itself accurate
    best = load_at(0.0) - 1e-12
    lo, hi = 0.0, mu.total
    if load_at(hi) >= best:
        return mu.sup_prefix(hi, tol)
    for _ in range(80):
        mid = (lo + hi) / 2
        if load_at(mid) >= best:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13:
            break
    # the kinks sit at other producers' prefix masses; land on one exactly if close
    snaps = [0.0] + [mu.prefix(t) for i, t in enumerate(levels) if i != j]
    near = [m for m in snaps if abs(m - lo) <= tol and load_at(m) >= best]
    if near:
        lo = max(near)
    return mu.sup_prefix(lo, tol)
