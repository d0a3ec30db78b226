"""Producer-side analysis: Nash tests, the fine equilibrium, best responses."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .consumer import compute_loads
from .errors import EmptyGame, MalformedDistribution, NotCoarseNash
from .measure import TOL, Measure


@dataclass(frozen=True)
class NashReport:
    is_nash: bool
    # prefix mass at each sorted position minus its quota j/n * mu(T)
    slacks: tuple[float, ...]


@dataclass(frozen=True)
class MixedStrategy:
    support: tuple[tuple[float, float], ...]  # (level, probability)

    def __post_init__(self):
        sup = tuple((float(t), float(p)) for t, p in self.support)
        object.__setattr__(self, "support", sup)
        if not sup:
            raise MalformedDistribution("empty support")
        ts = [t for t, _ in sup]
        if any(not 0.0 <= t <= 1.0 for t in ts):
            raise MalformedDistribution("support outside [0, 1]")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise MalformedDistribution("support levels must be strictly increasing")
        if any(p <= 0 for _, p in sup) or abs(sum(p for _, p in sup) - 1.0) > TOL:
            raise MalformedDistribution("probabilities must be positive and sum to 1")

    @classmethod
    def point(cls, t: float) -> "MixedStrategy":
        return cls(((t, 1.0),))

    @property
    def top(self) -> float:
        return self.support[-1][0]

    def sample(self, rng) -> float:
        ts = [t for t, _ in self.support]
        ps = [p for _, p in self.support]
        return float(rng.choice(ts, p=ps))


def _quota_slacks(mu: Measure, levels: Sequence[float]) -> tuple[float, ...]:
    n = len(levels)
    total = mu.total
    return tuple(mu.prefix(t) - j * total / n for j, t in enumerate(sorted(levels)))


def is_coarse_nash(mu: Measure, levels: Sequence[float], tol: float = TOL) -> NashReport:
    if len(levels) == 0:
        raise EmptyGame("no producers")
    slacks = _quota_slacks(mu, levels)
    return NashReport(all(s <= tol for s in slacks), slacks)


def fine_nash(mu: Measure, n: int, tol: float = TOL) -> tuple[float, ...]:
    """The fine equilibrium, sorted: producer j sits at the j/n prefix quantile."""
    if n < 1:
        raise EmptyGame("no producers")
    return tuple(mu.sup_prefix(j * mu.total / n, tol) for j in range(n))


def is_fine_nash(mu: Measure, levels: Sequence[float], tol: float = TOL) -> bool:
    target = fine_nash(mu, len(levels), tol)
    return all(abs(a - b) <= tol for a, b in zip(sorted(levels), target))


def canonicalize(mu: Measure, levels: Sequence[float], k: int, tol: float = TOL) -> tuple[int, ...]:
    """Sorting permutation of a coarse equilibrium that pushes producer ``k``
    as far right as the quotas allow.

    ``perm[pos]`` is the producer at sorted position ``pos``. Producer ``k``
    moves past its right neighbour while that neighbour's prefix mass still
    fits the quota of ``k``'s current position.
    """
    if not is_coarse_nash(mu, levels, tol).is_nash:
        raise NotCoarseNash("canonical form needs a coarse equilibrium")
    n = len(levels)
    perm = sorted(range(n), key=lambda j: levels[j])
    pos = perm.index(k)
    total = mu.total
    while pos < n - 1 and mu.prefix(levels[perm[pos + 1]]) <= pos * total / n + tol:
        perm[pos], perm[pos + 1] = perm[pos + 1], perm[pos]
        pos += 1
    return tuple(perm)


def fine_best_response(mu: Measure, others: Sequence[float], tol: float = TOL) -> float:
    """The unique fine best response to the opponents' levels.

    Three situations, following the construction:

    * the cheapest opponent already leaves some consumers uncovered, so the
      responder must cover them: go to the largest level with no mass below;
    * the opponents plus a responder at 0 form a coarse equilibrium: put the
      responder in canonical position ``k`` and take the ``k/n`` quantile;
    * otherwise the responder can only share the low part of the market:
      cut the measure at the first opponent whose load falls below the
      responder's, drop everyone from there on, and repeat.
    """
    opp = sorted(float(t) for t in others)
    while True:
        n = len(opp) + 1
        if opp and mu.prefix(opp[0]) > tol:
            return mu.sup_prefix(0.0, tol)
        profile = [0.0] + opp
        if is_coarse_nash(mu, profile, tol).is_nash:
            pos = canonicalize(mu, profile, 0, tol).index(0)
            return mu.sup_prefix(pos * mu.total / n, tol)
        loads = compute_loads(mu, profile, tol).loads
        k = next(i for i in range(1, n) if loads[i] < loads[0] - tol)
        mu = mu.restrict(0.0, opp[k - 1])
        opp = opp[: k - 1]


def best_load(mu: Measure, others: Sequence[float], tol: float = TOL) -> float:
    """Largest load any level can earn against ``others`` (attained at 0)."""
    return compute_loads(mu, [0.0, *others], tol).loads[0]


def is_coarse_mixed_nash(mu: Measure, strategies: Sequence[MixedStrategy], tol: float = TOL) -> bool:
    """Mixed profile test: only the top of each support matters."""
    if len(strategies) == 0:
        raise EmptyGame("no producers")
    for s in strategies:
        if not isinstance(s, MixedStrategy):
            raise MalformedDistribution(f"expected MixedStrategy, got {type(s).__name__}")
    return is_coarse_nash(mu, [s.top for s in strategies], tol).is_nash
