"""Two goods sold from points in the plane.

Each consumer buys one unit of each good and walks a closed tour from the
origin through one seller of each. The stable outcome puts every seller on
a single ray, at the distance its good would get on its own.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import AtomsPresent, GenericityViolation, InvariantViolation, ZeroLoadProducer
from .hetero import ResponseFunction, hetero_fine_nash, tilde_loads
from .measure import TOL, Measure


@dataclass(frozen=True)
class PlanarPlacement:
    good: int
    index: int
    radius: float
    angle: float

    def __post_init__(self):
        if self.good not in (1, 2):
            raise InvariantViolation(f"good must be 1 or 2, got {self.good}")
        if not 0.0 <= self.radius <= 1.0:
            raise InvariantViolation(f"radius {self.radius} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"good": self.good, "index": self.index, "radius": self.radius, "angle": self.angle}

    @classmethod
    def from_dict(cls, d: dict) -> "PlanarPlacement":
        return cls(int(d["good"]), int(d["index"]), float(d["radius"]), float(d["angle"]))


@dataclass
class MainStreetReport:
    ok: bool
    violations: list = field(default_factory=list)


def subset_sums(values: Sequence[float]) -> list[float]:
    """Sums of all nonempty proper subsets."""
    n = len(values)
    return [sum(c) for r in range(1, n) for c in itertools.combinations(values, r)]


def genericity_collisions(shares1, shares2, tol: float = TOL) -> list[tuple[float, float]]:
    s2 = sorted(subset_sums(shares2))
    hits = []
    for a in subset_sums(shares1):
        hits.extend((a, b) for b in s2 if abs(a - b) <= tol)
    return hits


def _check_generic(mu: Measure, fs1, fs2, tol: float):
    shares1, shares2 = tilde_loads(mu, fs1), tilde_loads(mu, fs2)
    if any(x <= tol for x in shares1 + shares2):
        raise ZeroLoadProducer("every producer needs a positive equilibrium load")
    hits = genericity_collisions(shares1, shares2, tol)
    if hits:
        raise GenericityViolation(f"subset sums coincide across goods: {hits[:3]}")
    return shares1, shares2


def mainstreet_equilibrium(mu: Measure, fs1: Sequence[ResponseFunction], fs2: Sequence[ResponseFunction],
                           angle: float = 0.0, orders: Optional[tuple] = None,
                           tol: float = TOL) -> list[PlanarPlacement]:
    """Everyone on the ray at ``angle``; distances from each good's own fine equilibrium."""
    if mu.has_atoms:
        raise AtomsPresent("the two-good construction assumes an atomless measure")
    _check_generic(mu, fs1, fs2, tol)
    angle = angle % (2 * math.pi)
    orders = orders or (None, None)
    out = []
    for good, fs, perm in ((1, fs1, orders[0]), (2, fs2, orders[1])):
        radii = hetero_fine_nash(mu, fs, perm, tol)
        out.extend(PlanarPlacement(good, j, r, angle) for j, r in enumerate(radii))
    return out


def _angle_gap(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def verify_mainstreet(mu: Measure, fs1, fs2, placements: Sequence[PlanarPlacement],
                      tol: float = TOL) -> MainStreetReport:
    """Check the single-ray shape and each good's distances.

    Producers at the origin lie on every ray, so their angle is ignored.
    """
    _check_generic(mu, fs1, fs2, tol)
    violations: list = []
    off_origin = [p for p in placements if p.radius > tol]
    for p, q in itertools.combinations(off_origin, 2):
        if _angle_gap(p.angle, q.angle) > tol:
            violations.append(("off-ray", (p.good, p.index), (q.good, q.index)))

    for good, fs in ((1, fs1), (2, fs2)):
        mine = sorted((p for p in placements if p.good == good), key=lambda p: p.index)
        if [p.index for p in mine] != list(range(len(fs))):
            violations.append(("missing-producer", good))
            continue
        # the only ordering that can match is the one the radii already show
        perm = sorted(range(len(fs)), key=lambda j: mine[j].radius)
        expected = hetero_fine_nash(mu, fs, perm, tol)
        for p in mine:
            if abs(p.radius - expected[p.index]) > tol:
                violations.append(("radius-mismatch", good, p.index, expected[p.index], p.radius))
    return MainStreetReport(not violations, violations)
