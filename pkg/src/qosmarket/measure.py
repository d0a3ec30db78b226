"""Finite measures on the QoS interval [0, 1].

A measure is a finite list of point masses plus piecewise-constant density
segments. Everything downstream only ever asks for masses of half-open
intervals ``[a, b)``, so the measure keeps a precomputed prefix table
``F(t) = mass([0, t))`` and answers every query from it.

Positions above 1 are allowed as the right end of an interval; ``b = 2`` is
the conventional "past the end" sentinel and picks up an atom sitting at 1.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRange, SchemaError

TOL = 1e-9
TAIL = 2.0


@dataclass(frozen=True)
class Measure:
    atoms: tuple[tuple[float, float], ...] = ()
    segments: tuple[tuple[float, float, float], ...] = ()

    # prefix table, filled in __post_init__
    _pts: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)
    _atom_at: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)
    _dens: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)
    _left: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple((float(t), float(m)) for t, m in self.atoms)
        segs = tuple((float(a), float(b), float(d)) for a, b, d in self.segments)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "segments", segs)
        _validate(atoms, segs)

        pts = sorted({0.0, 1.0, *(t for t, _ in atoms), *(a for a, _, _ in segs), *(b for _, b, _ in segs)})
        atom_at = [0.0] * len(pts)
        for t, m in atoms:
            atom_at[pts.index(t)] = m
        dens = [0.0] * len(pts)
        for a, b, d in segs:
            for i in range(pts.index(a), pts.index(b)):
                dens[i] = d
        left = [0.0] * len(pts)
        for i in range(1, len(pts)):
            left[i] = left[i - 1] + atom_at[i - 1] + dens[i - 1] * (pts[i] - pts[i - 1])
        object.__setattr__(self, "_pts", tuple(pts))
        object.__setattr__(self, "_atom_at", tuple(atom_at))
        object.__setattr__(self, "_dens", tuple(dens))
        object.__setattr__(self, "_left", tuple(left))

    # -- constructors -------------------------------------------------------

    @classmethod
    def uniform(cls, lo: float = 0.0, hi: float = 1.0, density: float = 1.0) -> "Measure":
        return cls(segments=((lo, hi, density),))

    @classmethod
    def point(cls, t: float, mass: float = 1.0) -> "Measure":
        return cls(atoms=((t, mass),))

    @classmethod
    def empty(cls) -> "Measure":
        return cls()

    def __add__(self, other: "Measure") -> "Measure":
        masses: dict[float, float] = {}
        for t, m in self.atoms + other.atoms:
            masses[t] = masses.get(t, 0.0) + m
        cuts = sorted({x for a, b, _ in self.segments + other.segments for x in (a, b)})
        segs = []
        for a, b in zip(cuts, cuts[1:]):
            d = sum(s[2] for s in self.segments + other.segments if s[0] <= a and b <= s[1])
            if d > 0:
                segs.append((a, b, d))
        return Measure(atoms=tuple(sorted(masses.items())), segments=tuple(segs))

    # -- queries ------------------------------------------------------------

    @property
    def total(self) -> float:
        return self._left[-1] + self._atom_at[-1]

    @property
    def has_atoms(self) -> bool:
        return len(self.atoms) > 0

    def prefix(self, t: float) -> float:
        """``mass([0, t))``; left-continuous, so an atom at ``t`` is excluded."""
        if t <= 0.0:
            return 0.0
        if t > 1.0:
            return self.total
        pts = self._pts
        i = bisect_left(pts, t)
        if pts[i] == t:
            return self._left[i]
        j = i - 1
        return self._left[j] + self._atom_at[j] + self._dens[j] * (t - pts[j])

    def prefix_many(self, ts) -> np.ndarray:
        """Vectorized :meth:`prefix` over an array of positions."""
        ts = np.asarray(ts, dtype=float)
        pts = np.asarray(self._pts)
        left = np.asarray(self._left)
        i = np.clip(np.searchsorted(pts, ts, side="left"), 0, len(pts) - 1)
        j = np.maximum(i - 1, 0)
        inside = left[j] + np.asarray(self._atom_at)[j] + np.asarray(self._dens)[j] * (ts - pts[j])
        out = np.where(pts[i] == ts, left[i], inside)
        out = np.where(ts <= 0.0, 0.0, out)
        return np.where(ts > 1.0, self.total, out)

    def mass_co(self, a: float, b: float) -> float:
        """Mass of the half-open interval ``[a, b)``."""
        if a < 0 or a > b:
            raise InvalidRange(f"bad interval [{a}, {b})")
        if a == b:
            return 0.0
        return self.prefix(b) - self.prefix(a)

    def mass_tail(self, a: float) -> float:
        """Mass of the closed tail ``[a, 1]``."""
        if not 0.0 <= a <= 1.0:
            raise InvalidRange(f"tail start {a} outside [0, 1]")
        return self.total - self.prefix(a)

    def sup_prefix(self, m: float, tol: float = TOL) -> float:
        """Largest ``t`` in [0, 1] with ``mass([0, t)) <= m``.

        Flat stretches push the answer to their right end; an atom that
        would overshoot ``m`` stops it at the atom's location.
        """
        if m < -tol:
            raise InvalidRange(f"negative mass bound {m}")
        pts, left, atom_at, dens = self._pts, self._left, self._atom_at, self._dens
        last = len(pts) - 1
        for i, p in enumerate(pts):
            base = left[i] + atom_at[i]
            if base > m + tol or i == last:
                return p
            d = dens[i]
            # a next breakpoint within tolerance of the bound counts as reached
            if d > 0.0 and left[i + 1] > m + tol:
                t = p + (m - base) / d
                if t < pts[i + 1]:
                    return max(t, p)
        return 1.0  # pragma: no cover - loop always returns at the last point

    def restrict(self, a: float, b: float) -> "Measure":
        """The measure ``A -> mass(A ∩ [a, b))``; ``b > 1`` keeps the tail [a, 1]."""
        if a < 0 or a > b or a > 1:
            raise InvalidRange(f"bad restriction [{a}, {b})")
        atoms = tuple((t, m) for t, m in self.atoms if a <= t < b)
        segs = []
        for lo, hi, d in self.segments:
            lo2, hi2 = max(lo, a), min(hi, b)
            if lo2 < hi2:
                segs.append((lo2, hi2, d))
        return Measure(atoms=atoms, segments=tuple(segs))

    def breakpoints(self) -> tuple[float, ...]:
        return self._pts

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "atoms": [{"t": t, "mass": m} for t, m in self.atoms],
            "segments": [{"from": a, "to": b, "density": d} for a, b, d in self.segments],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Measure":
        atoms = tuple((a["t"], a["mass"]) for a in data.get("atoms", []))
        segs = tuple((s["from"], s["to"], s["density"]) for s in data.get("segments", []))
        return cls(atoms=atoms, segments=segs)


def _validate(atoms, segs) -> None:
    prev = -1.0
    for i, (t, m) in enumerate(atoms):
        if not 0.0 <= t <= 1.0:
            raise SchemaError("atom location outside [0, 1]", f"/atoms/{i}/t")
        if not m > 0.0:
            raise SchemaError("atom mass must be positive", f"/atoms/{i}/mass")
        if t <= prev:
            raise SchemaError("atom locations must be strictly increasing", f"/atoms/{i}/t")
        prev = t
    end = 0.0
    for i, (a, b, d) in enumerate(segs):
        if not (0.0 <= a < b <= 1.0):
            raise SchemaError("segment must satisfy 0 <= from < to <= 1", f"/segments/{i}")
        if d < 0.0:
            raise SchemaError("density must be nonnegative", f"/segments/{i}/density")
        if a < end:
            raise SchemaError("segments must be sorted and disjoint", f"/segments/{i}/from")
        end = b
