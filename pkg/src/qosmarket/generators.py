"""Seeded random instances for tests, experiments and the CLI."""
from __future__ import annotations

import numpy as np

from .hetero import ResponseFunction
from .measure import Measure


def random_measure(rng: np.random.Generator, max_atoms: int = 3, max_segments: int = 4,
                   atomless: bool = False) -> Measure:
    n_seg = int(rng.integers(1, max_segments + 1))
    cuts = np.sort(rng.choice(np.arange(1, 200), size=2 * n_seg, replace=False)) / 200.0
    if rng.random() < 0.3:
        cuts[0] = 0.0
    if rng.random() < 0.3:
        cuts[-1] = 1.0
    segs = [(float(cuts[2 * i]), float(cuts[2 * i + 1]), float(rng.uniform(0.2, 2.0)))
            for i in range(n_seg)]
    atoms = []
    if not atomless:
        n_atoms = int(rng.integers(0, max_atoms + 1))
        # sometimes put atoms on the interesting spots: 0, 1, segment ends
        spots = [0.0, 1.0, *cuts.tolist()]
        locs = set()
        for _ in range(n_atoms):
            t = float(rng.choice(spots)) if rng.random() < 0.3 else round(float(rng.random()), 3)
            locs.add(t)
        atoms = [(t, float(rng.uniform(0.05, 0.5))) for t in sorted(locs)]
    return Measure(atoms=tuple(atoms), segments=tuple(segs))


def random_profile(rng: np.random.Generator, mu: Measure, n: int) -> tuple[float, ...]:
    """Levels mixing uniform draws, measure breakpoints and repeated values."""
    pts = mu.breakpoints()
    out = []
    for _ in range(n):
        r = rng.random()
        if r < 0.2:
            out.append(float(rng.choice(pts)))
        elif r < 0.3 and out:
            out.append(float(rng.choice(out)))
        else:
            out.append(float(rng.random()))
    return tuple(out)


def random_response_function(rng: np.random.Generator, pieces: int = 3) -> ResponseFunction:
    k = int(rng.integers(1, pieces + 1))
    xs = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 3.0, size=k))])
    slopes = rng.uniform(0.2, 5.0, size=k)
    y0 = float(rng.uniform(0.0, 0.5)) if rng.random() < 0.5 else 0.0
    ys = y0 + np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
    return ResponseFunction(tuple(zip(xs.tolist(), ys.tolist())))
