"""Response dynamics of the producer game.

At every step a set of producers (given by the schedule) revises its level
against the current profile; everyone else keeps theirs. Trajectories
record loads and equilibrium flags before each move.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import hetero
from .consumer import LoadVector, compute_loads, loads_many
from .errors import EmptySubset, InvariantViolation, ScriptedMoveNotImproving
from .measure import TOL, Measure
from .producer import fine_best_response, fine_nash, is_coarse_nash


@dataclass(frozen=True)
class Schedule:
    kind: str  # "sequential", "simultaneous" or "custom"
    n: int
    subsets: tuple[frozenset, ...] = ()

    @property
    def period(self) -> int:
        return {"sequential": self.n, "simultaneous": 1}.get(self.kind, len(self.subsets))

    def movers(self, step: int) -> frozenset:
        if self.kind == "sequential":
            return frozenset({step % self.n})
        if self.kind == "simultaneous":
            return frozenset(range(self.n))
        return self.subsets[step % len(self.subsets)]


def build_schedule(kind: str, n: int, subsets: Optional[Sequence[Sequence[int]]] = None) -> Schedule:
    if n < 1:
        raise InvariantViolation("a schedule needs at least one producer")
    kind = {"sequential-round-robin": "sequential", "round-robin": "sequential"}.get(kind, kind)
    if kind in ("sequential", "simultaneous"):
        return Schedule(kind, n)
    if kind != "custom":
        raise InvariantViolation(f"unknown schedule kind {kind!r}")
    if not subsets:
        raise EmptySubset("custom schedule needs at least one subset")
    sets = []
    for s in subsets:
        s = frozenset(int(j) for j in s)
        if not s:
            raise EmptySubset("custom schedule subsets must be nonempty")
        if not s <= set(range(n)):
            raise InvariantViolation(f"subset {sorted(s)} mentions unknown producers")
        sets.append(s)
    if frozenset().union(*sets) != frozenset(range(n)):
        raise InvariantViolation("every producer must appear in some subset")
    return Schedule("custom", n, tuple(sets))


def count_rounds(schedule: Schedule, start: int, stop: int) -> int:
    """Number of rounds in which step ``stop`` is reached from ``start``.

    One more than the largest number of disjoint consecutive windows inside
    ``start .. stop-2`` in which every producer moves. Greedy packing from
    the left is optimal for windows on a line.
    """
    if stop < start:
        raise ValueError("stop must not precede start")
    everyone = frozenset(range(schedule.n))
    windows = 0
    seen: set = set()
    for i in range(start, stop - 1):
        seen |= schedule.movers(i)
        if seen == everyone:
            windows += 1
            seen = set()
    return windows + 1


@dataclass(frozen=True)
class DynamicsConfig:
    preference: str = "fine"          # "coarse" or "fine"
    rule: str = "best"                # "best", "delta-better" or "scripted"
    delta: float = 0.1
    policy: str = "best"              # delta-better move choice: "best" or "adversarial"
    lazy: bool = False
    max_steps: int = 100
    grid: int = 200
    script: tuple = ()                # scripted: next profile for each step, cycled
    script_check: str = "best"        # "best" or "weakly-better"
    stop_at_fixed_point: bool = True
    tol: float = TOL

    def __post_init__(self):
        if self.preference not in ("coarse", "fine"):
            raise InvariantViolation(f"unknown preference {self.preference!r}")
        if self.rule not in ("best", "delta-better", "scripted"):
            raise InvariantViolation(f"unknown rule {self.rule!r}")
        if self.rule == "delta-better" and not self.delta > 0:
            raise InvariantViolation("delta must be positive")
        if self.policy not in ("best", "adversarial"):
            raise InvariantViolation(f"unknown move policy {self.policy!r}")
        if self.rule == "scripted" and not self.script:
            raise InvariantViolation("scripted rule needs a script")
        if self.max_steps < 1:
            raise InvariantViolation("max_steps must be at least 1")


class Game:
    """Loads, best responses and equilibrium tests for one market.

    Homogeneous unless response functions are given, in which case the
    heterogeneous versions are used throughout.
    """

    def __init__(self, mu: Measure, n: int, fs=None, tol: float = TOL):
        self.mu, self.n, self.fs, self.tol = mu, n, fs, tol
        self._fine = fine_nash(mu, n, tol) if fs is None else None

    def loads(self, profile) -> LoadVector:
        if self.fs is None:
            return compute_loads(self.mu, profile, self.tol)
        return hetero.hetero_loads(self.mu, profile, self.fs, self.tol)

    def load_of(self, j: int, profile, level: float) -> float:
        trial = list(profile)
        trial[j] = level
        return self.loads(trial).loads[j]

    def best_response(self, j: int, profile) -> float:
        if self.fs is None:
            return fine_best_response(self.mu, [t for i, t in enumerate(profile) if i != j], self.tol)
        return hetero.hetero_best_response(self.mu, j, profile, self.fs, self.tol)

    def coarse_nash(self, profile) -> bool:
        if self.fs is None:
            return is_coarse_nash(self.mu, profile, self.tol).is_nash
        return hetero.is_hetero_coarse_nash(self.mu, profile, self.fs, self.tol)

    def fine_nash(self, profile) -> bool:
        if self.fs is None:
            return all(abs(a - b) <= self.tol for a, b in zip(sorted(profile), self._fine))
        return self.coarse_nash(profile) and all(
            abs(self.best_response(j, profile) - t) <= 1e-7 for j, t in enumerate(profile)
        )

    def candidate_loads(self, j: int, profile, cands: np.ndarray) -> np.ndarray:
        if self.fs is None:
            P = np.tile(np.asarray(profile, dtype=float), (len(cands), 1))
            P[:, j] = cands
            return loads_many(self.mu, P)[1][:, j]
        return np.array([self.load_of(j, profile, c) for c in cands])


def step_profile(game: Game, profile: Sequence[float], movers, config: DynamicsConfig,
                 step: int = 0) -> tuple[float, ...]:
    """All movers respond to the same current profile."""
    if not movers:
        raise EmptySubset("no movers at this step")
    profile = tuple(float(t) for t in profile)
    tol = config.tol
    if config.rule == "scripted":
        target = tuple(float(t) for t in config.script[step % len(config.script)])
        _check_scripted(game, profile, target, movers, config)
        return target

    new = list(profile)
    for j in movers:
        br = game.best_response(j, profile)
        if config.lazy and _is_best(game, j, profile, br, config):
            continue
        if config.rule == "delta-better" and config.policy == "adversarial":
            current = game.loads(profile).loads[j]
            grid = np.array([game.mu.sup_prefix(q * game.mu.total / config.grid) for q in range(config.grid + 1)])
            cands = np.unique(np.append(grid, br))
            gains = game.candidate_loads(j, profile, cands) - current
            ok = gains >= config.delta - tol
            if ok.any():
                smallest = gains[ok].min()
                # among equally small improvements take the largest level
                new[j] = float(cands[ok & (gains <= smallest + tol)].max())
                continue
        new[j] = br
    return tuple(new)


def _is_best(game: Game, j, profile, br, config) -> bool:
    if config.preference == "fine":
        return abs(profile[j] - br) <= config.tol
    return game.loads(profile).loads[j] >= game.load_of(j, profile, 0.0) - config.tol


def _check_scripted(game: Game, profile, target, movers, config) -> None:
    tol = config.tol
    if len(target) != len(profile):
        raise ScriptedMoveNotImproving("scripted profile has the wrong length")
    for j, (a, b) in enumerate(zip(profile, target)):
        if j not in movers:
            if abs(a - b) > tol:
                raise ScriptedMoveNotImproving(f"producer {j} is not scheduled but moves")
            continue
        now = game.loads(profile).loads[j]
        after = game.load_of(j, profile, b)
        if after < now - tol:
            raise ScriptedMoveNotImproving(f"producer {j}: load drops from {now} to {after}")
        if config.script_check == "best" and after < game.load_of(j, profile, 0.0) - tol:
            raise ScriptedMoveNotImproving(f"producer {j}: {b} is not a best response")


@dataclass(frozen=True)
class Step:
    index: int
    profile: tuple[float, ...]
    movers: frozenset
    loads: LoadVector
    coarse_nash: bool
    fine_nash: bool


@dataclass
class Trajectory:
    schedule: Schedule
    config: DynamicsConfig
    steps: list[Step] = field(default_factory=list)
    cycle: Optional[tuple[int, int]] = None  # (first step of the cycle, period)
    fixed_point: bool = False

    def first_step(self, flag: str = "coarse_nash", after: int = 0) -> Optional[int]:
        return next((s.index for s in self.steps[after:] if getattr(s, flag)), None)

    @property
    def first_equilibrium_step(self) -> Optional[int]:
        return self.first_step("fine_nash" if self.config.preference == "fine" else "coarse_nash")

    @property
    def rounds_to_first_equilibrium(self) -> Optional[int]:
        i = self.first_equilibrium_step
        return None if i is None else count_rounds(self.schedule, 0, i)

    def to_csv(self) -> str:
        n = self.schedule.n
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "movers", *(f"t_{j}" for j in range(n)), "l_noconsume",
                    *(f"l_{j}" for j in range(n)), "coarse_nash", "fine_nash"])
        for s in self.steps:
            w.writerow([s.index, ";".join(map(str, sorted(s.movers))), *map(_fmt, s.profile),
                        _fmt(s.loads.noconsume), *map(_fmt, s.loads.loads),
                        int(s.coarse_nash), int(s.fine_nash)])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def run_dynamics(game: Game, start: Sequence[float], schedule: Schedule, config: DynamicsConfig) -> Trajectory:
    if len(start) != game.n or schedule.n != game.n:
        raise InvariantViolation("profile, schedule and game disagree on the number of producers")
    traj = Trajectory(schedule, config)
    profile = tuple(float(t) for t in start)
    seen: dict = {}
    quiet: set = set()  # producers that moved without changing since the last change
    for i in range(config.max_steps + 1):
        movers = schedule.movers(i)
        traj.steps.append(Step(i, profile, movers, game.loads(profile),
                               game.coarse_nash(profile), game.fine_nash(profile)))
        if i == config.max_steps:
            break
        key = (tuple(round(t * 1e12) for t in profile), i % schedule.period)
        if traj.cycle is None and key in seen:
            traj.cycle = (seen[key], i - seen[key])
        seen.setdefault(key, i)

        new = step_profile(game, profile, movers, config, i)
        if new == profile:
            quiet |= movers
        else:
            quiet = set()
        profile = new
        if config.stop_at_fixed_point and config.rule != "scripted" and len(quiet) == schedule.n:
            traj.fixed_point = True
            traj.steps.append(Step(i + 1, profile, schedule.movers(i + 1), game.loads(profile),
                                   game.coarse_nash(profile), game.fine_nash(profile)))
            break
    return traj


def tight_coarse_script(n: int) -> tuple[tuple[float, ...], tuple[tuple[float, ...], ...]]:
    """Start and cycled script of the slow simultaneous coarse best-response run on U([0,1]).

    Step i (1 <= i <= n-1) has i producers at (n-i)/n, the next one at
    (n-i-1)/(n-1) and the rest at 0; after step n-1 it wraps to step 1.
    """
    if n < 2:
        raise InvariantViolation("needs at least two producers")
    start = (1.0,) + (0.0,) * (n - 1)
    script = []
    for i in range(1, n):
        script.append(tuple([(n - i) / n] * i + [(n - i - 1) / (n - 1)] + [0.0] * (n - i - 1)))
    return start, tuple(script)
