"""Command-line front end driven by JSON scenario files.

    qosmarket fine-nash --scenario uniform4.json
    qosmarket dynamics --scenario tight.json --out traj.csv
    qosmarket oracle-check loads --scenario uniform.json --seed 7

Exit status: 0 on success, 2 when a check fails, 1 on any error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import consumer, generators, hetero, multigood, oracle, producer
from .dynamics import DynamicsConfig, Game, Schedule, build_schedule, run_dynamics
from .errors import InvariantViolation, MarketError, SchemaError, UnknownCommand
from .measure import TOL, Measure

COMMANDS = ("loads", "consumer-eq", "fine-nash", "coarse-check", "best-response", "dynamics",
            "tilde", "hetero-nash", "mainstreet", "oracle-check")
ORACLE_TARGETS = ("loads", "best-response", "hetero")

_num = {"type": "number"}
_level = {"type": "number", "minimum": 0, "maximum": 1}
_profile = {"type": "array", "items": _level}
_rf = {
    "type": "object",
    "required": ["breakpoints"],
    "properties": {"breakpoints": {"type": "array", "minItems": 2, "items": {
        "type": "object", "required": ["load", "value"],
        "properties": {"load": {"type": "number", "minimum": 0}, "value": _num}}}},
}
SCHEMA = {
    "type": "object",
    "required": ["measure", "producers"],
    "properties": {
        "measure": {
            "type": "object",
            "properties": {
                "atoms": {"type": "array", "items": {
                    "type": "object", "required": ["t", "mass"],
                    "properties": {"t": _level, "mass": {"type": "number", "exclusiveMinimum": 0}}}},
                "segments": {"type": "array", "items": {
                    "type": "object", "required": ["from", "to", "density"],
                    "properties": {"from": _level, "to": _level, "density": {"type": "number", "minimum": 0}}}},
            },
            "additionalProperties": False,
        },
        "producers": {
            "type": "object",
            "properties": {"n": {"type": "integer", "minimum": 0},
                           "response_functions": {"type": "array", "items": _rf}},
            "additionalProperties": False,
        },
        "profile": _profile,
        "producer": {"type": "integer", "minimum": 0},
        "order": {"type": "array", "items": {"type": "integer"}},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "dynamics": {
            "type": "object",
            "properties": {
                "preference": {"enum": ["coarse", "fine"]},
                "rule": {"enum": ["best", "delta-better", "scripted"]},
                "delta": _num,
                "policy": {"enum": ["best", "adversarial"]},
                "lazy": {"type": "boolean"},
                "max_steps": {"type": "integer"},
                "grid": {"type": "integer", "minimum": 1},
                "initial": _profile,
                "script": {"type": "array", "items": _profile},
                "script_check": {"enum": ["best", "weakly-better"]},
                "schedule": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["sequential", "sequential-round-robin", "simultaneous", "custom"]},
                        "subsets": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                    },
                },
            },
        },
        "multigood": {
            "type": "object",
            "required": ["good1", "good2"],
            "properties": {"good1": {"type": "array", "items": _rf},
                           "good2": {"type": "array", "items": _rf},
                           "angle": _num},
        },
    },
}


@dataclass
class Scenario:
    measure: Measure
    n: int
    fs: Optional[tuple] = None
    profile: Optional[tuple] = None
    producer: int = 0
    order: Optional[tuple] = None
    tolerance: float = TOL
    dynamics: Optional[tuple] = None  # (config, schedule, initial profile)
    multigood: Optional[tuple] = None  # (fs1, fs2, angle)

    @property
    def game(self) -> Game:
        return Game(self.measure, self.n, self.fs, self.tolerance)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def scenario_from_dict(data: dict) -> Scenario:
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        raise SchemaError(errors[0].message, _pointer(errors[0].absolute_path))
    try:
        mu = Measure.from_dict(data["measure"])
    except SchemaError as e:
        raise SchemaError(str(e).split(": ", 1)[-1], "/measure" + e.pointer) from None

    prod = data["producers"]
    if ("n" in prod) == ("response_functions" in prod):
        raise SchemaError("give exactly one of n or response_functions", "/producers")
    fs = None
    if "response_functions" in prod:
        fs = tuple(_rf_at(d, f"/producers/response_functions/{i}") for i, d in enumerate(prod["response_functions"]))
        n = len(fs)
    else:
        n = prod["n"]
    tol = data.get("tolerance", TOL)

    profile = tuple(data["profile"]) if "profile" in data else None
    if profile is not None and len(profile) != n:
        raise InvariantViolation(f"profile has {len(profile)} levels for {n} producers")

    dyn = None
    if "dynamics" in data:
        d = dict(data["dynamics"])
        sched = d.pop("schedule", {"kind": "sequential"})
        initial = tuple(d.pop("initial", profile if profile is not None else [0.0] * n))
        if "script" in d:
            d["script"] = tuple(tuple(p) for p in d["script"])
        config = DynamicsConfig(tol=tol, **d)
        dyn = (config, build_schedule(sched["kind"], n, sched.get("subsets")), initial)

    mg = None
    if "multigood" in data:
        m = data["multigood"]
        mg = (tuple(_rf_at(x, f"/multigood/good1/{i}") for i, x in enumerate(m["good1"])),
              tuple(_rf_at(x, f"/multigood/good2/{i}") for i, x in enumerate(m["good2"])),
              float(m.get("angle", 0.0)))
    order = tuple(data["order"]) if "order" in data else None
    return Scenario(mu, n, fs, profile, data.get("producer", 0), order, tol, dyn, mg)


def _rf_at(d: dict, pointer: str) -> hetero.ResponseFunction:
    try:
        return hetero.ResponseFunction.from_dict(d)
    except MarketError as e:
        raise SchemaError(str(e), pointer) from None


def parse_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}", "") from None
    return scenario_from_dict(data)


def _round(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, np.generic):
        return _round(x.item())
    return x


def dumps(obj) -> str:
    return json.dumps(_round(obj))


def _need_profile(sc: Scenario) -> tuple:
    if sc.profile is None:
        raise InvariantViolation("this command needs a 'profile'")
    return sc.profile


def _need_fs(sc: Scenario) -> tuple:
    if sc.fs is None:
        raise InvariantViolation("this command needs producers.response_functions")
    return sc.fs


def execute(command: str, sc: Optional[Scenario], args) -> tuple[int, str]:
    """Run one command; returns (exit code, text to emit)."""
    if command not in COMMANDS:
        raise UnknownCommand(f"unknown command {command!r}")
    if command == "oracle-check":
        return _oracle_check(sc, args)
    if sc is None:
        raise InvariantViolation(f"{command} needs --scenario")
    mu, tol = sc.measure, sc.tolerance

    if command == "loads":
        return 0, dumps(sc.game.loads(_need_profile(sc)).to_dict())
    if command == "consumer-eq":
        t = _need_profile(sc)
        s = consumer.symmetric_equilibrium(mu, t, tol)
        rep = consumer.verify_equilibrium(mu, t, s, tol)
        out = {"strategy": s.to_dict(), "ok": rep.ok, "worst_violation": rep.worst_violation,
               "loads": rep.loads.to_dict()}
        if not mu.has_atoms:
            out["pure"] = consumer.purify(mu, s).to_dict()
        return (0 if rep.ok else 2), dumps(out)
    if command == "fine-nash":
        if sc.fs is not None:
            return 0, dumps(list(hetero.hetero_fine_nash(mu, sc.fs, sc.order, tol)))
        return 0, dumps(list(producer.fine_nash(mu, sc.n, tol)))
    if command == "coarse-check":
        t = _need_profile(sc)
        if sc.fs is not None:
            ok = hetero.is_hetero_coarse_nash(mu, t, sc.fs, tol)
            return (0 if ok else 2), dumps({"is_nash": ok})
        rep = producer.is_coarse_nash(mu, t, tol)
        return (0 if rep.is_nash else 2), dumps({"is_nash": rep.is_nash, "slacks": list(rep.slacks)})
    if command == "best-response":
        t = list(_need_profile(sc))
        j = sc.producer
        if not 0 <= j < len(t):
            raise InvariantViolation(f"producer {j} out of range")
        br = sc.game.best_response(j, t)
        t[j] = br
        return 0, dumps({"producer": j, "best_response": br, "load": sc.game.loads(t).loads[j]})
    if command == "dynamics":
        if sc.dynamics is None:
            raise InvariantViolation("scenario has no 'dynamics' section")
        config, schedule, initial = sc.dynamics
        if args.max_steps is not None:
            config = DynamicsConfig(**{**config.__dict__, "max_steps": args.max_steps})
        traj = run_dynamics(sc.game, initial, schedule, config)
        return 0, traj.to_csv()
    if command == "tilde":
        return 0, dumps(list(hetero.tilde_loads(mu, _need_fs(sc))))
    if command == "hetero-nash":
        fs = _need_fs(sc)
        t = hetero.hetero_fine_nash(mu, fs, sc.order, tol)
        return 0, dumps({"profile": list(t), "loads": list(hetero.hetero_loads(mu, t, fs, tol).loads),
                         "tilde": list(hetero.tilde_loads(mu, fs))})
    # mainstreet
    if sc.multigood is None:
        raise InvariantViolation("scenario has no 'multigood' section")
    fs1, fs2, angle = sc.multigood
    placements = multigood.mainstreet_equilibrium(mu, fs1, fs2, angle, tol=tol)
    rep = multigood.verify_mainstreet(mu, fs1, fs2, placements, tol)
    return (0 if rep.ok else 2), dumps({"placements": [p.to_dict() for p in placements], "ok": rep.ok,
                                        "violations": [list(map(str, v)) for v in rep.violations]})


def _oracle_check(sc: Optional[Scenario], args) -> tuple[int, str]:
    target = args.target or "loads"
    if target not in ORACLE_TARGETS:
        raise UnknownCommand(f"unknown oracle target {target!r}")
    rng = np.random.default_rng(args.seed)
    step = args.pour_step or 1e-4
    grid = args.grid or 2000
    worst = 0.0
    for _ in range(args.instances):
        mu = sc.measure if sc is not None else generators.random_measure(rng)
        n = int(rng.integers(1, 7 if target != "hetero" else 5))
        t = generators.random_profile(rng, mu, n)
        if target == "loads":
            got = consumer.compute_loads(mu, t).loads
            ref = oracle.pour_loads(mu, t, step=step).loads
        elif target == "hetero":
            fs = [generators.random_response_function(rng) for _ in range(n)]
            got = hetero.hetero_loads(mu, t, fs).loads
            ref = oracle.pour_loads(mu, t, fs, step=step).loads
        else:
            got = [producer.fine_best_response(mu, t[1:])]
            ref = [oracle.grid_best_response(mu, t[1:], grid)]
        worst = max(worst, max(abs(a - b) for a, b in zip(got, ref)))
    limit = 1e-3 if target != "best-response" else 2.0 / grid
    ok = worst <= limit
    return (0 if ok else 2), dumps({"target": target, "instances": args.instances,
                                    "max_deviation": worst, "limit": limit, "ok": ok})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qosmarket", description=__doc__.splitlines()[0])
    p.add_argument("command", help=", ".join(COMMANDS))
    p.add_argument("target", nargs="?", help="oracle-check target: " + ", ".join(ORACLE_TARGETS))
    p.add_argument("--scenario", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int)
    p.add_argument("--pour-step", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--instances", type=int, default=20)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = parse_scenario(args.scenario) if args.scenario else None
        code, text = execute(args.command, sc, args)
    except OSError as e:
        print(json.dumps({"error": "io-error", "message": str(e)}), file=sys.stderr)
        return 1
    except MarketError as e:
        err = {"error": e.code, "message": str(e)}
        if isinstance(e, SchemaError):
            err["pointer"] = e.pointer
        print(json.dumps(err), file=sys.stderr)
        return 1
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
