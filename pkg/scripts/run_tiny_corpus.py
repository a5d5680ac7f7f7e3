#!/usr/bin/env python3
"""Sweep a corpus of random tiny instances and cross-check the solvers.

For each generated instance the script runs exhaustive enumeration, the
built-in branch-and-bound (via the exact strategy), and the contract
strategy, then prints one table row per instance.  Any disagreement between
the exact routes, or a contract bound that fails to bracket the optimum, is
reported and makes the script exit non-zero.

Usage:
    python3 scripts/run_tiny_corpus.py [--count 25] [--seed 0]
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from cttsolve.control import StrategyConfig, run_strategy
from cttsolve.instance import (Course, Curriculum, Instance, Room,
                               CttSemanticError)
from cttsolve.solver import brute_force_instance


def random_tiny_instance(rng: random.Random) -> Instance:
    """A validated instance small enough for exhaustive enumeration."""
    while True:
        n_courses = rng.randint(1, 3)
        days = rng.randint(1, 2)
        ppd = rng.randint(2, 4)
        courses = tuple(
            Course(id=f"c{i}", teacher=f"t{rng.randint(1, 2)}",
                   events=rng.randint(1, 2),
                   min_days=rng.randint(1, days),
                   students=rng.randint(5, 40))
            for i in range(1, n_courses + 1))
        rooms = tuple(Room(id=f"r{i}", capacity=rng.randint(10, 35))
                      for i in range(1, rng.randint(1, 2) + 1))
        curricula = ()
        if rng.random() < 0.8 and n_courses >= 2:
            members = rng.sample([c.id for c in courses], 2)
            curricula = (Curriculum(id="q1", courses=frozenset(members)),)
        unavailable = set()
        for c in courses:
            for _ in range(rng.randint(0, 2)):
                unavailable.add((c.id, rng.randrange(days * ppd)))
        instance = Instance(name="tiny", courses=courses, rooms=rooms,
                            curricula=curricula, days=days,
                            periods_per_day=ppd,
                            unavailability=frozenset(unavailable))
        try:
            instance.validate()
        except CttSemanticError:
            continue
        return instance


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=25,
                        help="number of instances to generate (default 25)")
    parser.add_argument("--seed", type=int, default=0,
                        help="RNG seed (default 0)")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    header = (f"{'#':>3}  {'crs':>3} {'rms':>3} {'slots':>5}  "
              f"{'brute':>7}  {'exact':>7}  {'LB':>7}  {'UB':>7}  "
              f"{'secs':>6}  verdict")
    print(header)
    print("-" * len(header))

    failures = 0
    for i in range(args.count):
        instance = random_tiny_instance(rng)
        started = time.perf_counter()

        brute = brute_force_instance(instance)
        exact = run_strategy(instance, StrategyConfig(strategy="exact"))
        contract = run_strategy(instance, StrategyConfig(strategy="contract"))
        elapsed = time.perf_counter() - started

        if brute.status == "infeasible":
            ok = (exact.status == "infeasible"
                  and contract.status == "infeasible")
            brute_txt = exact_txt = lb = ub = "--"
        else:
            optimum = brute.lower_bound
            ok = (exact.status == "optimal"
                  and exact.upper_bound == optimum
                  and contract.lower_bound is not None
                  and contract.lower_bound <= optimum + 1e-9
                  and (contract.upper_bound is None
                       or contract.upper_bound >= optimum - 1e-9))
            brute_txt = f"{optimum:g}"
            exact_txt = f"{exact.upper_bound:g}"
            lb = ("--" if contract.lower_bound is None
                  else f"{contract.lower_bound:g}")
            ub = ("--" if contract.upper_bound is None
                  else f"{contract.upper_bound:g}")

        verdict = "ok" if ok else "MISMATCH"
        failures += 0 if ok else 1
        print(f"{i:>3}  {len(instance.courses):>3} {len(instance.rooms):>3} "
              f"{instance.periods:>5}  {brute_txt:>7}  {exact_txt:>7}  "
              f"{lb:>7}  {ub:>7}  {elapsed:>6.2f}  {verdict}")

    print(f"\n{args.count - failures}/{args.count} instances agree")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
