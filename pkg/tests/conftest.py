"""Shared fixtures: hand-built instances and a seeded tiny-instance generator."""

from __future__ import annotations

import random

import pytest

from cttsolve.instance import (Course, Curriculum, Instance, Room,
                               WeightVector, parse_ctt)

TOY_CTT = """\
Name: toy
Courses: 3
Rooms: 2
Days: 2
Periods_per_day: 3
Curricula: 1
Constraints: 1

COURSES:
c1 t1 3 2 30
c2 t2 2 1 25
c3 t1 2 2 12

ROOMS:
rA 32
rB 20

CURRICULA:
q1 2 c1 c2

UNAVAILABILITY_CONSTRAINTS:
c1 0 0

END.
"""

TIGHT_CTT = """\
Name: tight
Courses: 3
Rooms: 1
Days: 2
Periods_per_day: 3
Curricula: 1
Constraints: 0

COURSES:
c1 t1 2 2 12
c2 t2 2 2 8
c3 t3 2 1 15

ROOMS:
rA 10

CURRICULA:
q1 3 c1 c2 c3

UNAVAILABILITY_CONSTRAINTS:

END.
"""


def make_instance(courses, rooms, curricula, days=2, periods_per_day=3,
                  unavailability=(), weights=(1, 5, 2, 1), name="synthetic"):
    return Instance(
        name=name,
        courses=tuple(Course(*c) for c in courses),
        rooms=tuple(Room(*r) for r in rooms),
        curricula=tuple(Curriculum(cid, frozenset(members))
                        for cid, members in curricula),
        days=days,
        periods_per_day=periods_per_day,
        unavailability=frozenset(unavailability),
        weights=WeightVector(*weights),
    )


@pytest.fixture
def toy_instance():
    return parse_ctt(TOY_CTT)


@pytest.fixture
def tight_instance():
    return parse_ctt(TIGHT_CTT)


@pytest.fixture
def lectures_instance():
    """Three courses with distinct teachers; two overlapping curricula."""
    return make_instance(
        courses=[("Juggling", "tJ", 1, 1, 10),
                 ("Math101", "tM", 2, 1, 20),
                 ("Algo101", "tA", 2, 1, 20)],
        rooms=[("r1", 25), ("r2", 15)],
        curricula=[("cur1", ["Math101", "Algo101"]),
                   ("cur2", ["Juggling", "Algo101"])],
        days=2, periods_per_day=4,
    )


def random_tiny_instance(rng: random.Random) -> Instance:
    """Random instance small enough for brute-force enumeration:
    at most 3 courses, 2 rooms, 2 days of at most 4 periods."""
    days = rng.randint(1, 2)
    ppd = rng.randint(2, 4)
    periods = days * ppd
    n_courses = rng.randint(1, 3)
    n_rooms = rng.randint(1, 2)
    courses = []
    for i in range(n_courses):
        events = rng.randint(1, min(2, periods))
        min_days = rng.randint(1, min(days, events))
        teacher = f"t{rng.randint(1, 2)}"
        students = rng.randint(5, 40)
        courses.append((f"c{i}", teacher, events, min_days, students))
    rooms = [(f"r{i}", rng.choice([10, 20, 35])) for i in range(n_rooms)]
    ids = [c[0] for c in courses]
    curricula = []
    if n_courses >= 2 and rng.random() < 0.8:
        size = rng.randint(2, n_courses)
        curricula.append(("q0", rng.sample(ids, size)))
    unavailability = set()
    for cid, _, events, _, _ in courses:
        banned = rng.sample(range(periods),
                            rng.randint(0, max(0, periods - events - 1)))
        for p in banned[:2]:
            unavailability.add((cid, p))
    instance = make_instance(courses, rooms, curricula, days, ppd,
                             unavailability, name=f"rnd{rng.random():.6f}")
    instance.validate()
    return instance
