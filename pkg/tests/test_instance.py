import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TOY_CTT, make_instance, random_tiny_instance
from cttsolve.instance import (CttSemanticError, CttSyntaxError,
                               build_conflict_graph, build_multirooms,
                               instance_stats, parse_ctt, serialize_ctt)

MINIMAL_CTT = """\
Name: minimal
Courses: 1
Rooms: 1
Days: 1
Periods_per_day: 1
Curricula: 1
Constraints: 0

COURSES:
c1 t1 1 1 10

ROOMS:
r1 20

CURRICULA:
q1 1 c1

UNAVAILABILITY_CONSTRAINTS:

END.
"""


class TestParsing:
    def test_toy_fields(self, toy_instance):
        assert toy_instance.name == "toy"
        assert len(toy_instance.courses) == 3
        assert len(toy_instance.rooms) == 2
        assert toy_instance.periods == 6
        assert toy_instance.course_by_id["c1"].events == 3
        assert toy_instance.course_by_id["c1"].min_days == 2
        assert toy_instance.room_by_id["rB"].capacity == 20
        assert ("c1", 0) in toy_instance.unavailability

    def test_minimal_instance_valid(self):
        instance = parse_ctt(MINIMAL_CTT)
        assert instance.periods == 1
        assert instance.courses[0].events == 1

    def test_default_weights(self, toy_instance):
        assert toy_instance.weights.as_tuple() == (1, 5, 2, 1)

    def test_weight_override(self):
        instance = parse_ctt(MINIMAL_CTT, weights=(1, 5, 2, 0))
        assert instance.weights.stability == 0

    def test_unavailability_references_unknown_course(self):
        text = MINIMAL_CTT.replace("UNAVAILABILITY_CONSTRAINTS:\n",
                                   "UNAVAILABILITY_CONSTRAINTS:\nghost 0 0\n")
        text = text.replace("Constraints: 0", "Constraints: 1")
        with pytest.raises(CttSemanticError):
            parse_ctt(text)

    def test_truncated_file_is_syntax_error(self):
        with pytest.raises(CttSyntaxError) as err:
            parse_ctt(TOY_CTT.replace("END.\n", ""))
        assert err.value.line_no > 0

    def test_malformed_course_line(self):
        with pytest.raises(CttSyntaxError):
            parse_ctt(MINIMAL_CTT.replace("c1 t1 1 1 10", "c1 t1 1"))

    def test_header_count_mismatch(self):
        with pytest.raises(CttSemanticError):
            parse_ctt(MINIMAL_CTT.replace("Courses: 1", "Courses: 2"))

    def test_unknown_header_key(self):
        with pytest.raises(CttSyntaxError):
            parse_ctt("Bogus: 1\n" + MINIMAL_CTT)

    def test_period_indexing(self, toy_instance):
        assert toy_instance.day_of(0) == 0
        assert toy_instance.day_of(3) == 1
        assert list(toy_instance.day_periods(1)) == [3, 4, 5]


class TestRoundTrip:
    def test_toy_round_trip(self, toy_instance):
        assert parse_ctt(serialize_ctt(toy_instance)) == toy_instance

    def test_random_round_trips(self):
        rng = random.Random(7)
        for _ in range(25):
            instance = random_tiny_instance(rng)
            assert parse_ctt(serialize_ctt(instance),
                             weights=instance.weights.as_tuple()) == instance


class TestConflictGraph:
    def test_teacher_and_curriculum_edges(self, toy_instance):
        graph = build_conflict_graph(toy_instance)
        assert graph.are_adjacent("c1", "c3")  # same teacher
        assert graph.are_adjacent("c1", "c2")  # same curriculum
        assert not graph.are_adjacent("c2", "c3")
        assert graph.edge_reason[("c1", "c3")] == "teacher"
        assert graph.edge_reason[("c1", "c2")] == "curriculum"

    def test_overlapping_curricula(self, lectures_instance):
        graph = build_conflict_graph(lectures_instance)
        assert len(graph.edges) == 2
        assert graph.are_adjacent("Math101", "Algo101")
        assert graph.are_adjacent("Juggling", "Algo101")
        assert not graph.are_adjacent("Juggling", "Math101")

    def test_single_course_no_edges(self):
        instance = parse_ctt(MINIMAL_CTT)
        assert len(build_conflict_graph(instance).edges) == 0

    def test_symmetric_irreflexive(self, toy_instance):
        graph = build_conflict_graph(toy_instance)
        for a, b in graph.edges:
            assert a < b
            assert graph.are_adjacent(b, a)

    def test_removing_curriculum_never_adds_edges(self, toy_instance):
        full = build_conflict_graph(toy_instance)
        reduced_instance = make_instance(
            [(c.id, c.teacher, c.events, c.min_days, c.students)
             for c in toy_instance.courses],
            [(r.id, r.capacity) for r in toy_instance.rooms],
            [], days=toy_instance.days,
            periods_per_day=toy_instance.periods_per_day)
        reduced = build_conflict_graph(reduced_instance)
        assert reduced.edges <= full.edges


class TestMultiRooms:
    def test_single_policy(self, toy_instance):
        (mr,) = build_multirooms(toy_instance, "single")
        assert mr.multiplicity == 2
        assert mr.capacity == 32
        assert mr.members == frozenset({"rA", "rB"})

    def test_identity_policy(self, toy_instance):
        mrs = build_multirooms(toy_instance, "identity")
        assert len(mrs) == 2
        assert all(mr.multiplicity == 1 for mr in mrs)

    def test_median_split_even_count(self):
        instance = make_instance(
            [("c1", "t1", 1, 1, 5)],
            [("r1", 10), ("r2", 20), ("r3", 30), ("r4", 40)],
            [("q1", ["c1"])])
        small, large = sorted(build_multirooms(instance, "median-split"),
                              key=lambda m: m.capacity)
        # lower median (20) splits: {10, 20} below, {30, 40} above
        assert (small.multiplicity, small.capacity) == (2, 20)
        assert (large.multiplicity, large.capacity) == (2, 40)

    @given(st.integers(0, 2 ** 32), st.sampled_from(
        ["single", "median-split", "identity"]))
    @settings(max_examples=40, deadline=None)
    def test_policies_partition_rooms(self, seed, policy):
        instance = random_tiny_instance(random.Random(seed))
        mrs = build_multirooms(instance, policy)
        members = [m for mr in mrs for m in mr.members]
        assert sorted(members) == sorted(r.id for r in instance.rooms)
        for mr in mrs:
            assert mr.multiplicity == len(mr.members)
            assert mr.capacity == max(instance.room_by_id[m].capacity
                                      for m in mr.members)


class TestStats:
    def test_toy_stats(self, toy_instance):
        stats = instance_stats(toy_instance)
        assert stats.events == 7
        assert stats.frequency == pytest.approx(7 / 12)
        seats = 6 * (32 + 20)
        demand = 3 * 30 + 2 * 25 + 2 * 12
        assert stats.utilisation == pytest.approx(demand / seats)
        assert stats.conflict_edges == 2

    def test_density_matches_edge_count(self, toy_instance):
        stats = instance_stats(toy_instance)
        assert stats.conflict_density == pytest.approx(2 / 3)
