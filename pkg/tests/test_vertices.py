from fractions import Fraction as F

import pytest

from gfgm import (
    BernoulliPmf,
    EnumerationCapError,
    NotInPolytopeError,
    decompose,
    enumerate_vertices,
    independence_pmf,
    validate_membership,
)
from gfgm.reference import EXAMPLE_FINAL_VERTICES


class TestEnumerate:
    def test_d3_heterogeneous_matches_reference(self):
        vertices = enumerate_vertices([F(1, 2), F(1, 3), F(2, 3)])
        assert len(vertices) == 12
        expected = {tuple(F(v) for v in row) for row in EXAMPLE_FINAL_VERTICES.values()}
        assert {v.values for v in vertices} == expected

    def test_d2_frechet_pair(self):
        vertices = enumerate_vertices([F(1, 2), F(1, 2)])
        assert {v.values for v in vertices} == {
            (F(1, 2), F(0), F(0), F(1, 2)),
            (F(0), F(1, 2), F(1, 2), F(0)),
        }

    def test_all_vertices_are_members(self):
        p = [F(1, 2), F(1, 2), F(1, 2)]
        vertices = enumerate_vertices(p)
        assert vertices
        for v in vertices:
            assert validate_membership(v, p)
            assert len([x for x in v.values if x != 0]) <= 4

    def test_minimality_no_vertex_decomposes_over_the_others(self):
        p = [F(1, 2), F(1, 2), F(1, 2)]
        vertices = enumerate_vertices(p)
        for i, v in enumerate(vertices):
            others = vertices[:i] + vertices[i + 1 :]
            with pytest.raises(NotInPolytopeError):
                decompose(v, others)

    def test_output_sorted_and_duplicate_free(self):
        vertices = enumerate_vertices([F(1, 3), F(1, 2), F(1, 4)])
        values = [v.values for v in vertices]
        assert values == sorted(values)
        assert len(set(values)) == len(values)

    def test_cap_refused(self):
        with pytest.raises(EnumerationCapError):
            enumerate_vertices([F(1, 2)] * 6)

    def test_d4_margins_exact(self):
        p = [F(1, 2), F(1, 3), F(1, 4), F(3, 4)]
        vertices = enumerate_vertices(p)
        assert len(vertices) > 4
        for v in vertices:
            assert validate_membership(v, p)


class TestDecompose:
    def test_vertex_decomposes_to_indicator(self):
        vertices = enumerate_vertices([F(1, 2), F(1, 3), F(2, 3)])
        weights = decompose(vertices[4], vertices)
        assert weights[4] == 1
        assert sum(weights) == 1 and all(w >= 0 for w in weights)

    def test_independence_d2(self):
        vertices = enumerate_vertices([F(1, 2), F(1, 2)])
        f = independence_pmf([F(1, 2), F(1, 2)])
        weights = decompose(f, vertices)
        assert weights == (F(1, 2), F(1, 2))

    def test_uniform_mixture_round_trip(self):
        vertices = enumerate_vertices([F(1, 2), F(1, 3), F(2, 3)])
        n = len(vertices)
        mixed = [sum(v.values[i] for v in vertices) / n for i in range(8)]
        f = BernoulliPmf(3, tuple(mixed))
        weights = decompose(f, vertices)
        assert sum(weights) == 1
        recombined = [
            sum(w * v.values[i] for w, v in zip(weights, vertices)) for i in range(8)
        ]
        assert tuple(recombined) == f.values

    def test_infeasible_target_rejected(self):
        vertices = enumerate_vertices([F(1, 2), F(1, 2)])
        outside = independence_pmf([F(1, 3), F(1, 2)])
        with pytest.raises(NotInPolytopeError):
            decompose(outside, vertices)
