import random

import pytest

from topomodal.kripke import BiFrame, is_transitive, reflexive_closure, strip_diagonal, unfold
from topomodal.logics import enumerate_biframes, relations
from topomodal.morphism import (
    MorphismResult, PointMap, canonical_d_morphism, disjoint_union_space, is_c_morphism,
    is_d_morphism, is_dd_morphism, is_p_morphism, restrict_to_open, union_d_morphism, union_frame,
)
from topomodal.semantics import kripke_valid, topo_valid
from topomodal.topospace import (
    FiniteSpace, discrete_space, from_preorder, indiscrete_space,
)

from strategies import (
    UNARY_BOX, UNARY_DIFF, random_basic, random_formula, random_quasi_order, random_space, worlds,
)

AB = ("a", "b")
NE2 = [("a", "b"), ("b", "a")]
W2 = NE2 + [("a", "a"), ("b", "b")]
REFL_POINT = BiFrame.from_pairs(["c"], [("c", "c")])


def identity(ids):
    return {x: x for x in ids}


def quasi_order_spaces(max_n=4):
    for n in range(1, max_n + 1):
        for r in relations("qo", n):
            yield from_preorder(BiFrame(tuple(f"x{i}" for i in range(n)), r))


def dd_instance(F):
    """A verified dd-morphism onto a basic transitive F built from its unfolding."""
    G, h = unfold(F)
    X = from_preorder(reflexive_closure(G).with_rd(None))
    return X, h


class TestPMorphism:
    def test_identity(self):
        rng = random.Random(0)
        for _ in range(50):
            n = rng.randint(1, 4)
            F = BiFrame(worlds(n), tuple(rng.randrange(1 << n) for _ in range(n)))
            assert is_p_morphism(identity(F.worlds), F, F)

    def test_cluster_collapse(self):
        assert is_p_morphism({"a": "c", "b": "c"}, BiFrame.from_pairs(AB, W2), REFL_POINT)

    def test_diagnostics(self):
        F = BiFrame.from_pairs(AB, [("a", "b")])
        res = is_p_morphism({"a": "c", "b": "c"}, F, REFL_POINT)
        assert not res and res.reason
        assert res.to_dict()["ok"] is False
        G = BiFrame.from_pairs(["c", "d"], [])
        res = is_p_morphism({"a": "c", "b": "c"}, BiFrame.from_pairs(AB, []), G)
        assert not res and res.witness == {"target": "d"}

    def test_non_total_map(self):
        with pytest.raises(ValueError):
            is_p_morphism({"a": "c"}, BiFrame.from_pairs(AB, []), REFL_POINT)
        with pytest.raises(ValueError):
            is_p_morphism({"a": "zz", "b": "c"}, BiFrame.from_pairs(AB, []), REFL_POINT)

    def test_unfold_maps(self):
        for n in (1, 2, 3):
            for F in enumerate_biframes("basic", n):
                G, h = unfold(F)
                assert is_p_morphism(h, G, F, relations=("r",))
                assert is_p_morphism(h, G, F, relations=("rd",))

    def test_closed_formulas_transfer(self):
        rng = random.Random(1)
        F = BiFrame.from_pairs(AB, NE2, W2)
        G, h = unfold(F)
        for _ in range(100):
            f = random_formula(rng, 4, unary=UNARY_DIFF, closed=True)
            assert kripke_valid(G, f).valid == kripke_valid(F, f).valid

    def test_point_map_file(self):
        h = PointMap.from_dict({"map": {"a": "c"}})
        assert h["a"] == "c" and h.is_surjective(["c"])
        assert h.to_dict() == {"map": {"a": "c"}}


class TestDMorphism:
    def test_alexandrov_identity(self):
        rng = random.Random(2)
        for _ in range(100):
            n = rng.randint(1, 5)
            F = BiFrame(worlds(n), random_quasi_order(rng, n))
            X = from_preorder(F)
            assert is_c_morphism(identity(F.worlds), X, F)
            strict = strip_diagonal(F)
            # Removing loops from a nontrivial cluster breaks transitivity.
            if is_transitive(strict.r):
                assert is_d_morphism(identity(F.worlds), X, strict)

    def test_constant_maps(self):
        assert is_d_morphism({"a": "c", "b": "c"}, indiscrete_space(AB), REFL_POINT)
        assert not is_d_morphism({"a": "c", "b": "c"}, discrete_space(AB), REFL_POINT)
        assert is_c_morphism({"a": "c", "b": "c"}, discrete_space(AB), REFL_POINT)

    def test_target_checks(self):
        with pytest.raises(ValueError):
            is_d_morphism({"a": "a", "b": "b"}, discrete_space(AB), BiFrame.from_pairs(AB, NE2))
        with pytest.raises(ValueError):
            is_c_morphism({"a": "a", "b": "b"}, discrete_space(AB), BiFrame.from_pairs(AB, [("a", "b")]))

    def test_surjectivity_flag(self):
        G = BiFrame.from_pairs(["c", "d"], [])
        X = discrete_space(["a"])
        assert not is_d_morphism({"a": "c"}, X, G)
        assert is_d_morphism({"a": "c"}, X, G, allow_non_surjective=True)

    def test_d_morphisms_onto_s4_frames_are_c_morphisms(self):
        for X in quasi_order_spaces(4):
            h, F = canonical_d_morphism(X)
            assert is_d_morphism(h, X, F)
            if all(F.r[i] >> i & 1 for i in range(F.n)):
                assert is_c_morphism(h, X, F)

    def test_validity_transfer(self):
        rng = random.Random(3)
        for _ in range(60):
            X = random_space(rng, rng.randint(1, 4))
            h, F = canonical_d_morphism(X)
            f = random_formula(rng, 3, ("p",), UNARY_BOX)
            if topo_valid(X, f, "d"):
                assert kripke_valid(F, f)


class TestDDMorphism:
    def test_examples(self):
        target = BiFrame.from_pairs(["c"], [], [("c", "c")])
        res = is_dd_morphism({"a": "c", "b": "c"}, discrete_space(AB), target)
        assert res and res.profile["folds"] == {"c": 2}
        res = is_dd_morphism({"a": "c"}, discrete_space(["a"]), target)
        assert not res
        assert res.profile["d_clause"] and not res.profile["difference_clause"]

    def test_missing_rd(self):
        with pytest.raises(ValueError):
            is_dd_morphism({"a": "c"}, discrete_space(["a"]), REFL_POINT)

    def test_unfold_instances(self):
        rng = random.Random(4)
        count = 0
        for n in (1, 2, 3):
            for F in enumerate_biframes("KT1", n):
                X, h = dd_instance(F)
                assert is_dd_morphism(h, X, F)
                for _ in range(20):
                    f = random_formula(rng, 4, unary=UNARY_DIFF, closed=True)
                    assert topo_valid(X, f, "d").valid == kripke_valid(F, f).valid
                count += 1
        assert count > 10

    def test_criteria_agree_on_t1_sources(self):
        rng = random.Random(5)
        seen = 0
        for _ in range(400):
            n = rng.randint(1, 3)
            F = random_basic(rng, n, transitive=True, at1=True)
            X = discrete_space([f"x{i}" for i in range(rng.randint(1, 4))])
            h = {x: rng.choice(F.worlds) for x in X.points}
            res = is_dd_morphism(h, X, F)
            if "criteria_agree" in res.profile:
                assert res.profile["criteria_agree"]
                seen += 1
        assert seen > 0


class TestConstructions:
    def test_canonical_on_all_small_spaces(self):
        for X in quasi_order_spaces(4):
            h, F = canonical_d_morphism(X)
            assert is_transitive(F.r)
            assert is_d_morphism(h, X, F)

    def test_union_single_part(self):
        X = indiscrete_space(AB)
        h, F = canonical_d_morphism(X)
        res = union_d_morphism([(X, h, F)])
        assert res.check and res.map == h and res.frame == F

    def test_union_of_two_copies(self):
        for X in quasi_order_spaces(3):
            h, F = canonical_d_morphism(X)
            X2 = FiniteSpace(tuple(p + "'" for p in X.points), X.opens)
            F2 = BiFrame(tuple(w + "'" for w in F.worlds), F.r)
            h2 = {p + "'": w + "'" for p, w in h.items()}
            res = union_d_morphism([(X, h, F), (X2, h2, F2)])
            assert res.check
            assert res.space == disjoint_union_space([X, X2])
            assert res.frame == union_frame([F, F2])

    def test_union_onto_shared_cone(self):
        # Two spaces mapped onto overlapping generated subframes of one frame.
        top = BiFrame.from_pairs(["t"], [("t", "t")])
        F1 = BiFrame.from_pairs(["b", "t"], [("b", "t"), ("t", "t")])
        X1 = from_preorder(BiFrame.from_pairs(["x", "y", "z"],
                                              [("x", "x"), ("x", "y"), ("x", "z"), ("y", "y"), ("y", "z"), ("z", "z"), ("z", "y")]))
        h1 = {"x": "b", "y": "t", "z": "t"}
        X2 = indiscrete_space(["u", "v"])
        h2 = {"u": "t", "v": "t"}
        assert is_d_morphism(h1, X1, F1) and is_d_morphism(h2, X2, top)
        res = union_d_morphism([(X1, h1, F1), (X2, h2, top)])
        assert res.check

    def test_union_errors(self):
        X = indiscrete_space(AB)
        h, F = canonical_d_morphism(X)
        with pytest.raises(ValueError):
            union_d_morphism([(X, h, F), (X, h, F)])
        with pytest.raises(ValueError):
            union_d_morphism([(discrete_space(AB), {"a": "c0", "b": "c0"}, REFL_POINT.with_rd(None))])
        with pytest.raises(ValueError):
            union_d_morphism([])

    def test_restrictions(self):
        for X in quasi_order_spaces(4):
            h, F = canonical_d_morphism(X)
            sub, g = restrict_to_open(h, X, X.full)
            assert sub == X and g == h
            for y in X.opens:
                if y == 0:
                    continue
                Y, g = restrict_to_open(h, X, y)
                assert is_d_morphism(g, Y, F, allow_non_surjective=True)

    def test_restriction_errors(self):
        X = FiniteSpace.from_sets(AB, [[], ["a"], ["a", "b"]])
        h, _ = canonical_d_morphism(X)
        with pytest.raises(ValueError):
            restrict_to_open(h, X, ["b"])
        with pytest.raises(ValueError):
            restrict_to_open(h, X, [])


def test_result_is_falsy_on_failure():
    assert not MorphismResult(False, "x")
    assert MorphismResult(True)
