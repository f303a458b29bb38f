import random
from itertools import product

import pytest

from topomodal.formula import ABox, And, DBox, parse, sharp, u_translate, variables
from topomodal.kripke import BiFrame, reflexive_closure, strip_diagonal
from topomodal.logics import axiom, get_logic, relations
from topomodal.morphism import is_p_morphism
from topomodal.semantics import (
    BudgetExceeded, Model, kripke_extension, kripke_truth, kripke_valid, logic_valid,
    topo_extension, topo_truth, topo_valid, valid,
)
from topomodal.topospace import FiniteSpace, discrete_space, from_preorder, indiscrete_space, predicates

from strategies import (
    UNARY_ALL, UNARY_BOX, UNARY_DIFF, random_basic, random_formula, random_quasi_order,
    random_space, random_transitive, random_valuation, random_weakly_transitive, worlds,
)

AB = ("a", "b")
NE2 = [("a", "b"), ("b", "a")]
W2 = NE2 + [("a", "a"), ("b", "b")]


def ne_frame():
    return BiFrame.from_pairs(AB, NE2, W2)


def brute_force_valid(F, f):
    names = variables(f)
    for sets in product(range(1 << F.n), repeat=len(names)):
        val = {v: frozenset(F.ids(m)) for v, m in zip(names, sets)}
        if kripke_extension(F, val, f) != F.full:
            return False
    return True


class TestKripkeTruth:
    def test_examples(self):
        assert kripke_truth(BiFrame.from_pairs(["a"]), {"p": set()}, "a", parse("[]false"))
        F = ne_frame()
        assert kripke_truth(F.with_rd(None), {"p": {"a"}}, "a", parse("[!=]~p"))
        # RD = W^2 makes a see itself, so p at a refutes [!=]~p there.
        assert not kripke_truth(F, {"p": {"a"}}, "a", parse("[!=]~p"))
        assert kripke_truth(F, {"p": {"a"}}, "b", parse("<!=>p & <!=>~p"))

    def test_missing_variable_is_empty(self):
        assert kripke_truth(ne_frame(), {}, "a", parse("~p"))

    def test_unknown_world(self):
        with pytest.raises(KeyError):
            kripke_truth(ne_frame(), {}, "z", parse("p"))

    def test_universal_matches_difference_when_rd_covers_inequality(self):
        rng = random.Random(4)
        for _ in range(200):
            F = random_basic(rng, rng.randint(1, 5))
            val = random_valuation(rng, F.worlds)
            g = random_formula(rng, 3, unary=UNARY_DIFF)
            lhs = kripke_extension(F, val, ABox(g))
            rhs = kripke_extension(F, val, And(g, DBox(g)))
            # [A] is universal; [!=] follows RD, which may add loops, so only one direction
            # is forced in general and both agree once RD is exactly inequality.
            assert lhs & ~rhs == 0
            G = F.with_rd(BiFrame(F.worlds, F.r).diff())
            assert kripke_extension(G, val, ABox(g)) == kripke_extension(G, val, And(g, DBox(g)))


class TestKripkeValid:
    def test_examples(self):
        F = ne_frame()
        res = kripke_valid(F, parse("[]p -> [][]p"))
        assert not res and res.countermodel.witness == "b"
        assert res.countermodel.valuation == {"p": frozenset({"a"})}
        assert kripke_valid(F, axiom("AT1"))
        single = BiFrame.from_pairs(["a"], [], [("a", "a")])
        assert not kripke_valid(single, axiom("D"))
        assert not kripke_valid(single, axiom("DS"))

    def test_ds_entails_seriality(self):
        # DS with p := true is <>true, so every DS-frame is serial.
        ds, d = axiom("DS"), axiom("D")
        for n in (1, 2):
            for r, rd in product(relations("all", n), repeat=2):
                F = BiFrame(worlds(n), r, rd)
                if kripke_valid(F, ds):
                    assert kripke_valid(F, d)

    def test_matches_brute_force(self):
        rng = random.Random(6)
        for _ in range(400):
            n = rng.randint(1, 3)
            F = BiFrame(worlds(n), random_transitive(rng, n, 0.5), random_transitive(rng, n, 0.5))
            f = random_formula(rng, 4, ("p", "q"), UNARY_DIFF)
            assert kripke_valid(F, f).valid == brute_force_valid(F, f)

    def test_first_countermodel_order(self):
        F = BiFrame.from_pairs(worlds(3), [])
        res = kripke_valid(F, parse("p -> q"))
        # index 1: p = {w0}, q = {}; fails at w0.
        assert res.countermodel.valuation == {"p": frozenset({"w0"}), "q": frozenset()}
        assert res.countermodel.witness == "w0"

    def test_countermodel_is_genuine(self):
        rng = random.Random(7)
        for _ in range(200):
            n = rng.randint(1, 4)
            F = BiFrame(worlds(n), random_weakly_transitive(rng, n), random_transitive(rng, n))
            f = random_formula(rng, 4, unary=UNARY_DIFF)
            res = kripke_valid(F, f)
            if not res:
                cm = res.countermodel
                assert not kripke_truth(F, cm.valuation, cm.witness, f)

    def test_large_frames_use_several_chunks(self):
        F = BiFrame(worlds(8), tuple((1 << ((x + 1) % 8)) for x in range(8)))
        res = kripke_valid(F, parse("[]p -> <>p"))
        assert res.valid
        res = kripke_valid(F, parse("<>p | <>~q | [][]r"))
        assert not res
        assert not kripke_truth(F, res.countermodel.valuation, res.countermodel.witness, res.countermodel.formula)

    def test_budget(self, monkeypatch):
        F = BiFrame(worlds(5), (0,) * 5)
        with pytest.raises(BudgetExceeded):
            kripke_valid(F, parse("p & q & r"), budget=1 << 14)
        monkeypatch.setenv("TOPOMODAL_BUDGET", "16")
        with pytest.raises(BudgetExceeded):
            kripke_valid(F, parse("p"))


class TestTopological:
    def test_discrete_d_box_false(self):
        X = discrete_space("abc")
        assert all(topo_truth(X, {}, x, parse("[]false"), "d") for x in "abc")

    def test_unknown_point(self):
        with pytest.raises(KeyError):
            topo_truth(discrete_space("a"), {}, "z", parse("p"))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            topo_valid(discrete_space("a"), parse("p"), "x")

    def test_c_equals_d_of_sharp(self):
        rng = random.Random(12)
        for _ in range(300):
            X = random_space(rng, rng.randint(1, 4))
            val = random_valuation(rng, X.points)
            f = random_formula(rng, 4, unary=UNARY_DIFF)
            assert topo_extension(X, val, f, "c") == topo_extension(X, val, sharp(f), "d")

    def test_alexandrov_matches_strict_order(self):
        rng = random.Random(13)
        for _ in range(300):
            n = rng.randint(1, 5)
            F = BiFrame(worlds(n), random_quasi_order(rng, n))
            X = from_preorder(F)
            val = random_valuation(rng, F.worlds)
            f = random_formula(rng, 4, unary=UNARY_DIFF + UNARY_ALL[3:])
            assert topo_extension(X, val, f, "d") == kripke_extension(strip_diagonal(F), val, f)
            assert topo_extension(X, val, f, "c") == kripke_extension(F, val, f)

    def test_finite_spaces_validate_k4o(self):
        rng = random.Random(14)
        for _ in range(50):
            assert topo_valid(random_space(rng, rng.randint(1, 4)), axiom("K4o"), "d")

    def test_at1_iff_t1(self):
        at1 = axiom("AT1")
        for n in range(1, 4):
            for r in relations("qo", n):
                X = from_preorder(BiFrame(worlds(n), r))
                assert topo_valid(X, at1, "d").valid == predicates(X).T1

    def test_ac_iff_connected(self):
        ac = axiom("AC")
        for n in range(1, 5):
            for r in relations("qo", n):
                X = from_preorder(BiFrame(worlds(n), r))
                assert topo_valid(X, ac, "c").valid == predicates(X).connected

    def test_countermodel_semantics_label(self):
        res = topo_valid(indiscrete_space("ab"), parse("[]p"), "c")
        assert res.countermodel.semantics == "topo-c"
        assert res.countermodel.witness == "a"


class TestTransfer:
    def test_sharp_transfer(self):
        rng = random.Random(15)
        for _ in range(300):
            n = rng.randint(1, 4)
            F = BiFrame(worlds(n), random_weakly_transitive(rng, n))
            f = random_formula(rng, 3, ("p",), UNARY_BOX)
            assert kripke_valid(reflexive_closure(F), f).valid == kripke_valid(F, sharp(f)).valid

    def test_u_transfer(self):
        rng = random.Random(16)
        for _ in range(300):
            n = rng.randint(1, 4)
            F = BiFrame(worlds(n), random_weakly_transitive(rng, n))
            F = F.with_rd(F.diff())
            f = random_formula(rng, 3, ("p",), UNARY_ALL)
            assert kripke_valid(F, f).valid == kripke_valid(F, u_translate(f)).valid

    def test_p_morphism_preserves_validity(self):
        # Collapsing a 2-cluster onto a reflexive point.
        F = BiFrame.from_pairs(AB, W2)
        G = BiFrame.from_pairs(["c"], [("c", "c")])
        h = {"a": "c", "b": "c"}
        assert is_p_morphism(h, F, G)
        rng = random.Random(17)
        for _ in range(200):
            f = random_formula(rng, 4, unary=UNARY_BOX)
            if kripke_valid(F, f):
                assert kripke_valid(G, f)


class TestModelsAndLogics:
    def test_model_round_trip(self):
        M = Model(ne_frame(), {"p": frozenset({"b"})})
        assert Model.from_dict(M.to_dict()) == M
        X = indiscrete_space("xy")
        M = Model(X, {"q": frozenset({"x", "y"})})
        assert Model.from_dict(M.to_dict()) == M

    def test_model_rejects_unknown_ids(self):
        data = ne_frame().to_dict()
        data["valuation"] = {"p": ["zz"]}
        with pytest.raises(ValueError):
            Model.from_dict(data)

    def test_dispatch(self):
        with pytest.raises(ValueError):
            valid(ne_frame(), parse("p"), "d")
        with pytest.raises(ValueError):
            valid(discrete_space("a"), parse("p"), "kripke")

    def test_logic_valid_examples(self):
        assert logic_valid(ne_frame(), get_logic("K4oD+"))
        psi2 = BiFrame.from_pairs(["b", "a0", "a1"], [("b", "a0"), ("b", "a1"), ("a0", "a0"), ("a1", "a1")])
        psi2 = psi2.with_rd((7, 7, 7))
        assert not logic_valid(psi2, get_logic("DT1K"))
        assert not kripke_valid(psi2, axiom("Ku"))
        X = discrete_space("ab")
        kt1 = get_logic("KT1")
        assert logic_valid(X, kt1, "d")
        assert not topo_valid(X, axiom("D"), "d")

    def test_space_file_valuation(self):
        X = FiniteSpace.from_sets("ab", [[], ["a"], ["a", "b"]])
        M = Model.from_dict({**X.to_dict(), "valuation": {"p": ["a"]}})
        assert topo_truth(M.structure, M.valuation, "b", parse("<>p"), "d")
