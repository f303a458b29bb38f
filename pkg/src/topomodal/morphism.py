"""Checkers for p-, d-, c- and dd-morphisms, and constructions producing d-morphisms.

Maps are plain dictionaries from source ids to target ids (or
:class:`PointMap`).  Every checker returns a :class:`MorphismResult` that is
truthy iff the map qualifies; on failure it names the least violating
target or source index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, NamedTuple, Sequence

from .kripke import (
    BiFrame, at1_condition, bits, inverse, is_basic, is_reflexive, is_transitive,
    reach,
)
from .topospace import FiniteSpace, predicates, subspace, to_preorder

__all__ = [
    "PointMap", "MorphismResult", "is_p_morphism", "is_d_morphism", "is_c_morphism",
    "is_dd_morphism", "union_d_morphism", "UnionResult", "restrict_to_open",
    "canonical_d_morphism", "disjoint_union_space", "union_frame",
]


@dataclass(frozen=True)
class PointMap:
    mapping: Mapping[str, str]

    @classmethod
    def from_dict(cls, data: dict) -> PointMap:
        return cls(dict(data["map"]))

    def to_dict(self) -> dict:
        return {"map": dict(self.mapping)}

    def __getitem__(self, key: str) -> str:
        return self.mapping[key]

    def is_surjective(self, targets: Iterable[str]) -> bool:
        return set(targets) <= set(self.mapping.values())


@dataclass(frozen=True)
class MorphismResult:
    ok: bool
    reason: str | None = None
    witness: dict | None = None
    profile: dict | None = field(default=None)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        out: dict = {"ok": self.ok}
        if self.reason is not None:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = self.witness
        if self.profile is not None:
            out["profile"] = self.profile
        return out


def _as_map(h) -> Mapping[str, str]:
    return h.mapping if isinstance(h, PointMap) else h


def _index_map(h, src: Sequence[str], dst: Sequence[str]) -> list[int]:
    """Map as a list of target indices; raises on partial maps or unknown ids."""
    h = _as_map(h)
    pos = {w: i for i, w in enumerate(dst)}
    missing = [x for x in src if x not in h]
    if missing:
        raise ValueError(f"map is not total: no image for {missing[0]!r}")
    extra = [x for x in h if x not in set(src)]
    if extra:
        raise ValueError(f"map mentions unknown source id {extra[0]!r}")
    out = []
    for x in src:
        t = h[x]
        if t not in pos:
            raise ValueError(f"map sends {x!r} to unknown target {t!r}")
        out.append(pos[t])
    return out


def _fibres(f: Sequence[int], m: int) -> list[int]:
    fib = [0] * m
    for x, t in enumerate(f):
        fib[t] |= 1 << x
    return fib


def _surjectivity(f: Sequence[int], dst: Sequence[str]) -> MorphismResult | None:
    hit = 0
    for t in f:
        hit |= 1 << t
    missing = ((1 << len(dst)) - 1) & ~hit
    if missing:
        t = (missing & -missing).bit_length() - 1
        return MorphismResult(False, "not surjective", {"target": dst[t]})
    return None


def _image_mask(f: Sequence[int], mask: int) -> int:
    out = 0
    for x in bits(mask):
        out |= 1 << f[x]
    return out


def _p_check(f, src_ids, dst_ids, rel, rel2, name) -> MorphismResult | None:
    for x in range(len(src_ids)):
        fwd = _image_mask(f, rel[x])
        target = rel2[f[x]]
        if fwd & ~target:
            y = next(y for y in bits(rel[x]) if not target >> f[y] & 1)
            return MorphismResult(
                False, f"{name}: forth condition fails",
                {"relation": name, "source": src_ids[x], "successor": src_ids[y],
                 "image": dst_ids[f[x]], "image_successor": dst_ids[f[y]]},
            )
        if target & ~fwd:
            w = ((target & ~fwd) & -(target & ~fwd)).bit_length() - 1
            return MorphismResult(
                False, f"{name}: lift condition fails",
                {"relation": name, "source": src_ids[x], "image": dst_ids[f[x]],
                 "unlifted": dst_ids[w]},
            )
    return None


def is_p_morphism(h, F: BiFrame, G: BiFrame, relations: Sequence[str] | None = None) -> MorphismResult:
    """Surjective map with f(R(x)) = R'(f(x)) for every x.

    ``relations`` picks the relation pairs to check; by default R, plus RD
    when both frames carry it.
    """
    f = _index_map(h, F.worlds, G.worlds)
    if relations is None:
        relations = ("r", "rd") if F.rd is not None and G.rd is not None else ("r",)
    for name in relations:
        rel, rel2 = getattr(F, name), getattr(G, name)
        if rel is None or rel2 is None:
            raise ValueError(f"relation {name!r} missing on one of the frames")
        bad = _p_check(f, F.worlds, G.worlds, rel, rel2, name.upper())
        if bad is not None:
            return bad
    bad = _surjectivity(f, G.worlds)
    return bad if bad is not None else MorphismResult(True)


def _equation_check(f, X: FiniteSpace, F: BiFrame, op, name: str) -> MorphismResult | None:
    fib = _fibres(f, F.n)
    pred = inverse(F.r)
    for w in range(F.n):
        lhs = op(fib[w])
        rhs = 0
        for v in bits(pred[w]):
            rhs |= fib[v]
        if lhs != rhs:
            return MorphismResult(
                False, f"{name} equation fails",
                {"target": F.worlds[w], "lhs": X.ids(lhs), "rhs": X.ids(rhs)},
            )
    return None


def is_d_morphism(h, X: FiniteSpace, F: BiFrame, allow_non_surjective: bool = False) -> MorphismResult:
    """d f^-1(w) = f^-1(R^-1(w)) for every world w of the transitive frame F."""
    if not is_transitive(F.r):
        raise ValueError("d-morphism targets must be transitive")
    f = _index_map(h, X.points, F.worlds)
    bad = _equation_check(f, X, F, X.derived, "derived-set")
    if bad is not None:
        return bad
    if not allow_non_surjective:
        bad = _surjectivity(f, F.worlds)
        if bad is not None:
            return bad
    return MorphismResult(True)


def is_c_morphism(h, X: FiniteSpace, F: BiFrame, allow_non_surjective: bool = False) -> MorphismResult:
    """C f^-1(w) = f^-1(R^-1(w)) for every world w of the quasi-ordered frame F."""
    if not (is_reflexive(F.r) and is_transitive(F.r)):
        raise ValueError("c-morphism targets must be quasi-orders")
    f = _index_map(h, X.points, F.worlds)
    bad = _equation_check(f, X, F, X.closure, "closure")
    if bad is not None:
        return bad
    if not allow_non_surjective:
        bad = _surjectivity(f, F.worlds)
        if bad is not None:
            return bad
    return MorphismResult(True)


def _is_kt1_class(F: BiFrame) -> bool:
    return is_basic(F) and is_transitive(F.r) and at1_condition(F)


def is_dd_morphism(h, X: FiniteSpace, F: BiFrame) -> MorphismResult:
    """d-morphism onto (W, R) that is also a p-morphism (X, !=) -> (W, RD).

    The profile lists the fold count of every target world.  For T1 sources
    and KT1-class targets that pass the d-morphism clause it also records
    the minimal-point criterion (``v RD v`` iff the map is manifold at ``v``
    for strictly R-minimal ``v``) and whether it agrees with the direct check.
    """
    if F.rd is None:
        raise ValueError("dd-morphism targets need the relation RD")
    f = _index_map(h, X.points, F.worlds)
    fib = _fibres(f, F.n)
    profile: dict = {"folds": {F.worlds[w]: bin(fib[w]).count("1") for w in range(F.n)}}

    clause1 = is_d_morphism(h, X, F)
    ne_src = BiFrame(X.points, tuple(X.full & ~(1 << x) for x in range(X.n)))
    clause2 = is_p_morphism(h, ne_src, BiFrame(F.worlds, F.rd), relations=("r",))
    profile["d_clause"] = clause1.ok
    profile["difference_clause"] = clause2.ok

    if clause1.ok and predicates(X).T1 and _is_kt1_class(F):
        pred = inverse(F.r)
        minimal_ok = all(
            bool(F.rd[v] >> v & 1) == (bin(fib[v]).count("1") > 1)
            for v in range(F.n) if pred[v] == 0
        )
        profile["minimal_point_criterion"] = minimal_ok
        profile["criteria_agree"] = minimal_ok == clause2.ok

    if not clause1.ok:
        return MorphismResult(False, clause1.reason, clause1.witness, profile)
    if not clause2.ok:
        reason = clause2.reason.replace("R:", "RD:", 1) if clause2.reason else None
        witness = dict(clause2.witness or {})
        if witness.get("relation") == "R":
            witness["relation"] = "RD"
        return MorphismResult(False, reason, witness, profile)
    return MorphismResult(True, profile=profile)


# --------------------------------------------------------------------------
# Constructions


def canonical_d_morphism(X: FiniteSpace) -> tuple[dict[str, str], BiFrame]:
    """The quotient of X by the clusters of its specialisation preorder.

    Clusters with two or more points become reflexive worlds and singletons
    irreflexive ones, which makes the quotient map a d-morphism onto a
    transitive frame.  World ids are ``c<k>`` in order of least member.
    """
    P = to_preorder(X)
    pred = inverse(P.r)
    reps: list[int] = []
    cls = [0] * X.n
    for x in range(X.n):
        for k, r in enumerate(reps):
            if P.r[x] >> r & 1 and pred[x] >> r & 1:
                cls[x] = k
                break
        else:
            cls[x] = len(reps)
            reps.append(x)
    m = len(reps)
    size = [0] * m
    for x in range(X.n):
        size[cls[x]] += 1
    succ = [0] * m
    for k, r in enumerate(reps):
        for y in bits(P.r[r]):
            if cls[y] != k or size[k] > 1:
                succ[k] |= 1 << cls[y]
    worlds = tuple(f"c{k}" for k in range(m))
    return {X.points[x]: worlds[cls[x]] for x in range(X.n)}, BiFrame(worlds, tuple(succ))


def disjoint_union_space(spaces: Sequence[FiniteSpace]) -> FiniteSpace:
    points: list[str] = []
    for S in spaces:
        points.extend(S.points)
    if len(set(points)) != len(points):
        raise ValueError("source spaces overlap")
    opens = set()
    for combo in product(*(sorted(S.opens) for S in spaces)):
        m, shift = 0, 0
        for S, o in zip(spaces, combo):
            m |= o << shift
            shift += S.n
        opens.add(m)
    return FiniteSpace(tuple(points), frozenset(opens))


def union_frame(frames: Sequence[BiFrame]) -> BiFrame:
    """Union of frames sharing world ids; worlds are ordered by first occurrence."""
    worlds: list[str] = []
    for G in frames:
        worlds.extend(w for w in G.worlds if w not in worlds)
    pairs = {(a, b) for G in frames for a, b in G.pairs(G.r)}
    return BiFrame.from_pairs(worlds, sorted(pairs, key=lambda p: (worlds.index(p[0]), worlds.index(p[1]))))


def _is_generated_subframe(G: BiFrame, F: BiFrame) -> bool:
    mask = F.mask(G.worlds)
    if reach((F.r,), mask) != mask:
        return False
    return F.restrict(mask).r == BiFrame(tuple(F.ids(mask)), _reorder(G, F.ids(mask))).r


def _reorder(G: BiFrame, order: Sequence[str]) -> tuple[int, ...]:
    pos = {w: i for i, w in enumerate(order)}
    succ = [0] * len(order)
    for a, b in G.pairs(G.r):
        succ[pos[a]] |= 1 << pos[b]
    return tuple(succ)


class UnionResult(NamedTuple):
    space: FiniteSpace
    frame: BiFrame
    map: dict[str, str]
    check: MorphismResult


def union_d_morphism(parts: Sequence[tuple[FiniteSpace, Mapping[str, str], BiFrame]]) -> UnionResult:
    """Glue d-morphisms X_i -> F_i into one map from the disjoint union onto the union frame."""
    if not parts:
        raise ValueError("need at least one part")
    for k, (X, h, G) in enumerate(parts):
        res = is_d_morphism(h, X, G)
        if not res:
            raise ValueError(f"part {k} is not a d-morphism: {res.reason}")
    space = disjoint_union_space([X for X, _, _ in parts])
    frame = union_frame([G for _, _, G in parts])
    for k, (_, _, G) in enumerate(parts):
        if not _is_generated_subframe(G, frame):
            raise ValueError(f"frame of part {k} is not a generated subframe of the union")
    glued: dict[str, str] = {}
    for _, h, _ in parts:
        glued.update(_as_map(h))
    return UnionResult(space, frame, glued, is_d_morphism(glued, space, frame))


def restrict_to_open(h, X: FiniteSpace, Y) -> tuple[FiniteSpace, dict[str, str]]:
    """Restrict ``h`` to the open set ``Y``; returns the subspace and the restricted map."""
    y = Y if isinstance(Y, int) else X.mask(Y)
    if y == 0:
        raise ValueError("the open set must be nonempty")
    if y not in X.opens:
        raise ValueError("the set is not open")
    sub = subspace(X, y)
    h = _as_map(h)
    return sub, {p: h[p] for p in sub.points}
