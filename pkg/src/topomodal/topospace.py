"""Finite topological spaces given by an explicit family of open sets.

Point sets are bitmasks over the point order of the space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .kripke import BiFrame, bits, is_reflexive, is_transitive

__all__ = [
    "FiniteSpace", "Operators", "SpacePredicates", "from_preorder", "to_preorder",
    "operators", "predicates", "kuratowski_identity_holds", "subspace",
    "discrete_space", "indiscrete_space",
]


def _close_under_union_intersection(sets: Iterable[int]) -> frozenset[int]:
    family = set(sets)
    changed = True
    while changed:
        changed = False
        current = list(family)
        for a in current:
            for b in current:
                for c in (a | b, a & b):
                    if c not in family:
                        family.add(c)
                        changed = True
    return frozenset(family)


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    points: tuple[str, ...]
    opens: frozenset[int]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.points)
        if n == 0:
            raise ValueError("a space needs at least one point")
        if len(set(self.points)) != n:
            raise ValueError("point ids must be distinct")
        full = (1 << n) - 1
        if 0 not in self.opens or full not in self.opens:
            raise ValueError("the empty set and the whole space must be open")
        if any(o & ~full for o in self.opens):
            raise ValueError("open set mentions a point outside the space")
        for a in self.opens:
            for b in self.opens:
                if a | b not in self.opens or a & b not in self.opens:
                    raise ValueError("opens are not closed under union and intersection")

    def __eq__(self, other):
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return self.points == other.points and self.opens == other.opens

    def __hash__(self):
        return hash((self.points, self.opens))

    @classmethod
    def from_sets(cls, points: Sequence[str], opens: Iterable[Iterable[str]], complete_subbasis: bool = False) -> FiniteSpace:
        points = tuple(points)
        index = {p: i for i, p in enumerate(points)}
        masks = []
        for o in opens:
            m = 0
            for p in o:
                if p not in index:
                    raise ValueError(f"open set mentions unknown point {p!r}")
                m |= 1 << index[p]
            masks.append(m)
        if complete_subbasis:
            full = (1 << len(points)) - 1
            return cls(points, _close_under_union_intersection(masks + [0, full]))
        return cls(points, frozenset(masks))

    @classmethod
    def from_dict(cls, data: dict) -> FiniteSpace:
        return cls.from_sets(data["points"], data["opens"], bool(data.get("complete_subbasis", False)))

    def to_dict(self) -> dict:
        opens = sorted(self.opens, key=lambda m: (bin(m).count("1"), m))
        return {"points": list(self.points), "opens": [self.ids(o) for o in opens]}

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def index(self, p: str) -> int:
        try:
            return self.points.index(p)
        except ValueError:
            raise KeyError(f"unknown point {p!r}") from None

    def ids(self, mask: int) -> list[str]:
        return [self.points[i] for i in bits(mask)]

    def mask(self, ids: Iterable[str]) -> int:
        m = 0
        for p in ids:
            m |= 1 << self.index(p)
        return m

    # operators on bitmasks ------------------------------------------------

    def interior(self, v: int) -> int:
        out = 0
        for o in self.opens:
            if o & ~v == 0:
                out |= o
        return out

    def closure(self, v: int) -> int:
        return self.full & ~self.interior(self.full & ~v)

    def derived(self, v: int) -> int:
        """Limit points of ``v``: x with x in C(v - {x})."""
        out = 0
        for x in range(self.n):
            if self.closure(v & ~(1 << x)) >> x & 1:
                out |= 1 << x
        return out

    def coderived(self, v: int) -> int:
        return self.full & ~self.derived(self.full & ~v)

    def table(self, name: str) -> tuple[int, ...]:
        """The operator ``name`` tabulated over all subsets."""
        tab = self._cache.get(name)
        if tab is None:
            if self.n > 16:
                raise ValueError("operator tables are limited to 16 points")
            op = getattr(self, name)
            tab = tuple(op(v) for v in range(1 << self.n))
            self._cache[name] = tab
        return tab

    @cached_property
    def neighbourhood(self) -> tuple[int, ...]:
        """Least open neighbourhood of each point."""
        out = []
        for x in range(self.n):
            m = self.full
            for o in self.opens:
                if o >> x & 1:
                    m &= o
            out.append(m)
        return tuple(out)


class Operators(NamedTuple):
    interior: frozenset[str]
    closure: frozenset[str]
    derived: frozenset[str]
    coderived: frozenset[str]
    boundary: frozenset[str]


class SpacePredicates(NamedTuple):
    dense_in_itself: bool
    local_T1: bool
    T1: bool
    discrete: bool
    connected: bool


def operators(X: FiniteSpace, V: Iterable[str]) -> Operators:
    v = X.mask(V)
    i, c = X.interior(v), X.closure(v)
    as_set = lambda m: frozenset(X.ids(m))  # noqa: E731
    return Operators(as_set(i), as_set(c), as_set(X.derived(v)), as_set(X.coderived(v)), as_set(c & ~i))


def predicates(X: FiniteSpace) -> SpacePredicates:
    full = X.full
    singles = [1 << x for x in range(X.n)]
    closed = {full & ~o for o in X.opens}
    local_t1 = all(
        any(o >> x & 1 and X.closure(s) & o == s for o in X.opens)
        for x, s in enumerate(singles)
    )
    clopen = X.opens & closed
    return SpacePredicates(
        dense_in_itself=X.derived(full) == full,
        local_T1=local_t1,
        T1=all(s in closed for s in singles),
        discrete=all(s in X.opens for s in singles),
        connected=clopen <= {0, full},
    )


def kuratowski_identity_holds(X: FiniteSpace, V: Iterable[str]) -> bool:
    """d((V & d(-V)) | (-V & dV)) == dV & d(-V)."""
    v = X.mask(V)
    nv = X.full & ~v
    dv, dnv = X.derived(v), X.derived(nv)
    return X.derived((v & dnv) | (nv & dv)) == dv & dnv


def from_preorder(F: BiFrame) -> FiniteSpace:
    """Alexandrov space of a quasi-order: the open sets are the R-upsets."""
    if not (is_reflexive(F.r) and is_transitive(F.r)):
        raise ValueError("from_preorder needs a reflexive transitive R")
    opens = []
    for v in range(1 << F.n):
        up = 0
        for x in bits(v):
            up |= F.r[x]
        if up & ~v == 0:
            opens.append(v)
    return FiniteSpace(F.worlds, frozenset(opens))


def to_preorder(X: FiniteSpace) -> BiFrame:
    """Specialisation order: x R y iff y lies in every open neighbourhood of x."""
    return BiFrame(X.points, X.neighbourhood)


def subspace(X: FiniteSpace, Y: Iterable[str] | int) -> FiniteSpace:
    """The subspace on ``Y`` with relative opens ``O & Y``."""
    y = Y if isinstance(Y, int) else X.mask(Y)
    if y == 0:
        raise ValueError("empty subspaces are not allowed")
    keep = list(bits(y))
    pos = {x: i for i, x in enumerate(keep)}
    opens = set()
    for o in X.opens:
        opens.add(sum(1 << pos[x] for x in bits(o & y)))
    return FiniteSpace(tuple(X.points[x] for x in keep), frozenset(opens))


def discrete_space(points: Sequence[str]) -> FiniteSpace:
    return FiniteSpace(tuple(points), frozenset(range(1 << len(points))))


def indiscrete_space(points: Sequence[str]) -> FiniteSpace:
    return FiniteSpace(tuple(points), frozenset({0, (1 << len(points)) - 1}))
