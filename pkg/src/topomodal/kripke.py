"""Finite Kripke frames and biframes.

A :class:`BiFrame` stores each relation as a tuple of successor bitmasks:
``r[x]`` has bit ``y`` set iff ``x R y``.  The optional second relation ``rd``
interprets the difference modality; 1-modal frames leave it as ``None``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "BiFrame", "FrameReport", "analyze", "reflexive_closure", "strip_diagonal",
    "clusters", "maximal_clusters", "cone", "is_basic", "at1_condition",
    "is_connected", "ku_frame_condition", "global_path", "reduced_global_path",
    "unfold", "phi_frame", "psi_frame", "bits", "is_transitive",
    "is_weakly_transitive", "is_reflexive", "is_serial", "reach",
    "covers_path", "is_dt1ck_frame",
]


def bits(mask: int) -> Iterable[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _pairs_to_succ(n: int, index: dict[str, int], pairs, what: str) -> tuple[int, ...]:
    succ = [0] * n
    for pair in pairs:
        a, b = pair
        try:
            succ[index[a]] |= 1 << index[b]
        except KeyError as exc:
            raise ValueError(f"{what} mentions unknown world {exc.args[0]!r}") from None
    return tuple(succ)


@dataclass(frozen=True)
class BiFrame:
    worlds: tuple[str, ...]
    r: tuple[int, ...]
    rd: tuple[int, ...] | None = None

    def __post_init__(self):
        n = len(self.worlds)
        if n == 0:
            raise ValueError("a frame needs at least one world")
        if len(set(self.worlds)) != n:
            raise ValueError("world ids must be distinct")
        full = (1 << n) - 1
        for rel in (self.r, self.rd):
            if rel is None:
                continue
            if len(rel) != n or any(m & ~full for m in rel):
                raise ValueError("relation does not fit the world set")

    @classmethod
    def from_pairs(cls, worlds: Sequence[str], r=(), rd=None) -> BiFrame:
        worlds = tuple(worlds)
        index = {w: i for i, w in enumerate(worlds)}
        if len(index) != len(worlds):
            raise ValueError("world ids must be distinct")
        succ = _pairs_to_succ(len(worlds), index, r, "R")
        dsucc = None if rd is None else _pairs_to_succ(len(worlds), index, rd, "RD")
        return cls(worlds, succ, dsucc)

    @classmethod
    def from_dict(cls, data: dict) -> BiFrame:
        return cls.from_pairs(data["worlds"], data.get("R", ()), data.get("RD"))

    def to_dict(self) -> dict:
        out = {"worlds": list(self.worlds), "R": self.pairs(self.r)}
        if self.rd is not None:
            out["RD"] = self.pairs(self.rd)
        return out

    @property
    def n(self) -> int:
        return len(self.worlds)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def index(self, w: str) -> int:
        try:
            return self.worlds.index(w)
        except ValueError:
            raise KeyError(f"unknown world {w!r}") from None

    def pairs(self, rel: Sequence[int]) -> list[list[str]]:
        return [[self.worlds[x], self.worlds[y]] for x in range(self.n) for y in bits(rel[x])]

    def diff(self) -> tuple[int, ...]:
        """The relation interpreting [!=]: ``rd`` if present, else inequality."""
        if self.rd is not None:
            return self.rd
        return tuple(self.full & ~(1 << x) for x in range(self.n))

    def ids(self, mask: int) -> list[str]:
        return [self.worlds[i] for i in bits(mask)]

    def mask(self, ids: Iterable[str]) -> int:
        m = 0
        for w in ids:
            m |= 1 << self.index(w)
        return m

    def restrict(self, mask: int) -> BiFrame:
        """The subframe on the worlds in ``mask`` (original order kept)."""
        keep = list(bits(mask))
        pos = {x: i for i, x in enumerate(keep)}

        def sub(rel):
            if rel is None:
                return None
            return tuple(sum(1 << pos[y] for y in bits(rel[x] & mask)) for x in keep)

        return BiFrame(tuple(self.worlds[x] for x in keep), sub(self.r), sub(self.rd))

    def with_rd(self, rd: Sequence[int] | None) -> BiFrame:
        return BiFrame(self.worlds, self.r, None if rd is None else tuple(rd))

    def key(self) -> tuple:
        """Encoding used for enumeration order and canonical forms."""
        return (_rel_code(self.r), -_rel_code(self.rd) if self.rd is not None else 0)


def _rel_code(rel: Sequence[int]) -> int:
    n = len(rel)
    code = 0
    for x, m in enumerate(rel):
        code |= m << (x * n)
    return code


# --------------------------------------------------------------------------
# Relation predicates on successor masks


def is_reflexive(rel: Sequence[int]) -> bool:
    return all(rel[x] >> x & 1 for x in range(len(rel)))


def is_irreflexive(rel: Sequence[int]) -> bool:
    return not any(rel[x] >> x & 1 for x in range(len(rel)))


def is_transitive(rel: Sequence[int]) -> bool:
    for x, m in enumerate(rel):
        for y in bits(m):
            if rel[y] & ~m:
                return False
    return True


def is_weakly_transitive(rel: Sequence[int]) -> bool:
    """R;R is contained in R plus the diagonal."""
    for x, m in enumerate(rel):
        allowed = m | 1 << x
        for y in bits(m):
            if rel[y] & ~allowed:
                return False
    return True


def is_serial(rel: Sequence[int]) -> bool:
    return all(rel)


def inverse(rel: Sequence[int]) -> tuple[int, ...]:
    pred = [0] * len(rel)
    for x, m in enumerate(rel):
        for y in bits(m):
            pred[y] |= 1 << x
    return tuple(pred)


def image(rel: Sequence[int], mask: int) -> int:
    out = 0
    for x in bits(mask):
        out |= rel[x]
    return out


def reach(rels: Iterable[Sequence[int]], start: int) -> int:
    """Reflexive-transitive reachability from the worlds in ``start``."""
    rels = [r for r in rels if r is not None]
    seen = start
    frontier = start
    while frontier:
        nxt = 0
        for x in bits(frontier):
            for r in rels:
                nxt |= r[x]
        frontier = nxt & ~seen
        seen |= nxt
    return seen


def _components(rel: Sequence[int], mask: int) -> list[int]:
    """Connected components of the comparability graph of ``rel`` on ``mask``."""
    sym = list(rel)
    for x, m in enumerate(rel):
        for y in bits(m):
            sym[y] |= 1 << x
    comps = []
    left = mask
    while left:
        start = left & -left
        comp = start
        frontier = start
        while frontier:
            nxt = 0
            for x in bits(frontier):
                nxt |= sym[x]
            nxt &= mask & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        left &= ~comp
    return comps


# --------------------------------------------------------------------------
# Reports and basic constructions


@dataclass(frozen=True)
class FrameReport:
    reflexive: bool
    irreflexive: bool
    transitive: bool
    weakly_transitive: bool
    serial: bool
    quasi_order: bool
    rooted: bool
    root: str | None = None


def _roots(F: BiFrame) -> list[int]:
    return [x for x in range(F.n) if reach((F.r, F.rd), 1 << x) == F.full]


def analyze(F: BiFrame) -> FrameReport:
    refl = is_reflexive(F.r)
    trans = is_transitive(F.r)
    roots = _roots(F)
    return FrameReport(
        reflexive=refl,
        irreflexive=is_irreflexive(F.r),
        transitive=trans,
        weakly_transitive=is_weakly_transitive(F.r),
        serial=is_serial(F.r),
        quasi_order=refl and trans,
        rooted=bool(roots),
        root=F.worlds[roots[0]] if roots else None,
    )


def is_rooted(F: BiFrame) -> bool:
    full = F.full
    rels = (F.r, F.rd)
    return any(reach(rels, 1 << x) == full for x in range(F.n))


def reflexive_closure(F: BiFrame) -> BiFrame:
    return BiFrame(F.worlds, tuple(m | 1 << x for x, m in enumerate(F.r)), F.rd)


def strip_diagonal(F: BiFrame) -> BiFrame:
    return BiFrame(F.worlds, tuple(m & ~(1 << x) for x, m in enumerate(F.r)), F.rd)


def _require_transitive(F: BiFrame):
    if not is_transitive(F.r):
        raise ValueError("R must be transitive")


def clusters(F: BiFrame) -> list[frozenset[str]]:
    """Partition of the worlds into clusters, ordered by least member."""
    _require_transitive(F)
    return [frozenset(F.ids(m)) for m in _cluster_masks(F)]


def _cluster_masks(F: BiFrame) -> list[int]:
    pred = inverse(F.r)
    out = []
    done = 0
    for x in range(F.n):
        if done >> x & 1:
            continue
        m = (F.r[x] & pred[x]) | 1 << x
        out.append(m)
        done |= m
    return out


def maximal_clusters(F: BiFrame) -> list[frozenset[str]]:
    """Clusters C with R-bar(C) = C."""
    _require_transitive(F)
    out = []
    for m in _cluster_masks(F):
        if image(F.r, m) | m == m:
            out.append(frozenset(F.ids(m)))
    return out


def cone(F: BiFrame, x: str) -> BiFrame:
    """Subframe generated by ``x`` under both relations."""
    return F.restrict(reach((F.r, F.rd), 1 << F.index(x)))


def is_basic(F: BiFrame) -> bool:
    """Rooted, R weakly transitive, inequality and R both inside RD."""
    if F.rd is None:
        raise ValueError("is_basic needs the second relation RD")
    if not is_rooted(F):
        return False
    if not is_weakly_transitive(F.r):
        return False
    for x in range(F.n):
        ne = F.full & ~(1 << x)
        if ne & ~F.rd[x] or F.r[x] & ~F.rd[x]:
            return False
    return True


def at1_condition(F: BiFrame) -> bool:
    """RD;R is contained in RD (for basic frames: RD-irreflexive points have no R-predecessor)."""
    if not is_basic(F):
        raise ValueError("at1_condition is defined for basic frames only")
    return _at1(F)


def _at1(F: BiFrame) -> bool:
    for x in range(F.n):
        if image(F.r, F.rd[x]) & ~F.rd[x]:
            return False
    return True


def is_connected(F: BiFrame, mask: int | None = None) -> bool:
    """Whether the comparability relation of R links all worlds (of ``mask``)."""
    _require_transitive(F)
    if mask is None:
        mask = F.full
    return len(_components(F.r, mask)) <= 1


def ku_frame_condition(F: BiFrame) -> bool:
    """Every R-irreflexive x has a connected successor set (empty counts as connected)."""
    _require_transitive(F)
    for x in range(F.n):
        if not F.r[x] >> x & 1 and len(_components(F.r, F.r[x])) > 1:
            return False
    return True


def is_dt1ck_frame(F: BiFrame) -> bool:
    """Finite rooted frames of the logic DT1CK."""
    return (
        F.rd is not None
        and is_basic(F)
        and is_transitive(F.r)
        and is_serial(F.r)
        and at1_condition(F)
        and ku_frame_condition(F)
        and is_connected(F)
    )


# --------------------------------------------------------------------------
# Paths


def _sym(rel: Sequence[int]) -> list[int]:
    sym = list(rel)
    for x, m in enumerate(rel):
        for y in bits(m):
            sym[y] |= 1 << x
    return sym


def _bfs(sym: Sequence[int], src: int, dst: int, allowed: int) -> list[int] | None:
    """Shortest path src..dst inside ``allowed``; ties go to the lower index."""
    if src == dst:
        return [src]
    parent = {src: src}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        for y in bits(sym[x] & allowed):
            if y in parent:
                continue
            parent[y] = x
            if y == dst:
                path = [y]
                while path[-1] != src:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(y)
    return None


def _rbar(F: BiFrame, x: int) -> int:
    return F.r[x] | 1 << x


def covers_path(F: BiFrame, path: Sequence[str]) -> bool:
    """Whether the worlds of ``path`` together with their R-successors exhaust W."""
    covered = 0
    for w in path:
        covered |= _rbar(F, F.index(w))
    return covered == F.full


def _covering_walk(F: BiFrame, sym, start: int, end: int, allowed: int, covered: int) -> list[int]:
    path = [start]
    covered |= _rbar(F, start)
    for t in range(F.n):
        if covered >> t & 1 or not allowed >> t & 1:
            continue
        leg = _bfs(sym, path[-1], t, allowed)
        if leg is None:
            raise ValueError("frame is not connected")
        for y in leg[1:]:
            covered |= _rbar(F, y)
        path.extend(leg[1:])
    leg = _bfs(sym, path[-1], end, allowed)
    if leg is None:
        raise ValueError("frame is not connected")
    path.extend(leg[1:])
    return path


def global_path(F: BiFrame, w: str, v: str) -> list[str]:
    """A path from ``w`` to ``v`` along R-comparability whose R-bar image is all of W."""
    if not is_connected(F):
        raise ValueError("global paths exist only in connected frames")
    sym = _sym(F.r)
    path = _covering_walk(F, sym, F.index(w), F.index(v), F.full, 0)
    return [F.worlds[x] for x in path]


def reduced_global_path(F: BiFrame, w1: str, w2: str) -> list[str]:
    """A global path from ``w1`` to ``w2`` visiting every RD-irreflexive world exactly once.

    Both endpoints must be RD-reflexive and ``F`` must be a finite rooted
    DT1CK-frame.  The route passes through the RD-irreflexive worlds in index
    order, travelling between them inside the RD-reflexive part, and finishes
    with a covering loop that avoids them.
    """
    if not is_dt1ck_frame(F):
        raise ValueError("reduced_global_path needs a rooted DT1CK-frame")
    a, b = F.index(w1), F.index(w2)
    irr = [x for x in range(F.n) if not F.rd[x] >> x & 1]
    if a in irr or b in irr:
        raise ValueError("endpoints must be RD-reflexive")
    irr_mask = sum(1 << u for u in irr)
    refl = F.full & ~irr_mask
    sym = _sym(F.r)
    path = [a]
    for stop in irr + [b]:
        leg = _bfs(sym, path[-1], stop, refl | 1 << path[-1] | 1 << stop)
        if leg is None:
            raise ValueError("RD-reflexive part is not connected")
        path.extend(leg[1:])
    covered = 0
    for x in path:
        covered |= _rbar(F, x)
    loop = _covering_walk(F, sym, b, b, refl, covered)
    path.extend(loop[1:])
    return [F.worlds[x] for x in path]


# --------------------------------------------------------------------------
# Unfolding


def unfold(F: BiFrame) -> tuple[BiFrame, dict[str, str]]:
    """Irreflexive cover of a basic frame.

    Every RD-reflexive world ``b`` is split into ``b#0`` and ``b#1``.  The new
    R keeps all R-links between distinct originals and links the two copies of
    ``b`` to each other when ``b R b``; the new RD is inequality.  Returns the
    frame and the projection onto ``F``.
    """
    if not is_basic(F):
        raise ValueError("unfold expects a basic frame")
    new: list[tuple[str, int]] = []  # (new id, original index)
    for x, w in enumerate(F.worlds):
        if F.rd[x] >> x & 1:
            new.append((f"{w}#0", x))
            new.append((f"{w}#1", x))
        else:
            new.append((w, x))
    m = len(new)
    succ = [0] * m
    for i, (_, x) in enumerate(new):
        for j, (_, y) in enumerate(new):
            if i == j:
                continue
            if x != y:
                if F.r[x] >> y & 1:
                    succ[i] |= 1 << j
            elif F.r[x] >> x & 1:
                succ[i] |= 1 << j
    full = (1 << m) - 1
    ne = tuple(full & ~(1 << i) for i in range(m))
    frame = BiFrame(tuple(w for w, _ in new), tuple(succ), ne)
    return frame, {w: F.worlds[x] for w, x in new}


# --------------------------------------------------------------------------
# Named small frames


def phi_frame(m: int, l: int) -> BiFrame:
    """An m-element root cluster below l reflexive singletons (a bare cluster if l = 0)."""
    if m < 1 or l < 0:
        raise ValueError("need m >= 1 and l >= 0")
    roots = [f"b{j + 1}" for j in range(m)]
    tops = [f"a{i + 1}" for i in range(l)]
    pairs = [(x, y) for x in roots for y in roots + tops] + [(a, a) for a in tops]
    return BiFrame.from_pairs(roots + tops, pairs)


def psi_frame(l: int) -> BiFrame:
    """An irreflexive root ``b`` below l reflexive singletons a0..a(l-1)."""
    if l < 0:
        raise ValueError("need l >= 0")
    tops = [f"a{i}" for i in range(l)]
    pairs = [("b", a) for a in tops] + [(a, a) for a in tops]
    return BiFrame.from_pairs(["b"] + tops, pairs)
