"""Named axioms and logics, frame classes, filtration, enumeration and bounded search.

Frames are enumerated on worlds ``w0 .. w(n-1)`` in increasing order of the
R code, then decreasing order of the RD code (codes put pair ``(x, y)`` at
bit ``x*n + y``).  Only rooted frames are produced.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable, Iterable, Iterator, Sequence

from .formula import (
    Box, Formula, Imp, Not, Signature, Var, box_bar, conj, disj, parse, pretty,
    sharp, signature_of, subformula_closure, u_translate,
)
from .kripke import (
    BiFrame, _at1, bits, is_basic, is_connected, is_irreflexive,
    is_reflexive, is_rooted, is_serial, is_transitive, is_weakly_transitive,
    ku_frame_condition,
)
from .semantics import Countermodel, Model, kripke_extension, kripke_valid

__all__ = [
    "AXIOMS", "axiom", "generalized_ku", "FrameClass", "LogicSpec", "LOGICS", "FRAME_CLASSES",
    "get_logic", "get_frame_class", "FiltrationResult", "filtrate", "enumerate_biframes",
    "NoCountermodelUpTo", "decide_bounded", "canonical_key", "ENUMERATION_CAP", "relations",
]

ENUMERATION_CAP = 6

_AXIOM_TEXT = {
    "K4": "[]p -> [][]p",
    "K4o": "p & []p -> [][]p",
    "D": "<>true",
    "T": "[]p -> p",
    "GL": "[]([]p -> p) -> []p",
    "Ver": "[]false",
    "DL_B": "<>[]p -> p",
    "K4o_d": "p & [!=]p -> [!=][!=]p",
    "B_d": "<!=>[!=]p -> p",
    "Dplus": "[!=]p -> []p",
    "D_diff": "[!=]p & p -> []p",
    "AT1": "[!=]p -> [!=][]p",
    "AC": "[A]([]p | []~p) -> [A]p | [A]~p",
    "DS": "[!=]p -> <>p",
    "Ku": "[](([]p & p) | ([]~p & ~p)) -> []p | []~p",
    "Ku_prime": "<>((p & <>~p) | (~p & <>p)) <-> <>p & <>~p",
    "G1C": "[!=](([]p & p) | ([]~p & ~p)) -> [!=]p | [!=]~p",
    "T_A": "[A]p -> p",
    "4_A": "[A]p -> [A][A]p",
    "B_A": "p -> [A]<E>p",
    "U": "[A]p -> []p",
}

AXIOMS = tuple(sorted(list(_AXIOM_TEXT) + ["AC_sharp_u", "Ku1"]))


@lru_cache(maxsize=None)
def axiom(name: str) -> Formula:
    if name in _AXIOM_TEXT:
        return parse(_AXIOM_TEXT[name])
    if name == "AC_sharp_u":
        return u_translate(sharp(axiom("AC")))
    if name == "Ku1":
        return generalized_ku(1)
    raise KeyError(f"unknown axiom {name!r}; known: {', '.join(AXIOMS)}")


def generalized_ku(n: int) -> Formula:
    """[] OR_k ([]Q_k & Q_k) -> OR_k []~Q_k with Q_k = p_k & AND_{j != k} ~p_j."""
    if n < 1:
        raise ValueError("generalized_ku needs n >= 1")
    ps = [Var(f"p{k}") for k in range(n + 1)]
    qs = [conj([ps[k]] + [Not(ps[j]) for j in range(n + 1) if j != k]) for k in range(n + 1)]
    return Imp(Box(disj(box_bar(q) for q in qs)), disj(Box(Not(q)) for q in qs))


# --------------------------------------------------------------------------
# Frame classes


@dataclass(frozen=True)
class FrameClass:
    """A named predicate on rooted frames together with generation hints.

    ``r_family`` and ``rd_family`` describe supersets of the class used by
    the enumerator; ``scope`` says which frames the class is compared
    against ("mono": no RD, "bi": any RD, "universal": RD = W x W).
    ``r_filter`` is a necessary condition on R alone, tested on the frame
    without RD before any RD candidate is tried; ``rd_filter(r, rd)`` is a
    cheap necessary condition on the pair of successor tuples.
    """

    name: str
    predicate: Callable[[BiFrame], bool]
    r_family: str = "all"
    rd_family: str | None = "all"
    scope: str = "bi"
    r_filter: Callable[[BiFrame], bool] | None = None
    rd_filter: Callable[[Sequence[int], Sequence[int]], bool] | None = None

    def __call__(self, F: BiFrame) -> bool:
        return self.predicate(F)


def _mono(F):
    return F.rd is None


def _universal_rd(F):
    return F.rd is not None and all(m == F.full for m in F.rd)


def _ne_in_rd(F):
    return F.rd is not None and all(F.full & ~(1 << x) & ~m == 0 for x, m in enumerate(F.rd))


def _symmetric(rel):
    return all((rel[y] >> x & 1) for x, m in enumerate(rel) for y in bits(m))


def _quasi(F):
    return is_reflexive(F.r) and is_transitive(F.r)


def _basic(F):
    return F.rd is not None and is_basic(F)


def _basic_at1(F):
    return _basic(F) and _at1(F)


def _kt1(F):
    return is_transitive(F.r) and _basic(F) and _at1(F)


def _dt1(F):
    return _kt1(F) and is_serial(F.r)


def _d4(F):
    return _mono(F) and is_transitive(F.r) and is_serial(F.r)


def _r_in_rd(r, rd):
    return all(a & ~b == 0 for a, b in zip(r, rd))


def _r_in_rd_at1(r, rd):
    for a, b in zip(r, rd):
        if a & ~b:
            return False
    for x, b in enumerate(rd):
        img = 0
        for y in bits(b):
            img |= r[y]
        if img & ~b:
            return False
    return True


def _serial_r(F):
    return is_serial(F.r)


def _serial_connected_r(F):
    return is_serial(F.r) and is_connected(F)


def _serial_ku_r(F):
    return is_serial(F.r) and ku_frame_condition(F)


def _serial_ku_connected_r(F):
    return is_serial(F.r) and ku_frame_condition(F) and is_connected(F)


FRAME_CLASSES: dict[str, FrameClass] = {
    c.name: c
    for c in [
        FrameClass("K4o", lambda F: _mono(F) and is_weakly_transitive(F.r), "wt", None, "mono"),
        FrameClass("K4", lambda F: _mono(F) and is_transitive(F.r), "t", None, "mono"),
        FrameClass("D4", _d4, "t", None, "mono"),
        FrameClass("S4", lambda F: _mono(F) and _quasi(F), "qo", None, "mono"),
        FrameClass("GL", lambda F: _mono(F) and is_transitive(F.r) and is_irreflexive(F.r), "t", None, "mono"),
        FrameClass("Ver", lambda F: _mono(F) and not any(F.r), "t", None, "mono"),
        FrameClass("DL", lambda F: _mono(F) and is_weakly_transitive(F.r) and _symmetric(F.r), "wt", None, "mono"),
        FrameClass("D4K", lambda F: _d4(F) and ku_frame_condition(F), "t", None, "mono"),
        FrameClass("basic", _basic, "wt", "covers_ne", rd_filter=_r_in_rd),
        FrameClass("K4oD+", _basic, "wt", "covers_ne", rd_filter=_r_in_rd),
        FrameClass("K4oD+T1", _basic_at1, "wt", "covers_ne", rd_filter=_r_in_rd_at1),
        FrameClass("KT1", _kt1, "t", "covers_ne", rd_filter=_r_in_rd_at1),
        FrameClass("DT1", _dt1, "t", "covers_ne", r_filter=_serial_r, rd_filter=_r_in_rd_at1),
        FrameClass("DT1C", lambda F: _dt1(F) and is_connected(F), "t", "covers_ne",
                   r_filter=_serial_connected_r, rd_filter=_r_in_rd_at1),
        FrameClass("DT1K", lambda F: _dt1(F) and ku_frame_condition(F), "t", "covers_ne",
                   r_filter=_serial_ku_r, rd_filter=_r_in_rd_at1),
        FrameClass("DT1CK", lambda F: _dt1(F) and ku_frame_condition(F) and is_connected(F), "t",
                   "covers_ne", r_filter=_serial_ku_connected_r, rd_filter=_r_in_rd_at1),
        FrameClass("S4D", lambda F: _ne_in_rd(F) and _quasi(F), "qo", "covers_ne"),
        FrameClass("S4U", lambda F: _universal_rd(F) and _quasi(F), "qo", "universal", "universal"),
        FrameClass("K4oU", lambda F: _universal_rd(F) and is_weakly_transitive(F.r), "wt", "universal", "universal"),
    ]
}


def get_frame_class(name: str) -> FrameClass:
    try:
        return FRAME_CLASSES[name]
    except KeyError:
        raise KeyError(f"unknown frame class {name!r}; known: {', '.join(FRAME_CLASSES)}") from None


# --------------------------------------------------------------------------
# Logics


@dataclass(frozen=True)
class LogicSpec:
    name: str
    axiom_names: tuple[str, ...]
    frame_class: FrameClass
    signature: Signature
    fmp_status: str  # "proved" or "unknown"

    @property
    def axioms(self) -> tuple[Formula, ...]:
        return tuple(axiom(a) for a in self.axiom_names)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "axioms": {a: pretty(axiom(a)) for a in self.axiom_names},
            "frame_class": self.frame_class.name,
            "signature": self.signature.value,
            "fmp_status": self.fmp_status,
        }


_DL_DIFF = ("K4o_d", "B_d")
_S5_ALL = ("T_A", "4_A", "B_A", "U")

_LOGIC_TABLE = [
    ("K4o", ("K4o",), Signature.BOX_ONLY, "unknown"),
    ("K4", ("K4",), Signature.BOX_ONLY, "unknown"),
    ("D4", ("K4", "D"), Signature.BOX_ONLY, "unknown"),
    ("S4", ("K4", "T"), Signature.BOX_ONLY, "unknown"),
    ("GL", ("GL",), Signature.BOX_ONLY, "unknown"),
    ("Ver", ("Ver",), Signature.BOX_ONLY, "unknown"),
    ("DL", ("K4o", "DL_B"), Signature.BOX_ONLY, "unknown"),
    ("D4K", ("K4", "D", "Ku"), Signature.BOX_ONLY, "proved"),
    ("K4oD+", ("K4o",) + _DL_DIFF + ("Dplus",), Signature.BOX_DIFF, "unknown"),
    ("K4oD+T1", ("K4o",) + _DL_DIFF + ("Dplus", "AT1"), Signature.BOX_DIFF, "unknown"),
    ("KT1", ("K4",) + _DL_DIFF + ("Dplus", "AT1"), Signature.BOX_DIFF, "proved"),
    ("DT1", ("K4", "D") + _DL_DIFF + ("Dplus", "AT1"), Signature.BOX_DIFF, "proved"),
    ("DT1C", ("K4", "D") + _DL_DIFF + ("Dplus", "AT1", "AC_sharp_u"), Signature.BOX_DIFF, "unknown"),
    ("DT1K", ("K4", "D") + _DL_DIFF + ("Dplus", "AT1", "Ku"), Signature.BOX_DIFF, "proved"),
    ("DT1CK", ("K4", "D") + _DL_DIFF + ("Dplus", "AT1", "Ku", "AC_sharp_u"), Signature.BOX_DIFF, "proved"),
    ("S4D", ("K4", "T") + _DL_DIFF + ("D_diff",), Signature.BOX_DIFF, "unknown"),
    ("S4U", ("K4", "T") + _S5_ALL, Signature.BOX_ALL, "unknown"),
    ("K4oU", ("K4o",) + _S5_ALL, Signature.BOX_ALL, "unknown"),
]

LOGICS: dict[str, LogicSpec] = {
    name: LogicSpec(name, axs, FRAME_CLASSES[name], sig, fmp)
    for name, axs, sig, fmp in _LOGIC_TABLE
}


def get_logic(name: str) -> LogicSpec:
    try:
        return LOGICS[name]
    except KeyError:
        raise KeyError(f"unknown logic {name!r}; known: {', '.join(LOGICS)}") from None


for _spec in LOGICS.values():
    for _ax in _spec.axioms:
        if not _spec.signature.admits(signature_of(_ax)):
            raise AssertionError(f"axiom outside the language of {_spec.name}")


# --------------------------------------------------------------------------
# Filtration


@dataclass(frozen=True)
class FiltrationResult:
    model: Model
    projection: dict[str, str]
    class_count: int

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "projection": dict(self.projection),
            "class_count": self.class_count,
        }


def _lift(rel: Sequence[int], cls: Sequence[int], m: int) -> list[int]:
    out = [0] * m
    for x, succ in enumerate(rel):
        for y in bits(succ):
            out[cls[x]] |= 1 << cls[y]
    return out


def _transitive_closure(rel: list[int]) -> tuple[int, ...]:
    rel = list(rel)
    n = len(rel)
    for k in range(n):
        for x in range(n):
            if rel[x] >> k & 1:
                rel[x] |= rel[k]
    return tuple(rel)


def filtrate(model: Model, psi: Iterable[Formula]) -> FiltrationResult:
    """Quotient ``model`` by agreement on ``psi`` (which must be subformula-closed).

    R' is the transitive closure of the lifted R when R is transitive and the
    lift itself otherwise; RD' is the lift of RD.  Classes are named after
    their least member.
    """
    F = model.structure
    if not isinstance(F, BiFrame):
        raise TypeError("filtration works on Kripke models")
    psi = frozenset(psi)
    if subformula_closure(psi) != psi:
        raise ValueError("the formula set is not closed under subformulas")
    order = sorted(psi, key=pretty)
    exts = [kripke_extension(F, model.valuation, A) for A in order]
    profiles: dict[tuple, int] = {}
    cls = []
    reps = []
    for x in range(F.n):
        prof = tuple(e >> x & 1 for e in exts)
        if prof not in profiles:
            profiles[prof] = len(reps)
            reps.append(x)
        cls.append(profiles[prof])
    m = len(reps)
    r = _lift(F.r, cls, m)
    r2 = _transitive_closure(r) if is_transitive(F.r) else tuple(r)
    rd = None if F.rd is None else tuple(_lift(F.rd, cls, m))
    worlds = tuple(F.worlds[x] for x in reps)
    quotient = BiFrame(worlds, r2, rd)
    valuation = {}
    for A in order:
        if isinstance(A, Var):
            hit = model.valuation.get(A.name, frozenset())
            valuation[A.name] = frozenset(worlds[cls[F.index(w)]] for w in hit)
    projection = {F.worlds[x]: worlds[cls[x]] for x in range(F.n)}
    return FiltrationResult(Model(quotient, valuation), projection, m)


# --------------------------------------------------------------------------
# Enumeration


def _code_to_rel(code: int, n: int) -> tuple[int, ...]:
    row = (1 << n) - 1
    return tuple(code >> (x * n) & row for x in range(n))


def _rel_to_code(rel: Sequence[int]) -> int:
    n = len(rel)
    code = 0
    for x, m in enumerate(rel):
        code |= m << (x * n)
    return code


@lru_cache(maxsize=None)
def _transitive_relations(n: int) -> tuple[tuple[int, ...], ...]:
    """All transitive relations on n points, built one point at a time."""
    if n == 0:
        return ((),)
    out = []
    for rel in _transitive_relations(n - 1):
        m = n - 1
        pred = [0] * m
        for x, succ in enumerate(rel):
            for y in bits(succ):
                pred[y] |= 1 << x
        downs = [s for s in range(1 << m) if all(pred[x] & ~s == 0 for x in bits(s))]
        ups = [s for s in range(1 << m) if all(rel[x] & ~s == 0 for x in bits(s))]
        for down in downs:
            for up in ups:
                if any(up & ~rel[x] for x in bits(down)):
                    continue
                loops = (1,) if down & up else (0, 1)
                for loop in loops:
                    new = [s | ((down >> x & 1) << m) for x, s in enumerate(rel)]
                    new.append(up | loop << m)
                    out.append(tuple(new))
    return tuple(out)


@lru_cache(maxsize=None)
def _r_family(family: str, n: int) -> tuple[tuple[int, ...], ...]:
    if family == "all":
        rels = [_code_to_rel(c, n) for c in range(1 << (n * n))]
    elif family == "t":
        rels = list(_transitive_relations(n))
    elif family == "qo":
        rels = [r for r in _transitive_relations(n) if is_reflexive(r)]
    elif family == "wt":
        rels = set()
        for q in _r_family("qo", n):
            for drop in range(1 << n):
                rels.add(tuple(m & ~((drop >> x & 1) << x) for x, m in enumerate(q)))
        rels = list(rels)
    else:
        raise ValueError(f"unknown relation family {family!r}")
    return tuple(sorted(rels, key=_rel_to_code))


def relations(family: str, n: int) -> tuple[tuple[int, ...], ...]:
    """Every relation of a family on n points as successor tuples, by increasing code.

    Families: ``"all"``, ``"t"`` (transitive), ``"qo"`` (quasi-orders) and
    ``"wt"`` (weakly transitive).
    """
    return _r_family(family, n)


def _rd_family(family: str | None, n: int) -> list[tuple[int, ...] | None]:
    """Candidates in decreasing code order."""
    full = (1 << n) - 1
    if family is None:
        return [None]
    if family == "universal":
        return [tuple([full] * n)]
    if family == "covers_ne":
        rels = [tuple((full & ~(1 << x)) | (diag >> x & 1) << x for x in range(n)) for diag in range(1 << n)]
    elif family == "all":
        rels = [_code_to_rel(c, n) for c in range(1 << (n * n))]
    else:
        raise ValueError(f"unknown RD family {family!r}")
    return sorted(rels, key=_rel_to_code, reverse=True)


def _permute(rel: Sequence[int] | None, perm: Sequence[int]) -> tuple[int, ...] | None:
    """Relabel world x as perm[x]."""
    if rel is None:
        return None
    out = [0] * len(rel)
    for x, succ in enumerate(rel):
        m = 0
        for y in bits(succ):
            m |= 1 << perm[y]
        out[perm[x]] = m
    return tuple(out)


def _frame_key(r, rd) -> tuple:
    return (_rel_to_code(r), -_rel_to_code(rd) if rd is not None else 0)


def canonical_key(F: BiFrame) -> tuple:
    """Least enumeration key over all relabellings of ``F``."""
    return min(_frame_key(_permute(F.r, p), _permute(F.rd, p)) for p in permutations(range(F.n)))


def _resolve_class(cls) -> FrameClass:
    if isinstance(cls, FrameClass):
        return cls
    if isinstance(cls, LogicSpec):
        return cls.frame_class
    if isinstance(cls, str):
        return get_frame_class(cls)
    if callable(cls):
        return FrameClass(getattr(cls, "__name__", "custom"), cls)
    raise TypeError(f"not a frame class: {cls!r}")


def enumerate_biframes(cls, n: int, iso: bool = False, cap: int = ENUMERATION_CAP) -> Iterator[BiFrame]:
    """Rooted frames on ``n`` worlds in the class, in enumeration order.

    With ``iso`` only the frame with the least key in each isomorphism class
    is produced.
    """
    if not 1 <= n <= cap:
        raise ValueError(f"size must lie in 1..{cap}")
    fc = _resolve_class(cls)
    worlds = tuple(f"w{i}" for i in range(n))
    rds = _rd_family(fc.rd_family, n)
    perms = list(permutations(range(n))) if iso else None
    for r in _r_family(fc.r_family, n):
        if fc.r_filter is not None and not fc.r_filter(BiFrame(worlds, r)):
            continue
        for rd in rds:
            if fc.rd_filter is not None and not fc.rd_filter(r, rd):
                continue
            F = BiFrame(worlds, r, rd)
            if not is_rooted(F) or not fc.predicate(F):
                continue
            if perms is not None:
                key = _frame_key(r, rd)
                if any(_frame_key(_permute(r, p), _permute(rd, p)) < key for p in perms):
                    continue
            yield F


# --------------------------------------------------------------------------
# Bounded decision


@dataclass(frozen=True)
class NoCountermodelUpTo:
    """No countermodel among rooted frames up to ``bound`` worlds; not a proof of theoremhood."""

    bound: int
    frames_checked: int

    def to_dict(self) -> dict:
        return {"bound": self.bound, "frames_checked": self.frames_checked}


def decide_bounded(logic, f: Formula, max_size: int, iso: bool = False,
                   budget: int | None = None) -> Countermodel | NoCountermodelUpTo:
    """Search the logic's rooted frames of size 1..max_size for a countermodel to ``f``."""
    spec = logic if isinstance(logic, LogicSpec) else get_logic(logic)
    if not spec.signature.admits(signature_of(f)):
        raise ValueError(f"formula uses modalities outside the language of {spec.name}")
    if not 1 <= max_size <= ENUMERATION_CAP:
        raise ValueError(f"bound must lie in 1..{ENUMERATION_CAP}")
    checked = 0
    for n in range(1, max_size + 1):
        for F in enumerate_biframes(spec.frame_class, n, iso=iso):
            checked += 1
            res = kripke_valid(F, f, budget)
            if not res.valid:
                return res.countermodel
    return NoCountermodelUpTo(max_size, checked)
