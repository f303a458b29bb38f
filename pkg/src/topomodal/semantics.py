"""Truth and validity over finite biframes and finite spaces.

Kripke semantics: ``[]`` follows R, ``[!=]`` follows RD (inequality when RD is
absent) and ``[A]`` always ranges over all worlds.  Topological semantics
comes in two modes: ``"d"`` reads ``<>`` as the derived set, ``"c"`` as the
closure.

Validity is decided by exhausting valuations.  Valuations are numbered so
that variable ``i`` (in first-occurrence order) owns bits ``i*n .. i*n+n-1``
of the index, bit ``x`` of that block meaning "true at point x"; the first
failure in index order, at the lowest failing point, is reported.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .formula import (
    ABox, ADia, And, Bot, Box, DBox, DDia, Dia, Formula, Iff, Imp, Not, Or, Top, Var,
    pretty, variables,
)
from .kripke import BiFrame, bits
from .topospace import FiniteSpace

__all__ = [
    "Structure", "Model", "Countermodel", "ValidityResult", "BudgetExceeded",
    "kripke_extension", "kripke_truth", "kripke_valid", "topo_extension",
    "topo_truth", "topo_valid", "logic_valid", "valid", "default_budget",
]

Structure = Union[BiFrame, FiniteSpace]

DEFAULT_BUDGET = 1 << 24
_CHUNK_BITS = 14


class BudgetExceeded(RuntimeError):
    pass


def default_budget() -> int:
    env = os.environ.get("TOPOMODAL_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _carrier(S: Structure) -> tuple[str, ...]:
    return S.worlds if isinstance(S, BiFrame) else S.points


def _valuation_masks(S: Structure, valuation: Mapping[str, object]) -> dict[str, int]:
    out = {}
    for name, val in valuation.items():
        out[name] = val if isinstance(val, int) else S.mask(val)
    return out


@dataclass(frozen=True)
class Model:
    """A structure together with a valuation (variable -> set of point ids)."""

    structure: Structure
    valuation: Mapping[str, frozenset[str]]

    @classmethod
    def from_dict(cls, data: dict) -> Model:
        if "worlds" in data:
            S: Structure = BiFrame.from_dict(data)
        else:
            S = FiniteSpace.from_dict(data)
        carrier = set(_carrier(S))
        valuation = {}
        for name, ids in data.get("valuation", {}).items():
            unknown = set(ids) - carrier
            if unknown:
                raise ValueError(f"valuation of {name!r} mentions unknown ids {sorted(unknown)}")
            valuation[name] = frozenset(ids)
        return cls(S, valuation)

    def to_dict(self) -> dict:
        out = self.structure.to_dict()
        order = _carrier(self.structure)
        out["valuation"] = {
            name: [w for w in order if w in ids] for name, ids in sorted(self.valuation.items())
        }
        return out


@dataclass(frozen=True)
class Countermodel:
    structure: Structure
    valuation: Mapping[str, frozenset[str]]
    witness: str
    formula: Formula
    semantics: str

    def to_dict(self) -> dict:
        out = Model(self.structure, self.valuation).to_dict()
        out["witness"] = self.witness
        out["formula"] = pretty(self.formula)
        out["semantics"] = self.semantics
        return out


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    countermodel: Countermodel | None = None

    def __bool__(self) -> bool:
        return self.valid


# --------------------------------------------------------------------------
# Kripke semantics, one valuation


def _box(rel: Sequence[int], ext: int) -> int:
    out = 0
    for x, m in enumerate(rel):
        if m & ~ext == 0:
            out |= 1 << x
    return out


def _dia(rel: Sequence[int], ext: int) -> int:
    out = 0
    for x, m in enumerate(rel):
        if m & ext:
            out |= 1 << x
    return out


def kripke_extension(F: BiFrame, valuation: Mapping[str, object], f: Formula) -> int:
    """Bitmask of the worlds where ``f`` is true; missing variables are empty."""
    val = _valuation_masks(F, valuation)
    full = F.full
    diff = F.diff()

    def ev(g: Formula) -> int:
        if isinstance(g, Var):
            return val.get(g.name, 0)
        if isinstance(g, Bot):
            return 0
        if isinstance(g, Top):
            return full
        if isinstance(g, Not):
            return full & ~ev(g.arg)
        if isinstance(g, And):
            return ev(g.left) & ev(g.right)
        if isinstance(g, Or):
            return ev(g.left) | ev(g.right)
        if isinstance(g, Imp):
            return (full & ~ev(g.left)) | ev(g.right)
        if isinstance(g, Iff):
            return full & ~(ev(g.left) ^ ev(g.right))
        if isinstance(g, Box):
            return _box(F.r, ev(g.arg))
        if isinstance(g, Dia):
            return _dia(F.r, ev(g.arg))
        if isinstance(g, DBox):
            return _box(diff, ev(g.arg))
        if isinstance(g, DDia):
            return _dia(diff, ev(g.arg))
        if isinstance(g, ABox):
            return full if ev(g.arg) == full else 0
        if isinstance(g, ADia):
            return full if ev(g.arg) else 0
        raise TypeError(f"not a formula: {g!r}")

    return ev(f)


def kripke_truth(F: BiFrame, valuation: Mapping[str, object], w: str, f: Formula) -> bool:
    return bool(kripke_extension(F, valuation, f) >> F.index(w) & 1)


# --------------------------------------------------------------------------
# Kripke validity, all valuations at once
#
# Each subformula is represented by one integer per world whose bit v says
# whether the subformula holds there under valuation number v.


def _projection(j: int, ones: int, width: int) -> int:
    """Truth table of "bit j of the valuation index" over ``width`` indices."""
    block = 1 << j
    if block >= width:
        return 0
    unit = ((1 << block) - 1) << block
    return unit * (ones // ((1 << (2 * block)) - 1))


def _table_eval(F: BiFrame, f: Formula, var_tables: dict[str, list[int]], ones: int) -> list[int]:
    n = F.n
    diff = None
    memo: dict[Formula, list[int]] = {}

    def box(rel, a):
        out = []
        for x in range(n):
            t = ones
            for y in bits(rel[x]):
                t &= a[y]
            out.append(t)
        return out

    def dia(rel, a):
        out = []
        for x in range(n):
            t = 0
            for y in bits(rel[x]):
                t |= a[y]
            out.append(t)
        return out

    def ev(g: Formula) -> list[int]:
        nonlocal diff
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, Var):
            res = var_tables[g.name]
        elif isinstance(g, Bot):
            res = [0] * n
        elif isinstance(g, Top):
            res = [ones] * n
        elif isinstance(g, Not):
            res = [ones & ~t for t in ev(g.arg)]
        elif isinstance(g, And):
            res = [a & b for a, b in zip(ev(g.left), ev(g.right))]
        elif isinstance(g, Or):
            res = [a | b for a, b in zip(ev(g.left), ev(g.right))]
        elif isinstance(g, Imp):
            res = [(ones & ~a) | b for a, b in zip(ev(g.left), ev(g.right))]
        elif isinstance(g, Iff):
            res = [ones & ~(a ^ b) for a, b in zip(ev(g.left), ev(g.right))]
        elif isinstance(g, Box):
            res = box(F.r, ev(g.arg))
        elif isinstance(g, Dia):
            res = dia(F.r, ev(g.arg))
        elif isinstance(g, (DBox, DDia)):
            if diff is None:
                diff = F.diff()
            res = (box if isinstance(g, DBox) else dia)(diff, ev(g.arg))
        elif isinstance(g, ABox):
            t = ones
            for a in ev(g.arg):
                t &= a
            res = [t] * n
        elif isinstance(g, ADia):
            t = 0
            for a in ev(g.arg):
                t |= a
            res = [t] * n
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = res
        return res

    return ev(f)


def _check_budget(n: int, k: int, budget: int | None):
    budget = default_budget() if budget is None else budget
    if (1 << (n * k)) > budget:
        raise BudgetExceeded(f"{1 << (n * k)} valuations exceed the budget of {budget}")


def _decode(carrier: Sequence[str], names: Sequence[str], index: int) -> dict[str, frozenset[str]]:
    n = len(carrier)
    full = (1 << n) - 1
    return {
        name: frozenset(carrier[x] for x in bits(index >> (i * n) & full))
        for i, name in enumerate(names)
    }


def kripke_valid(F: BiFrame, f: Formula, budget: int | None = None) -> ValidityResult:
    """Exhaustive validity check of ``f`` on ``F``."""
    names = variables(f)
    n, k = F.n, len(names)
    _check_budget(n, k, budget)
    total = n * k
    low = min(total, _CHUNK_BITS)
    width = 1 << low
    ones = (1 << width) - 1
    low_tables = {j: _projection(j, ones, width) for j in range(low)}
    for high in range(1 << (total - low)):
        tables = {}
        for i, name in enumerate(names):
            row = []
            for x in range(n):
                j = i * n + x
                if j < low:
                    row.append(low_tables[j])
                else:
                    row.append(ones if high >> (j - low) & 1 else 0)
            tables[name] = row
        result = _table_eval(F, f, tables, ones)
        fail = 0
        for t in result:
            fail |= ones & ~t
        if fail:
            v = (fail & -fail).bit_length() - 1
            witness = next(x for x, t in enumerate(result) if not t >> v & 1)
            index = (high << low) | v
            cm = Countermodel(F, _decode(F.worlds, names, index), F.worlds[witness], f, "kripke")
            return ValidityResult(False, cm)
    return ValidityResult(True)


# --------------------------------------------------------------------------
# Topological semantics

_MODE_OPS = {"d": ("coderived", "derived"), "c": ("interior", "closure")}


def _mode_tables(X: FiniteSpace, mode: str):
    try:
        box_name, dia_name = _MODE_OPS[mode]
    except KeyError:
        raise ValueError(f"unknown topological mode {mode!r}; use 'c' or 'd'") from None
    return X.table(box_name), X.table(dia_name)


def _topo_eval(X: FiniteSpace, val: Mapping[str, int], f: Formula, box_t, dia_t) -> int:
    full = X.full
    n = X.n

    def dbox(e: int) -> int:
        out = 0
        for x in range(n):
            if (full & ~(1 << x)) & ~e == 0:
                out |= 1 << x
        return out

    def ev(g: Formula) -> int:
        if isinstance(g, Var):
            return val.get(g.name, 0)
        if isinstance(g, Bot):
            return 0
        if isinstance(g, Top):
            return full
        if isinstance(g, Not):
            return full & ~ev(g.arg)
        if isinstance(g, And):
            return ev(g.left) & ev(g.right)
        if isinstance(g, Or):
            return ev(g.left) | ev(g.right)
        if isinstance(g, Imp):
            return (full & ~ev(g.left)) | ev(g.right)
        if isinstance(g, Iff):
            return full & ~(ev(g.left) ^ ev(g.right))
        if isinstance(g, Box):
            return box_t[ev(g.arg)]
        if isinstance(g, Dia):
            return dia_t[ev(g.arg)]
        if isinstance(g, DBox):
            return dbox(ev(g.arg))
        if isinstance(g, DDia):
            return full & ~dbox(full & ~ev(g.arg))
        if isinstance(g, ABox):
            return full if ev(g.arg) == full else 0
        if isinstance(g, ADia):
            return full if ev(g.arg) else 0
        raise TypeError(f"not a formula: {g!r}")

    return ev(f)


def topo_extension(X: FiniteSpace, valuation: Mapping[str, object], f: Formula, mode: str = "d") -> int:
    box_t, dia_t = _mode_tables(X, mode)
    return _topo_eval(X, _valuation_masks(X, valuation), f, box_t, dia_t)


def topo_truth(X: FiniteSpace, valuation: Mapping[str, object], x: str, f: Formula, mode: str = "d") -> bool:
    return bool(topo_extension(X, valuation, f, mode) >> X.index(x) & 1)


def topo_valid(X: FiniteSpace, f: Formula, mode: str = "d", budget: int | None = None) -> ValidityResult:
    names = variables(f)
    n, k = X.n, len(names)
    _check_budget(n, k, budget)
    box_t, dia_t = _mode_tables(X, mode)
    full = X.full
    for index in range(1 << (n * k)):
        val = {name: index >> (i * n) & full for i, name in enumerate(names)}
        ext = _topo_eval(X, val, f, box_t, dia_t)
        if ext != full:
            missing = full & ~ext
            witness = (missing & -missing).bit_length() - 1
            cm = Countermodel(X, _decode(X.points, names, index), X.points[witness], f, f"topo-{mode}")
            return ValidityResult(False, cm)
    return ValidityResult(True)


def valid(S: Structure, f: Formula, mode: str = "kripke", budget: int | None = None) -> ValidityResult:
    """Dispatch on the structure: ``mode`` is ``"kripke"`` for frames, ``"d"``/``"c"`` for spaces."""
    if isinstance(S, BiFrame):
        if mode != "kripke":
            raise ValueError("frames are evaluated with Kripke semantics")
        return kripke_valid(S, f, budget)
    if mode == "kripke":
        raise ValueError("spaces are evaluated with 'd' or 'c' semantics")
    return topo_valid(S, f, mode, budget)


def logic_valid(S: Structure, logic, mode: str = "kripke", budget: int | None = None) -> bool:
    """Whether every axiom of ``logic`` is valid in ``S``."""
    return all(valid(S, ax, mode, budget) for ax in logic.axioms)
