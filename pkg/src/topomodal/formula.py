"""Bimodal formulas: AST, concrete syntax, and the reflexive/universal translations.

The AST carries the Kripke/derivational box ``Box``, the difference box ``DBox``
and the universal box ``ABox`` together with their duals and the usual
classical connectives.  Derived connectives are kept as genuine nodes so that
printing reproduces what the user typed.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator

__all__ = [
    "Formula", "Var", "Bot", "Top", "Not", "And", "Or", "Imp", "Iff",
    "Box", "Dia", "DBox", "DDia", "ABox", "ADia",
    "Signature", "FormulaSyntaxError",
    "parse", "pretty", "sharp", "u_translate", "subformulas",
    "subformula_closure", "substitute", "variables", "signature_of",
    "is_closed", "depth", "conj", "disj", "box_bar", "to_ast", "from_ast",
]


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def children(self) -> tuple[Formula, ...]:
        return ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, slots=True)
class Var(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class _Unary(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True, slots=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


class Not(_Unary):
    __slots__ = ()


class Box(_Unary):
    __slots__ = ()


class Dia(_Unary):
    __slots__ = ()


class DBox(_Unary):
    """Difference box: true at x iff the argument holds at every y != x."""
    __slots__ = ()


class DDia(_Unary):
    __slots__ = ()


class ABox(_Unary):
    """Universal box: true iff the argument holds everywhere."""
    __slots__ = ()


class ADia(_Unary):
    __slots__ = ()


class And(_Binary):
    __slots__ = ()


class Or(_Binary):
    __slots__ = ()


class Imp(_Binary):
    __slots__ = ()


class Iff(_Binary):
    __slots__ = ()


BOT = Bot()
TOP = Top()

UNARY_TYPES = (Not, Box, Dia, DBox, DDia, ABox, ADia)
BINARY_TYPES = (And, Or, Imp, Iff)


def conj(fs: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    fs = list(fs)
    return reduce(And, fs) if fs else TOP


def disj(fs: Iterable[Formula]) -> Formula:
    """Left-nested disjunction; the empty disjunction is ``false``."""
    fs = list(fs)
    return reduce(Or, fs) if fs else BOT


def box_bar(f: Formula) -> Formula:
    """The reflexive box: ``[]f & f``."""
    return And(Box(f), f)


# --------------------------------------------------------------------------
# Signatures


class Signature(enum.Enum):
    """Which non-classical modalities a formula may use."""

    BOX_ONLY = "box"
    BOX_ALL = "box+all"
    BOX_DIFF = "box+diff"
    FULL = "full"

    def admits(self, other: Signature) -> bool:
        return self is other or other is Signature.BOX_ONLY or self is Signature.FULL

    def join(self, other: Signature) -> Signature:
        if self.admits(other):
            return self
        if other.admits(self):
            return other
        return Signature.FULL


def signature_of(f: Formula) -> Signature:
    has_all = has_diff = False
    for g in subformulas(f):
        if isinstance(g, (ABox, ADia)):
            has_all = True
        elif isinstance(g, (DBox, DDia)):
            has_diff = True
    if has_all and has_diff:
        return Signature.FULL
    if has_all:
        return Signature.BOX_ALL
    if has_diff:
        return Signature.BOX_DIFF
    return Signature.BOX_ONLY


# --------------------------------------------------------------------------
# Traversals


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order walk over all subformula occurrences (duplicates included)."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def variables(f: Formula) -> list[str]:
    """Variable names in order of first occurrence (left to right)."""
    seen: dict[str, None] = {}
    for g in subformulas(f):
        if isinstance(g, Var):
            seen.setdefault(g.name)
    return list(seen)


def is_closed(f: Formula) -> bool:
    """A formula is closed when it contains no variables."""
    return not any(isinstance(g, Var) for g in subformulas(f))


def depth(f: Formula) -> int:
    """Modal depth."""
    kids = f.children()
    inner = max((depth(k) for k in kids), default=0)
    return inner + 1 if isinstance(f, (Box, Dia, DBox, DDia, ABox, ADia)) else inner


def subformula_closure(fs: Iterable[Formula]) -> frozenset[Formula]:
    out: set[Formula] = set()
    stack = list(fs)
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        stack.extend(g.children())
    return frozenset(out)


def _rebuild(f: Formula, kids: list[Formula]) -> Formula:
    if isinstance(f, _Unary):
        return type(f)(kids[0])
    if isinstance(f, _Binary):
        return type(f)(kids[0], kids[1])
    return f


def substitute(f: Formula, var: str, g: Formula) -> Formula:
    """Replace every occurrence of ``var`` in ``f`` by ``g``."""
    if isinstance(f, Var):
        return g if f.name == var else f
    kids = f.children()
    if not kids:
        return f
    return _rebuild(f, [substitute(k, var, g) for k in kids])


# --------------------------------------------------------------------------
# Translations


def sharp(f: Formula) -> Formula:
    """Replace every ``[]B`` by ``[]B# & B#``.

    ``<>B`` is first rewritten to ``~[]~B`` so that the rule applies to it as
    well; all other connectives, the difference and universal modalities
    included, are mapped homomorphically.
    """
    if isinstance(f, Box):
        b = sharp(f.arg)
        return And(Box(b), b)
    if isinstance(f, Dia):
        return Not(sharp(Box(Not(f.arg))))
    kids = f.children()
    if not kids:
        return f
    return _rebuild(f, [sharp(k) for k in kids])


def u_translate(f: Formula) -> Formula:
    """Translate a ``([], [A])``-formula into a ``([], [!=])``-formula.

    ``[A]B`` becomes ``[!=]B^u & B^u``; ``<E>B`` is handled as ``~[A]~B``.
    """
    if signature_of(f) in (Signature.BOX_DIFF, Signature.FULL):
        raise ValueError("u_translate expects a formula without [!=] or <!=>")
    return _u(f)


def _u(f: Formula) -> Formula:
    if isinstance(f, ABox):
        b = _u(f.arg)
        return And(DBox(b), b)
    if isinstance(f, ADia):
        return Not(_u(ABox(Not(f.arg))))
    kids = f.children()
    if not kids:
        return f
    return _rebuild(f, [_u(k) for k in kids])


# --------------------------------------------------------------------------
# Concrete syntax

# Precedence levels, low to high.
_IFF, _IMP, _OR, _AND, _UNARY, _ATOM = range(1, 7)

_BINARY_OPS = {Iff: ("<->", _IFF), Imp: ("->", _IMP), Or: ("|", _OR), And: ("&", _AND)}
_UNARY_OPS = {Not: "~", Box: "[]", Dia: "<>", DBox: "[!=]", DDia: "<!=>", ABox: "[A]", ADia: "<E>"}


def pretty(f: Formula) -> str:
    """Render ``f`` with the fewest parentheses the grammar allows."""
    return _fmt(f)[0]


def _fmt(f: Formula) -> tuple[str, int]:
    if isinstance(f, Var):
        return f.name, _ATOM
    if isinstance(f, Bot):
        return "false", _ATOM
    if isinstance(f, Top):
        return "true", _ATOM
    op = _UNARY_OPS.get(type(f))
    if op is not None:
        s, p = _fmt(f.arg)
        if p < _UNARY:
            s = f"({s})"
        return op + s, _UNARY
    op, prec = _BINARY_OPS[type(f)]
    ls, lp = _fmt(f.left)
    rs, rp = _fmt(f.right)
    right_assoc = prec == _IMP
    if lp < prec or (lp == prec and right_assoc):
        ls = f"({ls})"
    if rp < prec or (rp == prec and not right_assoc):
        rs = f"({rs})"
    return f"{ls} {op} {rs}", prec


class FormulaSyntaxError(ValueError):
    """Raised by :func:`parse`; ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message: str, offset: int, text: str):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte offset {offset}")


# Unicode glyphs are input-only aliases for the ASCII tokens.
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op><->|<!=>|<>|<E>|->|\[!=\]|\[\]|\[A\]|[&|~()]
        |\[≠\]|⟨≠⟩|<≠>|\[∀\]|⟨∃⟩|<∃>|[↔≡→⊃∨∧¬□◇◊⊥⊤])
  | (?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)
    """,
    re.VERBOSE,
)

_ALIASES = {
    "↔": "<->", "≡": "<->", "→": "->", "⊃": "->", "∨": "|", "∧": "&", "¬": "~",
    "□": "[]", "◇": "<>", "◊": "<>", "[≠]": "[!=]", "⟨≠⟩": "<!=>", "<≠>": "<!=>",
    "[∀]": "[A]", "⟨∃⟩": "<E>", "<∃>": "<E>", "⊥": "false", "⊤": "true",
}

_UNARY_BY_TOKEN = {tok: cls for cls, tok in _UNARY_OPS.items()}


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        if m.lastgroup != "ws":
            tok = _ALIASES.get(m.group(), m.group())
            toks.append((tok, pos))
        pos = m.end()
    toks.append(("<end>", len(text)))
    return toks


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> str:
        return self.toks[self.i][0]

    def error(self, expected: str):
        tok, pos = self.toks[self.i]
        found = "end of input" if tok == "<end>" else repr(tok)
        raise FormulaSyntaxError(f"expected {expected}, found {found}", _byte_offset(self.text, pos), self.text)

    def advance(self) -> str:
        tok = self.tok
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        if self.tok != "<end>":
            self.error("an operator or end of input")
        return f

    def iff(self) -> Formula:
        f = self.imp()
        while self.tok == "<->":
            self.advance()
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.tok == "->":
            self.advance()
            return Imp(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.tok == "|":
            self.advance()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.tok == "&":
            self.advance()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        cls = _UNARY_BY_TOKEN.get(self.tok)
        if cls is not None:
            self.advance()
            return cls(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.tok
        if tok == "(":
            self.advance()
            f = self.iff()
            if self.tok != ")":
                self.error("')'")
            self.advance()
            return f
        if tok == "false":
            self.advance()
            return BOT
        if tok == "true":
            self.advance()
            return TOP
        if tok[0].isalpha() or tok[0] == "_":
            self.advance()
            return Var(tok)
        self.error("a variable, 'false', 'true', '(' or a unary operator")


def parse(text: str) -> Formula:
    """Parse concrete syntax into a :class:`Formula`.

    Precedence from loosest to tightest: ``<->``, ``->`` (right associative),
    ``|``, ``&``, then the prefix operators ``~ [] <> [!=] <!=> [A] <E>``.
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# JSON form

_AST_NAMES = {
    Not: "not", Box: "box", Dia: "dia", DBox: "dbox", DDia: "ddia", ABox: "abox", ADia: "adia",
    And: "and", Or: "or", Imp: "imp", Iff: "iff",
}
_AST_TYPES = {v: k for k, v in _AST_NAMES.items()}


def to_ast(f: Formula):
    """Nested JSON-ready form: ``{"var": name}``, ``"false"``/``"true"`` or ``{"op": ..., "args": [...]}``."""
    if isinstance(f, Var):
        return {"var": f.name}
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Top):
        return "true"
    return {"op": _AST_NAMES[type(f)], "args": [to_ast(g) for g in f.children()]}


def from_ast(data) -> Formula:
    if data == "false":
        return BOT
    if data == "true":
        return TOP
    if isinstance(data, dict) and "var" in data:
        return Var(data["var"])
    try:
        cls = _AST_TYPES[data["op"]]
        return cls(*(from_ast(a) for a in data["args"]))
    except (KeyError, TypeError):
        raise ValueError(f"malformed formula AST: {data!r}") from None
