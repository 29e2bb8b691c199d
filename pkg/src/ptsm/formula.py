"""Quantitative modal and first-order formula ASTs, parsers and transforms.

Modal formulas take values in [0, 1]: constants, fuzzy atoms, truncated
subtraction of a constant (written `-.`), negation as complement, `&` as
minimum, `|` as maximum, and the expected-value modality `<>` with its dual
`[]`. `|` and `[]` are derived sugar; rank and evaluation treat them through
their definitions `a | b = ~(~a & ~b)` and `[]f = ~<>~f`.

The first-order language replaces bare atoms with applied ones `p(x)`, adds
crisp equality `x = y`, suprema `E x. f`, and the binding modality
`x:<>y. f` averaging f over the successors of x. The standard translation
maps the modal language into it preserving values and rank.

Concrete syntax precedence, loosest to tightest: `|`, `&`, `-.`, then the
prefixes `~ <> []`. `-.` chains associate to the left. Quantifier bodies
extend as far right as possible. The quantifier is written `Ex. f` or
`E x. f`; identifiers starting with `E` directly followed by `.` are read as
quantifier plus variable, which is unambiguous because a bare identifier is
never a first-order formula.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import FormulaSyntaxError
from .rational import ONE, ZERO, check_unit_interval, format_rational, parse_rational


# ---------------------------------------------------------------------------
# Modal AST


class ModalFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Const(ModalFormula):
    value: Fraction

    def __post_init__(self):
        check_unit_interval(self.value, "constant")


@dataclass(frozen=True)
class Atom(ModalFormula):
    name: str


@dataclass(frozen=True)
class TruncSub(ModalFormula):
    """max(sub - amount, 0), amount a constant."""

    sub: ModalFormula
    amount: Fraction

    def __post_init__(self):
        check_unit_interval(self.amount, "subtracted constant")


@dataclass(frozen=True)
class Neg(ModalFormula):
    sub: ModalFormula


@dataclass(frozen=True)
class And(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True)
class Or(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True)
class Diamond(ModalFormula):
    sub: ModalFormula


@dataclass(frozen=True)
class Box(ModalFormula):
    sub: ModalFormula


# ---------------------------------------------------------------------------
# First-order AST


class FOFormula:
    __slots__ = ()


@dataclass(frozen=True)
class FOConst(FOFormula):
    value: Fraction

    def __post_init__(self):
        check_unit_interval(self.value, "constant")


@dataclass(frozen=True)
class FOAtom(FOFormula):
    name: str
    var: str


@dataclass(frozen=True)
class FOEq(FOFormula):
    """Crisp equality of state variables, value 0 or 1."""

    left: str
    right: str


@dataclass(frozen=True)
class FOTruncSub(FOFormula):
    sub: FOFormula
    amount: Fraction

    def __post_init__(self):
        check_unit_interval(self.amount, "subtracted constant")


@dataclass(frozen=True)
class FONeg(FOFormula):
    sub: FOFormula


@dataclass(frozen=True)
class FOAnd(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class FOOr(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class FOExists(FOFormula):
    var: str
    body: FOFormula


@dataclass(frozen=True)
class FODiamondBind(FOFormula):
    """Expected value of body over successors of source, binding bound."""

    source: str
    bound: str
    body: FOFormula

    def __post_init__(self):
        if self.source == self.bound:
            raise FormulaSyntaxError(
                f"bound variable {self.bound!r} must differ from the source variable"
            )


# ---------------------------------------------------------------------------
# Rank


def modal_rank(formula: ModalFormula) -> int:
    """Nesting depth counting both modalities and atoms.

    Defined on the desugared form: `|` contributes like `&`, `[]` like `<>`.
    Atoms count one level, so rank(<><>p & <>q) = 3.
    """
    memo: dict[int, int] = {}

    def go(f):
        key = id(f)
        if key in memo:
            return memo[key]
        if isinstance(f, Const):
            r = 0
        elif isinstance(f, Atom):
            r = 1
        elif isinstance(f, (TruncSub, Neg)):
            r = go(f.sub)
        elif isinstance(f, (And, Or)):
            r = max(go(f.left), go(f.right))
        elif isinstance(f, (Diamond, Box)):
            r = 1 + go(f.sub)
        else:
            raise TypeError(f"not a modal formula: {f!r}")
        memo[key] = r
        return r

    return go(formula)


def quantifier_rank(formula: FOFormula) -> int:
    """Nesting depth of the binders E and :<> together with applied atoms."""
    memo: dict[int, int] = {}

    def go(f):
        key = id(f)
        if key in memo:
            return memo[key]
        if isinstance(f, (FOConst, FOEq)):
            r = 0
        elif isinstance(f, FOAtom):
            r = 1
        elif isinstance(f, (FOTruncSub, FONeg)):
            r = go(f.sub)
        elif isinstance(f, (FOAnd, FOOr)):
            r = max(go(f.left), go(f.right))
        elif isinstance(f, FOExists):
            r = 1 + go(f.body)
        elif isinstance(f, FODiamondBind):
            r = 1 + go(f.body)
        else:
            raise TypeError(f"not a first-order formula: {f!r}")
        memo[key] = r
        return r

    return go(formula)


# ---------------------------------------------------------------------------
# Desugaring and simplification


def normalize_modal(formula: ModalFormula) -> ModalFormula:
    """Rewrite `|` and `[]` away; shares subterms of the input DAG."""
    memo: dict[int, ModalFormula] = {}

    def go(f):
        key = id(f)
        if key in memo:
            return memo[key]
        if isinstance(f, (Const, Atom)):
            out = f
        elif isinstance(f, TruncSub):
            out = TruncSub(go(f.sub), f.amount)
        elif isinstance(f, Neg):
            out = Neg(go(f.sub))
        elif isinstance(f, And):
            out = And(go(f.left), go(f.right))
        elif isinstance(f, Or):
            out = Neg(And(Neg(go(f.left)), Neg(go(f.right))))
        elif isinstance(f, Diamond):
            out = Diamond(go(f.sub))
        elif isinstance(f, Box):
            out = Neg(Diamond(Neg(go(f.sub))))
        else:
            raise TypeError(f"not a modal formula: {f!r}")
        memo[key] = out
        return out

    return go(formula)


def simplify_modal(formula: ModalFormula) -> ModalFormula:
    """Semantics-preserving cleanup: constant folding and unit pruning.

    Diamond of a constant is not folded because its value depends on
    termination. Equal-subterm pruning uses object identity only, which is
    what the synthesizer's hash-consing produces.
    """
    memo: dict[int, ModalFormula] = {}

    def go(f):
        key = id(f)
        if key in memo:
            return memo[key]
        if isinstance(f, (Const, Atom)):
            out = f
        elif isinstance(f, TruncSub):
            sub = go(f.sub)
            if f.amount == ZERO:
                out = sub
            elif isinstance(sub, Const):
                out = Const(max(sub.value - f.amount, ZERO))
            else:
                out = TruncSub(sub, f.amount)
        elif isinstance(f, Neg):
            sub = go(f.sub)
            if isinstance(sub, Const):
                out = Const(ONE - sub.value)
            elif isinstance(sub, Neg):
                out = sub.sub
            else:
                out = Neg(sub)
        elif isinstance(f, (And, Or)):
            l, r = go(f.left), go(f.right)
            is_and = isinstance(f, And)
            unit, zero = (ONE, ZERO) if is_and else (ZERO, ONE)
            pick = min if is_and else max
            if isinstance(l, Const) and isinstance(r, Const):
                out = Const(pick(l.value, r.value))
            elif l is r:
                out = l
            elif isinstance(l, Const) and l.value == unit:
                out = r
            elif isinstance(r, Const) and r.value == unit:
                out = l
            elif isinstance(l, Const) and l.value == zero:
                out = l
            elif isinstance(r, Const) and r.value == zero:
                out = r
            else:
                out = And(l, r) if is_and else Or(l, r)
        elif isinstance(f, Diamond):
            out = Diamond(go(f.sub))
        elif isinstance(f, Box):
            out = Box(go(f.sub))
        else:
            raise TypeError(f"not a modal formula: {f!r}")
        memo[key] = out
        return out

    return go(formula)


# ---------------------------------------------------------------------------
# Tokenizer shared by both parsers

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<rat>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><>|\[\]|:<>|-\.|[~&|().=])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "end":
            self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.peek()
        if text != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {text or 'end'!r}", pos)
        return self.next()

    def fail(self, message):
        raise FormulaSyntaxError(message, self.peek()[2])

    def rational(self):
        kind, text, pos = self.peek()
        if kind != "rat":
            self.fail(f"expected a rational constant, found {text or 'end'!r}")
        self.next()
        return parse_rational(text, f"constant at position {pos}")


# ---------------------------------------------------------------------------
# Modal parser


def parse_modal(text: str) -> ModalFormula:
    """Parse the modal surface syntax; raises FormulaSyntaxError with position."""
    p = _Parser(text)
    formula = _modal_or(p)
    kind, tok, pos = p.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"trailing input {tok!r}", pos)
    return formula


def _modal_or(p):
    f = _modal_and(p)
    while p.peek()[1] == "|":
        p.next()
        f = Or(f, _modal_and(p))
    return f


def _modal_and(p):
    f = _modal_sub(p)
    while p.peek()[1] == "&":
        p.next()
        f = And(f, _modal_sub(p))
    return f


def _modal_sub(p):
    f = _modal_unary(p)
    while p.peek()[1] == "-.":
        p.next()
        f = TruncSub(f, p.rational())
    return f


def _modal_unary(p):
    kind, tok, pos = p.peek()
    if tok == "~":
        p.next()
        return Neg(_modal_unary(p))
    if tok == "<>":
        p.next()
        return Diamond(_modal_unary(p))
    if tok == "[]":
        p.next()
        return Box(_modal_unary(p))
    return _modal_primary(p)


def _modal_primary(p):
    kind, tok, pos = p.peek()
    if kind == "rat":
        return Const(p.rational())
    if kind == "ident":
        p.next()
        return Atom(tok)
    if tok == "(":
        p.next()
        f = _modal_or(p)
        p.expect(")")
        return f
    p.fail(f"expected a formula, found {tok or 'end'!r}")


# ---------------------------------------------------------------------------
# First-order parser


def parse_fo(text: str):
    """Parse first-order syntax; returns (formula, free variables in order)."""
    p = _Parser(text)
    formula = _fo_or(p)
    kind, tok, pos = p.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"trailing input {tok!r}", pos)
    return formula, free_variables(formula)


def _fo_or(p):
    f = _fo_and(p)
    while p.peek()[1] == "|":
        p.next()
        f = FOOr(f, _fo_and(p))
    return f


def _fo_and(p):
    f = _fo_sub(p)
    while p.peek()[1] == "&":
        p.next()
        f = FOAnd(f, _fo_sub(p))
    return f


def _fo_sub(p):
    f = _fo_unary(p)
    while p.peek()[1] == "-.":
        p.next()
        f = FOTruncSub(f, p.rational())
    return f


def _fo_unary(p):
    kind, tok, pos = p.peek()
    if tok == "~":
        p.next()
        return FONeg(_fo_unary(p))
    if kind == "ident":
        nxt = p.peek(1)[1]
        if tok == "E" and p.peek(1)[0] == "ident" and p.peek(2)[1] == ".":
            p.next()
            var = p.next()[1]
            p.expect(".")
            return FOExists(var, _fo_or(p))
        if len(tok) > 1 and tok.startswith("E") and nxt == ".":
            p.next()
            p.next()
            return FOExists(tok[1:], _fo_or(p))
        if nxt == ":<>":
            p.next()
            p.next()
            bkind, bound, bpos = p.peek()
            if bkind != "ident":
                p.fail("expected a bound variable after ':<>'")
            p.next()
            p.expect(".")
            try:
                return FODiamondBind(tok, bound, _fo_or(p))
            except FormulaSyntaxError as exc:
                raise FormulaSyntaxError(str(exc.args[0]), bpos) from None
    return _fo_primary(p)


def _fo_primary(p):
    kind, tok, pos = p.peek()
    if kind == "rat":
        return FOConst(p.rational())
    if kind == "ident":
        nxt = p.peek(1)[1]
        if nxt == "(":
            p.next()
            p.next()
            vkind, var, vpos = p.peek()
            if vkind != "ident":
                p.fail("expected a variable inside the atom application")
            p.next()
            p.expect(")")
            return FOAtom(tok, var)
        if nxt == "=":
            p.next()
            p.next()
            rkind, right, rpos = p.peek()
            if rkind != "ident":
                p.fail("expected a variable after '='")
            p.next()
            return FOEq(tok, right)
        p.fail(
            f"bare identifier {tok!r}: first-order atoms are applied, e.g. {tok}(x)"
        )
    if tok == "(":
        p.next()
        f = _fo_or(p)
        p.expect(")")
        return f
    p.fail(f"expected a formula, found {tok or 'end'!r}")


def free_variables(formula: FOFormula) -> tuple[str, ...]:
    """Free variables in order of first occurrence."""
    seen: list[str] = []

    def go(f, bound):
        if isinstance(f, (FOConst,)):
            return
        if isinstance(f, FOAtom):
            hit(f.var, bound)
        elif isinstance(f, FOEq):
            hit(f.left, bound)
            hit(f.right, bound)
        elif isinstance(f, (FOTruncSub, FONeg)):
            go(f.sub, bound)
        elif isinstance(f, (FOAnd, FOOr)):
            go(f.left, bound)
            go(f.right, bound)
        elif isinstance(f, FOExists):
            go(f.body, bound | {f.var})
        elif isinstance(f, FODiamondBind):
            hit(f.source, bound)
            go(f.body, bound | {f.bound})
        else:
            raise TypeError(f"not a first-order formula: {f!r}")

    def hit(var, bound):
        if var not in bound and var not in seen:
            seen.append(var)

    go(formula, frozenset())
    return tuple(seen)


# ---------------------------------------------------------------------------
# Rendering

_PREC_OR, _PREC_AND, _PREC_SUB, _PREC_UNARY = 1, 2, 3, 4


def render_modal(formula: ModalFormula) -> str:
    """Concrete syntax with minimal parentheses; parse_modal round-trips it."""

    def go(f, ctx):
        if isinstance(f, Const):
            return format_rational(f.value)
        if isinstance(f, Atom):
            return f.name
        if isinstance(f, TruncSub):
            body = f"{go(f.sub, _PREC_SUB)} -. {format_rational(f.amount)}"
            return wrap(body, _PREC_SUB, ctx)
        if isinstance(f, Neg):
            return f"~{go(f.sub, _PREC_UNARY)}"
        if isinstance(f, Diamond):
            return f"<>{go(f.sub, _PREC_UNARY)}"
        if isinstance(f, Box):
            return f"[]{go(f.sub, _PREC_UNARY)}"
        if isinstance(f, And):
            body = f"{go(f.left, _PREC_AND)} & {go(f.right, _PREC_AND + 1)}"
            return wrap(body, _PREC_AND, ctx)
        if isinstance(f, Or):
            body = f"{go(f.left, _PREC_OR)} | {go(f.right, _PREC_OR + 1)}"
            return wrap(body, _PREC_OR, ctx)
        raise TypeError(f"not a modal formula: {f!r}")

    def wrap(body, prec, ctx):
        return f"({body})" if prec < ctx else body

    return go(formula, 0)


def render_fo(formula: FOFormula) -> str:
    """Concrete first-order syntax; parse_fo round-trips it."""

    def go(f, ctx):
        if isinstance(f, FOConst):
            return format_rational(f.value)
        if isinstance(f, FOAtom):
            return f"{f.name}({f.var})"
        if isinstance(f, FOEq):
            return f"{f.left} = {f.right}"
        if isinstance(f, FOTruncSub):
            body = f"{go(f.sub, _PREC_SUB)} -. {format_rational(f.amount)}"
            return wrap(body, _PREC_SUB, ctx)
        if isinstance(f, FONeg):
            return f"~{go(f.sub, _PREC_UNARY)}"
        if isinstance(f, FOAnd):
            body = f"{go(f.left, _PREC_AND)} & {go(f.right, _PREC_AND + 1)}"
            return wrap(body, _PREC_AND, ctx)
        if isinstance(f, FOOr):
            body = f"{go(f.left, _PREC_OR)} | {go(f.right, _PREC_OR + 1)}"
            return wrap(body, _PREC_OR, ctx)
        if isinstance(f, FOExists):
            return wrap(f"E{f.var}. {go(f.body, 0)}", 0, ctx)
        if isinstance(f, FODiamondBind):
            return wrap(f"{f.source}:<>{f.bound}. {go(f.body, 0)}", 0, ctx)
        raise TypeError(f"not a first-order formula: {f!r}")

    def wrap(body, prec, ctx):
        return f"({body})" if prec < ctx else body

    return go(formula, 0)


# ---------------------------------------------------------------------------
# Standard translation

_FRESH_RE = re.compile(r"^_v(\d+)$")


def standard_translation(formula: ModalFormula, var: str = "x") -> FOFormula:
    """Value-preserving translation into the first-order language.

    Desugars `|` and `[]` first, then maps atoms to applied atoms at the
    current variable and `<>` to the binding modality with a fresh variable
    from the reserved namespace _v0, _v1, ... The result has at most {var}
    free and quantifier rank equal to the modal rank.
    """
    counter = 0
    m = _FRESH_RE.match(var)
    if m:
        counter = int(m.group(1)) + 1

    def fresh():
        nonlocal counter
        name = f"_v{counter}"
        counter += 1
        return name

    def go(f, x):
        if isinstance(f, Const):
            return FOConst(f.value)
        if isinstance(f, Atom):
            return FOAtom(f.name, x)
        if isinstance(f, TruncSub):
            return FOTruncSub(go(f.sub, x), f.amount)
        if isinstance(f, Neg):
            return FONeg(go(f.sub, x))
        if isinstance(f, And):
            return FOAnd(go(f.left, x), go(f.right, x))
        if isinstance(f, Diamond):
            y = fresh()
            return FODiamondBind(x, y, go(f.sub, y))
        raise TypeError(f"unexpected constructor after desugaring: {f!r}")

    return go(normalize_modal(formula), var)


# ---------------------------------------------------------------------------
# JSON ASTs


def modal_to_dict(formula: ModalFormula) -> dict:
    if isinstance(formula, Const):
        return {"op": "const", "value": format_rational(formula.value)}
    if isinstance(formula, Atom):
        return {"op": "atom", "name": formula.name}
    if isinstance(formula, TruncSub):
        return {
            "op": "sub",
            "arg": modal_to_dict(formula.sub),
            "amount": format_rational(formula.amount),
        }
    if isinstance(formula, Neg):
        return {"op": "not", "arg": modal_to_dict(formula.sub)}
    if isinstance(formula, And):
        return {
            "op": "and",
            "left": modal_to_dict(formula.left),
            "right": modal_to_dict(formula.right),
        }
    if isinstance(formula, Or):
        return {
            "op": "or",
            "left": modal_to_dict(formula.left),
            "right": modal_to_dict(formula.right),
        }
    if isinstance(formula, Diamond):
        return {"op": "dia", "arg": modal_to_dict(formula.sub)}
    if isinstance(formula, Box):
        return {"op": "box", "arg": modal_to_dict(formula.sub)}
    raise TypeError(f"not a modal formula: {formula!r}")


def modal_from_dict(doc) -> ModalFormula:
    try:
        op = doc["op"]
        if op == "const":
            return Const(parse_rational(doc["value"], "const"))
        if op == "atom":
            return Atom(doc["name"])
        if op == "sub":
            return TruncSub(
                modal_from_dict(doc["arg"]), parse_rational(doc["amount"], "sub")
            )
        if op == "not":
            return Neg(modal_from_dict(doc["arg"]))
        if op == "and":
            return And(modal_from_dict(doc["left"]), modal_from_dict(doc["right"]))
        if op == "or":
            return Or(modal_from_dict(doc["left"]), modal_from_dict(doc["right"]))
        if op == "dia":
            return Diamond(modal_from_dict(doc["arg"]))
        if op == "box":
            return Box(modal_from_dict(doc["arg"]))
    except (KeyError, TypeError) as exc:
        raise FormulaSyntaxError(f"malformed formula document: {exc}") from exc
    raise FormulaSyntaxError(f"unknown modal operator {op!r}")


def fo_to_dict(formula: FOFormula) -> dict:
    if isinstance(formula, FOConst):
        return {"op": "const", "value": format_rational(formula.value)}
    if isinstance(formula, FOAtom):
        return {"op": "atom", "name": formula.name, "var": formula.var}
    if isinstance(formula, FOEq):
        return {"op": "eq", "left": formula.left, "right": formula.right}
    if isinstance(formula, FOTruncSub):
        return {
            "op": "sub",
            "arg": fo_to_dict(formula.sub),
            "amount": format_rational(formula.amount),
        }
    if isinstance(formula, FONeg):
        return {"op": "not", "arg": fo_to_dict(formula.sub)}
    if isinstance(formula, FOAnd):
        return {
            "op": "and",
            "left": fo_to_dict(formula.left),
            "right": fo_to_dict(formula.right),
        }
    if isinstance(formula, FOOr):
        return {
            "op": "or",
            "left": fo_to_dict(formula.left),
            "right": fo_to_dict(formula.right),
        }
    if isinstance(formula, FOExists):
        return {"op": "exists", "var": formula.var, "body": fo_to_dict(formula.body)}
    if isinstance(formula, FODiamondBind):
        return {
            "op": "dia",
            "source": formula.source,
            "bound": formula.bound,
            "body": fo_to_dict(formula.body),
        }
    raise TypeError(f"not a first-order formula: {formula!r}")


def fo_from_dict(doc) -> FOFormula:
    try:
        op = doc["op"]
        if op == "const":
            return FOConst(parse_rational(doc["value"], "const"))
        if op == "atom":
            return FOAtom(doc["name"], doc["var"])
        if op == "eq":
            return FOEq(doc["left"], doc["right"])
        if op == "sub":
            return FOTruncSub(
                fo_from_dict(doc["arg"]), parse_rational(doc["amount"], "sub")
            )
        if op == "not":
            return FONeg(fo_from_dict(doc["arg"]))
        if op == "and":
            return FOAnd(fo_from_dict(doc["left"]), fo_from_dict(doc["right"]))
        if op == "or":
            return FOOr(fo_from_dict(doc["left"]), fo_from_dict(doc["right"]))
        if op == "exists":
            return FOExists(doc["var"], fo_from_dict(doc["body"]))
        if op == "dia":
            return FODiamondBind(doc["source"], doc["bound"], fo_from_dict(doc["body"]))
    except (KeyError, TypeError) as exc:
        raise FormulaSyntaxError(f"malformed formula document: {exc}") from exc
    raise FormulaSyntaxError(f"unknown first-order operator {op!r}")
