"""CCG derivation ingestion and conversion to pregroup string diagrams.

Derivations come from CCGBank AUTO files: one derivation per line, internal
nodes ``(<T cat head dtrs> child...)``, leaves ``(<L cat pos1 pos2 token
pred-arg-cat>)``, with ``ID=`` header lines skipped. AUTO stores no
combinator names, so the rule tag of every node is inferred from the child
and parent categories.

The translation to pregroup types sends N, NP and PP to the noun type, any
S[feature] to the sentence type, X/Y to T(X) ++ T(Y).l and X\\Y to
T(Y).r ++ T(X). Application and composition become nested cups; crossed
composition routes the displaced block with explicit swaps; type raising
becomes a cap; other unary re-typings that are not cap-shaped fall back to
a typed bridge box. A category marked [conj] maps to T(X).r ++ T(X) and the
conjunction word itself is typed as the right adjoint of its neighbour, so
coordination completes with ordinary backward-application cups.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .diagram import Cap, Diagram, Swap, Word, cup_at
from .types import NOUN, SENTENCE, PType, TypeSeq

logger = logging.getLogger(__name__)

PUNCT_ATOMS = {",", ".", ":", ";", "LRB", "RRB", "``", "''"}
CONJ_ATOMS = {"conj"}

RULES = ("FA", "BA", "FC", "BC", "FX", "BX", "TR", "LEX", "CONJ", "UNARY")


class ParseError(Exception):
    """Malformed AUTO derivation text."""

    def __init__(self, reason: str, line: int = 0, column: int = 0):
        super().__init__(f"{reason} (line {line}, column {column})")
        self.reason = reason
        self.line = line
        self.column = column


class UnknownCategory(Exception):
    """A category string that cannot be parsed or mapped to pregroup types."""


class DerivationError(Exception):
    """A well-formed derivation using an unsupported or ill-typed combination."""


# ---------------------------------------------------------------------------
# Categories.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atomic:
    name: str
    feature: Optional[str] = None
    conj: bool = False


@dataclass(frozen=True)
class Forward:
    result: "CCGCategory"
    argument: "CCGCategory"
    conj: bool = False


@dataclass(frozen=True)
class Backward:
    result: "CCGCategory"
    argument: "CCGCategory"
    conj: bool = False


CCGCategory = Union[Atomic, Forward, Backward]


def _strip_conj(c: CCGCategory) -> CCGCategory:
    if not c.conj:
        return c
    return type(c)(**{**c.__dict__, "conj": False})


def _strip_features(c: CCGCategory) -> CCGCategory:
    if isinstance(c, Atomic):
        return Atomic(c.name)
    return type(c)(_strip_features(c.result), _strip_features(c.argument))


def cat_eq(a: CCGCategory, b: CCGCategory) -> bool:
    """Category equality modulo bracket features and conj marking."""
    return _strip_features(a) == _strip_features(b)


def category_to_str(c: CCGCategory) -> str:
    if isinstance(c, Atomic):
        out = c.name + (f"[{c.feature}]" if c.feature else "")
    else:
        slash = "/" if isinstance(c, Forward) else "\\"
        res = category_to_str(c.result)
        arg = category_to_str(c.argument)
        if not isinstance(c.argument, Atomic):
            arg = f"({arg})"
        if not isinstance(c.result, Atomic):
            res = f"({res})"
        out = f"{res}{slash}{arg}"
    return out + ("[conj]" if c.conj else "")


class _CatParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, reason: str):
        raise UnknownCategory(f"{reason} in category {self.text!r} at {self.pos}")

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> CCGCategory:
        cat = self.parse_cat()
        if self.pos != len(self.text):
            self.fail("trailing characters")
        return cat

    def parse_cat(self) -> CCGCategory:
        cat = self.parse_item()
        while self.peek() in ("/", "\\"):
            slash = self.peek()
            self.pos += 1
            arg = self.parse_item()
            cat = Forward(cat, arg) if slash == "/" else Backward(cat, arg)
            cat = self.parse_brackets(cat)
        return cat

    def parse_item(self) -> CCGCategory:
        if self.peek() == "(":
            self.pos += 1
            cat = self.parse_cat()
            if self.peek() != ")":
                self.fail("unbalanced parenthesis")
            self.pos += 1
            return self.parse_brackets(cat)
        start = self.pos
        while self.peek() and self.peek() not in "/\\()[]":
            self.pos += 1
        name = self.text[start:self.pos]
        if not name:
            self.fail("empty atom")
        return self.parse_brackets(Atomic(name))

    def parse_brackets(self, cat: CCGCategory) -> CCGCategory:
        while self.peek() == "[":
            end = self.text.find("]", self.pos)
            if end < 0:
                self.fail("unbalanced bracket")
            feature = self.text[self.pos + 1:end]
            self.pos = end + 1
            if feature == "conj":
                cat = type(cat)(**{**cat.__dict__, "conj": True})
            elif isinstance(cat, Atomic) and cat.feature is None:
                cat = Atomic(cat.name, feature, cat.conj)
            # a second plain feature on the same node is ignored
        return cat


def parse_category(text: str) -> CCGCategory:
    return _CatParser(text).parse()


# ---------------------------------------------------------------------------
# Trees.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    token: str
    category: CCGCategory


@dataclass(frozen=True)
class Node:
    category: CCGCategory
    rule: str
    children: tuple["CCGTree", ...]

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}")
        unary = self.rule in ("TR", "LEX", "UNARY")
        if len(self.children) != (1 if unary else 2):
            raise ValueError(f"rule {self.rule} has wrong arity")


CCGTree = Union[Leaf, Node]


def _is_punct(c: CCGCategory) -> bool:
    return isinstance(c, Atomic) and c.name in PUNCT_ATOMS


def _is_conj_atom(c: CCGCategory) -> bool:
    return isinstance(c, Atomic) and c.name in CONJ_ATOMS


def infer_rule(left: CCGCategory, right: CCGCategory,
               parent: CCGCategory) -> str:
    """Name the binary combinator that takes (left, right) to parent."""
    if parent.conj and (_is_conj_atom(left) or _is_punct(left)) \
            and cat_eq(_strip_conj(parent), right):
        return "CONJ"
    if _is_punct(left) and cat_eq(parent, right):
        return "CONJ"
    if _is_punct(right) and cat_eq(parent, left):
        return "CONJ"
    if right.conj and cat_eq(left, _strip_conj(right)) and cat_eq(parent, left):
        return "CONJ"
    if isinstance(left, Forward) and cat_eq(left.argument, right) \
            and cat_eq(parent, left.result):
        return "FA"
    if isinstance(right, Backward) and cat_eq(right.argument, left) \
            and cat_eq(parent, right.result):
        return "BA"
    if isinstance(left, Forward) and isinstance(right, Forward) \
            and cat_eq(left.argument, right.result) \
            and isinstance(parent, Forward) \
            and cat_eq(parent.result, left.result) \
            and cat_eq(parent.argument, right.argument):
        return "FC"
    if isinstance(left, Backward) and isinstance(right, Backward) \
            and cat_eq(right.argument, left.result) \
            and isinstance(parent, Backward) \
            and cat_eq(parent.result, right.result) \
            and cat_eq(parent.argument, left.argument):
        return "BC"
    if isinstance(left, Forward) and isinstance(right, Backward) \
            and cat_eq(left.argument, right.result) \
            and isinstance(parent, Backward) \
            and cat_eq(parent.result, left.result) \
            and cat_eq(parent.argument, right.argument):
        return "FX"
    if isinstance(left, Forward) and isinstance(right, Backward) \
            and cat_eq(right.argument, left.result) \
            and isinstance(parent, Forward) \
            and cat_eq(parent.result, right.result) \
            and cat_eq(parent.argument, left.argument):
        return "BX"
    raise DerivationError(
        f"no supported rule combines {category_to_str(left)} and "
        f"{category_to_str(right)} into {category_to_str(parent)}")


def infer_unary_rule(child: CCGCategory, parent: CCGCategory) -> str:
    if isinstance(parent, Forward) and isinstance(parent.argument, Backward) \
            and cat_eq(parent.argument.argument, child) \
            and cat_eq(parent.result, parent.argument.result):
        return "TR"
    if isinstance(parent, Backward) and isinstance(parent.argument, Forward) \
            and cat_eq(parent.argument.argument, child) \
            and cat_eq(parent.result, parent.argument.result):
        return "TR"
    if isinstance(child, Atomic) and isinstance(parent, Atomic):
        return "LEX"
    return "UNARY"


# ---------------------------------------------------------------------------
# AUTO parsing.
# ---------------------------------------------------------------------------


class _AutoParser:
    def __init__(self, line: str, lineno: int):
        self.line = line
        self.lineno = lineno
        self.pos = 0

    def fail(self, reason: str):
        raise ParseError(reason, self.lineno, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.line) and self.line[self.pos] == " ":
            self.pos += 1

    def expect(self, ch: str):
        if self.pos >= len(self.line) or self.line[self.pos] != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def parse_node(self) -> CCGTree:
        self.skip_ws()
        self.expect("(")
        self.expect("<")
        end = self.line.find(">", self.pos)
        if end < 0:
            self.fail("unterminated node header")
        fields = self.line[self.pos:end].split(" ")
        self.pos = end + 1
        if fields[0] == "L":
            if len(fields) != 6:
                self.fail(f"leaf header needs 6 fields, got {len(fields)}")
            category = parse_category(fields[1])
            tree: CCGTree = Leaf(fields[4], category)
            self.skip_ws()
            self.expect(")")
            return tree
        if fields[0] == "T":
            if len(fields) != 4:
                self.fail(f"internal header needs 4 fields, got {len(fields)}")
            category = parse_category(fields[1])
            try:
                n_children = int(fields[3])
            except ValueError:
                self.fail(f"bad child count {fields[3]!r}")
            if n_children not in (1, 2):
                self.fail(f"unsupported child count {n_children}")
            children = tuple(self.parse_node() for _ in range(n_children))
            self.skip_ws()
            self.expect(")")
            if len(children) == 1:
                rule = infer_unary_rule(children[0].category, category)
            else:
                rule = infer_rule(children[0].category, children[1].category,
                                  category)
            return Node(category, rule, children)
        self.fail(f"unknown node tag {fields[0]!r}")

    def parse(self) -> CCGTree:
        tree = self.parse_node()
        self.skip_ws()
        if self.pos != len(self.line):
            self.fail("trailing characters after derivation")
        return tree


def parse_auto(text: str) -> list[CCGTree]:
    """Parse AUTO-format text, one derivation per non-header line."""
    trees = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("ID="):
            continue
        trees.append(_AutoParser(line, lineno).parse())
    return trees


# ---------------------------------------------------------------------------
# Category translation.
# ---------------------------------------------------------------------------

_ATOM_IMAGE = {"N": NOUN, "NP": NOUN, "PP": NOUN, "S": SENTENCE}


def cat_to_typeseq(c: CCGCategory) -> TypeSeq:
    if c.conj:
        base = cat_to_typeseq(_strip_conj(c))
        return base.r @ base
    if isinstance(c, Atomic):
        if c.name not in _ATOM_IMAGE:
            raise UnknownCategory(f"no pregroup image for atom {c.name!r}")
        return TypeSeq((PType(_ATOM_IMAGE[c.name]),))
    if isinstance(c, Forward):
        return cat_to_typeseq(c.result) @ cat_to_typeseq(c.argument).l
    return cat_to_typeseq(c.argument).r @ cat_to_typeseq(c.result)


# ---------------------------------------------------------------------------
# Tree to diagram.
# ---------------------------------------------------------------------------


def _cups(d: Diagram, start: int, count: int) -> Diagram:
    """Nested cups cancelling ``count`` pairs straddling position start+count."""
    for step in range(count):
        try:
            d = cup_at(d, start + count - 1 - step)
        except Exception as exc:
            raise DerivationError(f"cups do not cancel: {exc}") from exc
    return d


def _swap_block_left(d: Diagram, start: int, size: int, dist: int) -> Diagram:
    """Move the ``size`` wires at ``start`` left across ``dist`` wires."""
    for i in range(size):
        pos = start + i
        for _ in range(dist):
            left, right = d.cod[pos - 1], d.cod[pos]
            layer = Diagram(
                d.cod,
                d.cod[:pos - 1] @ TypeSeq((right, left)) @ d.cod[pos + 1:],
                ((Swap(left, right), pos - 1),))
            d = d >> layer
            pos -= 1
    return d


def _swap_block_right(d: Diagram, start: int, size: int, dist: int) -> Diagram:
    """Move the ``size`` wires at ``start`` right across ``dist`` wires."""
    for _ in range(size):
        # always move the rightmost remaining block wire first
        pos = start + size - 1
        for _ in range(dist):
            left, right = d.cod[pos], d.cod[pos + 1]
            layer = Diagram(
                d.cod,
                d.cod[:pos] @ TypeSeq((right, left)) @ d.cod[pos + 2:],
                ((Swap(left, right), pos),))
            d = d >> layer
            pos += 1
        size -= 1
    return d


def _cap_layer(d: Diagram, offset: int, base: str, z: int) -> Diagram:
    cap = Cap(base, z)
    layer = Diagram(d.cod, d.cod[:offset] @ cap.cod @ d.cod[offset:],
                    ((cap, offset),))
    return d >> layer


def _cap_shaped(a: PType, b: PType) -> bool:
    return a.base == b.base and a.z == b.z + 1


def tree_to_diagram(t: CCGTree) -> Diagram:
    """Convert a derivation to a diagram with dom [] and cod T(root)."""
    d = _convert(t)
    want = cat_to_typeseq(t.category)
    if d.cod != want:
        raise DerivationError(
            f"converted codomain {d.cod} does not match root type {want}")
    return d


def _convert(t: CCGTree) -> Diagram:
    if isinstance(t, Leaf):
        return Diagram.from_box(Word(t.token, cod=cat_to_typeseq(t.category)))
    if t.rule in ("TR", "LEX", "UNARY"):
        return _convert_unary(t)
    if t.rule == "CONJ":
        return _convert_conj(t)
    left, right = t.children
    ld, rd = _convert(left), _convert(right)
    lc, rc = left.category, right.category
    if t.rule == "FA":
        arg = cat_to_typeseq(lc.argument)
        x = len(cat_to_typeseq(lc.result))
        return _cups(ld @ rd, x, len(arg))
    if t.rule == "BA":
        arg = cat_to_typeseq(rc.argument)
        return _cups(ld @ rd, len(ld.cod) - len(arg), len(arg))
    if t.rule == "FC":
        y = cat_to_typeseq(lc.argument)
        x = len(cat_to_typeseq(lc.result))
        return _cups(ld @ rd, x, len(y))
    if t.rule == "BC":
        y = cat_to_typeseq(rc.argument)
        z = len(cat_to_typeseq(lc.argument))
        return _cups(ld @ rd, z, len(y))
    if t.rule == "FX":
        # left: T(X) ++ T(Y).l, right: T(Z).r ++ T(Y); pull T(Z).r leftmost
        y = cat_to_typeseq(lc.argument)
        x = len(cat_to_typeseq(lc.result))
        zlen = len(cat_to_typeseq(rc.argument))
        d = ld @ rd
        d = _swap_block_left(d, len(ld.cod), zlen, len(ld.cod))
        return _cups(d, zlen + x, len(y))
    if t.rule == "BX":
        # left: T(Y) ++ T(Z).l, right: T(Y).r ++ T(X); push T(Z).l rightmost
        y = cat_to_typeseq(rc.argument)
        x = len(cat_to_typeseq(rc.result))
        zlen = len(cat_to_typeseq(lc.argument))
        d = ld @ rd
        d = _swap_block_right(d, len(y), zlen, len(rd.cod))
        return _cups(d, 0, len(y))
    raise DerivationError(f"unhandled rule {t.rule}")


def _convert_unary(t: Node) -> Diagram:
    child = t.children[0]
    d = _convert(child)
    a = cat_to_typeseq(child.category)
    b = cat_to_typeseq(t.category)
    if a == b:
        return d
    if len(b) == len(a) + 2 and b[2:] == a and _cap_shaped(b[0], b[1]):
        return _cap_layer(d, 0, b[1].base, b[1].z)
    if len(b) == len(a) + 2 and b[:-2] == a and _cap_shaped(b[-2], b[-1]):
        return _cap_layer(d, len(d.cod), b[-1].base, b[-1].z)
    # general re-typing: a trainable bridge box consuming T(A), producing T(B)
    src = category_to_str(child.category)
    dst = category_to_str(t.category)
    bridge = Diagram(a, b, ((Word(f"[{src}->{dst}]", dom=a, cod=b), 0),))
    return d >> bridge


def _convert_conj(t: Node) -> Diagram:
    left, right = t.children
    lc, rc, pc = left.category, right.category, t.category
    if pc.conj and isinstance(left, Leaf) \
            and (_is_conj_atom(lc) or _is_punct(lc)):
        neighbour = cat_to_typeseq(rc)
        conj_word = Diagram.from_box(Word(left.token, cod=neighbour.r))
        return conj_word @ _convert(right)
    if rc.conj and cat_eq(lc, _strip_conj(rc)):
        ld, rd = _convert(left), _convert(right)
        shared = cat_to_typeseq(lc)
        return _cups(ld @ rd, 0, len(shared))
    if _is_punct(rc) and isinstance(right, Leaf):
        return _convert(left) @ Diagram.from_box(Word(right.token))
    if _is_punct(lc) and isinstance(left, Leaf):
        return Diagram.from_box(Word(left.token)) @ _convert(right)
    raise DerivationError(
        f"unsupported conj/punct combination at {category_to_str(pc)}")


# ---------------------------------------------------------------------------
# Corpus conversion.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConversionResult:
    derivation_id: str
    diagram: Optional[Diagram] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.diagram is not None


def section_to_diagrams(path: str | Path) -> list[ConversionResult]:
    """Convert every derivation under ``path``; failures become records."""
    path = Path(path)
    files = sorted(path.glob("*.auto")) if path.is_dir() else [path]
    results = []
    for file in files:
        text = file.read_text(encoding="utf-8")
        current_id: Optional[str] = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("ID="):
                current_id = line.split()[0][3:]
                continue
            deriv_id = current_id or f"{file.name}:{lineno}"
            current_id = None
            try:
                tree = _AutoParser(line, lineno).parse()
                diagram = tree_to_diagram(tree)
                results.append(ConversionResult(deriv_id, diagram=diagram))
            except (ParseError, UnknownCategory, DerivationError) as exc:
                logger.warning("skipping %s: %s", deriv_id, exc)
                results.append(ConversionResult(deriv_id, error=str(exc)))
    return results
