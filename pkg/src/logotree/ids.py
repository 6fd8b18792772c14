"""Recursive decomposition of Han logographs into binary trees.

Rules come from Ideographic Description Sequence (IDS) databases in the
CHISE text layout: one ``U+XXXX<TAB>char<TAB>expression`` line per
logograph, the expression in prefix notation over the description operators
U+2FF0..U+2FFB. Ternary operators are rewritten into nested binary ones, so
every tree handed to the encoders is strictly binary.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (CycleError, ExpansionError, IoError, ParseError,
                     StructureError)

log = logging.getLogger(__name__)

#: Binary description operators (the only ones that survive binarization).
BINARY_IDCS = frozenset("⿰⿱⿴⿵⿶⿷⿸⿹⿺⿻")
#: Ternary operators: ⿲ (three across) and ⿳ (three down).
IDC_ACROSS3 = "⿲"
IDC_DOWN3 = "⿳"
TERNARY_IDCS = frozenset((IDC_ACROSS3, IDC_DOWN3))
ALL_IDCS = BINARY_IDCS | TERNARY_IDCS

IDC_ACROSS = "⿰"  # ⿰
IDC_DOWN = "⿱"    # ⿱

#: Leaf used for characters absent from the rule table entirely.
UNK_TOKEN = "<UNK>"

DEFAULT_MAX_DEPTH = 64


@dataclass(frozen=True)
class Leaf:
    token: str

    def __repr__(self):
        return f"Leaf({self.token})"


@dataclass(frozen=True)
class Op:
    """Strictly binary inner node labeled with a description operator."""

    idc: str
    left: "GlyphTree"
    right: "GlyphTree"

    def __repr__(self):
        return f"Op({self.idc}, {self.left!r}, {self.right!r})"


GlyphTree = Leaf | Op


@dataclass(frozen=True)
class Nary:
    """Inner node as parsed, before ternary rewriting (arity 2 or 3)."""

    idc: str
    children: tuple


class LinearOrder(Enum):
    PRE = "pre"
    POST = "post"
    IN = "in"


@dataclass(frozen=True)
class Ids:
    """One decomposition rule: a logograph and its prefix expression."""

    codepoint: int | None
    expr: tuple[str, ...]


@dataclass
class RuleTable:
    """Immutable-after-load rule set; safe for concurrent reads."""

    rules: dict[str, Ids] = field(default_factory=dict)
    leaf_set: set[str] = field(default_factory=set)
    skipped_lines: int = 0
    duplicate_lines: int = 0
    atomic_entries: int = 0


# ---------------------------------------------------------------------------
# tokenizing and parsing
# ---------------------------------------------------------------------------

def tokenize_ids(text: str) -> list[str]:
    """Split an IDS string into tokens.

    Bracketed annotations like ``[GT]`` are metadata, not structure, and are
    stripped. ``&name;`` entity references (components with no codepoint)
    are kept as single tokens.
    """
    tokens: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise ParseError(f"unterminated annotation at index {i}")
            i = end + 1
        elif ch == "&":
            end = text.find(";", i)
            if end < 0:
                raise ParseError(f"unterminated entity at index {i}")
            tokens.append(text[i:end + 1])
            i = end + 1
        elif ch.isspace():
            i += 1
        else:
            tokens.append(ch)
            i += 1
    return tokens


def _parse_raw(expr) -> Leaf | Nary:
    """Prefix-notation parse keeping ternary nodes; consumes every token."""
    tokens = list(expr)
    if not tokens:
        raise ParseError("empty expression")
    pos = 0

    def parse_one():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError(f"dangling operator: operand missing at token {pos}")
        tok = tokens[pos]
        pos += 1
        if tok in ALL_IDCS:
            arity = 3 if tok in TERNARY_IDCS else 2
            children = tuple(parse_one() for _ in range(arity))
            return Nary(tok, children)
        return Leaf(tok)

    tree = parse_one()
    if pos != len(tokens):
        raise ParseError(f"trailing tokens from index {pos}: {tokens[pos:]}")
    return tree


def binarize(node) -> GlyphTree:
    """Rewrite ternary nodes into two nested binary nodes.

    ⿲ a b c becomes ⿰(a, ⿰(b, c)) and ⿳ a b c becomes ⿱(a, ⿱(b, c)),
    preserving left-to-right leaf order. Already-binary input is returned
    structurally unchanged.
    """
    if isinstance(node, Leaf):
        return node
    if isinstance(node, Op):
        return Op(node.idc, binarize(node.left), binarize(node.right))
    if isinstance(node, Nary):
        kids = [binarize(c) for c in node.children]
        if len(kids) == 2:
            return Op(node.idc, kids[0], kids[1])
        if len(kids) == 3:
            inner = IDC_ACROSS if node.idc == IDC_ACROSS3 else IDC_DOWN
            return Op(inner, kids[0], Op(inner, kids[1], kids[2]))
        raise StructureError(f"node arity {len(kids)} not in {{0,2,3}}")
    raise StructureError(f"unsupported node type {type(node).__name__}")


def parse_ids(expr) -> GlyphTree:
    """Parse a prefix expression into a strictly binary tree."""
    return binarize(_parse_raw(expr))


# ---------------------------------------------------------------------------
# rule table loading
# ---------------------------------------------------------------------------

def load_rule_table(path) -> RuleTable:
    """Load a CHISE-layout IDS file.

    Skips comment lines (``;`` or ``#``) and counts malformed lines.
    Duplicate rules for one logograph keep the first occurrence. A rule
    mapping a character to itself marks it atomic (a terminal). Cyclic rule
    sets are rejected.
    """
    path = Path(path)
    table = RuleTable()
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read rule file {path}: {exc}") from exc

    explicit_terminals: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line[0] in ";#":
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            table.skipped_lines += 1
            log.warning("%s:%d: expected 3 tab-separated fields", path, lineno)
            continue
        cp_field, head, ids_text = parts[0], parts[1], parts[2]
        if not head:
            table.skipped_lines += 1
            log.warning("%s:%d: empty character field", path, lineno)
            continue
        try:
            codepoint = int(cp_field.removeprefix("U+"), 16)
        except ValueError:
            codepoint = ord(head) if len(head) == 1 else None
        try:
            tokens = tokenize_ids(ids_text)
            _parse_raw(tokens)
        except ParseError as exc:
            table.skipped_lines += 1
            log.warning("%s:%d: unparseable expression: %s", path, lineno, exc)
            continue
        if head in table.rules or head in explicit_terminals:
            table.duplicate_lines += 1
            log.warning("%s:%d: duplicate rule for %r kept first", path, lineno, head)
            continue
        if tokens == [head]:
            # identity rule: the database's way of marking an atomic glyph
            explicit_terminals.add(head)
            table.atomic_entries += 1
            continue
        table.rules[head] = Ids(codepoint, tuple(tokens))

    _check_acyclic(table.rules)

    for rule in table.rules.values():
        for tok in rule.expr:
            if tok not in ALL_IDCS and tok not in table.rules:
                table.leaf_set.add(tok)
    table.leaf_set |= explicit_terminals - set(table.rules)
    return table


def _check_acyclic(rules: dict[str, Ids]) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = dict.fromkeys(rules, WHITE)
    for start in rules:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(t for t in rules[start].expr if t in rules))]
        color[start] = GRAY
        path = [start]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    raise CycleError(path[path.index(nxt):] + [nxt])
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    path.append(nxt)
                    stack.append((nxt, iter(t for t in rules[nxt].expr if t in rules)))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                path.pop()
                stack.pop()


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------

def decompose(ch: str, rules: RuleTable, max_depth: int = DEFAULT_MAX_DEPTH,
              variant_map: dict[str, str] | None = None) -> GlyphTree:
    """Expand a logograph until every leaf is a terminal.

    A character with no rule that is a known terminal stays itself; a
    character absent from the table entirely becomes the UNK leaf.
    ``variant_map`` optionally unifies positional variant forms (applied to
    terminal leaves).
    """
    if max_depth < 1:
        raise ExpansionError("max_depth must be positive")

    def terminal(token: str) -> Leaf:
        if variant_map:
            token = variant_map.get(token, token)
        return Leaf(token)

    def expand(token: str, depth: int):
        rule = rules.rules.get(token)
        if rule is None:
            return terminal(token)
        if depth >= max_depth:
            raise ExpansionError(
                f"expansion of {ch!r} exceeded depth {max_depth} at {token!r}"
                " (cyclic rules suspected)")
        raw = _parse_raw(rule.expr)

        def subst(node):
            if isinstance(node, Leaf):
                return expand(node.token, depth + 1)
            return Nary(node.idc, tuple(subst(c) for c in node.children))

        return subst(raw)

    if ch not in rules.rules and ch not in rules.leaf_set:
        return Leaf(UNK_TOKEN)
    return binarize(expand(ch, 0))


# ---------------------------------------------------------------------------
# linearization and tree utilities
# ---------------------------------------------------------------------------

def linearize(tree: GlyphTree, order: LinearOrder) -> list[str]:
    out: list[str] = []

    def walk(node):
        if isinstance(node, Leaf):
            out.append(node.token)
            return
        if order is LinearOrder.PRE:
            out.append(node.idc)
            walk(node.left)
            walk(node.right)
        elif order is LinearOrder.POST:
            walk(node.left)
            walk(node.right)
            out.append(node.idc)
        else:
            walk(node.left)
            out.append(node.idc)
            walk(node.right)

    walk(tree)
    return out


def strip_operators(seq) -> list[str]:
    """Drop description-operator tokens, keeping leaf order."""
    return [t for t in seq if t not in ALL_IDCS]


def reconstruct_preorder(seq) -> GlyphTree:
    """Rebuild a tree from its pre-order walk (operators are arity 2)."""
    tokens = list(seq)
    pos = 0

    def build():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError(f"dangling operator at token {pos}")
        tok = tokens[pos]
        pos += 1
        if tok in ALL_IDCS:
            left = build()
            right = build()
            return Op(tok, left, right)
        return Leaf(tok)

    tree = build()
    if pos != len(tokens):
        raise ParseError(f"trailing tokens from index {pos}")
    return tree


def leaves(tree: GlyphTree) -> list[str]:
    if isinstance(tree, Leaf):
        return [tree.token]
    return leaves(tree.left) + leaves(tree.right)


def node_count(tree: GlyphTree) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + node_count(tree.left) + node_count(tree.right)


def tree_depth(tree: GlyphTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def to_bracketed(tree: GlyphTree) -> str:
    if isinstance(tree, Leaf):
        return tree.token
    return f"{tree.idc}({to_bracketed(tree.left)},{to_bracketed(tree.right)})"


def format_tree(tree: GlyphTree, indent: str = "") -> str:
    if isinstance(tree, Leaf):
        return f"{indent}{tree.token}"
    return "\n".join([
        f"{indent}{tree.idc}",
        format_tree(tree.left, indent + "  "),
        format_tree(tree.right, indent + "  "),
    ])


def depth_histogram(rules: RuleTable, max_depth: int = DEFAULT_MAX_DEPTH) -> Counter:
    """Depth of the full expansion of every rule head."""
    hist: Counter = Counter()
    for head in rules.rules:
        hist[tree_depth(decompose(head, rules, max_depth))] += 1
    return hist
