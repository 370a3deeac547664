"""Removal of redundant attribute nodes from an AST.

An attribute node survives when its label contains one of the keep-rule substrings
(``Declaration`` or ``Statement`` by default); a removed node's children are spliced into
its nearest surviving ancestor in place of the removed node. Splicing runs to fixpoint:
children are simplified first, so a chain of removable nodes contributes only its
surviving descendants. The root is always retained.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from simast_review.syntax.tree import Ast, AstNode


DEFAULT_KEEP_SUBSTRINGS = ("Declaration", "Statement")


@dataclass(frozen=True, slots=True)
class KeepRule:
    """Case-sensitive substrings that mark an attribute node as worth keeping."""

    required: tuple[str, ...] = DEFAULT_KEEP_SUBSTRINGS

    def __post_init__(self) -> None:
        if not self.required or any(not part for part in self.required):
            raise ValueError("keep rule needs at least one non-empty substring")

    @classmethod
    def parse(cls, spec: str | Sequence[str]) -> KeepRule:
        """Build a rule from ``"Declaration,Statement"`` or a sequence of substrings."""
        parts = spec.split(",") if isinstance(spec, str) else list(spec)
        return cls(tuple(part.strip() for part in parts if part.strip()))


def is_kept(node: AstNode, rule: KeepRule = KeepRule()) -> bool:
    """Code nodes are always kept; attribute nodes only when the rule matches their label."""
    if node.is_code:
        return True
    return any(part in node.label for part in rule.required)


def simplify(ast: Ast, rule: KeepRule = KeepRule()) -> Ast:
    """Return the simplified tree; the input is left untouched."""
    # post-order over (node, unvisited children, simplified children) frames
    root = ast.root
    stack: list[tuple[AstNode, Iterator[AstNode], list[AstNode]]] = [
        (root, iter(root.children), [])
    ]
    while True:
        node, pending, kept = stack[-1]
        child = next(pending, None)
        if child is not None:
            if child.is_code:
                kept.append(child)
            else:
                stack.append((child, iter(child.children), []))
            continue
        stack.pop()
        if not stack:
            return Ast(AstNode(node.kind, node.label, tuple(kept)))
        siblings = stack[-1][2]
        if is_kept(node, rule):
            siblings.append(AstNode(node.kind, node.label, tuple(kept)))
        else:
            siblings.extend(kept)
