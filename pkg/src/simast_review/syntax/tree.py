"""Language-neutral AST data model shared by the parser, simplifier and graph builder."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum


class NodeKind(str, Enum):
    """Whether a node carries a source lexeme or a grammar production name."""

    CODE = "code"
    ATTRIBUTE = "attribute"


@dataclass(frozen=True, slots=True, eq=False)
class AstNode:
    """One node of an abstract syntax tree.

    Code nodes are leaves holding a source lexeme; attribute nodes hold a grammar
    production name such as ``MethodDeclaration``. Labels are compared case-sensitively.
    Equality and hashing walk the subtree iteratively.
    """

    kind: NodeKind
    label: str
    children: tuple[AstNode, ...] = ()

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("AST node label must be non-empty")
        if self.kind is NodeKind.CODE and self.children:
            raise ValueError(f"code node {self.label!r} cannot have children")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AstNode):
            return NotImplemented
        pending = [(self, other)]
        while pending:
            left, right = pending.pop()
            if left is right:
                continue
            if (
                left.kind is not right.kind
                or left.label != right.label
                or len(left.children) != len(right.children)
            ):
                return False
            pending.extend(zip(left.children, right.children))
        return True

    def __hash__(self) -> int:
        # pre-order labels plus child counts determine the tree
        return hash(tuple((node.kind, node.label, len(node.children)) for node in iter_preorder(self)))

    @property
    def is_code(self) -> bool:
        return self.kind is NodeKind.CODE

    @classmethod
    def code(cls, label: str) -> AstNode:
        return cls(NodeKind.CODE, label)

    @classmethod
    def attribute(cls, label: str, *children: AstNode) -> AstNode:
        return cls(NodeKind.ATTRIBUTE, label, tuple(children))


def iter_preorder(root: AstNode) -> Iterator[AstNode]:
    """Yield nodes depth-first, parents before children, children in stored order."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


@dataclass(frozen=True, slots=True)
class Ast:
    """A whole fragment tree; ``node_count`` is filled in from the root."""

    root: AstNode
    node_count: int = field(init=False)

    def __post_init__(self) -> None:
        if self.root.kind is not NodeKind.ATTRIBUTE:
            raise ValueError("AST root must be an attribute node")
        object.__setattr__(self, "node_count", _count(self.root))


def _count(root: AstNode) -> int:
    return sum(1 for _ in iter_preorder(root))


def count_nodes(ast: Ast) -> int:
    """Number of nodes in the tree, recomputed from the root."""
    return _count(ast.root)


def code_token_count(ast: Ast) -> int:
    """Number of code (lexeme) nodes in the tree."""
    return sum(1 for node in iter_preorder(ast.root) if node.is_code)
