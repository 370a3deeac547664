"""Node sequences and relation graphs over (simplified) ASTs.

The relation graph has a self-loop on every node and an undirected edge between each
parent and child. The propagation matrix used by the GCN layers is ``L = A / (D + 1)``
row-wise, where ``D_i`` is the row sum of ``A`` (self-loop included).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy import sparse

from simast_review.errors import ReviewDataError
from simast_review.syntax.tree import Ast, AstNode


Normalization = Literal["row", "symmetric"]
FloatMatrix = npt.NDArray[np.float64]


def serialize(ast: Ast) -> tuple[list[str], list[int | None]]:
    """Depth-first pre-order labels plus, for each position, the index of its parent."""
    labels: list[str] = []
    parents: list[int | None] = []
    stack: list[tuple[AstNode, int | None]] = [(ast.root, None)]
    while stack:
        node, parent = stack.pop()
        index = len(labels)
        labels.append(node.label)
        parents.append(parent)
        stack.extend((child, index) for child in reversed(node.children))
    return labels, parents


def code_mask(ast: Ast) -> list[int]:
    """1 for code nodes, 0 for attribute nodes, in the same order as :func:`serialize`."""
    mask: list[int] = []
    stack = [ast.root]
    while stack:
        node = stack.pop()
        mask.append(1 if node.is_code else 0)
        stack.extend(reversed(node.children))
    return mask


def _readonly(array: FloatMatrix) -> FloatMatrix:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, slots=True)
class FragmentGraph:
    """Node labels with adjacency ``A``, degrees ``D`` and propagation matrix ``L``."""

    labels: tuple[str, ...]
    parents: tuple[int | None, ...]
    adjacency: FloatMatrix
    degrees: FloatMatrix
    propagation: FloatMatrix

    @property
    def size(self) -> int:
        return len(self.labels)

    def edges(self) -> list[tuple[int, int]]:
        """Parent-child pairs, excluding self-loops."""
        return [(parent, child) for child, parent in enumerate(self.parents) if parent is not None]

    def sparse_propagation(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(self.propagation)


def _check_parents(labels: Sequence[str], parents: Sequence[int | None]) -> None:
    if len(labels) != len(parents):
        raise ReviewDataError(
            f"labels ({len(labels)}) and parents ({len(parents)}) differ in length"
        )
    if not labels:
        raise ReviewDataError("fragment graph needs at least one node")
    if parents[0] is not None:
        raise ReviewDataError("first node must be the root (parent = null)")
    for index, parent in enumerate(parents[1:], start=1):
        if parent is None or not 0 <= parent < index:
            raise ReviewDataError(f"node {index} has invalid parent {parent!r}")


def build_graph(
    labels: Sequence[str],
    parents: Sequence[int | None],
    normalization: Normalization = "row",
) -> FragmentGraph:
    """Build ``A``, ``D`` and ``L`` from a serialized tree."""
    _check_parents(labels, parents)
    n = len(labels)
    adjacency = np.eye(n, dtype=np.float64)
    children = np.arange(1, n)
    if n > 1:
        parent_index = np.asarray(parents[1:], dtype=np.intp)
        adjacency[children, parent_index] = 1.0
        adjacency[parent_index, children] = 1.0
    degrees = adjacency.sum(axis=1)
    if normalization == "row":
        propagation = adjacency / (degrees + 1.0)[:, None]
    elif normalization == "symmetric":
        scale = 1.0 / np.sqrt(degrees)
        propagation = adjacency * scale[:, None] * scale[None, :]
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return FragmentGraph(
        labels=tuple(labels),
        parents=tuple(parents),
        adjacency=_readonly(adjacency),
        degrees=_readonly(degrees),
        propagation=_readonly(propagation),
    )


def graph_from_ast(ast: Ast, normalization: Normalization = "row") -> FragmentGraph:
    labels, parents = serialize(ast)
    return build_graph(labels, parents, normalization)
