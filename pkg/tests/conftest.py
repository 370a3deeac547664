"""Shared fixtures: random trees, small model configs and a synthetic corpus."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from simast_review.config import ModelConfig, build_model_config
from simast_review.model.embedding import EmbeddingTable, Vocabulary
from simast_review.nn.tensor import Array
from simast_review.syntax.parser import parse_subset
from simast_review.syntax.tree import Ast, AstNode, NodeKind
from simast_review.training.dataset import PairLine, preprocess_records, write_jsonl
from simast_review.training.synthetic import generate_synthetic_records


HELLO_WORLD = 'public static void main(String[] args){ System.out.println("Hello World"); }'

ATTRIBUTE_LABELS = (
    "LocalVariableDeclaration",
    "VariableDeclarator",
    "IfStatement",
    "StatementExpression",
    "modifiers",
    "BinaryOperation",
    "MemberReference",
    "MethodInvocation",
    "Literal",
    "FormalParameter",
    "ReferenceType",
)
CODE_LABELS = ("x", "y", "count", "0", "1", "+", "==", "println", "null", "return")


def random_tree(rng: np.random.Generator, max_nodes: int = 200) -> Ast:
    """A random tree rooted at ``MethodDeclaration`` with at most ``max_nodes`` nodes."""
    target = int(rng.integers(1, max_nodes + 1))
    labels = ["MethodDeclaration"]
    is_code = [False]
    children: list[list[int]] = [[]]
    attributes = [0]
    while len(labels) < target:
        parent = attributes[int(rng.integers(len(attributes)))]
        code = bool(rng.random() < 0.5)
        labels.append(str(rng.choice(CODE_LABELS if code else ATTRIBUTE_LABELS)))
        is_code.append(code)
        children.append([])
        children[parent].append(len(labels) - 1)
        if not code:
            attributes.append(len(labels) - 1)

    built: dict[int, AstNode] = {}
    for index in reversed(range(len(labels))):
        kind = NodeKind.CODE if is_code[index] else NodeKind.ATTRIBUTE
        built[index] = AstNode(kind, labels[index], tuple(built[c] for c in children[index]))
    return Ast(built[0])


@pytest.fixture(scope="session")
def tree_factory() -> Callable[..., Ast]:
    return random_tree


@pytest.fixture
def hello_world() -> str:
    return HELLO_WORLD


@pytest.fixture
def small_config() -> ModelConfig:
    return build_model_config(embedding_dim=8, hidden_dim=8, gcn_layers=3)


@pytest.fixture
def random_embeddings() -> Callable[[list[str], int, int], EmbeddingTable]:
    """Build a random embedding table over the given tokens."""

    def make(tokens: list[str], dim: int = 8, seed: int = 0) -> EmbeddingTable:
        vocab = Vocabulary(("<unk>", *dict.fromkeys(tokens)))
        vectors = np.random.default_rng(seed).normal(0.0, 0.5, size=(len(vocab), dim))
        return EmbeddingTable(vocab, vectors)

    return make


@pytest.fixture
def numeric_gradient() -> Callable[[Callable[[], float], Array, float], Array]:
    """Central finite differences of ``fn`` with respect to the array ``x`` (mutated in place)."""

    def estimate(fn: Callable[[], float], x: Array, step: float = 1e-5) -> Array:
        grad = np.zeros_like(x)
        for index in np.ndindex(x.shape):
            saved = x[index]
            x[index] = saved + step
            upper = fn()
            x[index] = saved - step
            lower = fn()
            x[index] = saved
            grad[index] = (upper - lower) / (2 * step)
        return grad

    return estimate


@pytest.fixture(scope="session")
def synthetic_pairs() -> list[PairLine]:
    return preprocess_records(generate_synthetic_records(pairs=60, seed=7))


@pytest.fixture
def records_file(tmp_path: Path) -> Path:
    path = tmp_path / "records.jsonl"
    write_jsonl(path, generate_synthetic_records(pairs=20, seed=3))
    return path


@pytest.fixture
def synthetic_embeddings(
    synthetic_pairs: list[PairLine], random_embeddings: Callable[..., EmbeddingTable]
) -> EmbeddingTable:
    """Random 8-dimensional vectors over every label in the synthetic corpus."""
    tokens = [label for pair in synthetic_pairs for label in pair.original.labels + pair.revised.labels]
    return random_embeddings(tokens, 8, 0)


@pytest.fixture(scope="session")
def deep_chain_source() -> str:
    """A valid method whose left-associative sum nests more than 2000 levels deep."""
    return "int f(){ return " + " + ".join(["a"] * 2100) + "; }"


@pytest.fixture(scope="session")
def deep_chain(deep_chain_source: str) -> Ast:
    return parse_subset(deep_chain_source)
