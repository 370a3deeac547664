"""Bi-GRU + GCN encoder with retrieval attention, the pair classifier and its loss.

Shapes, with ``n`` nodes, embedding size ``m`` and per-direction hidden size ``h``:

* ``bigru_forward``: ``n x m`` -> ``H^c``, ``n x 2h`` (forward states then backward states)
* ``gcn_forward``: ``n x 2h`` -> ``n x 2h``, ``h^l = LeakyReLU(L h^{l-1} W^l + b^l)``
* ``attention_pool``: ``beta_t = h^c_t . sum_i h_i``, ``alpha = softmax(beta)``,
  ``r = sum_t alpha_t h^c_t`` (``1 x 2h``)
* ``compare_and_predict``: ``softmax(W (r^O - r^R) + b)``; the ``concat`` variant feeds
  ``[r^O ; r^R]`` instead.

The ``nogcn`` variant pools ``H^c`` against itself and never reads GCN parameters.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from simast_review.config import ModelConfig, build_model_config
from simast_review.errors import ReviewDataError, ShapeError
from simast_review.model.embedding import EmbeddingTable
from simast_review.nn import tensor as ops
from simast_review.nn.checkpoint import load_archive, save_archive
from simast_review.nn.recurrent import GATES, gru
from simast_review.nn.tensor import Array, Tensor
from simast_review.syntax.graph import FragmentGraph


logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-12
DIRECTIONS = ("fwd", "bwd")


@dataclass
class ModelParams:
    """Named parameter tensors.

    ``gru_{fwd,bwd}_{w,u,b}``, ``gcn_{l}_{w,b}`` and ``cls_{w,b}``; the classifier weight is
    ``2 x 2h`` (``2 x 4h`` for the concat variant).
    """

    tensors: dict[str, Tensor]
    variant: str = "full"

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self.tensors[name]
        except KeyError:
            raise ShapeError(f"model has no parameter {name!r}") from None

    def __contains__(self, name: object) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    @property
    def gcn_layer_count(self) -> int:
        return sum(1 for name in self.tensors if name.startswith("gcn_") and name.endswith("_w"))

    def active(self) -> dict[str, Tensor]:
        """Parameters the configured variant actually reads (and therefore trains)."""
        if self.variant == "nogcn":
            return {name: p for name, p in self.tensors.items() if not name.startswith("gcn_")}
        return dict(self.tensors)

    def active_weights(self) -> list[Tensor]:
        return [p for name, p in self.active().items() if name.endswith(("_w", "_u"))]

    def detached(self) -> ModelParams:
        """Copies that record no gradient graph, for inference."""
        return ModelParams(
            {name: Tensor(p.data, name=name) for name, p in self.tensors.items()}, self.variant
        )

    def arrays(self) -> dict[str, Array]:
        return {name: p.data.copy() for name, p in self.tensors.items()}

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, Array], variant: str = "full") -> ModelParams:
        return cls(
            {name: Tensor(value, requires_grad=True, name=name) for name, value in arrays.items()},
            variant,
        )


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan: int) -> Array:
    bound = 1.0 / np.sqrt(fan)
    return rng.uniform(-bound, bound, size=shape)


def _layout(config: ModelConfig, include_gcn: bool) -> list[tuple[str, tuple[int, ...], int]]:
    """``(name, shape, fan)`` for every parameter, in initialization order."""
    m, h = config.embedding_dim, config.hidden_dim
    layout: list[tuple[str, tuple[int, ...], int]] = []
    for direction in DIRECTIONS:
        layout.append((f"gru_{direction}_w", (m, GATES * h), h))
        layout.append((f"gru_{direction}_u", (h, GATES * h), h))
        layout.append((f"gru_{direction}_b", (GATES * h,), h))
    features = 4 * h if config.variant == "concat" else 2 * h
    layout.append(("cls_w", (2, features), features))
    layout.append(("cls_b", (2,), features))
    if include_gcn:
        for layer in range(config.gcn_layers):
            layout.append((f"gcn_{layer}_w", (2 * h, 2 * h), 2 * h))
            layout.append((f"gcn_{layer}_b", (2 * h,), 2 * h))
    return layout


def parameter_shapes(config: ModelConfig, include_gcn: bool = True) -> dict[str, tuple[int, ...]]:
    """Shape of every parameter ``init_params`` creates for ``config``."""
    return {name: shape for name, shape, _ in _layout(config, include_gcn)}


def init_params(config: ModelConfig, seed: int, include_gcn: bool = True) -> ModelParams:
    """Uniform initialization in ``[-1/sqrt(fan), 1/sqrt(fan)]`` from a seeded generator.

    GCN parameters are drawn last, so leaving them out does not change the others.
    """
    rng = np.random.default_rng(seed + config.init_seed_offset)
    arrays = {name: _uniform(rng, shape, fan) for name, shape, fan in _layout(config, include_gcn)}
    return ModelParams.from_arrays(arrays, config.variant)


def bigru_forward(x: Tensor, params: ModelParams) -> Tensor:
    """``H^c``: forward GRU states concatenated with backward GRU states, row by row."""
    if x.data.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"Bi-GRU needs a non-empty n x m input, got shape {x.shape}")
    states = [
        gru(
            x,
            params[f"gru_{direction}_w"],
            params[f"gru_{direction}_u"],
            params[f"gru_{direction}_b"],
            reverse=direction == "bwd",
        )
        for direction in DIRECTIONS
    ]
    return ops.concat(states, axis=-1)


def gcn_forward(
    hidden: Tensor,
    propagation: Array | sparse.spmatrix,
    params: ModelParams,
    layers: int,
    slope: float = 0.01,
) -> Tensor:
    """Apply ``layers`` rounds of ``LeakyReLU(L H W + b)``, starting from the Bi-GRU states."""
    if layers > params.gcn_layer_count:
        raise ShapeError(
            f"asked for {layers} GCN layers but parameters hold {params.gcn_layer_count}"
        )
    out = hidden
    for layer in range(layers):
        mixed = ops.matmul(ops.propagate(propagation, out), params[f"gcn_{layer}_w"])
        out = ops.leaky_relu(ops.add(mixed, params[f"gcn_{layer}_b"]), slope)
    return out


def attention_pool(contextual: Tensor, graph_states: Tensor) -> tuple[Tensor, Tensor]:
    """Return ``(r, alpha)`` with ``r`` of shape ``1 x 2h`` and ``alpha`` of shape ``1 x n``."""
    if contextual.shape[0] == 0:
        raise ShapeError("attention over zero nodes")
    if contextual.shape != graph_states.shape:
        raise ShapeError(
            f"attention inputs differ in shape: {contextual.shape} and {graph_states.shape}"
        )
    query = ops.sum_(graph_states, axis=0, keepdims=True)
    scores = ops.transpose(ops.matmul(contextual, ops.transpose(query)))
    alpha = ops.softmax(scores)
    return ops.matmul(alpha, contextual), alpha


def encode(
    fragment: FragmentGraph,
    embeddings: EmbeddingTable,
    params: ModelParams,
    config: ModelConfig,
) -> Tensor:
    """Representation ``r`` (``1 x 2h``) of one fragment."""
    if fragment.size == 0:
        raise ReviewDataError("cannot encode an empty fragment")
    if embeddings.dim != config.embedding_dim:
        raise ShapeError(
            f"embedding dim {embeddings.dim} does not match configured {config.embedding_dim}"
        )
    x = Tensor(embeddings.lookup(fragment.labels))
    contextual = bigru_forward(x, params)
    if not config.uses_gcn:
        representation, _ = attention_pool(contextual, contextual)
        return representation
    propagation: Array | sparse.spmatrix = (
        fragment.sparse_propagation()
        if fragment.size > config.sparse_threshold
        else fragment.propagation
    )
    graph_states = gcn_forward(
        contextual, propagation, params, config.gcn_layers, config.leaky_slope
    )
    representation, _ = attention_pool(contextual, graph_states)
    return representation


def comparison_vector(original: Tensor, revised: Tensor, config: ModelConfig) -> Tensor:
    if original.shape != revised.shape:
        raise ShapeError(f"cannot compare representations {original.shape} and {revised.shape}")
    if config.variant == "concat":
        return ops.concat([original, revised], axis=-1)
    return ops.sub(original, revised)


def pre_bias_logits(
    original: Tensor, revised: Tensor, params: ModelParams, config: ModelConfig
) -> Tensor:
    return ops.matmul(comparison_vector(original, revised, config), ops.transpose(params["cls_w"]))


def classifier_logits(
    original: Tensor, revised: Tensor, params: ModelParams, config: ModelConfig
) -> Tensor:
    """Unnormalized (reject, accept) scores of the comparison vector."""
    return ops.add(pre_bias_logits(original, revised, params, config), params["cls_b"])


def compare_and_predict(
    original: Tensor, revised: Tensor, params: ModelParams, config: ModelConfig
) -> Tensor:
    """Class probabilities ``1 x 2`` ordered (reject, accept)."""
    return ops.softmax(classifier_logits(original, revised, params, config))


def sample_loss(probabilities: Tensor, label: int, weights: tuple[float, float]) -> Tensor:
    """``-(w^O y log p + w^R (1 - y) log(1 - p))`` for one sample, ``p`` = P(accept)."""
    weight_original, weight_revised = weights
    if label == 1:
        return ops.scale(ops.log(probabilities[0, 1], LOG_FLOOR), -weight_original)
    return ops.scale(ops.log(probabilities[0, 0], LOG_FLOOR), -weight_revised)


def l2_penalty(params: ModelParams, l2_lambda: float) -> Tensor:
    """``lambda * sum ||W||^2`` over the weight matrices the variant uses; biases excluded."""
    terms = [ops.l2_norm_squared(weight) for weight in params.active_weights()]
    total = terms[0]
    for term in terms[1:]:
        total = ops.add(total, term)
    return ops.scale(total, l2_lambda)


def weighted_loss(
    probabilities: list[Tensor],
    labels: list[int],
    config: ModelConfig,
    params: ModelParams,
    weights: tuple[float, float] | None = None,
) -> Tensor:
    """Batch loss: per-sample terms summed, plus the L2 term once."""
    if len(probabilities) != len(labels):
        raise ShapeError(f"{len(probabilities)} predictions for {len(labels)} labels")
    weights = weights or config.class_weights or (1.0, 1.0)
    total = l2_penalty(params, config.l2_lambda)
    for probs, label in zip(probabilities, labels):
        total = ops.add(total, sample_loss(probs, label, weights))
    return total


def predict_pair(
    original: FragmentGraph,
    revised: FragmentGraph,
    embeddings: EmbeddingTable,
    params: ModelParams,
    config: ModelConfig,
) -> Tensor:
    return compare_and_predict(
        encode(original, embeddings, params, config),
        encode(revised, embeddings, params, config),
        params,
        config,
    )


def save_checkpoint(path: str | Path, params: ModelParams, config: ModelConfig) -> None:
    """Write every parameter plus the config, so the checkpoint loads without a config file."""
    save_archive(path, params.arrays(), {"config": config.model_dump(mode="json")})


def load_checkpoint(path: str | Path) -> tuple[ModelParams, ModelConfig]:
    """Restore parameters and config; every tensor the config implies must be present."""
    arrays, metadata = load_archive(path)
    config = build_model_config(**metadata.get("config", {}))
    params = ModelParams.from_arrays(arrays, config.variant)
    for name, shape in parameter_shapes(config).items():
        if name not in params or params[name].shape != shape:
            raise ReviewDataError(f"checkpoint parameter {name!r} is missing or misshapen")
    logger.info("Loaded %s checkpoint with %d tensors", config.variant, len(arrays))
    return params, config
