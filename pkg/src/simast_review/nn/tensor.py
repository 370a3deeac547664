"""Dense float64 tensors with reverse-mode gradients.

Every operation records its inputs and a closure mapping the upstream gradient to one
gradient per input. :func:`backward` accumulates into leaf tensors; :func:`gradients`
returns gradients without touching any tensor, so several graphs that share parameters
can be differentiated concurrently.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.special import expit

from simast_review.errors import NumericError, ShapeError


Array = npt.NDArray[np.float64]
GradFn = Callable[[Array], tuple[Array | None, ...]]


class Tensor:
    """A float64 array that may take part in gradient computation."""

    __slots__ = ("_backward", "_parents", "data", "grad", "name", "requires_grad")

    def __init__(self, data: Any, requires_grad: bool = False, name: str | None = None) -> None:
        self.data: Array = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Array | None = None
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: GradFn | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other: Tensor | float) -> Tensor:
        return add(self, as_tensor(other))

    def __sub__(self, other: Tensor | float) -> Tensor:
        return sub(self, as_tensor(other))

    def __mul__(self, other: Tensor | float) -> Tensor:
        return mul(self, as_tensor(other))

    def __matmul__(self, other: Tensor) -> Tensor:
        return matmul(self, other)

    def __neg__(self) -> Tensor:
        return scale(self, -1.0)

    def __getitem__(self, key: Any) -> Tensor:
        return slice_tensor(self, key)


def as_tensor(value: Tensor | Any) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def make_result(op: str, data: Array, parents: Sequence[Tensor], grad_fn: GradFn) -> Tensor:
    """Wrap an op result, checking finiteness and wiring the graph when needed."""
    if not np.all(np.isfinite(data)):
        raise NumericError(f"{op} produced non-finite values")
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    out.requires_grad = any(parent.requires_grad for parent in parents)
    if out.requires_grad:
        out._parents = tuple(parents)
        out._backward = grad_fn
    else:
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return tuple(np.broadcast_shapes(a.shape, b.shape))
    except ValueError as exc:
        raise ShapeError(f"{op}: cannot combine shapes {a.shape} and {b.shape}") from exc


# arithmetic


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("add", a, b)
    return make_result(
        "add",
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("sub", a, b)
    return make_result(
        "sub",
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("mul", a, b)
    return make_result(
        "mul",
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def scale(a: Tensor, factor: float) -> Tensor:
    return make_result("scale", a.data * factor, (a,), lambda g: (g * factor,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply shapes {a.shape} and {b.shape}")
    return make_result(
        "matmul",
        a.data @ b.data,
        (a, b),
        lambda g: (g @ b.data.T, a.data.T @ g),
    )


def propagate(matrix: Array | sparse.spmatrix, x: Tensor) -> Tensor:
    """Left-multiply ``x`` by a constant dense or sparse matrix."""
    if matrix.shape[1] != x.shape[0]:
        raise ShapeError(f"propagate: cannot multiply shapes {matrix.shape} and {x.shape}")
    transposed = matrix.T
    return make_result(
        "propagate",
        np.asarray(matrix @ x.data, dtype=np.float64),
        (x,),
        lambda g: (np.asarray(transposed @ g, dtype=np.float64),),
    )


# structure


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        shapes = " and ".join(str(t.shape) for t in tensors)
        raise ShapeError(f"concat: cannot join shapes {shapes}") from exc
    bounds = np.cumsum([t.data.shape[axis] for t in tensors])[:-1]
    return make_result(
        "concat",
        data,
        tuple(tensors),
        lambda g: tuple(np.split(g, bounds, axis=axis)),
    )


def slice_tensor(a: Tensor, key: Any) -> Tensor:
    """Basic (view) indexing, e.g. ``x[0]`` or ``x[:, 1:3]``."""

    def grad_fn(g: Array) -> tuple[Array]:
        full = np.zeros_like(a.data)
        full[key] = g
        return (full,)

    return make_result("slice", np.array(a.data[key], dtype=np.float64), (a,), grad_fn)


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError(f"transpose expects a matrix, got shape {a.shape}")
    return make_result("transpose", a.data.T.copy(), (a,), lambda g: (g.T,))


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        data = a.data.reshape(shape)
    except ValueError as exc:
        raise ShapeError(f"reshape: cannot view {a.shape} as {shape}") from exc
    return make_result("reshape", data.copy(), (a,), lambda g: (g.reshape(a.shape),))


# reductions


def sum_(a: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    def grad_fn(g: Array) -> tuple[Array]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    data = np.asarray(a.data.sum(axis=axis, keepdims=keepdims), dtype=np.float64)
    return make_result("sum", data, (a,), grad_fn)


def mean(a: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.shape[axis]
    return scale(sum_(a, axis=axis, keepdims=keepdims), 1.0 / count)


def l2_norm_squared(a: Tensor) -> Tensor:
    return make_result(
        "l2_norm_squared",
        np.asarray(np.sum(a.data * a.data), dtype=np.float64),
        (a,),
        lambda g: (2.0 * a.data * g,),
    )


# nonlinearities


def sigmoid(a: Tensor) -> Tensor:
    out = expit(a.data)
    return make_result("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return make_result("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def leaky_relu(a: Tensor, slope: float = 0.01) -> Tensor:
    positive = a.data > 0
    return make_result(
        "leaky_relu",
        np.where(positive, a.data, slope * a.data),
        (a,),
        lambda g: (np.where(positive, g, slope * g),),
    )


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis."""
    shifted = np.exp(a.data - a.data.max(axis=-1, keepdims=True))
    out = shifted / shifted.sum(axis=-1, keepdims=True)

    def grad_fn(g: Array) -> tuple[Array]:
        return (out * (g - np.sum(g * out, axis=-1, keepdims=True)),)

    return make_result("softmax", out, (a,), grad_fn)


def log(a: Tensor, floor: float = 0.0) -> Tensor:
    """Natural log of ``max(a, floor)``; no gradient flows through clamped entries."""
    clamped = a.data <= floor
    safe = np.where(clamped, floor, a.data)
    if floor <= 0.0 and np.any(safe <= 0.0):
        raise NumericError("log of a non-positive value")

    def grad_fn(g: Array) -> tuple[Array]:
        return (np.where(clamped, 0.0, g / safe),)

    return make_result("log", np.log(safe), (a,), grad_fn)


# differentiation


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        stack.extend(
            (parent, False)
            for parent in node._parents
            if parent.requires_grad and id(parent) not in visited
        )
    return order


def _propagate_gradients(loss: Tensor) -> tuple[list[Tensor], dict[int, Array]]:
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    order = _topological_order(loss)
    grads: dict[int, Array] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        grad = grads.get(id(node))
        if grad is None or node._backward is None:
            continue
        for parent, parent_grad in zip(node._parents, node._backward(grad)):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad
    return order, grads


def gradients(loss: Tensor, wrt: Sequence[Tensor]) -> list[Array | None]:
    """d loss / d t for every ``t`` in ``wrt`` (``None`` when ``t`` is unreachable)."""
    if not loss.requires_grad:
        return [None for _ in wrt]
    _, grads = _propagate_gradients(loss)
    return [grads.get(id(t)) for t in wrt]


def backward(loss: Tensor) -> None:
    """Accumulate d loss / d leaf into ``leaf.grad`` for every reachable leaf."""
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    order, grads = _propagate_gradients(loss)
    for node in order:
        if not node.is_leaf:
            continue
        grad = grads.get(id(node))
        if grad is None:
            continue
        grad = grad.reshape(node.shape)
        node.grad = grad.copy() if node.grad is None else node.grad + grad
