"""Reverse-mode differentiation tape and the tensor type recorded on it.

Operations on tensors that require gradients are appended to a ``Tape`` in
execution order. ``Tape.backward`` walks that list once in reverse, so every
node is visited exactly once and always after all of its consumers.

Recording happens on the tape the operands already live on, or on the tape
activated with ``with Tape():`` when all operands are leaves. Outside of any
tape, or inside ``no_grad()``, operations produce plain constant tensors.
"""
from __future__ import annotations

import contextvars
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from dstlab.exceptions import ContractError, DimensionError

ArrayLike = Union[np.ndarray, float, int, Sequence]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_active_tape: contextvars.ContextVar[Optional["Tape"]] = contextvars.ContextVar(
    "dstlab_active_tape", default=None)
_grad_enabled: contextvars.ContextVar[bool] = contextvars.ContextVar(
    "dstlab_grad_enabled", default=True)


class Tensor:
    """Dense f64 array that can take part in reverse-mode differentiation."""

    def __init__(self, data: ArrayLike, requires_grad: bool = False,
                 name: Optional[str] = None, copy: bool = True):
        if copy:
            self.data = np.array(data, dtype=np.float64)
        else:
            self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._tape: Optional[Tape] = None
        self._node_index: Optional[int] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._tape is None

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        """Constant view of the same values, cut from any tape."""
        return Tensor(self.data, copy=False)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def sum(self) -> "Tensor":
        return tensor_sum(self)

    def mean(self) -> "Tensor":
        return tensor_mean(self)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


class Parameter(Tensor):
    """Trainable leaf tensor."""

    def __init__(self, data: ArrayLike, name: Optional[str] = None):
        super().__init__(data, requires_grad=True, name=name)


@dataclass
class _Node:
    out: Tensor
    parents: Tuple[Tensor, ...]
    backward: BackwardFn


class Tape:
    """Ordered record of differentiable operations."""

    def __init__(self):
        self.nodes: List[_Node] = []
        self._tokens: List[contextvars.Token] = []

    def __enter__(self) -> "Tape":
        self._tokens.append(_active_tape.set(self))
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _active_tape.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.nodes)

    def _append(self, out: Tensor, parents: Sequence[Tensor], fn: BackwardFn) -> None:
        out._tape = self
        out._node_index = len(self.nodes)
        self.nodes.append(_Node(out, tuple(parents), fn))

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into every reachable leaf's ``grad``.

        Intermediate tensors get their gradient for this call assigned (not
        accumulated); leaves accumulate across calls until ``zero_grad``.
        """
        if loss.data.size != 1:
            raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
        if loss._tape is not self:
            raise ContractError("loss was not recorded on this tape")

        pending = {loss._node_index: np.ones_like(loss.data)}
        leaf_grads = {}
        for index in range(loss._node_index, -1, -1):
            upstream = pending.pop(index, None)
            if upstream is None:
                continue
            node = self.nodes[index]
            node.out.grad = upstream
            for parent, grad in zip(node.parents, node.backward(upstream)):
                if grad is None or not parent.requires_grad:
                    continue
                if parent._tape is self:
                    previous = pending.get(parent._node_index)
                    pending[parent._node_index] = grad if previous is None else previous + grad
                else:
                    key = id(parent)
                    if key in leaf_grads:
                        leaf_grads[key] = (parent, leaf_grads[key][1] + grad)
                    else:
                        leaf_grads[key] = (parent, grad)

        for parent, grad in leaf_grads.values():
            if parent.grad is None:
                parent.grad = np.array(grad, dtype=np.float64)
            else:
                parent.grad = parent.grad + grad


def backward(loss: Tensor) -> None:
    """Run reverse-mode differentiation from a scalar loss."""
    if loss._tape is None:
        raise ContractError("loss is not on a tape; build it inside `with Tape():`")
    loss._tape.backward(loss)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable recording; everything computed inside is a constant."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def grad_enabled() -> bool:
    return _grad_enabled.get()


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, copy=False)


def _resolve_tape(parents: Sequence[Tensor]) -> Optional[Tape]:
    active = _active_tape.get()
    owner = None
    for parent in parents:
        if parent._tape is None:
            continue
        if owner is not None and parent._tape is not owner:
            raise ContractError("operands were recorded on different tapes")
        owner = parent._tape
    if owner is not None and active is not None and active is not owner:
        raise ContractError("operand belongs to a tape other than the active one")
    return owner if owner is not None else active


def record(data: np.ndarray, parents: Sequence[Tensor], fn: BackwardFn) -> Tensor:
    """Wrap ``data`` as the output of an operation and put it on a tape."""
    out = Tensor(data, copy=False)
    if not _grad_enabled.get():
        return out
    if not any(parent.requires_grad for parent in parents):
        return out
    tape = _resolve_tape(parents)
    if tape is None:
        return out
    out.requires_grad = True
    tape._append(out, parents, fn)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def _backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return record(a.data + b.data, (a, b), _backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def _backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return record(a.data - b.data, (a, b), _backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def _backward(grad):
        return _unbroadcast(grad * b.data, a.shape), _unbroadcast(grad * a.data, b.shape)

    return record(a.data * b.data, (a, b), _backward)


def neg(a) -> Tensor:
    a = as_tensor(a)
    return record(-a.data, (a,), lambda grad: (-grad,))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise DimensionError(f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")

    def _backward(grad):
        return grad @ b.data.T, a.data.T @ grad

    return record(a.data @ b.data, (a, b), _backward)


def tensor_sum(a) -> Tensor:
    a = as_tensor(a)

    def _backward(grad):
        return (np.broadcast_to(grad, a.shape).copy(),)

    return record(np.array(a.data.sum()), (a,), _backward)


def tensor_mean(a) -> Tensor:
    a = as_tensor(a)
    count = a.data.size

    def _backward(grad):
        return (np.broadcast_to(grad / count, a.shape).copy(),)

    return record(np.array(a.data.mean()), (a,), _backward)
