"""Minimal reverse-mode autodiff over dense float64 numpy arrays.

The engine covers exactly the operation set the model needs: elementwise
arithmetic with broadcasting, 2-D matmul, reductions, masked softmax,
log-softmax, leaky rectifier, logistic, sqrt, clamp, row gather, column
slicing, and concatenation. Every op validates that its output is finite;
NaN or Inf anywhere is a hard error rather than a silent corruption.

Gradients flow through a tape built implicitly by op closures; calling
`backward` on a scalar seeds the reverse pass. `finite_diff` provides the
independent central-difference oracle used by the gradient checks, and
`adam_step` implements the bias-corrected Adam update.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NonFiniteError(ArithmeticError):
    """A computation produced NaN or Inf."""


def _check_finite(arr: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite values produced by {op}")
    return arr


class Tensor:
    """A float64 array plus the tape hooks for reverse-mode differentiation."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        _check_finite(self.data, "tensor construction")
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None
        self.name = name

    # -- constructors -------------------------------------------------------

    @classmethod
    def _from_op(cls, data, parents, backward, op: str) -> "Tensor":
        t = cls.__new__(cls)
        t.data = _check_finite(np.asarray(data, dtype=np.float64), op)
        t.grad = None
        t.requires_grad = any(p.requires_grad for p in parents)
        t._parents = tuple(parents) if t.requires_grad else ()
        t._backward = backward if t.requires_grad else None
        t.name = None
        return t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    # -- autodiff -----------------------------------------------------------

    def backward(self) -> None:
        """Reverse pass from this scalar; accumulates into `.grad` fields."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar objective")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad and node._parents == ():
                node.grad = g if node.grad is None else node.grad + g
            if node._backward is None:
                continue
            for parent, pg in node._backward(g):
                if not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg

    # -- operator sugar -----------------------------------------------------

    def __add__(self, other):
        return add(self, _wrap(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _wrap(other))

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __matmul__(self, other):
        return matmul(self, _wrap(other))

    def __neg__(self):
        return mul(self, _wrap(-1.0))

    def __repr__(self):
        tag = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag})"


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data
    return Tensor._from_op(out, (a, b), lambda g: (
        (a, _unbroadcast(g, a.data.shape)),
        (b, _unbroadcast(g, b.data.shape)),
    ), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.data - b.data
    return Tensor._from_op(out, (a, b), lambda g: (
        (a, _unbroadcast(g, a.data.shape)),
        (b, _unbroadcast(-g, b.data.shape)),
    ), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data
    return Tensor._from_op(out, (a, b), lambda g: (
        (a, _unbroadcast(g * b.data, a.data.shape)),
        (b, _unbroadcast(g * a.data, b.data.shape)),
    ), "mul")


def div(a: Tensor, b: Tensor) -> Tensor:
    out = a.data / b.data
    return Tensor._from_op(out, (a, b), lambda g: (
        (a, _unbroadcast(g / b.data, a.data.shape)),
        (b, _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape)),
    ), "div")


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.data.shape} @ {b.data.shape}")
    out = a.data @ b.data
    return Tensor._from_op(out, (a, b), lambda g: (
        (a, g @ b.data.T),
        (b, a.data.T @ g),
    ), "matmul")


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ValueError("transpose expects a 2-D tensor")
    return Tensor._from_op(a.data.T, (a,), lambda g: ((a, g.T),), "transpose")


# ---------------------------------------------------------------------------
# reductions


def sum_(a: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        gg = g
        if axis is not None and not keepdims:
            gg = np.expand_dims(gg, axis)
        return ((a, np.broadcast_to(gg, a.data.shape).copy()),)

    return Tensor._from_op(out, (a,), backward, "sum")


def mean(a: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(sum_(a, axis=axis, keepdims=keepdims), _wrap(1.0 / count))


# ---------------------------------------------------------------------------
# nonlinearities


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    out = np.where(a.data > 0, a.data, slope * a.data)
    return Tensor._from_op(out, (a,), lambda g: (
        (a, g * np.where(a.data > 0, 1.0, slope)),
    ), "leaky_relu")


def sigmoid(a: Tensor) -> Tensor:
    out = np.where(a.data >= 0, 1.0 / (1.0 + np.exp(-np.abs(a.data))),
                   np.exp(-np.abs(a.data)) / (1.0 + np.exp(-np.abs(a.data))))
    return Tensor._from_op(out, (a,), lambda g: (
        (a, g * out * (1.0 - out)),
    ), "sigmoid")


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return Tensor._from_op(out, (a,), lambda g: (
        (a, g * 0.5 / np.maximum(out, 1e-30)),
    ), "sqrt")


def clamp_min(a: Tensor, floor: float) -> Tensor:
    out = np.maximum(a.data, floor)
    return Tensor._from_op(out, (a,), lambda g: (
        (a, g * (a.data > floor).astype(np.float64)),
    ), "clamp_min")


def softmax_masked(logits: Tensor, mask: np.ndarray) -> Tensor:
    """Softmax along the last axis restricted to mask-true positions.

    Masked positions receive exactly zero probability; each row must keep
    at least one unmasked entry.
    """
    m = np.broadcast_to(np.asarray(mask, dtype=bool), logits.data.shape)
    if not m.any(axis=-1).all():
        raise ValueError("softmax row with every position masked")
    rowmax = np.max(np.where(m, logits.data, -np.inf), axis=-1, keepdims=True)
    shifted = np.where(m, logits.data - rowmax, -np.inf)
    e = np.exp(shifted)
    p = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        inner = (g * p).sum(axis=-1, keepdims=True)
        return ((logits, p * (g - inner)),)

    return Tensor._from_op(p, (logits,), backward, "softmax_masked")


def bce_with_logits(logits: Tensor, targets) -> Tensor:
    """Element-wise binary cross-entropy between logistic(logits) and targets,
    computed in the numerically stable log-sum-exp form."""
    t = np.asarray(targets, dtype=np.float64)
    x = logits.data
    out = np.maximum(x, 0.0) - x * t + np.log1p(np.exp(-np.abs(x)))
    sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                   np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def backward(g):
        return ((logits, g * (sig - t)),)

    return Tensor._from_op(out, (logits,), backward, "bce_with_logits")


def log_softmax(logits: Tensor) -> Tensor:
    """Log-probabilities along the last axis."""
    rowmax = logits.data.max(axis=-1, keepdims=True)
    shifted = logits.data - rowmax
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out = shifted - lse

    def backward(g):
        return ((logits, g - np.exp(out) * g.sum(axis=-1, keepdims=True)),)

    return Tensor._from_op(out, (logits,), backward, "log_softmax")


# ---------------------------------------------------------------------------
# structure ops


def gather_rows(table: Tensor, ids) -> Tensor:
    """Embedding lookup: rows of `table` selected by integer ids."""
    idx = np.asarray(ids, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("gather_rows expects a flat id list")
    if idx.size and (idx.min() < 0 or idx.max() >= table.data.shape[0]):
        raise IndexError(f"gather id out of range [0, {table.data.shape[0]})")
    out = table.data[idx]

    def backward(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        return ((table, gt),)

    return Tensor._from_op(out, (table,), backward, "gather_rows")


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    out = a.data[:, start:stop]

    def backward(g):
        ga = np.zeros_like(a.data)
        ga[:, start:stop] = g
        return ((a, ga),)

    return Tensor._from_op(out, (a,), backward, "slice_cols")


def concat(parts: list[Tensor], axis: int = 0) -> Tensor:
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        grads = []
        for p, s, e in zip(parts, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(s, e)
            grads.append((p, g[tuple(sl)]))
        return tuple(grads)

    return Tensor._from_op(out, tuple(parts), backward, "concat")


def layer_norm(x: Tensor, scale: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply the affine pair."""
    mu = mean(x, axis=-1, keepdims=True)
    centered = sub(x, mu)
    var = mean(mul(centered, centered), axis=-1, keepdims=True)
    inv = div(_wrap(1.0), sqrt(add(var, _wrap(eps))))
    return add(mul(mul(centered, inv), scale), bias)


# ---------------------------------------------------------------------------
# finite-difference oracle


def finite_diff(f, params: list[Tensor], h: float = 1e-5) -> list[np.ndarray]:
    """Central differences of the scalar `f()` w.r.t. each parameter entry.

    Mutates parameter data in place during probing and restores it exactly.
    """
    grads = []
    for p in params:
        g = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = float(f())
            flat[i] = orig - h
            f_minus = float(f())
            flat[i] = orig
            gflat[i] = (f_plus - f_minus) / (2.0 * h)
        grads.append(g)
    return grads


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    """Bias-corrected Adam moments, keyed like the parameter dict."""

    lr: float = 2e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict[str, Tensor], grads: dict[str, np.ndarray],
              state: AdamState) -> tuple[dict[str, Tensor], AdamState]:
    """One in-place Adam update over every named parameter with a gradient."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for parameter {name}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for name, g in grads.items():
        p = params[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        state.m[name] = b1 * state.m[name] + (1 - b1) * g
        state.v[name] = b2 * state.v[name] + (1 - b2) * g * g
        mhat = state.m[name] / (1 - b1 ** state.t)
        vhat = state.v[name] / (1 - b2 ** state.t)
        p.data = p.data - state.lr * mhat / (np.sqrt(vhat) + state.eps)
    return params, state


def zero_grads(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None
