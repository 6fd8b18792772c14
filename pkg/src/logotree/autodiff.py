"""Minimal dense-tensor engine with reverse-mode differentiation.

Deliberately small: float64 numpy storage, an explicit tape of executed
primitives, and only the operations the encoders need (matmul, add, mul,
sigmoid, tanh, log, softmax, concat, slicing, gather, sum, max). When no
tape is active all operations run untracked, which is the evaluation path.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractError, NumericsError, ShapeError

_DEFAULT_DTYPE = np.dtype(np.float64)

#: Debug switch: verify every primitive output is finite.
CHECK_FINITE = False


def set_default_dtype(dtype) -> None:
    """Select float64 (default) or float32 storage for new tensors."""
    global _DEFAULT_DTYPE
    dt = np.dtype(dtype)
    if dt not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ContractError(f"unsupported dtype {dt}")
    _DEFAULT_DTYPE = dt


class Tensor:
    """Dense row-major array plus the gradient accumulated by a reverse pass."""

    __slots__ = ("data", "grad", "name")

    def __init__(self, data, name: str | None = None):
        self.data = np.asarray(data, dtype=_DEFAULT_DTYPE)
        self.grad = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.data.shape})"

    # -- operator sugar over the primitives below ------------------------
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def max(self, axis):
        return tmax(self, axis)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self):
        return transpose(self)

    @property
    def T(self):
        return transpose(self)


class Tape:
    """Ordered record of executed primitives.

    The record is appended in execution order, which is a topological order
    of the computation graph, so the reverse pass is a single reversed scan.
    """

    def __init__(self):
        self._entries: list = []  # (out, parents, backward_fn)

    def __enter__(self):
        _TAPES.append(self)
        return self

    def __exit__(self, *exc):
        popped = _TAPES.pop()
        assert popped is self
        return False

    def __len__(self):
        return len(self._entries)

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(t) into ``t.grad`` for every tensor on the tape.

        Gradients add across multiple uses of a tensor; tensors not on any
        path to ``loss`` keep ``grad is None`` (read as zero).
        """
        if loss.data.size != 1:
            raise ContractError(f"loss must be scalar, got shape {loss.data.shape}")
        loss.grad = np.ones_like(loss.data)
        for out, parents, backward_fn in reversed(self._entries):
            g = out.grad
            if g is None:
                continue
            for parent, pg in zip(parents, backward_fn(g)):
                if pg is None:
                    continue
                if parent.grad is None:
                    # never alias: later accumulations build fresh arrays
                    parent.grad = pg if pg.base is None and pg is not g else pg.copy()
                else:
                    parent.grad = parent.grad + pg


_TAPES: list[Tape] = []


def _record(out: Tensor, parents, backward_fn) -> Tensor:
    if CHECK_FINITE and not np.all(np.isfinite(out.data)):
        raise NumericsError("non-finite value produced")
    if _TAPES:
        _TAPES[-1]._entries.append((out, parents, backward_fn))
    return out


def zero_grads(params) -> None:
    for p in params:
        p.grad = None


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum-reduce a broadcast gradient back to the operand's shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = Tensor(a.data + b.data)
    except ValueError:
        raise ShapeError(f"add: shapes {a.data.shape} and {b.data.shape}") from None
    return _record(out, (a, b), lambda g: (_unbroadcast(g, a.data.shape),
                                           _unbroadcast(g, b.data.shape)))


def sub(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = Tensor(a.data - b.data)
    except ValueError:
        raise ShapeError(f"sub: shapes {a.data.shape} and {b.data.shape}") from None
    return _record(out, (a, b), lambda g: (_unbroadcast(g, a.data.shape),
                                           _unbroadcast(-g, b.data.shape)))


def mul(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = Tensor(a.data * b.data)
    except ValueError:
        raise ShapeError(f"mul: shapes {a.data.shape} and {b.data.shape}") from None
    return _record(out, (a, b), lambda g: (_unbroadcast(g * b.data, a.data.shape),
                                           _unbroadcast(g * a.data, b.data.shape)))


def scale(a: Tensor, s: float) -> Tensor:
    out = Tensor(a.data * s)
    return _record(out, (a,), lambda g: (g * s,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError(f"matmul: operands must be >=2-D, got {a.data.shape} "
                         f"and {b.data.shape}")
    try:
        out = Tensor(np.matmul(a.data, b.data))
    except ValueError:
        raise ShapeError(f"matmul: shapes {a.data.shape} and {b.data.shape}") from None

    def backward(g):
        ad, bd = a.data, b.data
        ga = np.matmul(g, np.swapaxes(bd, -1, -2))
        gb = np.matmul(np.swapaxes(ad, -1, -2), g)
        return _unbroadcast(ga, ad.shape), _unbroadcast(gb, bd.shape)

    return _record(out, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim < 2:
        raise ShapeError(f"transpose: need >=2 dims, got {a.data.shape}")
    out = Tensor(np.swapaxes(a.data, -1, -2).copy())
    return _record(out, (a,), lambda g: (np.swapaxes(g, -1, -2),))


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    out_data = np.empty_like(x)
    pos = x >= 0
    out_data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out_data[~pos] = ex / (1.0 + ex)
    out = Tensor(out_data)
    return _record(out, (a,), lambda g: (g * out.data * (1.0 - out.data),))


def tanh(a: Tensor) -> Tensor:
    out = Tensor(np.tanh(a.data))
    return _record(out, (a,), lambda g: (g * (1.0 - out.data * out.data),))


def log(a: Tensor) -> Tensor:
    out = Tensor(np.log(a.data))
    return _record(out, (a,), lambda g: (g / a.data,))


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis; rows sum to 1."""
    z = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(p)

    def backward(g):
        dot = (g * p).sum(axis=-1, keepdims=True)
        return (p * (g - dot),)

    return _record(out, (a,), backward)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = list(tensors)
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]
    return _record(out, tuple(tensors),
                   lambda g: tuple(np.split(g, splits, axis=axis)))


def rows(a: Tensor, idx) -> Tensor:
    """Gather rows ``a[idx]`` along axis 0 (embedding lookup)."""
    idx = np.asarray(idx, dtype=np.intp)
    out = Tensor(a.data[idx])

    def backward(g):
        ga = np.zeros_like(a.data)
        np.add.at(ga, idx, g)
        return (ga,)

    return _record(out, (a,), backward)


def narrow(a: Tensor, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice ``[start, start+length)`` along one axis."""
    if start < 0 or start + length > a.data.shape[axis]:
        raise ShapeError(f"narrow: [{start},{start + length}) outside axis of "
                         f"size {a.data.shape[axis]}")
    index = [slice(None)] * a.data.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    out = Tensor(a.data[index].copy())

    def backward(g):
        ga = np.zeros_like(a.data)
        ga[index] = g
        return (ga,)

    return _record(out, (a,), backward)


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape))
    return _record(out, (a,), lambda g: (g.reshape(a.data.shape),))


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims))

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        ge = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(ge, a.data.shape).copy(),)

    return _record(out, (a,), backward)


def tmax(a: Tensor, axis: int) -> Tensor:
    """Max-reduce along one axis; gradient routes to the (first) argmax."""
    out = Tensor(a.data.max(axis=axis))
    arg = a.data.argmax(axis=axis)

    def backward(g):
        ga = np.zeros_like(a.data)
        np.put_along_axis(ga, np.expand_dims(arg, axis),
                          np.expand_dims(g, axis), axis=axis)
        return (ga,)

    return _record(out, (a,), backward)


def mean(a: Tensor) -> Tensor:
    return scale(tsum(a), 1.0 / a.data.size)


# ---------------------------------------------------------------------------
# dropout
# ---------------------------------------------------------------------------

def dropout_mask(shape, rate: float, rng: np.random.Generator,
                 training: bool = True) -> Tensor:
    """Inverted-dropout mask: 0 with probability ``rate``, else 1/(1-rate).

    In evaluation mode (or at rate 0) the mask is all ones, so the
    evaluation path is scale-free.
    """
    if not 0.0 <= rate < 1.0:
        raise ContractError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return Tensor(np.ones(shape))
    keep = rng.random(shape) >= rate
    return Tensor(keep / (1.0 - rate))


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

class Adam:
    """Adam with bias correction.

    Moment tensors are keyed by parameter name and match parameter shapes.
    ``sparse_rows`` restricts a named parameter's update (moments included)
    to the given rows, the lazy variant used for large embedding tables.
    """

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, Tensor],
             sparse_rows: dict[str, np.ndarray] | None = None) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, p in params.items():
            g = p.grad
            if g is None:
                continue
            if g.shape != p.data.shape:
                raise ShapeError(f"adam: grad {g.shape} vs param {p.data.shape}"
                                 f" for {name!r}")
            if name not in self.m:
                self.m[name] = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)
            m, v = self.m[name], self.v[name]
            if sparse_rows is not None and name in sparse_rows:
                r = np.asarray(sparse_rows[name], dtype=np.intp)
                m[r] = self.beta1 * m[r] + (1 - self.beta1) * g[r]
                v[r] = self.beta2 * v[r] + (1 - self.beta2) * g[r] ** 2
                p.data[r] -= self.lr * (m[r] / c1) / (np.sqrt(v[r] / c2) + self.eps)
            else:
                m *= self.beta1
                m += (1 - self.beta1) * g
                v *= self.beta2
                v += (1 - self.beta2) * g ** 2
                p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def clip_global_norm(params, max_norm: float) -> float:
    """Scale all gradients so the global L2 norm is at most ``max_norm``."""
    total = 0.0
    grads = [p.grad for p in params if p.grad is not None]
    for g in grads:
        total += float((g * g).sum())
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0:
        s = max_norm / norm
        for g in grads:
            g *= s
    return norm


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------

def check_gradient(f, x: Tensor, eps: float = 1e-5) -> float:
    """Compare the tape gradient of scalar ``f(x)`` against central differences.

    Returns max over coordinates of |g_ad - g_fd| / max(1, |g_ad|, |g_fd|).
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ContractError(f"eps must be in [1e-7, 1e-3], got {eps}")
    tp = Tape()
    with tp:
        out = f(x)
    if out.data.size != 1:
        raise ContractError("f must be scalar-valued")
    x.grad = None
    tp.backward(out)
    g_ad = np.zeros_like(x.data) if x.grad is None else x.grad.copy()

    g_fd = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    fd = g_fd.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(f(x).data)
        flat[i] = orig - eps
        lo = float(f(x).data)
        flat[i] = orig
        fd[i] = (hi - lo) / (2.0 * eps)

    denom = np.maximum(1.0, np.maximum(np.abs(g_ad), np.abs(g_fd)))
    return float(np.max(np.abs(g_ad - g_fd) / denom)) if flat.size else 0.0
