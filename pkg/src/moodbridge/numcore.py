"""Minimal dense numerical core.

Plain float64 numpy arrays throughout: a "matrix" is a 2-D C-ordered
ndarray, a "vector" is 1-D. MLPs are explicit weight/bias lists with ReLU
on hidden layers and identity output; forward, backward and the Adam update
are written out by hand so gradients stay inspectable and checkable against
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError


def as_vector(values, name="vector"):
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"{name}: expected 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NumericError(f"{name}: contains NaN or Inf")
    return v


def as_matrix(values, name="matrix"):
    """Coerce to a finite 2-D row-major float64 array."""
    m = np.ascontiguousarray(values, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name}: expected 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{name}: contains NaN or Inf")
    return m


def check_finite(arr, context):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{context}: produced NaN or Inf")
    return arr


@dataclass
class MLPParams:
    """Weights and biases of a fully-connected net.

    weights[k] has shape (out_k, in_k), biases[k] shape (out_k,). Hidden
    layers use ReLU, the final layer is identity. Adjacent layers must
    chain: out_k == in_{k+1}.
    """

    weights: list
    biases: list

    def __post_init__(self):
        if len(self.weights) == 0:
            raise ShapeError("MLP needs at least one layer")
        if len(self.weights) != len(self.biases):
            raise ShapeError(
                f"{len(self.weights)} weight matrices vs {len(self.biases)} biases"
            )
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[k] = as_matrix(w, f"layer {k} weight")
            self.biases[k] = as_vector(b, f"layer {k} bias")
            if self.weights[k].shape[0] != self.biases[k].shape[0]:
                raise ShapeError(
                    f"layer {k}: weight rows {self.weights[k].shape[0]} "
                    f"!= bias length {self.biases[k].shape[0]}"
                )
            if k > 0 and self.weights[k].shape[1] != self.weights[k - 1].shape[0]:
                raise ShapeError(
                    f"layer {k}: input dim {self.weights[k].shape[1]} does not "
                    f"chain from layer {k - 1} output {self.weights[k - 1].shape[0]}"
                )

    @property
    def in_dim(self):
        return self.weights[0].shape[1]

    @property
    def out_dim(self):
        return self.weights[-1].shape[0]

    @property
    def n_layers(self):
        return len(self.weights)

    def copy(self):
        return MLPParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class MLPGrads:
    """Per-tensor gradients, shaped exactly like the MLPParams they belong to."""

    weights: list
    biases: list

    @classmethod
    def zeros_like(cls, params):
        return cls(
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
        )

    def add_(self, other):
        for w, ow in zip(self.weights, other.weights):
            w += ow
        for b, ob in zip(self.biases, other.biases):
            b += ob
        return self

    def scale_(self, factor):
        for w in self.weights:
            w *= factor
        for b in self.biases:
            b *= factor
        return self


def init_mlp(dims, rng):
    """Fresh MLP for layer sizes dims = (in, h1, ..., out).

    Weights ~ uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)), biases
    zero. rng is a numpy Generator so initialization is reproducible.
    """
    if len(dims) < 2:
        raise ShapeError("need at least (in, out) dims")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-a, a, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MLPParams(weights, biases)


@dataclass
class ForwardCache:
    """Activations retained by mlp_forward for the matching backward pass.

    inputs[k] is what layer k consumed (post-ReLU of the previous layer),
    pre_acts[k] is W_k @ inputs[k] + b_k before any activation.
    """

    inputs: list
    pre_acts: list
    layer_shapes: tuple


def _shapes(params):
    return tuple(w.shape for w in params.weights)


def mlp_forward(params, x):
    """Forward pass on a single input vector.

    Returns (output, cache). ReLU after every layer except the last.
    """
    x = as_vector(x, "input")
    if x.shape[0] != params.in_dim:
        raise ShapeError(
            f"layer 0: input length {x.shape[0]} != expected {params.in_dim}"
        )
    inputs, pre_acts = [], []
    h = x
    last = params.n_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        z = w @ h + b
        pre_acts.append(z)
        h = z if k == last else np.maximum(z, 0.0)
    check_finite(h, "mlp_forward output")
    return h, ForwardCache(inputs, pre_acts, _shapes(params))


def mlp_forward_batch(params, X):
    """Forward pass on a batch, rows of X are inputs. Same math as mlp_forward."""
    X = as_matrix(X, "input batch")
    if X.shape[1] != params.in_dim:
        raise ShapeError(
            f"layer 0: input width {X.shape[1]} != expected {params.in_dim}"
        )
    inputs, pre_acts = [], []
    H = X
    last = params.n_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(H)
        Z = H @ w.T + b
        pre_acts.append(Z)
        H = Z if k == last else np.maximum(Z, 0.0)
    check_finite(H, "mlp_forward_batch output")
    return H, ForwardCache(inputs, pre_acts, _shapes(params))


def mlp_backward(params, cache, grad_output):
    """Backprop a single-vector forward pass.

    grad_output is dLoss/dOutput; returns MLPGrads with dLoss/dW, dLoss/db
    for every layer.
    """
    if cache.layer_shapes != _shapes(params):
        raise ShapeError("cache does not match params (stale or from another net)")
    g = as_vector(grad_output, "grad_output")
    if g.shape[0] != params.out_dim:
        raise ShapeError(
            f"grad_output length {g.shape[0]} != output dim {params.out_dim}"
        )
    d_weights = [None] * params.n_layers
    d_biases = [None] * params.n_layers
    last = params.n_layers - 1
    for k in range(last, -1, -1):
        if k != last:
            g = g * (cache.pre_acts[k] > 0.0)
        d_weights[k] = np.outer(g, cache.inputs[k])
        d_biases[k] = g.copy()
        if k > 0:
            g = params.weights[k].T @ g
    return MLPGrads(d_weights, d_biases)


def mlp_backward_batch(params, cache, grad_output):
    """Batch backprop; parameter gradients are summed over rows.

    Returns (grads, input_grad) so stacked nets can keep propagating.
    """
    if cache.layer_shapes != _shapes(params):
        raise ShapeError("cache does not match params (stale or from another net)")
    G = as_matrix(grad_output, "grad_output batch")
    if G.shape[1] != params.out_dim:
        raise ShapeError(
            f"grad_output width {G.shape[1]} != output dim {params.out_dim}"
        )
    d_weights = [None] * params.n_layers
    d_biases = [None] * params.n_layers
    last = params.n_layers - 1
    for k in range(last, -1, -1):
        if k != last:
            G = G * (cache.pre_acts[k] > 0.0)
        d_weights[k] = G.T @ cache.inputs[k]
        d_biases[k] = G.sum(axis=0)
        G = G @ params.weights[k]
    return MLPGrads(d_weights, d_biases), G


@dataclass
class AdamState:
    """First/second moment accumulators for one MLP, plus hyperparameters."""

    step: int
    m: MLPGrads
    v: MLPGrads
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr < 0:
            raise NumericError(f"learning rate must be >= 0, got {lr}")
        return cls(
            step=0,
            m=MLPGrads.zeros_like(params),
            v=MLPGrads.zeros_like(params),
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def _adam_update(p, g, m, v, state, t):
    m_new = state.beta1 * m + (1.0 - state.beta1) * g
    v_new = state.beta2 * v + (1.0 - state.beta2) * g * g
    m_hat = m_new / (1.0 - state.beta1**t)
    v_hat = v_new / (1.0 - state.beta2**t)
    p_new = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return p_new, m_new, v_new


def adam_step(params, grads, state):
    """One Adam update with bias-corrected moments.

    Pure: returns (new_params, new_state), inputs are left untouched.
    The step counter increments before bias correction, so the first call
    corrects with t = 1.
    """
    if _shapes(params) != tuple(w.shape for w in grads.weights):
        raise ShapeError("gradient shapes do not match params")
    t = state.step + 1
    new_w, new_b = [], []
    m_w, m_b, v_w, v_b = [], [], [], []
    for k in range(params.n_layers):
        p, m, v = _adam_update(
            params.weights[k], grads.weights[k], state.m.weights[k],
            state.v.weights[k], state, t,
        )
        new_w.append(check_finite(p, f"adam_step layer {k} weight"))
        m_w.append(m)
        v_w.append(v)
        p, m, v = _adam_update(
            params.biases[k], grads.biases[k], state.m.biases[k],
            state.v.biases[k], state, t,
        )
        new_b.append(check_finite(p, f"adam_step layer {k} bias"))
        m_b.append(m)
        v_b.append(v)
    new_state = AdamState(
        step=t,
        m=MLPGrads(m_w, m_b),
        v=MLPGrads(v_w, v_b),
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
    )
    return MLPParams(new_w, new_b), new_state


def cosine_distance(u, v):
    """1 - cos(u, v), in [0, 2]. Zero-norm inputs are an error, never 0."""
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericError("cosine_distance: zero-norm input")
    d = 1.0 - float(np.dot(u, v)) / (nu * nv)
    # dot product rounding can push the value a hair outside [0, 2]
    return float(min(max(d, 0.0), 2.0))


def euclidean_distance(u, v):
    """l2 norm of u - v."""
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(np.linalg.norm(u - v))


def finite_difference(f, x, h=1e-5):
    """Central finite-difference gradient of scalar f at x (both 1-D)."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (f(xp) - f(xm)) / (2.0 * h)
    return grad


def max_relative_error(a, b, floor=1e-6):
    """Worst-case elementwise relative disagreement between two arrays.

    The floor keeps central-difference roundoff noise (~1e-11 absolute at
    h = 1e-5) from registering as error on near-zero components.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def flatten_params(params):
    """All parameters as one flat vector (weights then bias per layer)."""
    parts = []
    for w, b in zip(params.weights, params.biases):
        parts.append(w.ravel())
        parts.append(b.ravel())
    return np.concatenate(parts)


def unflatten_params(flat, like):
    """Inverse of flatten_params for an MLP shaped like `like`."""
    flat = np.asarray(flat, dtype=np.float64)
    weights, biases = [], []
    off = 0
    for w, b in zip(like.weights, like.biases):
        weights.append(flat[off:off + w.size].reshape(w.shape).copy())
        off += w.size
        biases.append(flat[off:off + b.size].copy())
        off += b.size
    if off != flat.size:
        raise ShapeError(f"flat vector has {flat.size} entries, expected {off}")
    return MLPParams(weights, biases)


def flatten_grads(grads):
    parts = []
    for w, b in zip(grads.weights, grads.biases):
        parts.append(w.ravel())
        parts.append(b.ravel())
    return np.concatenate(parts)
