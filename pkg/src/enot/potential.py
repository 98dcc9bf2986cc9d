"""Scalar MLP potential with hand-written reverse-mode derivatives.

Layout of a net with ``H`` hidden layers of width ``m`` on inputs of size ``d``::

    h_1     = sigmoid(W_0 x + b_0)                      (d -> m, no skip)
    h_{k+1} = sigmoid(W_k h_k + b_k) [+ h_k]            (m -> m, residual if skip)
    phi(x)  = w_out . [h_H, x] + b_out                  (x appended if skip)

With ``hidden_layers == 0`` the net is the affine map ``w_out . x + b_out``.
Everything is float64 and batched over rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit


class DimensionError(ValueError):
    pass


class NonFiniteError(ArithmeticError):
    """Raised when a potential, gradient or parameter stops being finite."""


@dataclass
class PotentialNet:
    input_dim: int
    hidden_layers: int
    hidden_width: int
    skip_connections: bool = True
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.input_dim < 1 or self.hidden_width < 1 or self.hidden_layers < 0:
            raise ValueError(
                f"bad net shape: input_dim={self.input_dim}, "
                f"hidden_layers={self.hidden_layers}, hidden_width={self.hidden_width}"
            )
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        shapes = self.layer_shapes()
        if not self.weights:
            self.weights = [np.zeros(s) for s, _ in shapes]
            self.biases = [np.zeros(n) for _, n in shapes]
        if len(self.weights) != len(shapes) or len(self.biases) != len(shapes):
            raise ValueError(f"expected {len(shapes)} layers, got {len(self.weights)}")
        for k, ((wshape, bsize), w, b) in enumerate(zip(shapes, self.weights, self.biases)):
            if w.shape != wshape or b.shape != (bsize,):
                raise ValueError(
                    f"layer {k}: expected w{wshape} b({bsize},), got w{w.shape} b{b.shape}"
                )

    def layer_shapes(self) -> list[tuple[tuple[int, int], int]]:
        d, m, H = self.input_dim, self.hidden_width, self.hidden_layers
        if H == 0:
            return [((1, d), 1)]
        shapes = [((m, d), m)] + [((m, m), m)] * (H - 1)
        out_in = m + d if self.skip_connections else m
        return shapes + [((1, out_in), 1)]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> PotentialNet:
        return PotentialNet(
            self.input_dim,
            self.hidden_layers,
            self.hidden_width,
            self.skip_connections,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def get_flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for w, b in zip(self.weights, self.biases) for a in (w, b)])

    def set_flat(self, theta: np.ndarray) -> None:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n_params,):
            raise DimensionError(f"expected {self.n_params} parameters, got {theta.shape}")
        i = 0
        for k in range(len(self.weights)):
            for arr in (self.weights[k], self.biases[k]):
                arr[...] = theta[i : i + arr.size].reshape(arr.shape)
                i += arr.size

    def all_finite(self) -> bool:
        return all(np.isfinite(w).all() and np.isfinite(b).all() for w, b in zip(self.weights, self.biases))

    # Scalar-input convenience wrappers.

    def __call__(self, x) -> float:
        return forward(self, x)


@dataclass
class ParamGradient:
    """Gradient of the potential w.r.t. every weight and bias, shaped like the net."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for w, b in zip(self.weights, self.biases) for a in (w, b)])


def init_net(
    input_dim: int,
    hidden_layers: int,
    hidden_width: int = 50,
    seed: int = 0,
    skip_connections: bool = True,
) -> PotentialNet:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from a seeded PCG64."""
    if input_dim < 1 or hidden_width < 1 or hidden_layers < 0:
        raise ValueError("net dimensions must be positive")
    net = PotentialNet(input_dim, hidden_layers, hidden_width, skip_connections)
    rng = np.random.default_rng(seed)
    for k, ((wshape, bsize), _) in enumerate(zip(net.layer_shapes(), net.weights)):
        bound = np.sqrt(1.0 / wshape[1])
        net.weights[k] = rng.uniform(-bound, bound, size=wshape)
        net.biases[k] = rng.uniform(-bound, bound, size=bsize)
    return net


def _check_batch(net: PotentialNet, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise DimensionError(f"expected inputs of width {net.input_dim}, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise NonFiniteError("non-finite input to potential")
    return X


def _check_single(net: PotentialNet, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {x.shape}")
    return _check_batch(net, x[None, :])


def _forward_cache(net: PotentialNet, X: np.ndarray):
    """Returns (output values, hidden states h_0..h_H, sigmoid outputs per hidden layer)."""
    H = net.hidden_layers
    hs = [X]
    sigs = []
    for k in range(H):
        a = expit(hs[-1] @ net.weights[k].T + net.biases[k])
        sigs.append(a)
        hs.append(a + hs[-1] if (net.skip_connections and k > 0) else a)
    if H == 0:
        feat = X
    elif net.skip_connections:
        feat = np.concatenate([hs[-1], X], axis=1)
    else:
        feat = hs[-1]
    out = feat @ net.weights[-1][0] + net.biases[-1][0]
    return out, hs, sigs, feat


def _backward(net: PotentialNet, X, hs, sigs, feat, seed: np.ndarray | None, want_params: bool):
    """Backpropagate ``seed`` (per-row output cotangent; None means all ones).

    Returns (input gradients, per-row; parameter gradient summed over rows or None).
    """
    n = X.shape[0]
    H, m = net.hidden_layers, net.hidden_width
    w_out = net.weights[-1][0]
    s = np.ones(n) if seed is None else seed
    gw = [None] * (H + 1)
    gb = [None] * (H + 1)
    if want_params:
        gw[H] = (s @ feat)[None, :]
        gb[H] = np.array([s.sum()])
    if H == 0:
        return np.outer(s, w_out), (ParamGradient(gw, gb) if want_params else None)

    dh = np.outer(s, w_out[:m])
    dx = np.outer(s, w_out[m:]) if net.skip_connections else np.zeros_like(X)
    for k in range(H - 1, -1, -1):
        a = sigs[k]
        dpre = dh * a * (1.0 - a)
        if want_params:
            gw[k] = dpre.T @ hs[k]
            gb[k] = dpre.sum(axis=0)
        if k == 0:
            dx = dx + dpre @ net.weights[0]
        else:
            dh = dpre @ net.weights[k] + (dh if net.skip_connections else 0.0)
    return dx, (ParamGradient(gw, gb) if want_params else None)


def forward_batch(net: PotentialNet, X) -> np.ndarray:
    X = _check_batch(net, X)
    return _forward_cache(net, X)[0]


def value_and_grad_batch(net: PotentialNet, X) -> tuple[np.ndarray, np.ndarray]:
    """Potential values (n,) and input gradients (n, d) in one pass."""
    X = _check_batch(net, X)
    out, hs, sigs, feat = _forward_cache(net, X)
    dx, _ = _backward(net, X, hs, sigs, feat, None, want_params=False)
    return out, dx


def grad_input_batch(net: PotentialNet, X) -> np.ndarray:
    return value_and_grad_batch(net, X)[1]


def grad_params_batch(net: PotentialNet, X, row_weights=None) -> ParamGradient:
    """Gradient w.r.t. parameters of ``sum_i row_weights[i] * phi(X[i])``."""
    X = _check_batch(net, X)
    rw = None if row_weights is None else np.asarray(row_weights, dtype=np.float64)
    out, hs, sigs, feat = _forward_cache(net, X)
    return _backward(net, X, hs, sigs, feat, rw, want_params=True)[1]


def forward(net: PotentialNet, x) -> float:
    return float(_forward_cache(net, _check_single(net, x))[0][0])


def grad_input(net: PotentialNet, x) -> np.ndarray:
    return value_and_grad_batch(net, _check_single(net, x))[1][0]


def grad_params(net: PotentialNet, x) -> ParamGradient:
    return grad_params_batch(net, _check_single(net, x))


# Serialization ---------------------------------------------------------------


def net_to_dict(net: PotentialNet) -> dict:
    return {
        "input_dim": net.input_dim,
        "hidden_layers": net.hidden_layers,
        "hidden_width": net.hidden_width,
        "skip_connections": net.skip_connections,
        "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in zip(net.weights, net.biases)],
    }


def net_from_dict(doc: dict) -> PotentialNet:
    return PotentialNet(
        int(doc["input_dim"]),
        int(doc["hidden_layers"]),
        int(doc["hidden_width"]),
        bool(doc["skip_connections"]),
        [np.array(layer["w"], dtype=np.float64) for layer in doc["layers"]],
        [np.array(layer["b"], dtype=np.float64) for layer in doc["layers"]],
    )


def save_net(net: PotentialNet, path) -> None:
    Path(path).write_text(json.dumps(net_to_dict(net)))


def load_net(path) -> PotentialNet:
    return net_from_dict(json.loads(Path(path).read_text()))


def affine_net(a, b: float = 0.0) -> PotentialNet:
    """The potential ``x -> a.x + b`` (no hidden layers)."""
    a = np.asarray(a, dtype=np.float64)
    return PotentialNet(a.size, 0, 1, True, [a[None, :].copy()], [np.array([float(b)])])
