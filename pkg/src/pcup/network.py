"""Encoder-decoder point network with hand-written differentiation.

The encoder applies the same small dense map to every point (a width-1
filter), batch-normalizes each channel over the cloud's points, applies
ReLU, and repeats through five layers; a channelwise max over points
then yields an order-insensitive code.  The decoder is a plain MLP from
the code to n_out*3 coordinates, reshaped row-major to (n_out, 3), with
no normalization or activation after the last layer.

The encoder sorts its input rows into lexicographic order before any
arithmetic and runs the whole stack in that canonical order, so any
permutation of the caller's rows goes through bit-identical float
operations and the code comes out bit-identical, not merely close.  The
sort permutation is cached; max-gradient routing and input gradients are
reported in the caller's row order.

All backward passes are hand-derived.  Batch normalization's backward
includes the full dependence of the batch statistics on the inputs, and
the max gradient flows only to one row per channel (ties resolve to the
lowest original row index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import ShapeMismatchError, StaleCacheError
from .rng import STREAM_INIT, spawn_rng
from .sampling import PointCloud

TRAIN = "train"
INFER = "infer"

BN_EPS = 1e-5
BN_MOMENTUM = 0.9

ENCODER_DIMS = (64, 128, 128, 256, 128)
DECODER_HIDDEN = (256, 256)
DESK_ENCODER_DIMS = (16, 32, 32, 64, 32)
DESK_DECODER_HIDDEN = (64, 64)


@dataclass
class PointLayerParams:
    """One shared per-point layer: dense map + batch norm scale/shift."""

    weight: np.ndarray        # (d_in, d_out)
    bias: np.ndarray          # (d_out,)
    gamma: np.ndarray         # (d_out,)
    beta: np.ndarray          # (d_out,)
    running_mean: np.ndarray  # (d_out,), updated in Train mode
    running_var: np.ndarray   # (d_out,)


@dataclass
class DenseLayerParams:
    weight: np.ndarray  # (d_in, d_out)
    bias: np.ndarray    # (d_out,)


@dataclass
class EncoderParams:
    layers: List[PointLayerParams]

    @property
    def input_dim(self) -> int:
        return self.layers[0].weight.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.layers[-1].weight.shape[1]

    @property
    def dims(self) -> tuple:
        return tuple(L.weight.shape[1] for L in self.layers)


@dataclass
class DecoderParams:
    layers: List[DenseLayerParams]
    n_out: int

    @property
    def latent_dim(self) -> int:
        return self.layers[0].weight.shape[0]

    @property
    def hidden_dims(self) -> tuple:
        return tuple(L.weight.shape[1] for L in self.layers[:-1])


@dataclass
class _LayerCache:
    x: np.ndarray     # layer input, canonical row order (N, d_in)
    xhat: np.ndarray  # normalized pre-scale activations (N, d_out)
    istd: np.ndarray  # 1/sqrt(var + eps), (d_out,)
    y: np.ndarray     # post-affine output, pre-ReLU (N, d_out)


@dataclass
class EncoderCache:
    mode: str
    order: np.ndarray          # canonical row -> caller row
    layers: List[_LayerCache]
    features: np.ndarray       # last ReLU output, canonical order (N, C)
    argmax: np.ndarray         # caller row index feeding each channel's max


@dataclass
class DecoderCache:
    inputs: List[np.ndarray]  # input vector of every layer
    pre: List[np.ndarray]     # pre-activation of every layer


@dataclass
class Gradients:
    """Gradients aligned with trainable_arrays() plus the input gradient."""

    encoder: List[List[np.ndarray]]  # per layer: [dweight, dbias, dgamma, dbeta]
    decoder: List[List[np.ndarray]]  # per layer: [dweight, dbias]
    wrt_input: np.ndarray            # (N, input_dim), caller row order

    def arrays(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for g in self.encoder:
            out.extend(g)
        for g in self.decoder:
            out.extend(g)
        return out


def _glorot(rng: np.random.Generator, d_in: int, d_out: int,
            dtype: np.dtype) -> np.ndarray:
    lim = np.sqrt(6.0 / (d_in + d_out))
    return rng.uniform(-lim, lim, size=(d_in, d_out)).astype(dtype)


def init_params(input_dim: int = 3, n_out: int = 512, seed: int = 0,
                encoder_dims: Sequence[int] = DESK_ENCODER_DIMS,
                decoder_hidden: Sequence[int] = DESK_DECODER_HIDDEN,
                dtype=np.float32):
    """Fresh (EncoderParams, DecoderParams) for a given architecture.

    Weights are Glorot-uniform, biases and shifts zero, scales one,
    running stats at (0, 1).  The same seed always gives the same bits.
    """
    if input_dim not in (3, 6):
        raise ValueError("input_dim must be 3 or 6")
    if n_out < 1:
        raise ValueError("n_out must be positive")
    if len(encoder_dims) < 1:
        raise ValueError("encoder needs at least one layer")
    rng = spawn_rng(seed, STREAM_INIT)
    dtype = np.dtype(dtype)

    enc_layers = []
    d_in = input_dim
    for d_out in encoder_dims:
        enc_layers.append(PointLayerParams(
            weight=_glorot(rng, d_in, d_out, dtype),
            bias=np.zeros(d_out, dtype=dtype),
            gamma=np.ones(d_out, dtype=dtype),
            beta=np.zeros(d_out, dtype=dtype),
            running_mean=np.zeros(d_out, dtype=dtype),
            running_var=np.ones(d_out, dtype=dtype),
        ))
        d_in = d_out

    dec_layers = []
    d_in = enc_layers[-1].weight.shape[1]
    for d_out in tuple(decoder_hidden) + (3 * n_out,):
        dec_layers.append(DenseLayerParams(
            weight=_glorot(rng, d_in, d_out, dtype),
            bias=np.zeros(d_out, dtype=dtype),
        ))
        d_in = d_out

    return EncoderParams(enc_layers), DecoderParams(dec_layers, n_out=n_out)


def clone_params(enc: EncoderParams, dec: DecoderParams):
    """Deep copy, running statistics included."""
    enc2 = EncoderParams([PointLayerParams(*(a.copy() for a in (
        L.weight, L.bias, L.gamma, L.beta, L.running_mean, L.running_var)))
        for L in enc.layers])
    dec2 = DecoderParams([DenseLayerParams(L.weight.copy(), L.bias.copy())
                          for L in dec.layers], n_out=dec.n_out)
    return enc2, dec2


def trainable_arrays(enc: EncoderParams, dec: DecoderParams) -> List[np.ndarray]:
    """Parameter arrays in a fixed order (running stats excluded)."""
    out: List[np.ndarray] = []
    for L in enc.layers:
        out.extend([L.weight, L.bias, L.gamma, L.beta])
    for L in dec.layers:
        out.extend([L.weight, L.bias])
    return out


def encoder_forward(params: EncoderParams, points: np.ndarray, mode: str):
    """Run the per-point stack and max pool.  Returns (latent, cache).

    Train mode normalizes with the batch statistics of this cloud and
    updates the running statistics in place; Infer mode uses the stored
    running statistics and touches nothing.
    """
    if mode not in (TRAIN, INFER):
        raise ValueError(f"mode must be {TRAIN!r} or {INFER!r}")
    dtype = params.layers[0].weight.dtype
    x0 = np.asarray(points, dtype=dtype)
    if x0.ndim != 2 or x0.shape[1] != params.input_dim:
        raise ShapeMismatchError(
            f"expected (N, {params.input_dim}) input, got {x0.shape}")
    if len(x0) < 1:
        raise ShapeMismatchError("encoder needs at least one point")

    order = np.lexsort(x0.T[::-1])  # canonical row order: x, then y, z, ...
    x = np.ascontiguousarray(x0[order])
    caches: List[_LayerCache] = []
    for L in params.layers:
        z = x @ L.weight + L.bias
        if mode == TRAIN:
            mean = z.mean(axis=0)
            d = z - mean
            var = np.mean(d * d, axis=0)
            L.running_mean[:] = BN_MOMENTUM * L.running_mean + (1.0 - BN_MOMENTUM) * mean
            L.running_var[:] = BN_MOMENTUM * L.running_var + (1.0 - BN_MOMENTUM) * var
        else:
            mean = L.running_mean
            var = L.running_var
        istd = 1.0 / np.sqrt(var + dtype.type(BN_EPS))
        xhat = (z - mean) * istd
        y = L.gamma * xhat + L.beta
        caches.append(_LayerCache(x=x, xhat=xhat, istd=istd, y=y))
        x = np.maximum(y, 0.0)

    latent = x.max(axis=0)
    # Ties route to the lowest caller row index holding the max.
    hit = x == latent
    candidates = np.where(hit, order[:, None], len(x))
    argmax = candidates.min(axis=0)
    cache = EncoderCache(mode=mode, order=order, layers=caches,
                         features=x, argmax=argmax)
    return latent, cache


def decoder_forward(params: DecoderParams, latent: np.ndarray):
    """MLP from code vector to an (n_out, 3) point matrix."""
    dtype = params.layers[0].weight.dtype
    z = np.asarray(latent, dtype=dtype)
    if z.shape != (params.latent_dim,):
        raise ShapeMismatchError(
            f"expected latent of shape ({params.latent_dim},), got {z.shape}")
    inputs: List[np.ndarray] = []
    pre: List[np.ndarray] = []
    a = z
    last = len(params.layers) - 1
    for i, L in enumerate(params.layers):
        inputs.append(a)
        h = a @ L.weight + L.bias
        pre.append(h)
        a = h if i == last else np.maximum(h, 0.0)
    points = a.reshape(params.n_out, 3)
    return points, DecoderCache(inputs=inputs, pre=pre)


def network_backward(enc: EncoderParams, dec: DecoderParams,
                     ecache: EncoderCache, dcache: DecoderCache,
                     d_points: np.ndarray) -> Gradients:
    """Backpropagate d(loss)/d(output points) through decoder and encoder.

    Caches must come from a Train-mode forward pass of these parameters;
    anything inconsistent raises StaleCacheError.
    """
    if ecache.mode != TRAIN:
        raise StaleCacheError("backward needs caches from a Train-mode forward")
    if len(ecache.layers) != len(enc.layers):
        raise StaleCacheError("encoder cache does not match the parameters")
    for Lc, Lp in zip(ecache.layers, enc.layers):
        if Lc.x.shape[1] != Lp.weight.shape[0]:
            raise StaleCacheError("encoder cache does not match the parameters")
    if len(dcache.inputs) != len(dec.layers):
        raise StaleCacheError("decoder cache does not match the parameters")
    if dcache.inputs[0].shape != (dec.latent_dim,):
        raise StaleCacheError("decoder cache does not match the parameters")
    if ecache.features.shape[1] != dec.latent_dim:
        raise StaleCacheError("encoder and decoder caches are not from one pass")
    d_points = np.asarray(d_points, dtype=dec.layers[0].weight.dtype)
    if d_points.shape != (dec.n_out, 3):
        raise StaleCacheError(
            f"upstream gradient must be ({dec.n_out}, 3), got {d_points.shape}")

    # Decoder, output layer inwards.
    g = d_points.reshape(-1)
    dec_grads: List[List[np.ndarray]] = [[] for _ in dec.layers]
    last = len(dec.layers) - 1
    for i in range(last, -1, -1):
        dz = g if i == last else g * (dcache.pre[i] > 0)
        dec_grads[i] = [np.outer(dcache.inputs[i], dz), dz.copy()]
        g = dec.layers[i].weight @ dz
    d_latent = g

    # Max pool scatter: one row per channel, in canonical coordinates.
    n = len(ecache.features)
    inverse = np.empty(n, dtype=np.int64)
    inverse[ecache.order] = np.arange(n)
    rows = inverse[ecache.argmax]
    g = np.zeros_like(ecache.features)
    g[rows, np.arange(ecache.features.shape[1])] = d_latent

    enc_grads: List[List[np.ndarray]] = [[] for _ in enc.layers]
    for i in range(len(enc.layers) - 1, -1, -1):
        Lc = ecache.layers[i]
        Lp = enc.layers[i]
        dy = g * (Lc.y > 0)
        dgamma = (dy * Lc.xhat).sum(axis=0)
        dbeta = dy.sum(axis=0)
        dxhat = dy * Lp.gamma
        # Full batch-norm Jacobian: the batch mean and variance depend on
        # every row, so their gradients come back in here too.
        m1 = dxhat.mean(axis=0)
        m2 = (dxhat * Lc.xhat).mean(axis=0)
        dz = Lc.istd * (dxhat - m1 - Lc.xhat * m2)
        enc_grads[i] = [Lc.x.T @ dz, dz.sum(axis=0), dgamma, dbeta]
        g = dz @ Lp.weight.T

    d_input = np.empty_like(g)
    d_input[ecache.order] = g
    return Gradients(encoder=enc_grads, decoder=dec_grads, wrt_input=d_input)


def encode(enc: EncoderParams, cloud) -> np.ndarray:
    """Code vector of a cloud using running statistics (Infer mode)."""
    data = cloud.data if isinstance(cloud, PointCloud) else np.asarray(cloud)
    latent, _ = encoder_forward(enc, data, INFER)
    return latent


def upsample(enc: EncoderParams, dec: DecoderParams, cloud) -> PointCloud:
    """Dense reconstruction of a sparse cloud (Infer mode)."""
    data = cloud.data if isinstance(cloud, PointCloud) else np.asarray(cloud)
    latent, _ = encoder_forward(enc, data, INFER)
    points, _ = decoder_forward(dec, latent)
    return PointCloud(np.asarray(points, dtype=np.float64))
