"""Training loop: Adam over the chamfer loss, split handling, evaluation.

The dataset is shuffled once by seed and cut 85/5/10 into train,
validation and test (floor for the two small parts, remainder to train),
so the held-out sets depend only on the seed and the model order, never
on how the inputs were subsampled.  Validation runs every few epochs and
the best-validation parameters are what training returns.

The batch gradient is the mean of per-cloud gradients, so the step size
does not depend on the batch size.  A non-finite loss aborts immediately
with the epoch and batch in the message.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (ConfigError, EmptyTestSetError, NumericFailureError,
                     TooFewModelsError)
from .metrics import accuracy, chamfer_distance, chamfer_with_gradient, coverage
from .network import (DESK_DECODER_HIDDEN, DESK_ENCODER_DIMS, TRAIN,
                      DecoderParams, EncoderParams, clone_params,
                      decoder_forward, encoder_forward, init_params,
                      network_backward, trainable_arrays, upsample)
from .rng import STREAM_SHUFFLE, STREAM_SPLIT, spawn_rng
from .sampling import PointCloud

Pair = Tuple[PointCloud, PointCloud]  # (network input, ground truth)

VAL_FRACTION = 0.05
TEST_FRACTION = 0.10
MIN_MODELS = 10


@dataclass
class TrainingConfig:
    """Optimizer, architecture and dataset knobs.

    Defaults are desk scale: small widths, 512-point reconstructions,
    a few hundred epochs.  paper_config() returns the full-size setup.
    """

    learning_rate: float = 5e-4
    batch_size: int = 50
    epochs: int = 300
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    n_out: int = 512
    input_dim: int = 3
    encoder_dims: tuple = DESK_ENCODER_DIMS
    decoder_hidden: tuple = DESK_DECODER_HIDDEN
    val_every: int = 10

    def __post_init__(self):
        self.encoder_dims = tuple(int(d) for d in self.encoder_dims)
        self.decoder_hidden = tuple(int(d) for d in self.decoder_hidden)
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.n_out < 1:
            raise ConfigError("n_out must be >= 1")
        if self.input_dim not in (3, 6):
            raise ConfigError("input_dim must be 3 or 6")
        if self.val_every < 1:
            raise ConfigError("val_every must be >= 1")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ConfigError("beta1 and beta2 must be in [0, 1)")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["encoder_dims"] = list(self.encoder_dims)
        d["decoder_hidden"] = list(self.decoder_hidden)
        return d

    @classmethod
    def from_dict(cls, values: dict, base: "TrainingConfig" = None) -> "TrainingConfig":
        """Build a config from a flat mapping; unknown keys are an error."""
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        merged = (base.to_dict() if base is not None else cls().to_dict())
        merged.update(values)
        return cls(**merged)


def paper_config(**overrides) -> TrainingConfig:
    """Full-size configuration: wide layers, 2048 points, 2000 epochs."""
    values = dict(n_out=2048, encoder_dims=(64, 128, 128, 256, 128),
                  decoder_hidden=(256, 256), epochs=2000)
    values.update(overrides)
    return TrainingConfig(**values)


def desk_config(**overrides) -> TrainingConfig:
    """Shipped default scale, spelled out for symmetry with paper_config."""
    return TrainingConfig(**overrides)


@dataclass
class DatasetSplit:
    train: List[Pair]
    validation: List[Pair]
    test: List[Pair]
    train_indices: np.ndarray
    validation_indices: np.ndarray
    test_indices: np.ndarray


def split_dataset(pairs: Sequence[Pair], seed: int) -> DatasetSplit:
    """Shuffle deterministically, then cut 85/5/10.

    Validation and test sizes are floors of their fractions, so with the
    same seed and model count the held-out indices are frozen no matter
    what the pairs contain.
    """
    n = len(pairs)
    if n < MIN_MODELS:
        raise TooFewModelsError(f"need at least {MIN_MODELS} models, got {n}")
    perm = spawn_rng(seed, STREAM_SPLIT).permutation(n)
    n_val = int(n * VAL_FRACTION)
    n_test = int(n * TEST_FRACTION)
    n_train = n - n_val - n_test
    tr = perm[:n_train]
    va = perm[n_train:n_train + n_val]
    te = perm[n_train + n_val:]
    return DatasetSplit(
        train=[pairs[i] for i in tr],
        validation=[pairs[i] for i in va],
        test=[pairs[i] for i in te],
        train_indices=tr, validation_indices=va, test_indices=te,
    )


@dataclass
class AdamState:
    m: List[np.ndarray]
    v: List[np.ndarray]
    t: int = 0

    @classmethod
    def for_arrays(cls, arrays: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(a) for a in arrays],
                   v=[np.zeros_like(a) for a in arrays], t=0)


def adam_step(arrays: Sequence[np.ndarray], grads: Sequence[np.ndarray],
              state: AdamState, config: TrainingConfig) -> None:
    """One in-place update of every array from its gradient."""
    if len(arrays) != len(grads) or len(arrays) != len(state.m):
        raise ValueError("parameter, gradient and state lists must align")
    state.t += 1
    b1 = config.beta1
    b2 = config.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        a -= config.learning_rate * (m / c1) / (np.sqrt(v / c2) + config.adam_eps)


@dataclass
class TrainResult:
    encoder: EncoderParams
    decoder: DecoderParams
    train_losses: List[float]
    val_history: List[Tuple[int, float]]  # (epoch, validation loss)
    best_val_loss: Optional[float]
    best_val_epoch: Optional[int]


@dataclass
class EvaluationReport:
    chamfer_loss: float
    accuracy: float
    coverage: float


def _normalized_chamfer(pred: np.ndarray, gt: np.ndarray) -> float:
    return chamfer_distance(pred, gt) / (len(pred) + len(gt))


def _validation_loss(enc: EncoderParams, dec: DecoderParams,
                     pairs: Sequence[Pair]) -> float:
    total = 0.0
    for inp, gt in pairs:
        pred = upsample(enc, dec, inp)
        total += _normalized_chamfer(pred.positions, gt.positions)
    return total / len(pairs)


def train(config: TrainingConfig, split: DatasetSplit,
          dtype=np.float32,
          progress: Optional[Callable[[int, float], None]] = None) -> TrainResult:
    """Fit the network to the split's training pairs.

    Returns the parameters with the best validation loss (final-epoch
    parameters when there is no validation set), plus the loss history.
    `progress`, when given, is called as progress(epoch, train_loss).
    """
    if not split.train:
        raise TooFewModelsError("training split is empty")
    for inp, gt in split.train:
        if inp.data.shape[1] != config.input_dim:
            raise ConfigError(
                f"input has {inp.data.shape[1]} columns, config says "
                f"{config.input_dim}")
        if len(gt) != config.n_out:
            raise ConfigError(
                f"ground truth has {len(gt)} points, config says {config.n_out}")

    enc, dec = init_params(
        input_dim=config.input_dim, n_out=config.n_out, seed=config.seed,
        encoder_dims=config.encoder_dims, decoder_hidden=config.decoder_hidden,
        dtype=dtype)
    arrays = trainable_arrays(enc, dec)
    state = AdamState.for_arrays(arrays)

    n_train = len(split.train)
    train_losses: List[float] = []
    val_history: List[Tuple[int, float]] = []
    best_val = None
    best_epoch = None
    best_params = None

    for epoch in range(config.epochs):
        order = spawn_rng(config.seed, STREAM_SHUFFLE, epoch).permutation(n_train)
        epoch_loss = 0.0
        for start in range(0, n_train, config.batch_size):
            batch = order[start:start + config.batch_size]
            scale = 1.0 / len(batch)
            accum = [np.zeros_like(a, dtype=np.float64) for a in arrays]
            for i in batch:
                inp, gt = split.train[i]
                latent, ecache = encoder_forward(enc, inp.data, TRAIN)
                pred, dcache = decoder_forward(dec, latent)
                denom = len(pred) + len(gt)
                raw, d_raw = chamfer_with_gradient(pred, gt.positions)
                loss = raw / denom
                if not np.isfinite(loss):
                    raise NumericFailureError(
                        f"non-finite loss {loss} at epoch {epoch}, "
                        f"batch starting at {start}, model {i}")
                epoch_loss += loss
                d_pred = d_raw / denom
                grads = network_backward(enc, dec, ecache, dcache, d_pred)
                for acc, g in zip(accum, grads.arrays()):
                    acc += g
            for acc in accum:
                acc *= scale
            adam_step(arrays, accum, state, config)
        train_losses.append(epoch_loss / n_train)
        if progress is not None:
            progress(epoch, train_losses[-1])

        last_epoch = epoch == config.epochs - 1
        if split.validation and ((epoch + 1) % config.val_every == 0 or last_epoch):
            vloss = _validation_loss(enc, dec, split.validation)
            val_history.append((epoch, vloss))
            if best_val is None or vloss < best_val:
                best_val = vloss
                best_epoch = epoch
                best_params = clone_params(enc, dec)

    if best_params is not None:
        enc, dec = best_params
    return TrainResult(encoder=enc, decoder=dec, train_losses=train_losses,
                       val_history=val_history, best_val_loss=best_val,
                       best_val_epoch=best_epoch)


def evaluate(enc: EncoderParams, dec: DecoderParams, pairs: Sequence[Pair],
             radius: float) -> EvaluationReport:
    """Mean chamfer loss / accuracy / coverage over held-out pairs."""
    if not pairs:
        raise EmptyTestSetError("evaluation needs at least one pair")
    losses = []
    accs = []
    covs = []
    for inp, gt in pairs:
        pred = upsample(enc, dec, inp)
        losses.append(_normalized_chamfer(pred.positions, gt.positions))
        accs.append(accuracy(pred, gt, radius))
        covs.append(coverage(pred, gt, radius))
    return EvaluationReport(chamfer_loss=float(np.mean(losses)),
                            accuracy=float(np.mean(accs)),
                            coverage=float(np.mean(covs)))
