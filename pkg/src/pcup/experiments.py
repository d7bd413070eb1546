"""Experiment drivers: one condition end to end, and the sweeps.

A condition is (auxiliary factor AF, subsampling mode, normals on/off,
mixing weight for hybrid).  For every mesh the ground truth is an
n_out-point uniform surface sampling; the network input is n_out/AF of
those points picked by the condition's mode.  The per-mesh random
streams are keyed by (seed, mesh index) alone, never by the mode or the
mixing weight, and the split is keyed by (seed, model count), so across
conditions the held-out test models are frozen and hybrid endpoints
reproduce the pure modes exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, TooFewModelsError
from .mesh import TriangleMesh, normalize_model
from .network import DecoderParams, EncoderParams, decoder_forward, encode
from .reports import ReportRow
from .rng import STREAM_SUBSAMPLE, STREAM_SURFACE, derive_seed
from .sampling import (PointCloud, SampledCloud, sample_surface_uniform,
                       subsample, subsample_hybrid)
from .training import (DatasetSplit, EvaluationReport, Pair, TrainResult,
                       TrainingConfig, evaluate, split_dataset, train)

AF_CHOICES = (2, 4, 8)
SAMPLING_CHOICES = ("uniform", "curvature", "hybrid")
SWEEP_ALPHAS = tuple(i / 10 for i in range(11))


@dataclass
class ExperimentCondition:
    af: int
    sampling: str
    normals: bool
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.af not in AF_CHOICES:
            raise ConfigError(f"af must be one of {AF_CHOICES}, got {self.af}")
        if self.sampling not in SAMPLING_CHOICES:
            raise ConfigError(
                f"sampling must be one of {SAMPLING_CHOICES}, got {self.sampling!r}")
        if self.sampling == "hybrid":
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ConfigError("hybrid sampling needs alpha in [0, 1]")
        elif self.alpha is not None:
            raise ConfigError("alpha only applies to hybrid sampling")

    @property
    def label(self) -> str:
        mode = self.sampling
        if self.sampling == "hybrid":
            mode = f"hybrid{self.alpha:g}"
        return f"af{self.af}-{mode}-{'normals' if self.normals else 'xyz'}"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def build_bank(meshes: Sequence[TriangleMesh], n_gt: int,
               seed: int) -> List[SampledCloud]:
    """Normalize every mesh and sample its ground-truth cloud."""
    bank = []
    for i, mesh in enumerate(meshes):
        m = normalize_model(mesh)
        bank.append(sample_surface_uniform(
            m, n_gt, derive_seed(seed, STREAM_SURFACE, i)))
    return bank


def build_pairs(bank: Sequence[SampledCloud], condition: ExperimentCondition,
                n_out: int, seed: int) -> List[Pair]:
    """(input, ground truth) pairs for one condition over a bank."""
    if n_out % condition.af != 0:
        raise ConfigError(f"af {condition.af} does not divide n_out {n_out}")
    m = n_out // condition.af
    pairs: List[Pair] = []
    for i, cloud in enumerate(bank):
        if len(cloud) != n_out:
            raise ConfigError(
                f"bank cloud {i} has {len(cloud)} points, expected {n_out}")
        sub_seed = derive_seed(seed, STREAM_SUBSAMPLE, i)
        if condition.sampling == "hybrid":
            inp = subsample_hybrid(cloud, m, condition.alpha,
                                   condition.normals, sub_seed)
        else:
            inp = subsample(cloud, m, condition.sampling,
                            condition.normals, sub_seed)
        pairs.append((inp, PointCloud(cloud.positions.copy())))
    return pairs


def condition_config(cfg: TrainingConfig,
                     condition: ExperimentCondition) -> TrainingConfig:
    return dataclasses.replace(cfg, input_dim=6 if condition.normals else 3)


def run_condition(bank: Sequence[SampledCloud], condition: ExperimentCondition,
                  cfg: TrainingConfig, radius: float
                  ) -> Tuple[EvaluationReport, TrainResult, DatasetSplit]:
    """Build pairs, split, train, evaluate on the frozen test models."""
    pairs = build_pairs(bank, condition, cfg.n_out, cfg.seed)
    split = split_dataset(pairs, cfg.seed)
    result = train(condition_config(cfg, condition), split)
    report = evaluate(result.encoder, result.decoder, split.test, radius)
    return report, result, split


def sweep_conditions(banks: Dict[str, Sequence[SampledCloud]],
                     cfg: TrainingConfig, radius: float = 0.03,
                     progress=None) -> List[ReportRow]:
    """Full factorial over AF x {uniform, curvature} x {xyz, normals},
    per category, in a fixed documented order."""
    rows: List[ReportRow] = []
    for category in sorted(banks):
        for af in AF_CHOICES:
            for sampling in ("uniform", "curvature"):
                for normals in (False, True):
                    cond = ExperimentCondition(af, sampling, normals)
                    report, _, _ = run_condition(banks[category], cond,
                                                 cfg, radius)
                    rows.append(ReportRow(
                        condition=f"{category}/{cond.label}", af=af,
                        sampling=sampling, normals=normals, alpha=None,
                        report=report))
                    if progress is not None:
                        progress(rows[-1])
    return rows


def sweep_alpha(bank: Sequence[SampledCloud], cfg: TrainingConfig,
                radius: float = 0.015, af: int = 8,
                category: str = "", progress=None) -> List[ReportRow]:
    """Hybrid mixing sweep at the 11 weights 0.0, 0.1, ..., 1.0."""
    rows: List[ReportRow] = []
    for alpha in SWEEP_ALPHAS:
        cond = ExperimentCondition(af, "hybrid", False, alpha)
        report, _, _ = run_condition(bank, cond, cfg, radius)
        prefix = f"{category}/" if category else ""
        rows.append(ReportRow(condition=f"{prefix}{cond.label}", af=af,
                              sampling="hybrid", normals=False, alpha=alpha,
                              report=report))
        if progress is not None:
            progress(rows[-1])
    return rows


def inter_class(banks: Dict[str, Sequence[SampledCloud]],
                condition: ExperimentCondition, cfg: TrainingConfig,
                radius: float = 0.03
                ) -> Tuple[List[ReportRow], Dict[str, TrainResult]]:
    """Train one model per category, evaluate every model on every
    category's frozen test set (diagonal included as the baseline)."""
    cats = sorted(banks)
    if len(cats) < 2:
        raise ConfigError("inter-class comparison needs at least 2 categories")
    trained: Dict[str, TrainResult] = {}
    splits: Dict[str, DatasetSplit] = {}
    for cat in cats:
        pairs = build_pairs(banks[cat], condition, cfg.n_out, cfg.seed)
        splits[cat] = split_dataset(pairs, cfg.seed)
        trained[cat] = train(condition_config(cfg, condition), splits[cat])
    rows: List[ReportRow] = []
    for tcat in cats:
        for ecat in cats:
            report = evaluate(trained[tcat].encoder, trained[tcat].decoder,
                              splits[ecat].test, radius)
            rows.append(ReportRow(
                condition=f"{tcat}->{ecat}/{condition.label}",
                af=condition.af, sampling=condition.sampling,
                normals=condition.normals, alpha=condition.alpha,
                report=report))
    return rows, trained


def multi_class(banks: Dict[str, Sequence[SampledCloud]], per_category: int,
                condition: ExperimentCondition, cfg: TrainingConfig,
                radius: float = 0.03
                ) -> Tuple[TrainResult, List[ReportRow]]:
    """One model trained on a fixed number of models from every category,
    evaluated on each category's own frozen test set."""
    if per_category < 1:
        raise ConfigError("per_category must be >= 1")
    cats = sorted(banks)
    splits: Dict[str, DatasetSplit] = {}
    pool: List[Pair] = []
    for cat in cats:
        pairs = build_pairs(banks[cat], condition, cfg.n_out, cfg.seed)
        splits[cat] = split_dataset(pairs, cfg.seed)
        if len(splits[cat].train) < per_category:
            raise TooFewModelsError(
                f"category {cat!r} has {len(splits[cat].train)} training "
                f"models, need {per_category}")
        pool.extend(splits[cat].train[:per_category])
    merged = DatasetSplit(
        train=pool,
        validation=[p for cat in cats for p in splits[cat].validation],
        test=[p for cat in cats for p in splits[cat].test],
        train_indices=np.arange(len(pool)),
        validation_indices=np.arange(sum(len(splits[c].validation) for c in cats)),
        test_indices=np.arange(sum(len(splits[c].test) for c in cats)),
    )
    result = train(condition_config(cfg, condition), merged)
    rows: List[ReportRow] = []
    for cat in cats:
        report = evaluate(result.encoder, result.decoder, splits[cat].test,
                          radius)
        rows.append(ReportRow(condition=f"multi->{cat}/{condition.label}",
                              af=condition.af, sampling=condition.sampling,
                              normals=condition.normals, alpha=condition.alpha,
                              report=report))
    return result, rows


def morph(enc: EncoderParams, dec: DecoderParams, cloud_a, cloud_b,
          steps: int) -> List[PointCloud]:
    """Decode evenly spaced blends of two codes.  The first and last
    steps blend with weights exactly 0 and 1, so they decode to the two
    single-cloud reconstructions."""
    if steps < 2:
        raise ValueError("need at least the two endpoint steps")
    za = encode(enc, cloud_a).astype(np.float64)
    zb = encode(enc, cloud_b).astype(np.float64)
    out = []
    for i in range(steps):
        w = i / (steps - 1)
        z = (1.0 - w) * za + w * zb
        points, _ = decoder_forward(dec, z)
        out.append(PointCloud(np.asarray(points, dtype=np.float64)))
    return out
