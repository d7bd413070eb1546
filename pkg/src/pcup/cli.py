"""Command-line front end.

Subcommands: gen-data, sample, train, eval, sweep-conditions,
sweep-alpha, inter-class, multi-class, morph.

Exit codes: 0 success, 1 usage or configuration problem, 2 data problem
(missing or malformed files, bad meshes), 3 numeric failure (training
hit a non-finite loss; the message names the epoch and batch).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import experiments, meshio, reports, synthetic
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .errors import (CheckpointError, ConfigError, NumericFailureError,
                     PcupError)
from .experiments import ExperimentCondition
from .mesh import normalize_model
from .rng import STREAM_SUBSAMPLE, STREAM_SURFACE, derive_seed
from .sampling import sample_surface_uniform, subsample, subsample_hybrid
from .training import (TrainingConfig, evaluate, paper_config, split_dataset,
                       train)


class _UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _add_common(p, out_dir=True):
    p.add_argument("--seed", type=int, default=None,
                   help="root seed (overrides the config file)")
    p.add_argument("--config", type=Path, default=None,
                   help="JSON file of training-config overrides")
    if out_dir:
        p.add_argument("--out-dir", type=Path, required=True,
                       help="directory for outputs (created if missing)")


def _add_condition(p):
    p.add_argument("--af", type=int, default=8, choices=experiments.AF_CHOICES,
                   help="input reduction factor")
    p.add_argument("--mode", default="uniform",
                   choices=experiments.SAMPLING_CHOICES,
                   help="subsampling mode for network inputs")
    p.add_argument("--alpha", type=float, default=None,
                   help="curvature share for hybrid mode, in [0, 1]")
    p.add_argument("--normals", action="store_true",
                   help="feed normals to the network alongside xyz")


def build_parser() -> _Parser:
    p = _Parser(prog="pcup",
                description="Point-cloud upsampling: data, training, sweeps.")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    g = sub.add_parser("gen-data", help="write procedural mesh categories")
    g.add_argument("--families", default=",".join(synthetic.FAMILIES),
                   help="comma-separated families "
                        f"(default: {','.join(synthetic.FAMILIES)})")
    g.add_argument("--count", type=int, default=20, help="meshes per family")
    _add_common(g)
    g.set_defaults(func=cmd_gen_data)

    s = sub.add_parser("sample", help="sample one mesh into GT + input clouds")
    s.add_argument("--mesh", type=Path, required=True)
    s.add_argument("--n", type=int, default=512, help="ground-truth points")
    _add_condition(s)
    _add_common(s)
    s.set_defaults(func=cmd_sample)

    t = sub.add_parser("train", help="train one model on a directory of meshes")
    t.add_argument("--data-dir", type=Path, required=True,
                   help="directory of .obj meshes")
    t.add_argument("--paper-scale", action="store_true",
                   help="start from the full-size configuration")
    _add_condition(t)
    _add_common(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint on its test split")
    e.add_argument("--checkpoint", type=Path, required=True)
    e.add_argument("--data-dir", type=Path, required=True)
    e.add_argument("--radius", type=float, default=0.03)
    _add_common(e)
    e.set_defaults(func=cmd_eval)

    sc = sub.add_parser("sweep-conditions",
                        help="train/evaluate every condition per category")
    sc.add_argument("--data-dir", type=Path, required=True,
                    help="directory with one subdirectory of meshes per category")
    sc.add_argument("--radius", type=float, default=0.03)
    _add_common(sc)
    sc.set_defaults(func=cmd_sweep_conditions)

    sa = sub.add_parser("sweep-alpha",
                        help="hybrid mixing sweep at weights 0.0..1.0")
    sa.add_argument("--data-dir", type=Path, required=True,
                    help="directory of .obj meshes (one category)")
    sa.add_argument("--radius", type=float, default=0.015)
    sa.add_argument("--af", type=int, default=8,
                    choices=experiments.AF_CHOICES)
    _add_common(sa)
    sa.set_defaults(func=cmd_sweep_alpha)

    ic = sub.add_parser("inter-class",
                        help="train per category, evaluate across categories")
    ic.add_argument("--data-dir", type=Path, required=True)
    ic.add_argument("--radius", type=float, default=0.03)
    _add_condition(ic)
    _add_common(ic)
    ic.set_defaults(func=cmd_inter_class)

    mc = sub.add_parser("multi-class",
                        help="train one model on several categories")
    mc.add_argument("--data-dir", type=Path, required=True)
    mc.add_argument("--per-category", type=int, default=50)
    mc.add_argument("--radius", type=float, default=0.03)
    _add_condition(mc)
    _add_common(mc)
    mc.set_defaults(func=cmd_multi_class)

    m = sub.add_parser("morph", help="decode blends between two shapes")
    m.add_argument("--checkpoint", type=Path, required=True)
    m.add_argument("--mesh-a", type=Path, required=True)
    m.add_argument("--mesh-b", type=Path, required=True)
    m.add_argument("--steps", type=int, default=7)
    _add_common(m)
    m.set_defaults(func=cmd_morph)

    return p


def _load_config(args, paper_scale: bool = False) -> TrainingConfig:
    base = paper_config() if paper_scale else TrainingConfig()
    if args.config is not None:
        if not Path(args.config).exists():
            raise ConfigError(f"config file not found: {args.config}")
        base = TrainingConfig.from_dict(reports.load_config_file(args.config),
                                        base=base)
    if args.seed is not None:
        base = dataclasses.replace(base, seed=args.seed)
    return base


def _condition_from(args) -> ExperimentCondition:
    alpha = args.alpha if args.mode == "hybrid" else None
    return ExperimentCondition(af=args.af, sampling=args.mode,
                               normals=args.normals, alpha=alpha)


def _mesh_files(data_dir: Path):
    if not data_dir.is_dir():
        raise PcupError(f"not a directory: {data_dir}")
    files = sorted(data_dir.glob("*.obj"))
    if not files:
        raise PcupError(f"no .obj meshes in {data_dir}")
    return files


def _load_meshes(data_dir: Path):
    return [meshio.load_obj(f) for f in _mesh_files(data_dir)]


def _category_dirs(data_dir: Path):
    if not data_dir.is_dir():
        raise PcupError(f"not a directory: {data_dir}")
    dirs = sorted(d for d in data_dir.iterdir()
                  if d.is_dir() and any(d.glob("*.obj")))
    if not dirs:
        raise PcupError(f"no category subdirectories with meshes in {data_dir}")
    return dirs


def _build_banks(data_dir: Path, cfg: TrainingConfig):
    return {d.name: experiments.build_bank(_load_meshes(d), cfg.n_out, cfg.seed)
            for d in _category_dirs(data_dir)}


def _ensure_out(args) -> Path:
    args.out_dir.mkdir(parents=True, exist_ok=True)
    return args.out_dir


def cmd_gen_data(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    for fam in families:
        if fam not in synthetic.FAMILIES:
            raise ConfigError(
                f"unknown family {fam!r}; choose from {synthetic.FAMILIES}")
    for fam in families:
        fam_dir = out / fam
        fam_dir.mkdir(parents=True, exist_ok=True)
        for i, mesh in enumerate(
                synthetic.generate_category(fam, args.count, cfg.seed)):
            meshio.save_obj(fam_dir / f"{i:03d}.obj", mesh)
        print(f"{fam}: wrote {args.count} meshes to {fam_dir}")
    return 0


def cmd_sample(args) -> int:
    cfg = _load_config(args)
    cond = _condition_from(args)
    out = _ensure_out(args)
    mesh = normalize_model(meshio.load_obj(args.mesh))
    cloud = sample_surface_uniform(mesh, args.n,
                                   derive_seed(cfg.seed, STREAM_SURFACE, 0))
    if args.n % cond.af != 0:
        raise ConfigError(f"af {cond.af} does not divide n {args.n}")
    m = args.n // cond.af
    sub_seed = derive_seed(cfg.seed, STREAM_SUBSAMPLE, 0)
    if cond.sampling == "hybrid":
        inp = subsample_hybrid(cloud, m, cond.alpha, cond.normals, sub_seed)
    else:
        inp = subsample(cloud, m, cond.sampling, cond.normals, sub_seed)
    meshio.write_ply(out / "gt.ply", cloud.positions)
    meshio.write_ply(out / "input.ply", inp)
    print(f"wrote {args.n}-point GT and {m}-point input to {out}")
    return 0


def _checkpoint_from(result, cfg: TrainingConfig,
                     cond: ExperimentCondition) -> Checkpoint:
    echo = {"training": cfg.to_dict(), "condition": cond.to_dict()}
    return Checkpoint(encoder=result.encoder, decoder=result.decoder,
                      config=echo, seed=cfg.seed)


def cmd_train(args) -> int:
    cfg = _load_config(args, paper_scale=args.paper_scale)
    cond = _condition_from(args)
    out = _ensure_out(args)
    bank = experiments.build_bank(_load_meshes(args.data_dir), cfg.n_out,
                                  cfg.seed)
    pairs = experiments.build_pairs(bank, cond, cfg.n_out, cfg.seed)
    split = split_dataset(pairs, cfg.seed)
    result = train(experiments.condition_config(cfg, cond), split)
    save_checkpoint(out / "model.ckpt", _checkpoint_from(result, cfg, cond))
    reports.write_loss_csv(out / "losses.csv", result.train_losses,
                           result.val_history)
    print(f"trained {cfg.epochs} epochs on {len(split.train)} models "
          f"({cond.label})")
    print(f"final train loss {result.train_losses[-1]:.6e}")
    if result.best_val_loss is not None:
        print(f"best validation loss {result.best_val_loss:.6e} "
              f"at epoch {result.best_val_epoch}")
    print(f"checkpoint: {out / 'model.ckpt'}")
    return 0


def _restore_run(ckpt: Checkpoint):
    echo = ckpt.config
    if not isinstance(echo, dict) or "training" not in echo or "condition" not in echo:
        raise ConfigError("checkpoint does not carry a run configuration")
    cfg = TrainingConfig.from_dict(echo["training"])
    cond = ExperimentCondition(**echo["condition"])
    return cfg, cond


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg, cond = _restore_run(ckpt)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    out = _ensure_out(args)
    bank = experiments.build_bank(_load_meshes(args.data_dir), cfg.n_out,
                                  cfg.seed)
    pairs = experiments.build_pairs(bank, cond, cfg.n_out, cfg.seed)
    split = split_dataset(pairs, cfg.seed)
    report = evaluate(ckpt.encoder, ckpt.decoder, split.test, args.radius)
    row = reports.ReportRow(condition=cond.label, af=cond.af,
                            sampling=cond.sampling, normals=cond.normals,
                            alpha=cond.alpha, report=report)
    reports.write_report_csv(out / "eval.csv", [row])
    print(f"test models: {len(split.test)}")
    print(f"chamfer_loss {report.chamfer_loss:.17e}")
    print(f"accuracy {report.accuracy!r}")
    print(f"coverage {report.coverage!r}")
    return 0


def cmd_sweep_conditions(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    banks = _build_banks(args.data_dir, cfg)
    rows = experiments.sweep_conditions(
        banks, cfg, radius=args.radius,
        progress=lambda r: print(f"{r.condition}: "
                                 f"loss {r.report.chamfer_loss:.3e}"))
    reports.write_report_csv(out / "conditions.csv", rows)
    print(f"wrote {len(rows)} rows to {out / 'conditions.csv'}")
    return 0


def cmd_sweep_alpha(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    bank = experiments.build_bank(_load_meshes(args.data_dir), cfg.n_out,
                                  cfg.seed)
    rows = experiments.sweep_alpha(
        bank, cfg, radius=args.radius, af=args.af,
        progress=lambda r: print(f"{r.condition}: "
                                 f"loss {r.report.chamfer_loss:.3e}"))
    reports.write_report_csv(out / "alpha.csv", rows)
    print(f"wrote {len(rows)} rows to {out / 'alpha.csv'}")
    return 0


def cmd_inter_class(args) -> int:
    cfg = _load_config(args)
    cond = _condition_from(args)
    out = _ensure_out(args)
    banks = _build_banks(args.data_dir, cfg)
    rows, _ = experiments.inter_class(banks, cond, cfg, radius=args.radius)
    reports.write_report_csv(out / "inter_class.csv", rows)
    for r in rows:
        print(f"{r.condition}: loss {r.report.chamfer_loss:.3e}")
    print(f"wrote {len(rows)} rows to {out / 'inter_class.csv'}")
    return 0


def cmd_multi_class(args) -> int:
    cfg = _load_config(args)
    cond = _condition_from(args)
    out = _ensure_out(args)
    banks = _build_banks(args.data_dir, cfg)
    result, rows = experiments.multi_class(banks, args.per_category, cond,
                                           cfg, radius=args.radius)
    save_checkpoint(out / "model.ckpt", _checkpoint_from(result, cfg, cond))
    reports.write_report_csv(out / "multi_class.csv", rows)
    for r in rows:
        print(f"{r.condition}: loss {r.report.chamfer_loss:.3e}")
    print(f"wrote {len(rows)} rows and a checkpoint to {out}")
    return 0


def cmd_morph(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg, cond = _restore_run(ckpt)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    out = _ensure_out(args)
    clouds = []
    for k, path in enumerate((args.mesh_a, args.mesh_b)):
        mesh = normalize_model(meshio.load_obj(path))
        full = sample_surface_uniform(mesh, cfg.n_out,
                                      derive_seed(cfg.seed, STREAM_SURFACE, k))
        m = cfg.n_out // cond.af
        sub_seed = derive_seed(cfg.seed, STREAM_SUBSAMPLE, k)
        if cond.sampling == "hybrid":
            clouds.append(subsample_hybrid(full, m, cond.alpha, cond.normals,
                                           sub_seed))
        else:
            clouds.append(subsample(full, m, cond.sampling, cond.normals,
                                    sub_seed))
    frames = experiments.morph(ckpt.encoder, ckpt.decoder, clouds[0],
                               clouds[1], args.steps)
    for i, frame in enumerate(frames):
        meshio.write_ply(out / f"morph_{i:02d}.ply", frame)
    print(f"wrote {len(frames)} frames to {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as e:
        print(str(e), file=sys.stderr)
        print("run 'pcup --help' for usage", file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 1
    except NumericFailureError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except CheckpointError as e:
        print(f"checkpoint error: {e}", file=sys.stderr)
        return 2
    except (PcupError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
