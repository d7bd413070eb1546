"""Data-driven point-cloud upsampling at desk scale.

The pieces, bottom to top: triangle-mesh geometry and curvature
(`mesh`), surface sampling and subsampling (`sampling`), exact nearest
neighbors (`kdtree`), set distances (`metrics`), the hand-differentiated
encoder-decoder network (`network`), Adam training and evaluation
(`training`), on-disk formats (`meshio`, `checkpoint`, `reports`),
procedural shapes (`synthetic`), experiment drivers (`experiments`) and
the command line (`cli`).
"""

from .errors import PcupError
from .mesh import TriangleMesh, compute_vertex_normals, normalize_model
from .metrics import (accuracy, chamfer_distance, chamfer_gradient,
                      chamfer_loss, coverage, emd)
from .network import init_params, upsample
from .sampling import (PointCloud, SampledCloud, sample_surface_uniform,
                       subsample, subsample_hybrid)
from .training import (EvaluationReport, TrainingConfig, TrainResult,
                       desk_config, evaluate, paper_config, split_dataset,
                       train)

__version__ = "0.1.0"

__all__ = [
    "PcupError", "TriangleMesh", "compute_vertex_normals", "normalize_model",
    "accuracy", "chamfer_distance", "chamfer_gradient", "chamfer_loss",
    "coverage", "emd", "init_params", "upsample", "PointCloud",
    "SampledCloud", "sample_surface_uniform", "subsample", "subsample_hybrid",
    "EvaluationReport", "TrainingConfig", "TrainResult", "desk_config",
    "evaluate", "paper_config", "split_dataset", "train", "__version__",
]
