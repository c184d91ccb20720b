"""layermix: deterministic layered fractal-mixing augmentation, covariance
verification, and model-free robustness metrics."""

__version__ = "0.1.0"

from .blending import (
    BlendGranularity,
    BlendMask,
    blend,
    blend_arithmetic,
    blend_geometric,
    blend_masked,
    sample_mask,
)
from .covariance import (
    CovarianceReport,
    TransformStats,
    analytic_autocovariance,
    compare_covariances,
    empirical_autocovariance,
    estimate_transform_stats,
    iid_analytic_autocovariance,
    sample_stage_outputs,
)
from .errors import (
    EmptyBankError,
    IncompleteGridError,
    LogSchemaError,
    ParameterError,
    ShapeMismatchError,
)
from .fractals import CachePolicy, FractalBank, load_bank, sample_fractal
from .imgio import load_image, save_image, to_uint8, to_unit_float
from .metrics import (
    FlipMode,
    PredictionRecord,
    jsd_consistency,
    mean_corruption_error,
    mean_flip_probability,
    mean_top5_distance,
    parse_log_lines,
    rank_classes,
    read_log,
    rms_calibration_error,
    top5_displacement,
    write_log,
)
from .pipeline import (
    LayerSample,
    PipelineConfig,
    augment_one,
    iid_pipeline,
    layermix,
    layermix_batch,
)
from .rng import (
    BetaSide,
    BlendMethod,
    BlendMethodId,
    ConicWeights,
    DEFAULT_BLEND_WEIGHTS,
    RngStream,
    beta_unit_shape,
    blend_method_samples,
    choose_blend_method,
    choose_layer_exit,
    conic_weight_moments,
    conic_weight_samples,
    sample_conic_weights,
)
from .transforms import (
    TRANSFORM_TABLE,
    TransformDescriptor,
    TransformKind,
    apply_transform,
    descriptor_for,
    sample_level,
    sample_transform,
)

__all__ = [
    "__version__",
    # errors
    "ParameterError",
    "ShapeMismatchError",
    "EmptyBankError",
    "IncompleteGridError",
    "LogSchemaError",
    # rng / sampling
    "RngStream",
    "BetaSide",
    "beta_unit_shape",
    "ConicWeights",
    "sample_conic_weights",
    "conic_weight_samples",
    "conic_weight_moments",
    "BlendMethod",
    "BlendMethodId",
    "DEFAULT_BLEND_WEIGHTS",
    "choose_blend_method",
    "blend_method_samples",
    "choose_layer_exit",
    # transforms
    "TransformKind",
    "TransformDescriptor",
    "TRANSFORM_TABLE",
    "descriptor_for",
    "apply_transform",
    "sample_level",
    "sample_transform",
    # blending
    "BlendGranularity",
    "BlendMask",
    "sample_mask",
    "blend",
    "blend_arithmetic",
    "blend_geometric",
    "blend_masked",
    # fractal bank
    "FractalBank",
    "CachePolicy",
    "load_bank",
    "sample_fractal",
    # pipeline
    "PipelineConfig",
    "LayerSample",
    "layermix",
    "iid_pipeline",
    "layermix_batch",
    "augment_one",
    # covariance analysis
    "TransformStats",
    "CovarianceReport",
    "analytic_autocovariance",
    "iid_analytic_autocovariance",
    "empirical_autocovariance",
    "sample_stage_outputs",
    "compare_covariances",
    "estimate_transform_stats",
    # metrics
    "PredictionRecord",
    "FlipMode",
    "rank_classes",
    "read_log",
    "parse_log_lines",
    "write_log",
    "mean_corruption_error",
    "mean_flip_probability",
    "mean_top5_distance",
    "top5_displacement",
    "rms_calibration_error",
    "jsd_consistency",
    # image I/O
    "load_image",
    "save_image",
    "to_uint8",
    "to_unit_float",
]
