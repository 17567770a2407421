"""wilddistort: deterministic image degradation, robust/clean ROC-AUC
evaluation, and published ensemble score-fusion schemes."""

from .distortions import (
    DistortionSpec,
    apply,
    disk_kernel,
    gaussian_kernel1d,
    jpeg_roundtrip,
    motion_kernel,
)
from .errors import (
    ManifestError,
    ParameterError,
    SizingError,
    UndefinedMetricError,
    WildDistortError,
)
from .fusion import (
    IntsigFusionResult,
    IntsigScores,
    PrismInputs,
    RapidCascadeResult,
    RapidScores,
    TtaBundle,
    aggregate_tta,
    average_probs,
    flattened_intsig_weights,
    intsig_fuse,
    logit,
    prism_predict,
    prism_weights,
    rapid_cascade,
    sigmoid,
    weighted_expert_average,
)
from .image import (
    ImageBuffer,
    decode_jpeg,
    encode_jpeg,
    from_float,
    load_image,
    rgb_hsv_roundtrip,
    save_png,
    to_float,
)
from .metrics import (
    EvalReport,
    combined_score,
    cross_entropy,
    evaluate,
    kl_divergence,
    lpt_loss,
    mean_squared_error,
    psnr,
    roc_auc,
)
from .pipeline import (
    BUILTIN_SCHEMES,
    DistortionPlan,
    LevelScheme,
    ManifestRecord,
    apply_plan,
    assign_tracks,
    get_scheme,
    read_manifest,
    replay,
    run_batch,
    sample_plan,
    write_manifest,
)
from .rng import SeededRng
from .severity import (
    DistortionGroup,
    DistortionKind,
    SeverityTable,
    group_of,
    load_severity_config,
    severity_params,
)

__version__ = "0.1.0"
