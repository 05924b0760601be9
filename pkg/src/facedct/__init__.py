"""facedct: face identification/verification with DCT features.

Pipeline: binary PNM images -> normalized gray planes -> low-frequency DCT
feature vectors -> nearest-template distances -> identification rate and
verification analytics (DET, EER, min-DCF), with color-channel fusion and
test-set significance sizing on the side.
"""

__version__ = "0.1.0"

from .errors import DataError, FacedctError, MismatchError, ValidationError
from .features import DEFAULT_DIM, FeatureVector, dct2, extract_features, idct2, zigzag_order
from .gallery import Gallery, SplitSpec, apply_split, load_gallery, save_gallery
from .imageio import (
    CHANNELS,
    RasterImage,
    normalize,
    read_pnm,
    resize_bilinear,
    select_channel,
    to_luminance,
    write_pnm,
)
from .matching import (
    IdentificationResult,
    ScoreTensor,
    build_score_tensor,
    identification_rate,
    mad,
    mse,
    person_score,
)
from .significance import (
    SignificanceParams,
    min_resolvable_error_rate,
    required_n,
    simplified_n,
)
from .verification import (
    DcfParams,
    DetPoint,
    TrialScores,
    dcf,
    det_curve,
    eer,
    far_frr_at,
    min_dcf,
    normal_deviate,
    split_intra_inter,
    trial_counts,
)
from .fusion import fuse_scores_sum, fuse_scores_weighted, run_channel_pipeline

__all__ = [
    "CHANNELS",
    "DEFAULT_DIM",
    "DataError",
    "DcfParams",
    "DetPoint",
    "FacedctError",
    "FeatureVector",
    "Gallery",
    "IdentificationResult",
    "MismatchError",
    "RasterImage",
    "ScoreTensor",
    "SignificanceParams",
    "SplitSpec",
    "TrialScores",
    "ValidationError",
    "apply_split",
    "build_score_tensor",
    "dcf",
    "dct2",
    "det_curve",
    "eer",
    "extract_features",
    "far_frr_at",
    "fuse_scores_sum",
    "fuse_scores_weighted",
    "identification_rate",
    "idct2",
    "load_gallery",
    "mad",
    "min_dcf",
    "min_resolvable_error_rate",
    "mse",
    "normal_deviate",
    "normalize",
    "person_score",
    "read_pnm",
    "required_n",
    "resize_bilinear",
    "run_channel_pipeline",
    "save_gallery",
    "select_channel",
    "simplified_n",
    "split_intra_inter",
    "to_luminance",
    "trial_counts",
    "write_pnm",
    "zigzag_order",
]
