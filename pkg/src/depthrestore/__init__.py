"""Depth-map restoration guided by a registered color image.

Denoises Kinect-style 16-bit depth maps and fills their holes using a
joint bilateral filter family: trilateral in flat regions, directional
along color edges, and a valid-pixel partial variant for hole filling.
Includes a synthetic degradation and evaluation harness plus a CLI.
"""

from .errors import ContractViolation, FormatError, TruncationError, UnsupportedFormatError
from .image_model import (
    ColorImage,
    DepthMap,
    GrayImage,
    HOLE,
    encode_depth_pgm,
    load_color_ppm,
    load_depth_pgm,
    quantize,
    save_color_ppm,
    save_depth_pgm,
    save_mask_pgm,
    to_grayscale,
)
from .preprocess import StructuringElement, close_depth, expand_holes, hole_mask
from .edge_analysis import (
    EdgeMap,
    GradientField,
    HOLE_EDGE,
    HOLE_NONEDGE,
    NONHOLE_EDGE,
    NONHOLE_NONEDGE,
    classify_regions,
    detect_edges,
    edge_theta,
    nearest_edge_theta,
    sobel_gradients,
)
from .kernels import (
    KernelParams,
    color_range_weight,
    depth_range_weight,
    dgf_weight,
    spatial_weight,
)
from .filters import (
    FilterOutcome,
    djbf_pixel,
    filter_non_hole,
    jbf_pixel,
    pdjbf_pixel,
    tjbf_pixel,
)
from .pipeline import PipelineConfig, RestorationReport, fill_holes, restore
from .evaluate import (
    DegradeSpec,
    QualityReport,
    Rng,
    bad_pixel_rate,
    compare,
    degrade,
    mae,
    make_scene,
    psnr,
)

__version__ = "0.1.0"
