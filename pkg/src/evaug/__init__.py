"""Event-camera data toolkit: formats, frame integration, geometric
augmentation with an M/N policy, spike statistics, and a frame-based sensor
simulator used to check augmentation/generation consistency."""

from .events import (
    Event,
    EventStream,
    FrameTensor,
    LabeledSample,
    binarize,
    integrate_frames,
    one_hot,
    resize_spatial,
)
from .io import (
    FormatError,
    ParseReport,
    parse_bin,
    parse_bin_with_report,
    parse_text_events,
    read_frames,
    write_bin,
    write_frames,
    write_text_events,
)
from .metrics import LayerShape, event_f1, fire_rate, sparsity, synops_estimate
from .policy import (
    Intensity,
    Policy,
    apply_plan,
    augment_sample,
    lookup_intensity,
    make_contrastive_pair,
    sample_plan,
)
from .simulate import (
    BrightnessSequence,
    MatchReport,
    PhotometricControl,
    SimConfig,
    Trajectory,
    check_commutativity,
    render_trajectory,
    run_commutativity_suite,
    simulate_events,
)
from .transforms import (
    AugmentParams,
    CutMix,
    Cutout,
    Flip,
    Rect,
    Roll,
    Rotate,
    ShearX,
    apply,
    apply_to_image,
    cutmix,
    cutout,
    flip_horizontal,
    roll,
    rotate,
    shear_x,
)

__version__ = "0.1.0"

__all__ = [
    "Event",
    "EventStream",
    "FrameTensor",
    "LabeledSample",
    "binarize",
    "integrate_frames",
    "one_hot",
    "resize_spatial",
    "FormatError",
    "ParseReport",
    "parse_bin",
    "parse_bin_with_report",
    "parse_text_events",
    "read_frames",
    "write_bin",
    "write_frames",
    "write_text_events",
    "LayerShape",
    "event_f1",
    "fire_rate",
    "sparsity",
    "synops_estimate",
    "Intensity",
    "Policy",
    "apply_plan",
    "augment_sample",
    "lookup_intensity",
    "make_contrastive_pair",
    "sample_plan",
    "BrightnessSequence",
    "MatchReport",
    "PhotometricControl",
    "SimConfig",
    "Trajectory",
    "check_commutativity",
    "render_trajectory",
    "run_commutativity_suite",
    "simulate_events",
    "AugmentParams",
    "CutMix",
    "Cutout",
    "Flip",
    "Rect",
    "Roll",
    "Rotate",
    "ShearX",
    "apply",
    "apply_to_image",
    "cutmix",
    "cutout",
    "flip_horizontal",
    "roll",
    "rotate",
    "shear_x",
    "__version__",
]
