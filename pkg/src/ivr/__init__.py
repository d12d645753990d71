"""Dual-axis correlation-interferometric radar velocimetry: baseband
synthesis, spectrogram estimation, 3-D velocity reconstruction and bounds."""

from .dsp import EstimatorParams, spectrogram
from .errors import IvrError
from .geometry import ArrayGeometry, Vec3, make_square_array, named_baselines
from .harness import ExperimentConfig, run_experiment
from .scene import LinearTrajectory, PointTarget, Scene, ground_truth
from .synthesis import BasebandRecording, RadarConfig, synthesize
from .velocity import PassPrior, Velocity3DEstimate, reconstruct

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "BasebandRecording", "EstimatorParams", "ExperimentConfig",
    "IvrError", "LinearTrajectory", "PassPrior", "PointTarget", "RadarConfig",
    "Scene", "Vec3", "Velocity3DEstimate", "ground_truth", "make_square_array",
    "named_baselines", "reconstruct", "run_experiment", "spectrogram", "synthesize",
]
