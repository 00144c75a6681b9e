"""Simulation and analysis toolkit for optomechanical quadrature mass sensing."""

from .dynamics import (IntegratorConfig, MeanState, Trajectory,
                       build_drive_vector, build_dynamics_matrix,
                       integrate_means, measurement_window)
from .errors import (ConfigError, DivergenceError, DomainError, NoInteriorMax,
                     NotStabilized, QuadsenseError, StepFailure,
                     WeakCouplingWarning, WindowError)
from .model import FrameOffset, SystemParams, drive_envelope, frame_offset
from .sensing import (SensingResult, delta_xc_exact, exact_end_state_delta,
                      first_order_delta, infer_mass_ratio, peak_amplitude,
                      stabilization_check, window_peaks)
from .stochastic import (EnsembleResult, NoiseSpec, ensemble_mean,
                         sample_trajectory)
from .sweeps import (SweepResult, SweepRow, SweepSpec, find_optimal_drive,
                     sweep_coupling, sweep_drive, sweep_quality,
                     sweep_sideband)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DivergenceError", "DomainError", "EnsembleResult",
    "FrameOffset", "IntegratorConfig", "MeanState", "NoInteriorMax",
    "NoiseSpec", "NotStabilized", "QuadsenseError", "SensingResult",
    "StepFailure", "SweepResult", "SweepRow", "SweepSpec", "SystemParams",
    "Trajectory", "WeakCouplingWarning", "WindowError", "build_drive_vector",
    "build_dynamics_matrix", "delta_xc_exact", "drive_envelope",
    "ensemble_mean", "exact_end_state_delta", "find_optimal_drive",
    "first_order_delta", "frame_offset", "infer_mass_ratio",
    "integrate_means", "measurement_window", "peak_amplitude",
    "sample_trajectory", "stabilization_check", "sweep_coupling",
    "sweep_drive", "sweep_quality", "sweep_sideband", "window_peaks",
    "__version__",
]
