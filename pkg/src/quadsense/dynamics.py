"""Time-dependent dynamics matrix, drive vector and mean-field integration.

The linear quadrature dynamics take the matrix form
``x' = M(t) x + d(t)`` for the state vector (x_c, p_c, x_m, p_m).  The
mechanical frequency enters only through the rotation factors
cos/sin(omega t), so it is passed separately from the parameter set: the
sensing layer perturbs it without touching anything else.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _stepper
from .errors import DivergenceError, StepFailure
from .model import SystemParams, envelope_re_im_sq

SQRT2 = math.sqrt(2.0)

# Length of the peak-measurement window (in 1/kappa); auto-extended to one
# full drive period when 2*pi/delta exceeds it.
MEASURE_WINDOW = 0.1
# The stabilization check compares against a same-length window whose end
# lies this much earlier.
STABILIZATION_OFFSET = 50.0
# Minimum resolution: at least this many steps per fastest oscillation.
STEPS_PER_PERIOD = 20
# Dense-window sampling: at least this many samples per oscillation period.
DENSE_SAMPLES_PER_PERIOD = 320


class MeanState(NamedTuple):
    """Mean quadratures (cavity pair in the dynamical frame, then mechanics)."""

    x_c: float
    p_c: float
    x_m: float
    p_m: float


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration tolerances, horizon and sampling layout.

    ``max_step`` and ``dense_interval`` may be None, meaning "derive from the
    system": the step is capped at 2*pi/(20*max(delta, omega)) so every
    oscillation is resolved, and the dense measurement windows are sampled
    with at least 320 points per period (0.0002 at the reference geometry).
    An explicit ``max_step`` is still clamped to the resolution cap.
    """

    rel_tol: float = 1.0e-9
    abs_tol: float = 1.0e-12
    t_end: float = 600.0
    sample_interval: float = 0.01
    max_step: Optional[float] = None
    dense_interval: Optional[float] = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive when given")
        if self.dense_interval is not None and not self.dense_interval > 0:
            raise ValueError("dense_interval must be positive when given")

    def effective_max_step(self, params: SystemParams, omega_m_eff: float) -> float:
        cap = 2.0 * math.pi / (STEPS_PER_PERIOD * max(params.delta, omega_m_eff))
        if self.max_step is None:
            return cap
        return min(self.max_step, cap)

    def effective_dense_interval(self, params: SystemParams,
                                 omega_m_eff: float) -> float:
        if self.dense_interval is not None:
            return self.dense_interval
        fast = max(params.delta, omega_m_eff)
        return min(2.0e-4, 2.0 * math.pi / (DENSE_SAMPLES_PER_PERIOD * fast))


@dataclass(frozen=True)
class Trajectory:
    """Sampled mean-field (or single stochastic) trajectory.

    ``times`` is strictly increasing and starts at 0; ``states`` holds one
    (x_c, p_c, x_m, p_m) row per time.  ``delta`` and ``omega_m_eff`` are
    carried along so measurement windows can be sized without re-deriving
    the generating parameters from the opaque hash.
    """

    times: np.ndarray
    states: np.ndarray
    params_hash: str
    delta: float
    omega_m_eff: float

    def __post_init__(self):
        if self.times.ndim != 1 or self.states.shape != (self.times.size, 4):
            raise ValueError("states must be (len(times), 4)")
        if self.times.size == 0 or self.times[0] != 0.0:
            raise ValueError("trajectory must start at t = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory contains non-finite states")

    @property
    def x_c(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def p_c(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def x_m(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def p_m(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def final_state(self) -> MeanState:
        return MeanState(*self.states[-1])


def measurement_window(delta: float, t_end: float) -> tuple:
    """Peak-measurement window: [t_end, t_end + L] with L >= one drive period."""
    length = max(MEASURE_WINDOW, 2.0 * math.pi / delta)
    return (t_end, t_end + length)


def build_dynamics_matrix(t: float, omega_m_eff: float,
                          params: SystemParams) -> np.ndarray:
    """4x4 matrix M(t) of the linear quadrature dynamics (kappa = 1)."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if not omega_m_eff > 0:
        raise ValueError("omega_m_eff must be positive")
    re_e, im_e, _ = envelope_re_im_sq(t, params)
    s = math.sin(omega_m_eff * t)
    c = math.cos(omega_m_eff * t)
    g = params.g_m
    gm = params.gamma_m
    return np.array([
        [-1.0, 0.0, -2.0 * g * im_e * c, -2.0 * g * im_e * s],
        [0.0, -1.0, 2.0 * g * re_e * c, 2.0 * g * re_e * s],
        [-2.0 * g * s * re_e, -2.0 * g * s * im_e, -gm, 0.0],
        [2.0 * g * c * re_e, 2.0 * g * c * im_e, 0.0, -gm],
    ])


def build_drive_vector(t: float, omega_m_eff: float,
                       params: SystemParams) -> np.ndarray:
    """Coherent drive vector d(t); scales linearly with E at fixed J and delta."""
    if t < 0:
        raise ValueError("time must be non-negative")
    re_e, im_e, e2 = envelope_re_im_sq(t, params)
    s = math.sin(omega_m_eff * t)
    c = math.cos(omega_m_eff * t)
    g = params.g_m
    return np.array([
        -SQRT2 * re_e,
        -SQRT2 * im_e,
        -g * s * e2,
        g * c * e2,
    ])


def default_sample_times(params: SystemParams, omega_m_eff: float,
                         cfg: IntegratorConfig) -> np.ndarray:
    """Uniform grid plus densely sampled stabilization and measurement windows.

    The trajectory extends one window length past ``t_end`` so the
    measurement window [t_end, t_end + L] is fully covered; the matching
    stabilization window ends STABILIZATION_OFFSET earlier and is included
    whenever the horizon allows it.
    """
    t0_meas, t1_meas = measurement_window(params.delta, cfg.t_end)
    length = t1_meas - t0_meas
    di = cfg.effective_dense_interval(params, omega_m_eff)

    n_uniform = int(round(t1_meas / cfg.sample_interval))
    grids = [np.linspace(0.0, n_uniform * cfg.sample_interval, n_uniform + 1)]
    windows = [(t0_meas, t1_meas)]
    t1_early = t1_meas - STABILIZATION_OFFSET
    if t1_early - length > 0:
        windows.append((t1_early - length, t1_early))
    for w0, w1 in windows:
        n = int(math.ceil((w1 - w0) / di))
        grids.append(np.linspace(w0, w1, n + 1))
    times = np.unique(np.concatenate(grids))
    # Collapse pairs closer than float noise so trajectories stay strictly
    # increasing.
    keep = np.empty(times.size, dtype=bool)
    keep[0] = True
    keep[1:] = np.diff(times) > 1.0e-12
    return times[keep]


def integrate_means(params: SystemParams, omega_m_eff: float,
                    cfg: IntegratorConfig,
                    sample_times: Optional[Sequence[float]] = None) -> Trajectory:
    """Integrate the mean-field dynamics from the zero state.

    Initial means vanish (vacuum cavity, zero-mean thermal mechanics).  The
    returned trajectory is sampled on the default grid of ``cfg`` unless
    explicit ``sample_times`` are given.  Raises DivergenceError if the state
    norm exceeds 1e12 and StepFailure if the controller stalls.
    """
    if not omega_m_eff > 0:
        raise ValueError("omega_m_eff must be positive")
    if sample_times is None:
        times = default_sample_times(params, omega_m_eff, cfg)
    else:
        times = np.ascontiguousarray(np.asarray(sample_times, dtype=float))
        if times.ndim != 1 or times.size == 0:
            raise ValueError("sample_times must be a non-empty 1-D sequence")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ValueError("sample_times must start at 0 and increase strictly")

    out = np.empty((times.size, 4))
    y0 = np.zeros(4)
    status, t_reached, _ = _stepper.dp54_integrate(
        y0, times, cfg.rel_tol, cfg.abs_tol,
        cfg.effective_max_step(params, omega_m_eff),
        params.g_m, params.delta, omega_m_eff, params.gamma_m, params.drive_E,
        out)
    if status == _stepper.DIVERGED:
        raise DivergenceError(
            f"state norm exceeded {_stepper.DIVERGENCE_LIMIT:g} at t = "
            f"{t_reached:.6g}; parameters are dynamically unstable", t=t_reached)
    if status == _stepper.STEP_FAILED:
        raise StepFailure(
            f"step size underflow at t = {t_reached:.6g} with rel_tol = "
            f"{cfg.rel_tol:g}")
    return Trajectory(times, out, params_run_hash(params, omega_m_eff, cfg),
                      params.delta, omega_m_eff)


def params_run_hash(params: SystemParams, omega_m_eff: float,
                    cfg: IntegratorConfig) -> str:
    """Opaque identifier of the generating parameter set and configuration."""
    text = repr((params, omega_m_eff, cfg))
    return hashlib.sha1(text.encode()).hexdigest()[:16]
