"""Stochastic trajectories including the Langevin noise drives.

The noise model is the standard Markovian one: the cavity bath sits in
vacuum, the mechanical bath at occupation ``n_th``, and the fast phase
factors multiplying the bath operators are absorbed into the white-noise
increments (a phase-rotated white noise is white with the same variance).
Each quadrature line receives an independent Gaussian increment per step,
with variance per unit time kappa*(2*0+1) for the cavity lines and
gamma_m*(2*n_th+1) for the mechanical lines; initial states are drawn from
the zero-mean vacuum/thermal Gaussian.

Per-trajectory randomness comes from a counter-based Philox stream keyed by
(seed, index), so any trajectory can be reproduced in isolation and
ensembles do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _stepper
from .dynamics import (IntegratorConfig, Trajectory, measurement_window,
                       params_run_hash)
from .errors import DivergenceError
from .model import SystemParams, envelope_re_im_sq

# Steps per chunk of the fixed-step integration; fixed so chunk boundaries
# never change the noise stream consumption pattern.
CHUNK_STEPS = 4096
# Fixed step = adaptive resolution cap / 4.
STEP_DIVISOR = 4


@dataclass(frozen=True)
class NoiseSpec:
    """Bath occupation, stream seed and ensemble size.

    ``n_th`` of None means "use the value stored in the system parameters".
    ``noise_scale`` multiplies every noise standard deviation (increments and
    initial state); 0 turns the stochastic path into a deterministic one,
    which is the hook used to check the zero-noise reduction to the
    mean-field integration.
    """

    seed: int
    n_trajectories: int = 1
    n_th: Optional[float] = None
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if self.n_th is not None and self.n_th < 0:
            raise ValueError("n_th must be non-negative")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")

    def bath_occupation(self, params: SystemParams) -> float:
        return params.n_th if self.n_th is None else self.n_th


@dataclass(frozen=True)
class EnsembleResult:
    """Per-sample mean and standard error across an ensemble of paths."""

    mean_trajectory: Trajectory
    stderr: np.ndarray
    n_trajectories: int

    def __post_init__(self):
        if self.stderr.shape != self.mean_trajectory.states.shape:
            raise ValueError("stderr must match the mean trajectory shape")


def _stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(index & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _grid(params: SystemParams, omega_m_eff: float, cfg: IntegratorConfig):
    """Fixed step, total step count and sampled step indices."""
    h = cfg.effective_max_step(params, omega_m_eff) / STEP_DIVISOR
    t_final = measurement_window(params.delta, cfg.t_end)[1]
    n_steps = int(math.ceil(t_final / h))
    stride = max(1, int(round(cfg.sample_interval / h)))
    coarse = np.arange(0, n_steps + 1, stride, dtype=np.int64)
    windows = [measurement_window(params.delta, cfg.t_end)]
    length = windows[0][1] - windows[0][0]
    early_end = windows[0][1] - 50.0
    if early_end - length > 0:
        windows.append((early_end - length, early_end))
    dense = [np.arange(int(math.floor(w0 / h)), int(math.ceil(w1 / h)) + 1,
                       dtype=np.int64) for w0, w1 in windows]
    steps = np.unique(np.concatenate([coarse] + dense))
    steps = steps[(steps >= 0) & (steps <= n_steps)]
    return h, n_steps, steps


def _noise_stds(params: SystemParams, noise: NoiseSpec, h: float):
    n_th = noise.bath_occupation(params)
    inc_cav = math.sqrt(1.0 * h) * noise.noise_scale          # kappa = 1
    inc_mech = math.sqrt(params.gamma_m * (2.0 * n_th + 1.0) * h) * noise.noise_scale
    init_cav = math.sqrt(0.5) * noise.noise_scale
    init_mech = math.sqrt((2.0 * n_th + 1.0) / 2.0) * noise.noise_scale
    return inc_cav, inc_mech, init_cav, init_mech


def _advance(params: SystemParams, omega_m_eff: float, noise: NoiseSpec,
             indices, cfg: IntegratorConfig):
    """March a batch of paths, returning sampled states (n_traj, n_samp, 4)."""
    h, n_steps, steps = _grid(params, omega_m_eff, cfg)
    inc_cav, inc_mech, init_cav, init_mech = _noise_stds(params, noise, h)
    n_traj = len(indices)
    rngs = [_stream(noise.seed, i) for i in indices]

    y = np.empty((n_traj, 4))
    for j, rng in enumerate(rngs):
        z = rng.standard_normal(4)
        y[j, 0] = init_cav * z[0]
        y[j, 1] = init_cav * z[1]
        y[j, 2] = init_mech * z[2]
        y[j, 3] = init_mech * z[3]

    sampled = np.empty((n_traj, steps.size, 4))
    pos = 0
    while pos < steps.size and steps[pos] == 0:
        sampled[:, pos, :] = y
        pos += 1

    k0 = 0
    while k0 < n_steps:
        k1 = min(k0 + CHUNK_STEPS, n_steps)
        nk = k1 - k0
        # Drive/rotation coefficients on the half-step grid of this chunk.
        t_half = (k0 + 0.5 * np.arange(2 * nk + 1)) * h
        re_e, im_e, e2 = envelope_re_im_sq(t_half, params)
        coeffs = np.stack([re_e, im_e, e2,
                           np.sin(omega_m_eff * t_half),
                           np.cos(omega_m_eff * t_half)], axis=1)
        noise_chunk = np.empty((n_traj, nk, 4))
        for j, rng in enumerate(rngs):
            noise_chunk[j] = rng.standard_normal((nk, 4))
        hi = pos
        while hi < steps.size and steps[hi] <= k1:
            hi += 1
        local_steps = (steps[pos:hi] - k0).astype(np.int64)
        out = np.empty((n_traj, local_steps.size, 4))
        n_bad = _stepper.sde_paths(y, noise_chunk, coeffs, h,
                                   inc_cav, inc_mech, local_steps,
                                   params.g_m, params.gamma_m, out)
        if n_bad:
            raise DivergenceError(
                f"{n_bad} stochastic trajectory(ies) exceeded the divergence "
                f"bound in steps {k0}..{k1}",
                index=int(indices[0]) if n_traj == 1 else None)
        sampled[:, pos:hi, :] = out
        pos = hi
        k0 = k1
    times = steps.astype(float) * h
    return times, sampled


def sample_trajectory(params: SystemParams, omega_m_eff: float,
                      noise: NoiseSpec, index: int,
                      cfg: IntegratorConfig) -> Trajectory:
    """One stochastic path; bit-reproducible from (seed, index)."""
    if not 0 <= index < noise.n_trajectories:
        raise ValueError("index must lie in [0, n_trajectories)")
    times, sampled = _advance(params, omega_m_eff, noise, [index], cfg)
    return Trajectory(times, sampled[0], params_run_hash(params, omega_m_eff, cfg),
                      params.delta, omega_m_eff)


def ensemble_mean(params: SystemParams, omega_m_eff: float, noise: NoiseSpec,
                  cfg: IntegratorConfig,
                  batch: int = 256) -> EnsembleResult:
    """Mean and standard error over the full ensemble of stochastic paths.

    Trajectories are evaluated in fixed index order (in batches bounded by
    ``batch`` to limit memory) and aggregated deterministically, so the
    result is a pure function of (params, omega_m_eff, noise, cfg).
    """
    if noise.n_trajectories < 2:
        raise ValueError("ensemble_mean needs n_trajectories >= 2")
    n = noise.n_trajectories
    acc = acc2 = None
    times = None
    for start in range(0, n, batch):
        idx = range(start, min(start + batch, n))
        times, sampled = _advance(params, omega_m_eff, noise, list(idx), cfg)
        s = sampled.sum(axis=0)
        s2 = (sampled * sampled).sum(axis=0)
        acc = s if acc is None else acc + s
        acc2 = s2 if acc2 is None else acc2 + s2
    mean = acc / n
    var = np.maximum(acc2 / n - mean * mean, 0.0) * (n / (n - 1))
    stderr = np.sqrt(var / n)
    traj = Trajectory(times, mean, params_run_hash(params, omega_m_eff, cfg),
                      params.delta, omega_m_eff)
    return EnsembleResult(mean_trajectory=traj, stderr=stderr, n_trajectories=n)
