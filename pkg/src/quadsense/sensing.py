"""Peak-amplitude extraction, the sensing signal, and mass-ratio inversion.

The sensing signal compares stabilized peak quadrature amplitudes between a
run at the nominal mechanical frequency and a run at the shifted frequency.
Attached mass lowers the resonance, so the shifted run defaults to
``omega_m - delta_omega``; the sign is exposed because the defining relation
is also written with a ``+`` in places and both branches are physically
meaningful (they probe the two flanks of the response).

Peaks drift while the switch-on transient rings down (at a rate set by the
effective optomechanical damping, roughly J^2 in cavity units, which can be
far slower than the mechanical damping).  ``delta_xc_exact`` therefore keeps
doubling the horizon until the stabilization check passes, and always
compares the two runs at a common horizon so the shared transient cancels
out of the difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _stepper
from .dynamics import (STABILIZATION_OFFSET, IntegratorConfig, Trajectory,
                       integrate_means, measurement_window)
from .errors import DomainError, NotStabilized, WindowError
from .model import SystemParams, envelope_re_im_sq

# Added mass lowers the mechanical frequency.
DEFAULT_SHIFT_SIGN = -1
# Relative peak drift below which two successive windows count as stabilized.
STABILIZATION_TOL = 1.0e-3
# Maximum number of horizon doublings before giving up on stabilization.
MAX_DOUBLINGS = 6

_COMPONENTS = {"x_c": 0, "p_c": 1, "x_m": 2, "p_m": 3}


@dataclass(frozen=True)
class SensingResult:
    """Outcome of one exact sensing-signal evaluation."""

    delta_xc: float
    amp_ref: float
    amp_shifted: float
    delta_omega: float
    mass_ratio: float
    stabilized: bool
    shift_sign: int
    t_end_used: float

    def csv_row(self) -> dict:
        return {
            "delta_omega": self.delta_omega,
            "amp_ref": self.amp_ref,
            "amp_shifted": self.amp_shifted,
            "delta_xc": self.delta_xc,
            "mass_ratio": self.mass_ratio,
            "stabilized": self.stabilized,
        }


def _window_samples(traj: Trajectory, window, component: int) -> np.ndarray:
    t0, t1 = window
    if t1 <= t0:
        raise WindowError(f"empty window [{t0}, {t1}]")
    period = 2.0 * math.pi / traj.delta
    if (t1 - t0) < period * (1.0 - 1.0e-9):
        raise WindowError(
            f"window length {t1 - t0:g} shorter than one oscillation period "
            f"{period:g}")
    if t0 < traj.times[0] - 1.0e-12 or t1 > traj.times[-1] + 1.0e-12:
        raise WindowError(
            f"window [{t0:g}, {t1:g}] outside sampled range "
            f"[{traj.times[0]:g}, {traj.times[-1]:g}]")
    mask = (traj.times >= t0 - 1.0e-12) & (traj.times <= t1 + 1.0e-12)
    times = traj.times[mask]
    if times.size < 2 or np.max(np.diff(times)) > period / 50.0:
        raise WindowError(
            f"window [{t0:g}, {t1:g}] is not densely sampled (need better "
            f"than {period / 50.0:g} spacing)")
    return traj.states[mask, component]


def peak_amplitude(traj: Trajectory, window, component: str = "x_c",
                   centered: bool = False) -> float:
    """Largest |value| of a quadrature over a densely sampled window.

    The window must lie inside the trajectory's densely sampled region and
    span at least one full oscillation period, which makes the result
    insensitive to the oscillation phase.  With ``centered=True`` the window
    mean is removed first, which measures the oscillation amplitude alone
    (useful for quadratures riding on a drive-induced offset).
    """
    x = _window_samples(traj, window, _COMPONENTS[component])
    if centered:
        x = x - np.mean(x)
    return float(np.max(np.abs(x)))


def window_peaks(traj: Trajectory, window) -> dict:
    """Peak |value| of all four components over the window (diagnostics)."""
    return {name: peak_amplitude(traj, window, component=name)
            for name in _COMPONENTS}


def stabilization_check(traj: Trajectory, window,
                        tol: float = STABILIZATION_TOL) -> bool:
    """True when the window peak matches the one ending 50/kappa earlier.

    Zero-amplitude windows compare equal (a switched-off drive is trivially
    stabilized).  Raises WindowError when the earlier window is not covered
    by dense samples.
    """
    t0, t1 = window
    early = (t0 - STABILIZATION_OFFSET, t1 - STABILIZATION_OFFSET)
    pk_now = peak_amplitude(traj, window)
    pk_early = peak_amplitude(traj, early)
    ref = max(pk_now, pk_early)
    if ref == 0.0:
        return True
    return abs(pk_now - pk_early) / ref < tol


def infer_mass_ratio(delta_omega: float, omega_m: float) -> float:
    """Added-mass fraction from the frequency shift: dm/m = 2*dw/w."""
    if not 0.0 <= delta_omega < omega_m:
        raise DomainError(
            f"delta_omega must lie in [0, omega_m); got {delta_omega} with "
            f"omega_m = {omega_m}")
    return 2.0 * delta_omega / omega_m


def delta_xc_exact(params: SystemParams, delta_omega: float,
                   cfg: IntegratorConfig,
                   shift_sign: int = DEFAULT_SHIFT_SIGN,
                   auto_extend: bool = True,
                   max_doublings: int = MAX_DOUBLINGS,
                   require_stabilized: bool = True,
                   _traj_cache: Optional[dict] = None) -> SensingResult:
    """Sensing signal |peak(omega_m + sign*dw) - peak(omega_m)|, both runs exact.

    Both trajectories are integrated to the same horizon.  Starting from
    ``cfg.t_end`` the horizon doubles (up to ``max_doublings`` times) until
    the stabilization check passes for both runs; with ``auto_extend=False``
    only ``cfg.t_end`` itself is tried.  Raises NotStabilized when the check
    still fails at the final horizon, unless ``require_stabilized=False`` in
    which case the result carries ``stabilized=False``.

    ``_traj_cache`` lets a sweep share reference trajectories between grid
    points with identical parameters; entries are keyed by the effective
    frequency and horizon, so cached and fresh evaluations are identical.
    """
    if shift_sign not in (-1, 1):
        raise ValueError("shift_sign must be +1 or -1")
    mass_ratio = infer_mass_ratio(delta_omega, params.omega_m)
    omega_shifted = params.omega_m + shift_sign * delta_omega

    def run(omega_eff, cfg_t):
        if _traj_cache is None:
            return integrate_means(params, omega_eff, cfg_t)
        key = (omega_eff, cfg_t.t_end)
        if key not in _traj_cache:
            _traj_cache[key] = integrate_means(params, omega_eff, cfg_t)
        return _traj_cache[key]

    n_tries = (max_doublings + 1) if auto_extend else 1
    t_end = cfg.t_end
    for attempt in range(n_tries):
        cfg_t = replace(cfg, t_end=t_end)
        window = measurement_window(params.delta, t_end)
        traj_ref = run(params.omega_m, cfg_t)
        traj_shift = run(omega_shifted, cfg_t)
        ok = (stabilization_check(traj_ref, window)
              and stabilization_check(traj_shift, window))
        if ok or attempt == n_tries - 1:
            if not ok and require_stabilized:
                raise NotStabilized(
                    f"peak amplitude still drifting at t_end = {t_end:g} "
                    f"(started from {cfg.t_end:g}); raise t_end or allow "
                    f"more doublings")
            amp_ref = peak_amplitude(traj_ref, window)
            amp_shifted = peak_amplitude(traj_shift, window)
            return SensingResult(
                delta_xc=abs(amp_shifted - amp_ref),
                amp_ref=amp_ref,
                amp_shifted=amp_shifted,
                delta_omega=delta_omega,
                mass_ratio=mass_ratio,
                stabilized=ok,
                shift_sign=shift_sign,
                t_end_used=t_end,
            )
        t_end *= 2.0
    raise AssertionError("unreachable")


def first_order_delta(params: SystemParams, delta_omega: float,
                      cfg: IntegratorConfig,
                      shift_sign: int = DEFAULT_SHIFT_SIGN,
                      perturb_drive: bool = True,
                      grid_step: Optional[float] = None) -> np.ndarray:
    """Leading-order (in the effective coupling J) state change from the shift.

    Expands the difference of the two time-ordered propagators to first
    order in the coupling part of the dynamics matrix while treating the
    damping part exactly.  The shift enters through the perturbations
    dM = M(w + dw) - M(w) and dd = d(w + dw) - d(w), acting on the decoupled
    trajectory x0 and damped forward to the end time:

        dx(T) = int_0^T exp(M0 (T - s)) [dM(s) x0(s) + dd(s)] ds,

    with M0 = diag(-kappa, -kappa, -gamma_m, -gamma_m) and
    x0' = M0 x0 + d(t) the J = 0 response.  Both correction terms are of the
    same order; without the exp(M0 ...) dressing the cavity memory
    (1/kappa) is lost and the double integral grows with the horizon instead
    of approximating the exact difference.  ``perturb_drive=False`` freezes
    the drive at the unperturbed frequency (drops dd), quantifying how much
    of the response enters through the drive vector.

    Everything is evaluated by exponentially weighted trapezoidal recurrences
    on a uniform grid (default spacing: the integrator's resolution cap), an
    O(n) quadrature independent of the adaptive integration path.  T is the
    trajectory end time under ``cfg``, so the result compares directly with
    the exact end-state difference of two integrations.
    """
    if not 0.0 <= delta_omega < params.omega_m:
        raise DomainError("delta_omega must lie in [0, omega_m)")
    omega = params.omega_m
    omega_p = omega + shift_sign * delta_omega
    t_final = measurement_window(params.delta, cfg.t_end)[1]
    if grid_step is None:
        grid_step = cfg.effective_max_step(params, max(omega, omega_p))
    n = int(math.ceil(t_final / grid_step))
    t = np.linspace(0.0, t_final, n + 1)
    dt = t[1] - t[0]

    re_e, im_e, e2 = envelope_re_im_sq(t, params)
    g = params.g_m
    c0, s0 = np.cos(omega * t), np.sin(omega * t)
    c1, s1 = np.cos(omega_p * t), np.sin(omega_p * t)
    dc, ds = c1 - c0, s1 - s0

    # Non-zero entries of dM: the damping diagonal cancels, only the
    # rotation factors change.
    dm = {
        (0, 2): -2.0 * g * im_e * dc, (0, 3): -2.0 * g * im_e * ds,
        (1, 2): 2.0 * g * re_e * dc, (1, 3): 2.0 * g * re_e * ds,
        (2, 0): -2.0 * g * re_e * ds, (2, 1): -2.0 * g * im_e * ds,
        (3, 0): 2.0 * g * re_e * dc, (3, 1): 2.0 * g * im_e * dc,
    }
    d = np.stack([-math.sqrt(2.0) * re_e,
                  -math.sqrt(2.0) * im_e,
                  -g * s0 * e2,
                  g * c0 * e2])
    rates = np.array([1.0, 1.0, params.gamma_m, params.gamma_m])

    def damped_cumulative(f, a):
        """w(t_k) = int_0^{t_k} exp(-a (t_k - s)) f(s) ds, trapezoidal."""
        return _stepper.damped_cumulative(f, math.exp(-a * dt), 0.5 * dt)

    x0 = np.stack([damped_cumulative(d[j], rates[j]) for j in range(4)])
    result = np.zeros(4)
    for (i, j), entry in dm.items():
        integrand = entry * x0[j]
        # int_0^T exp(-a_i (T - s)) integrand(s) ds
        result[i] += damped_cumulative(integrand, rates[i])[-1]
    if perturb_drive:
        for i, entry in ((2, -g * ds * e2), (3, g * dc * e2)):
            result[i] += damped_cumulative(entry, rates[i])[-1]
    return result


def exact_end_state_delta(params: SystemParams, delta_omega: float,
                          cfg: IntegratorConfig,
                          shift_sign: int = DEFAULT_SHIFT_SIGN) -> np.ndarray:
    """End-state difference of the shifted and reference integrations.

    The oracle counterpart of ``first_order_delta``: no expansion, just two
    full integrations subtracted at the final sample time.
    """
    traj_ref = integrate_means(params, params.omega_m, cfg)
    traj_shift = integrate_means(
        params, params.omega_m + shift_sign * delta_omega, cfg)
    return np.asarray(traj_shift.states[-1]) - np.asarray(traj_ref.states[-1])
