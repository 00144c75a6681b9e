"""Compiled integration kernels.

Two kernels live here: an adaptive Dormand-Prince 5(4) stepper for the
mean-field ODE and a fixed-step fourth-order drift kernel for stochastic
paths.  Both work on the four-component quadrature state
(x_c, p_c, x_m, p_m) with kappa = 1.

The steppers land exactly on every requested sample time (no interpolation),
so sampled values never depend on adaptive step placement.
"""

import numpy as np
from numba import njit, prange

SQRT2 = np.sqrt(2.0)

# Status codes returned by the kernels.
OK = 0
DIVERGED = 1
STEP_FAILED = 2

DIVERGENCE_LIMIT = 1.0e12

# Dormand-Prince 5(4) tableau (FSAL).
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
# b - b_hat: weights of the embedded 4th-order error estimate.
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)


@njit(cache=True)
def rhs(t, y, out, g_m, delta, omega, gamma_m, drive_E):
    """Mean-field right-hand side of the linear quadrature dynamics."""
    amp = drive_E / delta
    ph = delta * t
    re_e = amp * np.sin(ph)
    im_e = amp * (1.0 - np.cos(ph))
    e2 = re_e * re_e + im_e * im_e
    s = np.sin(omega * t)
    c = np.cos(omega * t)
    mech = c * y[2] + s * y[3]
    cav = re_e * y[0] + im_e * y[1]
    out[0] = -y[0] - 2.0 * g_m * im_e * mech - SQRT2 * re_e
    out[1] = -y[1] + 2.0 * g_m * re_e * mech - SQRT2 * im_e
    out[2] = -gamma_m * y[2] - 2.0 * g_m * s * cav - g_m * s * e2
    out[3] = -gamma_m * y[3] + 2.0 * g_m * c * cav + g_m * c * e2


@njit(cache=True)
def damped_cumulative(f, decay, half_dt):
    """w[k] = exp-weighted trapezoidal cumulative of f with w[0] = 0.

    Implements w[k] = decay * w[k-1] + half_dt * (decay * f[k-1] + f[k]),
    the trapezoidal discretization of int_0^t exp(-a (t - s)) f(s) ds on a
    uniform grid with decay = exp(-a * dt).
    """
    w = np.empty_like(f)
    w[0] = 0.0
    for k in range(1, f.size):
        w[k] = decay * w[k - 1] + half_dt * (decay * f[k - 1] + f[k])
    return w


@njit(cache=True)
def _error_norm(err, y_old, y_new, rtol, atol):
    acc = 0.0
    for i in range(4):
        scale = atol + rtol * max(abs(y_old[i]), abs(y_new[i]))
        r = err[i] / scale
        acc += r * r
    return np.sqrt(acc / 4.0)


@njit(cache=True)
def dp54_integrate(y0, sample_times, rtol, atol, max_step,
                   g_m, delta, omega, gamma_m, drive_E, out):
    """Integrate from t=0 through every sample time, filling ``out``.

    Returns (status, t_reached, n_steps).  ``out`` has shape
    (len(sample_times), 4) and is written row by row as samples are reached;
    integration starts from state ``y0`` at t = 0.
    """
    n_samples = sample_times.shape[0]
    y = y0.copy()
    ynew = np.empty(4)
    yerr = np.empty(4)
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    k5 = np.empty(4)
    k6 = np.empty(4)
    k7 = np.empty(4)
    ystage = np.empty(4)

    t = 0.0
    t_comp = 0.0  # compensated-summation carry for t
    i_sample = 0
    n_steps = 0

    # Emit any samples at (or numerically at) the start point.
    while i_sample < n_samples and sample_times[i_sample] <= t:
        for i in range(4):
            out[i_sample, i] = y[i]
        i_sample += 1
    if i_sample >= n_samples:
        return OK, t, n_steps

    rhs(t, y, k1, g_m, delta, omega, gamma_m, drive_E)
    h_abs = max_step * 1.0e-3  # conservative start; controller ramps up

    while i_sample < n_samples:
        target = sample_times[i_sample]
        if h_abs > max_step:
            h_abs = max_step
        h = h_abs
        landing = False
        if t + h >= target:
            h = target - t
            landing = True
        if h <= 1.0e-14 * max(1.0, abs(t)):
            # Degenerate gap to the next sample: emit current state.
            t = target
            t_comp = 0.0
            for i in range(4):
                out[i_sample, i] = y[i]
            i_sample += 1
            continue

        # Six stages plus FSAL evaluation.
        for i in range(4):
            ystage[i] = y[i] + h * _A21 * k1[i]
        rhs(t + _C2 * h, ystage, k2, g_m, delta, omega, gamma_m, drive_E)
        for i in range(4):
            ystage[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        rhs(t + _C3 * h, ystage, k3, g_m, delta, omega, gamma_m, drive_E)
        for i in range(4):
            ystage[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        rhs(t + _C4 * h, ystage, k4, g_m, delta, omega, gamma_m, drive_E)
        for i in range(4):
            ystage[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i]
                                    + _A53 * k3[i] + _A54 * k4[i])
        rhs(t + _C5 * h, ystage, k5, g_m, delta, omega, gamma_m, drive_E)
        for i in range(4):
            ystage[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                    + _A64 * k4[i] + _A65 * k5[i])
        rhs(t + h, ystage, k6, g_m, delta, omega, gamma_m, drive_E)
        for i in range(4):
            ynew[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                  + _B5 * k5[i] + _B6 * k6[i])
        t_new = target if landing else t + h
        rhs(t_new, ynew, k7, g_m, delta, omega, gamma_m, drive_E)
        for i in range(4):
            yerr[i] = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                           + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])

        err = _error_norm(yerr, y, ynew, rtol, atol)
        n_steps += 1

        if err <= 1.0:
            for i in range(4):
                y[i] = ynew[i]
                k1[i] = k7[i]
                if not np.isfinite(y[i]) or abs(y[i]) > DIVERGENCE_LIMIT:
                    return DIVERGED, t_new, n_steps
            if landing:
                t = target  # snap exactly; kills accumulated time error
                t_comp = 0.0
                for i in range(4):
                    out[i_sample, i] = y[i]
                i_sample += 1
            else:
                # Kahan summation keeps the drive phase accurate over ~1e6 steps.
                add = h - t_comp
                t_next = t + add
                t_comp = (t_next - t) - add
                t = t_next
            if err == 0.0:
                factor = 5.0
            else:
                factor = min(5.0, max(0.2, 0.9 * err ** -0.2))
            grown = h * factor
            if landing and grown < h_abs:
                grown = h_abs  # a clipped landing step must not stall growth
            h_abs = min(grown, max_step)
        else:
            h_abs = h * max(0.2, 0.9 * err ** -0.2)
            if h_abs <= 1.0e-14 * max(1.0, abs(t)):
                return STEP_FAILED, t, n_steps

    return OK, t, n_steps


@njit(cache=True, parallel=True)
def sde_paths(y_init, noise, coeffs, h, noise_std_cav, noise_std_mech,
              sample_steps, g_m, gamma_m, out):
    """Advance a batch of stochastic paths with RK4 drift and additive noise.

    Parameters
    ----------
    y_init : (n_traj, 4) states at the start of the chunk; updated in place
        to the end-of-chunk states so chunks can be strung together.
    noise : (n_traj, n_steps, 4) standard-normal increments.
    coeffs : (2*n_steps + 1, 5) precomputed drive/rotation coefficients
        [re_e, im_e, e2, sin(omega t), cos(omega t)] on the half-step grid.
    h : fixed step size.
    noise_std_cav, noise_std_mech : per-step increment standard deviations.
    sample_steps : sorted step indices (0-based, 0 = initial state) at which
        states are recorded.
    out : (n_traj, n_samples, 4) output buffer.

    Returns the number of trajectories that diverged (0 means all fine).
    """
    n_traj = y_init.shape[0]
    n_steps = noise.shape[1]
    n_samples = sample_steps.shape[0]
    n_bad = 0
    for j in prange(n_traj):
        x0 = y_init[j, 0]
        x1 = y_init[j, 1]
        x2 = y_init[j, 2]
        x3 = y_init[j, 3]
        isample = 0
        while isample < n_samples and sample_steps[isample] == 0:
            out[j, isample, 0] = x0
            out[j, isample, 1] = x1
            out[j, isample, 2] = x2
            out[j, isample, 3] = x3
            isample += 1
        bad = False
        for k in range(n_steps):
            # RK4 on the drift; coefficients at t_k, t_k + h/2, t_k + h.
            a0 = 0.0
            a1 = 0.0
            a2 = 0.0
            a3 = 0.0
            b0 = x0
            b1 = x1
            b2 = x2
            b3 = x3
            for stage in range(4):
                if stage == 0:
                    row = 2 * k
                    w = 1.0
                elif stage == 3:
                    row = 2 * k + 2
                    w = 1.0
                else:
                    row = 2 * k + 1
                    w = 2.0
                re_e = coeffs[row, 0]
                im_e = coeffs[row, 1]
                e2 = coeffs[row, 2]
                s = coeffs[row, 3]
                c = coeffs[row, 4]
                mech = c * b2 + s * b3
                cav = re_e * b0 + im_e * b1
                f0 = -b0 - 2.0 * g_m * im_e * mech - SQRT2 * re_e
                f1 = -b1 + 2.0 * g_m * re_e * mech - SQRT2 * im_e
                f2 = -gamma_m * b2 - 2.0 * g_m * s * cav - g_m * s * e2
                f3 = -gamma_m * b3 + 2.0 * g_m * c * cav + g_m * c * e2
                a0 += w * f0
                a1 += w * f1
                a2 += w * f2
                a3 += w * f3
                if stage < 3:
                    step = 0.5 * h if stage < 2 else h
                    b0 = x0 + step * f0
                    b1 = x1 + step * f1
                    b2 = x2 + step * f2
                    b3 = x3 + step * f3
            x0 += (h / 6.0) * a0 + noise_std_cav * noise[j, k, 0]
            x1 += (h / 6.0) * a1 + noise_std_cav * noise[j, k, 1]
            x2 += (h / 6.0) * a2 + noise_std_mech * noise[j, k, 2]
            x3 += (h / 6.0) * a3 + noise_std_mech * noise[j, k, 3]
            if abs(x0) > DIVERGENCE_LIMIT or abs(x1) > DIVERGENCE_LIMIT or \
               abs(x2) > DIVERGENCE_LIMIT or abs(x3) > DIVERGENCE_LIMIT or \
               not (np.isfinite(x0) and np.isfinite(x1)
                    and np.isfinite(x2) and np.isfinite(x3)):
                bad = True
                break
            while isample < n_samples and sample_steps[isample] == k + 1:
                out[j, isample, 0] = x0
                out[j, isample, 1] = x1
                out[j, isample, 2] = x2
                out[j, isample, 3] = x3
                isample += 1
        y_init[j, 0] = x0
        y_init[j, 1] = x1
        y_init[j, 2] = x2
        y_init[j, 3] = x3
        if bad:
            n_bad += 1
    return n_bad
