"""Parameter sweeps over the sensing signal, and the 1-D drive optimizer.

Every sweep reduces to repeated exact sensing-signal evaluations over a grid
of derived parameter sets.  A failing grid point (divergence, failed
stabilization, domain error) is recorded as a flagged row and the sweep
carries on; long scans stay useful even when an edge of the grid is sick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import IntegratorConfig
from .errors import NoInteriorMax, QuadsenseError
from .model import SystemParams
from .sensing import DEFAULT_SHIFT_SIGN, delta_xc_exact

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi


@dataclass(frozen=True)
class SweepSpec:
    """Echo of what a sweep scanned: axis name, grid and constraint."""

    axis: str
    values: tuple
    delta_omegas: tuple
    constraint: str


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    delta_omega: float
    delta_xc: float
    amp_ref: float
    amp_shifted: float
    status: str = "ok"


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple

    def column(self, delta_omega: float) -> list:
        """Rows of one delta_omega curve, ordered along the axis."""
        return [r for r in self.rows if r.delta_omega == delta_omega]

    def ok_rows(self) -> list:
        return [r for r in self.rows if r.status == "ok"]


def _check_values(values: Sequence[float], name: str):
    values = list(values)
    if not values:
        raise ValueError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    return values


def _run_grid(axis: str, constraint: str, values, delta_omegas,
              make_params: Callable[[float], SystemParams],
              delta_omega_of: Callable[[float, float], float],
              cfg: IntegratorConfig, shift_sign: int) -> SweepResult:
    rows = []
    for v in values:
        point_params = make_params(v)
        cache: dict = {}
        for dw_axis in delta_omegas:
            dw = delta_omega_of(v, dw_axis)
            try:
                res = delta_xc_exact(point_params, dw, cfg,
                                     shift_sign=shift_sign,
                                     _traj_cache=cache)
                rows.append(SweepRow(v, dw, res.delta_xc, res.amp_ref,
                                     res.amp_shifted))
            except QuadsenseError as exc:
                rows.append(SweepRow(v, dw, math.nan, math.nan, math.nan,
                                     status=f"error:{type(exc).__name__}"))
    spec = SweepSpec(axis, tuple(values), tuple(delta_omegas), constraint)
    return SweepResult(spec, tuple(rows))


def sweep_drive(base: SystemParams, E_values, delta_omegas,
                cfg: IntegratorConfig,
                shift_sign: int = DEFAULT_SHIFT_SIGN) -> SweepResult:
    """Sensing signal versus drive amplitude; J varies along the scan."""
    E_values = _check_values(E_values, "E_values")
    if any(E <= 0 for E in E_values):
        raise ValueError("drive amplitudes must be positive")
    return _run_grid("drive_E", "none", E_values, list(delta_omegas),
                     lambda E: replace(base, drive_E=E),
                     lambda _v, dw: dw, cfg, shift_sign)


def sweep_coupling(base: SystemParams, gm_values, delta_omegas,
                   cfg: IntegratorConfig,
                   shift_sign: int = DEFAULT_SHIFT_SIGN) -> SweepResult:
    """Sensing signal versus single-photon coupling at fixed E/delta."""
    gm_values = _check_values(gm_values, "gm_values")
    return _run_grid("g_m", "fix_E_over_Delta", gm_values, list(delta_omegas),
                     lambda g: replace(base, g_m=g),
                     lambda _v, dw: dw, cfg, shift_sign)


def sweep_sideband(base: SystemParams, omega_values, delta_ratio_values,
                   J_target: float, cfg: IntegratorConfig,
                   shift_sign: int = DEFAULT_SHIFT_SIGN) -> SweepResult:
    """Sensing signal versus sideband resolution omega_m/kappa.

    Per grid point the detuning matches the mechanical frequency
    (delta = omega_m) and the drive keeps J = g_m E / delta at ``J_target``,
    so E/delta is common to all curves.  The second grid axis is the
    relative deviation delta_omega/omega_m.
    """
    omega_values = _check_values(omega_values, "omega_values")
    if J_target <= 0:
        raise ValueError("J_target must be positive")

    def make(omega):
        return replace(base, omega_m=omega, delta=omega,
                       drive_E=J_target * omega / base.g_m)

    return _run_grid("sideband", "fix_J", omega_values,
                     list(delta_ratio_values), make,
                     lambda omega, ratio: ratio * omega, cfg, shift_sign)


def sweep_quality(base: SystemParams, Q_values, delta_omegas,
                  cfg: IntegratorConfig,
                  shift_sign: int = DEFAULT_SHIFT_SIGN) -> SweepResult:
    """Sensing signal versus mechanical quality factor Q = omega_m/gamma_m."""
    Q_values = _check_values(Q_values, "Q_values")
    return _run_grid("quality", "none", Q_values, list(delta_omegas),
                     lambda Q: replace(base, gamma_m=base.omega_m / Q),
                     lambda _v, dw: dw, cfg, shift_sign)


def find_optimal_drive(base: SystemParams, delta_omega: float, E_bracket,
                       cfg: IntegratorConfig,
                       shift_sign: int = DEFAULT_SHIFT_SIGN,
                       rel_tol: float = 1.0e-3,
                       objective: Optional[Callable[[float], float]] = None):
    """Locate the drive amplitude maximizing the sensing signal.

    An 8-point pre-scan of the bracket must show an interior maximum
    (otherwise NoInteriorMax: the bracket is bad, not the method), which is
    then refined by golden-section search to relative accuracy ``rel_tol``
    in E.  Returns (E_opt, delta_xc_opt); never worse than the best
    pre-scan point.  ``objective`` replaces the default sensing objective
    (used by tests with analytically known optima).
    """
    lo, hi = float(E_bracket[0]), float(E_bracket[1])
    if not 0 < lo < hi:
        raise ValueError("E_bracket must satisfy 0 < lo < hi")
    if objective is None:
        def objective(E):
            return delta_xc_exact(replace(base, drive_E=E), delta_omega,
                                  cfg, shift_sign=shift_sign).delta_xc

    grid = np.linspace(lo, hi, 8)
    scores = [objective(E) for E in grid]
    best = int(np.argmax(scores))
    if best in (0, len(grid) - 1):
        raise NoInteriorMax(
            f"pre-scan over [{lo:g}, {hi:g}] is maximal at the bracket edge "
            f"(index {best}); widen or shift the bracket")
    a, b = grid[best - 1], grid[best + 1]
    best_e, best_val = float(grid[best]), float(scores[best])

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > rel_tol * best_e:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = objective(c)
            e_new, v_new = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = objective(d)
            e_new, v_new = d, fd
        if v_new > best_val:
            best_e, best_val = float(e_new), float(v_new)
    return best_e, best_val
