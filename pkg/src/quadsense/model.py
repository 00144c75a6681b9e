"""Physical parameter set, drive envelope and interaction-frame offsets.

All rates are expressed in units of the cavity decay rate kappa, and time in
1/kappa.  The stored ``kappa`` value (in Hz) is used only to convert results
back to physical units at the I/O boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import WeakCouplingWarning

# J/kappa at or above this is outside the weak effective-coupling regime the
# linearized model is derived for; runs are allowed but flagged.
WEAK_COUPLING_LIMIT = 0.1

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SystemParams:
    """Cavity-optomechanics parameters, normalized to the cavity decay rate.

    Attributes
    ----------
    g_m : float
        Single-photon optomechanical coupling (units of kappa).
    delta : float
        Drive detuning omega_c - omega_L (units of kappa); must be positive
        (red-detuned operation, required for stable dynamics).
    omega_m : float
        Mechanical resonance frequency (units of kappa).
    gamma_m : float
        Mechanical damping rate (units of kappa).
    drive_E : float
        CW drive amplitude (units of kappa).
    n_th : float
        Thermal occupation of the mechanical bath.  Only the stochastic
        simulation consumes it; mean-field dynamics are independent of it.
    kappa : float
        Physical cavity decay rate in Hz; the internal unit.  Only used to
        report physical units at the I/O boundary.
    """

    g_m: float
    delta: float
    omega_m: float
    gamma_m: float
    drive_E: float
    n_th: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.gamma_m > 0:
            raise ValueError(f"gamma_m must be positive, got {self.gamma_m}")
        if not self.omega_m > 0:
            raise ValueError(f"omega_m must be positive, got {self.omega_m}")
        if not self.delta > 0:
            raise ValueError(
                f"delta must be positive (red-detuned drive), got {self.delta}"
            )
        if self.drive_E < 0:
            raise ValueError(f"drive_E must be non-negative, got {self.drive_E}")
        if self.g_m < 0:
            raise ValueError(f"g_m must be non-negative, got {self.g_m}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be non-negative, got {self.n_th}")
        for name in ("g_m", "delta", "omega_m", "gamma_m", "drive_E", "n_th", "kappa"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.coupling_J >= WEAK_COUPLING_LIMIT:
            warnings.warn(
                f"J = g_m*drive_E/delta = {self.coupling_J:.3g} is not << 1; "
                "the linearized dynamics may not be trustworthy here",
                WeakCouplingWarning,
                stacklevel=2,
            )

    @property
    def coupling_J(self) -> float:
        """Effective coupling J = g_m * E / delta (units of kappa)."""
        return self.g_m * self.drive_E / self.delta

    @property
    def quality_factor(self) -> float:
        """Mechanical quality factor Q_m = omega_m / gamma_m."""
        return self.omega_m / self.gamma_m


class FrameOffset(NamedTuple):
    """Real quadrature offsets restoring the lab-like frame."""

    x_off: ArrayLike
    p_off: ArrayLike


def drive_envelope(t: ArrayLike, params: SystemParams) -> Union[complex, np.ndarray]:
    """Coherent intracavity drive amplitude (i*E/delta) * (1 - exp(i*delta*t)).

    Accepts a scalar time or an array of times (in 1/kappa, t >= 0) and
    returns the complex envelope.  Periodic with period 2*pi/delta and
    bounded in modulus by 2*E/delta.
    """
    t = _check_time(t)
    return (1j * params.drive_E / params.delta) * (1.0 - np.exp(1j * params.delta * t))


def envelope_re_im_sq(t: ArrayLike, params: SystemParams):
    """Real part, imaginary part and squared modulus of the drive envelope.

    Convenience used by the dynamics builders; algebraically
    Re = (E/delta)*sin(delta*t), Im = (E/delta)*(1 - cos(delta*t)),
    |E(t)|^2 = 2*(E/delta)^2*(1 - cos(delta*t)).
    """
    t = _check_time(t)
    amp = params.drive_E / params.delta
    phase = params.delta * t
    re = amp * np.sin(phase)
    im = amp * (1.0 - np.cos(phase))
    return re, im, re * re + im * im


def frame_offset(t: ArrayLike, params: SystemParams) -> FrameOffset:
    """Quadrature displacements induced by the drive in the oscillating frame.

    x_off = (e^{-i*delta*t} E(t) + c.c.)/sqrt(2) and
    p_off = -i (e^{-i*delta*t} E(t) - c.c.)/sqrt(2); both real, both zero at
    t = 0, and identically zero for a switched-off drive.  Used only to
    reconstruct full-frame quadratures, never inside the sensing signal.
    """
    t = _check_time(t)
    rotated = np.exp(-1j * params.delta * t) * drive_envelope(t, params)
    return FrameOffset(math.sqrt(2.0) * np.real(rotated),
                       math.sqrt(2.0) * np.imag(rotated))


def _check_time(t: ArrayLike) -> ArrayLike:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    if t.ndim == 0:
        return float(t)
    return t
