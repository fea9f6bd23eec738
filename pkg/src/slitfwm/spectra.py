"""Two-photon-detuning spectra: doublet lineshapes and mode selection.

Structuring the pump splits the single gain resonance into a doublet
whose splitting grows linearly with pump power (light shift) and shrinks
with slit width.  Each resonance is tied to a spatial-mode family through
a transverse admittance filter: the lower resonance feeds the off-axis
(satellite) family, the upper one the near-axis (central pair) family.
Everything here is phenomenological and configured, not derived.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks


class DegenerateFit(ValueError):
    """Fit input carries no usable variation (e.g. all powers equal)."""


# anchor values for the default calibration: 8.5 MHz splitting at 200 mW
# through a 530 um slit, zero intercept, lower resonance at -14 MHz
_REF_SLIT = 530e-6
_REF_POWER = 0.2
_REF_SPLITTING = 8.5e6
_REF_KAPPA = _REF_SPLITTING / _REF_POWER  # 42.5 kHz/mW
_EQUAL_WEIGHT_SLIT = 455e-6
_DOUBLET_MIDPOINT = -9.75e6


def slit_splitting_slope(width: float) -> float:
    """Light-shift slope kappa(d) in Hz/W; splitting ~ 1/d, anchored."""
    return _REF_KAPPA * _REF_SLIT / width


def slit_weight_ratio(width: float) -> float:
    """Lower-resonance weight w1 relative to w2 = 1; equal at 455 um."""
    return (_EQUAL_WEIGHT_SLIT / width) ** 2


@dataclass(frozen=True)
class GainSpectrumModel:
    """Doublet gain lineshape with light-shift power dependence.

    ``resonance_center_1/2`` are the two-photon detunings of peak gain at
    ``reference_power``; at other powers the doublet keeps its midpoint
    and the splitting follows ``splitting_intercept + light_shift_slope*P``.
    Linewidths are FWHM.  ``ring_admittance_radius`` / widths shape the
    transverse filters pairing each resonance with its spatial family
    (radii in rad/m around the beam carrier); ``ring_center_floor`` is the
    fraction of satellite-family gain that still reaches the central pair.
    With ``structured=False`` the model is a single resonance at
    ``resonance_center_2`` and no admittance filtering (circular pump).
    """

    resonance_center_1: float = -14e6
    resonance_center_2: float = -5.5e6
    linewidth_1: float = 10e6
    linewidth_2: float = 10e6
    weight_1: float = slit_weight_ratio(_REF_SLIT)
    weight_2: float = 1.0
    light_shift_slope: float = slit_splitting_slope(_REF_SLIT)
    splitting_intercept: float = 0.0
    reference_power: float = _REF_POWER
    structured: bool = True
    gaussian_lineshape: bool = False
    ring_admittance_radius: float = 2.0 * np.pi * 2.0 / _REF_SLIT
    ring_admittance_width: float = 2.0 * np.pi * 1.0 / _REF_SLIT
    central_admittance_width: float = 2.0 * np.pi * 0.7 / _REF_SLIT
    ring_center_floor: float = 0.8

    def __post_init__(self):
        if self.linewidth_1 <= 0 or self.linewidth_2 <= 0:
            raise ValueError("linewidths must be positive")
        if self.weight_1 < 0 or self.weight_2 < 0:
            raise ValueError("weights must be non-negative")
        if self.structured and self.resonance_center_2 <= self.resonance_center_1:
            raise ValueError("resonance_center_2 must exceed resonance_center_1")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def for_slit(cls, width: float, midpoint: float = _DOUBLET_MIDPOINT, **overrides):
        """Model for a given slit width, using the anchored calibration."""
        slope = slit_splitting_slope(width)
        split_ref = slope * _REF_POWER
        base = cls(
            resonance_center_1=midpoint - 0.5 * split_ref,
            resonance_center_2=midpoint + 0.5 * split_ref,
            weight_1=slit_weight_ratio(width),
            light_shift_slope=slope,
            ring_admittance_radius=2.0 * np.pi * 2.0 / width,
            ring_admittance_width=2.0 * np.pi * 1.0 / width,
            central_admittance_width=2.0 * np.pi * 0.7 / width,
        )
        return replace(base, **overrides) if overrides else base

    @classmethod
    def circular(cls, center: float = -5.5e6, linewidth: float = 10e6):
        """Unstructured (circularly symmetric) pump: one resonance."""
        return cls(
            resonance_center_1=center - 1.0,  # unused; keep ordering invariant
            resonance_center_2=center,
            linewidth_2=linewidth,
            weight_1=0.0,
            structured=False,
        )

    # -- spectral pieces -------------------------------------------------------

    def splitting(self, pump_power: float) -> float:
        return self.splitting_intercept + self.light_shift_slope * pump_power

    def centers(self, pump_power: float) -> tuple[float, float]:
        """(omega_1, omega_2) at the given pump power (fixed midpoint)."""
        mid = 0.5 * (self.resonance_center_1 + self.resonance_center_2)
        half = 0.5 * self.splitting(pump_power)
        return mid - half, mid + half

    def _lobe(self, delta, center, fwhm):
        u = (np.asarray(delta, float) - center) / (0.5 * fwhm)
        if self.gaussian_lineshape:
            return np.exp(-np.log(2.0) * u * u)
        return 1.0 / (1.0 + u * u)

    def lobes(self, delta, pump_power: float):
        """Weighted lobe values (lower, upper), unnormalized."""
        if not self.structured:
            return 0.0 * np.asarray(delta, float), self.weight_2 * self._lobe(
                delta, self.resonance_center_2, self.linewidth_2
            )
        w1, w2 = self.centers(pump_power)
        return (
            self.weight_1 * self._lobe(delta, w1, self.linewidth_1),
            self.weight_2 * self._lobe(delta, w2, self.linewidth_2),
        )

    def _norm(self, pump_power: float) -> float:
        if not self.structured:
            return self.weight_2
        w1, w2 = self.centers(pump_power)
        span = max(self.linewidth_1, self.linewidth_2)
        grid = np.linspace(w1 - span, w2 + span, 2001)
        lo, hi = self.lobes(grid, pump_power)
        return float(np.max(lo + hi))

    def scalar_response(self, delta, pump_power: float):
        """Normalized spectral response summed over both lobes, max 1."""
        lo, hi = self.lobes(delta, pump_power)
        return (lo + hi) / self._norm(pump_power)

    # -- transverse admittance -------------------------------------------------

    def satellite_admittance(self, k_offset):
        """Off-axis family filter: ring around the carrier plus a floor."""
        k = np.asarray(k_offset, float)
        ring = np.exp(-((k - self.ring_admittance_radius) ** 2)
                      / (2.0 * self.ring_admittance_width**2))
        return self.ring_center_floor + (1.0 - self.ring_center_floor) * ring

    def central_admittance(self, k_offset):
        """Near-axis family filter: Gaussian at the carrier."""
        k = np.asarray(k_offset, float)
        return np.exp(-(k * k) / (2.0 * self.central_admittance_width**2))

    def admittance_blend(self, k_offset, delta, pump_power: float):
        """Lobe-weighted mix of the two family filters at this detuning."""
        if not self.structured:
            return np.ones_like(np.asarray(k_offset, float))
        lo, hi = self.lobes(delta, pump_power)
        tot = lo + hi
        if np.max(tot) == 0.0:
            return np.ones_like(np.asarray(k_offset, float))
        return (lo * self.satellite_admittance(k_offset)
                + hi * self.central_admittance(k_offset)) / tot


def spectral_response(delta, k_perp, pump_power: float, model: GainSpectrumModel):
    """Joint spectral-spatial response S(delta, k_perp) in [0, 1].

    ``k_perp`` is the transverse-wavevector offset from the beam carrier
    (scalar radial value or array, rad/m).  Each lobe is multiplied by its
    family admittance; the result is normalized so the maximum over both
    delta and k_perp is 1.
    """
    k = np.abs(np.asarray(k_perp, float))
    lo, hi = model.lobes(delta, pump_power)
    raw = lo * model.satellite_admittance(k) + hi * model.central_admittance(k)
    if not model.structured:
        return hi / model.weight_2 * np.ones_like(k)
    # normalize over the two family archetypes (on-ring and on-axis)
    w1, w2 = model.centers(pump_power)
    span = max(model.linewidth_1, model.linewidth_2)
    grid = np.linspace(w1 - span, w2 + span, 2001)
    glo, ghi = model.lobes(grid, pump_power)
    on_ring = glo * model.satellite_admittance(model.ring_admittance_radius) + ghi * (
        model.central_admittance(model.ring_admittance_radius)
    )
    on_axis = glo * model.satellite_admittance(0.0) + ghi * model.central_admittance(0.0)
    norm = max(float(np.max(on_ring)), float(np.max(on_axis)))
    return raw / norm


@dataclass(frozen=True)
class SpectralScan:
    """Per-region gain curves over a two-photon-detuning sweep."""

    deltas: np.ndarray
    labels: tuple[str, ...]
    curves: np.ndarray  # shape (n_regions, n_deltas)
    fitted_peaks: dict | None = None

    def curve(self, label: str) -> np.ndarray:
        return self.curves[self.labels.index(label)]


def scan_two_photon(config, deltas, spot_regions=None, threads: int = 1) -> SpectralScan:
    """Run the full pipeline per detuning and integrate camera regions.

    Thin wrapper over the experiment pipeline (lazy import keeps the
    module layering acyclic); see
    :func:`slitfwm.experiment.scan_two_photon` for details.
    """
    from .experiment import scan_two_photon as _scan

    return _scan(config, deltas, spot_regions=spot_regions, threads=threads)


def splitting_vs_power(powers, model: GainSpectrumModel):
    """[(P, omega_2 - omega_1)] from the model's light-shift law."""
    out = []
    for p in powers:
        w1, w2 = model.centers(float(p))
        out.append((float(p), w2 - w1))
    return out


def fit_linear(points) -> tuple[float, float, float]:
    """Least-squares line through (x, y) points: (slope, intercept, R^2)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise DegenerateFit("need at least two points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0.0:
        raise DegenerateFit("all abscissae are equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def _double_lorentzian(delta, a1, c1, g1, a2, c2, g2, base):
    return (
        a1 / (1.0 + ((delta - c1) / (0.5 * g1)) ** 2)
        + a2 / (1.0 + ((delta - c2) / (0.5 * g2)) ** 2)
        + base
    )


def fit_doublet(deltas, values) -> dict:
    """Fit a two-Lorentzian doublet; returns centers, widths, splitting.

    The initial guess places the lobes at the two highest well-separated
    samples.  Raises DegenerateFit when the curve carries no variation.
    """
    d = np.asarray(deltas, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.ptp(v) == 0.0:
        raise DegenerateFit("flat curve")
    scale = v.max() - v.min()
    span = np.ptp(d)
    i_max = int(np.argmax(v))
    guess = [
        0.7 * scale, d[i_max] - 0.05 * span, 0.15 * span,
        0.7 * scale, d[i_max] + 0.05 * span, 0.15 * span,
        v.min(),
    ]
    popt, _ = curve_fit(_double_lorentzian, d, v, p0=guess, maxfev=20000)
    a1, c1, g1, a2, c2, g2, base = popt
    if c1 > c2:
        a1, c1, g1, a2, c2, g2 = a2, c2, g2, a1, c1, g1
    return {
        "amplitude_1": a1, "center_1": c1, "fwhm_1": abs(g1),
        "amplitude_2": a2, "center_2": c2, "fwhm_2": abs(g2),
        "baseline": base, "splitting": c2 - c1,
    }


def count_peaks(values, rel_prominence: float = 0.05) -> int:
    """Number of local maxima with prominence above a fraction of range."""
    v = np.asarray(values, dtype=float)
    if np.ptp(v) == 0.0:
        return 0
    peaks, _ = find_peaks(v, prominence=rel_prominence * np.ptp(v))
    return int(len(peaks))
