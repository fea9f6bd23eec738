"""Soft-gain-aperture four-wave mixing.

The pump's transverse intensity profile acts as a position-dependent
parametric gain for a seeded probe/conjugate pair.  Locally the pair obeys
the two-mode amplifier input-output relations

    probe_out     = cosh(G) * probe_in
    conjugate_out = sinh(G) * conj(probe_in)

with G(x, y) = g_eff * L * |pump(x, y)|^2 * S(delta, P), where S is the
two-photon spectral response supplied by a gain-spectrum model.  Phase
matching enters as a multiplicative transverse-frequency filter on the
amplified part: a sinc^2 penalty of the longitudinal wavevector mismatch,
evaluated at the most favorable transverse-momentum assignment the pump's
own spatial structure can supply, times the model's mode-admittance
filters.  ``split_step_gain`` instead resolves the cell length and lets
diffraction and gain interleave; there the mismatch accumulates through
the propagation phases and no sinc^2 filter is applied.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.signal import find_peaks

from .field import ComplexField2D, total_power
from .propagation import PropagationPlan, propagate, propagate_to


class GridMismatch(ValueError):
    """Pump and probe fields do not share a grid/wavelength."""


class NonConvergenceWarning(UserWarning):
    """Split-step doubling test changed the output more than the bound."""


@dataclass(frozen=True)
class MediumParams:
    """Vapor-cell gain medium (phenomenological).

    ``gain_strength`` converts pump intensity to gain per unit length,
    (m^2/W)/m, quoted at ``reference_detuning``; the gain scales as
    (reference_detuning / one_photon_detuning) ** detuning_exponent.
    ``dispersion_coefficient`` scales the medium phase offset that moves
    the phase-matching ring onto the probe crossing angle (1.0 = ring
    exactly at the design angle, 0.0 = purely geometric closure).
    ``dispersion_asymmetry`` adds an odd-in-kx term (output curvature).
    ``temperature_c`` is carried as metadata only.
    """

    cell_length: float = 25e-3
    cell_center_z: float = 76e-3
    one_photon_detuning: float = 2e9
    temperature_c: float = 125.0
    gain_strength: float = 7.2918e-5
    dispersion_coefficient: float = 1.0
    dispersion_asymmetry: float = 0.0
    reference_detuning: float = 2e9
    detuning_exponent: float = 2.0

    def __post_init__(self):
        if self.cell_length <= 0:
            raise ValueError("cell length must be positive")
        if self.gain_strength < 0:
            raise ValueError("gain strength must be non-negative")
        if self.one_photon_detuning <= 0:
            raise ValueError("one-photon detuning must be positive (blue side)")

    def effective_gain_strength(self) -> float:
        scale = (self.reference_detuning / self.one_photon_detuning) ** self.detuning_exponent
        return self.gain_strength * scale


@dataclass(frozen=True)
class ProbeParams:
    """Seed probe parameters.

    ``two_photon_detuning`` is the scan axis of the gain resonances;
    values beyond ``validity_window`` are rejected because the
    phenomenological lineshapes have no meaning there.
    """

    two_photon_detuning: float = -14e6
    crossing_angle: float = np.deg2rad(0.6)
    seed_power: float = 100e-6
    validity_window: float = 100e6

    def __post_init__(self):
        if abs(self.two_photon_detuning) >= self.validity_window:
            raise ValueError(
                f"|two-photon detuning| = {abs(self.two_photon_detuning):.3g} Hz "
                f"outside the model validity window {self.validity_window:.3g} Hz"
            )


def phase_mismatch(
    k_perp,
    medium: MediumParams,
    probe: ProbeParams,
    wavelength: float,
    pump_tilt: float = 0.0,
):
    """Longitudinal wavevector mismatch Delta k_z (rad/m).

    ``k_perp`` is the probe component's transverse wavevector, either a
    scalar kx, an (kx, ky) pair, or arrays thereof.  Uses the closure
    2 k_pump = k_probe + k_conjugate with the conjugate taking the
    transverse remainder, minus the medium dispersion offset
    ``dispersion_coefficient * 2k(1 - cos(crossing_angle))`` and plus the
    odd curvature term ``dispersion_asymmetry * kx^3 / k^2``.
    """
    if isinstance(k_perp, tuple):
        kx, ky = np.asarray(k_perp[0], float), np.asarray(k_perp[1], float)
    else:
        kx, ky = np.asarray(k_perp, float), 0.0
    k = 2.0 * np.pi / wavelength

    def kz(qx, qy):
        q2 = qx * qx + qy * qy
        return np.sqrt(np.maximum(k * k - q2, 0.0))

    kpx = k * np.sin(pump_tilt)
    kpz = np.sqrt(k * k - kpx * kpx)
    dkz = 2.0 * kpz - kz(kx, ky) - kz(2.0 * kpx - kx, -np.asarray(ky, float))
    dkz = dkz - medium.dispersion_coefficient * 2.0 * k * (1.0 - np.cos(probe.crossing_angle))
    if medium.dispersion_asymmetry != 0.0:
        dkz = dkz + medium.dispersion_asymmetry * kx**3 / (k * k)
    return dkz if np.ndim(dkz) else float(dkz)


def structure_wavevectors(pump: ComplexField2D, max_kicks: int = 4) -> tuple[float, ...]:
    """Significant spatial frequencies (rad/m, along x) of the pump intensity.

    Projects |pump|^2 onto x and collects non-DC peaks of its Fourier
    magnitude above 2% of the DC term, strongest first.  Returns an empty
    tuple when the profile is unstructured (no such local maximum), e.g.
    for a plain Gaussian.
    """
    profile = np.sum(np.abs(pump.amplitudes) ** 2, axis=1)
    if profile.max() <= 0.0:
        return ()
    spec = np.abs(np.fft.rfft(profile))
    peaks, props = find_peaks(spec[1:], height=0.02 * spec[0])
    if len(peaks) == 0:
        return ()
    order = np.argsort(props["peak_heights"])[::-1][:max_kicks]
    freqs = (peaks[order] + 1) / (pump.grid.nx * pump.grid.dx)
    return tuple(2.0 * np.pi * f for f in freqs)


def _kspace_axes(field: ComplexField2D):
    g = field.grid
    kx = 2.0 * np.pi * sfft.fftfreq(g.nx, g.dx)
    ky = 2.0 * np.pi * sfft.fftfreq(g.ny, g.dy)
    return kx[:, None], ky[None, :]


def _matching_filter(
    field: ComplexField2D,
    medium: MediumParams,
    probe: ProbeParams,
    kicks: tuple[float, ...],
    mirror: bool,
) -> np.ndarray:
    """sinc^2 phase-matching penalty with pump-structure momentum relief.

    The pump's periodic structure can hand transverse momentum to the
    pair in quanta of its dominant spatial frequency, so the penalty is
    evaluated at every kick-shifted wavevector and the most favorable
    assignment wins.  ``mirror`` evaluates at -k for the conjugate branch.
    """
    kx, ky = _kspace_axes(field)
    if mirror:
        kx, ky = -kx, -ky
    half_l = 0.5 * medium.cell_length
    best = None
    for kick in kicks:
        dkz = phase_mismatch((kx - kick, ky), medium, probe, field.wavelength)
        val = np.sinc(dkz * half_l / np.pi) ** 2
        best = val if best is None else np.maximum(best, val)
    return best


def _admittance_filters(field, spectrum, probe, pump_power, mirror: bool):
    """Mode-family admittance of the spectrum model, on the k-grid."""
    kx, ky = _kspace_axes(field)
    if mirror:
        kx, ky = -kx, -ky
    carrier = field.k * np.sin(probe.crossing_angle)
    offset = np.sqrt((kx - carrier) ** 2 + ky**2)
    return spectrum.admittance_blend(offset, probe.two_photon_detuning, pump_power)


def _filtered(increment: np.ndarray, filt: np.ndarray | None) -> np.ndarray:
    if filt is None:
        return increment
    return sfft.ifft2(sfft.fft2(increment) * filt)


def single_pass_gain(
    pump: ComplexField2D,
    probe_in: ComplexField2D,
    medium: MediumParams,
    probe_params: ProbeParams,
    spectrum=None,
    *,
    pump_power: float | None = None,
    phase_matching: bool = True,
    structure_kicks: tuple[float, ...] | None = None,
    probe_phase: float = 0.0,
    conjugate_phase: float = 0.0,
) -> tuple[ComplexField2D, ComplexField2D]:
    """Amplify the probe in a single thin-gain pass.

    The cell is treated as a gain sheet at its center plane: ``pump`` is
    the pump field there, and the full cell length enters through
    G = g_eff * L * |pump|^2 * S.  Returns (probe_out, conjugate_out) at
    the same plane.  ``pump_power`` is the power dial used for the light
    shift (defaults to the integrated power of the supplied pump field).
    ``spectrum=None`` means a flat unit spectral response, and
    ``phase_matching=False`` disables the sinc^2 penalty; together they
    give the bare hyperbolic input-output map (the no-mismatch limit, in
    which |probe_out|^2 - |conjugate_out|^2 = |probe_in|^2 pointwise).
    """
    if pump.grid != probe_in.grid:
        raise GridMismatch("pump and probe must share a grid")
    if pump.wavelength != probe_in.wavelength:
        raise GridMismatch("pump and probe must share a wavelength")

    power = total_power(pump) if pump_power is None else pump_power
    s_scalar = 1.0 if spectrum is None else spectrum.scalar_response(
        probe_params.two_photon_detuning, power
    )
    g_map = (
        medium.effective_gain_strength()
        * medium.cell_length
        * np.abs(pump.amplitudes) ** 2
        * s_scalar
    )
    probe_inc = (np.cosh(g_map) - 1.0) * probe_in.amplitudes
    conj_amp = np.sinh(g_map) * np.conj(probe_in.amplitudes)

    filt_pr = filt_cj = None
    if phase_matching:
        if structure_kicks is None:
            found = structure_wavevectors(pump)
        else:
            found = tuple(structure_kicks)
        kicks = (0.0,) + tuple(q for kick in found for q in (kick, -kick))
        filt_pr = _matching_filter(probe_in, medium, probe_params, kicks, mirror=False)
        filt_cj = _matching_filter(probe_in, medium, probe_params, kicks, mirror=True)
    if spectrum is not None and getattr(spectrum, "structured", False):
        adm_pr = _admittance_filters(probe_in, spectrum, probe_params, power, mirror=False)
        adm_cj = _admittance_filters(probe_in, spectrum, probe_params, power, mirror=True)
        filt_pr = adm_pr if filt_pr is None else filt_pr * adm_pr
        filt_cj = adm_cj if filt_cj is None else filt_cj * adm_cj

    probe_out = probe_in.amplitudes + _filtered(probe_inc, filt_pr)
    conj_out = _filtered(conj_amp, filt_cj)
    if probe_phase != 0.0:
        probe_out = probe_out * np.exp(1j * probe_phase)
    if conjugate_phase != 0.0:
        conj_out = conj_out * np.exp(1j * conjugate_phase)
    return probe_in.with_amplitudes(probe_out), probe_in.with_amplitudes(conj_out)


def split_step_gain(
    pump_at_slit: ComplexField2D,
    probe_in: ComplexField2D,
    medium: MediumParams,
    probe_params: ProbeParams,
    spectrum=None,
    n_steps: int = 64,
    *,
    pump_power: float | None = None,
    diffraction: bool = True,
    pump_depletion: bool = False,
    verify_convergence: bool = False,
) -> tuple[ComplexField2D, ComplexField2D, ComplexField2D]:
    """Resolve the cell: alternate free propagation and local gain.

    Inputs are fields at the slit plane (z = 0).  All three fields are
    propagated to the cell entrance, then Strang-split through the cell
    (half-step diffraction, full gain step with the instantaneous pump
    profile, half-step diffraction), and returned at the cell exit.  The
    longitudinal phase mismatch accumulates through the carrier phases of
    the generated conjugate, so no sinc^2 filter is applied here; the
    spectrum model's mode admittance still filters each gain increment.

    With ``diffraction=False`` the whole cell collapses back to the
    single thin-gain pass (the defining reduction), and the fields are
    used exactly as given.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if pump_at_slit.grid != probe_in.grid:
        raise GridMismatch("pump and probe must share a grid")

    if not diffraction:
        pr, cj = single_pass_gain(
            pump_at_slit, probe_in, medium, probe_params, spectrum, pump_power=pump_power
        )
        return pr, cj, pump_at_slit.with_amplitudes(pump_at_slit.amplitudes.copy())

    if verify_convergence:
        coarse = split_step_gain(
            pump_at_slit, probe_in, medium, probe_params, spectrum, n_steps,
            pump_power=pump_power, diffraction=True, pump_depletion=pump_depletion,
        )
        fine = split_step_gain(
            pump_at_slit, probe_in, medium, probe_params, spectrum, 2 * n_steps,
            pump_power=pump_power, diffraction=True, pump_depletion=pump_depletion,
        )
        num = np.linalg.norm(fine[0].amplitudes - coarse[0].amplitudes)
        den = np.linalg.norm(fine[0].amplitudes)
        if den > 0 and num / den >= 1e-3:
            warnings.warn(
                f"split-step doubling test: relative change {num / den:.2e} >= 1e-3; "
                f"increase n_steps",
                NonConvergenceWarning,
                stacklevel=2,
            )
        return fine

    power = total_power(pump_at_slit) if pump_power is None else pump_power
    s_scalar = 1.0 if spectrum is None else spectrum.scalar_response(
        probe_params.two_photon_detuning, power
    )
    g_len = medium.effective_gain_strength() * s_scalar
    dz = medium.cell_length / n_steps
    z_entrance = medium.cell_center_z - 0.5 * medium.cell_length

    pump = propagate_to(pump_at_slit, z_entrance)
    pr = propagate_to(probe_in, z_entrance).amplitudes
    cj = np.zeros_like(pr)

    adm_pr = adm_cj = None
    if spectrum is not None and getattr(spectrum, "structured", False):
        adm_pr = _admittance_filters(probe_in, spectrum, probe_params, power, mirror=False)
        adm_cj = _admittance_filters(probe_in, spectrum, probe_params, power, mirror=True)

    # exact within-step integral of the mismatch carrier: a midpoint sample
    # alone converges only first order, the sinc factor restores second
    kx, ky = _kspace_axes(probe_in)
    for mirror in (False, True):
        sgn = -1.0 if mirror else 1.0
        dkz = phase_mismatch((sgn * kx, sgn * ky), medium, probe_params, probe_in.wavelength)
        step_sinc = np.sinc(dkz * (0.5 * medium.cell_length / n_steps) / np.pi)
        if mirror:
            adm_cj = step_sinc if adm_cj is None else adm_cj * step_sinc
        else:
            adm_pr = step_sinc if adm_pr is None else adm_pr * step_sinc

    k = probe_in.k
    dk0 = medium.dispersion_coefficient * 2.0 * k * (1.0 - np.cos(probe_params.crossing_angle))
    half = PropagationPlan(0.5 * dz)
    carrier = probe_in.with_amplitudes  # shortcut for rebuilding fields

    for step in range(n_steps):
        pump = propagate(pump, half)
        pr = propagate(carrier(pr), half).amplitudes
        cj = propagate(carrier(cj), half).amplitudes

        z_mid = (step + 0.5) * dz - 0.5 * medium.cell_length
        phase = np.exp(1j * (2.0 * k - dk0) * z_mid)
        g_map = g_len * dz * np.abs(pump.amplitudes) ** 2
        ch, sh = np.cosh(g_map), np.sinh(g_map)
        new_pr = ch * pr + phase * sh * np.conj(cj)
        new_cj = ch * cj + phase * sh * np.conj(pr)
        if pump_depletion:
            added = (np.abs(new_pr) ** 2 - np.abs(pr) ** 2) + (
                np.abs(new_cj) ** 2 - np.abs(cj) ** 2
            )
            pump_i = np.abs(pump.amplitudes) ** 2
            keep = np.sqrt(np.clip(1.0 - np.divide(
                added, pump_i, out=np.zeros_like(pump_i), where=pump_i > 0
            ), 0.0, None))
            pump = pump.with_amplitudes(pump.amplitudes * keep)
        pr = pr + _filtered(new_pr - pr, adm_pr)
        cj = cj + _filtered(new_cj - cj, adm_cj)

        pump = propagate(pump, half)
        pr = propagate(carrier(pr), half).amplitudes
        cj = propagate(carrier(cj), half).amplitudes

    return carrier(pr), carrier(cj), pump
