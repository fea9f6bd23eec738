"""End-to-end simulation pipeline: source -> slit -> cell -> camera.

The coordinate convention: the slit sits at z = 0, the cell is centered
``cell.center_z`` downstream, the camera ``camera.distance`` after the
cell center.  The pump propagates along z; the probe crosses it at the
cell center with the configured angle, so on the camera the amplified
probe lands at +x and the conjugate at -x.  Scans over two-photon
detuning reuse the propagated pump and parallelize over detuning points;
results are merged by index so thread count never changes the output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .field import ComplexField2D, Grid2D, apply_aperture, intensity_image, make_gaussian
from .gain import single_pass_gain, split_step_gain
from .imaging import SpotSet, detect_spots, integrate_regions, label_six_spots
from .propagation import far_field, padded_propagate, propagate_to
from .spectra import SpectralScan


def pump_at_slit(config: ExperimentConfig) -> ComplexField2D:
    """Pump field right after the (optional) slit."""
    beam = make_gaussian(config.pump_spec(), config.grid(), config.wavelength)
    slit = config.slit()
    return beam if slit is None else apply_aperture(beam, slit)


def pump_at_cell(config: ExperimentConfig) -> ComplexField2D:
    return propagate_to(pump_at_slit(config), config["cell.center_z"])


def probe_at_cell(config: ExperimentConfig) -> ComplexField2D:
    """Seed probe at the cell center plane (where the beams cross)."""
    return make_gaussian(config.probe_spec(), config.grid(), config.wavelength)


def probe_at_slit_plane(config: ExperimentConfig) -> ComplexField2D:
    """Seed probe at z = 0, offset so it crosses the axis at the cell center."""
    z = config["cell.center_z"]
    offset = (-z * np.tan(config["probe.crossing_angle"]), 0.0)
    return make_gaussian(config.probe_spec(center_offset=offset),
                         config.grid(), config.wavelength)


@dataclass(frozen=True)
class CameraFrame:
    """One simulated camera exposure: total and per-beam intensities."""

    image: np.ndarray
    probe_image: np.ndarray
    conjugate_image: np.ndarray
    two_photon_detuning: float
    grid: Grid2D


def simulate_camera_frame(
    config: ExperimentConfig,
    two_photon_detuning: float | None = None,
    pump_cell: ComplexField2D | None = None,
) -> CameraFrame:
    """Run the interaction and image both beams at the camera plane.

    The probe and conjugate differ by a few GHz, so the camera sees their
    intensities added incoherently.  With ``run.steps`` = 0 the cell is a
    single gain sheet at its center (the soft-aperture model); a positive
    step count runs the split-step variant from the slit plane.  By
    default the camera records the far-field pattern (Fourier plane of a
    lens with focal length ``camera.distance``); ``camera.farfield =
    false`` selects direct free-space propagation to that plane instead.
    The returned frame carries its own camera-plane grid.
    """
    delta = config["probe.detuning"] if two_photon_detuning is None else two_photon_detuning
    medium = config.medium()
    probe_params = config.probe_params(delta)
    model = config.spectrum_model()
    pump_power = config["pump.power"]
    n_steps = config["run.steps"]
    pad = config["camera.pad"]

    if n_steps > 0:
        pr, cj, _ = split_step_gain(
            pump_at_slit(config), probe_at_slit_plane(config),
            medium, probe_params, model, n_steps, pump_power=pump_power,
        )
        z_cam = config["camera.distance"] - 0.5 * medium.cell_length
    else:
        pump = pump_at_cell(config) if pump_cell is None else pump_cell
        pr, cj = single_pass_gain(
            pump, probe_at_cell(config), medium, probe_params, model,
            pump_power=pump_power,
        )
        z_cam = config["camera.distance"]

    if config["camera.farfield"]:
        pr_cam = far_field(pr, z_cam, pad=pad)
        cj_cam = far_field(cj, z_cam, pad=pad)
    else:
        pr_cam = padded_propagate(pr, z_cam, pad=pad)
        cj_cam = padded_propagate(cj, z_cam, pad=pad)
    probe_img = intensity_image(pr_cam)
    conj_img = intensity_image(cj_cam)
    return CameraFrame(probe_img + conj_img, probe_img, conj_img, delta, pr_cam.grid)


def reference_spot_regions(config: ExperimentConfig, n_expected: int = 6) -> SpotSet:
    """Detect the six-spot geometry on a reference frame at the satellite
    resonance and relabel it I1..I6."""
    model = config.spectrum_model()
    delta_ref = model.centers(config["pump.power"])[0] if model.structured \
        else config["probe.detuning"]
    frame = simulate_camera_frame(config, delta_ref)
    g = frame.grid
    spots = detect_spots(
        frame.image, (g.dx, g.dy),
        min_separation=config["analysis.min_separation"],
        n_expected=n_expected,
        target_area=config["analysis.target_area"],
        rel_threshold=config["analysis.rel_threshold"],
    )
    if len(spots.regions) == 6:
        spots = label_six_spots(spots)
    return spots


def scan_two_photon(
    config: ExperimentConfig,
    deltas,
    spot_regions: SpotSet | None = None,
    threads: int = 1,
) -> SpectralScan:
    """Camera-plane region intensities versus two-photon detuning.

    Runs one frame per detuning (deterministic; parallel over detunings
    when ``threads`` > 1, merged by index) and integrates each region of
    ``spot_regions`` (auto-detected six-spot geometry when omitted).
    """
    deltas = np.asarray(sorted(float(d) for d in deltas))
    if spot_regions is None:
        spot_regions = reference_spot_regions(config)
    pump = None if config["run.steps"] > 0 else pump_at_cell(config)

    def one(delta: float) -> np.ndarray:
        return simulate_camera_frame(config, delta, pump_cell=pump).image

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            frames = list(pool.map(one, deltas))
    else:
        frames = [one(d) for d in deltas]
    curves = integrate_regions(frames, spot_regions)
    return SpectralScan(deltas, spot_regions.labels, curves)


def gain_curve(scan: SpectralScan, label: str, seed_level: float | None = None):
    """Convert a probe-region intensity curve into a gain-exponent curve.

    For a probe region the curve is seed + amplified signal; dividing by
    the off-resonance seed level and inverting cosh^2 turns it back into
    the bare gain exponent, which is what the doublet fit wants.
    ``seed_level`` defaults to the curve minimum.
    """
    values = scan.curve(label)
    base = float(values.min()) if seed_level is None else seed_level
    if base <= 0:
        raise ValueError("seed level must be positive for a probe region")
    ratio = np.maximum(values / base, 1.0)
    return np.arccosh(np.sqrt(ratio))
