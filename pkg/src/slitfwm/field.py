"""Complex scalar fields on a uniform transverse grid.

The field sampling convention is shared by every other module: amplitudes
are stored in units of sqrt(W/m^2), so ``|a|^2`` is an intensity map and
``sum(|a|^2) * dx * dy`` is optical power in watts.  Axis 0 of the amplitude
array runs along x, axis 1 along y, and the coordinate origin sits at the
grid center (sample index n//2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf


class GridTooSmall(ValueError):
    """Grid captures too little of the requested beam's power."""

    def __init__(self, captured_fraction: float, required_fraction: float):
        self.captured_fraction = captured_fraction
        self.required_fraction = required_fraction
        super().__init__(
            f"grid captures {captured_fraction:.6f} of the beam power, "
            f"need at least {required_fraction:.6f}; enlarge the grid or "
            f"shrink the beam"
        )


@dataclass(frozen=True)
class Grid2D:
    """Uniform 2-D sampling grid, origin at the center.

    Parameters
    ----------
    nx, ny : int
        Sample counts, each even and >= 2 (keeps the frequency grid
        symmetric around zero).
    dx, dy : float
        Sample pitch in meters.
    """

    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2 or self.nx % 2 or self.ny % 2:
            raise ValueError("nx and ny must be even and >= 2")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("dx and dy must be positive")

    @property
    def extent_x(self) -> float:
        return self.nx * self.dx

    @property
    def extent_y(self) -> float:
        return self.ny * self.dy

    @property
    def pixel_area(self) -> float:
        return self.dx * self.dy

    def x(self) -> np.ndarray:
        """x sample coordinates, shape (nx,)."""
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    def y(self) -> np.ndarray:
        """y sample coordinates, shape (ny,)."""
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) coordinate arrays of shape (nx, ny)."""
        return np.meshgrid(self.x(), self.y(), indexing="ij")


@dataclass(frozen=True)
class ComplexField2D:
    """Sampled complex optical field envelope.

    ``amplitudes`` has shape (grid.nx, grid.ny) and units sqrt(W/m^2).
    Instances are treated as immutable; operations return new fields.
    """

    grid: Grid2D
    wavelength: float
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"amplitude shape {a.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        object.__setattr__(self, "amplitudes", a)

    @property
    def k(self) -> float:
        """Vacuum wavenumber 2*pi/wavelength (rad/m)."""
        return 2.0 * np.pi / self.wavelength

    def with_amplitudes(self, amplitudes: np.ndarray) -> "ComplexField2D":
        return replace(self, amplitudes=amplitudes)

    def power(self) -> float:
        return total_power(self)


@dataclass(frozen=True)
class BeamSpec:
    """Gaussian beam description.

    ``waist_diameter_1e2`` is the full 1/e^2 intensity diameter (the field
    amplitude radius w0 is half of it).  ``tilt_angle`` tilts the
    propagation direction in the x-z plane.
    """

    waist_diameter_1e2: float
    power: float
    center_offset: tuple[float, float] = (0.0, 0.0)
    tilt_angle: float = 0.0

    def __post_init__(self):
        if self.waist_diameter_1e2 <= 0:
            raise ValueError("waist diameter must be positive")
        if self.power < 0:
            raise ValueError("power must be non-negative")

    @property
    def w0(self) -> float:
        return 0.5 * self.waist_diameter_1e2


@dataclass(frozen=True)
class SlitSpec:
    """Rectangular slit, opening of width ``width_d`` along x.

    ``height`` bounds the opening along y; ``None`` means unbounded
    (pure 1-D structuring).  ``edge_width`` > 0 replaces the hard edges
    with erf-shaped ramps of that 1/e half-width.
    """

    width_d: float
    height: float | None = None
    center_offset: float = 0.0
    edge_width: float = 0.0

    def __post_init__(self):
        if self.width_d <= 0:
            raise ValueError("slit width must be positive")
        if self.height is not None and self.height <= 0:
            raise ValueError("slit height must be positive or None")
        if self.edge_width < 0:
            raise ValueError("edge width must be non-negative")


def _gaussian_captured_fraction(spec: BeamSpec, grid: Grid2D) -> float:
    """Analytic fraction of the beam power inside the grid footprint."""
    w0 = spec.w0
    x0, y0 = spec.center_offset
    hx, hy = 0.5 * grid.extent_x, 0.5 * grid.extent_y

    def axis_fraction(h, c):
        s = np.sqrt(2.0) / w0
        return 0.5 * (erf(s * (h - c)) - erf(s * (-h - c)))

    return float(axis_fraction(hx, x0) * axis_fraction(hy, y0))


def make_gaussian(
    spec: BeamSpec,
    grid: Grid2D,
    wavelength: float,
    min_captured: float = 0.999,
) -> ComplexField2D:
    """Construct a Gaussian beam field at its waist.

    The amplitude is ``sqrt(2P/(pi w0^2)) * exp(-r^2/w0^2)`` times a tilt
    phase ``exp(i k x sin(tilt))``, so the peak intensity is the analytic
    2P/(pi w0^2) and the numerically integrated power matches ``spec.power``
    to the accuracy of the captured fraction.

    Raises
    ------
    GridTooSmall
        If less than ``min_captured`` of the analytic power falls inside
        the grid.
    """
    if spec.power == 0.0:
        return ComplexField2D(
            grid, wavelength, np.zeros((grid.nx, grid.ny), dtype=np.complex128)
        )
    captured = _gaussian_captured_fraction(spec, grid)
    if captured < min_captured:
        raise GridTooSmall(captured, min_captured)

    x0, y0 = spec.center_offset
    X, Y = grid.mesh()
    w0 = spec.w0
    peak = np.sqrt(2.0 * spec.power / (np.pi * w0 * w0))
    envelope = peak * np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (w0 * w0))
    if spec.tilt_angle != 0.0:
        k = 2.0 * np.pi / wavelength
        envelope = envelope * np.exp(1j * k * np.sin(spec.tilt_angle) * X)
    return ComplexField2D(grid, wavelength, envelope.astype(np.complex128))


def slit_transmission(slit: SlitSpec, grid: Grid2D) -> np.ndarray:
    """Real amplitude-transmission mask of the slit on the grid."""
    x = grid.x()
    lo = slit.center_offset - 0.5 * slit.width_d
    hi = slit.center_offset + 0.5 * slit.width_d
    if slit.edge_width > 0.0:
        e = slit.edge_width
        tx = 0.5 * (erf((x - lo) / e) - erf((x - hi) / e))
    else:
        tx = ((x >= lo) & (x <= hi)).astype(np.float64)
    t = np.repeat(tx[:, None], grid.ny, axis=1)
    if slit.height is not None:
        y = grid.y()
        if slit.edge_width > 0.0:
            e = slit.edge_width
            ty = 0.5 * (erf((y + 0.5 * slit.height) / e) - erf((y - 0.5 * slit.height) / e))
        else:
            ty = (np.abs(y) <= 0.5 * slit.height).astype(np.float64)
        t = t * ty[None, :]
    return t


def apply_aperture(field: ComplexField2D, slit: SlitSpec) -> ComplexField2D:
    """Pass the field through the slit (hard binary mask by default).

    Amplitudes are unchanged inside the opening and exactly zero outside,
    so power can only decrease.  Applying the same slit twice is a no-op.
    """
    t = slit_transmission(slit, field.grid)
    if field.grid.ny and t.min() == 1.0:
        return field  # opening covers the whole grid
    return field.with_amplitudes(field.amplitudes * t)


def total_power(field: ComplexField2D) -> float:
    """Integrated power in watts: sum(|a|^2) * dx * dy."""
    a = field.amplitudes
    return float(np.sum(a.real**2 + a.imag**2) * field.grid.pixel_area)


def intensity_image(field: ComplexField2D, normalize: bool = False) -> np.ndarray:
    """Intensity |a|^2 on the grid (W/m^2), optionally scaled to max 1."""
    img = np.abs(field.amplitudes) ** 2
    if normalize:
        peak = img.max()
        if peak > 0:
            img = img / peak
    return img
