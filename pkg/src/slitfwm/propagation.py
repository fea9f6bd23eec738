"""Free-space scalar propagation of sampled fields.

The primary method is the angular spectrum of plane waves with the exact
transfer function ``exp(i z sqrt(k^2 - kx^2 - ky^2))``; it is unitary for
band-limited fields and valid at any distance the sampling supports.  A
paraxial "fresnel-transfer" method is also provided: it propagates with
the DFT of the sampled Fresnel convolution kernel, which makes it agree
with a direct Riemann-sum evaluation of the Fresnel diffraction integral
to near round-off for fields that are compactly supported on the grid.
That method exists to cross-check the transform kernels against
:func:`fresnel_quadrature`; use ``angular-spectrum`` for physics.

Transfer-function factors are cached per (grid, wavelength, distance), so
repeated propagation at a fixed geometry costs one FFT round trip.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .field import ComplexField2D, Grid2D

METHODS = ("angular-spectrum", "fresnel-transfer")


class AliasingRisk(RuntimeError):
    """Sampling criterion violated for the requested distance (fatal mode)."""


class AliasingRiskWarning(UserWarning):
    """Advisory counterpart of :class:`AliasingRisk`."""


@dataclass(frozen=True)
class PropagationPlan:
    """How to move a field along z.

    ``distance`` may be negative (backpropagation).  ``band_limit`` applies
    the evanescent cutoff plus the sampling-derived frequency limit that
    keeps the transfer function alias-free at large distances.
    ``on_alias`` selects what happens when the full-band sampling criterion
    fails while band limiting is off: "warn", "error" or "ignore".
    """

    distance: float
    method: str = "angular-spectrum"
    band_limit: bool = True
    on_alias: str = "warn"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.on_alias not in ("warn", "error", "ignore"):
            raise ValueError("on_alias must be 'warn', 'error' or 'ignore'")


@lru_cache(maxsize=32)
def _freq_grids(nx: int, ny: int, dx: float, dy: float):
    fx = sfft.fftfreq(nx, dx)
    fy = sfft.fftfreq(ny, dy)
    return fx[:, None], fy[None, :]


@lru_cache(maxsize=64)
def _asm_transfer(nx, ny, dx, dy, wavelength, z, band_limit):
    """Exact angular-spectrum transfer function, fftfreq layout."""
    fx, fy = _freq_grids(nx, ny, dx, dy)
    f2 = fx * fx + fy * fy
    inv_l2 = 1.0 / (wavelength * wavelength)
    under = inv_l2 - f2
    kz = 2.0 * np.pi * np.sqrt(np.maximum(under, 0.0))
    H = np.exp(1j * z * kz)
    if band_limit:
        H = H * (under > 0.0)
        # sampling-derived limit (separable), keeps exp(i z kz) alias-free
        if z != 0.0:
            du, dv = 1.0 / (nx * dx), 1.0 / (ny * dy)
            fx_lim = 1.0 / (wavelength * np.sqrt((2.0 * du * z) ** 2 + 1.0))
            fy_lim = 1.0 / (wavelength * np.sqrt((2.0 * dv * z) ** 2 + 1.0))
            H = H * ((np.abs(fx) <= fx_lim) & (np.abs(fy) <= fy_lim))
    else:
        # evanescent components decay regardless of propagation direction
        decay = 2.0 * np.pi * np.sqrt(np.maximum(-under, 0.0))
        H = np.where(under > 0.0, H, np.exp(-np.abs(z) * decay))
    return H


@lru_cache(maxsize=64)
def _fresnel_ir_transfer(nx, ny, dx, dy, wavelength, z):
    """DFT of the sampled Fresnel impulse response (separable chirps)."""
    x = (np.arange(nx) - nx // 2) * dx
    y = (np.arange(ny) - ny // 2) * dy
    # 1/(i lambda z) * exp(ik/(2z) r^2), split symmetrically between axes
    k = 2.0 * np.pi / wavelength
    hx = np.exp(1j * k * x * x / (2.0 * z)) / np.sqrt(1j * wavelength * z)
    hy = np.exp(1j * k * y * y / (2.0 * z)) / np.sqrt(1j * wavelength * z)
    Hx = sfft.fft(sfft.ifftshift(hx)) * dx
    Hy = sfft.fft(sfft.ifftshift(hy)) * dy
    return np.exp(1j * k * z) * Hx[:, None] * Hy[None, :]


def alias_limit_distance(grid: Grid2D, wavelength: float) -> float:
    """Largest |z| for which the full-band transfer function is alias-free."""
    zx = grid.nx * grid.dx**2 / wavelength
    zy = grid.ny * grid.dy**2 / wavelength
    s = np.sqrt(max(0.0, 1.0 - (wavelength / (2 * grid.dx)) ** 2))
    t = np.sqrt(max(0.0, 1.0 - (wavelength / (2 * grid.dy)) ** 2))
    return min(zx * s, zy * t)


def _check_sampling(field: ComplexField2D, plan: PropagationPlan) -> None:
    if plan.band_limit or plan.on_alias == "ignore" or plan.distance == 0.0:
        return
    zmax = alias_limit_distance(field.grid, field.wavelength)
    if abs(plan.distance) > zmax:
        msg = (
            f"|z| = {abs(plan.distance):.4g} m exceeds the alias-free "
            f"distance {zmax:.4g} m for this grid; enable band_limit or "
            f"refine the sampling"
        )
        if plan.on_alias == "error":
            raise AliasingRisk(msg)
        warnings.warn(msg, AliasingRiskWarning, stacklevel=3)


def propagate(field: ComplexField2D, plan: PropagationPlan) -> ComplexField2D:
    """Propagate a field by ``plan.distance`` along z."""
    if plan.distance == 0.0:
        return field.with_amplitudes(field.amplitudes.copy())
    _check_sampling(field, plan)
    g = field.grid
    if plan.method == "angular-spectrum":
        H = _asm_transfer(
            g.nx, g.ny, g.dx, g.dy, field.wavelength, plan.distance, plan.band_limit
        )
    else:
        H = _fresnel_ir_transfer(g.nx, g.ny, g.dx, g.dy, field.wavelength, plan.distance)
    spectrum = sfft.fft2(field.amplitudes)
    out = sfft.ifft2(spectrum * H)
    return field.with_amplitudes(out)


def propagate_to(field: ComplexField2D, z: float, **kwargs) -> ComplexField2D:
    """Shorthand for ``propagate(field, PropagationPlan(z, **kwargs))``."""
    return propagate(field, PropagationPlan(z, **kwargs))


def propagate_sequence(
    field: ComplexField2D, z_list, **kwargs
) -> list[ComplexField2D]:
    """Fields at each plane of a strictly increasing list of distances.

    Propagation is incremental (plane to plane), which is equivalent to
    single-shot propagation for band-limited fields because free-space
    transfer functions compose.
    """
    z_arr = [float(z) for z in z_list]
    if any(b <= a for a, b in zip(z_arr, z_arr[1:])):
        raise ValueError("z_list must be strictly increasing")
    out = []
    current = field
    z_prev = 0.0
    for z in z_arr:
        current = propagate(current, PropagationPlan(z - z_prev, **kwargs))
        out.append(current)
        z_prev = z
    return out


def fresnel_quadrature(
    field: ComplexField2D,
    z: float,
    out_nx: int = 64,
    out_ny: int = 64,
) -> np.ndarray:
    """Brute-force Riemann sum of the Fresnel diffraction integral.

    Evaluates

        u(x, y) = exp(ikz)/(i lam z) * sum_ij u0(xi, yj)
                  * exp(ik((x-xi)^2 + (y-yj)^2)/(2z)) dx dy

    on the central ``out_nx x out_ny`` block of grid sample points.  The
    kernel is separable, so the double sum is organized as two dense
    matrix products; no Fourier transforms are involved, which makes this
    an independent check of the FFT-based propagators.  Cost grows as
    O(n_out * n_in) per axis; intended for validation, not production.
    """
    g = field.grid
    if out_nx > g.nx or out_ny > g.ny:
        raise ValueError("output sub-grid cannot exceed the field grid")
    lam = field.wavelength
    k = 2.0 * np.pi / lam
    x_in = g.x()
    y_in = g.y()
    x_out = x_in[(g.nx - out_nx) // 2 : (g.nx + out_nx) // 2]
    y_out = y_in[(g.ny - out_ny) // 2 : (g.ny + out_ny) // 2]
    Kx = np.exp(1j * k * (x_out[:, None] - x_in[None, :]) ** 2 / (2.0 * z))
    Ky = np.exp(1j * k * (y_out[:, None] - y_in[None, :]) ** 2 / (2.0 * z))
    pref = np.exp(1j * k * z) / (1j * lam * z) * g.pixel_area
    return pref * (Kx @ field.amplitudes @ Ky.T)


def central_block(arr: np.ndarray, nx: int, ny: int) -> np.ndarray:
    """Central nx-by-ny block of a 2-D array (for oracle comparisons)."""
    cx, cy = arr.shape[0] // 2, arr.shape[1] // 2
    return arr[cx - nx // 2 : cx + (nx + 1) // 2, cy - ny // 2 : cy + (ny + 1) // 2]


def far_field(field: ComplexField2D, z: float, pad: int = 2) -> ComplexField2D:
    """Fraunhofer mapping to the focal plane of a lens of focal length z.

    Each transverse frequency f maps to position lambda*z*f, so the output
    grid pitch is lambda*z/(pad*N*dx).  Zero-padding by ``pad`` refines the
    output sampling.  Power is conserved exactly (Parseval with the
    matching amplitude scaling).
    """
    g = field.grid
    nx, ny = pad * g.nx, pad * g.ny
    big = np.zeros((nx, ny), dtype=np.complex128)
    ox, oy = (nx - g.nx) // 2, (ny - g.ny) // 2
    big[ox : ox + g.nx, oy : oy + g.ny] = field.amplitudes
    spec = sfft.fftshift(sfft.fft2(sfft.ifftshift(big)))
    lam = field.wavelength
    out_dx = lam * z / (nx * g.dx)
    out_dy = lam * z / (ny * g.dy)
    # scale so sum(|a|^2) dx' dy' equals the input power
    spec *= np.sqrt(g.dx * g.dy / (out_dx * out_dy) / (nx * ny))
    return ComplexField2D(Grid2D(nx, ny, out_dx, out_dy), lam, spec)


def padded_propagate(field: ComplexField2D, z: float, pad: int = 2, **kwargs) -> ComplexField2D:
    """Propagate on a zero-padded grid, then crop back.

    Padding widens the sampling-derived band limit (it scales with the
    grid extent) and pushes wraparound copies away; use it for long hops
    where off-axis content matters, e.g. to a camera plane.
    """
    if pad <= 1:
        return propagate_to(field, z, **kwargs)
    g = field.grid
    nx, ny = pad * g.nx, pad * g.ny
    big = np.zeros((nx, ny), dtype=np.complex128)
    ox, oy = (nx - g.nx) // 2, (ny - g.ny) // 2
    big[ox : ox + g.nx, oy : oy + g.ny] = field.amplitudes
    big_field = ComplexField2D(Grid2D(nx, ny, g.dx, g.dy), field.wavelength, big)
    out = propagate_to(big_field, z, **kwargs)
    return field.with_amplitudes(out.amplitudes[ox : ox + g.nx, oy : oy + g.ny])
