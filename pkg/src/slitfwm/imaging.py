"""Spot segmentation, region integration and correlation statistics.

Works on simulated camera frames and on imported experimental graymaps
alike: an image is any non-negative 2-D array with a known pixel pitch
(axis 0 = x).  Regions are axis-aligned rectangles grown around detected
intensity maxima to a target area, clipped at the bisector to the nearest
neighboring spot so regions never overlap.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter


class NoSpots(ValueError):
    """No usable intensity maxima in the image."""


class GeometryMismatch(ValueError):
    """Frames do not share the expected shape."""


class DegenerateCurve(ValueError):
    """A curve has too few points or zero variance."""


@dataclass(frozen=True)
class SpotRegion:
    label: str
    center: tuple[float, float]  # meters, grid-centered coordinates
    area: float  # m^2
    x_slice: tuple[int, int]
    y_slice: tuple[int, int]
    peak_value: float

    def mask_slice(self):
        return slice(*self.x_slice), slice(*self.y_slice)


@dataclass(frozen=True)
class SpotSet:
    regions: tuple[SpotRegion, ...]
    shape: tuple[int, int]
    pixel_pitch: tuple[float, float]
    count_warning: bool = False
    area_warning: bool = False

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.regions)

    def region(self, label: str) -> SpotRegion:
        for r in self.regions:
            if r.label == label:
                return r
        raise KeyError(label)


@dataclass(frozen=True)
class CorrelationReport:
    labels: tuple[str, ...]
    pearson: np.ndarray
    covariance: np.ndarray
    threshold: float
    groups: tuple[tuple[str, ...], ...] = field(default=())

    def coefficient(self, a: str, b: str) -> float:
        i, j = self.labels.index(a), self.labels.index(b)
        return float(self.pearson[i, j])


def _pixel_coords(n: int, pitch: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * pitch


def detect_spots(
    image: np.ndarray,
    pixel_pitch,
    min_separation: float,
    n_expected: int | None = None,
    target_area: float = 1.4e-6,
    rel_threshold: float = 0.02,
) -> SpotSet:
    """Find bright spots and grow disjoint integration rectangles.

    Local maxima above ``rel_threshold * image.max()`` are kept, strongest
    first, suppressing any candidate closer than ``min_separation``
    (meters) to an already accepted one.  Each surviving spot gets a
    rectangle of ``target_area`` centered on it, clipped at half the
    distance to its nearest neighbor along x (regions stay pairwise
    disjoint) and compensated by growing along y when possible; a spot
    set whose regions fall short of the target area by more than 10%
    carries ``area_warning``.  Deterministic for a given image.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    if not np.isfinite(img).all():
        raise ValueError("image contains non-finite values")
    if np.ptp(img) == 0.0:
        raise NoSpots("image is flat")
    dx, dy = (pixel_pitch, pixel_pitch) if np.isscalar(pixel_pitch) else pixel_pitch
    nx, ny = img.shape
    xs, ys = _pixel_coords(nx, dx), _pixel_coords(ny, dy)

    # local-max footprint stays well under min_separation so a bright
    # neighbor's shoulder cannot swallow a genuine nearby peak; the
    # separation itself is enforced by the suppression pass below
    size = max(3, int(round(min_separation / (3.0 * dx))) | 1)
    is_max = (img == maximum_filter(img, size=size)) & (img >= rel_threshold * img.max())
    ii, jj = np.nonzero(is_max)
    if len(ii) == 0:
        raise NoSpots("no maxima above the detection threshold")
    order = np.argsort(img[ii, jj])[::-1]
    kept: list[tuple[int, int]] = []
    for idx in order:
        i, j = int(ii[idx]), int(jj[idx])
        ok = True
        for (pi, pj) in kept:
            d = np.hypot((i - pi) * dx, (j - pj) * dy)
            if d < min_separation:
                ok = False
                break
        if ok:
            kept.append((i, j))
        if n_expected is not None and len(kept) == n_expected:
            break

    count_warning = False
    if n_expected is not None and len(kept) != n_expected:
        count_warning = True
        warnings.warn(
            f"expected {n_expected} spots, found {len(kept)}; returning best effort",
            stacklevel=2,
        )

    regions = []
    area_warning = False
    for n, (i, j) in enumerate(kept):
        # x half-width capped at the bisector to the nearest neighbor
        hx = 0.5 * np.sqrt(target_area)
        for (pi, pj) in kept:
            if (pi, pj) == (i, j):
                continue
            gap = 0.5 * abs(pi - i) * dx - dx
            if gap > 0 and abs(pi - i) * dx > abs(pj - j) * dy:
                hx = min(hx, gap)
        hx = max(hx, dx)
        hy = max(target_area / (4.0 * hx), dy)
        i_lo = max(0, i - int(round(hx / dx)))
        i_hi = min(nx, i + int(round(hx / dx)) + 1)
        j_lo = max(0, j - int(round(hy / dy)))
        j_hi = min(ny, j + int(round(hy / dy)) + 1)
        area = (i_hi - i_lo) * (j_hi - j_lo) * dx * dy
        if abs(area - target_area) > 0.1 * target_area:
            area_warning = True
        regions.append(
            SpotRegion(
                label=f"S{n + 1}",
                center=(float(xs[i]), float(ys[j])),
                area=float(area),
                x_slice=(i_lo, i_hi),
                y_slice=(j_lo, j_hi),
                peak_value=float(img[i, j]),
            )
        )
    return SpotSet(tuple(regions), (nx, ny), (dx, dy), count_warning, area_warning)


def label_six_spots(spots: SpotSet) -> SpotSet:
    """Relabel a six-spot set with the conventional I1..I6 geometry.

    Conjugates sit on the negative-x side (I1, I2, I3 ordered along x,
    I2 the middle, main spot), probes on the positive side (I4, I5, I6
    with I5 the middle).  Requires exactly six regions.
    """
    if len(spots.regions) != 6:
        raise ValueError(f"need exactly 6 regions, have {len(spots.regions)}")
    by_x = sorted(spots.regions, key=lambda r: r.center[0])
    relabeled = [
        SpotRegion(f"I{k + 1}", r.center, r.area, r.x_slice, r.y_slice, r.peak_value)
        for k, r in enumerate(by_x)
    ]
    return SpotSet(tuple(relabeled), spots.shape, spots.pixel_pitch,
                   spots.count_warning, spots.area_warning)


def integrate_regions(
    frames, spots: SpotSet, block_average: int = 1
) -> np.ndarray:
    """Per-region integrated intensity for each frame.

    Returns an array of shape (n_regions, n_frames_out): masked sum times
    pixel area, in intensity * m^2 units (watts for intensity frames).
    ``block_average`` averages that many consecutive frames per output
    point (the measurement habit of averaging camera images); the frame
    count must divide evenly.
    """
    frames = [np.asarray(f, dtype=float) for f in frames]
    for f in frames:
        if f.shape != spots.shape:
            raise GeometryMismatch(f"frame shape {f.shape} != spot geometry {spots.shape}")
    if block_average < 1 or len(frames) % block_average:
        raise ValueError("block_average must divide the number of frames")
    pixel_area = spots.pixel_pitch[0] * spots.pixel_pitch[1]
    raw = np.empty((len(spots.regions), len(frames)))
    for r_idx, region in enumerate(spots.regions):
        sx, sy = region.mask_slice()
        for f_idx, f in enumerate(frames):
            raw[r_idx, f_idx] = f[sx, sy].sum() * pixel_area
    if block_average == 1:
        return raw
    return raw.reshape(len(spots.regions), -1, block_average).mean(axis=2)


def correlate(curves, labels=None, threshold: float = 0.9) -> CorrelationReport:
    """Pearson correlation matrix over per-region curves, plus grouping.

    Curves are rows.  Regions are grouped by single-linkage over the
    ``corr >= threshold`` relation.  Raises DegenerateCurve for curves
    with fewer than 3 points or zero variance.
    """
    arr = np.asarray(curves, dtype=float)
    if arr.ndim != 2:
        raise ValueError("curves must be a 2-D array (regions x points)")
    n, m = arr.shape
    if m < 3:
        raise DegenerateCurve("need at least 3 scan points per curve")
    if np.any(arr.std(axis=1) == 0.0):
        flat = [i for i in range(n) if arr[i].std() == 0.0]
        raise DegenerateCurve(f"zero-variance curve(s) at rows {flat}")
    if labels is None:
        labels = tuple(f"R{i + 1}" for i in range(n))
    labels = tuple(labels)
    pearson = np.corrcoef(arr)
    covariance = np.cov(arr)

    # single-linkage grouping by threshold
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if pearson[i, j] >= threshold:
                parent[find(i)] = find(j)
    buckets: dict[int, list[str]] = {}
    for i in range(n):
        buckets.setdefault(find(i), []).append(labels[i])
    groups = tuple(tuple(v) for _, v in sorted(buckets.items()))
    return CorrelationReport(labels, pearson, covariance, threshold, groups)


def mirror_correlation(image: np.ndarray) -> float:
    """Pearson correlation of an image with its x-flipped mirror."""
    img = np.asarray(image, dtype=float)
    flipped = img[::-1, :]
    a = img - img.mean()
    b = flipped - flipped.mean()
    denom = np.sqrt((a * a).sum() * (b * b).sum())
    if denom == 0.0:
        raise DegenerateCurve("flat image has no mirror correlation")
    return float((a * b).sum() / denom)
