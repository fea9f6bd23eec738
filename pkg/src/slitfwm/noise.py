"""Twin-beam intensity-difference noise.

A seeded two-mode amplifier of intensity gain G emits a probe/conjugate
pair whose photon-number difference stays Poissonian while the total
power grows, so the difference noise normalized to the shot-noise limit
(the noise reduction factor, NRF) is 1/(2G - 1).  Per-arm detection
efficiencies mix vacuum back in.  A Monte Carlo oracle samples correlated
photon-number pairs and applies binomial loss, providing an independent
check of the closed forms; synthetic spectrum-analyzer traces package the
same numbers the way a measurement would display them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_E_CHARGE = 1.602176634e-19


class DomainError(ValueError):
    """Parameter outside the model's domain (e.g. gain below 1)."""


def nrf_ideal(gain: float) -> float:
    """Lossless intensity-difference noise over the SNL: 1/(2G - 1)."""
    if gain < 1.0:
        raise DomainError(f"gain must be >= 1, got {gain}")
    return 1.0 / (2.0 * gain - 1.0)


def nrf_lossy(gain: float, eta_probe: float, eta_conjugate: float) -> float:
    """NRF with per-arm detection efficiencies.

    Linearized bright-seed model: each detected beam carries variance
    eta*N*(1 + 2*eta*(G-1)) and the arms share covariance
    2*eta_p*eta_c*G*(G-1)*N0.  Reduces to ``nrf_ideal`` at unit
    efficiency and to ``1 - eta + eta/(2G-1)`` for equal efficiencies.
    """
    if gain < 1.0:
        raise DomainError(f"gain must be >= 1, got {gain}")
    for eta in (eta_probe, eta_conjugate):
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f"efficiency must be in [0, 1], got {eta}")
    g, ep, ec = gain, eta_probe, eta_conjugate
    mean_p = ep * g
    mean_c = ec * (g - 1.0)
    var_p = mean_p * (1.0 + 2.0 * ep * (g - 1.0))
    var_c = mean_c * (1.0 + 2.0 * ec * (g - 1.0))
    cov = 2.0 * ep * ec * g * (g - 1.0)
    return (var_p + var_c - 2.0 * cov) / (mean_p + mean_c)


def probe_excess(gain: float) -> float:
    """Individual-beam thermal excess of the seeded amplifier: 2G - 1."""
    if gain < 1.0:
        raise DomainError(f"gain must be >= 1, got {gain}")
    return 2.0 * gain - 1.0


def solve_symmetric_efficiency(gain: float, target_nrf: float) -> float:
    """Equal-arm efficiency that degrades nrf_ideal(gain) to target_nrf."""
    ideal = nrf_ideal(gain)
    if not ideal <= target_nrf <= 1.0:
        raise DomainError(
            f"target NRF {target_nrf} not reachable between {ideal:.4f} and 1"
        )
    return (1.0 - target_nrf) / (1.0 - ideal)


def gain_from_powers(probe_power: float, conjugate_power: float) -> float:
    """G from detected twin powers: seed = P_p - P_c, G = P_p / seed."""
    if not 0.0 < conjugate_power < probe_power:
        raise DomainError("need 0 < conjugate power < probe power for a seeded amplifier")
    return probe_power / (probe_power - conjugate_power)


def monte_carlo_nrf(
    gain: float,
    eta_probe: float,
    eta_conjugate: float,
    n_samples: int = 200_000,
    seed: int = 0,
    mean_seed_photons: float = 1e8,
    block_size: int = 25_000,
) -> tuple[float, float]:
    """Monte Carlo oracle for the NRF: (estimate, standard error).

    Samples correlated pre-detection photon-number pairs from the seeded
    amplifier's Gaussian statistics -- means (G, G-1)*n0, variances
    (2G-1) times the means, covariance 2G(G-1)*n0, which make the bare
    difference exactly Poissonian -- then thins each arm binomially with
    its efficiency and forms Var(Np - Nc)/(<Np> + <Nc>).  Sampling runs in
    fixed-size blocks with per-block deterministic substreams, so the
    result depends only on (seed, n_samples, block_size), not on how the
    blocks are scheduled.  Needs n_samples >= 1e5 for the default
    tolerances; the Gaussian bright-seed approximation biases the result
    only at O(1/mean_seed_photons).
    """
    if gain < 1.0:
        raise DomainError(f"gain must be >= 1, got {gain}")
    if n_samples < 4 * block_size:
        block_size = max(1000, n_samples // 8)
    n_blocks = max(2, int(np.ceil(n_samples / block_size)))
    seeds = np.random.SeedSequence(seed).spawn(n_blocks)

    n0 = mean_seed_photons
    mean_p, mean_c = gain * n0, (gain - 1.0) * n0
    var_p = gain * (2.0 * gain - 1.0) * n0
    var_c = (gain - 1.0) * (2.0 * gain - 1.0) * n0
    cov = 2.0 * gain * (gain - 1.0) * n0
    sig_p, sig_c = np.sqrt(var_p), np.sqrt(var_c)
    rho = cov / (sig_p * sig_c) if sig_c > 0 else 0.0

    block_vars = []
    sum_p = sum_c = 0.0
    total = 0
    for b, ss in enumerate(seeds):
        m = min(block_size, n_samples - b * block_size)
        if m <= 0:
            break
        rng = np.random.default_rng(ss)
        z1 = rng.standard_normal(m)
        n_p = np.rint(mean_p + sig_p * z1).astype(np.int64)
        if sig_c > 0:
            z2 = rng.standard_normal(m)
            n_c = np.rint(
                mean_c + sig_c * (rho * z1 + np.sqrt(max(0.0, 1.0 - rho * rho)) * z2)
            ).astype(np.int64)
        else:
            n_c = np.zeros(m, dtype=np.int64)
        np.clip(n_p, 0, None, out=n_p)
        np.clip(n_c, 0, None, out=n_c)
        det_p = rng.binomial(n_p, eta_probe) if eta_probe < 1.0 else n_p
        det_c = rng.binomial(n_c, eta_conjugate) if eta_conjugate < 1.0 else n_c
        diff = det_p.astype(np.float64) - det_c.astype(np.float64)
        block_vars.append(np.var(diff, ddof=1))
        sum_p += float(det_p.sum())
        sum_c += float(det_c.sum())
        total += m

    block_vars = np.asarray(block_vars)
    var_diff = float(block_vars.mean())
    denom = (sum_p + sum_c) / total
    nrf = var_diff / denom
    stderr = float(block_vars.std(ddof=1) / np.sqrt(len(block_vars))) / denom
    return nrf, stderr


@dataclass(frozen=True)
class NoiseModel:
    """Everything the intensity-difference noise calculation needs.

    Powers are the detected probe/conjugate powers; ``gain`` must be
    consistent with them for a seeded amplifier (G/(G-1) = P_p/P_c).
    ``electronic_floor_dbm`` is the analyzer floor at the configured
    resolution bandwidth.  The detector constants only matter for
    absolute-dBm traces.
    """

    gain: float = 2.25
    eta_probe: float = 0.338
    eta_conjugate: float = 0.338
    probe_power: float = 45e-6
    conjugate_power: float = 25e-6
    electronic_floor_dbm: float = -90.0
    squeezing_band: tuple[float, float] = (0.1e6, 5e6)
    technical_knee: float = 0.1e6
    resolution_bandwidth: float = 10e3
    video_bandwidth: float = 300.0
    responsivity: float = 0.6
    transimpedance: float = 1e5
    load_ohms: float = 50.0

    def __post_init__(self):
        if self.gain < 1.0:
            raise DomainError("gain must be >= 1")
        for eta in (self.eta_probe, self.eta_conjugate):
            if not 0.0 <= eta <= 1.0:
                raise DomainError("efficiencies must lie in [0, 1]")
        if self.conjugate_power > self.probe_power:
            raise DomainError("conjugate power cannot exceed probe power (seeded amplifier)")

    @classmethod
    def from_powers(cls, probe_power: float, conjugate_power: float, **overrides):
        g = gain_from_powers(probe_power, conjugate_power)
        return cls(gain=g, probe_power=probe_power, conjugate_power=conjugate_power,
                   **overrides)

    def nrf(self) -> float:
        return nrf_lossy(self.gain, self.eta_probe, self.eta_conjugate)

    def snl_dbm(self) -> float:
        """Shot-noise power of the total detected light in the RBW, dBm."""
        current = self.responsivity * (self.probe_power + self.conjugate_power)
        v2 = 2.0 * _E_CHARGE * current * self.transimpedance**2 * self.resolution_bandwidth
        return 10.0 * np.log10(v2 / self.load_ohms / 1e-3)


@dataclass(frozen=True)
class NoiseTrace:
    """Synthetic spectrum-analyzer traces, one row per sideband frequency."""

    frequencies: np.ndarray
    electronic_db: np.ndarray
    difference_db: np.ndarray
    snl_db: np.ndarray
    probe_db: np.ndarray
    relative: bool = True


def synthesize_trace(
    model: NoiseModel,
    f_grid=None,
    relative: bool = True,
    seed: int | None = None,
    jitter_db: float = 0.0,
) -> NoiseTrace:
    """Build the four analyzer traces over sideband frequency.

    Relative mode references everything to the SNL (flat 0 dB line).  The
    difference signal sits exactly 10*log10(NRF) below the SNL throughout
    the squeezing band, rises as (knee/f)^2 below the technical-noise
    knee, and relaxes back toward the SNL above the band.  The probe-only
    trace carries the seeded amplifier's individual-beam thermal excess
    2G - 1.  ``jitter_db`` adds seeded cosmetic texture (default off, so
    traces are exactly reproducible).
    """
    if f_grid is None:
        f_grid = np.geomspace(0.03e6, 8e6, 400)
    f = np.asarray(f_grid, dtype=float)
    nrf = model.nrf()
    excess = probe_excess(model.gain)
    knee = model.technical_knee
    f_hi = model.squeezing_band[1]

    rollup = np.clip((knee / f) ** 2 - 1.0, 0.0, None)
    taper = np.where(f <= f_hi, 1.0, 1.0 / (1.0 + ((f - f_hi) / (0.5 * f_hi)) ** 2))
    diff_lin = (1.0 + (nrf - 1.0) * taper) * (1.0 + rollup)
    probe_lin = (1.0 + (excess - 1.0) * taper) * (1.0 + rollup)

    snl_ref = model.snl_dbm()
    electronic = np.full_like(f, model.electronic_floor_dbm - snl_ref)
    snl = np.zeros_like(f)
    diff = 10.0 * np.log10(diff_lin)
    probe = 10.0 * np.log10(probe_lin)

    if jitter_db > 0.0:
        rng = np.random.default_rng(seed)
        for arr in (diff, probe):
            arr += jitter_db * rng.standard_normal(f.size)

    if not relative:
        electronic = np.full_like(f, model.electronic_floor_dbm)
        snl = snl + snl_ref
        diff = diff + snl_ref
        probe = probe + snl_ref
    return NoiseTrace(f, electronic, diff, snl, probe, relative=relative)
