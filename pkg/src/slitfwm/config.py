"""Experiment configuration: defaults, strict parsing, exact round-trips.

Config files are line-oriented ``key = value [unit]`` text.  Keys are
drawn from a fixed registry; unknown keys are fatal (a config that
silently absorbs a typo is how simulations stop being reproducible).
Dimensioned values require a unit suffix from the declared set for their
kind; bare numbers are only legal for dimensionless keys.  ``emit_config``
writes canonical SI units with full-precision reprs, so
``parse_config(emit_config(c)) == c`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .field import BeamSpec, Grid2D, SlitSpec
from .gain import MediumParams, ProbeParams
from .noise import NoiseModel
from .spectra import GainSpectrumModel


class ParseError(ValueError):
    """Malformed config text; carries line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class UnitError(ValueError):
    """Missing or invalid unit suffix for a dimensioned value."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(message if not line else f"line {line}: {message}")


_UNITS = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9},
    "area": {"m2": 1.0, "mm2": 1e-6, "um2": 1e-12},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "nW": 1e-9},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "temperature": {"C": 1.0},
}
_CANONICAL = {
    "length": "m", "area": "m2", "power": "W",
    "frequency": "Hz", "angle": "rad", "temperature": "C",
}

# key -> (kind, default); kinds beyond the unit table: int, float, bool
REGISTRY: dict[str, tuple[str, object]] = {
    "grid.nx": ("int", 1024),
    "grid.ny": ("int", 1024),
    "grid.pitch_x": ("length", 4.3e-6),
    "grid.pitch_y": ("length", 4.3e-6),
    "laser.wavelength": ("length", 794.98e-9),
    "pump.waist": ("length", 900e-6),
    "pump.power": ("power", 0.2),
    "pump.tilt": ("angle", 0.0),
    "probe.waist": ("length", 400e-6),
    "probe.power": ("power", 100e-6),
    "probe.crossing_angle": ("angle", math.radians(0.6)),
    "probe.detuning": ("frequency", -14e6),
    "slit.enabled": ("bool", True),
    "slit.width": ("length", 530e-6),
    "slit.height": ("length", 0.0),  # 0 = unbounded
    "slit.offset": ("length", 0.0),
    "slit.edge_width": ("length", 0.0),
    "cell.length": ("length", 25e-3),
    "cell.center_z": ("length", 76e-3),
    "cell.temperature": ("temperature", 125.0),
    "cell.detuning": ("frequency", 2e9),
    "cell.gain_strength": ("float", 8.56e-5),  # (m^2/W)/m at cell.detuning_ref
    "cell.detuning_ref": ("frequency", 2e9),
    "cell.detuning_exponent": ("float", 2.0),
    "cell.dispersion": ("float", 1.0),
    "cell.dispersion_asymmetry": ("float", 0.0),
    "spectrum.structured": ("bool", True),
    "spectrum.midpoint": ("frequency", -9.75e6),
    "spectrum.circular_center": ("frequency", -5.5e6),
    "spectrum.linewidth": ("frequency", 10e6),
    "spectrum.intercept": ("frequency", 0.0),
    "spectrum.gaussian_lineshape": ("bool", False),
    "spectrum.ring_floor": ("float", 0.8),
    "noise.probe_power": ("power", 45e-6),
    "noise.conjugate_power": ("power", 25e-6),
    "noise.efficiency": ("float", 0.338),
    "noise.electronic_floor": ("float", -90.0),  # dBm
    "noise.band_lo": ("frequency", 0.1e6),
    "noise.band_hi": ("frequency", 5e6),
    "noise.knee": ("frequency", 0.1e6),
    "noise.rbw": ("frequency", 10e3),
    "noise.vbw": ("frequency", 300.0),
    "noise.responsivity": ("float", 0.6),  # A/W
    "noise.transimpedance": ("float", 1e5),  # V/A
    "camera.distance": ("length", 140e-3),
    "camera.pad": ("int", 2),
    "camera.farfield": ("bool", True),
    "analysis.target_area": ("area", 1.4e-6),
    "analysis.min_separation": ("length", 0.25e-3),
    "analysis.rel_threshold": ("float", 0.02),
    "analysis.corr_threshold": ("float", 0.9),
    "run.seed": ("int", 12345),
    "run.steps": ("int", 0),  # 0 = single-pass gain sheet
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Immutable bag of all physical and run parameters (SI units).

    Values live in a plain dict keyed by registry names; helpers build
    the typed objects the physics modules take.
    """

    values: tuple  # sorted (key, value) pairs; kept hashable

    def __getitem__(self, key: str):
        d = dict(self.values)
        if key not in d:
            raise KeyError(key)
        return d[key]

    def replace(self, **flat_overrides) -> "ExperimentConfig":
        """New config with ``key__subkey=value`` style overrides."""
        d = dict(self.values)
        for k, v in flat_overrides.items():
            key = k.replace("__", ".")
            if key not in REGISTRY:
                raise KeyError(f"unknown config key {key!r}")
            d[key] = _coerce(key, v)
        return ExperimentConfig(tuple(sorted(d.items())))

    def with_updates(self, updates: dict) -> "ExperimentConfig":
        d = dict(self.values)
        for key, v in updates.items():
            if key not in REGISTRY:
                raise KeyError(f"unknown config key {key!r}")
            d[key] = _coerce(key, v)
        return ExperimentConfig(tuple(sorted(d.items())))

    # -- typed accessors -------------------------------------------------------

    @property
    def wavelength(self) -> float:
        return self["laser.wavelength"]

    @property
    def seed(self) -> int:
        return self["run.seed"]

    def grid(self) -> Grid2D:
        return Grid2D(self["grid.nx"], self["grid.ny"],
                      self["grid.pitch_x"], self["grid.pitch_y"])

    def pump_spec(self) -> BeamSpec:
        return BeamSpec(self["pump.waist"], self["pump.power"],
                        tilt_angle=self["pump.tilt"])

    def probe_spec(self, center_offset=(0.0, 0.0)) -> BeamSpec:
        return BeamSpec(self["probe.waist"], self["probe.power"],
                        center_offset=center_offset,
                        tilt_angle=self["probe.crossing_angle"])

    def slit(self) -> SlitSpec | None:
        if not self["slit.enabled"]:
            return None
        height = self["slit.height"] or None
        return SlitSpec(self["slit.width"], height=height,
                        center_offset=self["slit.offset"],
                        edge_width=self["slit.edge_width"])

    def medium(self) -> MediumParams:
        return MediumParams(
            cell_length=self["cell.length"],
            cell_center_z=self["cell.center_z"],
            one_photon_detuning=self["cell.detuning"],
            temperature_c=self["cell.temperature"],
            gain_strength=self["cell.gain_strength"],
            dispersion_coefficient=self["cell.dispersion"],
            dispersion_asymmetry=self["cell.dispersion_asymmetry"],
            reference_detuning=self["cell.detuning_ref"],
            detuning_exponent=self["cell.detuning_exponent"],
        )

    def probe_params(self, two_photon_detuning=None) -> ProbeParams:
        delta = self["probe.detuning"] if two_photon_detuning is None else two_photon_detuning
        return ProbeParams(two_photon_detuning=delta,
                           crossing_angle=self["probe.crossing_angle"],
                           seed_power=self["probe.power"])

    def spectrum_model(self) -> GainSpectrumModel:
        if not self["spectrum.structured"]:
            return GainSpectrumModel.circular(
                center=self["spectrum.circular_center"],
                linewidth=self["spectrum.linewidth"],
            )
        return GainSpectrumModel.for_slit(
            self["slit.width"],
            midpoint=self["spectrum.midpoint"],
            linewidth_1=self["spectrum.linewidth"],
            linewidth_2=self["spectrum.linewidth"],
            splitting_intercept=self["spectrum.intercept"],
            gaussian_lineshape=self["spectrum.gaussian_lineshape"],
            ring_center_floor=self["spectrum.ring_floor"],
        )

    def noise_model(self) -> NoiseModel:
        eta = self["noise.efficiency"]
        return NoiseModel.from_powers(
            self["noise.probe_power"], self["noise.conjugate_power"],
            eta_probe=eta, eta_conjugate=eta,
            electronic_floor_dbm=self["noise.electronic_floor"],
            squeezing_band=(self["noise.band_lo"], self["noise.band_hi"]),
            technical_knee=self["noise.knee"],
            resolution_bandwidth=self["noise.rbw"],
            video_bandwidth=self["noise.vbw"],
            responsivity=self["noise.responsivity"],
            transimpedance=self["noise.transimpedance"],
        )


def _coerce(key: str, value) -> object:
    kind = REGISTRY[key][0]
    if kind == "int":
        if isinstance(value, bool) or int(value) != value:
            raise ValueError(f"{key} expects an integer, got {value!r}")
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValueError(f"{key} expects a bool, got {value!r}")
        return value
    return float(value)


def default_config() -> ExperimentConfig:
    return ExperimentConfig(tuple(sorted((k, v) for k, (_, v) in REGISTRY.items())))


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text over the defaults; strict about keys and units."""
    values = {k: v for k, (_, v) in REGISTRY.items()}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, 1)
        key_part, _, value_part = line.partition("=")
        key = key_part.strip()
        if key not in REGISTRY:
            col = raw.find(key) + 1 if key and key in raw else 1
            raise ParseError(f"unknown key {key!r}", lineno, col)
        kind = REGISTRY[key][0]
        tokens = value_part.split()
        if not tokens:
            raise ParseError(f"missing value for {key!r}", lineno,
                             raw.find("=") + 2)
        col = raw.find(value_part.strip()) + 1

        if kind == "bool":
            word = tokens[0].lower()
            if len(tokens) != 1 or word not in ("true", "false"):
                raise ParseError(f"{key} expects true or false", lineno, col)
            values[key] = word == "true"
            continue
        if kind in ("int", "float"):
            if len(tokens) != 1:
                raise UnitError(f"{key} is dimensionless; no unit suffix allowed", lineno)
            try:
                num = float(tokens[0])
            except ValueError:
                raise ParseError(f"bad number {tokens[0]!r}", lineno, col) from None
            if kind == "int":
                if not num.is_integer():
                    raise ParseError(f"{key} expects an integer", lineno, col)
                values[key] = int(num)
            else:
                values[key] = num
            continue
        # dimensioned kinds
        if len(tokens) != 2:
            raise UnitError(
                f"{key} ({kind}) needs 'value unit' with unit in "
                f"{sorted(_UNITS[kind])}", lineno)
        try:
            num = float(tokens[0])
        except ValueError:
            raise ParseError(f"bad number {tokens[0]!r}", lineno, col) from None
        unit = tokens[1]
        if unit not in _UNITS[kind]:
            raise UnitError(
                f"invalid unit {unit!r} for {key} ({kind}); expected one of "
                f"{sorted(_UNITS[kind])}", lineno)
        values[key] = num * _UNITS[kind][unit]
    return ExperimentConfig(tuple(sorted(values.items())))


def parse_config_file(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def emit_config(config: ExperimentConfig) -> str:
    """Canonical text form: every key, SI units, full-precision values."""
    lines = []
    for key in sorted(REGISTRY):
        kind = REGISTRY[key][0]
        val = config[key]
        if kind == "bool":
            lines.append(f"{key} = {'true' if val else 'false'}")
        elif kind in ("int", "float"):
            lines.append(f"{key} = {val!r}")
        else:
            lines.append(f"{key} = {val!r} {_CANONICAL[kind]}")
    return "\n".join(lines) + "\n"


def emit_config_file(config: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_config(config))


def thread_count(explicit: int | None = None) -> int:
    """Worker count: explicit flag, else SLITFWM_THREADS env, else 1."""
    import os

    if explicit is not None and explicit > 0:
        return explicit
    env = os.environ.get("SLITFWM_THREADS", "")
    try:
        n = int(env)
        return n if n > 0 else 1
    except ValueError:
        return 1
