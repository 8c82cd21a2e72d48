"""Sweep configuration: INI files, presets, and the resolved SweepConfig.

The config format is a sections/key-value file (configparser syntax).
Units at the boundary follow the lab conventions: periods in us, pulse
length in ns, detunings in MHz, widths in um.  Everything is converted
once, here, to SI/rad-per-second values.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import units
from .beam import CAL_CLOUD_CUTOFF, CAL_WIDTH_RATIO_SQ, CLOUD_SIGMA

BACKENDS = ("quantum", "classical", "analytic-quantum", "analytic-classical")


class ConfigError(Exception):
    """Malformed or inconsistent sweep configuration."""


# Every physical default of the figure-3 style run ships as a preset:
# tau_p = 520 ns, eta = 0.0125, 30 kicks, sigma = 4, the five kicking
# strengths with their paired detunings, T from 2.5 to 65 us in 0.5 us
# steps, kick-strength spread on.
PRESETS = {
    "fig3": {
        "sweep": {
            "t_start_us": "2.5",
            "t_stop_us": "65.0",
            "t_step_us": "0.5",
            "phi_d": "3.3, 4.0, 5.0, 5.9, 6.6",
            "eta": "0.0125",
            "kicks": "30",
            "backends": "quantum, analytic-quantum, analytic-classical",
            "spread": "true",
            "zeeman": "true",
            "trajectories": "2000",
            "classical_particles": "20000",
            "master_seed": "20060412",
        },
        "physical": {
            "tau_p_ns": "520",
            "detuning_mhz": "315, 385, 485, 575, 740",
        },
        "simulation": {
            "pulse_mode": "square",
        },
    },
}


@dataclass
class SweepConfig:
    """Fully resolved sweep parameters (SI units internally)."""

    t_grid: np.ndarray                    # s, sorted
    phi_d_list: list
    detuning_list: list                   # rad/s, one per phi_d
    eta: float = 0.0125
    kicks: int = 30
    backends: tuple = BACKENDS
    spread: bool = True
    zeeman: bool = True
    trajectories: int = 2000
    classical_particles: int = 20000
    master_seed: int = 0
    threads: int = 1
    out: str = "sweep.csv"
    plot: str = ""
    resume: bool = False
    # physical
    tau_p: float = 520e-9                 # s
    wavelength: float = units.CS_WAVELENGTH
    mass: float = units.CS_MASS
    offset_54: float = units.CS_OFFSET_54
    offset_43: float = units.CS_OFFSET_43
    # simulation passthrough
    pulse_mode: str = "square"
    substeps: int | None = None
    n_max: int = 512
    sigma: float = 4.0
    recoil_model: str = "uniform"
    jump_mode: str = "recoil-shift"
    boundary_tolerance: float = 1e-8
    # beam geometry
    sigma_beam: float = CLOUD_SIGMA / math.sqrt(CAL_WIDTH_RATIO_SQ)
    sigma_cloud: float = CLOUD_SIGMA
    cloud_cutoff: float = CAL_CLOUD_CUTOFF
    zeeman_strengths: list = field(default_factory=list)   # optional override
    zeeman_weights: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.t_grid) == 0:
            raise ConfigError("empty pulse-period grid")
        if not all(b in BACKENDS for b in self.backends):
            raise ConfigError(f"backends must be a subset of {BACKENDS}")
        if len(self.detuning_list) not in (1, len(self.phi_d_list)):
            raise ConfigError("detuning list must match phi_d list (or be single)")
        if len(self.detuning_list) == 1:
            self.detuning_list = list(self.detuning_list) * len(self.phi_d_list)
        self.t_grid = np.sort(np.asarray(self.t_grid, dtype=float))
        if np.any(self.t_grid <= 0):
            raise ConfigError("pulse periods must be positive")
        if np.any(self.t_grid <= self.tau_p):
            raise ConfigError("pulse periods must exceed the pulse length")

    @property
    def omega_r(self):
        return units.caesium_omega_r(self.wavelength, self.mass)

    def config_hash(self):
        """Short hash of the physics-relevant fields (paths/threads excluded)."""
        payload = {
            "t_grid": [float(t) for t in self.t_grid],
            "phi_d": [float(p) for p in self.phi_d_list],
            "detuning": [float(d) for d in self.detuning_list],
            "eta": self.eta, "kicks": self.kicks,
            "backends": sorted(self.backends),
            "spread": self.spread, "zeeman": self.zeeman,
            "trajectories": self.trajectories,
            "classical_particles": self.classical_particles,
            "tau_p": self.tau_p, "wavelength": self.wavelength,
            "mass": self.mass,
            "offsets": [self.offset_54, self.offset_43],
            "pulse_mode": self.pulse_mode, "substeps": self.substeps,
            "n_max": self.n_max, "sigma": self.sigma,
            "recoil_model": self.recoil_model, "jump_mode": self.jump_mode,
            "boundary_tolerance": self.boundary_tolerance,
            "beam": [self.sigma_beam, self.sigma_cloud, self.cloud_cutoff],
            "zeeman_table": [self.zeeman_strengths, self.zeeman_weights],
        }
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode())
        return digest.hexdigest()[:12]


def _parse_floats(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _merge(base, overlay):
    merged = {sect: dict(keys) for sect, keys in base.items()}
    for sect, keys in overlay.items():
        merged.setdefault(sect, {}).update(keys)
    return merged


def _sections_from_file(path):
    parser = configparser.ConfigParser()
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return {sect: dict(parser.items(sect)) for sect in parser.sections()}


def load_config(path=None, preset=None, **overrides):
    """Build a SweepConfig from a preset and/or INI file, plus overrides.

    Precedence: overrides > file > preset.  Unknown keys are errors.
    """
    sections = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; have {sorted(PRESETS)}")
        sections = _merge(sections, PRESETS[preset])
    if path is not None:
        sections = _merge(sections, _sections_from_file(path))
    if not sections:
        raise ConfigError("no configuration given (need a preset and/or a file)")
    try:
        cfg = _resolve(sections)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown override {key!r}")
        setattr(cfg, key, value)
    return cfg


def _resolve(sections):
    known = {"sweep", "physical", "simulation", "beam", "zeeman"}
    unknown = set(sections) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    sweep = dict(sections.get("sweep", {}))
    phys = dict(sections.get("physical", {}))
    sim = dict(sections.get("simulation", {}))
    beam = dict(sections.get("beam", {}))
    zeeman = dict(sections.get("zeeman", {}))

    def take(table, key, cast, default=None):
        if key not in table:
            if default is None:
                raise ConfigError(f"missing config key {key!r}")
            return default
        raw = table.pop(key)
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc

    def boolean(raw):
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(low)

    if "t_list_us" in sweep:
        grid = np.array(_parse_floats(sweep.pop("t_list_us"))) * 1e-6
        for key in ("t_start_us", "t_stop_us", "t_step_us"):
            sweep.pop(key, None)
    else:
        start = take(sweep, "t_start_us", float)
        stop = take(sweep, "t_stop_us", float)
        step = take(sweep, "t_step_us", float)
        if step <= 0:
            raise ConfigError("t_step_us must be positive")
        count = int(round((stop - start) / step)) + 1
        grid = (start + step * np.arange(count)) * 1e-6
    phi_d_list = _parse_floats(take(sweep, "phi_d", str))
    detuning = [2e6 * math.pi * d for d in
                _parse_floats(take(phys, "detuning_mhz", str, "315"))]

    substeps_raw = sim.pop("substeps", "auto")
    substeps = None if str(substeps_raw).strip().lower() == "auto" else int(substeps_raw)

    cfg = SweepConfig(
        t_grid=grid,
        phi_d_list=phi_d_list,
        detuning_list=detuning,
        eta=take(sweep, "eta", float, 0.0125),
        kicks=take(sweep, "kicks", int, 30),
        backends=tuple(tok.strip() for tok in
                       take(sweep, "backends", str, ",".join(BACKENDS)).split(",")),
        spread=take(sweep, "spread", boolean, True),
        zeeman=take(sweep, "zeeman", boolean, True),
        trajectories=take(sweep, "trajectories", int, 2000),
        classical_particles=take(sweep, "classical_particles", int, 20000),
        master_seed=take(sweep, "master_seed", int, 0),
        threads=take(sweep, "threads", int, 1),
        out=take(sweep, "out", str, "sweep.csv"),
        plot=take(sweep, "plot", str, ""),
        tau_p=take(phys, "tau_p_ns", float, 520.0) * 1e-9,
        wavelength=take(phys, "wavelength_nm", float, units.CS_WAVELENGTH * 1e9) * 1e-9,
        mass=take(phys, "mass_kg", float, units.CS_MASS),
        offset_54=take(phys, "offset_54_mhz", float,
                       units.CS_OFFSET_54 / (2e6 * math.pi)) * 2e6 * math.pi,
        offset_43=take(phys, "offset_43_mhz", float,
                       units.CS_OFFSET_43 / (2e6 * math.pi)) * 2e6 * math.pi,
        pulse_mode=take(sim, "pulse_mode", str, "square"),
        substeps=substeps,
        n_max=take(sim, "n_max", int, 512),
        sigma=take(sim, "sigma", float, 4.0),
        recoil_model=take(sim, "recoil_model", str, "uniform"),
        jump_mode=take(sim, "jump_mode", str, "recoil-shift"),
        boundary_tolerance=take(sim, "boundary_tolerance", float, 1e-8),
        sigma_beam=take(beam, "sigma_beam_um", float,
                        CLOUD_SIGMA * 1e6 / math.sqrt(CAL_WIDTH_RATIO_SQ)) * 1e-6,
        sigma_cloud=take(beam, "sigma_cloud_um", float, CLOUD_SIGMA * 1e6) * 1e-6,
        cloud_cutoff=take(beam, "cloud_cutoff", float, CAL_CLOUD_CUTOFF),
        zeeman_strengths=_parse_floats(zeeman.pop("strengths", "")) if zeeman.get(
            "strengths") else [],
        zeeman_weights=_parse_floats(zeeman.pop("weights", "")) if zeeman.get(
            "weights") else [],
    )
    for name, table in (("sweep", sweep), ("physical", phys), ("simulation", sim),
                        ("beam", beam), ("zeeman", zeeman)):
        table.pop("strengths", None)
        table.pop("weights", None)
        if table:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(table)}")
    return cfg
