"""Pulse-period sweeps over the quantum, classical, and analytic backends.

Work is split into (kicking strength, period, trajectory block) tasks run
on a process pool; partial sums are reduced in fixed task order, so the
emitted numbers are identical for any worker count.  Quantum trajectory
i of grid point (p, t) is seeded with SeedSequence([master_seed, 0],
spawn_key=(p, t, i)); the classical ensemble of that point uses
SeedSequence([master_seed, 1], spawn_key=(p, t)).

A backend failure marks that grid point's row as failed and the sweep
carries on; the CLI turns any failed row into a nonzero exit status.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .analytic import dcl_experimental, dq_experimental
from .beam import BeamGeometry, PhiDSampler, ZeemanWeights, averaged_rate, mean_phi_ratio
from .config import SweepConfig
from .csim import run_classical_ensemble
from .qsim import BLOCK_SIZE, SimConfig, _block_spans, _run_block, reduce_partials
from .units import ScaledParams


@dataclass
class CurveRow:
    """One pulse period of an energy curve, experimental units."""

    period: float                 # s
    e_q: float = math.nan
    e_q_err: float = math.nan
    e_cl: float = math.nan
    e_cl_err: float = math.nan
    dq_analytic: float = math.nan
    dcl_analytic: float = math.nan
    failed: bool = False


@dataclass
class EnergyCurve:
    """Rows sorted by period plus identifying metadata."""

    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        periods = [row.period for row in self.rows]
        if periods != sorted(periods):
            raise ValueError("curve rows must be sorted by period")
        for row in self.rows:
            for err in (row.e_q_err, row.e_cl_err):
                if not math.isnan(err) and err < 0:
                    raise ValueError("standard errors must be >= 0")

    def column(self, name):
        return np.array([getattr(row, name) for row in self.rows])


@dataclass
class SweepResult:
    curves: list                  # one EnergyCurve per phi_d
    failures: int = 0


def _geometry(config: SweepConfig, phi_d):
    base = BeamGeometry(sigma_beam=config.sigma_beam,
                        sigma_cloud=config.sigma_cloud,
                        phi_d_max=1.0, cloud_cutoff=config.cloud_cutoff)
    phi_max = phi_d / mean_phi_ratio(base)
    return replace(base, phi_d_max=phi_max)


def _zeeman(config: SweepConfig, detuning):
    if not config.zeeman:
        return None
    if config.zeeman_strengths:
        weights = (config.zeeman_weights if config.zeeman_weights
                   else [1.0 / len(config.zeeman_strengths)] * len(config.zeeman_strengths))
        return ZeemanWeights(strengths=np.asarray(config.zeeman_strengths),
                             weights=np.asarray(weights), detuning_45=detuning)
    return ZeemanWeights.for_detuning(detuning, config.offset_54, config.offset_43)


def _sim_config(config: SweepConfig, p_idx, t_idx):
    phi_d = config.phi_d_list[p_idx]
    period = float(config.t_grid[t_idx])
    scaled = ScaledParams.from_period(phi_d, period, config.omega_r,
                                      config.tau_p, eta=config.eta)
    sampler = None
    if config.spread:
        sampler = PhiDSampler(geometry=_geometry(config, phi_d),
                              zeeman=_zeeman(config, config.detuning_list[p_idx]))
    return SimConfig(scaled=scaled, kicks=config.kicks,
                     pulse_mode=config.pulse_mode, substeps=config.substeps,
                     n_max=config.n_max, trajectories=config.trajectories,
                     initial_sigma=config.sigma, recoil_model=config.recoil_model,
                     jump_mode=config.jump_mode,
                     master_seed=(config.master_seed, 0),
                     boundary_tolerance=config.boundary_tolerance,
                     phi_sampler=sampler, seed_prefix=(p_idx, t_idx))


def _analytic_columns(config: SweepConfig, phi_d, period):
    omega_r = config.omega_r
    if config.spread:
        geom = _geometry(config, phi_d)
        dq = averaged_rate(geom.phi_d_max, period, geom,
                           lambda p, t: dq_experimental(p, t, omega_r))
        dcl = averaged_rate(geom.phi_d_max, period, geom,
                            lambda p, t: dcl_experimental(p, t, omega_r))
    else:
        dq = dq_experimental(phi_d, period, omega_r)
        dcl = dcl_experimental(phi_d, period, omega_r)
    return dq, dcl


def _quantum_task(args):
    sim_config, lo, hi = args
    return _run_block(sim_config, lo, hi)


def run_sweep(config: SweepConfig, existing_rows=None) -> SweepResult:
    """Run every (phi_d, T) grid point over the selected backends.

    existing_rows maps (p_idx, T key) -> CurveRow for --resume; those grid
    points are reused verbatim and not recomputed.
    """
    existing_rows = existing_rows or {}
    n_phi = len(config.phi_d_list)
    n_t = len(config.t_grid)
    want_q = "quantum" in config.backends
    want_cl = "classical" in config.backends

    def resumed(p, t):
        return existing_rows.get((p, _period_key(config.t_grid[t])))

    # quantum tasks across the whole sweep, finest grain = trajectory block
    tasks = []
    task_keys = []
    if want_q:
        for p in range(n_phi):
            for t in range(n_t):
                if resumed(p, t) is not None:
                    continue
                sim = _sim_config(config, p, t)
                for lo, hi in _block_spans(config.trajectories, BLOCK_SIZE):
                    tasks.append((sim, lo, hi))
                    task_keys.append((p, t, lo))

    results = {}
    errors = {}
    if tasks:
        if config.threads > 1:
            with ProcessPoolExecutor(max_workers=config.threads) as pool:
                futures = [pool.submit(_quantum_task, task) for task in tasks]
                for key, future in zip(task_keys, futures):
                    try:
                        results[key] = future.result()
                    except Exception as exc:
                        errors[key[:2]] = exc
        else:
            for key, task in zip(task_keys, tasks):
                try:
                    results[key] = _quantum_task(task)
                except Exception as exc:
                    errors[key[:2]] = exc

    failures = 0
    curves = []
    for p in range(n_phi):
        phi_d = config.phi_d_list[p]
        rows = []
        for t in range(n_t):
            period = float(config.t_grid[t])
            reused = resumed(p, t)
            if reused is not None:
                rows.append(reused)
                continue
            row = CurveRow(period=period)
            try:
                row.dq_analytic, row.dcl_analytic = _analytic_columns(
                    config, phi_d, period)
            except Exception:
                row.failed = True
            if want_q and not row.failed:
                if (p, t) in errors:
                    row.failed = True
                else:
                    try:
                        sim = _sim_config(config, p, t)
                        partials = [results[(p, t, lo)] for lo, _ in
                                    _block_spans(config.trajectories, BLOCK_SIZE)]
                        ens = reduce_partials(sim, partials)
                        row.e_q = float(ens.energy_mean[-1])
                        row.e_q_err = float(ens.energy_stderr[-1])
                    except Exception:
                        row.failed = True
            if want_cl and not row.failed:
                try:
                    sampler = (PhiDSampler(_geometry(config, phi_d),
                                           _zeeman(config, config.detuning_list[p]))
                               if config.spread else None)
                    seed = np.random.SeedSequence([config.master_seed, 1],
                                                  spawn_key=(p, t))
                    cl = run_classical_ensemble(
                        phi_d, period, config.omega_r, config.kicks,
                        config.classical_particles, config.sigma,
                        eta=config.eta, recoil_model=config.recoil_model,
                        seed=seed, phi_sampler=sampler)
                    row.e_cl = float(cl.energy_mean[-1])
                    row.e_cl_err = float(cl.energy_stderr[-1])
                except Exception:
                    row.failed = True
            failures += int(row.failed)
            rows.append(row)
        curves.append(EnergyCurve(rows=rows, metadata={
            "config_hash": config.config_hash(),
            "seed": config.master_seed,
            "version": __version__,
            "phi_d": phi_d,
        }))
    return SweepResult(curves=curves, failures=failures)


def _period_key(period):
    """Stable resume key: the period in us, rounded to a tenth of a nanosecond."""
    return round(float(period) * 1e6, 4)
