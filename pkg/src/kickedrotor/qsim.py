"""Monte Carlo wavefunction simulation of the atom-optics kicked rotor.

A trajectory is a plane wave on the momentum ladder n + beta (two-photon
recoil units), evolved one pulse period at a time:

    pulse   -- delta kick exp(i phi_d cos(phi)) applied in the position
               basis via FFT, or a symmetric split-step square pulse of
               scaled duration alpha with strength kappa/alpha;
    jump    -- with probability eta, a spontaneous-emission recoil that
               shifts the quasimomentum (and, in full-jump mode, mixes
               the two +-hbar k_L absorption branches);
    free    -- diagonal phases exp(-i kbar (n+beta)^2 fraction / 2).

Energies are recorded in experimental units, E'(n) = <(n+beta)^2>/2.

Trajectories are seeded independently of thread count and batch layout:
trajectory i of an ensemble uses numpy SeedSequence(master_seed,
spawn_key=seed_prefix + (i,)).  Each trajectory consumes its stream in a
fixed order (kicking-strength sample if a sampler is set, initial momentum,
per-kick jump lottery, then per-jump draws), so results are reproducible
in isolation.  Ensembles are evolved in fixed-size blocks and reduced in
block order, which makes ensemble statistics bit-identical for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .units import ScaledParams

BLOCK_SIZE = 64
MAX_N_MAX = 4096

_PULSE_MODES = ("delta", "square")
_RECOIL_MODELS = ("uniform", "dipole")
_JUMP_MODES = ("recoil-shift", "full-jump")


class TruncationError(RuntimeError):
    """Momentum ladder too small for the dynamics."""

    def __init__(self, kick, population, n_max):
        super().__init__(
            f"boundary population {population:.3e} exceeded tolerance at "
            f"kick {kick} with n_max={n_max}")
        self.kick = kick
        self.population = population
        self.n_max = n_max


@dataclass
class SimConfig:
    """Everything needed to run one quantum ensemble."""

    scaled: ScaledParams
    kicks: int
    pulse_mode: str = "delta"
    substeps: int | None = None        # square mode; None picks an alpha-based default
    n_max: int = 512
    trajectories: int = 2000
    initial_sigma: float = 4.0         # two-photon-recoil units
    recoil_model: str = "uniform"
    jump_mode: str = "recoil-shift"
    master_seed: int = 0
    boundary_tolerance: float = 1e-8
    phi_sampler: object = None         # optional callable rng -> phi_d
    seed_prefix: tuple = ()

    def __post_init__(self):
        if self.kicks < 1:
            raise ValueError("kicks must be >= 1")
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")
        if self.initial_sigma < 0:
            raise ValueError("initial_sigma must be >= 0")
        if self.pulse_mode not in _PULSE_MODES:
            raise ValueError(f"pulse_mode must be one of {_PULSE_MODES}")
        if self.recoil_model == "dipole-projected":
            self.recoil_model = "dipole"
        if self.recoil_model not in _RECOIL_MODELS:
            raise ValueError(f"recoil_model must be one of {_RECOIL_MODELS}")
        if self.jump_mode not in _JUMP_MODES:
            raise ValueError(f"jump_mode must be one of {_JUMP_MODES}")
        if self.pulse_mode == "square" and self.substeps is not None and self.substeps < 4:
            raise ValueError("square pulse needs at least 4 substeps")
        # the initial Gaussian must fit the ladder with negligible tail
        if self.initial_sigma > 0:
            tail = math.erfc(self.n_max / (self.initial_sigma * math.sqrt(2.0)))
            if tail >= 1e-8:
                raise ValueError(
                    f"n_max={self.n_max} too small for initial_sigma="
                    f"{self.initial_sigma} (tail {tail:.2e})")

    def resolved_substeps(self):
        # 8 keeps the step-doubling change of 30-kick energies below ~0.3%
        # over the experimental alpha range; 4 is the contract floor.
        if self.substeps is not None:
            return self.substeps
        return 8


@dataclass
class LatticeState:
    """Amplitudes on the ladder n in [-n_max, n_max] at quasimomentum beta."""

    amplitudes: np.ndarray
    beta: float
    kbar: float

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size % 2 == 0:
            raise ValueError("amplitudes must be a 1-D array of odd length")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm} is not 1")
        self.amplitudes = amps

    @property
    def n_max(self):
        return self.amplitudes.size // 2

    @property
    def ladder(self):
        return np.arange(-self.n_max, self.n_max + 1)

    def norm(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def energy(self):
        """Mean energy in experimental units, <(n+beta)^2>/2."""
        q = self.ladder + self.beta
        return float(0.5 * np.sum(np.abs(self.amplitudes) ** 2 * q * q))

    def boundary_population(self):
        return float(abs(self.amplitudes[0]) ** 2 + abs(self.amplitudes[-1]) ** 2)


# ---------------------------------------------------------------------------
# position-basis phase application (the only non-diagonal operation)

def _position_phase(amps, phase):
    """Multiply FFT-ordered momentum amplitudes by a position-basis phase."""
    pos = sfft.ifft(amps, axis=-1)
    pos *= phase
    return sfft.fft(pos, axis=-1, overwrite_x=True)


def _cos_grid(size):
    return np.cos(2.0 * np.pi * np.arange(size) / size)


def _to_fft_order(amps):
    return np.fft.ifftshift(amps, axes=-1)


def _to_natural_order(amps):
    return np.fft.fftshift(amps, axes=-1)


# ---------------------------------------------------------------------------
# single-state operations

def init_trajectory(config: SimConfig, rng) -> LatticeState:
    """Draw one momentum eigenstate |n0 + beta> from the thermal cloud.

    n0 + beta is Gaussian with standard deviation initial_sigma; draws
    beyond the ladder are rejected and resampled.
    """
    p, _ = _draw_initial_momentum(config, rng)
    return _state_from_momentum(config, p)


def _draw_initial_momentum(config, rng):
    sigma = config.initial_sigma
    rejected = 0
    for _ in range(10000):
        p = rng.normal(0.0, sigma) if sigma > 0 else 0.0
        if abs(p) <= config.n_max:
            return p, rejected
        rejected += 1
    raise ValueError(
        f"initial momentum rejection rate ~100% (sigma={sigma}, n_max={config.n_max})")


def _state_from_momentum(config, p):
    n0 = math.floor(p)
    beta = p - n0
    if beta >= 1.0:  # guard the half-open interval against rounding
        beta -= 1.0
        n0 += 1
    amps = np.zeros(2 * config.n_max + 1, dtype=np.complex128)
    amps[n0 + config.n_max] = 1.0
    return LatticeState(amplitudes=amps, beta=beta, kbar=config.scaled.kbar)


def apply_kick(state: LatticeState, phi_d) -> LatticeState:
    """Delta kick exp(i phi_d cos(phi)) (in place)."""
    a = _to_fft_order(state.amplitudes)[None, :]
    phase = np.exp(1j * phi_d * _cos_grid(state.amplitudes.size))
    state.amplitudes = _to_natural_order(_position_phase(a, phase))[0]
    return state


def apply_free(state: LatticeState, fraction) -> LatticeState:
    """Free evolution c_n *= exp(-i kbar (n+beta)^2 fraction / 2) (in place)."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    q = state.ladder + state.beta
    state.amplitudes *= np.exp(-0.5j * state.kbar * q * q * fraction)
    return state


def apply_square_pulse(state: LatticeState, phi_d, alpha, substeps=4) -> LatticeState:
    """Square pulse of scaled duration alpha followed by free evolution 1-alpha.

    Symmetric split-step integration of rho^2/2 - (kappa/alpha) cos(phi)
    over the pulse, in `substeps` kinetic steps; converges to
    apply_kick + apply_free as alpha -> 0.
    """
    if substeps < 4:
        raise ValueError(f"square pulse needs at least 4 substeps, got {substeps}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    size = state.amplitudes.size
    q = state.ladder + state.beta
    dt = alpha / substeps
    half_kick = np.exp(0.5j * (phi_d / substeps) * _cos_grid(size))
    full_kick = half_kick * half_kick
    free_sub = np.exp(-0.5j * state.kbar * q * q * dt)
    a = _to_fft_order(state.amplitudes)[None, :]
    a = _position_phase(a, half_kick)
    for _ in range(substeps - 1):
        a *= _to_fft_order(free_sub)
        a = _position_phase(a, full_kick)
    a *= _to_fft_order(free_sub)
    a = _position_phase(a, half_kick)
    state.amplitudes = _to_natural_order(a)[0]
    return apply_free(state, 1.0 - alpha)


def _draw_recoil(rng, recoil_model):
    """Projected recoil u on [-1, 1]: uniform, or the dipole density 3/8 (1+u^2)."""
    if recoil_model == "uniform":
        return rng.uniform(-1.0, 1.0)
    while True:
        u = rng.uniform(-1.0, 1.0)
        if rng.random() < 0.5 * (1.0 + u * u):
            return u


def _shift_ladder(amps, k):
    """Shift the (natural-order) ladder by k sites, returning dropped weight."""
    if k == 0:
        return amps, 0.0
    out = np.zeros_like(amps)
    if k > 0:
        dropped = float(np.sum(np.abs(amps[-k:]) ** 2))
        out[k:] = amps[:-k]
    else:
        dropped = float(np.sum(np.abs(amps[:-k]) ** 2))
        out[:k] = amps[-k:]
    return out, dropped


def spontaneous_jump(state: LatticeState, eta, recoil_model, jump_mode, rng) -> LatticeState:
    """Spontaneous-emission lottery for one kick window (in place).

    With probability eta the atom scatters a photon: the absorbed lattice
    photon contributes +-1/2 (recoil-shift mode draws the sign; full-jump
    mode keeps both branches coherently via cos(phi/2)) and the emitted
    photon contributes u/2 with u drawn from the projected distribution.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    if eta == 0.0 or rng.random() >= eta:
        return state
    u = _draw_recoil(rng, recoil_model)
    if jump_mode == "recoil-shift":
        s = 1.0 if rng.random() < 0.5 else -1.0
        x = state.beta + 0.5 * s + 0.5 * u
        k = math.floor(x)
        state.amplitudes, _ = _shift_ladder(state.amplitudes, k)
        state.beta = x - k
    else:
        x = state.beta + 0.5 * (u + 1.0)
        k_plus = math.floor(x)
        up, _ = _shift_ladder(state.amplitudes, k_plus)
        down, _ = _shift_ladder(state.amplitudes, k_plus - 1)
        mixed = 0.5 * (up + down)
        norm = np.sqrt(np.sum(np.abs(mixed) ** 2))
        if norm == 0.0:
            raise RuntimeError("full jump annihilated the state")
        state.amplitudes = mixed / norm
        state.beta = x - k_plus
    return state


# ---------------------------------------------------------------------------
# block engine: many trajectories evolved as rows of one array

class _Block:
    """Fixed set of trajectories sharing one ladder, evolved kick by kick."""

    def __init__(self, config: SimConfig, seeds):
        self.config = config
        self.count = len(seeds)
        self.size = 2 * config.n_max + 1
        self.n_max = config.n_max
        nat = np.arange(-config.n_max, config.n_max + 1)
        self.n_fft = _to_fft_order(nat)
        self.cosphi = _cos_grid(self.size)
        self.rngs = [np.random.default_rng(s) for s in seeds]
        self.rejections = 0
        self.draws = 0

        scaled = config.scaled
        self.eta = scaled.eta
        self.phi = np.empty(self.count)
        self.beta = np.empty(self.count)
        self.amps = np.zeros((self.count, self.size), dtype=np.complex128)
        for i, rng in enumerate(self.rngs):
            self.phi[i] = (config.phi_sampler(rng) if config.phi_sampler is not None
                           else scaled.phi_d)
            p, rej = _draw_initial_momentum(config, rng)
            self.rejections += rej
            self.draws += rej + 1
            n0 = math.floor(p)
            beta = p - n0
            if beta >= 1.0:
                beta -= 1.0
                n0 += 1
            self.beta[i] = beta
            self.amps[i, n0 % self.size] = 1.0  # ladder site n sits at fft index n mod size
        self.lottery = (np.stack([rng.random(config.kicks) for rng in self.rngs])
                        if self.eta > 0.0 else None)

        self.jumps = np.zeros(self.count, dtype=int)
        self.dropped = np.zeros(self.count)
        self.failed = {}          # row -> TruncationError
        self.alive = np.ones(self.count, dtype=bool)

        self._ph2 = None          # kbar (n+beta)^2 / 2 per row
        self._free_cache = {}
        self._build_phase_rows(range(self.count))
        if config.pulse_mode == "delta":
            self.kick_phase = np.exp(1j * self.phi[:, None] * self.cosphi[None, :])
        else:
            m = config.resolved_substeps()
            self.substeps = m
            self.kick_half = np.exp(0.5j * (self.phi / m)[:, None] * self.cosphi[None, :])
            self.kick_full = self.kick_half * self.kick_half

    def _build_phase_rows(self, rows):
        if self._ph2 is None:
            self._ph2 = np.empty((self.count, self.size))
        for i in rows:
            q = self.n_fft + self.beta[i]
            self._ph2[i] = 0.5 * self.config.scaled.kbar * q * q
            for fraction, cache in self._free_cache.items():
                cache[i] = np.exp(-1j * fraction * self._ph2[i])

    def _free_phase(self, fraction):
        cache = self._free_cache.get(fraction)
        if cache is None:
            cache = np.exp(-1j * fraction * self._ph2)
            self._free_cache[fraction] = cache
        return cache

    def energies(self):
        return np.einsum("ij,ij->i", np.abs(self.amps) ** 2, self._ph2) / self.config.scaled.kbar

    def _jump_row(self, i, rng):
        cfg = self.config
        u = _draw_recoil(rng, cfg.recoil_model)
        nat = _to_natural_order(self.amps[i])
        if cfg.jump_mode == "recoil-shift":
            s = 1.0 if rng.random() < 0.5 else -1.0
            x = self.beta[i] + 0.5 * s + 0.5 * u
            k = math.floor(x)
            nat, drop = _shift_ladder(nat, k)
            self.beta[i] = x - k
            self.dropped[i] += drop
        else:
            x = self.beta[i] + 0.5 * (u + 1.0)
            k_plus = math.floor(x)
            up, d1 = _shift_ladder(nat, k_plus)
            down, d2 = _shift_ladder(nat, k_plus - 1)
            nat = 0.5 * (up + down)
            norm = np.sqrt(np.sum(np.abs(nat) ** 2))
            nat /= norm
            self.beta[i] = x - k_plus
            self.dropped[i] += 0.5 * (d1 + d2)
        self.amps[i] = _to_fft_order(nat)
        self.jumps[i] += 1
        self._build_phase_rows([i])

    def _check_boundaries(self, kick):
        # fft-order positions of n = +n_max and n = -n_max
        hi = np.abs(self.amps[:, self.n_max]) ** 2
        lo = np.abs(self.amps[:, self.n_max + 1]) ** 2
        pop = hi + lo + self.dropped
        bad = np.flatnonzero((pop > self.config.boundary_tolerance) & self.alive)
        for i in bad:
            self.failed[i] = TruncationError(kick, float(pop[i]), self.n_max)
            self.alive[i] = False
            self.amps[i] = 0.0
            self.amps[i, 0] = 1.0  # keep the row numerically harmless

    def run(self):
        """Evolve all kicks; returns (energies (count, kicks+1), jumps, failed)."""
        cfg = self.config
        out = np.empty((self.count, cfg.kicks + 1))
        out[:, 0] = self.energies()
        square = cfg.pulse_mode == "square"
        if square:
            alpha = cfg.scaled.alpha
            dt = alpha / self.substeps
            tail = 1.0 - alpha
        for kick in range(cfg.kicks):
            if square:
                self.amps = _position_phase(self.amps, self.kick_half)
                free_sub = self._free_phase(dt)
                for _ in range(self.substeps - 1):
                    self.amps *= free_sub
                    self.amps = _position_phase(self.amps, self.kick_full)
                self.amps *= free_sub
                self.amps = _position_phase(self.amps, self.kick_half)
            else:
                self.amps = _position_phase(self.amps, self.kick_phase)
            if self.eta > 0.0:
                for i in np.flatnonzero(self.lottery[:, kick] < self.eta):
                    if self.alive[i]:
                        self._jump_row(i, self.rngs[i])
            self.amps *= self._free_phase(tail if square else 1.0)
            out[:, kick + 1] = self.energies()
            self._check_boundaries(kick)
        return out, self.jumps, self.failed


def run_trajectory(config: SimConfig, seed):
    """Energy series E'(0..N) of a single trajectory, deterministic in (config, seed)."""
    block = _Block(config, [seed])
    energies, _, failed = block.run()
    if failed:
        raise failed[0]
    return energies[0]


@dataclass
class EnsembleResult:
    """Ensemble mean energies with standard errors and per-kick rates."""

    energy_mean: np.ndarray       # E'(0..N)
    energy_stderr: np.ndarray
    rates: np.ndarray             # D'(n) = E'(n+1) - E'(n)
    trajectories: int
    jumps_total: int
    rejection_rate: float
    n_max_retries: int = 0

    def rate_sequence(self, saturated=False):
        from .analytic import RateSequence
        return RateSequence(self.rates, saturated=saturated)


def _trajectory_seed(config, index):
    return np.random.SeedSequence(config.master_seed,
                                  spawn_key=tuple(config.seed_prefix) + (index,))


def _block_spans(total, block_size=BLOCK_SIZE):
    return [(lo, min(lo + block_size, total)) for lo in range(0, total, block_size)]


def _run_block(config, lo, hi):
    seeds = [_trajectory_seed(config, i) for i in range(lo, hi)]
    block = _Block(config, seeds)
    energies, jumps, failed = block.run()
    # retry truncated rows on progressively larger ladders
    for row, err in sorted(failed.items()):
        retry_cfg = config
        while True:
            if retry_cfg.n_max * 2 > MAX_N_MAX:
                raise TruncationError(err.kick, err.population, retry_cfg.n_max)
            retry_cfg = replace(retry_cfg, n_max=retry_cfg.n_max * 2)
            sub = _Block(retry_cfg, [seeds[row]])
            e, j, f = sub.run()
            if not f:
                energies[row] = e[0]
                jumps[row] = j[0]
                break
            err = f[0]
    return (energies.sum(axis=0), (energies ** 2).sum(axis=0),
            int(jumps.sum()), block.rejections, block.draws, len(failed))


def reduce_partials(config: SimConfig, partials) -> EnsembleResult:
    """Combine per-block partial sums in block order into ensemble statistics."""
    n = config.trajectories
    total = np.zeros(config.kicks + 1)
    total_sq = np.zeros(config.kicks + 1)
    jumps = 0
    rejections = 0
    draws = 0
    retried = 0
    for part in partials:  # fixed block order
        total += part[0]
        total_sq += part[1]
        jumps += part[2]
        rejections += part[3]
        draws += part[4]
        retried += part[5]
    if draws > 0 and rejections / draws > 0.01:
        raise ValueError(
            f"initial-momentum rejection rate {rejections / draws:.2%} exceeds 1%")
    mean = total / n
    if n > 1:
        var = np.maximum(total_sq - n * mean**2, 0.0) / (n - 1)
        stderr = np.sqrt(var / n)
    else:
        stderr = np.zeros_like(mean)
    return EnsembleResult(energy_mean=mean, energy_stderr=stderr,
                          rates=np.diff(mean), trajectories=n,
                          jumps_total=jumps,
                          rejection_rate=rejections / draws if draws else 0.0,
                          n_max_retries=retried)


def run_ensemble(config: SimConfig, workers=1) -> EnsembleResult:
    """Mean energy and per-kick diffusion rates over independent trajectories.

    Trajectory seeds derive from master_seed by index, blocks are fixed-size,
    and block partials are reduced in index order, so the result does not
    depend on `workers`.
    """
    spans = _block_spans(config.trajectories)
    if workers > 1 and len(spans) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_run_block, [config] * len(spans),
                                     [s[0] for s in spans], [s[1] for s in spans]))
    else:
        partials = [_run_block(config, lo, hi) for lo, hi in spans]
    return reduce_partials(config, partials)
