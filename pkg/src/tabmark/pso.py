"""Constrained particle-swarm maximizer with box bounds.

Canonical velocity/position updates (no inertia term) stabilized by a
per-dimension velocity clamp; positions leaving the box are placed back on
the nearest bound with that velocity component negated and halved, so the
swarm quickly returns to the feasible region. Per-particle RNG streams are
derived from the master seed, which keeps results identical whether fitness
evaluations run serially or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError

VELOCITY_CLAMP_FRACTION = 0.2


@dataclass
class SwarmConfig:
    particles: int = 100
    iterations: int = 100
    c1: float = 2.0
    c2: float = 2.0
    velocity_max: float | None = None  # None: 0.2 * box width per dimension
    stagnation_window: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.particles < 2:
            raise ConfigError("particles must be >= 2")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ConfigError("acceleration constants must be > 0")
        if self.velocity_max is not None and self.velocity_max <= 0:
            raise ConfigError("velocity_max must be > 0")
        if self.stagnation_window < 1:
            raise ConfigError("stagnation_window must be >= 1")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_fitness: float


@dataclass(frozen=True)
class SwarmResult:
    best_position: np.ndarray
    best_fitness: float
    trace: tuple[float, ...]  # global-best fitness per iteration, non-decreasing
    iterations_run: int


def update_velocity(velocity: np.ndarray, position: np.ndarray,
                    best_position: np.ndarray, global_best: np.ndarray,
                    c1: float, c2: float,
                    r1: np.ndarray, r2: np.ndarray,
                    velocity_max: np.ndarray) -> np.ndarray:
    """One velocity step: pull toward the personal and global bests.

    ``r1``/``r2`` are per-dimension uniforms in [0, 1]; the result is clamped
    componentwise to [-velocity_max, velocity_max].
    """
    if not (velocity.shape == position.shape == best_position.shape
            == global_best.shape):
        raise ConfigError("velocity update: dimension mismatch")
    new = (velocity
           + c1 * r1 * (best_position - position)
           + c2 * r2 * (global_best - position))
    return np.clip(new, -velocity_max, velocity_max)


def update_position(position: np.ndarray, velocity: np.ndarray,
                    lower: np.ndarray, upper: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Move by the velocity, reflecting off the box bounds.

    A component leaving the box is placed on the violated bound and its
    velocity is negated and halved.
    """
    new_pos = position + velocity
    new_vel = velocity.copy()
    low_hit = new_pos < lower
    high_hit = new_pos > upper
    new_pos = np.where(low_hit, lower, new_pos)
    new_pos = np.where(high_hit, upper, new_pos)
    bounced = low_hit | high_hit
    new_vel = np.where(bounced, -0.5 * new_vel, new_vel)
    return new_pos, new_vel


def optimize(objective: Callable[[np.ndarray], float],
             bounds: Sequence[tuple[float, float]],
             config: SwarmConfig | None = None) -> SwarmResult:
    """Maximize ``objective`` over a box; deterministic under a fixed seed.

    Stops at the iteration budget or once the global best has not improved
    for ``stagnation_window`` consecutive iterations. The trace records the
    global-best fitness after every iteration and is monotone non-decreasing.
    """
    config = config or SwarmConfig()
    lower = np.array([b[0] for b in bounds], dtype=np.float64)
    upper = np.array([b[1] for b in bounds], dtype=np.float64)
    if lower.size == 0:
        raise ConfigError("bounds must not be empty")
    if np.any(lower > upper):
        raise ConfigError("invalid bounds: lower > upper")

    width = upper - lower
    if config.velocity_max is not None:
        v_max = np.full_like(width, config.velocity_max)
    else:
        v_max = VELOCITY_CLAMP_FRACTION * width
    # Degenerate box: the only feasible point is the box itself.
    if np.all(width == 0.0):
        point = lower.copy()
        fit = float(objective(point))
        return SwarmResult(point, fit, (fit,), 1)
    v_max = np.maximum(v_max, np.finfo(np.float64).tiny)

    streams = [np.random.default_rng(s)
               for s in np.random.SeedSequence(config.seed).spawn(config.particles)]
    particles: list[Particle] = []
    global_best: np.ndarray | None = None
    global_fit = -np.inf
    for rng in streams:
        pos = lower + rng.random(lower.size) * width
        vel = rng.random(lower.size) * v_max
        fit = float(objective(pos))
        particles.append(Particle(pos, vel, pos.copy(), fit))
        if fit > global_fit:
            global_fit = fit
            global_best = pos.copy()

    trace: list[float] = []
    since_improvement = 0
    iterations_run = 0
    for _ in range(config.iterations):
        iterations_run += 1
        improved = False
        for particle, rng in zip(particles, streams):
            r1 = rng.random(lower.size)
            r2 = rng.random(lower.size)
            particle.velocity = update_velocity(
                particle.velocity, particle.position, particle.best_position,
                global_best, config.c1, config.c2, r1, r2, v_max)
            particle.position, particle.velocity = update_position(
                particle.position, particle.velocity, lower, upper)
            fit = float(objective(particle.position))
            if fit > particle.best_fitness:
                particle.best_fitness = fit
                particle.best_position = particle.position.copy()
            if fit > global_fit:
                global_fit = fit
                global_best = particle.position.copy()
                improved = True
        trace.append(global_fit)
        since_improvement = 0 if improved else since_improvement + 1
        if since_improvement >= config.stagnation_window:
            break

    return SwarmResult(global_best, global_fit, tuple(trace), iterations_run)


def with_seed(config: SwarmConfig, seed: int) -> SwarmConfig:
    return replace(config, seed=seed)
