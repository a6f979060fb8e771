"""Monte Carlo simulation of the N-agent population under the decentralized
strategies.

Each replication integrates all N coupled state SDEs with Euler-Maruyama,
using independent Brownian increments per agent, and accumulates the
discounted per-agent running costs by a left-endpoint Riemann sum truncated
at the horizon.  The mean-field gap compares the finite-population average
state against the solved deterministic mean field at every grid point.

Randomness is fully reproducible: replication r draws from a generator
seeded by ``SeedSequence(seed, spawn_key=(r,))``, so results are identical
for a given config regardless of execution order or thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["SimConfig", "SimResult", "simulate"]


@dataclass(frozen=True)
class SimConfig:
    """Population size, grid, replication count and initial-state sampler.

    ``init_mean``/``init_cov`` parameterize i.i.d. Gaussian draws of the
    agents' initial states; they default to the problem's ``x0`` and a zero
    covariance (all agents start at the mean field).
    """

    N: int
    T: float
    dt: float
    replications: int = 1
    seed: int = 0
    init_mean: Optional[np.ndarray] = None
    init_cov: Optional[np.ndarray] = None
    store_paths: bool = field(default=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"need at least one agent, got N={self.N}")
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError(f"step dt must be positive, got {self.dt}")
        if not (self.T >= self.dt and np.isfinite(self.T)):
            raise ValueError(f"horizon T must be at least dt, got T={self.T}")
        if self.replications < 1:
            raise ValueError("replications must be positive")


@dataclass(frozen=True)
class SimResult:
    """Cost and consistency statistics across replications.

    ``per_rep_cost[r]`` is the agent-average discounted cost of replication
    r (truncated at the horizon; ``per_rep_tail[r]`` bounds the discarded
    tail as ``exp(-rho*T)/rho`` times the terminal running-cost level).
    ``per_rep_gap[r]`` is the sup over the grid of the distance between the
    population average state and the deterministic mean field.
    """

    t_grid: np.ndarray
    per_rep_cost: np.ndarray
    per_rep_gap: np.ndarray
    per_rep_tail: np.ndarray
    cost_mean: float
    cost_stderr: float
    gap_mean: float
    gap_std: float
    tail_mean: float
    mean_paths: Optional[list] = None


def _initial_transform(p, cfg):
    mean = p.x0 if cfg.init_mean is None else np.asarray(cfg.init_mean, float).reshape(p.n)
    if cfg.init_cov is None:
        return mean, np.zeros((p.n, p.n))
    cov = np.asarray(cfg.init_cov, dtype=float).reshape(p.n, p.n)
    cov = 0.5 * (cov + cov.T)
    w, v = np.linalg.eigh(cov)
    if w.min() < -1e-10 * max(abs(w).max(), 1.0):
        raise ValueError("init_cov must be positive semi-definite")
    return mean, v * np.sqrt(np.clip(w, 0.0, None))


def _running_cost(p, x, u, x_mean):
    dev = x - (p.Gamma @ x_mean + p.eta)
    return (np.einsum("ij,jk,ik->i", dev, p.Q, dev)
            + np.einsum("ij,jk,ik->i", u, p.R, u))


def _run_replication(p, strategy, cfg, t_grid, xbar, uff, rep):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(rep,)))
    mean, chol = _initial_transform(p, cfg)
    x = mean + rng.standard_normal((cfg.N, p.n)) @ chol.T
    a_cl = p.A + p.B @ strategy.K_x
    dt = float(t_grid[1] - t_grid[0])
    sq_dt = np.sqrt(dt)
    steps = t_grid.size - 1
    discount = np.exp(-p.rho * t_grid[:-1])
    cost = np.zeros(cfg.N)
    gap = 0.0
    path = np.empty((t_grid.size, p.n)) if cfg.store_paths else None
    for k in range(steps):
        x_mean = x.mean(axis=0)
        if path is not None:
            path[k] = x_mean
        gap = max(gap, float(np.linalg.norm(x_mean - xbar[k])))
        u = x @ strategy.K_x.T + uff[k]
        cost += discount[k] * _running_cost(p, x, u, x_mean) * dt
        drift = x @ a_cl.T + uff[k] @ p.B.T
        noise = rng.standard_normal((cfg.N, p.n2)) * sq_dt
        x = x + drift * dt + noise @ p.D.T
    x_mean = x.mean(axis=0)
    if path is not None:
        path[steps] = x_mean
    gap = max(gap, float(np.linalg.norm(x_mean - xbar[steps])))
    u = x @ strategy.K_x.T + uff[steps]
    terminal_level = float(_running_cost(p, x, u, x_mean).mean())
    tail = np.exp(-p.rho * float(t_grid[-1])) * terminal_level / p.rho
    return float(cost.mean()), gap, tail, path


def simulate(p, strategy, cfg, threads=1):
    """Run `cfg.replications` independent population simulations.

    `strategy` must come from a solved consistency system (it supplies the
    feedback gain, the feedforward input and the deterministic mean field).
    The problem's noise matrix `D` is required here even if zero.
    Replications run on up to `threads` workers; results do not depend on
    the thread count.
    """
    if p.D is None:
        raise ValueError("simulation requires the noise matrix D")
    steps = max(1, int(round(cfg.T / cfg.dt)))
    t_grid = np.arange(steps + 1) * cfg.dt
    xbar, s = strategy.solution.trajectory(t_grid)
    uff = s @ strategy.feedforward_gain.T

    def run(rep):
        return _run_replication(p, strategy, cfg, t_grid, xbar, uff, rep)

    if threads and threads > 1 and cfg.replications > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, range(cfg.replications)))
    else:
        rows = [run(rep) for rep in range(cfg.replications)]

    costs = np.array([r[0] for r in rows])
    gaps = np.array([r[1] for r in rows])
    tails = np.array([r[2] for r in rows])
    paths = [r[3] for r in rows] if cfg.store_paths else None
    reps = cfg.replications
    return SimResult(
        t_grid=t_grid,
        per_rep_cost=costs,
        per_rep_gap=gaps,
        per_rep_tail=tails,
        cost_mean=float(costs.mean()),
        cost_stderr=float(costs.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0,
        gap_mean=float(gaps.mean()),
        gap_std=float(gaps.std(ddof=1)) if reps > 1 else 0.0,
        tail_mean=float(tails.mean()),
        mean_paths=paths,
    )
