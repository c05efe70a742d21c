"""Singular-configuration search: global-best particle swarm minimization of
the manipulability measure, and collection of reproducible singular sets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .batched import det_jacobian_batch, jacobian_batch
from .chain import KinematicChain


class SearchBudgetError(RuntimeError):
    """Raised when the restart budget is exhausted before enough singular
    configurations were collected."""


def _default_bounds() -> np.ndarray:
    return np.full(6, np.pi)


@dataclass(frozen=True)
class PsoParams:
    """Global-best PSO constants (constriction-style defaults)."""

    swarm_size: int = 50
    inertia_w: float = 0.729
    cognitive_c1: float = 1.49445
    social_c2: float = 1.49445
    max_iters: int = 500
    tol: float = 1e-8
    lower: np.ndarray = field(default_factory=lambda: -_default_bounds())
    upper: np.ndarray = field(default_factory=_default_bounds)

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not np.all(self.lower < self.upper):
            raise ValueError("lower bounds must be below upper bounds")

    def to_dict(self) -> dict:
        return {
            "swarm_size": self.swarm_size,
            "inertia_w": self.inertia_w,
            "cognitive_c1": self.cognitive_c1,
            "social_c2": self.social_c2,
            "max_iters": self.max_iters,
            "tol": self.tol,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }

    @staticmethod
    def from_dict(data: dict) -> "PsoParams":
        return PsoParams(
            swarm_size=int(data["swarm_size"]),
            inertia_w=float(data["inertia_w"]),
            cognitive_c1=float(data["cognitive_c1"]),
            social_c2=float(data["social_c2"]),
            max_iters=int(data["max_iters"]),
            tol=float(data["tol"]),
            lower=np.asarray(data["lower"], dtype=float),
            upper=np.asarray(data["upper"], dtype=float),
        )


def pso_minimize(
    objective: Callable[[np.ndarray], float],
    params: PsoParams,
    seed,
    batch_objective: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> tuple[np.ndarray, float]:
    """Global-best PSO over a box.

    Velocity update v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x); positions
    are clipped to the bounds.  Deterministic for a fixed seed; returns the
    best position and value found, even when the tolerance was not reached
    (the caller filters).  ``batch_objective`` evaluates a (k, dim) batch in
    one call and must agree with ``objective``; it only changes the speed.
    """
    rng = np.random.default_rng(seed)
    dim = params.lower.size
    evaluate = batch_objective or (
        lambda positions: np.array([objective(p) for p in positions])
    )

    positions = rng.uniform(params.lower, params.upper, size=(params.swarm_size, dim))
    velocities = np.zeros_like(positions)
    scores = evaluate(positions)

    pbest = positions.copy()
    pbest_scores = scores.copy()
    best = int(np.argmin(scores))
    gbest = positions[best].copy()
    gbest_score = float(scores[best])

    for _ in range(params.max_iters):
        if gbest_score <= params.tol:
            break
        r1 = rng.random((params.swarm_size, dim))
        r2 = rng.random((params.swarm_size, dim))
        velocities = (
            params.inertia_w * velocities
            + params.cognitive_c1 * r1 * (pbest - positions)
            + params.social_c2 * r2 * (gbest - positions)
        )
        positions = np.clip(positions + velocities, params.lower, params.upper)
        scores = evaluate(positions)

        improved = scores < pbest_scores
        pbest[improved] = positions[improved]
        pbest_scores[improved] = scores[improved]
        best = int(np.argmin(pbest_scores))
        if pbest_scores[best] < gbest_score:
            gbest = pbest[best].copy()
            gbest_score = float(pbest_scores[best])

    return gbest, gbest_score


@dataclass(frozen=True)
class SingularSet:
    """Reproducible set of singular configurations with their residuals."""

    configs: np.ndarray  # (count, n)
    residuals: np.ndarray  # (count,) values of |det J|
    seed: int
    params: PsoParams

    def __post_init__(self):
        object.__setattr__(self, "configs", np.asarray(self.configs, dtype=float))
        object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float))
        if self.configs.shape[0] != self.residuals.shape[0]:
            raise ValueError("configs and residuals must have equal length")
        if np.any(self.residuals > self.params.tol):
            raise ValueError("all residuals must be at or below the search tolerance")

    def __len__(self) -> int:
        return self.configs.shape[0]


def collect_singular_set(
    chain: KinematicChain,
    count: int,
    params: PsoParams,
    seed: int,
    dedup: bool = True,
    dedup_min_dist: float = 1e-3,
    sigma_min_bound: float = 1e-6,
    max_restarts: Optional[int] = None,
) -> SingularSet:
    """Run PSO restarts from uniform random starts until ``count`` singular
    configurations were collected.

    A configuration is accepted when |det J| <= tol, the smallest singular
    value of J confirms the rank loss (below ``sigma_min_bound``), and, with
    ``dedup`` (default), its max-norm distance to every accepted configuration
    exceeds ``dedup_min_dist``.  Restart RNG streams are spawned from the seed
    in restart order, so an identical (seed, params) pair reproduces the set
    exactly.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if max_restarts is None:
        max_restarts = max(4 * count, 64)

    def batch_objective(positions: np.ndarray) -> np.ndarray:
        return det_jacobian_batch(chain, positions)

    def objective(position: np.ndarray) -> float:
        return float(batch_objective(position[None, :])[0])

    restart_seeds = np.random.SeedSequence(seed).spawn(max_restarts)
    accepted: list[np.ndarray] = []
    residuals: list[float] = []

    for restart_seed in restart_seeds:
        if len(accepted) >= count:
            break
        best_q, best_value = pso_minimize(
            objective, params, restart_seed, batch_objective=batch_objective
        )
        if best_value > params.tol:
            continue
        sigma_min = np.linalg.svd(
            jacobian_batch(chain, best_q[None, :])[0], compute_uv=False
        )[-1]
        if sigma_min >= sigma_min_bound:
            continue
        if dedup and accepted:
            distances = np.abs(np.asarray(accepted) - best_q[None, :]).max(axis=1)
            if distances.min() <= dedup_min_dist:
                continue
        accepted.append(best_q)
        residuals.append(best_value)

    if len(accepted) < count:
        raise SearchBudgetError(
            f"collected only {len(accepted)}/{count} singular configurations "
            f"within {max_restarts} restarts; tolerance {params.tol:g} may be "
            "infeasible for this budget"
        )

    return SingularSet(
        configs=np.asarray(accepted),
        residuals=np.asarray(residuals),
        seed=seed,
        params=params,
    )


def save_singular_set(singular_set: SingularSet, path: str | Path) -> None:
    payload = {
        "seed": singular_set.seed,
        "params": singular_set.params.to_dict(),
        "configs": singular_set.configs.tolist(),
        "residuals": singular_set.residuals.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2))


def load_singular_set(path: str | Path) -> SingularSet:
    data = json.loads(Path(path).read_text())
    return SingularSet(
        configs=np.asarray(data["configs"], dtype=float),
        residuals=np.asarray(data["residuals"], dtype=float),
        seed=int(data["seed"]),
        params=PsoParams.from_dict(data["params"]),
    )
