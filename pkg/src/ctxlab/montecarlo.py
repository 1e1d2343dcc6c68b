"""Seeded trajectory sampling of hidden-variable models.

Randomness comes from numpy's Philox4x64-10 counter-based generator.
Stream for inequality term ``t`` under seed ``s`` is
``Philox(SeedSequence(s, spawn_key=(0, t)))``; error term ``k`` uses
``spawn_key=(1, k)``, and the last-measurement estimator ``spawn_key=(2,)``.
Each term is sampled from its own stream, so results do not depend on
evaluation order or on how terms are distributed over workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ctxlab.hvmodel import Model, value_table
from ctxlab.inequalities import CHSH_ERROR_TERMS, InequalityError, InequalitySpec

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RunConfig:
    shots: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    shots: int
    per_term_means: tuple[float, ...]
    per_term_std_errors: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "shots": self.shots,
            "per_term_means": list(self.per_term_means),
            "per_term_std_errors": list(self.per_term_std_errors),
        }


def make_rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed & SEED_MASK, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def simulate_paths(m: Model, length: int, shots: int, rng: np.random.Generator) -> np.ndarray:
    """``(shots, length)`` array of hidden states, one independent run per row.

    Each run draws its initial state from the mixture; the kernel acts after
    every measurement but the last.
    """
    states = np.empty((shots, length), dtype=np.int64)
    states[:, 0] = rng.choice(m.size, size=shots, p=m.initial)
    for k in range(1, length):
        states[:, k] = m.kernel.step(states[:, k - 1], rng)
    return states


def outcomes_for(m: Model, seq: Sequence[str], states: np.ndarray) -> np.ndarray:
    table = value_table(m.n)
    cols = [m.label_index(o) for o in seq]
    return np.stack([table[states[:, k], c] for k, c in enumerate(cols)], axis=1).astype(np.int64)


def simulate_sequence(m: Model, seq: Sequence[str], rng: np.random.Generator) -> tuple[int, ...]:
    """Outcomes of a single run measuring ``seq`` in order."""
    return tuple(int(v) for v in simulate_run(m, seq, rng)[0])


def simulate_run(m: Model, seq: Sequence[str], rng: np.random.Generator) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """One run: (outcomes, hidden state at each measurement)."""
    for o in seq:
        m.label_index(o)
    states = simulate_paths(m, len(seq), 1, rng)
    out = outcomes_for(m, seq, states)[0]
    return tuple(int(v) for v in out), tuple(int(s) for s in states[0])


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    mean = float(x.mean())
    if x.size < 2:
        return mean, 0.0
    return mean, float(x.std(ddof=1) / np.sqrt(x.size))


def _term_sample(m: Model, seq, shots: int, rng) -> tuple[float, float]:
    states = simulate_paths(m, len(seq), shots, rng)
    return _mean_se(outcomes_for(m, seq, states).prod(axis=1))


def estimate_inequality(spec: InequalitySpec, m: Model, cfg: RunConfig, workers: int = 1) -> Estimate:
    missing = [o for o in spec.labels if o not in m.labels]
    if missing:
        raise InequalityError(f"{spec.name}: model lacks observables {missing}")

    def job(ti):
        return _term_sample(m, spec.terms[ti].seq, cfg.shots, make_rng(cfg.seed, 0, ti))

    idx = range(len(spec.terms))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, idx))
    else:
        parts = [job(ti) for ti in idx]
    means = tuple(p[0] for p in parts)
    ses = tuple(p[1] for p in parts)
    coeffs = [t.coeff for t in spec.terms]
    mean = float(sum(c * x for c, x in zip(coeffs, means)))
    se = float(np.sqrt(sum((c * s) ** 2 for c, s in zip(coeffs, ses))))
    return Estimate(mean, se, cfg.shots, means, ses)


def estimate_error_terms(m: Model, cfg: RunConfig) -> dict[str, tuple[float, float]]:
    """Empirical disagreement frequencies for BAB, CBC, DCD and ADA as
    ``{"BAB": (p, std_error), ...}``."""
    out = {}
    for k, (outer, inner) in enumerate(CHSH_ERROR_TERMS):
        seq = (outer, inner, outer)
        for o in seq:
            m.label_index(o)
        states = simulate_paths(m, 3, cfg.shots, make_rng(cfg.seed, 1, k))
        vals = outcomes_for(m, seq, states)
        out["".join(seq)] = _mean_se((vals[:, 0] != vals[:, 2]).astype(float))
    return out


def estimate_last_measurement(m: Model, seq: Sequence[str], cfg: RunConfig) -> tuple[float, float]:
    """Empirical probability that the final measurement of ``seq`` reads +1."""
    for o in seq:
        m.label_index(o)
    states = simulate_paths(m, len(seq), cfg.shots, make_rng(cfg.seed, 2))
    return _mean_se((outcomes_for(m, seq, states)[:, -1] > 0).astype(float))
