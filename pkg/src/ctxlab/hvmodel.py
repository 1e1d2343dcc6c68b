"""Deterministic value assignments, mixtures and measurement-independent
state transitions.

A hidden state is an integer ``i`` in ``[0, 2**n)``. Bit ``n-1-k`` of ``i``
encodes the value of the k-th observable: a clear bit means +1, a set bit
means -1. The first label is therefore the most significant bit, so for
labels ``A, B, C, D`` the state 2 is ``(+, +, -, +)`` and 8 is ``(-, +, +, +)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from ctxlab import MAX_OBSERVABLES, CapacityError

STOCHASTIC_TOL = 1e-12


class ModelError(ValueError):
    """Invalid model, kernel or label."""


def _check_n(n: int) -> None:
    if n < 1:
        raise ModelError(f"need at least one observable, got n={n}")
    if n > MAX_OBSERVABLES:
        raise CapacityError(f"n={n} exceeds the supported maximum of {MAX_OBSERVABLES} observables")


def index_to_assignment(i: int, n: int) -> tuple[int, ...]:
    """Decode a hidden-state index into its tuple of +/-1 values."""
    if not 0 <= i < 2**n:
        raise ModelError(f"state index {i} out of range for n={n}")
    return tuple(1 - 2 * ((i >> (n - 1 - k)) & 1) for k in range(n))


def assignment_to_index(values: Sequence[int]) -> int:
    i = 0
    for v in values:
        if v not in (1, -1):
            raise ModelError(f"assignment values must be +1 or -1, got {v!r}")
        i = (i << 1) | (v == -1)
    return i


@lru_cache(maxsize=None)
def value_table(n: int) -> np.ndarray:
    """``(2**n, n)`` int8 array; row i holds the values of state i."""
    _check_n(n)
    idx = np.arange(2**n)[:, None]
    shifts = np.arange(n - 1, -1, -1)[None, :]
    table = (1 - 2 * ((idx >> shifts) & 1)).astype(np.int8)
    table.flags.writeable = False
    return table


@dataclass(frozen=True)
class Assignment:
    index: int
    n: int

    def __post_init__(self):
        _check_n(self.n)
        if not 0 <= self.index < 2**self.n:
            raise ModelError(f"state index {self.index} out of range for n={self.n}")

    @property
    def values(self) -> tuple[int, ...]:
        return index_to_assignment(self.index, self.n)

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "Assignment":
        return cls(assignment_to_index(values), len(values))

    def __str__(self):
        return f"λ{self.index}({''.join('+' if v > 0 else '-' for v in self.values)})"


def assignment_value(a: Assignment, obs: str, labels: Sequence[str]) -> int:
    """Value that assignment ``a`` attributes to observable ``obs``."""
    labels = list(labels)
    if len(labels) != a.n:
        raise ModelError(f"{len(labels)} labels given for an assignment over {a.n} observables")
    try:
        k = labels.index(obs)
    except ValueError:
        raise ModelError(f"unknown observable {obs!r}") from None
    return a.values[k]


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Row-stochastic map applied to the hidden state after every measurement.

    ``kind`` is ``"identity"``, ``"deterministic"`` (``targets[i]`` is the
    successor of state i) or ``"dense"`` (``matrix[i, j]`` is the probability
    of i -> j).
    """

    kind: str
    size: int
    targets: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "identity":
            return
        if self.kind == "deterministic":
            t = np.asarray(self.targets, dtype=np.int64)
            if t.shape != (self.size,):
                raise ModelError(f"deterministic map needs {self.size} targets, got shape {t.shape}")
            bad = np.flatnonzero((t < 0) | (t >= self.size))
            if bad.size:
                raise ModelError(f"deterministic map entry {bad[0]} targets {t[bad[0]]}, outside [0, {self.size})")
            t.flags.writeable = False
            object.__setattr__(self, "targets", t)
        elif self.kind == "dense":
            mat = np.array(self.matrix, dtype=float)
            if mat.shape != (self.size, self.size):
                raise ModelError(f"dense kernel must be {self.size}x{self.size}, got shape {mat.shape}")
            if not np.all(np.isfinite(mat)):
                raise ModelError("dense kernel has non-finite entries")
            neg = np.argwhere((mat < 0) | (mat > 1))
            if neg.size:
                r, c = neg[0]
                raise ModelError(f"kernel row {r} has entry {mat[r, c]!r} at column {c} outside [0, 1]")
            sums = mat.sum(axis=1)
            off = np.flatnonzero(np.abs(sums - 1) > STOCHASTIC_TOL)
            if off.size:
                r = off[0]
                raise ModelError(f"kernel row {r} sums to {sums[r]!r}, expected 1")
            mat.flags.writeable = False
            object.__setattr__(self, "matrix", mat)
        else:
            raise ModelError(f"unknown kernel type {self.kind!r}")

    @classmethod
    def identity(cls, size: int) -> "TransitionKernel":
        return cls("identity", size)

    @classmethod
    def deterministic(cls, targets: Sequence[int]) -> "TransitionKernel":
        return cls("deterministic", len(targets), targets=np.asarray(targets))

    @classmethod
    def dense(cls, matrix) -> "TransitionKernel":
        matrix = np.asarray(matrix, dtype=float)
        return cls("dense", matrix.shape[0], matrix=matrix)

    def propagate(self, weights: np.ndarray) -> np.ndarray:
        """Push a (sub-)distribution over states one step forward."""
        if self.kind == "identity":
            return weights
        if self.kind == "deterministic":
            return np.bincount(self.targets, weights=weights, minlength=self.size)
        return weights @ self.matrix

    def to_dense(self) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(self.size)
        if self.kind == "deterministic":
            out = np.zeros((self.size, self.size))
            out[np.arange(self.size), self.targets] = 1.0
            return out
        return np.array(self.matrix)

    def step(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Sample one successor for each entry of ``states``."""
        if self.kind == "identity":
            return states.copy()
        if self.kind == "deterministic":
            return self.targets[states]
        u = rng.random(states.shape[0])
        out = np.empty_like(states)
        # group by current state so each cumulative row is built once
        order = np.argsort(states, kind="stable")
        uniq, starts = np.unique(states[order], return_index=True)
        bounds = np.append(starts, states.shape[0])
        for s, lo, hi in zip(uniq, bounds[:-1], bounds[1:]):
            sel = order[lo:hi]
            cdf = np.cumsum(self.matrix[s])
            out[sel] = np.minimum(np.searchsorted(cdf, u[sel], side="right"), self.size - 1)
        return out

    def to_dict(self) -> dict:
        if self.kind == "identity":
            return {"type": "identity"}
        if self.kind == "deterministic":
            return {"type": "deterministic", "map": [int(t) for t in self.targets]}
        return {"type": "dense", "rows": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, d: dict, size: int) -> "TransitionKernel":
        kind = d.get("type")
        if kind == "identity":
            return cls.identity(size)
        if kind == "deterministic":
            return cls("deterministic", size, targets=np.asarray(d["map"]))
        if kind == "dense":
            return cls("dense", size, matrix=np.asarray(d["rows"], dtype=float))
        raise ModelError(f"unknown kernel type {kind!r}")


@dataclass(frozen=True, eq=False)
class Model:
    """Initial mixture over the ``2**n`` hidden states plus a transition kernel."""

    labels: tuple[str, ...]
    initial: np.ndarray
    kernel: TransitionKernel = field(default=None)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        _check_n(len(labels))
        if len(set(labels)) != len(labels):
            raise ModelError(f"labels must be unique, got {labels}")
        size = 2 ** len(labels)
        init = np.array(self.initial, dtype=float)
        if init.shape != (size,):
            raise ModelError(f"initial distribution must have length {size}, got shape {init.shape}")
        if np.any((init < 0) | (init > 1)) or not np.all(np.isfinite(init)):
            raise ModelError("initial distribution entries must lie in [0, 1]")
        if abs(init.sum() - 1) > STOCHASTIC_TOL:
            raise ModelError(f"initial distribution sums to {init.sum()!r}, expected 1")
        init.flags.writeable = False
        object.__setattr__(self, "initial", init)
        kernel = self.kernel if self.kernel is not None else TransitionKernel.identity(size)
        if kernel.size != size:
            raise ModelError(f"kernel acts on {kernel.size} states, model has {size}")
        object.__setattr__(self, "kernel", kernel)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def size(self) -> int:
        return 2**self.n

    @classmethod
    def point_mass(cls, labels, state: int, kernel: TransitionKernel | None = None) -> "Model":
        init = np.zeros(2 ** len(labels))
        init[state] = 1.0
        return cls(tuple(labels), init, kernel)

    def label_index(self, obs: str) -> int:
        try:
            return self.labels.index(obs)
        except ValueError:
            raise ModelError(f"unknown observable {obs!r}; model labels are {list(self.labels)}") from None

    def values(self, obs: str) -> np.ndarray:
        return value_table(self.n)[:, self.label_index(obs)].astype(float)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "labels": list(self.labels),
            "initial": self.initial.tolist(),
            "kernel": self.kernel.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Model":
        try:
            labels = tuple(d["labels"])
            n = int(d.get("n", len(labels)))
            initial = d["initial"]
            kernel_d = d.get("kernel", {"type": "identity"})
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed model document: missing {exc}") from None
        if n != len(labels):
            raise ModelError(f"n={n} but {len(labels)} labels given")
        _check_n(n)
        return cls(labels, np.asarray(initial, dtype=float), TransitionKernel.from_dict(kernel_d, 2**n))


def load_model(path: str | Path) -> Model:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: not valid JSON ({exc})") from None
    return Model.from_dict(doc)


def sequence_expectation(m: Model, seq: Sequence[str]) -> float:
    """Exact expectation of the product of outcomes along ``seq``.

    Sums over all state paths: initial weight, one kernel step between
    consecutive measurements, product of the values read at each position.
    """
    if not seq:
        raise ModelError("sequence must be non-empty")
    cols = [m.values(o) for o in seq]
    w = np.array(m.initial)
    for k, v in enumerate(cols):
        w = w * v
        if k < len(cols) - 1:
            w = m.kernel.propagate(w)
    return float(w.sum())


def error_term(m: Model, outer: str, inner: str) -> float:
    """Probability that ``outer`` disagrees between positions 1 and 3 of
    ``outer, inner, outer``.

    The inner label is validated but cannot influence the result: transitions
    ignore which observable was measured.
    """
    v = m.values(outer)
    m.label_index(inner)
    total = 0.0
    for sign in (1.0, -1.0):
        w = m.initial * (v == sign)
        w = m.kernel.propagate(m.kernel.propagate(w))
        total += float(w[v == -sign].sum())
    return total


def last_measurement_distribution(m: Model, seq: Sequence[str]) -> float:
    """Probability that the final observable in ``seq`` reads +1."""
    if not seq:
        raise ModelError("sequence must be non-empty")
    for o in seq:
        m.label_index(o)
    w = np.array(m.initial)
    for _ in range(len(seq) - 1):
        w = m.kernel.propagate(w)
    return float(w[m.values(seq[-1]) > 0].sum())


def random_model(labels: Sequence[str], rng: np.random.Generator, kernel: str = "dense") -> Model:
    """Random model with a Dirichlet initial mixture.

    ``kernel="dense"`` draws Dirichlet rows; ``"deterministic"`` draws a
    random successor map (cheap for large n).
    """
    size = 2 ** len(labels)
    initial = rng.dirichlet(np.full(size, 0.5))
    if kernel == "dense":
        rows = rng.dirichlet(np.full(size, 0.5), size=size)
        k = TransitionKernel.dense(rows / rows.sum(axis=1, keepdims=True))
    elif kernel == "deterministic":
        k = TransitionKernel.deterministic(rng.integers(0, size, size))
    elif kernel == "identity":
        k = TransitionKernel.identity(size)
    else:
        raise ModelError(f"unknown kernel type {kernel!r}")
    return Model(tuple(labels), initial / initial.sum(), k)
