"""Exhaustive static and evolving bounds with witness extraction.

The evolving bound is the optimum of an inequality's K-value over every
tuple of hidden states (one per sequence position). Any mixture of evolutions
is a convex combination of K-values, so no evolving model can exceed it. The
static bound restricts the search to constant tuples, i.e. ordinary
noncontextual assignments.

K is multilinear in the per-position states: a term's factor at position k
depends only on the state at k. For length-2 inequalities the K-values of a
block of first states against all second states are one matrix product; for
length 3 the middle factor is folded into the first per row.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ctxlab import MAX_OBSERVABLES, MAX_SEQUENCE_LENGTH, CapacityError
from ctxlab.hvmodel import value_table
from ctxlab.inequalities import MAXIMIZE, InequalitySpec

MAX_WITNESSES = 16
# cap on K-values materialized per block
_BLOCK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class BoundResult:
    value: float
    witnesses: tuple[tuple[int, ...], ...]
    evaluated_count: int
    direction: str = MAXIMIZE

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witnesses": [list(w) for w in self.witnesses],
            "evaluated_count": self.evaluated_count,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class Certificate:
    name: str
    robust: bool
    static: BoundResult
    evolving: BoundResult

    def to_dict(self) -> dict:
        return {"robust": self.robust, "static": self.static.to_dict(), "evolving": self.evolving.to_dict()}


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("CTXLAB_WORKERS", "1")))
    except ValueError:
        return 1


def _check_capacity(spec: InequalitySpec) -> None:
    if spec.n > MAX_OBSERVABLES:
        raise CapacityError(f"{spec.name}: {spec.n} observables exceeds the limit of {MAX_OBSERVABLES}")
    if spec.max_length > MAX_SEQUENCE_LENGTH:
        raise CapacityError(
            f"{spec.name}: sequences of length {spec.max_length} exceed the limit of {MAX_SEQUENCE_LENGTH}"
        )


def position_supports(spec: InequalitySpec) -> list[tuple[str, ...]]:
    """Labels read at each sequence position, in the inequality's label order."""
    used = [set() for _ in range(spec.max_length)]
    for t in spec.terms:
        for k, o in enumerate(t.seq):
            used[k].add(o)
    return [tuple(o for o in spec.labels if o in u) for u in used]


def _dtype(spec: InequalitySpec):
    return np.int64 if spec.integral else np.float64


def _as_scalar(x, spec: InequalitySpec):
    return int(x) if spec.integral else float(x)


def static_bound(spec: InequalitySpec) -> BoundResult:
    _check_capacity(spec)
    table = value_table(spec.n).astype(np.int64)
    col = {o: k for k, o in enumerate(spec.labels)}
    dt = _dtype(spec)
    k_vals = np.zeros(2**spec.n, dtype=dt)
    for t in spec.oriented_terms():
        prod = np.ones(2**spec.n, dtype=np.int64)
        for o in t.seq:
            prod = prod * table[:, col[o]]
        k_vals += np.asarray(t.coeff, dtype=dt) * prod
    best = k_vals.max()
    hits = np.flatnonzero(k_vals == best)[:MAX_WITNESSES]
    L = spec.max_length
    sign = 1 if spec.direction == MAXIMIZE else -1
    return BoundResult(
        value=_as_scalar(sign * best, spec),
        witnesses=tuple((int(i),) * L for i in hits),
        evaluated_count=2**spec.n,
        direction=spec.direction,
    )


@dataclass
class _Factors:
    """Per-position factor matrices over the enumerated sub-assignments."""

    mats: list[np.ndarray]  # mats[k][r, t]: factor of term t at position k for sub-state r
    to_full: list[np.ndarray]  # to_full[k][r]: full state index of sub-state r
    term_seqs: list[tuple[str, ...]] = field(default_factory=list)


def _factors(spec: InequalitySpec, reduce: bool) -> _Factors:
    n = spec.n
    col = {o: k for k, o in enumerate(spec.labels)}
    supports = position_supports(spec) if reduce else [spec.labels] * spec.max_length
    dt = _dtype(spec)
    terms = spec.oriented_terms()
    mats, to_full = [], []
    for k, sup in enumerate(supports):
        m = len(sup)
        if m:
            sub = value_table(m).astype(np.int64)
            full = np.zeros(2**m, dtype=np.int64)
            for j, o in enumerate(sup):
                full |= ((sub[:, j] < 0).astype(np.int64)) << (n - 1 - col[o])
        else:
            sub = np.zeros((1, 0), dtype=np.int64)
            full = np.zeros(1, dtype=np.int64)
        where = {o: j for j, o in enumerate(sup)}
        mat = np.ones((sub.shape[0], len(terms)), dtype=dt)
        for ti, t in enumerate(terms):
            if len(t.seq) > k:
                mat[:, ti] = sub[:, where[t.seq[k]]]
            if k == 0:
                mat[:, ti] *= np.asarray(t.coeff, dtype=dt)
        mats.append(mat)
        to_full.append(full)
    return _Factors(mats, to_full, [t.seq for t in terms])


def _search_block(f: _Factors, rows: range):
    """Best value, up to MAX_WITNESSES lexicographically smallest sub-index
    tuples attaining it, and evaluated count, over first states in ``rows``."""
    L = len(f.mats)
    F = f.mats[0][rows.start:rows.stop]
    best = None
    wit: list[tuple[int, ...]] = []

    def absorb(vals: np.ndarray, prefix: tuple[int, ...], offsets: tuple[int, ...]):
        nonlocal best, wit
        m = vals.max()
        if best is None or m > best:
            best, wit = m, []
        if m == best and len(wit) < MAX_WITNESSES:
            for idx in np.argwhere(vals == m)[: MAX_WITNESSES - len(wit)]:
                wit.append(prefix + tuple(int(i) + o for i, o in zip(idx, offsets)))

    if L == 1:
        absorb(F.sum(axis=1), (), (rows.start,))
        return best, wit, len(rows)
    G = f.mats[1]
    if L == 2:
        absorb(F @ G.T, (), (rows.start, 0))
        return best, wit, len(rows) * G.shape[0]
    H = f.mats[2]
    step = max(1, _BLOCK_ENTRIES // max(1, H.shape[0]))
    for x in range(F.shape[0]):
        FG = F[x] * G
        for y0 in range(0, G.shape[0], step):
            absorb(FG[y0:y0 + step] @ H.T, (rows.start + x,), (y0, 0))
    return best, wit, len(rows) * G.shape[0] * H.shape[0]


def _row_blocks(f: _Factors) -> list[range]:
    n_first = f.mats[0].shape[0]
    inner = 1
    for m in f.mats[1:]:
        inner *= m.shape[0]
    step = max(1, min(n_first, _BLOCK_ENTRIES // max(1, inner if len(f.mats) == 2 else 1)))
    if len(f.mats) == 3:
        step = max(1, n_first // 64)
    return [range(s, min(s + step, n_first)) for s in range(0, n_first, step)]


def _merge(parts, spec: InequalitySpec, f: _Factors) -> BoundResult:
    best = max(p[0] for p in parts)
    wit: list[tuple[int, ...]] = []
    count = 0
    for b, w, c in parts:  # blocks are in increasing first-index order
        count += c
        if b == best:
            wit.extend(w)
    wit = sorted(wit)[:MAX_WITNESSES]
    full = tuple(tuple(int(f.to_full[k][r]) for k, r in enumerate(w)) for w in wit)
    sign = 1 if spec.direction == MAXIMIZE else -1
    return BoundResult(_as_scalar(sign * best, spec), full, count, spec.direction)


def evolving_bound(
    spec: InequalitySpec,
    *,
    reduce: bool = True,
    workers: int | None = None,
    factorized: bool = False,
) -> BoundResult:
    """Optimum of the K-value over all evolutions.

    With ``reduce`` only labels read at a position are enumerated there;
    the rest are fixed to +1, so witnesses are reported in that canonical
    form. ``factorized`` (length-2 inequalities only) maximizes over the
    second state in closed form and enumerates only rows that attain the
    optimum, to recover witnesses.
    """
    _check_capacity(spec)
    f = _factors(spec, reduce)
    workers = workers or default_workers()
    if factorized:
        if len(f.mats) != 2:
            raise ValueError("factorized search needs an inequality with sequences of length 2")
        return _factorized(spec, f)
    blocks = _row_blocks(f)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _search_block(f, r), blocks))
    else:
        parts = [_search_block(f, r) for r in blocks]
    return _merge(parts, spec, f)


def _factorized(spec: InequalitySpec, f: _Factors) -> BoundResult:
    F, G = f.mats
    # second-position factor of each term is either constant 1 or one label
    # column of G; group terms by that column pattern
    patterns: dict[bytes, list[int]] = {}
    for ti in range(G.shape[1]):
        patterns.setdefault(G[:, ti].tobytes(), []).append(ti)
    const = np.zeros(F.shape[0], dtype=F.dtype)
    weights = []
    for key, tis in patterns.items():
        g = G[:, tis[0]]
        w = F[:, tis].sum(axis=1)
        if np.all(g == 1):
            const += w
        else:
            weights.append(w)
    row_best = const + (np.abs(np.stack(weights, axis=1)).sum(axis=1) if weights else 0)
    best = row_best.max()
    wit = []
    for x in np.flatnonzero(row_best == best):
        vals = F[x] @ G.T
        for y in np.flatnonzero(vals == best):
            wit.append((int(x), int(y)))
            if len(wit) >= MAX_WITNESSES:
                break
        if len(wit) >= MAX_WITNESSES:
            break
    part = (best, wit, F.shape[0] * G.shape[0])
    return _merge([part], spec, f)


def certify(spec: InequalitySpec, *, workers: int | None = None) -> Certificate:
    s = static_bound(spec)
    e = evolving_bound(spec, workers=workers)
    return Certificate(spec.name, s.value == e.value, s, e)
