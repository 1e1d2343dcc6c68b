"""Inequality data model, evaluation on hidden-state evolutions, and the
built-in catalog.

A term of length m shorter than the longest sequence in its inequality reads
positions 1..m of an evolution: a lone measurement is always the first one
in its run.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ctxlab.hvmodel import (
    Assignment,
    Model,
    ModelError,
    error_term,
    index_to_assignment,
    sequence_expectation,
)

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


class InequalityError(ValueError):
    pass


@dataclass(frozen=True)
class SequenceTerm:
    coeff: float
    seq: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "seq", tuple(self.seq))
        if not self.seq:
            raise InequalityError("term sequence must be non-empty")


@dataclass(frozen=True)
class InequalitySpec:
    name: str
    labels: tuple[str, ...]
    terms: tuple[SequenceTerm, ...]
    direction: str = MAXIMIZE
    classical_bound: float | None = None
    quantum_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(set(self.labels)) != len(self.labels):
            raise InequalityError(f"{self.name}: duplicate labels")
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise InequalityError(f"{self.name}: direction must be maximize or minimize, got {self.direction!r}")
        if not self.terms:
            raise InequalityError(f"{self.name}: no terms")
        known = set(self.labels)
        for t in self.terms:
            missing = [o for o in t.seq if o not in known]
            if missing:
                raise InequalityError(f"{self.name}: term {t.seq} uses unknown labels {missing}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def max_length(self) -> int:
        return max(len(t.seq) for t in self.terms)

    @property
    def integral(self) -> bool:
        return all(float(t.coeff).is_integer() for t in self.terms)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "labels": list(self.labels),
            "terms": [{"coeff": t.coeff, "seq": list(t.seq)} for t in self.terms],
            "direction": self.direction,
        }
        if self.classical_bound is not None:
            d["classical_bound"] = self.classical_bound
        if self.quantum_bound is not None:
            d["quantum_bound"] = self.quantum_bound
        return d

    @classmethod
    def from_dict(cls, d: dict, name: str | None = None) -> "InequalitySpec":
        try:
            terms = tuple(SequenceTerm(_num(t["coeff"]), tuple(t["seq"])) for t in d["terms"])
            return cls(
                name=d.get("name", name or "custom"),
                labels=tuple(d["labels"]),
                terms=terms,
                direction=d.get("direction", MAXIMIZE),
                classical_bound=d.get("classical_bound"),
                quantum_bound=d.get("quantum_bound"),
            )
        except (KeyError, TypeError) as exc:
            raise InequalityError(f"malformed inequality document: {exc}") from None

    def digest(self) -> str:
        body = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(body.encode()).hexdigest()[:16]

    def oriented_terms(self) -> list[SequenceTerm]:
        """Terms with coefficients negated for minimize, so callers only maximize."""
        s = 1 if self.direction == MAXIMIZE else -1
        return [SequenceTerm(s * t.coeff, t.seq) for t in self.terms]


def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InequalityError(f"coefficient must be a number, got {x!r}")
    return int(x) if float(x).is_integer() else float(x)


def load_inequality(path: str | Path) -> InequalitySpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InequalityError(f"{path}: not valid JSON ({exc})") from None
    return InequalitySpec.from_dict(doc, name=Path(path).stem)


def _state_index(s) -> int:
    return s.index if isinstance(s, Assignment) else int(s)


def evaluate_on_evolution(spec: InequalitySpec, evo: Sequence) -> float:
    """K-value of ``spec`` on one evolution (one hidden state per position)."""
    if len(evo) != spec.max_length:
        raise InequalityError(
            f"{spec.name}: evolution has {len(evo)} states, inequality needs {spec.max_length}"
        )
    for s in evo:
        if isinstance(s, Assignment) and s.n != spec.n:
            raise InequalityError(f"{spec.name}: assignment over {s.n} observables, expected {spec.n}")
    vals = [index_to_assignment(_state_index(s), spec.n) for s in evo]
    pos = {o: k for k, o in enumerate(spec.labels)}
    total = 0
    for t in spec.terms:
        prod = 1
        for k, o in enumerate(t.seq):
            prod *= vals[k][pos[o]]
        total += t.coeff * prod
    return total


def model_expectation(spec: InequalitySpec, m: Model) -> float:
    missing = [o for o in spec.labels if o not in m.labels]
    if missing:
        raise InequalityError(f"{spec.name}: model lacks observables {missing}")
    return sum(t.coeff * sequence_expectation(m, t.seq) for t in spec.terms)


# (outer, inner) pairs of the error-corrected CHSH expression
CHSH_ERROR_TERMS = (("B", "A"), ("C", "B"), ("D", "C"), ("A", "D"))


def corrected_chsh_value(m: Model) -> float:
    """CHSH expectation minus p_err[BAB], p_err[CBC], p_err[DCD], p_err[ADA]."""
    try:
        for o in "ABCD":
            m.label_index(o)
    except ModelError as exc:
        raise InequalityError(f"corrected CHSH needs labels A, B, C, D: {exc}") from None
    value = model_expectation(catalog("chsh"), m)
    return value - sum(error_term(m, outer, inner) for outer, inner in CHSH_ERROR_TERMS)


def _terms(*pairs) -> tuple[SequenceTerm, ...]:
    return tuple(SequenceTerm(c, tuple(seq)) for c, seq in pairs)


SQRT2 = 2**0.5
SQRT5 = 5**0.5

PM_LABELS = ("A", "B", "C", "a", "b", "c", "alpha", "beta", "gamma")
YU_OH_LABELS = tuple(f"A{i}" for i in range(1, 14))

YU_OH_SINGLE = {
    **{i: 1 for i in (4, 7, 10, 11, 12, 13)},
    **{i: 2 for i in (1, 5, 6, 8, 9)},
    **{i: 3 for i in (2, 3)},
}
YU_OH_PAIRS = {
    **{p: -1 for p in [(1, 2), (1, 3), (1, 4), (1, 7), (4, 10), (8, 10), (9, 10), (5, 11),
                       (7, 11), (9, 11), (6, 12), (7, 12), (8, 12), (4, 13), (5, 13), (6, 13)]},
    **{p: -2 for p in [(2, 3), (2, 5), (2, 8), (3, 6), (3, 9), (5, 8), (6, 9)]},
}


def _yu_oh_terms(star: bool) -> tuple[SequenceTerm, ...]:
    terms = [SequenceTerm(YU_OH_SINGLE[i], (f"A{i}",)) for i in range(1, 14)]
    terms += [SequenceTerm(c, (f"A{i}", f"A{j}")) for (i, j), c in YU_OH_PAIRS.items()]
    if star:
        terms += [SequenceTerm(4, (f"A{i}", f"A{i}")) for i in range(1, 14)]
    return tuple(terms)


def _build_catalog() -> dict[str, InequalitySpec]:
    abcd = ("A", "B", "C", "D")
    return {
        "chsh": InequalitySpec(
            "chsh", abcd,
            _terms((1, "AB"), (1, "BC"), (1, "CD"), (-1, "DA")),
            MAXIMIZE, 2, 2 * SQRT2,
        ),
        "chsh_star": InequalitySpec(
            "chsh_star", abcd,
            _terms((1, "AB"), (1, "CB"), (1, "CD"), (-1, "AD")),
            MAXIMIZE, 2, 2 * SQRT2,
        ),
        # rows then columns, each in table order
        "pm": InequalitySpec(
            "pm", PM_LABELS,
            _terms(
                (1, ("A", "B", "C")), (1, ("a", "b", "c")), (1, ("alpha", "beta", "gamma")),
                (1, ("A", "a", "alpha")), (1, ("B", "b", "beta")), (-1, ("C", "c", "gamma")),
            ),
            MAXIMIZE, 4, 6,
        ),
        "pm_star": InequalitySpec(
            "pm_star", PM_LABELS,
            _terms(
                (1, ("A", "B", "C")), (1, ("c", "a", "b")), (1, ("beta", "gamma", "alpha")),
                (1, ("A", "a", "alpha")), (1, ("beta", "B", "b")), (-1, ("c", "gamma", "C")),
            ),
            MAXIMIZE, 4, 6,
        ),
        "kcbs": InequalitySpec(
            "kcbs", ("A", "B", "C", "D", "E"),
            _terms((1, "AB"), (1, "BC"), (1, "CD"), (1, "DE"), (1, "EA")),
            MINIMIZE, -3, 5 - 4 * SQRT5,
        ),
        "kcbs_star": InequalitySpec(
            "kcbs_star", ("A", "B", "C", "D", "E"),
            _terms((1, "AB"), (1, "CB"), (1, "CD"), (1, "ED"), (1, "EA"), (-1, "AA")),
            MINIMIZE, -4, 4 - 4 * SQRT5,
        ),
        "yu_oh": InequalitySpec("yu_oh", YU_OH_LABELS, _yu_oh_terms(False), MAXIMIZE, 16, 52 / 3),
        "yu_oh_star": InequalitySpec("yu_oh_star", YU_OH_LABELS, _yu_oh_terms(True), MAXIMIZE, 68, 208 / 3),
    }


_CATALOG = _build_catalog()
CATALOG_NAMES = tuple(_CATALOG)


def catalog(name: str) -> InequalitySpec:
    try:
        return _CATALOG[name]
    except KeyError:
        raise InequalityError(f"unknown inequality {name!r}; choose from {', '.join(CATALOG_NAMES)}") from None
