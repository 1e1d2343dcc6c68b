"""Sequential projective measurements with Lüders state updates, and the
built-in quantum scenarios (two-qubit CHSH, Peres-Mermin square, KCBS
pentagram, Yu-Oh rays).

Every observable here squares to the identity, so its +/-1 eigenprojectors
are (I +/- O)/2 and no eigensolver is needed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ctxlab.inequalities import InequalitySpec, PM_LABELS, YU_OH_LABELS

MATRIX_TOL = 1e-10
BRANCH_EPS = 1e-14


class QuantumError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumObservable:
    label: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QuantumError(f"{self.label}: observable must be a square matrix, got shape {m.shape}")
        if np.abs(m - m.conj().T).max() > MATRIX_TOL:
            raise QuantumError(f"{self.label}: observable is not Hermitian")
        if np.abs(m @ m - np.eye(m.shape[0])).max() > MATRIX_TOL:
            raise QuantumError(f"{self.label}: observable does not square to the identity")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def projectors(o: QuantumObservable) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(o.dim)
    return (eye + o.matrix) / 2, (eye - o.matrix) / 2


@dataclass(frozen=True, eq=False)
class QuantumScenario:
    name: str
    dim: int
    observables: Mapping[str, QuantumObservable]

    def __post_init__(self):
        for o in self.observables.values():
            if o.dim != self.dim:
                raise QuantumError(f"{self.name}: observable {o.label} is {o.dim}-dimensional, expected {self.dim}")

    def __getitem__(self, label: str) -> QuantumObservable:
        try:
            return self.observables[label]
        except KeyError:
            raise QuantumError(f"scenario {self.name} has no observable {label!r}") from None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "observables": {k: _complex_to_pairs(o.matrix) for k, o in self.observables.items()},
        }


def _complex_to_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def density_state(rho) -> np.ndarray:
    """Validate and return a density matrix."""
    rho = np.array(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise QuantumError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > MATRIX_TOL:
        raise QuantumError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > MATRIX_TOL:
        raise QuantumError(f"density matrix has trace {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(rho).min() < -MATRIX_TOL:
        raise QuantumError("density matrix is not positive semidefinite")
    return rho


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized M M^dagger with standard complex Gaussian M (full rank a.s.)."""
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def branch_probabilities(rho: np.ndarray, seq: Sequence[QuantumObservable]) -> dict[tuple[int, ...], float]:
    """Probability of every outcome string for measuring ``seq`` in order."""
    dims = {o.dim for o in seq}
    if dims != {rho.shape[0]}:
        raise QuantumError(f"dimension mismatch: state is {rho.shape[0]}-dimensional, observables {sorted(dims)}")
    projs = [projectors(o) for o in seq]
    out = {}
    for outcome in itertools.product((1, -1), repeat=len(seq)):
        state = rho
        p = 1.0
        for (pp, pm), a in zip(projs, outcome):
            P = pp if a == 1 else pm
            unnorm = P @ state @ P
            q = np.trace(unnorm).real
            if q <= BRANCH_EPS:
                p = 0.0
                break
            p *= q
            state = unnorm / q
        out[outcome] = p
    return out


def sequential_correlation(rho: np.ndarray, seq: Sequence[QuantumObservable]) -> float:
    if not 1 <= len(seq) <= 3:
        raise QuantumError(f"sequences of length 1..3 supported, got {len(seq)}")
    return float(sum(np.prod(a) * p for a, p in branch_probabilities(rho, seq).items()))


def quantum_value(spec: InequalitySpec, scen: QuantumScenario, rho: np.ndarray) -> float:
    total = 0.0
    for t in spec.terms:
        total += t.coeff * sequential_correlation(rho, [scen[o] for o in t.seq])
    return total


# ---------------------------------------------------------------- scenarios

I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def _scenario(name: str, mats: dict[str, np.ndarray]) -> QuantumScenario:
    obs = {k: QuantumObservable(k, v) for k, v in mats.items()}
    return QuantumScenario(name, next(iter(obs.values())).dim, obs)


def _chsh():
    # A, C act on the first qubit and B, D on the second, so every
    # neighbouring pair in AB, BC, CD, DA commutes
    r = 1 / np.sqrt(2)
    mats = {
        "A": np.kron(SZ, I2),
        "B": np.kron(I2, r * (SZ + SX)),
        "C": np.kron(SX, I2),
        "D": np.kron(I2, r * (SX - SZ)),
    }
    phi_plus = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return _scenario("chsh", mats), pure_state(phi_plus)


def _pm():
    grid = [
        np.kron(SZ, I2), np.kron(I2, SZ), np.kron(SZ, SZ),
        np.kron(I2, SX), np.kron(SX, I2), np.kron(SX, SX),
        np.kron(SZ, SX), np.kron(SX, SZ), np.kron(SY, SY),
    ]
    return _scenario("pm", dict(zip(PM_LABELS, grid))), np.eye(4) / 4


def kcbs_directions() -> np.ndarray:
    """Five unit vectors in R^3, consecutive ones orthogonal, each at
    squared overlap 1/sqrt(5) with (1, 0, 0)."""
    c2 = np.cos(np.pi / 5) / (1 + np.cos(np.pi / 5))
    k = np.arange(5)
    phi = 4 * np.pi * k / 5
    return np.stack([np.full(5, np.sqrt(c2)), np.sqrt(1 - c2) * np.cos(phi), np.sqrt(1 - c2) * np.sin(phi)], axis=1)


def _kcbs():
    mats = {lab: 2 * np.outer(v, v) - np.eye(3) for lab, v in zip("ABCDE", kcbs_directions())}
    return _scenario("kcbs", mats), pure_state([1, 0, 0])


# Yu-Oh rays, ordered so that every pair with a nonzero two-point
# coefficient in the yu_oh inequality is orthogonal
YU_OH_RAYS = np.array([
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (0, 1, -1), (1, 0, -1), (1, -1, 0),
    (0, 1, 1), (1, 0, 1), (1, 1, 0),
    (-1, 1, 1), (1, -1, 1), (1, 1, -1), (1, 1, 1),
], dtype=float)


def _yu_oh():
    mats = {}
    for lab, v in zip(YU_OH_LABELS, YU_OH_RAYS):
        v = v / np.linalg.norm(v)
        mats[lab] = np.eye(3) - 2 * np.outer(v, v)
    return _scenario("yu_oh", mats), np.eye(3) / 3


_SCENARIOS = {"chsh": _chsh, "pm": _pm, "kcbs": _kcbs, "yu_oh": _yu_oh}
SCENARIO_NAMES = tuple(_SCENARIOS)

# inequality name -> scenario it is evaluated on by default
DEFAULT_SCENARIO = {
    "chsh": "chsh", "chsh_star": "chsh",
    "pm": "pm", "pm_star": "pm",
    "kcbs": "kcbs", "kcbs_star": "kcbs",
    "yu_oh": "yu_oh", "yu_oh_star": "yu_oh",
}


def scenario(name: str) -> tuple[QuantumScenario, np.ndarray]:
    """Built-in scenario and its recommended state."""
    try:
        return _SCENARIOS[name]()
    except KeyError:
        raise QuantumError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}") from None
