"""Small-dimension complex linear algebra: states, observables, unitaries.

States are stored unnormalized; every probability formula in the package
divides by norms explicitly. Units have hbar = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotUnitary

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
DEGENERACY_GAP = 1e-9
JACOBI_TOL = 1e-12

TENSOR_SEP = "⊗"


def _default_basis(dim: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(dim))


def _as_square(matrix, name: str) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over a labeled basis.

    The same type plays the ket and the bra role; `inner_product` conjugates
    its first argument.
    """

    amplitudes: np.ndarray
    basis: tuple[str, ...] = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise DimensionMismatch("state must have positive dimension")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        if not np.any(amps != 0):
            raise ValueError("zero vector is not a valid state")
        amps.setflags(write=False)
        basis = _default_basis(amps.size) if self.basis is None else tuple(str(b) for b in self.basis)
        if len(basis) != amps.size:
            raise DimensionMismatch(f"{amps.size} amplitudes but {len(basis)} basis labels")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "basis", basis)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm2))

    def normalized(self) -> StateVector:
        return StateVector(self.amplitudes / self.norm, self.basis)

    def __repr__(self) -> str:
        terms = ", ".join(f"{b}: {a:.6g}" for b, a in zip(self.basis, self.amplitudes))
        return f"StateVector({terms})"


def ket(*amplitudes, basis: Sequence[str] | None = None) -> StateVector:
    """Shorthand constructor: ``ket(1, 1j)``."""
    return StateVector(np.array(amplitudes, dtype=complex), basis)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator with a lazily computed spectral decomposition."""

    matrix: np.ndarray
    basis: tuple[str, ...] = None

    def __post_init__(self):
        m = _as_square(self.matrix, "observable")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
            raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3g}")
        # symmetrize so the stored operator is exactly Hermitian
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        basis = _default_basis(m.shape[0]) if self.basis is None else tuple(str(b) for b in self.basis)
        if len(basis) != m.shape[0]:
            raise DimensionMismatch("basis length does not match matrix dimension")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "basis", basis)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> tuple[Eigenspace, ...]:
        return eigendecompose(self)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e.value for e in self.spectrum])

    def apply(self, state: StateVector) -> StateVector:
        _check_dims(self.dimension, state.dimension)
        return StateVector(self.matrix @ state.amplitudes, state.basis)

    def expectation(self, state: StateVector) -> float:
        """<A> in `state` (normalization divided out)."""
        _check_dims(self.dimension, state.dimension)
        v = state.amplitudes
        return float(np.vdot(v, self.matrix @ v).real / state.norm2)

    def variance(self, state: StateVector) -> float:
        mean = self.expectation(state)
        second = Observable(self.matrix @ self.matrix).expectation(state)
        return max(second - mean * mean, 0.0)

    def __add__(self, other: Observable) -> Observable:
        return Observable(self.matrix + other.matrix, self.basis)

    def __sub__(self, other: Observable) -> Observable:
        return Observable(self.matrix - other.matrix, self.basis)

    def __mul__(self, scalar: float) -> Observable:
        return Observable(self.matrix * float(scalar), self.basis)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class UnitaryMap:
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_square(self.matrix, "unitary")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if dev > UNITARY_TOL:
            raise NotUnitary(f"U^dagger U deviates from identity by {dev:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, state: StateVector) -> StateVector:
        _check_dims(self.dimension, state.dimension)
        return StateVector(self.matrix @ state.amplitudes, state.basis)

    def dagger(self) -> UnitaryMap:
        return UnitaryMap(self.matrix.conj().T)

    @classmethod
    def identity(cls, dim: int) -> UnitaryMap:
        return cls(np.eye(dim, dtype=complex))


@dataclass(frozen=True, eq=False)
class Eigenspace:
    value: float
    projector: np.ndarray = field(repr=False)

    @property
    def degeneracy(self) -> int:
        return int(round(np.trace(self.projector).real))


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatch(f"dimension {a} does not match {b}")


def inner_product(bra: StateVector, ket: StateVector) -> complex:
    """<bra|ket> = sum_k conj(bra_k) ket_k."""
    _check_dims(bra.dimension, ket.dimension)
    if bra.basis != ket.basis:
        raise DimensionMismatch(f"basis mismatch: {bra.basis} vs {ket.basis}")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


Tensorable = Union[StateVector, Observable, UnitaryMap]


def tensor_product(a: Tensorable, b: Tensorable) -> Tensorable:
    """Kronecker product of two states or two operators of the same kind."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, StateVector):
        basis = tuple(f"{x}{TENSOR_SEP}{y}" for x in a.basis for y in b.basis)
        return StateVector(np.kron(a.amplitudes, b.amplitudes), basis)
    if isinstance(a, Observable):
        basis = tuple(f"{x}{TENSOR_SEP}{y}" for x in a.basis for y in b.basis)
        return Observable(np.kron(a.matrix, b.matrix), basis)
    if isinstance(a, UnitaryMap):
        return UnitaryMap(np.kron(a.matrix, b.matrix))
    raise TypeError(f"unsupported operand {type(a).__name__}")


def tensor(*items: Tensorable) -> Tensorable:
    return reduce(tensor_product, items)


def identity(dim: int, basis: Sequence[str] | None = None) -> Observable:
    return Observable(np.eye(dim, dtype=complex), basis)


def projector(state: StateVector) -> Observable:
    """|s><s| / <s|s>."""
    v = state.amplitudes
    return Observable(np.outer(v, v.conj()) / state.norm2, state.basis)


def embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Matrix of `op` acting on one factor of an n-fold product of equal spaces."""
    d = op.shape[0]
    eye = np.eye(d, dtype=complex)
    return reduce(np.kron, [op if k == site else eye for k in range(n_sites)])


def collective_operator(obs: Observable, n: int) -> Observable:
    """(1/n) sum_i A_i on the n-fold product space, built densely."""
    total = sum(embed(obs.matrix, i, n) for i in range(n))
    return Observable(total / n)


def jacobi_eigh(matrix, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot A[p, q] and then applies
    the real symmetric Jacobi rotation. Iterates until the off-diagonal
    Frobenius norm drops below ``tol * max(1, ||A||_F)``.

    Returns eigenvalues (ascending) and the matrix of column eigenvectors.
    """
    a = _as_square(matrix, "matrix").copy()
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(a))):
        raise NotHermitian("jacobi_eigh needs a Hermitian matrix")
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))

    def off_norm():
        return float(np.linalg.norm(a - np.diag(np.diag(a))))

    for _ in range(max_sweeps):
        if off_norm() < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                r = abs(g)
                if r <= 1e-18 * scale:
                    continue
                phase = g / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                j = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                a[:, [p, q]] = a[:, [p, q]] @ j
                a[[p, q], :] = j.conj().T @ a[[p, q], :]
                v[:, [p, q]] = v[:, [p, q]] @ j
    else:
        if off_norm() >= tol * scale:
            raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigendecompose(obs: Observable | np.ndarray, method: str = "lapack") -> tuple[Eigenspace, ...]:
    """Spectrum as ascending eigenvalues with eigenprojectors.

    Eigenvalues closer than `DEGENERACY_GAP` are merged into one eigenspace
    whose projector spans all corresponding eigenvectors.
    """
    m = obs.matrix if isinstance(obs, Observable) else Observable(obs).matrix
    if method == "lapack":
        w, v = np.linalg.eigh(m)
    elif method == "jacobi":
        w, v = jacobi_eigh(m)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")

    groups: list[list[int]] = []
    for i in range(len(w)):
        if groups and w[i] - w[groups[-1][-1]] < DEGENERACY_GAP:
            groups[-1].append(i)
        else:
            groups.append([i])
    spaces = []
    for g in groups:
        vecs = v[:, g]
        proj = vecs @ vecs.conj().T
        proj.setflags(write=False)
        spaces.append(Eigenspace(float(np.mean(w[g])), proj))
    return tuple(spaces)


# Spin-1/2 conventions: basis (up_z, down_z).
SPIN_BASIS = ("↑z", "↓z")
SIGMA_X = Observable(np.array([[0, 1], [1, 0]], dtype=complex), SPIN_BASIS)
SIGMA_Y = Observable(np.array([[0, -1j], [1j, 0]], dtype=complex), SPIN_BASIS)
SIGMA_Z = Observable(np.array([[1, 0], [0, -1]], dtype=complex), SPIN_BASIS)


def sigma(direction: Sequence[float]) -> Observable:
    """Spin component along a (not necessarily unit) real 3-vector."""
    nx, ny, nz = direction
    return Observable(nx * SIGMA_X.matrix + ny * SIGMA_Y.matrix + nz * SIGMA_Z.matrix, SPIN_BASIS)


def sigma_xi(xi: float = np.pi / 4) -> Observable:
    """cos(xi) sigma_x + sin(xi) sigma_y."""
    return sigma((np.cos(xi), np.sin(xi), 0.0))


_R = 1 / np.sqrt(2)
UP_Z = ket(1, 0, basis=SPIN_BASIS)
DOWN_Z = ket(0, 1, basis=SPIN_BASIS)
UP_X = ket(_R, _R, basis=SPIN_BASIS)
DOWN_X = ket(_R, -_R, basis=SPIN_BASIS)
UP_Y = ket(_R, 1j * _R, basis=SPIN_BASIS)
DOWN_Y = ket(_R, -1j * _R, basis=SPIN_BASIS)
