"""Random constructions shared by the test modules."""
import numpy as np

from twostate.qcore import Observable, StateVector, UnitaryMap


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_state(rng, d: int) -> StateVector:
    return StateVector(random_complex(rng, d))


def random_hermitian(rng, d: int) -> Observable:
    m = random_complex(rng, d, d)
    return Observable((m + m.conj().T) / 2)


def random_unitary(rng, d: int) -> UnitaryMap:
    qm, r = np.linalg.qr(random_complex(rng, d, d))
    return UnitaryMap(qm * (np.diag(r) / np.abs(np.diag(r))))


def random_basis(rng, d: int) -> list[StateVector]:
    u = random_unitary(rng, d).matrix
    return [StateVector(u[:, j]) for j in range(d)]


def random_eigen_observable(rng, d: int, levels=(-1.0, 0.5, 2.0)) -> Observable:
    """Hermitian with eigenvalues drawn from `levels` (degeneracy likely)."""
    u = random_unitary(rng, d).matrix
    vals = rng.choice(levels, size=d)
    return Observable(u @ np.diag(vals) @ u.conj().T)
