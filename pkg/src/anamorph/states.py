"""Random and named test states."""
import numpy as np


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def basis_state(index: int, dim: int) -> np.ndarray:
    return projector(ket(index, dim))


def plus_state() -> np.ndarray:
    return projector([1.0, 1.0])


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128) / dim


def random_pure(dim: int, rng) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return projector(v)


def random_density(dim: int, rng, rank=None) -> np.ndarray:
    """Ginibre ensemble state of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pd_density(dim: int, rng, floor: float = 0.05) -> np.ndarray:
    """Full-rank state whose smallest eigenvalue is at least ``floor / dim``."""
    rho = random_density(dim, rng)
    return (1 - floor) * rho + floor * np.eye(dim) / dim


def random_hermitian(dim: int, rng) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)
