"""Operational primitives: Paulis, the quantum one-time pad, padding,
permutation unitaries and control-qubit dephasing.

Tensor factors are ordered most significant first.  The control register R
is always the leading factor of an ``R (x) M`` state.
"""
from dataclasses import dataclass
from itertools import product
from math import factorial
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, LambdaOutOfRange, TooLarge
from .linalg import as_matrix, tensor_product

_I = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_XZ = _X @ _Z
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
S = np.diag([1, 1j]).astype(np.complex128)

_SYMBOL = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _SYMBOL.items()}


def _num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PauliString:
    """``P = (x) X^{x_j} Z^{z_j}`` over ``n`` qubits."""

    x_bits: Tuple[int, ...]
    z_bits: Tuple[int, ...]

    def __post_init__(self):
        if len(self.x_bits) != len(self.z_bits):
            raise DimensionMismatch("x and z bit strings differ in length")

    @property
    def n(self) -> int:
        return len(self.x_bits)

    @classmethod
    def from_index(cls, index: int, n: int) -> "PauliString":
        """Index in base 4, qubit 0 most significant, digit = 2x + z."""
        xs, zs = [], []
        for j in range(n):
            digit = (index >> (2 * (n - 1 - j))) & 3
            xs.append(digit >> 1)
            zs.append(digit & 1)
        return cls(tuple(xs), tuple(zs))

    @property
    def index(self) -> int:
        out = 0
        for x, z in zip(self.x_bits, self.z_bits):
            out = (out << 2) | (2 * x + z)
        return out

    @classmethod
    def from_symbol(cls, symbol: str) -> "PauliString":
        bits = [_BITS[c] for c in symbol]
        return cls(tuple(b[0] for b in bits), tuple(b[1] for b in bits))

    @property
    def symbol(self) -> str:
        return "".join(_SYMBOL[(x, z)] for x, z in zip(self.x_bits, self.z_bits))

    @property
    def is_identity(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)


def pauli_matrix(p: PauliString, hermitian: bool = False) -> np.ndarray:
    """Matrix of ``p`` as ``X^x Z^z`` per qubit.

    With ``hermitian=True`` each ``XZ`` factor is replaced by ``Y = i XZ`` so
    that the result is a Hermitian observable; tomography needs that form.
    """
    factors = []
    for x, z in zip(p.x_bits, p.z_bits):
        if x and z:
            factors.append(1j * _XZ if hermitian else _XZ)
        elif x:
            factors.append(_X)
        elif z:
            factors.append(_Z)
        else:
            factors.append(_I)
    return tensor_product(*factors)


def all_paulis(n: int):
    return [PauliString.from_index(i, n) for i in range(4**n)]


@dataclass(frozen=True)
class QotpKey:
    """Bits ``k_1 ... k_{2n}``; qubit j uses ``(k_{2j-1}, k_{2j})`` as (x, z)."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) % 2:
            raise DimensionMismatch("QOTP key length must be even")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("QOTP key bits must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.bits) // 2

    def pauli(self) -> PauliString:
        return PauliString(tuple(self.bits[0::2]), tuple(self.bits[1::2]))

    def to_bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def from_bitstring(cls, s: str) -> "QotpKey":
        return cls(tuple(int(c) for c in s))

    @property
    def value(self) -> int:
        """Integer with k_1 as the most significant bit."""
        return int(self.to_bitstring() or "0", 2)

    @classmethod
    def from_value(cls, value: int, n: int) -> "QotpKey":
        return cls(tuple((value >> (2 * n - 1 - i)) & 1 for i in range(2 * n)))

    @classmethod
    def zero(cls, n: int) -> "QotpKey":
        return cls((0,) * (2 * n))


def _check_key(rho: np.ndarray, key: QotpKey) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (1 << key.n, 1 << key.n):
        raise DimensionMismatch(f"key of {key.n} qubits does not fit a {rho.shape} state")
    return rho


def qotp_encrypt(rho, key: QotpKey) -> np.ndarray:
    rho = _check_key(rho, key)
    u = pauli_matrix(key.pauli())
    return u @ rho @ u.conj().T


def qotp_decrypt(sigma, key: QotpKey) -> np.ndarray:
    sigma = _check_key(sigma, key)
    u = pauli_matrix(key.pauli())
    return u.conj().T @ sigma @ u


def qotp_key_average(rho) -> np.ndarray:
    """Exact average of the QOTP over all ``4^n`` keys, for n <= 4."""
    rho = as_matrix(rho)
    n = _num_qubits(rho.shape[0])
    if n > 4:
        raise TooLarge(f"{n} qubits means 4^{n} keys; exact enumeration stops at 4")
    acc = np.zeros_like(rho)
    for value in range(4**n):
        acc += qotp_encrypt(rho, QotpKey.from_value(value, n))
    avg = acc / 4**n
    target = np.eye(1 << n) / (1 << n) * np.trace(rho)
    assert np.max(np.abs(avg - target)) <= 1e-12, "Pauli twirl did not give the maximally mixed state"
    return avg


def pad_isometry(d2: int, d1: int) -> np.ndarray:
    """``V |psi> = |psi> (x) |0...0>`` as a ``2^d1 x 2^d2`` matrix."""
    if d2 > d1 or d2 < 0:
        raise DimensionMismatch(f"cannot pad {d2} qubits into {d1}")
    anc = np.zeros((1 << (d1 - d2), 1), dtype=np.complex128)
    anc[0, 0] = 1.0
    return np.kron(np.eye(1 << d2, dtype=np.complex128), anc)


def pad_projector(d2: int, d1: int) -> np.ndarray:
    v = pad_isometry(d2, d1)
    return v @ v.conj().T


def pad_embed(rho, d1: int) -> np.ndarray:
    rho = as_matrix(rho)
    d2 = _num_qubits(rho.shape[0])
    v = pad_isometry(d2, d1)
    return v @ rho @ v.conj().T


def pad_unembed(rho_big, d2: int) -> np.ndarray:
    rho_big = as_matrix(rho_big)
    d1 = _num_qubits(rho_big.shape[0])
    v = pad_isometry(d2, d1)
    return v.conj().T @ rho_big @ v


def lehmer_encode(mapping: Sequence[int]) -> int:
    n = len(mapping)
    rest = list(range(n))
    code = 0
    for i, m in enumerate(mapping):
        pos = rest.index(m)
        code += pos * factorial(n - 1 - i)
        rest.pop(pos)
    return code


def lehmer_decode(code: int, n: int) -> Tuple[int, ...]:
    if not 0 <= code < factorial(n):
        raise ValueError(f"Lehmer index {code} out of range for size {n}")
    rest = list(range(n))
    out = []
    for i in range(n):
        f = factorial(n - 1 - i)
        pos, code = divmod(code, f)
        out.append(rest.pop(pos))
    return tuple(out)


LEHMER_MAX_SIZE = 20


@dataclass(frozen=True)
class PermSpec:
    """Permutation ``j -> mapping[j]`` of ``[0, size)``."""

    mapping: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError("mapping is not a permutation")

    @property
    def size(self) -> int:
        return len(self.mapping)

    @property
    def lehmer(self) -> Optional[int]:
        if self.size > LEHMER_MAX_SIZE:
            return None
        return lehmer_encode(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "PermSpec":
        return cls(tuple(range(n)))

    @classmethod
    def from_lehmer(cls, code: int, n: int) -> "PermSpec":
        return cls(lehmer_decode(code, n))

    @classmethod
    def sample(cls, n: int, rng) -> "PermSpec":
        """Forward Fisher-Yates: position i swaps with i + integers(0, n - i).

        An all-zero stream gives the identity.
        """
        m = list(range(n))
        for i in range(n - 1):
            j = i + int(rng.integers(0, n - i))
            m[i], m[j] = m[j], m[i]
        return cls(tuple(m))

    def inverse(self) -> "PermSpec":
        inv = [0] * self.size
        for j, m in enumerate(self.mapping):
            inv[m] = j
        return PermSpec(tuple(inv))


def permutation_unitary(p: PermSpec) -> np.ndarray:
    n = p.size
    u = np.zeros((n, n), dtype=np.complex128)
    u[list(p.mapping), list(range(n))] = 1.0
    return u


def permute_conjugate(rho, p: PermSpec, inverse: bool = False) -> np.ndarray:
    """``U rho U^dagger`` (or with ``U^dagger``) done by index relabelling."""
    rho = as_matrix(rho)
    if rho.shape[0] != p.size:
        raise DimensionMismatch(f"permutation of size {p.size} on {rho.shape} state")
    idx = np.asarray(p.mapping)
    if inverse:
        return rho[np.ix_(idx, idx)]
    inv = np.asarray(p.inverse().mapping)
    return rho[np.ix_(inv, inv)]


def control_blocks(rho) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    rho = as_matrix(rho)
    n = rho.shape[0]
    if n % 2 or rho.shape[1] != n:
        raise DimensionMismatch(f"{rho.shape} has no leading control qubit")
    h = n // 2
    return rho[:h, :h], rho[:h, h:], rho[h:, :h], rho[h:, h:]


def dephase_control(rho, lam: float) -> np.ndarray:
    """Scale the off-diagonal control blocks by ``lam``; ``lam = 0`` pinches."""
    if not -1.0 <= lam <= 1.0:
        raise LambdaOutOfRange(f"lambda {lam} not in [-1, 1]")
    rho = as_matrix(rho)
    a, b, c, d = control_blocks(rho)
    return np.block([[a, lam * b], [lam * c, d]])


def hadamard_on_control(rho, phase: bool = False) -> np.ndarray:
    """Conjugate by ``G (x) I`` with ``G = H`` or, for ``phase``, ``G = H S``.

    With ``G = H`` the branch difference ``(D_0 - D_1)/2`` is the Hermitian
    part of the upper off-diagonal block; with ``G = H S`` it is the
    anti-Hermitian part divided by ``i``.
    """
    rho = as_matrix(rho)
    g = H @ S if phase else H
    big = np.kron(g, np.eye(rho.shape[0] // 2))
    return big @ rho @ big.conj().T


def exhaustive_keys(n: int):
    for bits in product((0, 1), repeat=2 * n):
        yield QotpKey(bits)
