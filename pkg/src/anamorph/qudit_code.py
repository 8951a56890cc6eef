"""The ((3,1))_q polynomial code: one qudit shared among three players so
that any two recover it and any one sees the maximally mixed state.

    W |m> = q^{-1/2} sum_c |m + c, m + 2c, m + 3c>   (mod q)

Register ``i`` holds ``f(i)`` for the line ``f(x) = m + c x``.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Tuple

import numpy as np

from .errors import DimensionMismatch, FieldTooSmall, InvalidPair
from .linalg import as_matrix, partial_trace
from .shamir import is_prime, prime_at_least

EVAL_POINTS = (1, 2, 3)


def code_prime(embed_dim: int) -> int:
    return prime_at_least(max(5, embed_dim))


def encoding_isometry(q: int) -> np.ndarray:
    """``q^3 x q`` matrix of W, registers ordered 1, 2, 3 (most significant first)."""
    w = np.zeros((q**3, q), dtype=np.complex128)
    amp = 1.0 / np.sqrt(q)
    for m in range(q):
        for c in range(q):
            y1, y2, y3 = ((m + x * c) % q for x in EVAL_POINTS)
            w[(y1 * q + y2) * q + y3, m] += amp
    return w


@dataclass(frozen=True)
class EncodedQuantumState:
    q: int
    embed_dim: int
    global_state: np.ndarray = field(repr=False)
    n: int = 3
    eval_points: Tuple[int, ...] = EVAL_POINTS

    def register_state(self, index: int) -> np.ndarray:
        """Reduced state of register ``index`` (1-based)."""
        others = [i for i in range(3) if i != index - 1]
        return partial_trace(self.global_state, [self.q] * 3, others)


def cgl_encode(rho, q: int = None) -> EncodedQuantumState:
    rho = as_matrix(rho)
    dim = rho.shape[0]
    q = code_prime(dim) if q is None else int(q)
    if not is_prime(q) or q < max(5, dim):
        raise FieldTooSmall(f"q={q} must be a prime of at least max(5, {dim})")
    big = np.zeros((q, q), dtype=np.complex128)
    big[:dim, :dim] = rho
    w = encoding_isometry(q)
    return EncodedQuantumState(q, dim, w @ big @ w.conj().T)


def decoding_permutation(q: int, pair: Tuple[int, int]) -> np.ndarray:
    """Unitary on registers ``(i, j)`` sending ``|y_i, y_j>`` to ``|s, y_k>``,
    where ``s`` and ``y_k`` are the line's value at 0 and at the erased point."""
    i, j = pair
    k = ({1, 2, 3} - {i, j}).pop()
    inv = pow((j - i) % q, -1, q)
    u = np.zeros((q * q, q * q), dtype=np.complex128)
    for yi in range(q):
        for yj in range(q):
            c = (yj - yi) * inv % q
            s = (yi - c * i) % q
            yk = (s + c * k) % q
            u[s * q + yk, yi * q + yj] = 1.0
    return u


def _check_pair(available) -> Tuple[int, int]:
    pair = tuple(sorted(set(int(i) for i in available)))
    if len(pair) != 2 or not set(pair) <= set(EVAL_POINTS):
        raise InvalidPair(f"need two distinct registers from {{1, 2, 3}}, got {tuple(available)}")
    return pair


def cgl_decode(enc: EncodedQuantumState, available) -> np.ndarray:
    """Recover the encoded state from two registers.

    Mapping the pair to ``(secret, predicted erased share)`` leaves the
    second output register in a state that, together with the erased share,
    is independent of the secret; tracing it out loses no coherence.
    """
    pair = _check_pair(available)
    q = enc.q
    if enc.global_state.shape != (q**3, q**3):
        raise DimensionMismatch("encoded state does not match q")
    erased = ({1, 2, 3} - set(pair)).pop()
    two = partial_trace(enc.global_state, [q, q, q], [erased - 1])
    u = decoding_permutation(q, pair)
    out = partial_trace(u @ two @ u.conj().T, [q, q], [1])
    return out[: enc.embed_dim, : enc.embed_dim]


def qualified_pairs():
    return list(combinations(EVAL_POINTS, 2))


def is_authorized(players) -> bool:
    """The 2-of-3 threshold access structure."""
    return len(set(players) & set(EVAL_POINTS)) >= 2
