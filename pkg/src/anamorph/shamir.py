"""Shamir 2-of-3 sharing over prime fields."""
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

from .errors import DuplicatePoints, FieldTooSmall, ThresholdUnmet


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime_above(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    p = n + 1
    while not is_prime(p):
        p += 1
    return p


def prime_at_least(n: int) -> int:
    return next_prime_above(n - 1)


@dataclass(frozen=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldTooSmall(f"modulus {self.p} is not prime")
        if not 0 <= self.value < self.p:
            raise ValueError(f"{self.value} is not reduced mod {self.p}")

    def _same(self, other: "FieldElement"):
        if other.p != self.p:
            raise ValueError("field elements from different fields")

    def __add__(self, other):
        self._same(other)
        return FieldElement((self.value + other.value) % self.p, self.p)

    def __sub__(self, other):
        self._same(other)
        return FieldElement((self.value - other.value) % self.p, self.p)

    def __mul__(self, other):
        self._same(other)
        return FieldElement(self.value * other.value % self.p, self.p)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.value, -1, self.p), self.p)


Share = Tuple[FieldElement, FieldElement]


def shamir_share(secret: FieldElement, rng, t: int = 2, n: int = 3, coeff=None) -> List[Share]:
    """Shares ``(i, s + c i)`` for ``i = 1..n`` with ``c = rng.integers(0, p)``."""
    if (t, n) != (2, 3):
        raise ValueError("only the 2-of-3 threshold is implemented")
    p = secret.p
    if p <= n:
        raise FieldTooSmall(f"field size {p} must exceed the player count {n}")
    c = int(rng.integers(0, p)) if coeff is None else int(coeff) % p
    return [(FieldElement(i, p), FieldElement((secret.value + c * i) % p, p)) for i in range(1, n + 1)]


def shamir_reconstruct(shares: Sequence[Share], p: int = None) -> FieldElement:
    """Lagrange interpolation at zero."""
    shares = list(shares)
    if len(shares) < 2:
        raise ThresholdUnmet(f"{len(shares)} share(s) given, 2 needed")
    p = shares[0][0].p if p is None else p
    xs = [x.value for x, _ in shares]
    if len(set(xs)) != len(xs):
        raise DuplicatePoints(f"repeated evaluation points {xs}")
    acc = 0
    for i, (xi, yi) in enumerate(shares):
        num, den = 1, 1
        for j, (xj, _) in enumerate(shares):
            if j != i:
                num = num * (-xj.value) % p
                den = den * (xi.value - xj.value) % p
        acc = (acc + yi.value * num * pow(den, -1, p)) % p
    return FieldElement(acc, p)
