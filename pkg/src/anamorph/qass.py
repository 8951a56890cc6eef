"""Anamorphic secret sharing of a ciphertext and its six-part key.

The anamorphic ciphertext is spread over three qudits with the ((3,1))_q
code; each key component is Shamir-shared over its own prime field.  Any two
players rebuild the ciphertext and the key, then decrypt both messages.
Holding only ``k1, k2, k3`` recovers the original message alone.
"""
import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from math import factorial
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import CovertUnavailable, InvalidPair, ThresholdUnmet, UnsupportedDims
from .qops import PermSpec, QotpKey
from .qudit_code import EncodedQuantumState, cgl_decode, cgl_encode, code_prime
from .scheme import (
    AnamorphicKey,
    Ciphertext,
    SecurityConfig,
    dcm_exact,
    dom_from_parts,
    encrypt_direct,
    keygen,
)
from .shamir import FieldElement, next_prime_above, shamir_reconstruct, shamir_share

COMPONENTS = ("k1", "k2", "k3", "k4", "k5", "k6")
ORIGINAL_COMPONENTS = ("k1", "k2", "k3")
COVERT_COMPONENTS = ("k4", "k5", "k6")
MAX_D1 = 2


@dataclass(frozen=True)
class EtaDomain:
    values: Tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals:
            raise ValueError("eta domain is empty")
        if any(v < 2 for v in vals):
            raise ValueError("eta values must be at least 2")
        if list(vals) != sorted(set(vals)):
            raise ValueError("eta domain must be strictly ascending")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def index(self, eta: int) -> int:
        return self.values.index(int(eta))


def component_domains(d1: int, d2: int, eta_domain_size: int) -> Dict[str, int]:
    """Number of admissible values for each key component."""
    return {
        "k1": 2 ** (2 * d1),
        "k2": 2 ** (d1 + 1),
        "k3": factorial(2 ** (d1 + 1)),
        "k4": 2 ** (2 * d2),
        "k5": 2 ** (d1 + 1),
        "k6": eta_domain_size,
    }


def component_primes(d1: int, d2: int, eta_domain_size: int) -> Dict[str, int]:
    """Smallest prime above each domain size (and above 3, the player count)."""
    return {k: next_prime_above(max(v, 3)) for k, v in component_domains(d1, d2, eta_domain_size).items()}


@dataclass(frozen=True)
class KeyTuple:
    k1: int
    k2: int
    k3: int
    k4: int
    k5: int
    k6: int

    @classmethod
    def from_key(cls, key: AnamorphicKey, eta_domain: EtaDomain) -> "KeyTuple":
        return cls(key.k.value, key.d1, key.perm.lehmer, key.k_prime.value, key.d2, eta_domain.index(key.eta))

    def to_key(self, eta_domain: EtaDomain) -> AnamorphicKey:
        d1, d2 = self.k2, self.k5
        return AnamorphicKey(
            d1,
            d2,
            QotpKey.from_value(self.k1, d1),
            QotpKey.from_value(self.k4, d2),
            PermSpec.from_lehmer(self.k3, 2 ** (d1 + 1)),
            eta_domain.values[self.k6],
        )

    def as_dict(self) -> Dict[str, int]:
        return {c: getattr(self, c) for c in COMPONENTS}


@dataclass(frozen=True)
class ShareBundle:
    """One player's share.  ``qudit_index`` is the 0-based register position
    in the encoded three-qudit state (evaluation point ``player``)."""

    player: int
    classical: Mapping[str, Tuple[FieldElement, FieldElement]]
    qudit_index: int

    def __post_init__(self):
        if self.player not in (1, 2, 3):
            raise ValueError("player index must be 1, 2 or 3")
        for name, (x, _) in self.classical.items():
            if x.value != self.player:
                raise ValueError(f"{name}: evaluation point {x.value} != player {self.player}")


def withhold_covert(bundle: ShareBundle) -> ShareBundle:
    """The bundle with the covert key components removed."""
    kept = {k: v for k, v in bundle.classical.items() if k in ORIGINAL_COMPONENTS}
    return replace(bundle, classical=kept)


@dataclass(frozen=True)
class QassShare:
    bundles: Tuple[ShareBundle, ShareBundle, ShareBundle]
    enc: EncodedQuantumState = field(repr=False)
    dictator_view: Ciphertext = field(repr=False)
    key: AnamorphicKey
    eta_domain: EtaDomain


def qass_share(mo, mc, eta_domain: EtaDomain, cfg: SecurityConfig, rng, eta_mode: str = "weak") -> QassShare:
    """Encrypt, then share.  RNG draws: the key (see ``keygen``), then one
    Shamir coefficient per component in the order k1..k6."""
    d1 = int(round(math.log2(np.asarray(mo).shape[0])))
    d2 = int(round(math.log2(np.asarray(mc).shape[0])))
    if d1 > MAX_D1:
        raise UnsupportedDims(f"sharing the permutation index is only set up for d1 <= {MAX_D1}")
    key = keygen(d1, d2, cfg, eta_mode, mo, mc, rng, eta_domain=eta_domain.values)
    ct = encrypt_direct(mo, mc, key)
    values = KeyTuple.from_key(key, eta_domain).as_dict()
    primes = component_primes(d1, d2, len(eta_domain))
    shares = {c: shamir_share(FieldElement(values[c], primes[c]), rng) for c in COMPONENTS}
    bundles = tuple(
        ShareBundle(i + 1, {c: shares[c][i] for c in COMPONENTS}, i) for i in range(3)
    )
    enc = cgl_encode(ct.dm, code_prime(ct.dm.shape[0]))
    return QassShare(bundles, enc, ct, key, eta_domain)


def _distinct(bundles: Sequence[ShareBundle]):
    by_player = {}
    for b in bundles:
        by_player.setdefault(b.player, b)
    if len(by_player) < 2:
        raise ThresholdUnmet(f"{len(by_player)} distinct player(s); two are required")
    return [by_player[p] for p in sorted(by_player)][:2]


def reconstruct_components(bundles: Sequence[ShareBundle], names=COMPONENTS) -> Dict[str, int]:
    pair = _distinct(bundles)
    out = {}
    for name in names:
        if any(name not in b.classical for b in pair):
            raise CovertUnavailable(f"component {name} is missing from the supplied shares")
        out[name] = shamir_reconstruct([b.classical[name] for b in pair]).value
    return out


def _decode(bundles, enc: EncodedQuantumState) -> np.ndarray:
    pair = _distinct(bundles)
    return cgl_decode(enc, (pair[0].player, pair[1].player))


def reconstruct_original(bundles: Sequence[ShareBundle], enc: EncodedQuantumState) -> np.ndarray:
    """Original message from ``k1, k2, k3`` and the decoded ciphertext."""
    comp = reconstruct_components(bundles, ORIGINAL_COMPONENTS)
    d1 = comp["k2"]
    dm = _decode(bundles, enc)
    return dom_from_parts(dm, d1, QotpKey.from_value(comp["k1"], d1), PermSpec.from_lehmer(comp["k3"], 2 ** (d1 + 1)))


def reconstruct_covert(bundles: Sequence[ShareBundle], enc: EncodedQuantumState, eta_domain: EtaDomain) -> np.ndarray:
    comp = reconstruct_components(bundles, COMPONENTS)
    key = KeyTuple(**comp).to_key(eta_domain)
    return dcm_exact(Ciphertext(key.d1, _decode(bundles, enc)), key)


@dataclass(frozen=True)
class QassReconstruction:
    mo_rec: np.ndarray
    mc_rec: Optional[np.ndarray]
    key: Optional[AnamorphicKey]


def qass_reconstruct(bundles: Sequence[ShareBundle], enc: EncodedQuantumState, eta_domain: EtaDomain) -> QassReconstruction:
    comp = reconstruct_components(bundles, COMPONENTS)
    key = KeyTuple(**comp).to_key(eta_domain)
    ct = Ciphertext(key.d1, _decode(bundles, enc))
    return QassReconstruction(dom_from_parts(ct.dm, key.d1, key.k, key.perm), dcm_exact(ct, key), key)


def inconsistent_components(bundles: Sequence[ShareBundle]) -> Dict[str, Dict[Tuple[int, int], int]]:
    """Components whose reconstruction differs between player pairs.

    With honest shares every pair agrees; a single tampered share makes the
    two pairs that use it disagree with the third.
    """
    by_player = {b.player: b for b in bundles}
    if len(by_player) < 3:
        raise ThresholdUnmet("cross-pair checks need all three bundles")
    bad = {}
    names = set.intersection(*(set(b.classical) for b in by_player.values()))
    for name in COMPONENTS:
        if name not in names:
            continue
        vals = {
            (i, j): shamir_reconstruct([by_player[i].classical[name], by_player[j].classical[name]]).value
            for i, j in combinations(sorted(by_player), 2)
        }
        if len(set(vals.values())) > 1:
            bad[name] = vals
    return bad


def _clog2(x: int) -> int:
    """``ceil(log2 x)`` in exact integer arithmetic."""
    return (int(x) - 1).bit_length() if x > 1 else 0


@dataclass(frozen=True)
class ShareSizeReport:
    anamorphic_bits: int
    original_bits: int
    difference: int
    quantum_bits: int


def quantum_share_bits(d1: int) -> int:
    q = code_prime(2 ** (d1 + 1))
    return 3 * _clog2(q)


def share_size_bits(d1: int, d2: int, field_size: int, eta_domain_size: int, quantum_bits: int) -> int:
    return (
        quantum_bits
        + (4 * d1 + 2 * d2 + 1)
        + 6 * _clog2(field_size)
        + _clog2(eta_domain_size)
        + _clog2(factorial(2 ** (d1 + 1)))
    )


def share_size_report(d1: int, d2: int, field_size: int, eta_domain_size: int, quantum_bits: Optional[int] = None) -> ShareSizeReport:
    """Total share size of the anamorphic sharing and of sharing the
    original-only ciphertext.  Both carry a ciphertext of the same dimension
    and the same six key slots, so they coincide."""
    qa = quantum_share_bits(d1) if quantum_bits is None else int(quantum_bits)
    # M_f^(0) has the same dimension as M_f^(1), so the code size is equal
    qo = quantum_share_bits(d1) if quantum_bits is None else int(quantum_bits)
    ana = share_size_bits(d1, d2, field_size, eta_domain_size, qa)
    orig = share_size_bits(d1, d2, field_size, eta_domain_size, qo)
    return ShareSizeReport(ana, orig, ana - orig, qa)


def partial_cheating_probability(d1: int, d2: int, eta_domain_size: int) -> float:
    return 1.0 - 1.0 / (2 ** (2 * d2 + d1 + 1) * eta_domain_size)


@dataclass(frozen=True)
class CheatReport:
    empirical_success: float
    formula: float
    trials: int
    sigma: float


def cheat_simulate(d1: int, d2: int, eta_domain_size: int, trials: int, rng) -> CheatReport:
    """Forgery of the covert key shares by a coalition.

    Each trial draws an honest covert tuple ``(k4, k5, k6)`` uniformly from
    its domains; the forgers then hand in Shamir shares of a uniformly random
    tuple.  The attempt succeeds if the reconstructed covert key differs
    from the honest one.  Draws per trial: honest k4, k5, k6, then for each
    component a forged value and a Shamir coefficient.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    doms = component_domains(d1, d2, eta_domain_size)
    primes = {k: next_prime_above(max(v, 3)) for k, v in doms.items()}
    wins = 0
    for _ in range(trials):
        honest = {c: int(rng.integers(0, doms[c])) for c in COVERT_COMPONENTS}
        rebuilt = {}
        for c in COVERT_COMPONENTS:
            forged = int(rng.integers(0, doms[c]))
            shares = shamir_share(FieldElement(forged, primes[c]), rng)
            rebuilt[c] = shamir_reconstruct(shares[:2]).value
        wins += rebuilt != honest
    p = partial_cheating_probability(d1, d2, eta_domain_size)
    return CheatReport(wins / trials, p, trials, math.sqrt(p * (1 - p) / trials))


def validate_pair(players) -> Tuple[int, int]:
    pair = tuple(sorted(set(int(p) for p in players)))
    if len(pair) != 2 or not set(pair) <= {1, 2, 3}:
        raise InvalidPair(f"players must be two distinct values from 1..3, got {players}")
    return pair
