import numpy as np
import pytest

from anamorph.errors import CovertUnavailable, DuplicatePoints, FieldTooSmall, InvalidPair, ThresholdUnmet
from anamorph.qass import (
    EtaDomain,
    KeyTuple,
    component_primes,
    inconsistent_components,
    partial_cheating_probability,
    qass_share,
    reconstruct_original,
    reconstruct_covert,
    share_size_report,
    withhold_covert,
)
from anamorph.qudit_code import cgl_decode, cgl_encode, encoding_isometry, is_authorized
from anamorph.scheme import SecurityConfig
from anamorph.shamir import FieldElement, is_prime, next_prime_above, shamir_reconstruct, shamir_share
from anamorph.states import basis_state, maximally_mixed, random_density


def test_primes():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert next_prime_above(3) == 5 and next_prime_above(7) == 11
    assert min(component_primes(1, 1, 4).values()) > 3


def test_field_arithmetic():
    a, b = FieldElement(3, 7), FieldElement(5, 7)
    assert (a + b).value == 1 and (a - b).value == 5 and (a * b).value == 1
    assert (a * a.inverse()).value == 1


def test_shamir_all_pairs():
    rng = np.random.default_rng(0)
    for p in (5, 7, 101):
        for s in range(p):
            shares = shamir_share(FieldElement(s, p), rng)
            for i, j in ((0, 1), (0, 2), (1, 2)):
                assert shamir_reconstruct([shares[i], shares[j]]).value == s
    shares = shamir_share(FieldElement(1, 5), rng)
    with pytest.raises(ThresholdUnmet):
        shamir_reconstruct(shares[:1])
    with pytest.raises(DuplicatePoints):
        shamir_reconstruct([shares[0], shares[0]])
    with pytest.raises(FieldTooSmall):
        shamir_share(FieldElement(1, 3), rng)


def test_code_isometry_and_access():
    v = encoding_isometry(5)
    assert np.allclose(v.conj().T @ v, np.eye(5))
    rho = random_density(4, np.random.default_rng(1))
    enc = cgl_encode(rho, 5)
    for pair in ((1, 2), (1, 3), (2, 3)):
        assert np.allclose(cgl_decode(enc, pair), rho, atol=1e-12)
    for i in (1, 2, 3):
        assert np.allclose(enc.register_state(i), np.eye(5) / 5, atol=1e-12)
    with pytest.raises(InvalidPair):
        cgl_decode(enc, (1, 1))
    assert is_authorized([1, 3]) and not is_authorized([2])


def test_qass_flow():
    rng = np.random.default_rng(2)
    domain = EtaDomain((4, 8, 16))
    mo, mc = maximally_mixed(2), basis_state(0, 2)
    sh = qass_share(mo, mc, domain, SecurityConfig(1), rng)
    assert KeyTuple.from_key(sh.key, domain).to_key(domain) == sh.key
    b = sh.bundles
    assert np.allclose(reconstruct_original([b[0], b[2]], sh.enc), mo, atol=1e-12)
    assert np.allclose(reconstruct_covert([b[1], b[2]], sh.enc, domain), mc, atol=1e-12)
    partial = [withhold_covert(x) for x in b[:2]]
    assert np.allclose(reconstruct_original(partial, sh.enc), mo, atol=1e-12)
    with pytest.raises(CovertUnavailable):
        reconstruct_covert(partial, sh.enc, domain)
    assert inconsistent_components(b) == {}


def test_tampered_share_detected():
    from dataclasses import replace

    sh = qass_share(maximally_mixed(2), basis_state(0, 2), EtaDomain((4, 8)), SecurityConfig(1), np.random.default_rng(3))
    b = list(sh.bundles)
    x, y = b[0].classical["k1"]
    b[0] = replace(b[0], classical={**b[0].classical, "k1": (x, y + FieldElement(1, y.p))})
    assert "k1" in inconsistent_components(b)


def test_share_size_and_cheat_formula():
    rep = share_size_report(1, 1, 2**16, 4)
    assert rep.anamorphic_bits == 119 and rep.difference == 0
    assert partial_cheating_probability(1, 1, 4) == 0.984375
