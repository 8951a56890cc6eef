"""Security quantities: distances, fidelity, twirl averages, entropies and
the coin-averaged encryption map."""
import math
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, EtaInfeasible, NotStrictlyPositive, TooLargeForBruteForce, UnsupportedDims
from .linalg import as_matrix, eigvalsh, hermitian_eig, pinv_psd, require_density, sqrtm_psd, trace_norm
from .qops import PermSpec, QotpKey, pad_embed, pad_projector, permute_conjugate, qotp_encrypt
from .scheme import Ciphertext, assemble_block_state

BRUTE_FORCE_MAX = 8
COMMUTE_TOL = 1e-10


def _pair(rho, sigma):
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"states of shape {rho.shape} and {sigma.shape}")
    return rho, sigma


def trace_distance(rho, sigma) -> float:
    rho, sigma = _pair(rho, sigma)
    diff = rho - sigma
    return 0.5 * trace_norm(0.5 * (diff + diff.conj().T))


def fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    rho, sigma = _pair(rho, sigma)
    s = sqrtm_psd(rho)
    inner = s @ sigma @ s
    vals = eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))))


@dataclass(frozen=True)
class IndistinguishabilityReport:
    trace_distance: float
    fidelity: float
    eta: int
    fvdg_lower: float
    fvdg_upper: float
    helstrom_advantage: float

    def __post_init__(self):
        assert self.fvdg_lower <= self.trace_distance + 1e-9, "Fuchs-van de Graaf lower bound violated"
        assert self.trace_distance <= self.fvdg_upper + 1e-9, "Fuchs-van de Graaf upper bound violated"


def indistinguishability_report(ct0: Ciphertext, ct1: Ciphertext, eta: int) -> IndistinguishabilityReport:
    """Distance and fidelity between an original and an anamorphic ciphertext.

    The Helstrom-optimal distinguishing advantage equals the trace distance.
    """
    a = ct0.dm if isinstance(ct0, Ciphertext) else ct0
    b = ct1.dm if isinstance(ct1, Ciphertext) else ct1
    d = trace_distance(a, b)
    f = min(fidelity(a, b), 1.0)
    return IndistinguishabilityReport(d, f, int(eta), 1.0 - f, math.sqrt(max(0.0, 1.0 - f * f)), d)


@dataclass(frozen=True)
class TwirlReport:
    n: int
    alpha: float
    beta: float
    formula_state: np.ndarray
    brute_force_state: Optional[np.ndarray]
    T: float
    S: float


def twirl_coefficients(phi):
    phi = as_matrix(phi)
    n = phi.shape[0]
    t = np.trace(phi)
    s = phi.sum()
    alpha = (n * t - s) / (n * (n - 1))
    beta = (s - t) / (n * (n - 1))
    return n, t, s, alpha, beta


def twirl_formula(phi) -> np.ndarray:
    """Average of ``U_sigma phi U_sigma^dagger`` over Sym(n): ``alpha I + beta J``."""
    n, _, _, alpha, beta = twirl_coefficients(phi)
    return alpha * np.eye(n) + beta * np.ones((n, n))


def pairwise_sum(mats):
    """Sum by a fixed balanced binary tree so the rounding does not depend on
    how the terms were produced."""
    mats = list(mats)
    if not mats:
        raise ValueError("nothing to sum")
    while len(mats) > 1:
        nxt = [mats[i] + mats[i + 1] for i in range(0, len(mats) - 1, 2)]
        if len(mats) % 2:
            nxt.append(mats[-1])
        mats = nxt
    return mats[0]


def twirl_brute_force(phi) -> np.ndarray:
    phi = as_matrix(phi)
    n = phi.shape[0]
    if n > BRUTE_FORCE_MAX:
        raise TooLargeForBruteForce(f"{n}! permutations is too many (limit n <= {BRUTE_FORCE_MAX})")
    terms = [phi[np.ix_(p, p)] for p in permutations(range(n))]
    return pairwise_sum(terms) / len(terms)


def twirl_expectation(phi, brute_force: bool = False) -> TwirlReport:
    phi = as_matrix(phi)
    if phi.shape[0] != phi.shape[1] or phi.shape[0] < 2:
        raise DimensionMismatch("twirl needs a square matrix of size at least 2")
    n, t, s, alpha, beta = twirl_coefficients(phi)
    formula = alpha * np.eye(n) + beta * np.ones((n, n))
    brute = twirl_brute_force(phi) if brute_force else None
    real = lambda z: float(z.real) if abs(z.imag) < 1e-15 else complex(z)
    return TwirlReport(n, real(alpha), real(beta), formula, brute, real(t), real(s))


def key_averaged_block_state(d1: int, d2: int, eta: float) -> np.ndarray:
    """Block state after averaging both QOTP keys, before the permutation:
    diagonal ``2^-d1 I / 2``, off-diagonal ``2^-d2 Pi_V / eta``."""
    mo_avg = np.eye(2**d1, dtype=np.complex128) / 2**d1
    mc_avg = pad_projector(d2, d1) / 2**d2
    return assemble_block_state(mo_avg, mc_avg, eta)


def expected_states(d1: int, d2: int, eta: float):
    """Fully averaged original and anamorphic ciphertexts."""
    e0 = np.eye(2 ** (d1 + 1), dtype=np.complex128) / 2 ** (d1 + 1)
    e1 = twirl_formula(key_averaged_block_state(d1, d2, eta))
    return e0, e1


def expected_state_distance(d1: int, eta: float) -> float:
    return 1.0 / (eta * 2**d1)


def von_neumann_entropy(rho) -> float:
    vals = eigvalsh(rho)
    return entropy_of(vals)


def entropy_of(vals) -> float:
    vals = np.asarray(vals, dtype=float)
    pos = vals[vals > 0]
    return float(-np.sum(pos * np.log2(pos)))


def _f(x):
    """``((1+x) log2(1+x) + (1-x) log2(1-x)) / 2`` with ``0 log 0 = 0``."""
    def xlog(y):
        return np.where(y > 0, y * np.log2(np.where(y > 0, y, 1.0)), 0.0)

    return 0.5 * (xlog(1 + x) + xlog(1 - x))


def commute(a, b) -> bool:
    c = a @ b - b @ a
    return np.linalg.norm(c) <= COMMUTE_TOL * np.linalg.norm(a) * np.linalg.norm(b)


def common_eigenbasis(a, b) -> np.ndarray:
    # a generic combination splits any degeneracy of a that b resolves
    return hermitian_eig(a + (math.pi / 7) * b).eigenvectors


@dataclass(frozen=True)
class EntropyReport:
    S_mf0: float
    S_mo_enc: float
    S_mf1_commuting: Optional[float]
    rel_entropy: Optional[float]
    rel_entropy_bound: float


def entropy_report(mo_enc, mc_padded, eta, floor: float = 1e-9) -> EntropyReport:
    """Entropies of the original and (when the two inputs commute) the
    anamorphic ciphertext, and the relative entropy between them.

    The bound is ``(4/eta^2) Tr(M_c''^2 M_o'^{-1})``, which is
    ``(4/eta^2) sum mu_i^2 / lambda_i`` in a common eigenbasis.
    """
    a = require_density(mo_enc, "original state")
    b = require_density(mc_padded, "covert state")
    if a.shape != b.shape:
        raise DimensionMismatch("states differ in size")
    lam_min = float(eigvalsh(a)[0])
    if lam_min < floor:
        raise NotStrictlyPositive(f"smallest eigenvalue {lam_min:.3e} below floor {floor:.1e}")
    s_mo = von_neumann_entropy(a)
    s_mf0 = von_neumann_entropy(assemble_block_state(a, None, eta))
    assert abs(s_mf0 - s_mo - 1.0) <= 1e-9, "S(M_f^(0)) != S(M_o') + 1"
    bound = float((4.0 / eta**2) * np.trace(b @ b @ pinv_psd(a)).real)
    s_mf1 = rel = None
    if commute(a, b):
        u = common_eigenbasis(a, b)
        lam = np.real(np.einsum("ji,jk,ki->i", u.conj(), a, u))
        mu = np.real(np.einsum("ji,jk,ki->i", u.conj(), b, u))
        pairs = np.concatenate([0.5 * lam + mu / eta, 0.5 * lam - mu / eta])
        s_mf1 = entropy_of(np.clip(pairs, 0.0, None))
        x = np.clip(2 * mu / (eta * lam), -1.0, 1.0)
        rel = float(np.sum(lam * _f(x)))
        assert rel <= bound + 1e-9, "relative entropy exceeds its bound"
    return EntropyReport(s_mf0, s_mo, s_mf1, rel, bound)


@dataclass(frozen=True)
class QcpaReport:
    avg_state: np.ndarray
    xi_formula: np.ndarray
    xi_pre_permutation: np.ndarray
    distance: float
    n_terms: int
    mode: str
    stderr: Optional[float] = None


def _weak_bound(mo, mc) -> float:
    lam_min = float(eigvalsh(mo)[0])
    if lam_min <= 0:
        raise NotStrictlyPositive("original message is not strictly positive")
    return 2.0 * float(eigvalsh(mc)[-1]) / lam_min


def _ciphertext(mo, mc, d1, k, kp, perm, eta):
    ma = assemble_block_state(qotp_encrypt(mo, k), pad_embed(qotp_encrypt(mc, kp), d1), eta)
    return permute_conjugate(ma, perm)


def qcpa_average(mo, mc, d1: int, d2: int, eta, mode: str = "exact", samples: int = 20000, rng=None) -> QcpaReport:
    """Average of the anamorphic encryption over all of its coins.

    ``exact`` enumerates every (k, k', sigma) at ``d1 = d2 = 1``: 4 x 4 x 24
    = 384 ciphertexts, summed in a fixed pairwise tree.  ``monte_carlo``
    samples coins uniformly and reports the largest entrywise standard error.
    The target is the permutation twirl of the key-averaged block state.
    """
    mo = require_density(mo, "original message")
    mc = require_density(mc, "covert message")
    if mo.shape[0] != 2**d1 or mc.shape[0] != 2**d2:
        raise DimensionMismatch("message sizes do not match d1, d2")
    if eta < _weak_bound(mo, mc) * (1 - 1e-9):
        raise EtaInfeasible(f"eta={eta} is below the key-invariant bound for these inputs")
    xi_pre = key_averaged_block_state(d1, d2, eta)
    xi = twirl_formula(xi_pre)
    n = 2 ** (d1 + 1)
    if mode == "exact":
        if d1 != 1 or d2 != 1:
            raise UnsupportedDims("exact enumeration is limited to d1 = d2 = 1")
        terms = [
            _ciphertext(mo, mc, d1, QotpKey.from_value(kv, d1), QotpKey.from_value(kpv, d2), PermSpec(p), eta)
            for kv in range(4**d1)
            for kpv in range(4**d2)
            for p in permutations(range(n))
        ]
        avg = pairwise_sum(terms) / len(terms)
        return QcpaReport(avg, xi, xi_pre, trace_distance(avg, xi), len(terms), mode)
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("monte_carlo mode needs an rng")
    terms = []
    for _ in range(samples):
        k = QotpKey(tuple(int(rng.integers(0, 2)) for _ in range(2 * d1)))
        kp = QotpKey(tuple(int(rng.integers(0, 2)) for _ in range(2 * d2)))
        terms.append(_ciphertext(mo, mc, d1, k, kp, PermSpec.sample(n, rng), eta))
    stack = np.stack(terms)
    avg = pairwise_sum(terms) / samples
    stderr = float(np.max(np.std(stack, axis=0)) / math.sqrt(samples))
    return QcpaReport(avg, xi, xi_pre, trace_distance(avg, xi), samples, mode, stderr)
