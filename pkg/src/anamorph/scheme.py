"""Anamorphic symmetric-key encryption of density matrices.

An original message ``M_o`` (``d1`` qubits) and a covert message ``M_c``
(``d2 <= d1`` qubits) go into one ``(d1 + 1)``-qubit ciphertext

    M_a = [[ M_o'/2,    M_c''/eta ],
           [ M_c''/eta, M_o'/2    ]]

with ``M_o' = QOTP(M_o, k)``, ``M_c'' = pad(QOTP(M_c, k'))``, and the
leading qubit acting as a control register.  The ciphertext is the
permutation conjugate ``U_sigma M_a U_sigma^dagger``.  The original-only
ciphertext drops the off-diagonal blocks.
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EtaInfeasible,
    EtaTooSmallForDilation,
    NoCovertSignal,
    NotStrictlyPositive,
)
from .linalg import (
    apply_hermitian_function,
    as_matrix,
    eigvalsh,
    hermitian_eig,
    is_hermitian,
    operator_norm,
    partial_trace,
    pinv_psd,
    require_density,
)
from .qops import (
    PermSpec,
    QotpKey,
    control_blocks,
    dephase_control,
    hadamard_on_control,
    pad_embed,
    pad_projector,
    pad_unembed,
    permute_conjugate,
    qotp_decrypt,
    qotp_encrypt,
)

# slack on the ceil() of eta bounds; exact boundary cases (eta = 4 for
# I/2 and |0><0|) otherwise round up by one
ETA_SLACK = 1e-9


@dataclass(frozen=True)
class SecurityConfig:
    security_bits: int = 1
    min_eig_floor: float = 1e-9

    def __post_init__(self):
        if self.security_bits < 1:
            raise ValueError("security_bits must be at least 1")


@dataclass(frozen=True)
class AnamorphicKey:
    d1: int
    d2: int
    k: QotpKey
    k_prime: QotpKey
    perm: PermSpec
    eta: int

    def __post_init__(self):
        if not 0 <= self.d2 <= self.d1:
            raise DimensionMismatch(f"need d2 <= d1, got d1={self.d1}, d2={self.d2}")
        if self.k.n != self.d1 or self.k_prime.n != self.d2:
            raise DimensionMismatch("QOTP key lengths do not match d1, d2")
        if self.perm.size != 2 ** (self.d1 + 1):
            raise DimensionMismatch(f"permutation size {self.perm.size} != 2^(d1+1)")
        if int(self.eta) < 1:
            raise ValueError("eta must be a positive integer")

    def with_eta(self, eta: int) -> "AnamorphicKey":
        return AnamorphicKey(self.d1, self.d2, self.k, self.k_prime, self.perm, int(eta))


@dataclass(frozen=True)
class Ciphertext:
    d1: int
    dm: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = 2 ** (self.d1 + 1)
        if self.dm.shape != (n, n):
            raise DimensionMismatch(f"ciphertext for d1={self.d1} must be {n}x{n}")


@dataclass(frozen=True)
class DilationTrace:
    kappa: float
    kappa_max: float
    lam: float
    w0: np.ndarray = field(repr=False)
    u_bf: np.ndarray = field(repr=False)
    support_projector: np.ndarray = field(repr=False)
    x_block: np.ndarray = field(repr=False)  # 2 * Omega(0,1) before dephasing


def _ceil(x: float) -> int:
    return int(math.ceil(x - ETA_SLACK))


def _lambda_min(mo_enc, floor: float) -> float:
    lam = float(eigvalsh(mo_enc)[0])
    if lam < floor:
        raise NotStrictlyPositive(f"smallest eigenvalue {lam:.3e} below floor {floor:.1e}")
    return lam


def dilation_kappa(mo_enc, mc_padded) -> float:
    """``||M_o'^{-1/2} M_c'' M_o'^{-1/2}||``, the contraction scale."""
    r = apply_hermitian_function(mo_enc, "inv_sqrt_on_support")
    return operator_norm(r @ mc_padded @ r)


def strict_lhs(mo_enc, mc_padded) -> float:
    """``||M_c'' M_o'^{-1} M_c''||`` (divide by eta^2 for the condition)."""
    return operator_norm(mc_padded @ pinv_psd(mo_enc) @ mc_padded)


def select_eta(mo_enc, mc_padded, cfg: SecurityConfig = SecurityConfig(), mode: str = "weak") -> int:
    """Smallest integer eta meeting the PSD condition, the negligibility
    threshold ``1/eta < 2^-security_bits`` and dilation feasibility.

    ``weak`` uses ``2 lambda_max(M_c'') / lambda_min(M_o')``, which depends on
    spectra only and so is the same for every QOTP key.
    """
    mo_enc, mc_padded = as_matrix(mo_enc), as_matrix(mc_padded)
    if mo_enc.shape != mc_padded.shape:
        raise DimensionMismatch("original and padded covert states differ in size")
    lam_min = _lambda_min(mo_enc, cfg.min_eig_floor)
    if mode == "weak":
        cond = _ceil(2.0 * float(eigvalsh(mc_padded)[-1]) / lam_min)
    elif mode == "strict":
        cond = _ceil(math.sqrt(4.0 * strict_lhs(mo_enc, mc_padded) / lam_min))
    else:
        raise ValueError(f"unknown eta mode {mode!r}")
    negl = 2**cfg.security_bits + 1
    kappa_max = max(1.0, dilation_kappa(mo_enc, mc_padded))
    dil = _ceil(2.0 * kappa_max)
    return max(1, cond, negl, dil)


def strict_condition_holds(mo_enc, mc_padded, eta: float) -> bool:
    lam_min = float(eigvalsh(mo_enc)[0])
    return strict_lhs(mo_enc, mc_padded) / eta**2 <= 0.25 * lam_min * (1 + ETA_SLACK) + 1e-15


def _random_bits(rng, count: int):
    return tuple(int(rng.integers(0, 2)) for _ in range(count))


def keygen(
    d1: int,
    d2: int,
    cfg: SecurityConfig,
    eta_mode: str,
    mo,
    mc,
    rng,
    eta_domain: Optional[Sequence[int]] = None,
) -> AnamorphicKey:
    """Draw k, then k', then the Fisher-Yates permutation, then pick eta.

    With ``eta_domain`` the smallest admissible domain value is used.
    """
    mo = require_density(mo, "original message")
    mc = require_density(mc, "covert message")
    if mo.shape[0] != 2**d1 or mc.shape[0] != 2**d2:
        raise DimensionMismatch("message sizes do not match d1, d2")
    k = QotpKey(_random_bits(rng, 2 * d1))
    kp = QotpKey(_random_bits(rng, 2 * d2))
    perm = PermSpec.sample(2 ** (d1 + 1), rng)
    eta = select_eta(qotp_encrypt(mo, k), pad_embed(qotp_encrypt(mc, kp), d1), cfg, eta_mode)
    if eta_domain is not None:
        ok = [v for v in sorted(eta_domain) if v >= eta]
        if not ok:
            raise EtaInfeasible(f"required eta {eta} exceeds every domain value")
        eta = ok[0]
    return AnamorphicKey(d1, d2, k, kp, perm, int(eta))


def _prepare(mo, mc, key: AnamorphicKey):
    mo = require_density(mo, "original message")
    if mo.shape[0] != 2**key.d1:
        raise DimensionMismatch(f"original message must be {2**key.d1}-dimensional")
    mo_enc = qotp_encrypt(mo, key.k)
    if mc is None:
        return mo_enc, None
    mc = require_density(mc, "covert message")
    if mc.shape[0] != 2**key.d2:
        raise DimensionMismatch(f"covert message must be {2**key.d2}-dimensional")
    return mo_enc, pad_embed(qotp_encrypt(mc, key.k_prime), key.d1)


def assemble_block_state(mo_enc, mc_padded, eta) -> np.ndarray:
    """``[[M_o'/2, M_c''/eta], [M_c''/eta, M_o'/2]]``; ``mc_padded=None`` gives b = 0."""
    half = 0.5 * mo_enc
    off = np.zeros_like(half) if mc_padded is None else mc_padded / eta
    return np.block([[half, off], [off.conj().T, half]])


def encrypt_direct(mo, mc, key: AnamorphicKey) -> Ciphertext:
    mo_enc, mc_pad = _prepare(mo, mc, key)
    _lambda_min(mo_enc, SecurityConfig().min_eig_floor)
    if not strict_condition_holds(mo_enc, mc_pad, key.eta):
        raise EtaInfeasible(f"eta={key.eta} violates the PSD condition for this key")
    ma = assemble_block_state(mo_enc, mc_pad, key.eta)
    return Ciphertext(key.d1, permute_conjugate(ma, key.perm))


def encrypt_original(mo, key: AnamorphicKey) -> Ciphertext:
    mo_enc, _ = _prepare(mo, None, key)
    ma = assemble_block_state(mo_enc, None, key.eta)
    return Ciphertext(key.d1, permute_conjugate(ma, key.perm))


def halmos_dilation(c: np.ndarray) -> np.ndarray:
    """Unitary ``[[C, sqrt(I - CC^+)], [sqrt(I - C^+C), -C^+]]`` in F-block form,
    laid out on ``B (x) F`` with the qubit F least significant."""
    n = c.shape[0]
    ch = c.conj().T
    if is_hermitian(c):
        # shared eigenbasis keeps C D = D C exact even when ||C|| = 1, where a
        # separate sqrt of a noisy zero eigenvalue would cost ~1e-8 unitarity
        eig = hermitian_eig(0.5 * (c + ch))
        w = np.clip(eig.eigenvalues, -1.0, 1.0)
        q = eig.eigenvectors
        d_left = d_right = (q * np.sqrt((1.0 - w) * (1.0 + w))) @ q.conj().T
    else:
        eye = np.eye(n)
        d_left = apply_hermitian_function(eye - c @ ch, "sqrt")
        d_right = apply_hermitian_function(eye - ch @ c, "sqrt")
    p00 = np.array([[1, 0], [0, 0]])
    p01 = np.array([[0, 1], [0, 0]])
    p10 = np.array([[0, 0], [1, 0]])
    p11 = np.array([[0, 0], [0, 1]])
    return np.kron(c, p00) + np.kron(d_left, p01) + np.kron(d_right, p10) + np.kron(-ch, p11)


def encrypt_dilation(mo, mc, key: AnamorphicKey):
    """Same ciphertext as :func:`encrypt_direct`, built physically.

    Purify ``M_o'`` on ``M (x) B``, let the control branch |1> apply the Halmos
    dilation of ``W0^T`` on ``B (x) F``, trace out ``B F``, then dephase the
    control with ``lambda = 2 kappa_max / eta`` and permute.
    Returns ``(Ciphertext, DilationTrace)``.
    """
    mo_enc, mc_pad = _prepare(mo, mc, key)
    _lambda_min(mo_enc, SecurityConfig().min_eig_floor)
    d = mo_enc.shape[0]
    inv_sqrt = apply_hermitian_function(mo_enc, "inv_sqrt_on_support")
    proj = inv_sqrt @ apply_hermitian_function(mo_enc, "sqrt")  # support projector
    v0 = proj @ inv_sqrt @ mc_pad @ inv_sqrt @ proj
    kappa = operator_norm(v0)
    kappa_max = max(1.0, kappa)
    if key.eta < 2 * kappa_max * (1 - ETA_SLACK):
        raise EtaTooSmallForDilation(f"eta={key.eta} < 2 kappa_max = {2 * kappa_max:.6g}")
    w0 = v0 / kappa_max
    u_bf = halmos_dilation(w0.T)

    # phi = vec(sqrt(M_o')) on M (x) B; index (i, j) = sqrt(M_o')[i, j]
    phi = apply_hermitian_function(mo_enc, "sqrt")
    zero_f = np.array([1.0, 0.0])
    branch0 = np.kron(phi, zero_f)  # rows M, columns B (x) F
    branch1 = branch0 @ u_bf.T  # (I_M (x) U_BF) acting on the column index
    psi = np.vstack([branch0, branch1]) / np.sqrt(2.0)  # rows R (x) M
    omega = psi @ psi.conj().T  # trace over B (x) F
    x_block = 2.0 * control_blocks(omega)[1]

    lam = min(1.0, 2.0 * kappa_max / key.eta)
    ma = dephase_control(omega, lam)
    ct = Ciphertext(key.d1, permute_conjugate(ma, key.perm))
    trace = DilationTrace(kappa, kappa_max, lam, w0, u_bf, proj, x_block)
    return ct, trace


def _check_ct(ct: Ciphertext, key: AnamorphicKey) -> np.ndarray:
    if ct.d1 != key.d1:
        raise DimensionMismatch(f"ciphertext d1={ct.d1} but key d1={key.d1}")
    return as_matrix(ct.dm)


def _undo_perm(ct: Ciphertext, key: AnamorphicKey) -> np.ndarray:
    return permute_conjugate(_check_ct(ct, key), key.perm, inverse=True)


def dom_decrypt(ct: Ciphertext, key: AnamorphicKey) -> np.ndarray:
    """Original message: undo sigma, pinch the control, trace it out, undo k."""
    _check_ct(ct, key)
    return dom_from_parts(ct.dm, key.d1, key.k, key.perm)


def dom_from_parts(dm, d1: int, k: QotpKey, perm: PermSpec) -> np.ndarray:
    """:func:`dom_decrypt` using only the original key components."""
    md = dephase_control(permute_conjugate(as_matrix(dm), perm, inverse=True), 0.0)
    mo_enc = partial_trace(md, [2, 2**d1], [0])
    return qotp_decrypt(mo_enc, k)


def branch_blocks(md: np.ndarray, probe: str = "X"):
    """Unnormalised blocks ``D_b`` after ``G`` on the control (``G = H`` or ``HS``)."""
    rho = hadamard_on_control(md, phase=(probe == "Y"))
    a, _, _, d = control_blocks(rho)
    return a, d


def dcm_exact(ct: Ciphertext, key: AnamorphicKey) -> np.ndarray:
    """Covert message from exact branch blocks: ``B = eta (D_0 - D_1) / 2``."""
    d0, d1 = branch_blocks(_undo_perm(ct, key))
    b_hat = key.eta * (d0 - d1) / 2.0
    if np.max(np.abs(b_hat)) < 1e-12:
        raise NoCovertSignal("ciphertext carries no covert block", matrix=b_hat)
    return qotp_decrypt(pad_unembed(b_hat, key.d2), key.k_prime)


def eoc_extract(ct: Ciphertext, key: AnamorphicKey) -> Ciphertext:
    md = dephase_control(_undo_perm(ct, key), 0.0)
    return Ciphertext(key.d1, permute_conjugate(md, key.perm))


@dataclass(frozen=True)
class TpdsOutcome:
    anamorphic: Ciphertext
    original: Ciphertext
    dictator_from_anamorphic: np.ndarray
    dictator_from_original: np.ndarray
    receiver_covert: np.ndarray

    @property
    def dictator_views_identical(self) -> bool:
        return bool(np.array_equal(self.dictator_from_anamorphic, self.dictator_from_original))


def tpds(mo, mc, key: AnamorphicKey) -> TpdsOutcome:
    """Transmission under a supervising party who holds only the original key.

    The supervisor decrypts the anamorphic ciphertext and, independently,
    the original ciphertext extracted from it; both views must agree.
    """
    ct1 = encrypt_direct(mo, mc, key)
    ct0 = eoc_extract(ct1, key)
    return TpdsOutcome(ct1, ct0, dom_decrypt(ct1, key), dom_decrypt(ct0, key), dcm_exact(ct1, key))


def covert_support_projector(key: AnamorphicKey) -> np.ndarray:
    return pad_projector(key.d2, key.d1)
