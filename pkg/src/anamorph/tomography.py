"""Finite-shot covert extraction by X-probe Pauli tomography.

After undoing the permutation, a Hadamard on the control qubit turns the
covert block into a population difference: the unnormalised branch blocks
satisfy ``(D_0 - D_1)/2 = Re(B)/eta``.  Each shot measures the control
(branch ``b``), picks a non-identity Pauli ``P`` on the message register and
records a +-1 outcome.  Conditional Pauli means are estimated with a
Horvitz-Thompson weight ``1/pi(P)`` and inverted linearly.

Random draws per shot are ``u = rng.random(3)``, used in the order
(branch, Pauli, outcome): ``b = 0 if u[0] < p_0``; the Pauli is
``group[floor(u[1] * len(group))]``; the outcome is +1 if
``u[2] < (1 + <P>_b)/2``.
"""
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, EmptyBranch, NoShotsInBranch, UnsupportedDesign
from .linalg import as_matrix
from .qops import PauliString, PermSpec, pad_unembed, pauli_matrix, permute_conjugate, qotp_decrypt
from .scheme import AnamorphicKey, Ciphertext, branch_blocks

DESIGNS = ("frames", "singleton")
BRANCH_FLOOR = 1e-15


@dataclass(frozen=True)
class TomographyPlan:
    d: int
    epsilon: float
    delta: float
    design: str
    n_shots: int
    allocation: Tuple[int, ...]

    @property
    def groups(self) -> Tuple[Tuple[int, ...], ...]:
        # both designs use one non-identity Pauli per group; for d = 2 the
        # three singletons are the three commuting frames
        return tuple((i,) for i in range(1, self.d * self.d))

    def inclusion_probability(self) -> np.ndarray:
        """``pi(P)`` indexed by Pauli index; 0 for the identity."""
        pi = np.zeros(self.d * self.d)
        for g, n in zip(self.groups, self.allocation):
            for p in g:
                pi[p] = n / self.n_shots / len(g)
        return pi


def shot_bound(d: int, epsilon: float, delta: float, design: str) -> float:
    log_term = math.log2(4 * d * d / delta)
    if design == "frames":
        return (d + 1) * d / (2 * epsilon**2) * log_term
    return d**3 / (2 * epsilon**2) * log_term


def plan_shots(d1: int, epsilon: float, delta: float, design: str = "frames") -> TomographyPlan:
    """Smallest shot count meeting the Hoeffding/union bound, rounded up to a
    multiple of the number of groups and split evenly."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    if design not in DESIGNS:
        raise UnsupportedDesign(f"unknown design {design!r}")
    d = 2**d1
    if design == "frames" and d != 2:
        raise UnsupportedDesign("the frame design is only tabulated for d = 2")
    groups = d * d - 1
    n = math.ceil(shot_bound(d, epsilon, delta, design))
    n = -(-n // groups) * groups
    return TomographyPlan(d, float(epsilon), float(delta), design, n, (n // groups,) * groups)


@dataclass(frozen=True)
class ShotRecord:
    branch: int
    pauli: int
    outcome: int

    def __post_init__(self):
        if self.outcome not in (-1, 1):
            raise ValueError("outcome must be +1 or -1")


@dataclass(frozen=True)
class ShotLog:
    """Column arrays of a shot sequence."""

    branch: np.ndarray
    pauli: np.ndarray
    outcome: np.ndarray

    def __len__(self):
        return len(self.branch)

    def records(self):
        return [ShotRecord(int(b), int(p), int(m)) for b, p, m in zip(self.branch, self.pauli, self.outcome)]

    @classmethod
    def from_records(cls, shots: Sequence[ShotRecord]) -> "ShotLog":
        return cls(
            np.array([s.branch for s in shots], dtype=np.int64),
            np.array([s.pauli for s in shots], dtype=np.int64),
            np.array([s.outcome for s in shots], dtype=np.int64),
        )

    @classmethod
    def concat(cls, logs) -> "ShotLog":
        logs = list(logs)
        return cls(*(np.concatenate([getattr(l, f) for l in logs]) for f in ("branch", "pauli", "outcome")))

    def to_csv_rows(self, n_qubits: int, trial: int = 0):
        """Rows ``(trial, t, branch, pauli symbol, outcome)``."""
        n = n_qubits
        for t, (b, p, m) in enumerate(zip(self.branch, self.pauli, self.outcome)):
            yield trial, t, int(b), PauliString.from_index(int(p), n).symbol, int(m)


@dataclass(frozen=True)
class ShotModel:
    """Branch probabilities and conditional Pauli means of a probed state."""

    p0: float
    expectations: np.ndarray  # shape (2, d*d), Hermitian Pauli means per branch


def probe_state(ct: Ciphertext, perm: PermSpec, probe: str = "X"):
    if probe not in ("X", "Y"):
        raise ValueError(f"unknown probe {probe!r}")
    md = permute_conjugate(as_matrix(ct.dm), perm, inverse=True)
    return branch_blocks(md, probe)


def shot_model(ct: Ciphertext, perm: PermSpec, probe: str = "X") -> ShotModel:
    blocks = probe_state(ct, perm, probe)
    probs = [float(np.trace(b).real) for b in blocks]
    assert abs(sum(probs) - 1.0) <= 1e-12, "branch probabilities do not sum to one"
    for b, p in enumerate(probs):
        if p < BRANCH_FLOOR:
            raise EmptyBranch(f"branch {b} has probability {p:.3e}")
    d = blocks[0].shape[0]
    n = int(round(math.log2(d)))
    exps = np.zeros((2, d * d))
    for i in range(d * d):
        pm = pauli_matrix(PauliString.from_index(i, n), hermitian=True)
        for b in range(2):
            exps[b, i] = float(np.trace(pm @ blocks[b]).real) / probs[b]
    return ShotModel(probs[0], np.clip(exps, -1.0, 1.0))


def _draw(model: ShotModel, group: Sequence[int], u: np.ndarray) -> ShotLog:
    u = np.atleast_2d(u)
    branch = (u[:, 0] >= model.p0).astype(np.int64)
    g = np.asarray(group, dtype=np.int64)
    pauli = g[np.minimum((u[:, 1] * len(g)).astype(np.int64), len(g) - 1)]
    plus = u[:, 2] < (1.0 + model.expectations[branch, pauli]) / 2.0
    return ShotLog(branch, pauli, np.where(plus, 1, -1).astype(np.int64))


def sample_shot(ct: Ciphertext, key_perm: PermSpec, group: Sequence[int], probe: str, rng) -> ShotRecord:
    """One shot; consumes exactly ``rng.random(3)``."""
    model = shot_model(ct, key_perm, probe)
    return _draw(model, group, rng.random(3)).records()[0]


def sample_shots(model: ShotModel, group: Sequence[int], n: int, rng) -> ShotLog:
    """``n`` shots from ``rng.random((n, 3))``; identical to ``n`` calls of
    :func:`sample_shot` on the same stream."""
    return _draw(model, group, rng.random((n, 3)))


def sample_plan(model: ShotModel, plan: TomographyPlan, rng) -> ShotLog:
    """All shots of a plan, group by group in plan order."""
    return ShotLog.concat(sample_shots(model, g, n, rng) for g, n in zip(plan.groups, plan.allocation))


@dataclass(frozen=True)
class BlockEstimate:
    D0_hat: np.ndarray
    D1_hat: np.ndarray


def linear_inversion_estimate(shots, plan: TomographyPlan, allow_empty_branch: bool = False) -> BlockEstimate:
    """Horvitz-Thompson estimate of the unnormalised branch blocks.

    ``mu_b(P) = (1/n_b) sum_{t in b, P_t = P} m_t / pi(P)``,
    ``rho_b = (I + sum_P mu_b(P) P) / d`` and ``D_b = (n_b / N) rho_b``.
    An empty branch raises unless ``allow_empty_branch``, which returns 0.
    """
    log = shots if isinstance(shots, ShotLog) else ShotLog.from_records(list(shots))
    d = plan.d
    nq = int(round(math.log2(d)))
    total = len(log)
    pi = plan.inclusion_probability()
    paulis = [pauli_matrix(PauliString.from_index(i, nq), hermitian=True) for i in range(d * d)]
    out = []
    for b in range(2):
        mask = log.branch == b
        n_b = int(mask.sum())
        if n_b == 0:
            if allow_empty_branch:
                out.append(np.zeros((d, d), dtype=np.complex128))
                continue
            raise NoShotsInBranch(f"no shots landed in branch {b}")
        sums = np.bincount(log.pauli[mask], weights=log.outcome[mask], minlength=d * d)
        rho = np.eye(d, dtype=np.complex128)
        for i in range(1, d * d):
            if pi[i] > 0 and sums[i] != 0:
                rho = rho + (sums[i] / n_b / pi[i]) * paulis[i]
        out.append(rho / d * (n_b / total))
    return BlockEstimate(out[0], out[1])


@dataclass(frozen=True)
class DcmFiniteResult:
    mc_hat: np.ndarray
    b_error_l2: float
    b_error_trace_bound: float
    D0_hat: np.ndarray
    D1_hat: np.ndarray


def covert_from_blocks(d0, d1, key: AnamorphicKey) -> np.ndarray:
    b_hat = key.eta * (d0 - d1) / 2.0
    b_hat = 0.5 * (b_hat + b_hat.conj().T)
    return qotp_decrypt(pad_unembed(b_hat, key.d2), key.k_prime)


def dcm_finite(ct: Ciphertext, key: AnamorphicKey, plan: TomographyPlan, rng) -> DcmFiniteResult:
    """Covert message from sampled shots.

    ``b_error_l2`` compares the estimated ``(D_0 - D_1)/2`` with the exact
    blocks of ``ct`` (available in simulation); the trace-norm bound is
    ``eta * sqrt(d) * b_error_l2``.
    """
    if ct.d1 != key.d1 or plan.d != 2**key.d1:
        raise DimensionMismatch("plan, key and ciphertext sizes disagree")
    model = shot_model(ct, key.perm)
    est = linear_inversion_estimate(sample_plan(model, plan, rng), plan)
    d0, d1 = probe_state(ct, key.perm)
    err = float(np.linalg.norm((est.D0_hat - est.D1_hat) / 2 - (d0 - d1) / 2))
    mc_hat = covert_from_blocks(est.D0_hat, est.D1_hat, key)
    return DcmFiniteResult(mc_hat, err, key.eta * math.sqrt(plan.d) * err, est.D0_hat, est.D1_hat)
