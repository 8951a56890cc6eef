"""Walk through one anamorphic encryption by hand.

Original message I/2, covert message |0><0|, all-zero pads and the identity
permutation, so every intermediate matrix is easy to read.
"""
import numpy as np

from anamorph.metrics import entropy_report, indistinguishability_report
from anamorph.qops import PermSpec, QotpKey
from anamorph.scheme import AnamorphicKey, dcm_exact, dom_decrypt, encrypt_dilation, encrypt_direct, encrypt_original, select_eta
from anamorph.states import basis_state, maximally_mixed
from anamorph.tomography import dcm_finite, plan_shots

np.set_printoptions(precision=4, suppress=True)

mo, mc = maximally_mixed(2), basis_state(0, 2)
eta = select_eta(mo, mc)
key = AnamorphicKey(1, 1, QotpKey.zero(1), QotpKey.zero(1), PermSpec.identity(4), eta)
print("eta =", eta)

ct1 = encrypt_direct(mo, mc, key)
ct0 = encrypt_original(mo, key)
print("anamorphic ciphertext:\n", ct1.dm.real)
print("original ciphertext:\n", ct0.dm.real)

ct_dil, trace = encrypt_dilation(mo, mc, key)
print("dilation route agrees:", np.allclose(ct_dil.dm, ct1.dm), " kappa_max =", trace.kappa_max, " lambda =", trace.lam)

print("DOM ->\n", dom_decrypt(ct1, key).real)
print("DCM ->\n", dcm_exact(ct1, key).real)

rep = indistinguishability_report(ct0, ct1, eta)
print(f"trace distance {rep.trace_distance:.4f}  fidelity {rep.fidelity:.4f}")
ent = entropy_report(mo, mc, eta)
print(f"S(M_f0) = {ent.S_mf0:.3f}  S(M_f1) = {ent.S_mf1_commuting:.3f}  relative entropy {ent.rel_entropy:.3f} <= {ent.rel_entropy_bound:.3f}")

plan = plan_shots(1, 0.25, 0.1)
res = dcm_finite(ct1, key, plan, np.random.default_rng(0))
print(f"{plan.n_shots} shots: block error {res.b_error_l2:.3f}; covert estimate\n", res.mc_hat.real)
