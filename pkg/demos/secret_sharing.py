"""Split an anamorphic ciphertext and its key among three players.

Any two players rebuild both messages; a pair holding only the original key
components recovers the original message and nothing else.
"""
import numpy as np

from anamorph.errors import CovertUnavailable
from anamorph.qass import EtaDomain, cheat_simulate, qass_reconstruct, qass_share, reconstruct_covert, reconstruct_original, share_size_report, withhold_covert
from anamorph.scheme import SecurityConfig
from anamorph.metrics import trace_distance
from anamorph.states import basis_state, maximally_mixed

rng = np.random.default_rng(1)
domain = EtaDomain((4, 8, 16, 32))
mo, mc = maximally_mixed(2), basis_state(0, 2)
sh = qass_share(mo, mc, domain, SecurityConfig(1), rng)
print("eta", sh.key.eta, " code dimension q =", sh.enc.q)

for pair in ((0, 1), (0, 2), (1, 2)):
    r = qass_reconstruct([sh.bundles[i] for i in pair], sh.enc, domain)
    print(f"players {pair[0] + 1},{pair[1] + 1}: original error {trace_distance(r.mo_rec, mo):.1e}, covert error {trace_distance(r.mc_rec, mc):.1e}")

print("one register alone is maximally mixed:", np.allclose(sh.enc.register_state(1), np.eye(sh.enc.q) / sh.enc.q))

partial = [withhold_covert(b) for b in sh.bundles[:2]]
print("original from original-only shares:", np.allclose(reconstruct_original(partial, sh.enc), mo))
try:
    reconstruct_covert(partial, sh.enc, domain)
except CovertUnavailable as exc:
    print("covert refused:", exc)

size = share_size_report(1, 1, 2**16, 4)
print("share size", size.anamorphic_bits, "bits; extra over original-only:", size.difference)
cheat = cheat_simulate(1, 1, 4, 10_000, rng)
print(f"cheating success {cheat.empirical_success:.4f} (formula {cheat.formula})")
