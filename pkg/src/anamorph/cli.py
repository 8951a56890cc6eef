"""``anamorph`` command line.

Each subcommand reads and writes JSON state files and prints one RunReport
JSON document on stdout.  Exit codes: 0 success, 2 bad input or schema, 3
infeasible parameters, 4 failed reconstruction or self-check.  Errors go to
stderr as ``error: <Code>: <message>``.
"""
import argparse
import hashlib
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import metrics, qass, scheme, tomography
from .errors import AnamorphError, CheckFailed, ConditionError, InputError, ReconstructionError
from .linalg import check_density, require_density
from .qops import control_blocks, pad_embed, permute_conjugate, qotp_encrypt
from .rng import resolve_seed, substream
from .serialize import (
    bundle_to_json,
    ciphertext_to_json,
    dumps,
    encoded_to_json,
    key_to_json,
    matrix_to_json,
    plan_to_json,
    read_json,
    write_json,
)
from .states import basis_state, maximally_mixed


class Run:
    """Collects input/output digests and metrics for the RunReport."""

    def __init__(self, command):
        self.command = command
        self.inputs = {}
        self.outputs = {}
        self.metrics = {}
        self.start = time.perf_counter()

    def read(self, path, kind):
        self.inputs[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest() if Path(path).exists() else None
        return read_json(path, kind)

    def write(self, path, obj):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        data = write_json(path, obj)
        self.outputs[str(path)] = hashlib.sha256(data).hexdigest()

    def report(self):
        return {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "metrics": self.metrics,
            "wall_time_ms": int(round((time.perf_counter() - self.start) * 1000)),
        }


def _qubits(m):
    return int(round(math.log2(m.shape[0])))


def _state(run, path, name):
    return require_density(run.read(path, "matrix"), name)


def _ciphertext(run, path):
    ct = run.read(path, "ciphertext")
    rep = check_density(ct.dm)
    if not rep.ok:
        detail = ", ".join(f"{k}={v:.3e}" for k, v in rep.violations)
        raise InputError(f"ciphertext is not a density matrix ({detail})")
    return ct


def _cfg(args):
    return scheme.SecurityConfig(args.security_bits)


def _max_dev(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# ---------------------------------------------------------------- commands


def cmd_encrypt(args, run):
    mo = _state(run, args.original, "original message")
    mc = _state(run, args.covert, "covert message")
    rng = substream(args.seed, "keygen")
    key = scheme.keygen(_qubits(mo), _qubits(mc), _cfg(args), args.eta_mode, mo, mc, rng)
    ct = scheme.encrypt_direct(mo, mc, key)
    if args.dilation:
        ct_dil, trace = scheme.encrypt_dilation(mo, mc, key)
        run.metrics["dilation_max_deviation"] = _max_dev(ct.dm, ct_dil.dm)
        run.metrics["kappa"] = trace.kappa
        ct = ct_dil
    rep = check_density(ct.dm)
    if not rep.ok:
        raise CheckFailed(f"ciphertext failed density checks: {rep.violations}")
    run.write(args.out, ciphertext_to_json(ct))
    run.write(args.key_out, key_to_json(key))
    run.metrics.update(d1=key.d1, d2=key.d2, eta=key.eta)


def cmd_encrypt_original(args, run):
    mo = _state(run, args.original, "original message")
    key = run.read(args.key, "key")
    ct = scheme.encrypt_original(mo, key)
    run.write(args.out, ciphertext_to_json(ct))
    run.metrics.update(d1=key.d1, eta=key.eta)


def cmd_dom(args, run):
    ct = _ciphertext(run, args.ct)
    key = run.read(args.key, "key")
    mo = scheme.dom_decrypt(ct, key)
    run.write(args.out, matrix_to_json(mo))
    run.metrics["trace"] = float(np.trace(mo).real)


def cmd_dcm(args, run):
    ct = _ciphertext(run, args.ct)
    key = run.read(args.key, "key")
    if args.mode == "exact":
        mc = scheme.dcm_exact(ct, key)
        run.write(args.out, matrix_to_json(mc))
        return
    plan = tomography.plan_shots(key.d1, args.eps, args.delta, args.design)
    errors, first = [], None
    for t in range(args.trials):
        res = tomography.dcm_finite(ct, key, plan, substream(args.seed, "dcm", t))
        errors.append(res.b_error_l2)
        if first is None:
            first = res
    run.write(args.out, matrix_to_json(first.mc_hat))
    if args.plan_out:
        run.write(args.plan_out, plan_to_json(plan))
    fail = sum(e > args.eps for e in errors) / len(errors)
    run.metrics.update(
        n_shots=plan.n_shots,
        trials=args.trials,
        failure_fraction=fail,
        mean_b_error_l2=float(np.mean(errors)),
        b_error_trace_bound=first.b_error_trace_bound,
    )


def cmd_eoc(args, run):
    ct = _ciphertext(run, args.ct)
    key = run.read(args.key, "key")
    run.write(args.out, ciphertext_to_json(scheme.eoc_extract(ct, key)))


def cmd_analyze(args, run):
    ct0 = _ciphertext(run, args.ct0)
    ct1 = _ciphertext(run, args.ct1)
    rep = metrics.indistinguishability_report(ct0, ct1, args.eta)
    run.metrics.update(
        trace_distance=rep.trace_distance,
        fidelity=rep.fidelity,
        eta=rep.eta,
        fvdg_lower=rep.fvdg_lower,
        fvdg_upper=rep.fvdg_upper,
        helstrom_advantage=rep.helstrom_advantage,
        entropy_ct0=metrics.von_neumann_entropy(ct0.dm),
        entropy_ct1=metrics.von_neumann_entropy(ct1.dm),
    )
    if args.key:
        key = run.read(args.key, "key")
        md = permute_conjugate(ct1.dm, key.perm, inverse=True)
        a, b, _, _ = control_blocks(md)
        ent = metrics.entropy_report(2 * a, args.eta * 0.5 * (b + b.conj().T), args.eta)
        run.metrics["entropy"] = _entropy_dict(ent)


def _entropy_dict(ent):
    return {
        "S_mf0": ent.S_mf0,
        "S_mo_enc": ent.S_mo_enc,
        "S_mf1_commuting": ent.S_mf1_commuting,
        "rel_entropy": ent.rel_entropy,
        "rel_entropy_bound": ent.rel_entropy_bound,
    }


def cmd_entropy(args, run):
    mo = _state(run, args.original, "original message")
    mc = _state(run, args.covert, "covert message")
    if args.key:
        key = run.read(args.key, "key")
        mo, mc = qotp_encrypt(mo, key.k), qotp_encrypt(mc, key.k_prime)
    ent = metrics.entropy_report(mo, pad_embed(mc, _qubits(mo)), args.eta)
    run.metrics.update(_entropy_dict(ent))


def cmd_twirl_check(args, run):
    if args.matrix:
        phi = run.read(args.matrix, "matrix")
    else:
        phi = metrics.key_averaged_block_state(args.d1, args.d2 if args.d2 is not None else args.d1, args.eta)
    rep = metrics.twirl_expectation(phi, brute_force=args.brute_force)
    run.metrics.update(n=rep.n, alpha=_real(rep.alpha), beta=_real(rep.beta), T=_real(rep.T), S=_real(rep.S))
    if rep.brute_force_state is not None:
        dev = float(np.linalg.norm(rep.formula_state - rep.brute_force_state))
        run.metrics["brute_force_deviation"] = dev
        if dev > 1e-12:
            raise CheckFailed(f"twirl formula deviates from enumeration by {dev:.3e}")
    e0, e1 = metrics.expected_states(args.d1, args.d2 if args.d2 is not None else args.d1, args.eta)
    run.metrics["expected_state_distance"] = metrics.trace_distance(e0, e1)
    run.metrics["expected_state_distance_formula"] = metrics.expected_state_distance(args.d1, args.eta)
    if args.out:
        run.write(args.out, matrix_to_json(rep.formula_state))


def _real(z):
    return float(z.real) if isinstance(z, complex) else float(z)


def cmd_qcpa_check(args, run):
    if args.original and args.covert:
        pairs = [(_state(run, args.original, "original message"), _state(run, args.covert, "covert message"))]
    else:
        pairs = []
    d1, d2 = args.d1, args.d2
    pairs += [
        (maximally_mixed(2**d1), basis_state(0, 2**d2)),
        (maximally_mixed(2**d1), uniform_superposition(d2)),
    ]
    mode = "exact" if d1 == 1 and d2 == 1 else "monte_carlo"
    reps = [
        metrics.qcpa_average(mo, mc, d1, d2, args.eta, mode, args.samples, substream(args.seed, "qcpa", i))
        for i, (mo, mc) in enumerate(pairs)
    ]
    inter = max(metrics.trace_distance(reps[0].avg_state, r.avg_state) for r in reps[1:])
    run.metrics.update(
        mode=mode,
        n_terms=reps[0].n_terms,
        distance_to_formula=max(r.distance for r in reps),
        inter_average_distance=inter,
    )
    if mode == "exact" and (inter > 1e-12 or run.metrics["distance_to_formula"] > 1e-12):
        raise CheckFailed("coin-averaged encryption is not constant")
    if args.out:
        run.write(args.out, matrix_to_json(reps[0].xi_formula))


def uniform_superposition(d2):
    v = np.ones(2**d2) / math.sqrt(2**d2)
    return np.outer(v, v.conj()).astype(np.complex128)


def _domain(args):
    return qass.EtaDomain(tuple(int(v) for v in args.eta_domain.split(",")))


def cmd_share(args, run):
    mo = _state(run, args.original, "original message")
    mc = _state(run, args.covert, "covert message")
    domain = _domain(args)
    sh = qass.qass_share(mo, mc, domain, _cfg(args), substream(args.seed, "share"), args.eta_mode)
    out = Path(args.out_dir)
    for b in sh.bundles:
        run.write(out / f"bundle_{b.player}.json", bundle_to_json(b))
    run.write(out / "encoded.json", encoded_to_json(sh.enc, domain))
    run.write(out / "dictator_view.json", ciphertext_to_json(sh.dictator_view))
    run.metrics.update(q=sh.enc.q, global_dim=int(sh.enc.global_state.shape[0]), eta=sh.key.eta)


def cmd_reconstruct(args, run):
    pair = qass.validate_pair(args.players.split(","))
    src = Path(args.dir)
    bundles = [run.read(src / f"bundle_{p}.json", "bundle") for p in pair]
    enc, domain = run.read(src / "encoded.json", "encoded")
    if args.original_only:
        bundles = [qass.withhold_covert(b) for b in bundles]
    mo = qass.reconstruct_original(bundles, enc)
    run.write(args.out_original, matrix_to_json(mo))
    if not args.original_only:
        mc = qass.reconstruct_covert(bundles, enc, domain)
        run.write(args.out_covert, matrix_to_json(mc))
    run.metrics["players"] = list(pair)


def cmd_cheat_sim(args, run):
    rep = qass.cheat_simulate(args.d1, args.d2, args.eta_domain_size, args.trials, substream(args.seed, "cheat"))
    run.metrics.update(empirical_success=rep.empirical_success, formula=rep.formula, trials=rep.trials, sigma=rep.sigma)
    if abs(rep.empirical_success - rep.formula) > 3 * rep.sigma + 1e-12:
        raise CheckFailed("empirical cheating rate is outside 3 sigma of the formula")


def cmd_tpds(args, run):
    mo = _state(run, args.original, "original message")
    mc = _state(run, args.covert, "covert message")
    key = scheme.keygen(_qubits(mo), _qubits(mc), _cfg(args), args.eta_mode, mo, mc, substream(args.seed, "keygen"))
    out = scheme.tpds(mo, mc, key)
    d = Path(args.out_dir)
    run.write(d / "anamorphic.json", ciphertext_to_json(out.anamorphic))
    run.write(d / "original.json", ciphertext_to_json(out.original))
    run.write(d / "dictator_view.json", matrix_to_json(out.dictator_from_anamorphic))
    run.write(d / "key.json", key_to_json(key))
    run.metrics.update(
        dictator_views_identical=out.dictator_views_identical,
        original_error=_max_dev(out.dictator_from_anamorphic, mo),
        covert_error=_max_dev(out.receiver_covert, mc),
    )
    if not out.dictator_views_identical:
        raise CheckFailed("dictator decryptions of the two ciphertexts differ")


# ---------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: $ANAMORPH_SEED or 0)")
    common.add_argument("--security-bits", type=int, default=1)
    common.add_argument("--eta-mode", choices=["weak", "strict"], default="weak")

    p = argparse.ArgumentParser(prog="anamorph", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("encrypt", cmd_encrypt, "anamorphic ciphertext and fresh key")
    sp.add_argument("--original", required=True)
    sp.add_argument("--covert", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--key-out", required=True)
    sp.add_argument("--dilation", action="store_true", help="build through the purification and dilation")

    sp = add("encrypt-original", cmd_encrypt_original, "original-only ciphertext under an existing key")
    sp.add_argument("--original", required=True)
    sp.add_argument("--key", required=True)
    sp.add_argument("--out", required=True)

    for name, func, help_ in (("dom", cmd_dom, "decrypt the original message"), ("eoc", cmd_eoc, "extract the original ciphertext")):
        sp = add(name, func, help_)
        sp.add_argument("--ct", required=True)
        sp.add_argument("--key", required=True)
        sp.add_argument("--out", required=True)

    sp = add("dcm", cmd_dcm, "decrypt the covert message")
    sp.add_argument("--ct", required=True)
    sp.add_argument("--key", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    sp.add_argument("--eps", type=float, default=0.25)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--design", choices=["frames", "singleton"], default="frames")
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--plan-out")

    sp = add("analyze", cmd_analyze, "distance, fidelity and entropies of a ciphertext pair")
    sp.add_argument("--ct0", required=True)
    sp.add_argument("--ct1", required=True)
    sp.add_argument("--eta", type=int, required=True)
    sp.add_argument("--key")

    sp = add("entropy", cmd_entropy, "entropy report for a message pair")
    sp.add_argument("--original", required=True)
    sp.add_argument("--covert", required=True)
    sp.add_argument("--eta", type=int, required=True)
    sp.add_argument("--key")

    sp = add("twirl-check", cmd_twirl_check, "permutation twirl: formula against enumeration")
    sp.add_argument("--d1", type=int, default=1)
    sp.add_argument("--d2", type=int)
    sp.add_argument("--eta", type=int, default=4)
    sp.add_argument("--matrix")
    sp.add_argument("--brute-force", action="store_true")
    sp.add_argument("--out")

    sp = add("qcpa-check", cmd_qcpa_check, "coin-averaged encryption is a constant channel")
    sp.add_argument("--d1", type=int, default=1)
    sp.add_argument("--d2", type=int, default=1)
    sp.add_argument("--eta", type=int, default=4)
    sp.add_argument("--original")
    sp.add_argument("--covert")
    sp.add_argument("--samples", type=int, default=20000)
    sp.add_argument("--out")

    sp = add("share", cmd_share, "secret-share an anamorphic ciphertext and its key")
    sp.add_argument("--original", required=True)
    sp.add_argument("--covert", required=True)
    sp.add_argument("--eta-domain", default="4,8,16,32")
    sp.add_argument("--out-dir", required=True)

    sp = add("reconstruct", cmd_reconstruct, "rebuild messages from two players' shares")
    sp.add_argument("--dir", required=True)
    sp.add_argument("--players", required=True, help="two player indices, e.g. 1,3")
    sp.add_argument("--original-only", action="store_true")
    sp.add_argument("--out-original", required=True)
    sp.add_argument("--out-covert")

    sp = add("cheat-sim", cmd_cheat_sim, "partial-cheating simulation")
    sp.add_argument("--d1", type=int, default=1)
    sp.add_argument("--d2", type=int, default=1)
    sp.add_argument("--eta-domain-size", type=int, default=4)
    sp.add_argument("--trials", type=int, default=10000)

    sp = add("tpds", cmd_tpds, "transmission under a supervising party")
    sp.add_argument("--original", required=True)
    sp.add_argument("--covert", required=True)
    sp.add_argument("--out-dir", required=True)
    return p


EXIT_CODES = ((InputError, 2), (ConditionError, 3), (ReconstructionError, 4), (AnamorphError, 4))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed = resolve_seed(args.seed)
    if getattr(args, "command", None) == "reconstruct" and not args.original_only and not args.out_covert:
        parser.error("reconstruct needs --out-covert unless --original-only is given")
    run = Run(args.command)
    try:
        args.func(args, run)
    except AnamorphError as exc:
        code = next(c for cls, c in EXIT_CODES if isinstance(exc, cls))
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    sys.stdout.write(dumps(run.report()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
