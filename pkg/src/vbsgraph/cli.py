"""``vbs`` command line: JSON on stdout, diagnostics on stderr.

Exit codes: 0 ok, 1 other error, 2 graph/argument parse error, 3 spin override
violates the uniqueness condition, 4 dimension guard, 5 block is the whole
graph, 6 theorem check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from fractions import Fraction

import numpy as np

from . import __version__
from .closed_form import ChainSpec, basic_chain_eigenvalues, lambda_ls, verify_chain_spectrum
from .coherent import mc_partition
from .density import degeneracy_formula, nullity, single_vertex_report, verify_theorem
from .errors import (
    BlockIsWholeGraphError,
    DimensionGuardError,
    GraphError,
    UniquenessViolatedError,
    VBSError,
)
from .graph import check_uniqueness, cut_graph, infer_spins, parse_graph
from .hamiltonian import block_hamiltonian, full_indexer, parse_coefficients
from .pipeline import analyze_block, block_report, chain_labels
from .policy import NumericPolicy
from .vbs import vbs_schwinger

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_UNIQUENESS, EXIT_DIM, EXIT_WHOLE, EXIT_THEOREM = range(7)

# test hook: callable(StateVector) -> StateVector applied before `verify` runs
STATE_HOOK = None


class _UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _fmt(x: float) -> float:
    return float(f"{x:.15g}")


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        g = parse_graph(text)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return g, hashlib.sha256(text.encode("utf-8")).hexdigest()


def _policy(args, tol_field: str = "zero_abs") -> NumericPolicy:
    kw = {}
    if getattr(args, "tol", None) is not None:
        kw[tol_field] = args.tol
    return NumericPolicy(**kw)


def _block(args, g):
    if args.block:
        return _ints(args.block)
    if g.default_block is not None:
        return list(g.default_block)
    raise _UsageError("no block given (use --block or a 'block' line in the graph file)")


def _coeffs(args):
    if getattr(args, "coeffs", None):
        with open(args.coeffs, encoding="utf-8") as fh:
            return parse_coefficients(fh.read())
    return None


def cmd_check(args):
    g, digest = _load(args.graph)
    s = infer_spins(g, apply_overrides=True)
    ok, residual = check_uniqueness(g, s)
    dim = full_indexer(g, s).total_dim
    results = {
        "vertices": list(g.vertices),
        "edges": [list(e) for e in g.edges],
        "twice_spins": {str(v): s[v] for v in g.vertices},
        "spins": {str(v): _frac(s.spin(v)) for v in g.vertices},
        "connected": g.is_connected,
        "unique": ok,
        "residual": residual.tolist(),
        "dim": dim,
        "overridden": s.overridden,
    }
    code = EXIT_OK if ok else EXIT_UNIQUENESS
    if not ok:
        print("spin override violates 2S = I.M; the ground state need not be unique", file=sys.stderr)
    return results, digest, NumericPolicy(), code


def cmd_spectrum(args):
    g, digest = _load(args.graph)
    policy = _policy(args)
    a = analyze_block(g, _block(args, g), policy, args.force)
    results = block_report(a, args.alpha, _coeffs(args), policy)
    if a.cut.n_block == 1:
        results["single_vertex"] = single_vertex_report(a.cut, a.spins, a.state, policy)
    return results, digest, policy, EXIT_OK


def cmd_verify(args):
    g, digest = _load(args.graph)
    policy = _policy(args, "residual_tol")
    s = infer_spins(g)
    cut = cut_graph(g, _block(args, g))
    state = vbs_schwinger(g, s, policy, args.force)
    if STATE_HOOK is not None:
        state = STATE_HOOK(state)
    rep = verify_theorem(cut, s, _coeffs(args), state, policy)
    results = rep.as_dict()
    results["block"] = list(cut.block)
    if not rep.verdict:
        print("theorem check failed: " + json.dumps({k: results[k] for k in (
            "residuals_ok", "support_in_ground_space", "formula_matches")}), file=sys.stderr)
    return results, digest, policy, EXIT_OK if rep.verdict else EXIT_THEOREM


def cmd_degeneracy(args):
    g, digest = _load(args.graph)
    policy = _policy(args)
    s = infer_spins(g)
    cut = cut_graph(g, _block(args, g))
    hb = block_hamiltonian(cut, s, _coeffs(args), policy, args.force)
    n0, _ = nullity(hb, policy)
    f = degeneracy_formula(cut)
    results = {"block": list(cut.block), "formula": f, "nullity": n0, "match": f == n0, "dim": hb.dim}
    return results, digest, policy, EXIT_OK


def cmd_partition(args):
    g, digest = _load(args.graph)
    s = infer_spins(g)
    est = mc_partition(g, s, args.samples, args.seed, threads=args.threads)
    results = {
        "mean": _fmt(est.mean),
        "standard_error": _fmt(est.standard_error),
        "samples": est.sample_count,
        "seed": est.seed,
    }
    if full_indexer(g, s).total_dim <= 10**6:
        exact = vbs_schwinger(g, s).norm ** 2
        results["exact"] = _fmt(exact)
        results["z_score"] = _fmt((est.mean - exact) / est.standard_error)
    return results, digest, NumericPolicy(), EXIT_OK


def cmd_closed_form(args):
    twice = args.spin
    nb = args.nb
    if twice % 2:
        raise _UsageError("homogeneous chains need an integer bulk spin (even --spin)")
    spin = twice // 2
    chain = ChainSpec.homogeneous(spin, nb)
    deg = chain.degeneracy
    results = {
        "twice_spin": twice,
        "n_block": nb,
        "deg": deg,
        "multiplets_twice_J": chain.multiplets(),
        "lambda": {str(l): _frac(lambda_ls(l, spin)) for l in range(spin + 1)},
        "decay": {str(l): _frac(lambda_ls(l, spin) ** (nb - 1)) for l in range(1, spin + 1)},
        "limit_eigenvalue": _frac(Fraction(1, deg)),
        "limit_entropy": _fmt(float(np.log(deg))),
    }
    if twice == 2:
        l0, l1 = basic_chain_eigenvalues(nb)
        results["Lambda0"] = _frac(l0)
        results["Lambda1"] = _frac(l1)
        results["Lambda0_float"] = _fmt(float(l0))
        results["Lambda1_float"] = _fmt(float(l1))
    if args.numeric:
        rep = verify_chain_spectrum(chain, chain_labels(chain))
        results["numeric"] = {
            "multiplets": {str(k): [_fmt(x) for x in v] for k, v in sorted(rep.multiplets.items())},
            "checks": rep.checks,
        }
    return results, hashlib.sha256(f"chain {twice} {nb}".encode()).hexdigest(), NumericPolicy(), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vbs", description="AKLT / VBS states on multigraphs")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--force", action="store_true", help="lift the Hilbert-space dimension guard")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_cmd(name, func, help_):
        sp_ = sub.add_parser(name, parents=[common], help=help_)
        sp_.add_argument("graph")
        sp_.set_defaults(func=func)
        return sp_

    graph_cmd("check", cmd_check, "spins, uniqueness condition and Hilbert dimension")
    s = graph_cmd("spectrum", cmd_spectrum, "reduced density matrix spectrum and entropies")
    s.add_argument("--block")
    s.add_argument("--alpha", type=_floats, default=[2.0])
    s.add_argument("--tol", type=float, help="absolute zero-eigenvalue threshold")
    s.add_argument("--coeffs")
    v = graph_cmd("verify", cmd_verify, "support-in-ground-space theorem check")
    v.add_argument("--block")
    v.add_argument("--tol", type=float, help="residual tolerance")
    v.add_argument("--coeffs")
    d = graph_cmd("degeneracy", cmd_degeneracy, "boundary formula vs numerical nullity of H_b")
    d.add_argument("--block")
    d.add_argument("--tol", type=float)
    d.add_argument("--coeffs")
    pt = graph_cmd("partition", cmd_partition, "Monte Carlo coherent-state estimate of <VBS|VBS>")
    pt.add_argument("--samples", type=int, default=100_000)
    pt.add_argument("--seed", type=int, default=0)

    cf = sub.add_parser("closed-form", parents=[common], help="closed-form chain results")
    cf.add_argument("family", choices=["chain"])
    cf.add_argument("--spin", type=int, required=True, help="twice the bulk spin")
    cf.add_argument("--nb", type=int, required=True)
    cf.add_argument("--numeric", action="store_true", help="also diagonalise the chain numerically")
    cf.set_defaults(func=cmd_closed_form)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        results, digest, policy, code = args.func(args)
    except BlockIsWholeGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WHOLE
    except (GraphError, _UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UniquenessViolatedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNIQUENESS
    except DimensionGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except VBSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = {
        "command": ["vbs"] + argv,
        "input_digest": digest,
        "policy": policy.as_dict(),
        "results": results,
        "timing": {"seconds": round(time.perf_counter() - t0, 6)},
    }
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
