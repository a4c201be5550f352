"""Command-line front end.

    nilmoment soliton FILE
    nilmoment detect FILE
    nilmoment flow FILE
    nilmoment adjoint rep PARTITION | classify FILE | verify FILE | partitions N | detect FILE BASISFILE

Global flags (accepted before or after the subcommand): ``--tol``, ``--seed``,
``--max-steps``, ``--out PATH`` (write the JSON report), ``--timing``.
Exit status: 0 when every check passes, 1 when a check fails, 2 on bad input.
"""
import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from . import adjoint, detection, flow, io, kernels
from .errors import NilmomentError, NotAnIdealSum, ParseError
from .lie_core import JACOBI_TOL, BracketTensor, check_lie, jacobi_residual, nilpotency_class
from .moment import moment_bracket
from .report import Report, num, residual

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

CRITICALITY_TOL = 1e-6
FLOW_MATCH_TOL = 1e-6
IDENTITY_TOL = 1e-10
DEFAULT_SAMPLES = 100


def _flow_config(args, scenario=None):
    overrides = dict(scenario.flow_overrides) if scenario else {}
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    return flow.FlowConfig(**overrides)


def _rounded_records(mu):
    return [{**r, "c": num(r["c"])} for r in io.bracket_records(mu)]


def _matrix_value(x):
    return [[num(v, floor=1e-13) for v in row] for row in x]


def _flow_results(rep, fr, config, prefix=""):
    rep.info(f"{prefix}steps", fr.steps_taken)
    rep.info(f"{prefix}status", fr.status)
    rep.check(f"{prefix}grad_norm", fr.final_grad_norm <= config.grad_tol,
              residual(fr.final_grad_norm, config.grad_tol), config.grad_tol)
    rep.info(f"{prefix}moment_norm_sq", num(fr.final_moment_norm_sq), CRITICALITY_TOL)
    rep.check(f"{prefix}criticality_residual", fr.criticality_residual <= CRITICALITY_TOL,
              residual(fr.criticality_residual, CRITICALITY_TOL), CRITICALITY_TOL)


# -- soliton -------------------------------------------------------------------------

def _validate_bracket(mu):
    check_lie(mu)
    return nilpotency_class(mu)


def cmd_soliton(args):
    scenario = io.load_scenario(args.file)
    mu = scenario.bracket
    rep = Report("soliton", {"file": Path(args.file).name, "dim": mu.dim})
    step = _validate_bracket(mu)
    jac = 0.0 if mu.is_zero() else jacobi_residual(mu.normalized())
    rep.check("jacobi_residual", True, residual(jac, JACOBI_TOL), JACOBI_TOL)
    rep.info("nilpotency_class", step)
    config = _flow_config(args, scenario)
    verdict = flow.soliton_verdict(mu, config)
    rep.check("verdict", verdict.kind is flow.SolitonKind.EINSTEIN_NILRADICAL, verdict.kind.value)
    if verdict.flow is None:
        rep.info("minimal", True, detail="zero bracket: m = 0 is the absolute minimum")
        rep.info("c", 0.0, 10 * config.grad_tol)
        rep.info("moment_norm_sq", 0.0)
        rep.info("steps", 0)
    else:
        fr = verdict.flow
        rep.info("minimal", fr.verdict is flow.Verdict.DISTINGUISHED_MINIMAL)
        rep.info("c", num(verdict.c), CRITICALITY_TOL, detail="at the input bracket's norm")
        rep.info("c_unit", num(fr.critical_constant), CRITICALITY_TOL, detail="at the unit-norm limit")
        _flow_results(rep, fr, config)
    if verdict.soliton_point is not None:
        rep.info("soliton_bracket", _rounded_records(verdict.soliton_point))
    return rep


# -- detect --------------------------------------------------------------------------

def _detect_derivations(rep, scenario, tol, rng, samples, config):
    mu = scenario.bracket
    blocks = detection.common_blocks(scenario.derivations)
    rep.info("blocks", {"eigenvalues": [num(e) if isinstance(e, float) else [num(x) for x in e]
                                        for e in blocks.eigenvalues],
                        "block_sizes": list(blocks.block_sizes)})
    member = True
    for q, d in enumerate(scenario.derivations):
        ratio = np.linalg.norm(kernels.act_coeffs(d, mu.coeffs))
        scale = np.linalg.norm(d) * mu.norm()
        ok = detection.in_W(mu, d, tol)
        rep.check(f"in_W[{q}]", ok, residual(ratio / scale if scale else 0.0, tol), tol)
        member = member and ok
    downstream = ["graded_bracket_check", "check_detection", "tangent_intersection_rank",
                  "sampled_detection", "restricted_flow"]
    if not member:
        for name in downstream:
            rep.skip(name, "bracket is not in W: some matrix is not a derivation")
        return
    rep.check("graded_bracket_check", detection.graded_bracket_check(mu, blocks, tol), tol=tol)
    m = moment_bracket(mu)
    mn = np.linalg.norm(m)
    off = detection.off_block_max(m, blocks) / mn if mn else 0.0
    rep.check("check_detection", off <= tol, residual(off, tol), tol)
    g_dim, h_dim = detection.tangent_intersection_rank(mu, blocks, tol)
    rep.check("tangent_intersection_rank", g_dim == h_dim, [g_dim, h_dim], detection.RANK_RTOL)
    lams = detection.sample_W(scenario.derivations, samples, rng)
    good = sum(detection.check_detection(l, blocks, tol) and detection.graded_bracket_check(l, blocks, tol)
               for l in lams)
    rep.check("sampled_detection", good == len(lams), f"{good}/{len(lams)}", tol,
              detail="random brackets in W")
    if mu.is_zero():
        rep.skip("restricted_flow", "zero bracket: nothing to flow")
        return
    full = flow.run_flow(mu, config)
    restricted = flow.run_flow_restricted(mu, blocks.symmetric_generators(), config)
    gap = abs(full.final_moment_norm_sq - restricted.final_moment_norm_sq)
    same = full.verdict is restricted.verdict and full.verdict is not flow.Verdict.NOT_CONVERGED
    rep.check("restricted_flow", gap <= FLOW_MATCH_TOL and same,
              {"full": num(full.final_moment_norm_sq), "restricted": num(restricted.final_moment_norm_sq),
               "verdict": full.verdict.value, "restricted_verdict": restricted.verdict.value},
              FLOW_MATCH_TOL)


def _factor_verdict(mu, config):
    try:
        _validate_bracket(mu)
    except NilmomentError as exc:
        return "Invalid", str(exc)
    return flow.soliton_verdict(mu, config).kind.value, None


def _detect_split(rep, scenario, tol, rng, samples, config):
    mu = scenario.bracket
    split = scenario.split
    try:
        first, second = detection.split_direct_sum(mu, split, tol)
    except NotAnIdealSum as exc:
        rep.check("split_direct_sum", False, residual(exc.norm, tol), tol, detail=exc.component)
        for name in ("check_sum_detection", "sum_tangent_intersection_rank", "sampled_sum_detection",
                     "factor_verdicts"):
            rep.skip(name, "the split is not a sum of ideals")
        return
    rep.check("split_direct_sum", True, [split.dim_1, split.dim_2], tol)
    rep.check("check_sum_detection", detection.check_sum_detection(mu, split, tol), tol=tol)
    g_dim, h_dim = detection.tangent_intersection_rank(mu, split, tol)
    rep.check("sum_tangent_intersection_rank", g_dim == h_dim, [g_dim, h_dim], detection.RANK_RTOL)
    basis = np.stack([b.coeffs for b in detection.sum_w_basis(split)])
    good = 0
    for _ in range(samples):
        lam = BracketTensor(np.tensordot(rng.standard_normal(len(basis)), basis, axes=1))
        good += detection.check_sum_detection(lam, split, tol)
    rep.check("sampled_sum_detection", good == samples, f"{good}/{samples}", tol,
              detail="random sums of brackets on the summands")
    whole, _ = _factor_verdict(mu, config)
    v1, e1 = _factor_verdict(first, config)
    v2, e2 = _factor_verdict(second, config)
    en = flow.SolitonKind.EINSTEIN_NILRADICAL.value
    rep.check("factor_verdicts", whole == en and v1 == en and v2 == en,
              {"sum": whole, "first": v1, "second": v2}, detail=e1 or e2)


def cmd_detect(args):
    scenario = io.load_scenario(args.file)
    if not scenario.derivations and scenario.split is None:
        raise ParseError("scenario needs 'derivations' or 'split' for detection", Path(args.file).name)
    mu = scenario.bracket
    tol = args.tol if args.tol is not None else detection.CHECK_TOL
    rep = Report("detect", {"file": Path(args.file).name, "dim": mu.dim, "seed": args.seed,
                            "samples": args.samples})
    rng = np.random.default_rng(args.seed)
    config = _flow_config(args, scenario)
    if scenario.derivations:
        _detect_derivations(rep, scenario, tol, rng, args.samples, config)
    if scenario.split is not None:
        _detect_split(rep, scenario, tol, rng, args.samples, config)
    return rep


# -- flow ----------------------------------------------------------------------------

def cmd_flow(args):
    scenario = io.load_scenario(args.file)
    mu = scenario.bracket
    config = _flow_config(args, scenario)
    if args.sample_every is not None:
        config = dataclasses.replace(config, sample_every=args.sample_every)
    rep = Report("flow", {"file": Path(args.file).name, "dim": mu.dim})
    fr = flow.run_flow(mu, config)
    rep.check("verdict", fr.verdict is not flow.Verdict.NOT_CONVERGED, fr.verdict.value)
    rep.info("c_unit", num(fr.critical_constant), CRITICALITY_TOL)
    _flow_results(rep, fr, config)
    rep.info("trajectory", [[s, num(f), residual(g, config.grad_tol)] for s, f, g in fr.trajectory_samples],
             detail="rows: step, |m|^2, |grad|")
    rep.info("final_bracket", _rounded_records(fr.final_point))
    return rep


# -- adjoint -------------------------------------------------------------------------

def _parse_partition(text):
    try:
        return adjoint.Partition.parse(text)
    except ValueError as exc:
        raise ParseError(str(exc), f"partition {text!r}") from None


def cmd_adjoint_rep(args):
    p = _parse_partition(args.partition)
    x = adjoint.jordan_rep(p)
    rep = Report("adjoint rep", {"partition": str(p)})
    m = adjoint.adjoint_moment(x)
    err = float(np.max(np.abs(m @ x - x @ m - x))) if x.size else 0.0
    rep.info("matrix", _matrix_value(x))
    rep.info("lambda", [[num(v) for v in np.diag(adjoint.jordan_block(k), 1)] for k in p.parts])
    rep.check("bracket_identity", err <= IDENTITY_TOL, residual(err, IDENTITY_TOL), IDENTITY_TOL,
              detail="max |[m(X), X] - X|")
    c = adjoint.verify_adjoint_distinguished(x)
    c_ok = c is not None and (not x.any() or abs(c - 1.0) <= IDENTITY_TOL)
    rep.check("c", c_ok, num(c, floor=1e-14) if c is not None else "ABSENT", IDENTITY_TOL)
    return rep


def cmd_adjoint_classify(args):
    x = io.load_matrix(args.file)
    tol = args.tol if args.tol is not None else adjoint.RANK_TOL
    rep = Report("adjoint classify", {"file": Path(args.file).name, "dim": x.shape[0]})
    p = adjoint.classify_nilpotent_orbit(x, tol)
    rep.info("rank_sequence", adjoint.power_ranks(x, tol), tol)
    rep.check("partition", True, str(p), tol)
    return rep


def cmd_adjoint_verify(args):
    x = io.load_matrix(args.file)
    tol = args.tol if args.tol is not None else adjoint.DISTINGUISHED_TOL
    rep = Report("adjoint verify", {"file": Path(args.file).name, "dim": x.shape[0]})
    c = adjoint.verify_adjoint_distinguished(x, tol)
    rep.check("c", c is not None, num(c) if c is not None else "ABSENT", tol)
    return rep


def cmd_adjoint_partitions(args):
    if args.n < 1:
        raise ParseError("n must be positive", "partitions")
    parts = adjoint.enumerate_partitions(args.n)
    rep = Report("adjoint partitions", {"n": args.n})
    rep.info("count", len(parts))
    rep.info("partitions", [str(p) for p in parts])
    rep.lines = [str(p) for p in parts]
    return rep


def cmd_adjoint_detect(args):
    x = io.load_matrix(args.file)
    basis = io.load_basis(args.basis)
    if basis[0].shape != x.shape:
        raise ParseError(f"basis matrices are {basis[0].shape}, matrix is {x.shape}", Path(args.basis).name)
    tol = args.tol if args.tol is not None else adjoint.SPAN_TOL
    rep = Report("adjoint detect", {"file": Path(args.file).name, "basis": Path(args.basis).name,
                                    "basis_size": len(basis)})
    try:
        ok = adjoint.subalgebra_detection_check(x, basis, tol)
    except ValueError as exc:
        raise ParseError(str(exc), Path(args.file).name) from None
    rep.check("moment_in_subalgebra", ok, tol=tol)
    return rep


# -- entry point ---------------------------------------------------------------------

def _global_flags(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--tol", type=float, default=d(None), help="tolerance for the checks")
    parser.add_argument("--seed", type=int, default=d(0), help="seed for sampled checks (default 0)")
    parser.add_argument("--max-steps", type=int, default=d(None), help="flow step budget")
    parser.add_argument("--out", default=d(None), help="write the JSON report here")
    parser.add_argument("--timing", action="store_true", default=d(False),
                        help="include wall-clock time in the report")


def build_parser():
    parser = argparse.ArgumentParser(prog="nilmoment", description=__doc__.split("\n\n")[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("soliton", parents=[common], help="flow a nilpotent bracket to a soliton")
    p.add_argument("file")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("detect", parents=[common], help="detection checks for a scenario")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="random brackets per sampled check")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("flow", parents=[common], help="raw gradient flow with trajectory dump")
    p.add_argument("file")
    p.add_argument("--sample-every", type=int, default=None, help="trajectory sampling stride")
    p.set_defaults(func=cmd_flow)

    adj = sub.add_parser("adjoint", help="nilpotent matrices under conjugation")
    asub = adj.add_subparsers(dest="adjoint_command", required=True)
    q = asub.add_parser("rep", parents=[common], help="representative of a partition, e.g. 3,1")
    q.add_argument("partition")
    q.set_defaults(func=cmd_adjoint_rep)
    q = asub.add_parser("classify", parents=[common], help="partition of a nilpotent matrix")
    q.add_argument("file")
    q.set_defaults(func=cmd_adjoint_classify)
    q = asub.add_parser("verify", parents=[common], help="c with [m(X), X] = c X, or ABSENT")
    q.add_argument("file")
    q.set_defaults(func=cmd_adjoint_verify)
    q = asub.add_parser("partitions", parents=[common], help="list the partitions of n")
    q.add_argument("n", type=int)
    q.set_defaults(func=cmd_adjoint_partitions)
    q = asub.add_parser("detect", parents=[common], help="moment of X stays in a subalgebra")
    q.add_argument("file")
    q.add_argument("basis")
    q.set_defaults(func=cmd_adjoint_detect)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        rep = args.func(args)
    except NilmomentError as exc:
        where = getattr(args, "file", None)
        if isinstance(exc, ParseError) or where is None:
            print(f"error: {exc}", file=sys.stderr)
        else:
            print(f"error: {Path(where).name}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.timing:
        rep.timing = {"seconds": round(time.perf_counter() - start, 6)}
    print("\n".join(rep.text_lines()))
    if args.out:
        Path(args.out).write_text(rep.to_json())
    return EXIT_OK if rep.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
