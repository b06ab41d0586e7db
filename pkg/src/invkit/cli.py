"""Command line front end: ``invkit {check,compute,plot,verify,mrpi}``.

Exit codes: 0 success / set exists, 1 malformed input, 2 no invariant set
exists, 3 existence undecided, 4 empty set, 5 iteration cap, 6 dimension not
supported by ``plot``, 7 verification failed.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from invkit import __version__
from invkit.exceptions import EmptySetError, InvkitError, IterationCapExceeded, RowCapExceeded, VertexBudgetExceeded
from invkit.geometry import EPS_RED, EPS_SUB, is_subset, same_set
from invkit.io import (
    ProblemFormatError,
    dumps,
    hpolytope_from_dict,
    hpolytope_to_dict,
    input_hash,
    load_json,
    parse_problem,
    write_text,
)
from invkit.marpi import EPS_ADD, MAX_PASSES, ROW_CAP, Termination, brute_force_intersection, marpi_compute
from invkit.mrpi import ITERATION_CAP, MRPI_TOL, VERTEX_CAP, Existence, existence_check, initial_iterate, mrpi_hull_step
from invkit.system import build_closed_loop, build_output_base, check_schur_stability, with_base_set
from invkit.verify import certify_invariance, sample_trajectories

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_NO = 2
EXIT_UNDECIDED = 3
EXIT_EMPTY = 4
EXIT_ITERATION_CAP = 5
EXIT_DIMENSION = 6
EXIT_VERIFY_FAILED = 7

_EXISTENCE_EXIT = {Existence.YES: EXIT_OK, Existence.NO: EXIT_NO, Existence.UNDECIDED: EXIT_UNDECIDED}
_TERMINATION_EXIT = {
    Termination.CONVERGED: EXIT_OK,
    Termination.EMPTY_SET: EXIT_EMPTY,
    Termination.ITERATION_CAP: EXIT_ITERATION_CAP,
}


def load_problem(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFormatError(str(exc)) from None
    problem = parse_problem(text)
    try:
        system = problem.to_system()
    except (InvkitError, ValueError) as exc:
        raise ProblemFormatError(str(exc)) from None
    clm = build_closed_loop(system)
    out = problem.output()
    if out is not None:
        clm = with_base_set(clm, build_output_base(system, out, problem.output_spec["include_input"]))
    return problem, clm


def _tol(problem, key, default):
    return problem.tolerances.get(key, default)


def run_check(problem, clm):
    return existence_check(
        clm,
        tol=_tol(problem, "mrpi_tol", MRPI_TOL),
        max_iter=_tol(problem, "mrpi_iterations", ITERATION_CAP),
        vertex_cap=_tol(problem, "vertex_cap", VERTEX_CAP),
    )


def run_compute(problem, clm, skip_existence=False, max_passes=None, final_reduction=True, oracle_check=None):
    """Existence check, fixpoint, invariance certificate; returns the result document."""
    timings = {}
    t0 = time.perf_counter()
    existence = None if skip_existence else run_check(problem, clm)
    timings["existence_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    result = marpi_compute(
        clm,
        max_passes=max_passes or _tol(problem, "max_passes", MAX_PASSES),
        eps_add=_tol(problem, "eps_add", EPS_ADD),
        eps_red=_tol(problem, "eps_red", EPS_RED),
        final_reduction=final_reduction,
        existence=existence,
    )
    timings["compute_s"] = time.perf_counter() - t0
    doc = {
        "format_version": 1,
        "tool_version": __version__,
        "input_hash": input_hash(problem),
        "status": result.terminated.value,
        "existence": existence.to_dict() if existence else None,
        "set": hpolytope_to_dict(result.set),
        "trace": {
            "outer_iterations": result.outer_iterations,
            "passes_with_additions": result.passes_with_additions,
            "halfspaces_added_per_iteration": list(result.halfspaces_added_per_iteration),
            "n_halfspaces": result.n_halfspaces,
            "iterates": [hpolytope_to_dict(s) for s in result.iterates],
        },
        "stability": _stability_dict(clm),
    }
    if result.terminated is not Termination.EMPTY_SET:
        t0 = time.perf_counter()
        doc["certified_invariant"] = certify_invariance(result.set, clm, _tol(problem, "eps_sub", EPS_SUB))
        timings["certify_s"] = time.perf_counter() - t0
    else:
        doc["certified_invariant"] = None
    if oracle_check is not None and result.terminated is Termination.CONVERGED:
        oracle = brute_force_intersection(oracle_check, clm, _tol(problem, "row_cap", ROW_CAP))
        doc["oracle_check"] = {"N": oracle_check, "same_set": same_set(oracle, result.set)}
    doc["timings"] = timings
    return doc, result


def _stability_dict(clm):
    rep = check_schur_stability(clm)
    return {"spectral_radii": rep.radii, "norms": rep.norms, "warnings": rep.warnings}


def cmd_check(args):
    problem, clm = load_problem(args.problem)
    rep = run_check(problem, clm)
    text = dumps(rep.to_dict())
    _emit(text, args.output)
    return _EXISTENCE_EXIT[rep.exists]


def cmd_compute(args):
    problem, clm = load_problem(args.problem)
    doc, result = run_compute(problem, clm, args.skip_existence, args.max_passes,
                              not args.no_final_reduction, args.oracle_check)
    _emit(dumps(doc), args.output)
    code = _TERMINATION_EXIT[result.terminated]
    if code == EXIT_OK and doc.get("oracle_check", {}).get("same_set") is False:
        code = EXIT_VERIFY_FAILED
    return code


def cmd_plot(args):
    from invkit.plotting import emit

    problem, clm = load_problem(args.problem)
    if clm.n != 2:
        print(f"plot supports 2-D problems only (n = {clm.n})", file=sys.stderr)
        return EXIT_DIMENSION
    doc = load_json(args.result)
    if doc.get("status") == Termination.EMPTY_SET.value:
        print("result set is empty, nothing to plot", file=sys.stderr)
        return EXIT_EMPTY
    S = hpolytope_from_dict(doc["set"])
    iterates = [hpolytope_from_dict(d) for d in doc.get("trace", {}).get("iterates", [])[1:]]
    paths = emit(args.outdir, S, clm, iterates)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_verify(args):
    problem, clm = load_problem(args.problem)
    doc = load_json(args.result)
    report = {"stored_status": doc.get("status")}
    ok = True
    if doc.get("input_hash") not in (None, input_hash(problem)):
        report["input_hash_matches"] = False
        ok = False
    if doc.get("status") != Termination.EMPTY_SET.value:
        S = hpolytope_from_dict(doc["set"])
        certified = certify_invariance(S, clm, _tol(problem, "eps_sub", EPS_SUB))
        admissible = is_subset(S, clm.S0, _tol(problem, "eps_sub", EPS_SUB))
        report["certified_invariant"] = certified
        report["admissible"] = admissible
        if doc.get("status") == Termination.CONVERGED.value and not (certified and admissible):
            ok = False
        if args.samples:
            _, viol = sample_trajectories(S, clm, args.samples, args.horizon, args.seed, keep_samples=False)
            report["violations"] = viol.to_dict()
            ok = ok and viol.exits_S0 == 0 and (viol.exits_S == 0 or not certified)
    report["ok"] = ok
    _emit(dumps(report), args.output)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_mrpi(args):
    problem, clm = load_problem(args.problem)
    it = initial_iterate(clm)
    rows = []
    for _ in range(args.steps):
        it = mrpi_hull_step(it, clm, _tol(problem, "vertex_cap", VERTEX_CAP))
        rows.append({"k": it.k, "n_vertices": it.hull.n_vertices,
                     "f_min_upper": float(np.min(clm.S0.f - it.support_on_F0))})
    doc = {"iterations": rows, "vertices": it.hull.vertices.tolist(),
           "support_on_F0": it.support_on_F0.tolist()}
    _emit(dumps(doc), args.output)
    return EXIT_OK


def _emit(text, path):
    if path:
        write_text(path, text)
    else:
        sys.stdout.write(text)


def build_parser():
    p = argparse.ArgumentParser(prog="invkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide whether a non-empty invariant set exists")
    c.add_argument("problem")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("compute", help="compute the invariant set")
    c.add_argument("problem")
    c.add_argument("-o", "--output")
    c.add_argument("--skip-existence", action="store_true")
    c.add_argument("--max-passes", type=int)
    c.add_argument("--no-final-reduction", action="store_true")
    c.add_argument("--oracle-check", type=int, metavar="N",
                   help="cross-check against the explicit intersection of N+1 backward reachable sets")
    c.set_defaults(func=cmd_compute)

    c = sub.add_parser("plot", help="write boundary CSV and SVG overlay for a 2-D result")
    c.add_argument("result")
    c.add_argument("problem")
    c.add_argument("--outdir", default=".")
    c.set_defaults(func=cmd_plot)

    c = sub.add_parser("verify", help="re-certify a stored result and simulate trajectories")
    c.add_argument("result")
    c.add_argument("problem")
    c.add_argument("-o", "--output")
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--horizon", type=int, default=50)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("mrpi", help="run the convex-hull disturbance recursion")
    c.add_argument("problem")
    c.add_argument("--steps", type=int, default=20)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_mrpi)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProblemFormatError as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except (json.JSONDecodeError, KeyError) as exc:
        print(f"malformed result file: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except IterationCapExceeded as exc:
        print(f"iteration cap: {exc}", file=sys.stderr)
        return EXIT_ITERATION_CAP
    except VertexBudgetExceeded as exc:
        # the hull recursion cannot continue, so existence stays open
        print(f"vertex budget: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except EmptySetError as exc:
        print(f"empty set: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except RowCapExceeded as exc:
        print(f"row cap: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
