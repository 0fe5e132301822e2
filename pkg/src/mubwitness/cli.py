"""Command-line front end.

Every command prints one JSON document (or CSV for curve-like results)
carrying the tool version, the fully resolved configuration and the seed.

Exit codes: 0 ok, 1 invariant violation, 2 usage error, 3 Delsarte hypothesis
fails (non-positive Haar mean), 4 conjecture-refutation finding.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, catalog6, haar, mub, pdcert, witness
from .linalg import Tolerance, matrix_to_json

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_HYPOTHESIS = 3
EXIT_REFUTATION = 4

SEED_ENV = "MUBWITNESS_SEED"
CONDITIONAL_NOTE = "conditional on positive definiteness (not proven)"


class UsageError(Exception):
    pass


class HypothesisFailure(Exception):
    pass


def _clean(obj):
    """Make a result JSON-safe: Fractions to floats, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _config(args) -> dict:
    skip = {"func", "out", "format", "command_name"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, result, csv_rows=None) -> None:
    if getattr(args, "format", "json") == "csv":
        if csv_rows is None:
            raise UsageError("CSV output is only available for curve-like results (eps-scan, conj6 check)")
        buf = io.StringIO()
        buf.write(f"# mubwitness {__version__} seed={getattr(args, 'seed', None)} config={json.dumps(_clean(_config(args)))}\n")
        csv.writer(buf, lineterminator="\n").writerows(csv_rows)
        text = buf.getvalue()
    else:
        doc = {
            "tool": "mubwitness",
            "version": __version__,
            "command": args.command_name,
            "seed": getattr(args, "seed", None),
            "config": _config(args),
            "result": result,
        }
        text = json.dumps(_clean(doc), indent=2) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _tolerance(args) -> Tolerance:
    return Tolerance(args.unitary_tol, args.hadamard_tol, args.eig_tol)


def _witness(args) -> witness.WitnessFunction:
    try:
        return witness.parse_witness(args.witness, args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _sampler(args) -> haar.SamplerConfig:
    return haar.SamplerConfig(args.dim, args.seed, args.chunk_size)


# -- commands -------------------------------------------------------------------


def cmd_integrate(args) -> int:
    w = _witness(args)
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    est = haar.integrate(w, _sampler(args), args.samples, workers=args.workers)
    result = est.to_json()
    if w.haar_mean is not None:
        exact = float(w.haar_mean)
        result["closed_form"] = exact
        result["z_score"] = (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0
    _emit(args, result)
    return EXIT_OK


def cmd_bound(args) -> int:
    w = _witness(args)
    result = {"witness": w.name, "dim": w.dim, "flags": list(w.flags)}
    if w.value_at_identity is None:
        raise UsageError(f"witness {w.name} has no closed-form identity value")
    top = float(w.value_at_identity)
    if w.haar_mean is not None and args.samples is None:
        if w.haar_mean <= 0:
            raise HypothesisFailure(f"Haar mean {float(w.haar_mean)} of {w.name} is not positive")
        result.update(kind="point", bound=witness.delsarte_bound(w), haar_mean=w.haar_mean)
    else:
        if args.samples is None:
            raise UsageError(f"witness {w.name} has no closed-form Haar mean; pass --samples")
        cfg = _sampler(args)
        if w.decomposition is not None:
            dec = w.decomposition
            part = haar.integrate(dec.residual, cfg, args.samples, workers=args.workers)
            mean = float(dec.known_mean) + dec.scale * part.mean
            stderr = abs(dec.scale) * part.stderr
            result["residual_estimate"] = {"witness": dec.residual.name, **part.to_json()}
        else:
            est = haar.integrate(w, cfg, args.samples, workers=args.workers)
            mean, stderr = est.mean, est.stderr
        try:
            low, high = witness.bound_interval(top, mean, stderr)
        except witness.DelsarteHypothesisError as exc:
            raise HypothesisFailure(str(exc)) from None
        result.update(kind="interval", bound=top / mean if mean > 0 else math.inf,
                      interval=[low, high], haar_mean=mean, haar_mean_stderr=stderr, sigmas=3)
    result["conditional"] = not w.certified
    if w.positive_definite is None:
        result["note"] = CONDITIONAL_NOTE
    elif not w.certified:
        result["note"] = "not a certified witness; the bound does not follow"
    _emit(args, result)
    return EXIT_OK


def cmd_gram(args) -> int:
    w = _witness(args)
    cfg = _sampler(args)
    stack = pdcert.haar_tuple(cfg, args.trial, args.m)
    try:
        g = pdcert.gram(w, stack)
    except pdcert.NotStarSymmetricError as exc:
        raise UsageError(str(exc)) from None
    check = pdcert.psd_check(g, pdcert.EVIDENCE_THRESHOLD)
    result = {"witness": w.name, "m": args.m, "trial": args.trial, "lambda_min": check.lambda_min,
              "psd": check.psd, "gram": g.tolist()}
    if args.alpha0 is not None:
        rep = pdcert.shifted_check(w, args.alpha0, stack)
        result["alpha0"] = args.alpha0
        result["lambda_min_shifted"] = rep.lambda_min_shifted
    _emit(args, result)
    if pdcert.theorem_backed(w) and not check.psd:
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_pd_scan(args) -> int:
    w = _witness(args)
    try:
        scan = pdcert.pd_scan(w, args.m, args.trials, _sampler(args), workers=args.workers)
    except pdcert.NotStarSymmetricError as exc:
        raise UsageError(str(exc)) from None
    result = scan.to_json()
    backed = pdcert.theorem_backed(w)
    result["theorem_backed"] = backed
    if backed:
        result["psd"] = scan.worst >= -pdcert.EVIDENCE_THRESHOLD
    else:
        result["refuted"] = scan.worst < -pdcert.REFUTATION_THRESHOLD
        result["status"] = "refuted" if result["refuted"] else "not refuted at budget"
    if args.search_restarts > 0:
        rep = pdcert.counterexample_search(w, args.m, _sampler(args), args.search_restarts, args.search_steps)
        result["search"] = rep.to_json()
    _emit(args, result)
    if backed and not result["psd"]:
        return EXIT_INVARIANT
    return EXIT_OK


def parse_grid(text: str) -> list:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            return [float(x) for x in np.linspace(float(start), float(stop), n)]
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected start:stop:count or a comma list") from None


def cmd_eps_scan(args) -> int:
    if args.kind not in witness.COMBINATION_KINDS:
        raise UsageError(f"unknown kind {args.kind!r}")
    grid = parse_grid(args.grid)
    if grid != sorted(grid) or min(grid) < 0:
        raise UsageError("eps grid must be ascending and nonnegative")
    args.dim = witness.M_DIM
    res = pdcert.eps_scan(args.kind, grid, args.m, args.trials, _sampler(args),
                          search_restarts=args.search_restarts, search_steps=args.search_steps,
                          mean_samples=args.mean_samples, workers=args.workers)
    _emit(args, res.to_json(), csv_rows=res.csv_rows())
    if res.trial_curve[0] < -pdcert.EVIDENCE_THRESHOLD and grid[0] == 0.0:
        return EXIT_INVARIANT
    return EXIT_OK


def _load_system(path) -> mub.MubSystem:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        if "result" in doc and "bases" not in doc:
            doc = doc["result"]
        return mub.MubSystem.from_json(doc)
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read MUB system from {path}: {exc}") from None


def cmd_mub_gen(args) -> int:
    try:
        system = mub.construct(args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, system.to_json())
    return EXIT_OK


def cmd_mub_verify(args) -> int:
    system = _load_system(args.input)
    res = mub.verify_mub(system, _tolerance(args))
    out = {"dim": system.dim, "n_bases": len(system), "complete": len(system) == system.dim + 1, **res.to_json()}
    _emit(args, out)
    return EXIT_OK if res.ok else EXIT_INVARIANT


def cmd_audit(args) -> int:
    system = _load_system(args.input)
    args.dim = system.dim
    w = _witness(args)
    try:
        rec = witness.delsarte_audit(system, w)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = rec.to_json()
    out["witness"] = w.name
    out["tight"] = abs(rec.S - rec.upper) <= 1e-6 and abs(rec.S - rec.lower) <= 1e-6
    _emit(args, out)
    return EXIT_OK if rec.valid else EXIT_INVARIANT


def cmd_catalog_list(args) -> int:
    _emit(args, {"families": [f.to_json() for f in catalog6.FAMILIES.values()]})
    return EXIT_OK


def cmd_catalog_get(args) -> int:
    params = [float(x) for x in args.params.split(",")] if args.params else []
    try:
        z = catalog6.family(args.family, params)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    except catalog6.HadamardValidationError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, {"family": args.family, "params": params, "matrix": matrix_to_json(z)})
    return EXIT_OK


def cmd_conj6_check(args) -> int:
    labels, targets = [], []
    names = list(catalog6.FAMILIES) if args.family == "all" else [args.family]
    if args.family == "fourier":
        labels, targets = ["fourier(6)"], [catalog6.fourier(6)]
    else:
        for name in names:
            if name not in catalog6.FAMILIES:
                raise UsageError(f"unknown family {name!r}; known: fourier, all, {', '.join(catalog6.FAMILIES)}")
            lab, mats = catalog6.family_targets(name, args.grid)
            labels += lab
            targets += mats
    records = catalog6.conjecture_check(targets, args.tol, labels, _tolerance(args))
    failures = [r.label for r in records if not r.vanishes]
    result = {
        "n_targets": len(records),
        "all_vanish": not failures,
        "non_vanishing": failures,
        "finding": "refutation finding: m1/m2 do not vanish on these Hadamard matrices" if failures else None,
        "records": [r.to_json() for r in records],
    }
    rows = [["label", "m1", "m2", "max_inner_sum", "vanishes"]]
    rows += [[r.label, repr(r.m1), repr(r.m2), repr(r.max_inner_sum), str(r.vanishes)] for r in records]
    _emit(args, result, csv_rows=rows)
    return EXIT_REFUTATION if failures else EXIT_OK


# -- parser -----------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_default_seed(), help=f"RNG seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--unitary-tol", type=float, default=1e-10)
    common.add_argument("--hadamard-tol", type=float, default=1e-10)
    common.add_argument("--eig-tol", type=float, default=1e-8)

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--dim", type=int, default=6)
    sampling.add_argument("--chunk-size", type=int, default=4096)
    sampling.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="mubwitness", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", parents=[common, sampling], help="Haar Monte Carlo mean of a witness")
    p.add_argument("--witness", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("bound", parents=[common, sampling], help="Delsarte bound w(1)/mean")
    p.add_argument("--witness", required=True)
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("gram", parents=[common, sampling], help="Gram matrix at one Haar tuple")
    p.add_argument("--witness", required=True)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--alpha0", type=float, default=None)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("pd-scan", parents=[common, sampling], help="minimum Gram eigenvalue over many tuples")
    p.add_argument("--witness", required=True)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--search-restarts", type=int, default=0)
    p.add_argument("--search-steps", type=int, default=100)
    p.set_defaults(func=cmd_pd_scan)

    p = sub.add_parser("eps-scan", parents=[common, sampling], help="scan h + eps*m over an eps grid (d=6)")
    p.add_argument("--kind", required=True, choices=witness.COMBINATION_KINDS)
    p.add_argument("--grid", default="0:0.1:11", help="start:stop:count or comma list")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--search-restarts", type=int, default=1)
    p.add_argument("--search-steps", type=int, default=50)
    p.add_argument("--mean-samples", type=int, default=0, help="Haar samples for E[m] (conditional bounds)")
    p.set_defaults(func=cmd_eps_scan)

    p = sub.add_parser("mub", help="complete MUB systems")
    msub = p.add_subparsers(dest="mub_command", required=True)
    q = msub.add_parser("gen", parents=[common], help="construct a complete system")
    q.add_argument("--dim", type=int, required=True)
    q.set_defaults(func=cmd_mub_gen)
    q = msub.add_parser("verify", parents=[common], help="verify a MUB system JSON file")
    q.add_argument("--in", dest="input", required=True)
    q.set_defaults(func=cmd_mub_verify)

    p = sub.add_parser("audit", parents=[common], help="Delsarte sandwich on a MUB system file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--witness", default="h")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("catalog", help="6x6 Hadamard catalog")
    csub = p.add_subparsers(dest="catalog_command", required=True)
    q = csub.add_parser("list", parents=[common])
    q.set_defaults(func=cmd_catalog_list)
    q = csub.add_parser("get", parents=[common])
    q.add_argument("--family", required=True)
    q.add_argument("--params", default="", help="comma-separated phases in radians")
    q.set_defaults(func=cmd_catalog_get)

    p = sub.add_parser("conj6", help="vanishing of m1, m2 on 6x6 Hadamards")
    jsub = p.add_subparsers(dest="conj6_command", required=True)
    q = jsub.add_parser("check", parents=[common])
    q.add_argument("--family", default="fourier", help="fourier, all, or a catalog family name")
    q.add_argument("--grid", type=int, default=11, help="points per parameter")
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--json", action="store_true", help="JSON output (the default)")
    q.set_defaults(func=cmd_conj6_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.command_name = " ".join(
        x for x in (args.command, getattr(args, "mub_command", None), getattr(args, "catalog_command", None),
                    getattr(args, "conj6_command", None)) if x
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mubwitness: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisFailure as exc:
        print(f"mubwitness: Delsarte hypothesis fails: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (catalog6.HadamardValidationError, witness.ImaginaryResidueError) as exc:
        print(f"mubwitness: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
