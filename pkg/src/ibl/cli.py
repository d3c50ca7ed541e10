"""Batch command-line front end.

Subcommands: norm, ideal, basis, cr, reproduce.  Rationals are printed as
"num/den" strings end to end; exit codes encode the three-valued outcome
(0 = pass/In, 1 = fail/NotIn, 2 = Undetermined).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from typing import Optional

from .critideal import classify_c0, cr_closed_form, cr_membership, generator_set
from .bases import biorthogonality_check, simple_witness_check, witness_interval_check
from .descriptors import (fmt_q, load_json, parse_construction, parse_ideal,
                          parse_set, parse_space, parse_submeasure,
                          parse_vector, space_label, vector_to_json)
from .ideals import Answer
from .prng import SplitMix64
from .repro import TARGETS, RunConfig, reproduce
from .seqspace import (James, LazyVec, Lp, Phi, SeqVec, SupC0, james_sq_norm,
                       lp_norm_float, lp_power_norm, phi_norm, sup_norm)

Q = Fraction

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_UNDETERMINED = 2


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec_arg(raw: str) -> dict:
    """Inline JSON or a path to a JSON file."""
    raw = raw.strip()
    if raw.startswith("{"):
        return json.loads(raw)
    return load_json(raw)


def _cmd_norm(args) -> int:
    x = parse_vector(_spec_arg(args.vector))
    tag = parse_space(args.norm)
    payload: dict = {"norm": args.norm}
    if isinstance(tag, Lp):
        if isinstance(x, LazyVec):
            x = x.truncate(args.horizon)
        if tag.p.denominator == 1:
            power = lp_power_norm(x, int(tag.p))
            payload["lp_power"] = fmt_q(power)
            if args.as_float:
                payload["float"] = float(power) ** (1.0 / int(tag.p))
        else:
            payload["float"] = lp_norm_float(x, float(tag.p))
            payload["note"] = "non-integer p: float presentation only"
    elif isinstance(tag, SupC0):
        v = sup_norm(x)
        payload["sup"] = fmt_q(v)
        if args.as_float:
            payload["float"] = float(v)
    elif isinstance(tag, James):
        if isinstance(x, LazyVec):
            x = x.truncate(args.horizon)
        v = james_sq_norm(x)
        payload["james_sq"] = fmt_q(v)
        if args.as_float:
            payload["float"] = float(v) ** 0.5
    elif isinstance(tag, Phi):
        if isinstance(x, LazyVec):
            x = x.truncate(args.horizon)
        v = phi_norm(x, tag.phi, tag.horizon)
        payload["phi"] = fmt_q(v)
        if args.as_float:
            payload["float"] = float(v)
    _emit(payload, args.out)
    return EXIT_PASS


def _cmd_ideal(args) -> int:
    ideal = parse_ideal(_spec_arg(args.ideal))
    a = parse_set(_spec_arg(args.set))
    verdict = ideal.contains(a, args.budget)
    payload = {
        "ideal": ideal.name,
        "set": a.description,
        "budget": args.budget,
        "answer": verdict.answer.value,
        "certificate": verdict.certificate,
        "witness": list(verdict.witness),
        "trajectory": [[n, fmt_q(v)] for n, v in verdict.trajectory],
        "note": verdict.note,
    }
    _emit(payload, args.out)
    if verdict.answer is Answer.IN:
        return EXIT_PASS
    if verdict.answer is Answer.NOT_IN:
        return EXIT_FAIL
    return EXIT_UNDETERMINED


def _cmd_basis(args) -> int:
    system, witness = parse_construction(_spec_arg(args.construction))
    if args.action == "build":
        payload = {
            "system": system.name,
            "params": {k: str(v) for k, v in system.params.items()},
            "vectors": {str(n): vector_to_json(system.vec_at(n), args.horizon)
                        for n in range(min(args.N, 8))},
            "functionals": {str(n): [[i, fmt_q(c)]
                                     for i, c in system.fun_at(n).coeffs]
                            for n in range(min(args.N, 8))},
        }
        _emit(payload, args.out)
        return EXIT_PASS

    ok, counterexample = biorthogonality_check(system, args.N)
    interval_ok = witness_interval_check(witness, args.horizon)
    rng = SplitMix64(args.seed)
    witness_ok = True
    first_bad = None
    for _ in range(args.probes):
        x = SeqVec.make((rng.below(32), Q(rng.between(-3, 3), rng.between(1, 4)))
                        for _ in range(5))
        n = rng.below(32)
        good, lhs, rhs = simple_witness_check(system, witness, x, n, args.horizon)
        if not good and witness_ok:
            witness_ok = False
            first_bad = {"n": n, "lhs": str(lhs), "rhs": str(rhs)}
    payload = {
        "system": system.name,
        "biorthogonal": ok,
        "first_counterexample": list(counterexample) if counterexample else None,
        "interval_to_one": interval_ok,
        "witness_identity": witness_ok,
        "witness_counterexample": first_bad,
        "N": args.N,
        "probes": args.probes,
        "seed": args.seed,
    }
    if counterexample:
        payload["first_counterexample"] = [counterexample[0], counterexample[1],
                                           fmt_q(counterexample[2])]
    _emit(payload, args.out)
    return EXIT_PASS if (ok and interval_ok and witness_ok) else EXIT_FAIL


def _cmd_cr(args) -> int:
    system, witness = parse_construction(_spec_arg(args.construction))
    space = parse_space(args.space)

    if args.action == "generators":
        x = parse_vector(_spec_arg(args.vector))
        if isinstance(x, LazyVec):
            x = x.truncate(args.horizon)
        gen = generator_set(system, witness, x, space, args.horizon)
        _emit({"system": system.name, "space": space_label(space),
               "horizon": args.horizon, "elements": list(gen.elements)},
              args.out)
        return EXIT_PASS

    if args.action == "member":
        a = parse_set(_spec_arg(args.set))
        verdict = cr_membership(system, witness, space, a, args.budget)
        _emit({"system": system.name, "space": space_label(space),
               "set": a.description, "answer": verdict.answer.value,
               "certificate": verdict.certificate, "note": verdict.note},
              args.out)
        if verdict.answer is Answer.IN:
            return EXIT_PASS
        if verdict.answer is Answer.NOT_IN:
            return EXIT_FAIL
        return EXIT_UNDETERMINED

    if args.action == "classify":
        cls = classify_c0(witness, space, args.horizon)
        _emit({
            "system": system.name,
            "space": space_label(space),
            "class": cls.kind,
            "horizon": cls.horizon,
            "window": cls.window,
            "infinite_buckets": list(cls.s_indices),
            "finite_union_sample": list(cls.t_sample[:32]),
            "degenerate_warning": cls.degenerate_warning,
        }, args.out)
        return EXIT_PASS

    if args.action == "closed-form":
        form = cr_closed_form(system, witness, space)
        from .critideal import ExhForm, LimitForm, SummableBlockForm
        if isinstance(form, SummableBlockForm):
            payload = {
                "variant": "summable_block",
                "provenance": form.provenance,
                "weights": [[n, fmt_q(form.weight_at_index(n))]
                            for n in range(min(args.horizon, 32))],
                "blocks": [form.ideal.blocks.t(k) for k in range(12)],
            }
        elif isinstance(form, LimitForm):
            payload = {
                "variant": "limit",
                "provenance": form.provenance,
                "threshold_keys": [[n, fmt_q(form.threshold_key(n))]
                                   for n in witness.d.enumerate_below(16)],
                "key_floor": fmt_q(form.key_floor) if form.key_floor else None,
            }
        else:
            payload = {"variant": "exh", "provenance": form.provenance}
        _emit(payload, args.out)
        return EXIT_PASS

    raise AssertionError(args.action)


def _report_csv(payload: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["proposition", "check", "expected", "computed", "status"])
    for row in payload["checks"]:
        writer.writerow([payload["proposition"], row["name"], row["expected"],
                         row["computed"], row["status"]])
    return buf.getvalue()


def _cmd_reproduce(args) -> int:
    cfg = RunConfig(horizon=args.horizon, probes=args.probes, seed=args.seed,
                    precision=args.precision, out=args.out, format=args.format)
    report = reproduce(args.proposition, cfg)
    payload = report.to_payload()
    if args.format == "csv":
        text = _report_csv(payload)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(payload, args.out)
    print(f"[{report.proposition}] {'pass' if report.passed else 'FAIL'} "
          f"in {report.wall_time:.2f}s", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ibl",
        description="exact-arithmetic lab for ideals, norms, and bases on omega")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="evaluate a norm of a vector file")
    p.add_argument("--norm", required=True,
                   help="lp:p | c0 | james | phi:density:H")
    p.add_argument("--vector", required=True, help="JSON file or inline JSON")
    p.add_argument("--horizon", type=int, default=256)
    p.add_argument("--as-float", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("ideal", help="ideal membership verdicts")
    psub = p.add_subparsers(dest="action", required=True)
    pm = psub.add_parser("member")
    pm.add_argument("--ideal", required=True)
    pm.add_argument("--set", required=True)
    pm.add_argument("--budget", type=int, default=64)
    pm.add_argument("--out")
    pm.set_defaults(func=_cmd_ideal)

    p = sub.add_parser("basis", help="build or check a construction")
    psub = p.add_subparsers(dest="action", required=True)
    for action in ("build", "check"):
        pa = psub.add_parser(action)
        pa.add_argument("--construction", required=True)
        pa.add_argument("--N", type=int, default=64)
        pa.add_argument("--horizon", type=int, default=256)
        pa.add_argument("--probes", type=int, default=50)
        pa.add_argument("--seed", type=int, default=42)
        pa.add_argument("--out")
        pa.set_defaults(func=_cmd_basis, action=action)

    p = sub.add_parser("cr", help="critical-ideal machinery")
    psub = p.add_subparsers(dest="action", required=True)
    for action in ("generators", "member", "classify", "closed-form"):
        pa = psub.add_parser(action)
        pa.add_argument("--construction", required=True)
        pa.add_argument("--space", required=True)
        pa.add_argument("--horizon", type=int, default=256)
        pa.add_argument("--budget", type=int, default=64)
        if action == "generators":
            pa.add_argument("--vector", required=True)
        if action == "member":
            pa.add_argument("--set", required=True)
        pa.add_argument("--out")
        pa.set_defaults(func=_cmd_cr, action=action)

    p = sub.add_parser("reproduce", help="re-derive a construction's identities")
    p.add_argument("proposition", choices=sorted(TARGETS))
    p.add_argument("--horizon", type=int, default=256)
    p.add_argument("--probes", type=int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--precision", type=float, default=1e-9)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
