"""The torinv command line.

Subcommands: cohom (a single cohomology group), koszul-verify (certify the
weight-q complex of a sequence file), resolve (flasque or coflasque
resolution with its certificate), report (the exact-sequence reports), and
corpus (run the built-in worked examples).

Exit codes: 0 success or verdict pass, 1 verdict failure, 2 input error,
3 a configured cap was exceeded.  Structured output is JSON with sorted
keys; identical invocations produce byte-identical structured output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .intlin import AbelianGroupStructure
from .glattice import (
    ClosureCapExceeded,
    InvalidSpec,
    NotInjective,
    NotInvertible,
    NotSaturated,
    RankOverflow,
    builtin_group,
)
from .gcohom import DegreeCapExceeded, SizeExceeded, cohomology
from .koszul import ses_from_text, verify_koszul_quasi_iso
from .tori import coflasque_resolution, flasque_resolution, is_permutation_in_basis
from .exprs import parse_lattice_expr, parse_torus_expr
from .assembler import (
    FamilyDatumMissing,
    FieldProfile,
    assemble_inv4,
    assemble_inv5,
    assemble_unramified,
    hs_weight3_sequence,
    q8_conclusion,
    special_family_reports,
)
from . import corpus as corpus_mod

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_CAP_EXCEEDED = 3

_CAP_ERRORS = (ClosureCapExceeded, DegreeCapExceeded, RankOverflow, SizeExceeded)
_INPUT_ERRORS = (InvalidSpec, NotInvertible, NotSaturated, NotInjective,
                 FamilyDatumMissing, ValueError, OSError, json.JSONDecodeError)


def _emit(args, text_lines, structured):
    if args.format == "structured":
        out = json.dumps(structured, sort_keys=True, indent=1) + "\n"
    else:
        out = "\n".join(text_lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _load_profile(path):
    if path is None:
        return FieldProfile()
    with open(path, "r", encoding="utf-8") as fh:
        return FieldProfile.from_json(fh.read())


def _structure_dict(s):
    return {"free_rank": s.free_rank, "torsion": list(s.torsion)}


def _validate_report_schema(doc):
    for key in ("provenance", "nodes", "arrows", "simplification_log"):
        if key not in doc:
            raise AssertionError(f"report schema broken: missing {key}")
    ids = set()
    for n in doc["nodes"]:
        for key in ("id", "label", "status"):
            if key not in n:
                raise AssertionError(f"report schema broken: node missing {key}")
        ids.add(n["id"])
    for a in doc["arrows"]:
        if a["from"] not in ids or a["to"] not in ids:
            raise AssertionError("report schema broken: dangling arrow")


def _report_lines(rep):
    lines = [f"report: {rep.provenance}"]
    for nid, term in rep.nodes:
        extra = ""
        if term.structure is not None and term.status == "computed":
            extra = f"  = {term.structure}"
        lines.append(f"  [{nid}] {term.label} ({term.status}){extra}")
    for a in rep.arrows:
        label = f" --{a['label']}-->" if a["label"] else " -->"
        exact = f"  (exact at {a['exact_at']})" if a.get("exact_at") else ""
        lines.append(f"  {a['from']}{label} {a['to']}{exact}")
    for e in rep.simplification_log:
        lines.append(f"  rewrite[{e['rule']}/{e['anchor']}]: "
                     f"{e['before']} => {e['after']}")
    for note in rep.notes:
        lines.append(f"  note: {note}")
    return lines


def _emit_report(args, rep, extra=None):
    doc = rep.to_dict()
    if extra:
        doc.update(extra)
    _validate_report_schema(doc)
    lines = _report_lines(rep)
    if extra:
        for k, v in extra.items():
            lines.append(f"{k}: {v}")
    _emit(args, lines, doc)


def cmd_cohom(args):
    group = builtin_group(args.group) if args.group else None
    lat = parse_lattice_expr(args.lattice, group=group)
    res = cohomology(lat.group, lat, args.degree, degree_cap=args.degree_cap,
                     label=args.lattice)
    _emit(args,
          [f"H^{args.degree}({lat.group.name or 'G'}, {args.lattice}) = {res.value}"],
          {"group": lat.group.name, "lattice": args.lattice,
           "degree": args.degree, "value": _structure_dict(res.value),
           "display": str(res.value)})
    return EXIT_OK


def cmd_koszul_verify(args):
    with open(args.ses, "r", encoding="utf-8") as fh:
        text = fh.read()
    ses = ses_from_text(text, base_dir=os.path.dirname(os.path.abspath(args.ses)))
    verdict = verify_koszul_quasi_iso(ses, args.q)
    lines = [f"koszul weight {args.q}: {'pass' if verdict.ok else 'FAIL'}",
             f"  H_0 = {verdict.h0} (quotient symmetric power has rank "
             f"{verdict.quotient_rank})"]
    for k, h in sorted(verdict.positive_homology.items()):
        lines.append(f"  H_{k} = {h}")
    lines.append(f"  S^q of the quotient map surjective: {verdict.surjective}")
    lines.append(f"  kernel equals incoming image: {verdict.kernel_matches_image}")
    _emit(args, lines, {
        "weight": args.q,
        "ok": verdict.ok,
        "h0": _structure_dict(verdict.h0),
        "positive_homology": {str(k): _structure_dict(v)
                              for k, v in verdict.positive_homology.items()},
        "surjective": verdict.surjective,
        "kernel_matches_image": verdict.kernel_matches_image,
    })
    return EXIT_OK if verdict.ok else EXIT_VERDICT_FAILED


def cmd_resolve(args):
    group = builtin_group(args.group) if args.group else None
    lat = parse_lattice_expr(args.lattice, group=group)
    if args.kind == "flasque":
        res = flasque_resolution(lat, degree_cap=args.degree_cap)
        ses, cert = res.ses, res.certificate
    else:
        ses, cert = coflasque_resolution(lat, degree_cap=args.degree_cap)
    lines = [
        f"{args.kind} resolution of {args.lattice}:",
        f"  0 -> rank {ses.sub.rank} -> rank {ses.mid.rank} (permutation: "
        f"{is_permutation_in_basis(ses.mid)}) -> rank {ses.quot.rank} -> 0",
        f"  certificate ({cert.kind}): {'pass' if cert.ok else 'FAIL'}",
    ]
    for sub, val in cert.certificate:
        lines.append(f"    subgroup of order {len(sub)}: H^1 = {val}")
    _emit(args, lines, {
        "kind": args.kind,
        "lattice": args.lattice,
        "ranks": [ses.sub.rank, ses.mid.rank, ses.quot.rank],
        "middle_is_permutation": is_permutation_in_basis(ses.mid),
        "certificate_ok": cert.ok,
        "certificate": [{"subgroup_order": len(sub), "h1": _structure_dict(val)}
                        for sub, val in cert.certificate],
    })
    return EXIT_OK if cert.ok else EXIT_VERDICT_FAILED


def cmd_report(args):
    profile = _load_profile(args.profile)
    kind = args.kind
    if kind == "q8":
        rep, conclusion = q8_conclusion(
            profile, ch3_tors_nonzero=(args.ch3_tors == "nonzero"))
        _emit_report(args, rep, extra={"conclusion": conclusion})
        return EXIT_OK
    if args.torus is None:
        raise InvalidSpec(f"report {kind} needs --torus")
    torus = parse_torus_expr(args.torus)
    if kind == "inv4":
        _emit_report(args, assemble_inv4(torus, profile))
        return EXIT_OK
    if kind == "inv5":
        _emit_report(args, assemble_inv5(torus, profile))
        return EXIT_OK
    if kind == "hs3":
        _emit_report(args, hs_weight3_sequence(torus, profile))
        return EXIT_OK
    if kind == "unramified":
        rep4, rep5 = assemble_unramified(torus, profile,
                                         degree_cap=args.degree_cap)
        doc = {"degree4": rep4.to_dict(), "degree5": rep5.to_dict()}
        _validate_report_schema(doc["degree4"])
        _validate_report_schema(doc["degree5"])
        _emit(args, _report_lines(rep4) + [""] + _report_lines(rep5), doc)
        return EXIT_OK
    if kind == "special-family":
        reps = special_family_reports(torus, profile,
                                      degree_cap=args.degree_cap)
        doc = {
            "chow": reps.chow.to_dict(),
            "inv3": reps.inv3.to_dict(),
            "degree4": reps.degree4.to_dict(),
            "degree5": reps.degree5.to_dict(),
        }
        lines = []
        for rep in reps.all_reports():
            lines.extend(_report_lines(rep))
            lines.append("")
        if reps.h1_s2_description is not None:
            doc["h1_s2_description"] = reps.h1_s2_description.to_dict()
        for sub in doc.values():
            _validate_report_schema(sub)
        _emit(args, lines, doc)
        return EXIT_OK
    raise InvalidSpec(f"unknown report kind {kind!r}")


def cmd_corpus(args):
    cases = corpus_mod.corpus_list(base_seed=args.seed)
    if args.names:
        byname = {c.name: c for c in cases}
        missing = [n for n in args.names if n not in byname]
        if missing:
            raise InvalidSpec(f"unknown corpus cases: {missing} "
                              f"(available: {sorted(byname)})")
        cases = [byname[n] for n in args.names]
    all_ok = True
    lines = []
    structured = {}
    for case in cases:
        rows = case.run()
        structured[case.name] = [
            {"fact": label, "source": source, "ok": ok}
            for label, source, ok in rows]
        for label, source, ok in rows:
            all_ok = all_ok and ok
            lines.append(f"{'PASS' if ok else 'FAIL'} [{case.name}] "
                         f"{label} ({source})")
    lines.append("corpus: " + ("all facts hold" if all_ok else "FAILURES above"))
    _emit(args, lines, structured)
    return EXIT_OK if all_ok else EXIT_VERDICT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torinv",
        description="exact lattice-level computations for cohomological "
                    "invariants of algebraic tori")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "structured"),
                       default="text")
        p.add_argument("--output", default=None, help="write here instead of stdout")
        p.add_argument("--degree-cap", type=int, default=None,
                       help="override the cohomology degree cap")

    p = sub.add_parser("cohom", help="one finite-group cohomology group")
    p.add_argument("--group", default=None, help="builtin group name")
    p.add_argument("--lattice", required=True, help="lattice expression")
    p.add_argument("--degree", type=int, required=True)
    common(p)
    p.set_defaults(fn=cmd_cohom)

    p = sub.add_parser("koszul-verify", help="certify the weight-q complex "
                                             "of a sequence file")
    p.add_argument("--ses", required=True, help="sequence file")
    p.add_argument("--q", type=int, required=True)
    common(p)
    p.set_defaults(fn=cmd_koszul_verify)

    p = sub.add_parser("resolve", help="flasque or coflasque resolution")
    p.add_argument("--kind", choices=("flasque", "coflasque"), required=True)
    p.add_argument("--group", default=None)
    p.add_argument("--lattice", required=True)
    common(p)
    p.set_defaults(fn=cmd_resolve)

    p = sub.add_parser("report", help="emit an exact-sequence report")
    p.add_argument("kind", choices=("inv4", "inv5", "hs3", "unramified",
                                    "special-family", "q8"))
    p.add_argument("--torus", default=None, help="torus expression")
    p.add_argument("--profile", default=None, help="field profile JSON file")
    p.add_argument("--ch3-tors", choices=("nonzero", "zero"), default="zero",
                   help="external input for the q8 report")
    common(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("corpus", help="run the built-in worked examples")
    p.add_argument("names", nargs="*", help="case names (default: all)")
    p.add_argument("--seed", type=int, default=None,
                   help="rebase the seeds of the random fixtures")
    common(p)
    p.set_defaults(fn=cmd_corpus)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _CAP_ERRORS as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP_EXCEEDED
    except _INPUT_ERRORS as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
