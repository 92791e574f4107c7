"""Command-line front end.

Exit codes: 0 success, 2 resource bound exceeded, 64 usage error,
70 internal inconsistency (a certificate that fails re-verification).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction


from .correlation import CharacteristicMatrix, Correlation, uniform_group_correlation, validate
from .cyclotomic import Sign, format_exact, real_sign, sqrt5, to_float
from .errors import BoundExceeded, NlsymError, NotB4, ParseError
from .groups import AbelianGroup, DualPermutation

EXIT_OK = 0
EXIT_BOUND = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _fmt(x) -> str:
    return format_exact(x)


def _emit(args, text: str, data: dict):
    out = json.dumps(data, indent=1, default=str) if args.json else text
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def _parse_perm(text: str, n: int | None = None) -> list[int]:
    try:
        perm = [int(t) for t in text.replace(" ", "").split(",") if t != ""]
    except ValueError as exc:
        raise ParseError(f"bad permutation {text!r}") from exc
    if sorted(perm) != list(range(len(perm))) or (n is not None and len(perm) != n):
        raise ParseError(f"{text!r} is not a permutation of 0..{(n or len(perm)) - 1}")
    return perm


def _group(text: str) -> AbelianGroup:
    try:
        return AbelianGroup.parse(text)
    except ParseError:
        raise
    except (ValueError, KeyError) as exc:
        raise ParseError(str(exc)) from exc


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _matrix_lines(D: CharacteristicMatrix) -> list[str]:
    n = D.group.order
    lines = []
    for a in range(n):
        lines.append("  " + " | ".join(_fmt(D.entries[a, b]) for b in range(n)))
    return lines


# ---------------------------------------------------------------------- survey

def cmd_survey(args) -> int:
    from .qls import survey

    G = _group(args.group)
    workers = args.workers or os.cpu_count() or 1

    def progress(done, total):
        if args.progress and (done % 50 == 0 or done == total):
            print(f"  {done}/{total} orbit representatives", file=sys.stderr)

    rep = survey(G, extended=args.extended, workers=workers, progress=progress)
    lines = [rep.line(),
             f"  |Aut(G)| = {rep.automorphisms}, locality orbits = {len(rep.orbits)}, "
             f"{rep.seconds:.2f} s"]
    if args.verbose:
        for o in rep.orbits:
            lines.append(f"  orbit {list(o.representative)} size={o.orbit_size} new={o.distinct} "
                         f"D#{o.key} {o.verdict}")
    _emit(args, "\n".join(lines), rep.to_json())
    return EXIT_OK


# ------------------------------------------------------------------------- qls

def cmd_qls(args) -> int:
    from .locality import Status, decide_local_invariant
    from .qls import build_qls, characteristic_matrix, is_classical_qls

    G = _group(args.group)
    pi = DualPermutation(_parse_perm(args.perm, G.order))
    Q = build_qls(G, pi)
    D = characteristic_matrix(G, pi)
    classical, witness = is_classical_qls(G, pi)
    v = decide_local_invariant(D)
    lines = [f"group {G}, pi = {list(pi.table)}",
             f"orthogonal rows and columns: {Q.is_orthogonal()}",
             f"classical square: {classical}",
             "characteristic matrix D (rows: output difference, columns: input difference):"]
    lines += _matrix_lines(D)
    lines.append(f"verdict: {v.summary()}")
    data = {"group": str(G), "pi": list(pi.table), "classical": classical,
            "D": D.to_json(), "verdict": v.status.value, "method": v.method}
    if v.status == Status.NONLOCAL:
        cert = v.certificate
        lines.append("separating functional on D (>= offset on every local D):")
        lines.append("  " + " + ".join(f"({c})*D[{a}][{b}]" for (a, b), c in sorted(cert.coefficients.items())))
        lines.append(f"  offset {cert.offset}, value {_fmt(cert.value)}")
        data["certificate"] = cert.to_json()
        if args.emit_certificate:
            lifted = cert.lift()
            with open(args.emit_certificate, "w") as fh:
                fh.write(lifted.dumps())
    if args.emit_correlation:
        with open(args.emit_correlation, "w") as fh:
            fh.write(Q.correlation().dumps())
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


# --------------------------------------------------------------------- k5-demo

def k5_demo_data() -> dict:
    from .locality import InvariantCertificate, decide_local
    from .qls import build_qls, characteristic_matrix

    G = AbelianGroup((5,))
    pi = DualPermutation([0, 1, 2, 4, 3])
    Q = build_qls(G, pi)
    D = characteristic_matrix(G, pi)
    # 2 q(0,2|0,2) + q(0,3|0,1) - q(0,4|0,4) >= 0, with q(0,a|0,b) = D[a][b] / 5
    ineq = InvariantCertificate(G, {(2, 2): Fraction(2, 5), (3, 1): Fraction(1, 5), (4, 4): Fraction(-1, 5)},
                                Fraction(0))
    value = ineq.evaluate(D)
    ineq.value = value
    target = (5 - 3 * sqrt5()) / 50
    p = Q.correlation()
    lifted = ineq.lift()
    lifted.value = lifted.evaluate(p)
    lp = decide_local(p)
    return {"group": G, "pi": pi, "qls": Q, "D": D, "inequality": ineq, "value": value,
            "target": target, "correlation": p, "lifted": lifted, "lp": lp}


def cmd_k5_demo(args) -> int:
    from .locality import CertificateFailure

    d = k5_demo_data()
    Q, D, p = d["qls"], d["D"], d["correlation"]
    ineq, value, lifted, lp = d["inequality"], d["value"], d["lifted"], d["lp"]
    sign = real_sign(value)
    lines = ["quantum Latin square over Z5, characters 3 and 4 exchanged",
             "entries psi'(a,b) as exponent vectors of zeta_5 (unit-modulus, unscaled):"]
    for a in range(5):
        lines.append("  " + "  ".join("(" + ",".join(str(int(k)) for k in Q.exponents[a, b]) + ")"
                                      for b in range(5)))
    lines.append("characteristic matrix D:")
    lines += _matrix_lines(D)
    lines.append(f"q(0,3|0,1) = {_fmt(p(0, 3, 0, 1))}")
    lines.append(f"q(0,2|0,2) = {_fmt(p(0, 2, 0, 2))}, q(0,4|0,4) = {_fmt(p(0, 4, 0, 4))}")
    lines.append("inequality 2 q(0,2|0,2) + q(0,3|0,1) - q(0,4|0,4) >= 0 on every local correlation "
                 f"(min over averaged deterministic matrices: {ineq.minimum()})")
    lines.append(f"value: {_fmt(value)}")
    lines.append(f"equals (5 - 3 sqrt 5)/50: {value == d['target']}")
    lines.append(f"sign: {sign.name}")
    ok_lift = lifted.verify(p)
    lines.append(f"lifted functional re-verified on all 120 deterministic S5 correlations: {ok_lift}")
    ok_lp = lp.certificate is not None and lp.certificate.verify(p)
    lines.append(f"LP verdict: {lp.summary()}; certificate re-verified: {ok_lp}")
    data = {"D": D.to_json(), "q_0301": str(p(0, 3, 0, 1)),
            "inequality": ineq.to_json(), "value": value.to_json() if hasattr(value, "to_json") else str(value),
            "value_approx": to_float(value), "sign": sign.name, "lifted_certificate": lifted.to_json(),
            "lp_certificate": lp.certificate.to_json() if lp.certificate else None}
    if not (ok_lift and ok_lp and sign == Sign.NEGATIVE and value == d["target"]):
        raise CertificateFailure("K5 witness failed re-verification")
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


# -------------------------------------------------------------------- k4-check

def _k4_inputs(args) -> list[tuple[str, Correlation]]:
    from .qls import orbit_representatives, qls_correlation

    if args.correlation:
        return [(args.correlation, Correlation.from_json(_load_json(args.correlation)))]
    if not args.group:
        raise UsageError("k4-check needs --correlation or --group")
    G = _group(args.group)
    if G.order != 4:
        raise NotB4(f"{G} does not have four elements")
    if args.uniform:
        return [("uniform over translations", uniform_group_correlation(G))]
    if args.perm:
        pi = _parse_perm(args.perm, 4)
        return [(f"q_{pi}", qls_correlation(G, DualPermutation(pi)))]
    import itertools

    seen, out = set(), []
    for pi in itertools.permutations(range(4)):
        q = qls_correlation(G, DualPermutation(list(pi)))
        key = q.tensor[2].tobytes()
        if key not in seen:
            seen.add(key)
            out.append((f"q_{list(pi)}", q))
    return out


def cmd_k4_check(args) -> int:
    from .k4 import k4_decide, slack_report
    from .locality import Status

    lines, data = [], []
    for label, p in _k4_inputs(args):
        slacks = slack_report(p)
        ineq, worst = min(slacks, key=lambda t: to_float(t[1]))
        v = k4_decide(p)
        lines.append(f"{label}: minimal slack {_fmt(worst)} at {ineq.label()}; {v.summary()}")
        entry = {"input": label, "min_slack": str(worst), "min_at": ineq.label(), "verdict": v.status.value}
        if v.status == Status.LOCAL:
            terms = sorted(v.decomposition.items())
            for pi, w in terms:
                lines.append(f"    {_fmt(w)} * p_{list(pi)}")
            entry["decomposition"] = [{"pi": list(pi), "weight": str(w)} for pi, w in terms]
        else:
            lines.append(f"    violated: {ineq.label()}")
            entry["certificate"] = v.certificate.to_json()
        data.append(entry)
    _emit(args, "\n".join(lines), {"results": data})
    return EXIT_OK


# ----------------------------------------------------------------------- graph

def _graph_from_args(args):
    from .graphs import named, parse_edge_list, parse_graph6

    if args.name:
        return named(args.name)
    if args.graph6:
        return parse_graph6(args.graph6, args.graph6)
    if args.edges:
        try:
            with open(args.edges) as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(str(exc)) from exc
        return parse_edge_list(text, os.path.basename(args.edges))
    raise UsageError("graph needs --name, --graph6, --edges or --corpus")


def cmd_graph(args) -> int:
    from .games import run_corpus, classify
    from .graphs import automorphisms

    if args.corpus:
        rows = run_corpus()
        ok = sum(r.matches for r in rows)
        lines = [r.line() for r in rows]
        lines.append(f"{ok}/{len(rows)} verdicts match; † = rests on a no-quantum-symmetry attestation")
        data = {"rows": [{"row": r.label, "graph": r.name, "expected": r.expected.value,
                          "result": r.result.to_json(), "match": r.matches, "seconds": r.seconds}
                         for r in rows], "matched": ok}
        _emit(args, "\n".join(lines), data)
        return EXIT_OK if ok == len(rows) else EXIT_INTERNAL
    g = _graph_from_args(args)
    lines = [f"{g.name or 'graph'}: n={g.n}, edges={g.num_edges}, graph6 {g.to_graph6()}"]
    data = {"graph": g.name, "graph6": g.to_graph6()}
    if args.automorphisms:
        auts = automorphisms(g)
        lines.append(f"|Aut| = {len(auts)}")
        data["automorphisms"] = len(auts)
    if args.classify or not args.automorphisms:
        res = classify(g)
        lines.append(res.line())
        if res.witness:
            lines.append(f"  witness: {res.witness}")
        for src in res.attestations:
            lines.append(f"  attestation: {src}")
        data["classification"] = res.to_json()
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


# --------------------------------------------------------------------- certify

def cmd_certify(args) -> int:
    from .locality import Certificate, CertificateFailure

    p = Correlation.from_json(_load_json(args.correlation))
    problems = validate(p)
    if problems:
        raise ParseError(f"input is not a bijective correlation: {problems[0]}")
    cert = Certificate.from_json(_load_json(args.certificate))
    if cert.labels != p.labels:
        raise ParseError("certificate and correlation use different labels")
    m = cert.minimum()
    v = cert.evaluate(p)
    ok = m >= cert.offset and (v < float(cert.offset) if isinstance(v, float)
                               else real_sign(v - cert.offset) == Sign.NEGATIVE)
    lines = [f"minimum over deterministic correlations: {m} (claimed {cert.offset})",
             f"value on correlation: {_fmt(v)}",
             "certificate verified" if ok else "certificate FAILED"]
    _emit(args, "\n".join(lines), {"minimum": str(m), "offset": str(cert.offset),
                                   "value": to_float(v), "verified": ok})
    if not ok:
        raise CertificateFailure("certificate failed exact re-verification")
    return EXIT_OK


# ------------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="JSON output")
    common.add_argument("--output", "-o", help="write output to a file")

    ap = _Parser(prog="nlsym", description="Quantum permutation correlations and their locality.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("survey", parents=[common], help="survey all character-table squares of a group")
    s.add_argument("--group", required=True, help="group literal, e.g. Z5 or Z2xZ4")
    s.add_argument("--extended", action="store_true", help="allow groups of order 7..10")
    s.add_argument("--workers", type=int, default=0, help="worker processes (default: logical cores)")
    s.add_argument("--verbose", "-v", action="store_true", help="list every orbit")
    s.add_argument("--progress", action="store_true")
    s.set_defaults(func=cmd_survey)

    s = sub.add_parser("qls", parents=[common], help="one character-table square")
    s.add_argument("--group", required=True)
    s.add_argument("--perm", required=True, help="permutation of the characters, e.g. 0,1,2,4,3")
    s.add_argument("--emit-certificate", help="write the correlation-space certificate here")
    s.add_argument("--emit-correlation", help="write the correlation here")
    s.set_defaults(func=cmd_qls)

    s = sub.add_parser("graph", parents=[common], help="classify a graph")
    sel = s.add_mutually_exclusive_group()
    sel.add_argument("--name", help="built-in name, e.g. 3K2, Q3, C10(4), K5xK2, petersen")
    sel.add_argument("--graph6")
    sel.add_argument("--edges", help="edge-list file: 'n m' then m lines 'u v'")
    sel.add_argument("--corpus", action="store_true", help="run the 12-row vertex-transitive corpus")
    s.add_argument("--classify", action="store_true")
    s.add_argument("--automorphisms", action="store_true")
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("k5-demo", parents=[common], help="the five-point nonlocal example")
    s.set_defaults(func=cmd_k5_demo)

    s = sub.add_parser("k4-check", parents=[common], help="the 144 four-point inequalities")
    s.add_argument("--correlation", help="correlation JSON file")
    s.add_argument("--group", help="Z4 or Z2xZ2")
    s.add_argument("--perm")
    s.add_argument("--uniform", action="store_true", help="uniform correlation over translations")
    s.set_defaults(func=cmd_k4_check)

    s = sub.add_parser("certify", parents=[common], help="re-verify a certificate against a correlation")
    s.add_argument("--correlation", required=True)
    s.add_argument("--certificate", required=True)
    s.set_defaults(func=cmd_certify)
    return ap


def main(argv=None) -> int:
    from .locality import CertificateFailure

    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"nlsym: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"nlsym: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundExceeded as exc:
        print(f"nlsym: bound exceeded: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except CertificateFailure as exc:
        print(f"nlsym: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except NlsymError as exc:
        print(f"nlsym: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"nlsym: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
