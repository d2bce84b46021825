"""Command-line interface: ``cstnet {parse,analyze,lift,witness,simulate,embed}``.

Exit codes: 0 success, 1 verification failure, 2 input or recognition
failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from .cst import Multistationarity, NotCst, classify_cst, recognize_cst
from .dynamics import DynamicsError, StiffnessError, simulate
from .inheritance import EmbeddingSpec, InheritanceError, embed_network, load_plan, verify_lifting_plan
from .injectivity import injective_mass_action
from .network import NetworkError
from .parser import ParseError, format_network, load_network
from .report import (
    SCHEMA_VERSION,
    AnalysisReport,
    analyze_network,
    build_evidence,
    certificate_dict,
    dumps,
    network_dict,
    q,
    witness_dict,
)
from .witness import DeterminantCertificate, TwoStateWitness, WitnessError, verify_certificate, verify_two_state_witness

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _color_enabled(stream) -> bool:
    if os.environ.get("CRN_COLOR") == "0":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


class _Style:
    def __init__(self, stream):
        self.on = _color_enabled(stream)

    def _wrap(self, code: str, text: str) -> str:
        return f"\033[{code}m{text}\033[0m" if self.on else text

    def good(self, text):
        return self._wrap("32", text)

    def bad(self, text):
        return self._wrap("31", text)

    def bold(self, text):
        return self._wrap("1", text)


def _load(path: str):
    try:
        return load_network(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except NetworkError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _numbers(text: str, what: str) -> list[Fraction]:
    try:
        return [Fraction(t) for t in text.replace(",", " ").split()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad {what} {text!r}: {exc}") from exc


# -- parse ------------------------------------------------------------------


def cmd_parse(args, out) -> int:
    net = _load(args.file)
    if args.json:
        out.write(dumps({"schema": SCHEMA_VERSION, "command": "parse", "network": network_dict(net)}) + "\n")
    else:
        out.write(format_network(net) + "\n")
    return EXIT_OK


# -- analyze ----------------------------------------------------------------


def _describe_verdict(report: AnalysisReport, style: _Style) -> list[str]:
    v = report.verdict
    m = v.multistationary
    if m is Multistationarity.YES:
        head = style.good(f"multistationary ({v.rule_fired.value})")
    elif m is Multistationarity.NO:
        head = f"not multistationary ({v.rule_fired.value})"
    elif m is Multistationarity.UNKNOWN:
        head = f"multistationarity undecided ({v.rule_fired.value})"
    else:
        head = f"multistationarity not applicable ({v.rule_fired.value})"
    ev = report.evidence
    if isinstance(ev, DeterminantCertificate):
        d = ",".join(q(x) for x in ev.d)
        ok = "verified" if verify_certificate(ev) else style.bad("FAILED")
        head += f"; certificate: D1=diag({d}), ε={q(ev.epsilon)} ({ok})"
    elif isinstance(ev, TwoStateWitness):
        rep = verify_two_state_witness(ev)
        ok = "verified" if rep.ok else style.bad("FAILED")
        kind = "exact" if ev.exact else "numeric"
        head += f"; witness: two {kind} steady states at x1=1 and x1=2 ({ok})"
    elif report.evidence_error:
        head += f"; evidence: {style.bad(report.evidence_error)}"
    return [head]


def analysis_text(report: AnalysisReport, style: _Style) -> str:
    net = report.network
    lines = []
    if report.source:
        lines.append(style.bold(report.source))
    d = network_dict(net)
    lines.append(
        f"  {net.n_species} species, {net.n_reactions} reactions, {d['openness']['tag']}, "
        f"rank {d['rank']}, deficiency {d['deficiency']}"
    )
    ma, gen = report.mass_action, report.general
    lines.append(f"  injective (mass-action): {ma.injective}")
    lines.append(f"  injective (general kinetics): {gen.injective}{'' if gen.exact else ' (sufficient test only)'}")
    st = report.structure
    if st is None:
        lines.append(f"  not a CST network: {report.not_cst_reason}")
    else:
        kinds = "".join(k.value for k in st.kinds)
        lines.append(
            f"  CST cycle ({' -> '.join(st.species)}), kinds {kinds}, a={list(st.a)}, b={list(st.b)}, "
            f"s={st.s}, prod a={st.prod_a}, prod b={st.prod_b}"
        )
        lines.extend("  " + s for s in _describe_verdict(report, style))
        if not report.consistent:
            lines.append("  " + style.bad("classifier disagrees with the injectivity test"))
    return "\n".join(lines)


def _analyze_one(path: str):
    try:
        net = _load(path)
    except InputError as exc:
        return path, None, str(exc)
    return path, analyze_network(net, source=path), None


def _evidence_ok(report: AnalysisReport) -> bool:
    ev = report.evidence
    if isinstance(ev, DeterminantCertificate):
        return verify_certificate(ev)
    if isinstance(ev, TwoStateWitness):
        return verify_two_state_witness(ev).ok
    return report.evidence_error is None


def cmd_analyze(args, out) -> int:
    style = _Style(out)
    if args.batch:
        root = Path(args.batch)
        if not root.is_dir():
            raise InputError(f"{root}: not a directory")
        paths = sorted(str(p) for p in root.rglob("*.crn"))
        if not paths:
            raise InputError(f"{root}: no .crn files")
    elif args.file:
        paths = [args.file]
    else:
        raise InputError("analyze needs a FILE or --batch DIR")

    if len(paths) == 1:
        results = [_analyze_one(paths[0])]
    else:
        # map preserves input order, so output is deterministic
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_analyze_one, paths))

    code = EXIT_OK
    docs = []
    for path, report, err in results:
        if err is not None:
            if not args.batch:
                raise InputError(err)
            print(f"error: {err}", file=sys.stderr)
            code = max(code, EXIT_INPUT)
            continue
        if args.require_cst and report.structure is None:
            print(f"error: {path}: not a CST network: {report.not_cst_reason}", file=sys.stderr)
            code = max(code, EXIT_INPUT)
        elif not (report.consistent and _evidence_ok(report)):
            code = max(code, EXIT_VERIFY)
        if args.json:
            docs.append(report.to_dict())
        else:
            out.write(analysis_text(report, style) + "\n")
    if args.json:
        payload = docs if args.batch else (docs[0] if docs else None)
        if payload is not None:
            out.write(dumps(payload) + "\n")
    return code


# -- witness ----------------------------------------------------------------


def cmd_witness(args, out) -> int:
    net = _load(args.file)
    try:
        st = recognize_cst(net)
    except NotCst as exc:
        raise InputError(f"{args.file}: not a CST network: {exc.reason}") from exc
    verdict = classify_cst(st)
    if verdict.multistationary is not Multistationarity.YES:
        raise InputError(
            f"{args.file}: no multistationarity evidence to build "
            f"(verdict {verdict.multistationary.value}, {verdict.rule_fired.value})"
        )
    try:
        ev = build_evidence(st, verdict)
    except WitnessError as exc:
        raise InputError(f"{args.file}: {exc}") from exc
    if isinstance(ev, TwoStateWitness):
        doc = witness_dict(ev)
        ok = doc["verified"]
    else:
        doc = certificate_dict(ev)
        ok = doc["verified"]
    doc = {"schema": SCHEMA_VERSION, "command": "witness", "source": args.file, "evidence": doc}
    if args.json:
        out.write(dumps(doc) + "\n")
    else:
        ev_doc = doc["evidence"]
        if ev_doc["type"] == "two-state-witness":
            out.write(f"two-state witness ({'exact' if ev_doc['exact'] else 'numeric'}, "
                      f"{'verified' if ok else 'FAILED'})\n")
            for line in ev_doc["reactions"]:
                out.write(f"  {line}\n")
            out.write(f"  species: {', '.join(ev_doc['species'])}\n")
            out.write(f"  state a: ({', '.join(ev_doc['state_a'])})\n")
            out.write(f"  state b: ({', '.join(ev_doc['state_b'])})\n")
            if ev_doc["failures"]:
                out.write("  failures: " + "; ".join(ev_doc["failures"]) + "\n")
        else:
            out.write(f"determinant certificate ({'verified' if ok else 'FAILED'})\n")
            out.write(f"  cycle: {' -> '.join(ev_doc['cycle'])}\n")
            out.write(f"  D1 = diag({', '.join(ev_doc['d'])}), epsilon = {ev_doc['epsilon']} "
                      f"after {ev_doc['halvings']} halvings\n")
            out.write(f"  det(G D G_l^T) = {ev_doc['det_value']}\n")
            out.write(f"  row sums = ({', '.join(ev_doc['row_sums'])})\n")
    return EXIT_OK if ok else EXIT_VERIFY


# -- lift -------------------------------------------------------------------


def cmd_lift(args, out) -> int:
    try:
        plan = load_plan(args.plan)
    except OSError as exc:
        raise InputError(f"{args.plan}: {exc.strerror or exc}") from exc
    except (ParseError, InheritanceError, NetworkError) as exc:
        raise InputError(f"{args.plan}: {exc}") from exc
    report = verify_lifting_plan(plan)
    style = _Style(out)
    if args.json:
        doc = {
            "schema": SCHEMA_VERSION,
            "command": "lift",
            "source": args.plan,
            "ok": report.ok,
            "matches_target": report.matches_target,
            "failed_step": report.failed_step,
            "seed_nondegenerate": report.seed_nondegenerate,
            "seed_assessment": report.seed_assessment,
            "conclusion": report.conclusion,
            "steps": [
                {"index": s.index, "step": s.step, "ok": s.ok, "message": s.message,
                 "n_species": s.n_species, "n_reactions": s.n_reactions}
                for s in report.steps
            ],
            "messages": report.messages,
        }
        out.write(dumps(doc) + "\n")
    else:
        for s in report.steps:
            mark = style.good("ok") if s.ok else style.bad("FAIL")
            tail = f": {s.message}" if s.message else ""
            out.write(f"  [{mark}] step {s.index}: {s.step} ({s.n_species} species, {s.n_reactions} reactions){tail}\n")
        for m in report.messages:
            out.write(f"  {m}\n")
        if report.seed_assessment:
            out.write(f"  {report.seed_assessment}\n")
        if report.ok:
            out.write(style.good("success") + (f": {report.conclusion}" if report.conclusion else "") + "\n")
        else:
            where = f" at step {report.failed_step}" if report.failed_step else ""
            out.write(style.bad(f"failure{where}") + "\n")
    return EXIT_OK if report.ok else EXIT_VERIFY


# -- simulate ---------------------------------------------------------------


def cmd_simulate(args, out) -> int:
    net = _load(args.file)
    if args.rates is not None:
        rates = _numbers(args.rates, "rates")
    else:
        rates = net.rates()
        if any(r is None for r in rates):
            raise InputError(f"{args.file}: some reactions have no rate; pass --rates")
    x0 = _numbers(args.x0, "initial state")
    if any(v < 0 for v in x0):
        raise InputError("initial state entries must be nonnegative")
    try:
        traj = simulate(net, [float(r) for r in rates], [float(v) for v in x0], args.t_end, rel_tol=args.tol)
    except StiffnessError as exc:
        print(f"error: integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DynamicsError as exc:
        raise InputError(str(exc)) from exc
    csv_text = traj.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        out.write(csv_text)
    if args.plot:
        _plot(traj, args.plot)
    drift = max(traj.conservation_drift, default=0.0)
    print(f"{traj.n_steps} steps, {traj.n_rejected} rejected, {traj.n_clipped} clipped, "
          f"max conservation drift {drift:.3g}", file=sys.stderr)
    return EXIT_OK


def _plot(traj, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for i, name in enumerate(traj.species):
        ax.plot(traj.times, traj.states[:, i], label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("concentration")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# -- embed ------------------------------------------------------------------


def _indices(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        idx = [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"bad reaction indices {text!r}") from exc
    if any(i < 1 for i in idx):
        raise InputError("reaction indices are 1-based")
    return [i - 1 for i in idx]


def cmd_embed(args, out) -> int:
    net = _load(args.file)
    species = [s for s in (args.remove_species or "").replace(",", " ").split() if s]
    spec = EmbeddingSpec(species, _indices(args.remove_reactions))
    try:
        sub = embed_network(net, spec)
    except (InheritanceError, NetworkError) as exc:
        raise InputError(str(exc)) from exc
    if args.json:
        verdict = injective_mass_action(sub)
        doc = {
            "schema": SCHEMA_VERSION,
            "command": "embed",
            "source": args.file,
            "network": network_dict(sub),
            "injective_mass_action": verdict.injective,
        }
        out.write(dumps(doc) + "\n")
    else:
        out.write(format_network(sub) + "\n")
    return EXIT_OK


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cstnet", description="Analyze cyclic sequestration-transmutation networks.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="parse a .crn file and print it in canonical form")
    sp.add_argument("file")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("analyze", help="injectivity and multistationarity verdicts")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--require-cst", action="store_true", help="exit 2 if the network is not a CST network")
    sp.add_argument("--batch", metavar="DIR", help="analyze every .crn file under DIR")
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("lift", help="verify a lifting plan")
    sp.add_argument("plan")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_lift)

    sp = sub.add_parser("witness", help="build and check multistationarity evidence")
    sp.add_argument("file")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("simulate", help="integrate the mass-action ODE and write CSV")
    sp.add_argument("file")
    sp.add_argument("--rates", help="rate constants, comma separated (default: rates in the file)")
    sp.add_argument("--x0", required=True, help="initial state, comma separated, in species order")
    sp.add_argument("--t-end", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-6, help="relative tolerance (default 1e-6)")
    sp.add_argument("--out", help="write CSV here instead of stdout")
    sp.add_argument("--plot", metavar="IMAGE", help="also save a plot (PNG, SVG, PDF)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("embed", help="remove species and reactions")
    sp.add_argument("file")
    sp.add_argument("--remove-species", metavar="NAMES")
    sp.add_argument("--remove-reactions", metavar="INDICES", help="1-based reaction indices")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_embed)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are input errors
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
