"""Command-line driver: ``markovcs <command> <system file> [flags]``.

A system file argument is a path or ``bundled:<name>``. Every command prints
a short table to stdout and, with ``--report PATH``, writes a ``report-v1``
JSON file whose bytes depend only on the command line.

Exit codes: 0 success, 2 certification failure, 3 not a recognizer,
4 invalid input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .dfa import dfa_equiv, format_dfa, minimize_dfa
from .doeblin import (
    THETA_GRID,
    certify_quasi_compact,
    first_contracting_m,
    quasi_compact_bound,
    scan_condition_d,
)
from .ergodicity import NotCertifiedError, certify_weak_ergodicity, d0_certificate, dobrushin_pair
from .errors import BudgetExceededError, MCSError, NotARecognizerError, UnknownSymbolError
from .extraction import (
    ExtractionLimitError,
    definite_language_table,
    definite_order,
    extract_dfa,
    operator_cover,
    orbit_cover,
)
from .measures import WORD_BUDGET, compose_word, word_distribution
from .recognition import classify, enumerate_classify, format_oracle, min_slack
from .stability import collapse_perturbation, perturb, stability_margin, verify_stability

EXIT_OK, EXIT_CERT, EXIT_NOT_RECOGNIZER, EXIT_INVALID = 0, 2, 3, 4


class Outcome:
    """What a command produced: report payload, stdout rows and exit code."""

    def __init__(self, payload: dict, rows: list, code: int = EXIT_OK, files: dict | None = None):
        self.payload = payload
        self.rows = rows
        self.code = code
        self.files = files or {}


def _word(raw: str) -> str:
    return "" if raw in ("ε", "eps") else raw


def _show(w: str) -> str:
    return w if w else "ε"


def _source(args, sf) -> dict:
    return {"file": args.file, "name": sf.name, "alphabet": sf.system.alphabet, "n": sf.system.n}


def cmd_simulate(args, sf) -> Outcome:
    T, rec = sf.system, sf.recognizer
    w = _word(args.word)
    mu = word_distribution(T, w)
    c = classify(rec, mu, w)
    payload = {
        "source": _source(args, sf),
        "word": w,
        "distribution": mu.mass,
        "verdict": c.verdict,
        "margin": c.margin,
    }
    if mu.exact is not None:
        payload["distribution_exact"] = [io.format_number(v) for v in mu.exact]
    rows = [("word", _show(w)), ("distribution", " ".join(repr(float(x)) for x in mu.mass)),
            ("verdict", c.verdict.value), ("margin", repr(c.margin))]
    return Outcome(payload, rows)


def cmd_dobrushin(args, sf) -> Outcome:
    T = sf.system
    targets = [_word(args.word)] if args.word is not None else list(T.alphabet)
    entries = {}
    rows = []
    for w in targets:
        P = compose_word(T, w)
        d, x, y = dobrushin_pair(P)
        c = d0_certificate(P)
        entries[w] = {"delta": d, "pair": [x, y], "c_star": c.c_star}
        rows.append((f"delta({_show(w)})", f"{d!r}  rows {x},{y}  c_star {c.c_star!r}"))
    return Outcome({"source": _source(args, sf), "words": entries}, rows)


def _cert_failure(exc: NotCertifiedError) -> dict:
    return {"certified": False, "reason": str(exc), "witness": exc.witness,
            "value": exc.value, "r": exc.r}


def cmd_certify_ergodic(args, sf) -> Outcome:
    try:
        c = certify_weak_ergodicity(sf.system, args.rmax, budget=args.budget)
    except NotCertifiedError as exc:
        return Outcome({"source": _source(args, sf), **_cert_failure(exc)},
                       [("certified", "no"), ("witness", _show(exc.witness)),
                        ("delta", repr(exc.value))], EXIT_CERT)
    payload = {"source": _source(args, sf), "certified": True, "r": c.r,
               "delta_bar": c.delta_bar, "witness": c.witness}
    return Outcome(payload, [("certified", "yes"), ("r", c.r), ("delta_bar", repr(c.delta_bar)),
                             ("witness", _show(c.witness))])


def cmd_certify_doeblin(args, sf) -> Outcome:
    T = sf.system
    thetas = tuple(args.theta_grid) if args.theta_grid else THETA_GRID
    table = {a: dict(scan_condition_d(T.operators[a], thetas=thetas)) for a in T.alphabet}
    holding = [t for t in thetas if all(table[a][t] > 0 for a in T.alphabet)]
    best = None
    for t in holding:
        eta = min(table[a][t] for a in T.alphabet)
        m = first_contracting_m(eta)
        delta = 1.0 - quasi_compact_bound(m, eta)
        if best is None or delta > best["delta"]:
            best = {"theta": t, "eta": eta, "m": m, "delta": delta}
    payload = {
        "source": _source(args, sf),
        "thetas": list(thetas),
        "eta": {a: [table[a][t] for t in thetas] for a in T.alphabet},
        "holds_at": holding,
        "best": best,
        "certified": bool(holding),
    }
    rows = [(f"eta({a})", " ".join(f"{table[a][t]:.6g}" for t in thetas)) for a in T.alphabet]
    rows.append(("holds at theta", " ".join(str(t) for t in holding) or "none"))
    if best:
        rows.append(("best theta", f"{best['theta']} (eta {best['eta']:.6g}, m {best['m']}, "
                                   f"delta {best['delta']:.6g})"))
    return Outcome(payload, rows, EXIT_OK if holding else EXIT_CERT)


def cmd_certify_quasicompact(args, sf) -> Outcome:
    try:
        c = certify_quasi_compact(sf.system, n_compose=args.n, theta=args.theta, budget=args.budget)
    except NotCertifiedError as exc:
        return Outcome({"source": _source(args, sf), **_cert_failure(exc)},
                       [("certified", "no"), ("witness", _show(exc.witness))], EXIT_CERT)
    payload = {"source": _source(args, sf), "certified": True, **vars(c)}
    rows = [("certified", "yes"), ("eta", repr(c.eta)), ("m", c.m), ("r", c.r),
            ("delta", repr(c.delta)), ("worst word", _show(c.worst_word))]
    return Outcome(payload, rows)


def _oracle_check(M, dfa, horizon: int, budget) -> tuple[int, str | None]:
    result = enumerate_classify(M, horizon, budget=budget)
    bad = [w for w, v in result.items() if dfa.accepts(w) != (v.value == "Accept")]
    return len(bad), (bad[0] if bad else None)


def _dfa_outcome(args, sf, d, extra: dict) -> Outcome:
    M = sf.mcs
    minimal = minimize_dfa(d)
    payload = {"source": _source(args, sf), "states": d.n_states,
               "minimal_states": minimal.n_states, "dfa": format_dfa(d),
               "representatives": list(d.representatives), **extra}
    rows = [("states", d.n_states), ("minimal states", minimal.n_states)]
    rows += [(k, v) for k, v in extra.items()]
    code = EXIT_OK
    if args.oracle_horizon:
        mism, witness = _oracle_check(M, d, args.oracle_horizon, args.budget)
        payload["oracle"] = {"horizon": args.oracle_horizon, "mismatches": mism, "witness": witness}
        rows.append((f"oracle mismatches (<= {args.oracle_horizon})", mism))
        if mism:
            code = EXIT_CERT
    files = {args.out: format_dfa(d)} if args.out else {}
    return Outcome(payload, rows, code, files)


def cmd_extract_dfa(args, sf) -> Outcome:
    try:
        d = extract_dfa(sf.mcs, args.radius, max_states=args.max_states)
    except ExtractionLimitError as exc:
        return Outcome({"source": _source(args, sf), "extracted": False, "reason": str(exc),
                        "states": exc.n_states, "witness": exc.frontier_word},
                       [("extracted", "no"), ("reason", str(exc))], EXIT_CERT)
    return _dfa_outcome(args, sf, d, {"merge_radius": d.merge_radius, "gap": sf.mcs.gap})


def cmd_extract_definite(args, sf) -> Outcome:
    try:
        c = definite_order(sf.mcs, args.rmax, budget=args.budget)
    except NotCertifiedError as exc:
        return Outcome({"source": _source(args, sf), **_cert_failure(exc)},
                       [("certified", "no"), ("witness", _show(exc.witness))], EXIT_CERT)
    d = definite_language_table(sf.mcs, c)
    out = _dfa_outcome(args, sf, d, {"r_star": c.r_star, "worst_delta": c.worst_delta,
                                     "gap": c.gap})
    if args.compare:
        cex = dfa_equiv(d, extract_dfa(sf.mcs))
        out.payload["equal_to_rabin"] = cex is None
        out.payload["counterexample"] = cex
        out.rows.append(("equal to rabin extraction", "yes" if cex is None else f"no ({_show(cex)})"))
        if cex is not None:
            out.code = EXIT_CERT
    return out


def cmd_stability(args, sf) -> Outcome:
    M = sf.mcs
    beta = float(M.recognizer.isolation) if args.beta is None else args.beta
    seed = sf.default_seed if args.seed is None else args.seed
    try:
        margin = stability_margin(M, beta, args.rmax, budget=args.budget)
    except NotCertifiedError as exc:
        return Outcome({"source": _source(args, sf), "beta": beta, **_cert_failure(exc)},
                       [("certified", "no"), ("witness", _show(exc.witness))], EXIT_CERT)
    trials = []
    for i in range(args.trials):
        Tp = perturb(M.system, margin.epsilon, seed=[seed, i], mode=args.mode)
        rep = verify_stability(M, Tp, args.horizon, beta=beta, r=margin.r,
                               extract=not args.no_extract, budget=args.budget)
        trials.append({"trial": i, "ok": rep.ok, "letter_distance": rep.letter_distance,
                       "max_word_distance": rep.max_word_distance,
                       "worst_word": rep.worst_word,
                       "length_chain_violations": rep.length_chain_violations,
                       "suffix_chain_violations": rep.suffix_chain_violations,
                       "transfer_violations": rep.transfer_violations,
                       "disagreements": rep.disagreements,
                       "disagreement_witness": rep.disagreement_witness,
                       "dfa_equal": rep.dfa_equal,
                       "perturbed_certificate": rep.perturbed_certificate})
    failed = [t["trial"] for t in trials if not t["ok"]]
    payload = {
        "source": _source(args, sf),
        "beta": beta, "r": margin.r, "epsilon": margin.epsilon,
        "worst_delta": margin.worst_delta, "seed": seed, "mode": args.mode,
        "horizon": args.horizon, "trials": trials, "failed_trials": failed,
        "max_word_distance": max((t["max_word_distance"] for t in trials), default=0.0),
    }
    rows = [("beta", repr(beta)), ("r", margin.r), ("epsilon", repr(margin.epsilon)),
            ("trials", args.trials), ("max word distance", repr(payload["max_word_distance"])),
            ("failed trials", len(failed))]
    if args.adversarial:
        cell = M.recognizer.accepting[0] if args.adversarial == "accept" else next(
            x for x in range(M.system.n) if x not in M.recognizer.accepting)
        rep = verify_stability(M, collapse_perturbation(M.system, cell), args.horizon,
                               beta=beta, extract=False, budget=args.budget)
        payload["adversarial"] = {"cell": cell, "letter_distance": rep.letter_distance,
                                  "disagreements": rep.disagreements,
                                  "witness": rep.disagreement_witness}
        rows.append(("adversarial disagreements", rep.disagreements))
    return Outcome(payload, rows, EXIT_CERT if failed else EXIT_OK)


def _cover_outcome(args, sf, rep) -> Outcome:
    payload = {"source": _source(args, sf), "epsilon": rep.epsilon,
               "counts": {str(k): v for k, v in rep.counts.items()},
               "stabilized_at": rep.stabilized_at, "points": rep.n_points,
               "center_words": list(rep.center_words)}
    rows = [("epsilon", repr(rep.epsilon)),
            ("counts", " ".join(str(rep.counts[k]) for k in sorted(rep.counts))),
            ("stabilized at", rep.stabilized_at)]
    return Outcome(payload, rows)


def _epsilon(args, sf) -> float:
    return sf.mcs.gap / 4 if args.epsilon is None else args.epsilon


def cmd_orbit(args, sf) -> Outcome:
    return _cover_outcome(args, sf, orbit_cover(sf.mcs, _epsilon(args, sf), args.maxlen,
                                                budget=args.budget))


def cmd_opcover(args, sf) -> Outcome:
    return _cover_outcome(args, sf, operator_cover(sf.mcs, _epsilon(args, sf), args.maxlen,
                                                   budget=args.budget))


def cmd_oracle(args, sf) -> Outcome:
    M = sf.mcs
    result = enumerate_classify(M, args.maxlen, exact=args.exact, strict=False, budget=args.budget)
    und = result.undecided()
    counts = {v: sum(1 for x in result.verdicts.values() if x.value == v)
              for v in ("Accept", "Reject", "Undecided")}
    payload = {"source": _source(args, sf), "maxlen": args.maxlen, "exact": args.exact,
               "words": len(result), "counts": counts, "undecided_witness": und[0] if und else None}
    rows = [("words", len(result))] + [(k.lower(), v) for k, v in counts.items()]
    if not und:
        slack, where = min_slack(M, result)
        payload["min_slack"] = slack
        payload["tightest_word"] = where
        rows.append(("min slack", f"{slack!r} at {_show(where)}"))
    if args.exact:
        floats = enumerate_classify(M, args.maxlen, strict=False, budget=args.budget)
        mism = [w for w in result if result[w] != floats[w]]
        payload["float_mismatches"] = len(mism)
        payload["float_mismatch_witness"] = mism[0] if mism else None
        rows.append(("exact/float mismatches", len(mism)))
    files = {args.out: format_oracle(result)} if args.out else {}
    code = EXIT_OK
    if und:
        rows.append(("undecided witness", _show(und[0])))
        code = EXIT_NOT_RECOGNIZER
    return Outcome(payload, rows, code, files)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="markovcs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, parent=sub, **kw):
        sp = parent.add_parser(name, **kw)
        sp.add_argument("file", help="system file path or bundled:<name>")
        sp.add_argument("--report", help="write the report-v1 JSON here")
        sp.add_argument("--budget", type=int, default=WORD_BUDGET,
                        help="maximum number of enumerated words")
        sp.set_defaults(func=func)
        return sp

    sp = add("simulate", cmd_simulate, help="distribution and verdict after one word")
    sp.add_argument("--word", required=True)
    sp = add("dobrushin", cmd_dobrushin, help="Dobrushin coefficient per letter or word")
    sp.add_argument("--word")

    cert = sub.add_parser("certify", help="ergodicity and compactness certificates")
    csub = cert.add_subparsers(dest="what", required=True)
    sp = add("ergodic", cmd_certify_ergodic, csub)
    sp.add_argument("--rmax", type=int, default=8)
    sp = add("doeblin", cmd_certify_doeblin, csub)
    sp.add_argument("--theta-grid", type=float, nargs="*",
                    help="theta values to scan (default 0.1 ... 0.9)")
    sp = add("quasicompact", cmd_certify_quasicompact, csub)
    sp.add_argument("--n", type=int, default=1, help="block length of composed words")
    sp.add_argument("--theta", type=float, default=0.5)

    ext = sub.add_parser("extract", help="automaton extraction")
    esub = ext.add_subparsers(dest="what", required=True)
    sp = add("dfa", cmd_extract_dfa, esub)
    sp.add_argument("--radius", type=float, help="merge radius (default gap/2)")
    sp.add_argument("--max-states", type=int, default=10_000)
    sp.add_argument("--oracle-horizon", type=int, default=0)
    sp.add_argument("--out", help="write the DFA text here")
    sp = add("definite", cmd_extract_definite, esub)
    sp.add_argument("--rmax", type=int, default=8)
    sp.add_argument("--oracle-horizon", type=int, default=0)
    sp.add_argument("--compare", action="store_true",
                    help="also check equivalence with the distance-merging extraction")
    sp.add_argument("--out")

    sp = add("stability", cmd_stability, help="random perturbations inside the stability margin")
    sp.add_argument("--beta", type=float, help="allowed word drift (default: the isolation)")
    sp.add_argument("--rmax", type=int, default=10)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--horizon", type=int, default=12)
    sp.add_argument("--mode", choices=("dense", "sparse"), default="dense")
    sp.add_argument("--no-extract", action="store_true")
    sp.add_argument("--adversarial", choices=("accept", "reject"),
                    help="also collapse every letter onto an accepting or rejecting cell")

    for name, func, what in (("orbit", cmd_orbit, "reachable distributions"),
                             ("opcover", cmd_opcover, "word operators")):
        sp = add(name, func, help=f"greedy epsilon-net of the {what}")
        sp.add_argument("--epsilon", type=float, help="default: gap/4")
        sp.add_argument("--maxlen", type=int, default=8)

    sp = add("oracle", cmd_oracle, help="classify every word up to a length")
    sp.add_argument("--maxlen", type=int, default=8)
    sp.add_argument("--exact", action="store_true", help="rational arithmetic")
    sp.add_argument("--out", help="write '<word> <verdict> <margin>' lines here")
    return p


def _print_rows(rows, out):
    width = max((len(str(k)) for k, _ in rows), default=0)
    for k, v in rows:
        print(f"{str(k):<{width}}  {v}", file=out)


def run(argv=None, out=None) -> int:
    """Parse ``argv``, run the command and return its exit code."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    command = args.command + (f" {args.what}" if hasattr(args, "what") else "")
    try:
        sf = io.load_system(args.file)
        outcome = args.func(args, sf)
    except NotARecognizerError as exc:
        outcome = Outcome({"error": str(exc), "witness": exc.witness, "margin": exc.margin},
                          [("error", str(exc))], EXIT_NOT_RECOGNIZER)
    except (io.SystemFileError, UnknownSymbolError, BudgetExceededError, ValueError) as exc:
        outcome = Outcome({"error": str(exc)}, [("error", str(exc))], EXIT_INVALID)
    except MCSError as exc:
        outcome = Outcome({"error": str(exc)}, [("error", str(exc))], EXIT_CERT)
    outcome.payload["exit_code"] = outcome.code
    _print_rows([("command", command)] + outcome.rows, out)
    for path, text in outcome.files.items():
        Path(path).write_text(text, encoding="utf-8")
    if args.report:
        Path(args.report).write_text(io.dumps_report(command, outcome.payload), encoding="utf-8")
    return outcome.code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
