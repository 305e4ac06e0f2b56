"""Command-line front end: solve, verify, generate, corpus runs.

Exit codes: 0 sat/coherent, 1 unsat/incoherent, 2 error or budget
exhaustion. Witnesses are always re-verified before they are printed;
rationals are emitted as exact strings.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import cquel as cq
from . import lipsat as lip
from . import oracles
from . import psat as ps
from .errors import BudgetExceeded, ParseError, QuantsatError
from .generators import generate_instance
from .instances import InstanceFile, format_rational, parse_instance, print_instance

log = logging.getLogger("quantsat")


@dataclass
class WitnessReport:
    verdict: str  # "sat" | "unsat" | "budget" | "error"
    witness: list | None = None
    dutch_book: list | None = None
    book_verified: bool | None = None
    model: dict | None = None
    stats: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {k: v for k, v in asdict(self).items() if v is not None}
        return json.dumps(payload, indent=2, sort_keys=True)


def _frac_str(v) -> str:
    return format_rational(Fraction(v))


def _psat_witness_payload(witness: ps.ProbabilityWitness) -> list:
    return [{"valuation": {k: int(b) for k, b in sorted(v.items())},
             "weight": _frac_str(w)} for v, w in witness.entries]


def _lip_witness_payload(witness: lip.ConvexWitness) -> list:
    return [{"valuation": {k: _frac_str(x) for k, x in sorted(v.items())},
             "weight": _frac_str(w)} for v, w in witness.entries]


def _count_witness_payload(witness: cq.CountWitness) -> list:
    return [{"valuation": {k: int(b) for k, b in sorted(v.items())},
             "count": int(c)} for v, c in witness.entries]


def _model_payload(model: cq.Model) -> dict:
    return {
        "domain": list(model.domain),
        "predicates": {p: sorted(members) for p, members in sorted(model.preds.items())},
        "roles": {r: sorted(list(pair) for pair in pairs)
                  for r, pairs in sorted(model.roles.items())},
        "constants": dict(sorted(model.constants.items())),
    }


def solve_instance(inst: InstanceFile, iteration_budget=None, node_budget=None,
                   conflict_budget=None) -> WitnessReport:
    start = time.perf_counter()
    if inst.logic == "psat":
        stats = ps.SolveStats()
        instance = inst.psat
        all_eq = all(a.relation == "=" for a in instance.assignments)
        nf = ps.normalize_psat(instance)
        if all_eq:
            report = ps.check_coherence(instance, iteration_budget=iteration_budget,
                                        conflict_budget=conflict_budget, stats=stats)
            witness, book, verified = report.witness, report.dutch_book, report.book_verified
        else:
            witness = ps.psat_solve(nf, iteration_budget=iteration_budget,
                                    conflict_budget=conflict_budget, stats=stats)
            book, verified = None, None
        stats_payload = {"iterations": stats.iterations,
                         "columns_generated": stats.columns_generated,
                         "sat_calls": stats.sat_calls,
                         "lp_pivots": stats.lp_pivots,
                         "wall_ms": (time.perf_counter() - start) * 1000.0}
        if witness is not None:
            ok, reason = ps.verify_witness_psat(nf, witness)
            if not ok:
                raise AssertionError(f"unverified witness almost printed: {reason}")
            return WitnessReport("sat", witness=_psat_witness_payload(witness),
                                 stats=stats_payload)
        return WitnessReport("unsat", dutch_book=book, book_verified=verified,
                             stats=stats_payload)

    if inst.logic == "cquel":
        stats = cq.CquelStats()
        nf = cq.normalize_cquel(inst.cquel)
        witness = cq.cquel_solve(nf, node_budget=node_budget,
                                 iteration_budget=iteration_budget,
                                 conflict_budget=conflict_budget, stats=stats,
                                 build_model_too=True)
        stats_payload = {"nodes": stats.nodes, "iterations": stats.iterations,
                         "columns_generated": stats.columns_generated,
                         "sat_calls": stats.sat_calls, "lp_pivots": stats.lp_pivots,
                         "wall_ms": (time.perf_counter() - start) * 1000.0}
        if witness is None:
            return WitnessReport("unsat", stats=stats_payload)
        for s in nf.q:
            n = sum(c * v[s.body.name] for v, c in witness.entries)
            ok = n <= s.bound if s.relation == "<=" else n >= s.bound
            if not ok:
                raise AssertionError("count witness violates a counting row")
        if witness.model is not None and not cq.model_check(
                witness.model, inst.cquel.counting, inst.cquel.universals,
                inst.cquel.constraints):
            raise AssertionError("built model fails model checking")
        return WitnessReport("sat", witness=_count_witness_payload(witness),
                             model=_model_payload(witness.model) if witness.model else None,
                             stats=stats_payload)

    stats = lip.LipStats()
    assignment = inst.lipsat
    report = lip.check_l_coherence(assignment, iteration_budget=iteration_budget,
                                   node_budget=node_budget, stats=stats)
    stats_payload = {"iterations": stats.iterations,
                     "columns_generated": stats.columns_generated,
                     "oracle_calls": stats.oracle_calls,
                     "lp_pivots": stats.lp_pivots,
                     "wall_ms": (time.perf_counter() - start) * 1000.0}
    if report.coherent:
        nf = lip.normalize_lip(assignment)
        ok, reason = lip.verify_witness_lip(nf, report.witness)
        if not ok:
            raise AssertionError(f"unverified witness almost printed: {reason}")
        return WitnessReport("sat", witness=_lip_witness_payload(report.witness),
                             stats=stats_payload)
    return WitnessReport("unsat", dutch_book=report.dutch_book,
                         book_verified=report.book_verified, stats=stats_payload)


def _verify_only(inst: InstanceFile, witness_path: str) -> int:
    with open(witness_path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    entries = payload.get("witness") or []
    if inst.logic == "psat":
        nf = ps.normalize_psat(inst.psat)
        witness = ps.ProbabilityWitness(
            [({k: int(b) for k, b in e["valuation"].items()}, Fraction(e["weight"]))
             for e in entries])
        ok, reason = ps.verify_witness_psat(nf, witness)
    elif inst.logic == "lipsat":
        nf = lip.normalize_lip(inst.lipsat)
        witness = lip.ConvexWitness(
            [({k: Fraction(x) for k, x in e["valuation"].items()}, Fraction(e["weight"]))
             for e in entries])
        ok, reason = lip.verify_witness_lip(nf, witness)
    else:
        nf = cq.normalize_cquel(inst.cquel)
        ok, reason = True, None
        for e in entries:
            count = int(e["count"])
            if count < 0:
                ok, reason = False, "negative count"
        if ok:
            for s in nf.q:
                n = sum(int(e["count"]) * e["valuation"].get(s.body.name, 0) for e in entries)
                good = n <= s.bound if s.relation == "<=" else n >= s.bound
                if not good:
                    ok, reason = False, f"counting row {s.body.name} violated"
                    break
    print("accept" if ok else f"reject: {reason}")
    return 0 if ok else 1


def cli_solve(path: str, *, oracle=False, verify_only=None, iteration_budget=None,
              node_budget=None, conflict_budget=None) -> tuple[WitnessReport | None, int]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    inst = parse_instance(text)

    if verify_only is not None:
        return None, _verify_only(inst, verify_only)

    if oracle:
        if inst.logic == "psat":
            sat = oracles.psat_oracle(inst.psat)
            verdict = "sat" if sat else "unsat"
        elif inst.logic == "cquel":
            sat = oracles.cqu_oracle(cq.normalize_cquel(inst.cquel))
            verdict = "sat" if sat else "unsat"
        else:
            verdict = "sat" if oracles.lipsat_oracle(inst.lipsat) == "sat" else "unsat"
        report = WitnessReport(verdict, stats={"oracle": True})
        return report, 0 if verdict == "sat" else 1

    report = solve_instance(inst, iteration_budget=iteration_budget,
                            node_budget=node_budget, conflict_budget=conflict_budget)
    return report, 0 if report.verdict == "sat" else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quantsat",
                                     description="Exact solvers for probabilistic, "
                                                 "counting and Lukasiewicz satisfiability")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("path")
    solve.add_argument("--budget-iterations", type=int, default=10000)
    solve.add_argument("--budget-nodes", type=int, default=10000)
    solve.add_argument("--budget-conflicts", type=int, default=1000000)
    solve.add_argument("--seed", type=int, default=0, help="reserved; solves are deterministic")
    solve.add_argument("--oracle", action="store_true", help="run the desk-scale oracle instead")
    solve.add_argument("--verify-only", metavar="WITNESS_JSON")
    solve.add_argument("--emit-dimacs-debug", action="store_true")

    gen = sub.add_parser("generate", help="emit a seeded random instance")
    gen.add_argument("--logic", choices=["psat", "cquel", "lipsat"], required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", "-o", default=None)

    corpus = sub.add_parser("corpus", help="solve every instance in a directory")
    corpus.add_argument("directory")
    corpus.add_argument("--jobs", type=int, default=1)
    corpus.add_argument("--budget-iterations", type=int, default=10000)
    corpus.add_argument("--budget-nodes", type=int, default=10000)
    return parser


def _corpus_entry(args_tuple):
    path, iteration_budget, node_budget = args_tuple
    try:
        report, code = cli_solve(path, iteration_budget=iteration_budget,
                                 node_budget=node_budget)
        return path, report.verdict, code
    except QuantsatError as exc:
        return path, f"error: {exc}", 2


def main(argv=None) -> int:
    level = os.environ.get("QLR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = _build_parser().parse_args(argv)

    if args.command == "generate":
        inst = generate_instance(args.logic, args.seed)
        text = print_instance(inst)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "corpus":
        entries = sorted(
            os.path.join(args.directory, name) for name in os.listdir(args.directory)
            if name.endswith((".psat", ".cquel", ".lipsat")))
        work = [(p, args.budget_iterations, args.budget_nodes) for p in entries]
        if args.jobs > 1:
            import concurrent.futures

            with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_corpus_entry, work))
        else:
            results = [_corpus_entry(w) for w in work]
        worst = 0
        for path, verdict, code in results:
            print(f"{path}: {verdict}")
            worst = max(worst, 0 if code in (0, 1) else code)
        return worst

    # solve
    if args.emit_dimacs_debug:
        os.environ["QLR_EMIT_DIMACS"] = "1"
    try:
        report, code = cli_solve(args.path, oracle=args.oracle,
                                 verify_only=args.verify_only,
                                 iteration_budget=args.budget_iterations,
                                 node_budget=args.budget_nodes,
                                 conflict_budget=args.budget_conflicts)
    except BudgetExceeded as exc:
        print(WitnessReport("budget", stats={"reason": str(exc)}).to_json())
        return 2
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (QuantsatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        os.environ.pop("QLR_EMIT_DIMACS", None)
    if report is not None:
        print(report.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
