"""Seeded random instance generation for corpus tests and the CLI.

Everything is driven by random.Random(seed): identical seeds and parameters
reproduce identical instance files bit for bit.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .cquel import CountingSentence, RawCquel
from .formulas import And, Iff, Implies, Not, Or, SymbolTable, Var
from .instances import InstanceFile
from .lipsat import LipAssignment
from .luka import LNot, LVar, OPlus, OTimes
from .psat import PsatAssignment, PsatInstance


def _random_clause(rng: random.Random, names, width=3):
    picks = rng.sample(names, min(width, len(names)))
    literals = [Var(p) if rng.random() < 0.5 else Not(Var(p)) for p in picks]
    clause = literals[0]
    for lit in literals[1:]:
        clause = Or(clause, lit)
    return clause


def _random_rational(rng: random.Random, max_den=8) -> Fraction:
    den = rng.randint(2, max_den)
    num = rng.randint(1, den - 1)
    return Fraction(num, den)


def generate_psat(seed: int, symbols: int = 4, assignments: int = 3,
                  clauses: int = 2, composite: bool = False) -> InstanceFile:
    """Gamma as random 3-clauses, probability rows on atoms (or small
    composites when asked) with bounded-denominator values."""
    rng = random.Random(("psat", seed).__repr__())
    names = [f"x{i + 1}" for i in range(symbols)]
    table = SymbolTable(names)
    out = []
    for _ in range(clauses):
        out.append(PsatAssignment(_random_clause(rng, names), "=", Fraction(1)))
    for _ in range(assignments):
        if composite and rng.random() < 0.5:
            f = _random_clause(rng, names, width=2)
        else:
            f = Var(rng.choice(names))
        rel = rng.choice(["=", "<=", ">="])
        out.append(PsatAssignment(f, rel, _random_rational(rng)))
    return InstanceFile("psat", psat=PsatInstance(out, table))


def _random_body(rng: random.Random, names, depth=2):
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice(names))
    op = rng.choice(["and", "or", "not", "implies"])
    if op == "not":
        return Not(_random_body(rng, names, depth - 1))
    left = _random_body(rng, names, depth - 1)
    right = _random_body(rng, names, depth - 1)
    return {"and": And, "or": Or, "implies": Implies}[op](left, right)


def generate_cquel(seed: int, counting: int = 3, preds: int = 3,
                   max_bound: int = 4, universals: int = 1,
                   composite: bool = False) -> InstanceFile:
    """Counting rows with uniform bounds; optional universal glue clauses."""
    rng = random.Random(("cquel", seed).__repr__())
    names = [f"p{i + 1}" for i in range(preds)]
    rows = []
    for _ in range(counting):
        body = _random_body(rng, names, 2) if composite and rng.random() < 0.5 \
            else Var(rng.choice(names))
        rows.append(CountingSentence(rng.choice(["<=", ">="]), rng.randint(0, max_bound), body))
    glue = [_random_clause(rng, names, width=2) for _ in range(universals)]
    return InstanceFile("cquel", cquel=RawCquel(rows, glue, []))


def _random_luka(rng: random.Random, names, depth=2):
    if depth == 0 or rng.random() < 0.35:
        return LVar(rng.choice(names))
    # disjunction-heavy mix keeps a healthy satisfiable share
    op = rng.choices(["oplus", "otimes", "not"], weights=[6, 2, 2])[0]
    if op == "not":
        return LNot(_random_luka(rng, names, depth - 1))
    left = _random_luka(rng, names, depth - 1)
    right = _random_luka(rng, names, depth - 1)
    return (OPlus if op == "oplus" else OTimes)(left, right)


def generate_lipsat(seed: int, symbols: int = 2, assignments: int = 2,
                    gammas: int = 1, max_den: int = 6, depth: int = 2) -> InstanceFile:
    """Certainty formulas over (+)/(*)/~ with bounded depth, atomic values
    with denominators bounded by the grid oracle's limit."""
    rng = random.Random(("lipsat", seed).__repr__())
    names = [f"x{i + 1}" for i in range(symbols)]
    entries = []
    for _ in range(gammas):
        entries.append((_random_luka(rng, names, depth), Fraction(1)))
    targets = rng.sample(names, min(assignments, len(names)))
    for name in targets:
        den = rng.randint(2, max_den)
        num = rng.randint(1, den - 1)
        entries.append((LVar(name), Fraction(num, den)))
    return InstanceFile("lipsat", lipsat=LipAssignment(entries))


def generate_instance(logic: str, seed: int, **params) -> InstanceFile:
    if logic == "psat":
        return generate_psat(seed, **params)
    if logic == "cquel":
        return generate_cquel(seed, **params)
    if logic == "lipsat":
        return generate_lipsat(seed, **params)
    raise ValueError(f"unknown logic {logic!r}")
