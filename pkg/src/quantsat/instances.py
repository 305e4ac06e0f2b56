"""Instance file formats for the three logics.

Line-oriented, one header then one sentence per line:

    logic psat
    gamma x1 | x2
    prob x1 <= 0.15            # rational as num/den or exact decimal

    logic cquel
    count <= 15 g & (m | h)    # body may be any formula; normalized later
    forall g -> p
    ia p -> some parentOf      # basics: name | some r | some inv r
    ia some parentOf -> p      # concepts: [!]basic & [!]basic & ...
    funct parentOf
    funct inv parentOf
    fact p(ann)
    fact parentOf(ann,bob)

    logic lipsat
    gamma x1 (+) x2
    prob x1 = 3/5

Blank lines and '#' comments are ignored. parse/print round-trip
structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cquel import (CountingSentence, Fact, Functionality, Inclusion, RawCquel,
                    RoleFact, exists, pred)
from .errors import ParseError
from .formulas import SymbolTable, Var, format_formula, parse_formula
from .lipsat import LipAssignment
from .luka import format_luka, parse_luka
from .psat import PsatAssignment, PsatInstance


@dataclass
class InstanceFile:
    logic: str  # "psat" | "cquel" | "lipsat"
    psat: PsatInstance | None = None
    cquel: RawCquel | None = None
    lipsat: LipAssignment | None = None


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}: {exc}") from None


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def _split_relation(rest: str, line_no: int):
    for rel in ("<=", ">=", "="):
        idx = rest.rfind(f" {rel} ")
        if idx >= 0:
            return rest[:idx], rel, rest[idx + len(rel) + 2:]
    raise ParseError("expected one of <=, >=, = in assignment", line=line_no)


def _parse_basic(text: str, line_no: int):
    words = text.split()
    if not words:
        raise ParseError("empty basic concept", line=line_no)
    if words[0] == "some":
        if len(words) == 2:
            return exists(words[1])
        if len(words) == 3 and words[1] == "inv":
            return exists(words[2], inverse=True)
        raise ParseError(f"bad existential {text!r}", line=line_no)
    if len(words) != 1:
        raise ParseError(f"bad basic concept {text!r}", line=line_no)
    return pred(words[0])


def _parse_concept(text: str, line_no: int):
    literals = []
    for part in text.split("&"):
        part = part.strip()
        negated = part.startswith("!")
        if negated:
            part = part[1:].strip()
        literals.append((negated, _parse_basic(part, line_no)))
    return tuple(literals)


def _parse_fact(rest: str, line_no: int):
    rest = rest.strip()
    if "(" not in rest or not rest.endswith(")"):
        raise ParseError(f"bad fact {rest!r}", line=line_no)
    name, args_text = rest[:-1].split("(", 1)
    args = [a.strip() for a in args_text.split(",")]
    if len(args) == 1:
        return Fact(name.strip(), args[0])
    if len(args) == 2:
        return RoleFact(name.strip(), args[0], args[1])
    raise ParseError("facts are unary or binary", line=line_no)


def parse_instance(text: str) -> InstanceFile:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line))
    if not lines:
        raise ParseError("empty instance file")
    number, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "logic" or parts[1] not in ("psat", "cquel", "lipsat"):
        raise ParseError("expected header 'logic psat|cquel|lipsat'", line=number)
    logic = parts[1]
    body = lines[1:]

    if logic == "psat":
        symbols = SymbolTable()
        assignments = []
        for number, line in body:
            if line.startswith("gamma "):
                f = parse_formula(line[len("gamma "):], symbols)
                assignments.append(PsatAssignment(f, "=", Fraction(1)))
            elif line.startswith("prob "):
                lhs, rel, rhs = _split_relation(line[len("prob "):], number)
                f = parse_formula(lhs, symbols)
                assignments.append(PsatAssignment(f, rel, parse_rational(rhs)))
            else:
                raise ParseError(f"unknown psat line {line!r}", line=number)
        return InstanceFile("psat", psat=PsatInstance(assignments, symbols))

    if logic == "cquel":
        counting, universals, constraints = [], [], []
        for number, line in body:
            if line.startswith("count "):
                rest = line[len("count "):].strip()
                words = rest.split(None, 2)
                if len(words) != 3 or words[0] not in ("<=", ">="):
                    raise ParseError("expected 'count <=|>= <n> <body>'", line=number)
                try:
                    bound = int(words[1])
                except ValueError:
                    raise ParseError(f"bad count bound {words[1]!r}", line=number) from None
                counting.append(CountingSentence(words[0], bound, parse_formula(words[2])))
            elif line.startswith("forall "):
                universals.append(parse_formula(line[len("forall "):]))
            elif line.startswith("ia "):
                rest = line[len("ia "):]
                if "->" not in rest:
                    raise ParseError("inclusion needs '->'", line=number)
                lhs, rhs = rest.split("->", 1)
                constraints.append(Inclusion(_parse_basic(lhs.strip(), number),
                                             _parse_concept(rhs.strip(), number)))
            elif line.startswith("funct "):
                words = line.split()
                if len(words) == 2:
                    constraints.append(Functionality(words[1]))
                elif len(words) == 3 and words[1] == "inv":
                    constraints.append(Functionality(words[2], inverse=True))
                else:
                    raise ParseError("expected 'funct [inv] <role>'", line=number)
            elif line.startswith("fact "):
                constraints.append(_parse_fact(line[len("fact "):], number))
            else:
                raise ParseError(f"unknown cquel line {line!r}", line=number)
        return InstanceFile("cquel", cquel=RawCquel(counting, universals, constraints))

    entries = []
    for number, line in body:
        if line.startswith("gamma "):
            entries.append((parse_luka(line[len("gamma "):]), Fraction(1)))
        elif line.startswith("prob "):
            rest = line[len("prob "):]
            idx = rest.rfind(" = ")
            if idx < 0:
                raise ParseError("expected 'prob <formula> = <rational>'", line=number)
            entries.append((parse_luka(rest[:idx]), parse_rational(rest[idx + 3:])))
        else:
            raise ParseError(f"unknown lipsat line {line!r}", line=number)
    return InstanceFile("lipsat", lipsat=LipAssignment(entries))


def _format_basic(basic) -> str:
    if basic[0] == "pred":
        return basic[1]
    _, role, inverse = basic
    return f"some inv {role}" if inverse else f"some {role}"


def _format_concept(concept) -> str:
    parts = []
    for negated, basic in concept:
        parts.append(("!" if negated else "") + _format_basic(basic))
    return " & ".join(parts)


def print_instance(inst: InstanceFile) -> str:
    lines = [f"logic {inst.logic}"]
    if inst.logic == "psat":
        for a in inst.psat.assignments:
            if a.relation == "=" and a.value == 1:
                lines.append(f"gamma {format_formula(a.formula)}")
            else:
                lines.append(f"prob {format_formula(a.formula)} {a.relation} "
                             f"{format_rational(a.value)}")
    elif inst.logic == "cquel":
        for s in inst.cquel.counting:
            lines.append(f"count {s.relation} {s.bound} {format_formula(s.body)}")
        for f in inst.cquel.universals:
            lines.append(f"forall {format_formula(f)}")
        for c in inst.cquel.constraints:
            if isinstance(c, Inclusion):
                lines.append(f"ia {_format_basic(c.lhs)} -> {_format_concept(c.rhs)}")
            elif isinstance(c, Functionality):
                lines.append(f"funct {'inv ' if c.inverse else ''}{c.role}")
            elif isinstance(c, Fact):
                lines.append(f"fact {c.predicate}({c.constant})")
            else:
                lines.append(f"fact {c.role}({c.source},{c.target})")
    else:
        for f, q in inst.lipsat.entries:
            if q == 1:
                lines.append(f"gamma {format_luka(f)}")
            else:
                lines.append(f"prob {format_luka(f)} = {format_rational(q)}")
    return "\n".join(lines) + "\n"
