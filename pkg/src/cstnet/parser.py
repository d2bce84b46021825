"""Reader and writer for the ``.crn`` reaction network text format.

One reaction per line, ``#`` starts a comment::

    2 X1 + X2 -> 3 X1
    X1 <-> 0 ; k=2, k=3      # forward rate first

A complex is ``0`` or ``term + term + ...`` where a term is an optional
positive integer coefficient followed by a species name. Rates are exact
rationals written as integers, fractions (``3/2``) or decimals (``1.5``).
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from .network import Complex, NetworkError, Reaction, ReactionNetwork, format_complex

SPECIES_RE = re.compile(r"[A-Za-z_Δ][A-Za-z0-9_*^'Δ]*")
_COEFF_RE = re.compile(r"[0-9]+")
_RATE_RE = re.compile(r"k\s*=\s*([^,;\s]+)")


class ParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


def parse_rate(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        value = Fraction(int(num), int(den))
    else:
        value = Fraction(Decimal(text))
    if value <= 0:
        raise ValueError(f"rate must be positive, got {text}")
    return value


def format_rate(rate: Fraction) -> str:
    return str(rate.numerator) if rate.denominator == 1 else f"{rate.numerator}/{rate.denominator}"


class _LineParser:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, message: str, pos: int | None = None) -> ParseError:
        return ParseError(self.lineno, (self.pos if pos is None else pos) + 1, message)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r":
            self.pos += 1

    def peek(self, token: str) -> bool:
        self.skip_ws()
        return self.text.startswith(token, self.pos)

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def complex(self) -> Complex:
        self.skip_ws()
        start = self.pos
        m = _COEFF_RE.match(self.text, self.pos)
        if m and m.group() == "0":
            after = m.end()
            rest = self.text[after:].lstrip(" \t")
            if not SPECIES_RE.match(rest):
                self.pos = after
                return Complex()
        terms: list[tuple[str, int]] = []
        while True:
            terms.append(self.term())
            if not self.peek("+"):
                break
            self.pos += 1
        names = [n for n, _ in terms]
        if len(set(names)) != len(names):
            raise self.error("species repeated within a complex", start)
        return Complex(terms)

    def term(self) -> tuple[str, int]:
        self.skip_ws()
        coeff = 1
        m = _COEFF_RE.match(self.text, self.pos)
        if m:
            coeff = int(m.group())
            if coeff == 0:
                raise self.error("zero coefficient")
            self.pos = m.end()
            self.skip_ws()
        m = SPECIES_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected species name")
        self.pos = m.end()
        return m.group(), coeff

    def arrow(self) -> bool:
        self.skip_ws()
        if self.text.startswith("<->", self.pos):
            self.pos += 3
            return True
        if self.text.startswith("->", self.pos):
            self.pos += 2
            return False
        raise self.error("expected '->' or '<->'")

    def rates(self) -> list[Fraction]:
        if not self.peek(";"):
            return []
        self.pos += 1
        rates = []
        while True:
            self.skip_ws()
            m = _RATE_RE.match(self.text, self.pos)
            if not m:
                raise self.error("expected 'k=<rate>'")
            try:
                rates.append(parse_rate(m.group(1)))
            except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
                raise self.error(f"bad rate {m.group(1)!r}: {exc}", m.start(1)) from None
            self.pos = m.end()
            if not self.peek(","):
                break
            self.pos += 1
        return rates


def parse_reactions(text: str) -> list[Reaction]:
    reactions: list[Reaction] = []
    seen: set = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        p = _LineParser(line, lineno)
        source = p.complex()
        reversible = p.arrow()
        arrow_end = p.pos
        target = p.complex()
        rates = p.rates()
        if not p.at_end():
            raise p.error(f"unexpected text {p.text[p.pos:].strip()!r}")
        allowed = (0, 2) if reversible else (0, 1)
        if len(rates) not in allowed:
            kind = "reversible" if reversible else "irreversible"
            raise ParseError(lineno, arrow_end, f"{kind} reaction takes {allowed[1]} rate(s), got {len(rates)}")
        pairs = [(source, target)] + ([(target, source)] if reversible else [])
        for i, (src, tgt) in enumerate(pairs):
            if src == tgt:
                raise ParseError(lineno, 1, "trivial reaction (source equals target)")
            if (src, tgt) in seen:
                raise ParseError(lineno, 1, f"duplicate reaction {src} -> {tgt}")
            seen.add((src, tgt))
            try:
                reactions.append(Reaction(src, tgt, rates[i] if rates else None))
            except NetworkError as exc:
                raise ParseError(lineno, 1, str(exc)) from None
    return reactions


def parse_network(text: str) -> ReactionNetwork:
    return ReactionNetwork(parse_reactions(text))


def load_network(path: str | Path) -> ReactionNetwork:
    return parse_network(Path(path).read_text(encoding="utf-8"))


def format_reaction(net: ReactionNetwork, r: Reaction) -> str:
    line = f"{format_complex(r.source, net.species)} -> {format_complex(r.target, net.species)}"
    if r.rate is not None:
        line += f"; k={format_rate(r.rate)}"
    return line


def format_network(net: ReactionNetwork) -> str:
    return "\n".join(format_reaction(net, r) for r in net.reactions)


def save_network(net: ReactionNetwork, path: str | Path) -> None:
    Path(path).write_text(format_network(net) + "\n", encoding="utf-8")
