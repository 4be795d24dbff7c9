"""Exact differential polynomial ring in the fields b_i, c_i.

Elements are polynomials over Q in the generators b_1, c_1, b_2, c_2, ... and
their derivatives of arbitrary order with respect to one distinguished
variable.  The representation is sparse and canonical:

  FieldVar  = (kind, index, dorder)        one generator, e.g. b_1'' = ('b', 1, 2)
  Monomial  = tuple of (FieldVar, exp)     sorted, exponents >= 1
  DiffPoly  = {Monomial: Fraction}         no zero coefficients stored

Two polynomials are equal iff their term tables are identical, so equality,
hashing of monomials and deterministic printing all come for free.  All
coefficients are fractions.Fraction; nothing in this module ever touches a
float.

Besides ring arithmetic the module provides the distinguished derivation
(Leibniz rule, raising dorder), substitution of dorder-0 generators (extended
to derivatives so that substitution commutes with the derivation), the
variational (Euler) derivative, and formal integration of total derivatives.

A small extension used only by the CLI's substitution files: generator kinds
other than 'b'/'c' are allowed.  A kind made of letters only (e.g. 'e') is a
constant symbol killed by the derivation; a kind containing digits (e.g.
'b1s') is an ordinary differentiable placeholder field.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple


class NotATotalDerivative(Exception):
    """Raised by formal_integrate when the argument has no antiderivative."""


class FieldVar(NamedTuple):
    """A single generator: field kind, field index, derivative order."""

    kind: str
    index: int
    dorder: int = 0

    def derived(self, times: int = 1) -> "FieldVar":
        return FieldVar(self.kind, self.index, self.dorder + times)

    def base(self) -> "FieldVar":
        return FieldVar(self.kind, self.index, 0)

    def is_constant_symbol(self) -> bool:
        # Letters-only kinds other than b/c are constants for the derivation.
        return self.kind not in ("b", "c") and self.kind.isalpha()

    def __str__(self) -> str:
        return f"{self.kind}{self.index if self.kind in ('b', 'c') else ''}" + "'" * self.dorder


Monomial = Tuple[Tuple[FieldVar, int], ...]
Terms = Dict[Monomial, Fraction]

_ONE: Monomial = ()
_FRAC_ZERO = Fraction(0)


def _is_sorted(mono: Monomial) -> bool:
    return all(mono[i][0] < mono[i + 1][0] for i in range(len(mono) - 1))


def _normalize_mono(mono: Monomial) -> Monomial:
    acc: Dict[FieldVar, int] = {}
    for v, e in mono:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    acc: Dict[FieldVar, int] = dict(m1)
    for v, e in m2:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


class DiffPoly:
    """Immutable sparse differential polynomial with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, Fraction]] = None):
        tab: Terms = {}
        if terms:
            for mono, coeff in terms.items():
                c = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
                if not c:
                    continue
                if any(e < 1 for _, e in mono):
                    raise ValueError("monomial exponents must be >= 1")
                key = mono if _is_sorted(mono) else _normalize_mono(mono)
                acc = tab.get(key, _FRAC_ZERO) + c
                if acc:
                    tab[key] = acc
                else:
                    tab.pop(key, None)
        self.terms = tab

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "DiffPoly":
        return _ZERO

    @staticmethod
    def const(value) -> "DiffPoly":
        c = Fraction(value)
        return DiffPoly({_ONE: c}) if c else _ZERO

    @staticmethod
    def var(kind: str, index: int, dorder: int = 0) -> "DiffPoly":
        return DiffPoly({((FieldVar(kind, index, dorder), 1),): Fraction(1)})

    @staticmethod
    def from_var(v: FieldVar) -> "DiffPoly":
        return DiffPoly({((v, 1),): Fraction(1)})

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get(_ONE, Fraction(0))

    def variables(self) -> List[FieldVar]:
        """All generators occurring, sorted by the canonical ordering."""
        seen = {v for mono in self.terms for v, _ in mono}
        return sorted(seen)

    def generators(self) -> List[FieldVar]:
        """Distinct (kind, index) pairs occurring, as dorder-0 FieldVars."""
        seen = {v.base() for mono in self.terms for v, _ in mono}
        return sorted(seen)

    def max_dorder(self) -> int:
        return max((v.dorder for mono in self.terms for v, _ in mono), default=0)

    def total_degree(self) -> int:
        return max((sum(e for _, e in mono) for mono in self.terms), default=0)

    # -- ring arithmetic ----------------------------------------------------

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        tab = dict(self.terms)
        for mono, c in other.terms.items():
            s = tab.get(mono)
            if s is None:
                tab[mono] = c
            else:
                s = s + c
                if s:
                    tab[mono] = s
                else:
                    del tab[mono]
        out = DiffPoly.__new__(DiffPoly)
        out.terms = tab
        return out

    def __neg__(self) -> "DiffPoly":
        out = DiffPoly.__new__(DiffPoly)
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        return self + (-other)

    def __mul__(self, other: "DiffPoly") -> "DiffPoly":
        if not self.terms or not other.terms:
            return _ZERO
        tab: Terms = {}
        items2 = list(other.terms.items())
        for m1, c1 in self.terms.items():
            for m2, c2 in items2:
                mono = _mono_mul(m1, m2)
                c = tab.get(mono)
                c = c1 * c2 if c is None else c + c1 * c2
                if c:
                    tab[mono] = c
                elif mono in tab:
                    del tab[mono]
        out = DiffPoly.__new__(DiffPoly)
        out.terms = tab
        return out

    def scale(self, s) -> "DiffPoly":
        s = Fraction(s)
        if not s:
            return _ZERO
        out = DiffPoly.__new__(DiffPoly)
        out.terms = {m: c * s for m, c in self.terms.items()}
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, DiffPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"DiffPoly({self.to_text()})"

    def __str__(self) -> str:
        return self.to_text()

    # -- calculus -----------------------------------------------------------

    def derive(self, times: int = 1) -> "DiffPoly":
        """Distinguished derivation, applied `times` times (Leibniz rule)."""
        p = self
        for _ in range(times):
            tab: Terms = {}
            for mono, coeff in p.terms.items():
                for v, e in mono:
                    if v.is_constant_symbol():
                        continue
                    # d(v^e * rest) -> e * v^(e-1) * v' * rest
                    factors = dict(mono)
                    if e == 1:
                        del factors[v]
                    else:
                        factors[v] = e - 1
                    dv = v.derived()
                    factors[dv] = factors.get(dv, 0) + 1
                    m2 = tuple(sorted(factors.items()))
                    c = tab.get(m2, Fraction(0)) + coeff * e
                    if c:
                        tab[m2] = c
                    elif m2 in tab:
                        del tab[m2]
            q = DiffPoly.__new__(DiffPoly)
            q.terms = tab
            p = q
        return p

    def partial(self, v: FieldVar) -> "DiffPoly":
        """Plain partial derivative with respect to one generator v."""
        tab: Terms = {}
        for mono, coeff in self.terms.items():
            for w, e in mono:
                if w == v:
                    factors = dict(mono)
                    if e == 1:
                        del factors[w]
                    else:
                        factors[w] = e - 1
                    m2 = tuple(sorted(factors.items()))
                    c = tab.get(m2, Fraction(0)) + coeff * e
                    if c:
                        tab[m2] = c
                    elif m2 in tab:
                        del tab[m2]
                    break
        return DiffPoly(tab)

    def substitute(self, rules: Mapping[FieldVar, "DiffPoly"]) -> "DiffPoly":
        """Replace dorder-0 generators by polynomials.

        An occurrence at derivative order l is replaced by the l-th derivative
        of the rule, so substitution commutes with the derivation.  Generators
        without a rule are untouched.
        """
        base_rules: Dict[Tuple[str, int], DiffPoly] = {}
        for v, rhs in rules.items():
            if v.dorder != 0:
                raise ValueError(f"substitution rules must target dorder-0 generators, got {v}")
            base_rules[(v.kind, v.index)] = rhs
        if not base_rules:
            return self
        deriv_cache: Dict[Tuple[str, int, int], DiffPoly] = {}

        def rule_at(kind: str, index: int, dorder: int) -> DiffPoly:
            key = (kind, index, dorder)
            hit = deriv_cache.get(key)
            if hit is None:
                if dorder == 0:
                    hit = base_rules[(kind, index)]
                else:
                    hit = rule_at(kind, index, dorder - 1).derive()
                deriv_cache[key] = hit
            return hit

        result = _ZERO
        for mono, coeff in self.terms.items():
            plain: List[Tuple[FieldVar, int]] = []
            replaced: List[Tuple[DiffPoly, int]] = []
            for v, e in mono:
                if (v.kind, v.index) in base_rules:
                    replaced.append((rule_at(v.kind, v.index, v.dorder), e))
                else:
                    plain.append((v, e))
            term = DiffPoly({tuple(plain): coeff})
            for rhs, e in replaced:
                for _ in range(e):
                    term = term * rhs
            result = result + term
        return result

    def euler(self, target: FieldVar) -> "DiffPoly":
        """Variational derivative: sum_l (-d)^l of d(self)/d(target^(l))."""
        if target.dorder != 0:
            raise ValueError("euler target must be a dorder-0 generator")
        out = _ZERO
        sign = 1
        for order in range(self.max_dorder() + 1):
            part = self.partial(FieldVar(target.kind, target.index, order))
            if not part.is_zero():
                out = out + part.derive(order).scale(sign)
            sign = -sign
        return out

    # -- output --------------------------------------------------------------

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda it: it[0])

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        pieces: List[str] = []
        for mono, coeff in self.sorted_terms():
            body = _mono_text(mono)
            mag = abs(coeff)
            if body:
                frag = body if mag == 1 else f"{mag}*{body}"
            else:
                frag = str(mag)
            if not pieces:
                pieces.append(frag if coeff > 0 else f"-{frag}")
            else:
                pieces.append(("+ " if coeff > 0 else "- ") + frag)
        return " ".join(pieces)

    def to_latex(self) -> str:
        if not self.terms:
            return "0"
        pieces: List[str] = []
        for mono, coeff in self.sorted_terms():
            body = " ".join(_var_latex(v, e) for v, e in mono)
            mag = abs(coeff)
            if body:
                frag = body if mag == 1 else f"{_frac_latex(mag)} {body}"
            else:
                frag = _frac_latex(mag)
            if not pieces:
                pieces.append(frag if coeff > 0 else f"-{frag}")
            else:
                pieces.append(("+ " if coeff > 0 else "- ") + frag)
        return " ".join(pieces)

    def to_json(self) -> List[dict]:
        return [
            {
                "coeff": str(coeff),
                "vars": [
                    {"kind": v.kind, "index": v.index, "dorder": v.dorder, "exp": e}
                    for v, e in mono
                ],
            }
            for mono, coeff in self.sorted_terms()
        ]

    @staticmethod
    def from_json(data: Iterable[dict]) -> "DiffPoly":
        tab: Terms = {}
        for term in data:
            mono = tuple(
                sorted(
                    (FieldVar(v["kind"], v["index"], v["dorder"]), v["exp"])
                    for v in term["vars"]
                )
            )
            tab[mono] = tab.get(mono, Fraction(0)) + Fraction(term["coeff"])
        return DiffPoly(tab)


_ZERO = DiffPoly.__new__(DiffPoly)
_ZERO.terms = {}


def _mono_text(mono: Monomial) -> str:
    return "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in mono)


def _var_latex(v: FieldVar, e: int) -> str:
    if v.kind in ("b", "c"):
        core = f"{v.kind}_{{{v.index}}}" + "'" * v.dorder
    else:
        core = rf"\mathrm{{{v.kind}}}" + "'" * v.dorder
    return core if e == 1 else f"{{{core}}}^{{{e}}}"


def _frac_latex(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    return rf"{sign}\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"


# -- functional aliases -------------------------------------------------------


def dp_arith(lhs: DiffPoly, rhs: DiffPoly, op: str) -> DiffPoly:
    """Ring operation dispatch: op is 'add' or 'mul'."""
    if op == "add":
        return lhs + rhs
    if op == "mul":
        return lhs * rhs
    raise ValueError(f"unknown op {op!r}")


def dp_scale(p: DiffPoly, s) -> DiffPoly:
    return p.scale(s)


def dp_derive(p: DiffPoly, times: int = 1) -> DiffPoly:
    return p.derive(times)


def dp_substitute(p: DiffPoly, rules: Mapping[FieldVar, DiffPoly]) -> DiffPoly:
    return p.substitute(rules)


def euler_derivative(p: DiffPoly, target: FieldVar) -> DiffPoly:
    return p.euler(target)


def equal_mod_total_derivative(p: DiffPoly, q: DiffPoly) -> bool:
    """True iff p - q has vanishing Euler derivatives for every generator."""
    d = p - q
    return all(d.euler(u).is_zero() for u in d.generators() if not u.is_constant_symbol())


def formal_integrate(p: DiffPoly) -> DiffPoly:
    """Antiderivative q with dq = p and zero constant term.

    Works by peeling the leading monomial: the generator of highest derivative
    order in the lexicographically largest term of an exact p always occurs
    linearly, and lowering it by one order reconstructs one term of q.  The
    Euler-operator precondition guarantees termination.
    """
    for u in p.generators():
        if not u.is_constant_symbol() and not p.euler(u).is_zero():
            raise NotATotalDerivative(f"euler derivative with respect to {u} does not vanish")
    rem = p
    result = _ZERO
    while not rem.is_zero():
        mono, coeff = max(rem.terms.items(), key=lambda it: _peel_key(it[0]))
        if not mono:
            raise NotATotalDerivative("nonzero constant term has no antiderivative")
        top = max((v for v, _ in mono), key=lambda v: (v.dorder, v.kind, v.index))
        if top.dorder == 0 or top.is_constant_symbol():
            raise NotATotalDerivative(f"term {_mono_text(mono) or '1'} cannot be integrated")
        factors = dict(mono)
        if factors[top] != 1:
            raise NotATotalDerivative(f"leading derivative {top} occurs nonlinearly")
        del factors[top]
        low = top.derived(-1)
        mult = factors.get(low, 0) + 1
        factors[low] = mult
        piece = DiffPoly({tuple(sorted(factors.items())): coeff / mult})
        result = result + piece
        rem = rem - piece.derive()
    return result


def _peel_key(mono: Monomial):
    # Sorted-descending sequence of generator keys, exponent-expanded: the
    # derivation maps the maximal monomial of q to the maximal monomial of dq.
    seq = []
    for v, e in mono:
        seq.extend([(v.dorder, v.kind, v.index)] * e)
    seq.sort(reverse=True)
    return seq


# -- text grammar --------------------------------------------------------------
#
#   rational := ['-'] digits ['/' digits]
#   fieldvar := ('b'|'c') index {'\''}      (each apostrophe = one derivative)
#   monomial := fieldvar ['^' exp] {'*' fieldvar ['^' exp]}
#   term     := rational ['*' monomial] | monomial
#   poly     := ['-'] term {('+'|'-') term}
#
# Extra symbols (CLI substitution files) follow the fieldvar syntax with a
# general identifier in place of ('b'|'c') index.

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>[A-Za-z][A-Za-z0-9]*'*)|(?P<op>[-+*^()]))")
_STDVAR = re.compile(r"^([bc])([1-9][0-9]*)('*)$")
_EXTVAR = re.compile(r"^([A-Za-z][A-Za-z0-9]*?)('*)$")


class PolyParseError(ValueError):
    pass


def parse_fieldvar(token: str) -> FieldVar:
    m = _STDVAR.match(token)
    if m:
        return FieldVar(m.group(1), int(m.group(2)), len(m.group(3)))
    m = _EXTVAR.match(token)
    if m:
        name, primes = m.group(1), m.group(2)
        if name in ("b", "c") or (name[0] in ("b", "c") and name[1:].isdigit()):
            raise PolyParseError(f"standard field {name!r} needs an index >= 1")
        v = FieldVar(name, 0, len(primes))
        if v.is_constant_symbol() and v.dorder:
            raise PolyParseError(f"constant symbol {name!r} cannot carry derivatives")
        return v
    raise PolyParseError(f"bad field variable {token!r}")


def parse_poly(text: str) -> DiffPoly:
    """Parse the canonical text grammar back into a DiffPoly."""
    tokens = _tokenize(text)
    pos = 0
    total = _ZERO
    sign = 1
    first = True
    pending_sign = False
    while pos < len(tokens):
        kind, value = tokens[pos]
        if kind == "op" and value in "+-":
            if pending_sign:
                raise PolyParseError("two consecutive signs")
            sign = sign if value == "+" else -sign
            pending_sign = True
            pos += 1
            continue
        term, pos = _parse_term(tokens, pos)
        total = total + (term if sign > 0 else -term)
        sign = 1
        pending_sign = False
        first = False
    if first or pending_sign:
        raise PolyParseError("empty polynomial text" if first else "dangling sign")
    return total


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise PolyParseError(f"cannot tokenize {text[pos:]!r}")
            break
        if m.group("num"):
            tokens.append(("num", m.group("num")))
        elif m.group("var"):
            tokens.append(("var", m.group("var")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


def _parse_term(tokens, pos):
    coeff = Fraction(1)
    factors: Dict[FieldVar, int] = {}
    expect_factor = True
    while pos < len(tokens):
        kind, value = tokens[pos]
        if kind == "op" and value in "+-" and not expect_factor:
            break
        if kind == "num":
            coeff *= Fraction(value)
            pos += 1
        elif kind == "var":
            v = parse_fieldvar(value)
            exp = 1
            pos += 1
            if pos + 1 < len(tokens) and tokens[pos] == ("op", "^"):
                if tokens[pos + 1][0] != "num" or "/" in tokens[pos + 1][1]:
                    raise PolyParseError("exponent must be an integer")
                exp = int(tokens[pos + 1][1])
                if exp < 1:
                    raise PolyParseError("exponent must be >= 1")
                pos += 2
            factors[v] = factors.get(v, 0) + exp
        elif kind == "op" and value == "*":
            if expect_factor:
                raise PolyParseError("misplaced '*'")
            pos += 1
            expect_factor = True
            continue
        else:
            raise PolyParseError(f"unexpected token {value!r}")
        expect_factor = False
    if expect_factor:
        raise PolyParseError("dangling '*'")
    return DiffPoly({tuple(sorted(factors.items())): coeff}), pos
