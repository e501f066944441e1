"""Exact multivariate polynomial and rational-function arithmetic over the rationals.

A polynomial is a mapping from exponent vectors (one slot per registry
variable) to ``Fraction`` coefficients; zero coefficients are never stored.
The monomial order used everywhere (printing, leading terms, exact division)
is graded lexicographic on the registry order, so the printed form of any
value is bit-stable.

No floating point enters this module: quantities such as theta^2/4 stay
exact rationals.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import StructuralError


class VariableRegistry:
    """Ordered symbol table shared by every polynomial of one computation.

    The canonical table for a graph with L internal lines and N external
    legs holds, in order:

    * ``a1..aL``                Schwinger parameter of each line,
    * ``ai_1, ai_2``            the two correction parameters of line i,
    * ``theta``                 the noncommutativity scale,
    * ``s_e_f`` (e <= f < N)    external invariants p_e.p_f, the last
                                momentum being eliminated via sum(p) = 0,
    * ``w_e_f`` (e < f < N)     external symplectic invariants p_e^p_f
                                (reserved; see :mod:`ncparam.ncamp`),
    * ``msq, m1sq, m2sq``       the mass and the two auxiliary masses,
    * ``rho``                   the rescaling symbol used by power counting.
    """

    __slots__ = ("names", "_index", "alpha_like", "n_lines", "n_externals")

    def __init__(self, names: Iterable[str], alpha_like: Iterable[str] = (),
                 n_lines: int = 0, n_externals: int = 0):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise StructuralError("registry names must be unique")
        self._index = {name: i for i, name in enumerate(self.names)}
        self.alpha_like = frozenset(alpha_like)
        self.n_lines = n_lines
        self.n_externals = n_externals

    @classmethod
    def for_graph(cls, n_lines: int, n_externals: int) -> "VariableRegistry":
        names = [f"a{i}" for i in range(1, n_lines + 1)]
        for i in range(1, n_lines + 1):
            names += [f"a{i}_1", f"a{i}_2"]
        alpha_like = list(names)
        names.append("theta")
        for e in range(1, n_externals):
            for f in range(e, n_externals):
                names.append(f"s_{e}_{f}")
        for e in range(1, n_externals):
            for f in range(e + 1, n_externals):
                names.append(f"w_{e}_{f}")
        names += ["msq", "m1sq", "m2sq", "rho"]
        return cls(names, alpha_like, n_lines, n_externals)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise StructuralError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableRegistry) and self.names == other.names

    def __repr__(self) -> str:
        return f"VariableRegistry({len(self.names)} vars)"

    # Convenience constructors for the graph layout.

    def var(self, name: str) -> "Polynomial":
        return Polynomial.variable(self, name)

    def alpha(self, i: int) -> "Polynomial":
        return self.var(f"a{i}")

    def alpha_corr(self, i: int, which: int) -> "Polynomial":
        if which not in (1, 2):
            raise StructuralError("correction index must be 1 or 2")
        return self.var(f"a{i}_{which}")

    def theta(self) -> "Polynomial":
        return self.var("theta")

    def s(self, e: int, f: int) -> "Polynomial":
        if e > f:
            e, f = f, e
        return self.var(f"s_{e}_{f}")

    def w(self, e: int, f: int) -> "Polynomial":
        if e == f:
            raise StructuralError("w_e_e vanishes identically")
        sign = 1
        if e > f:
            e, f = f, e
            sign = -1
        return sign * self.var(f"w_{e}_{f}")


def _check_same_registry(a: "Polynomial", b: "Polynomial") -> None:
    if a.registry is not b.registry and a.registry != b.registry:
        raise StructuralError("operands live on different registries")


def _grlex_key(exponents: tuple) -> tuple:
    return (sum(exponents), exponents)


class Polynomial:
    """Immutable sparse polynomial with Fraction coefficients."""

    __slots__ = ("registry", "_terms")

    def __init__(self, registry: VariableRegistry,
                 terms: Mapping[tuple, Fraction] | None = None):
        self.registry = registry
        clean = {}
        nvars = len(registry)
        for exps, coeff in (terms or {}).items():
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            exps = tuple(exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise StructuralError("malformed exponent vector")
            clean[exps] = clean.get(exps, Fraction(0)) + coeff
        self._terms = {e: c for e, c in clean.items() if c != 0}

    @classmethod
    def _new(cls, registry: VariableRegistry, terms: dict) -> "Polynomial":
        # Internal fast path: terms must already be canonical.
        p = object.__new__(cls)
        p.registry = registry
        p._terms = terms
        return p

    @classmethod
    def zero(cls, registry: VariableRegistry) -> "Polynomial":
        return cls._new(registry, {})

    @classmethod
    def const(cls, registry: VariableRegistry, value) -> "Polynomial":
        value = Fraction(value)
        if value == 0:
            return cls.zero(registry)
        return cls._new(registry, {(0,) * len(registry): value})

    @classmethod
    def one(cls, registry: VariableRegistry) -> "Polynomial":
        return cls.const(registry, 1)

    @classmethod
    def variable(cls, registry: VariableRegistry, name: str) -> "Polynomial":
        exps = [0] * len(registry)
        exps[registry.index(name)] = 1
        return cls._new(registry, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, registry: VariableRegistry, powers: Mapping[str, int],
                 coeff=1) -> "Polynomial":
        coeff = Fraction(coeff)
        if coeff == 0:
            return cls.zero(registry)
        exps = [0] * len(registry)
        for name, power in powers.items():
            if power < 0:
                raise StructuralError("negative exponent")
            exps[registry.index(name)] += power
        return cls._new(registry, {tuple(exps): coeff})

    # -- basic queries ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self):
        """Iterate (exponent vector, coefficient), largest monomial first."""
        for exps in sorted(self._terms, key=_grlex_key, reverse=True):
            yield exps, self._terms[exps]

    def leading(self) -> tuple[tuple, Fraction]:
        if not self._terms:
            raise StructuralError("zero polynomial has no leading term")
        exps = max(self._terms, key=_grlex_key)
        return exps, self._terms[exps]

    def total_degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(e) for e in self._terms)

    def partial_degree(self, names: Iterable[str]) -> tuple[int, int]:
        """Min and max total degree in the given variable subset.

        The zero polynomial reports (0, 0).
        """
        idx = [self.registry.index(n) for n in names]
        if not self._terms:
            return (0, 0)
        degs = [sum(e[i] for i in idx) for e in self._terms]
        return (min(degs), max(degs))

    def has_any(self, names: Iterable[str]) -> bool:
        return self.partial_degree(names)[1] > 0

    def content(self) -> Fraction:
        """gcd of the coefficients, with the sign of the leading one."""
        if not self._terms:
            return Fraction(1)
        num = 0
        den = 1
        for c in self._terms.values():
            num = math.gcd(num, abs(c.numerator))
            den = math.lcm(den, c.denominator)
        c = Fraction(num, den)
        if self.leading()[1] < 0:
            c = -c
        return c

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            _check_same_registry(self, other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(self.registry, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for exps, coeff in other._terms.items():
            acc = out.get(exps, Fraction(0)) + coeff
            if acc == 0:
                out.pop(exps, None)
            else:
                out[exps] = acc
        return Polynomial._new(self.registry, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._new(self.registry,
                               {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exps = tuple(x + y for x, y in zip(e1, e2))
                acc = out.get(exps, Fraction(0)) + c1 * c2
                if acc == 0:
                    out.pop(exps, None)
                else:
                    out[exps] = acc
        return Polynomial._new(self.registry, out)

    __rmul__ = __mul__

    def __pow__(self, power: int):
        if not isinstance(power, int) or power < 0:
            raise StructuralError("polynomial powers must be nonnegative integers")
        result = Polynomial.one(self.registry)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(self.registry, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.registry == other.registry and self._terms == other._terms

    __hash__ = None

    # -- substitution and evaluation ----------------------------------------

    def substitute(self, mapping: Mapping[str, "Polynomial | int | Fraction"]) -> "Polynomial":
        """Replace variables by polynomials (a ring homomorphism).

        Unmapped variables stay themselves; mapped values must live on the
        same registry.
        """
        images = {}
        for name, value in mapping.items():
            idx = self.registry.index(name)
            if not isinstance(value, Polynomial):
                value = Polynomial.const(self.registry, value)
            else:
                _check_same_registry(self, value)
            images[idx] = value
        result = Polynomial.zero(self.registry)
        for exps, coeff in self._terms.items():
            factor = Polynomial.const(self.registry, coeff)
            residual = list(exps)
            for idx, image in images.items():
                if exps[idx]:
                    factor = factor * image ** exps[idx]
                    residual[idx] = 0
            monom = Polynomial._new(self.registry,
                                    {tuple(residual): Fraction(1)})
            result = result + factor * monom
        return result

    def evaluate(self, values: Mapping[str, Fraction | int]) -> Fraction:
        """Exact evaluation; every variable that occurs must be assigned."""
        assigned = {self.registry.index(n): Fraction(v) for n, v in values.items()}
        total = Fraction(0)
        for exps, coeff in self._terms.items():
            acc = coeff
            for idx, power in enumerate(exps):
                if not power:
                    continue
                if idx not in assigned:
                    raise StructuralError(
                        f"no value for variable {self.registry.names[idx]!r}")
                acc *= assigned[idx] ** power
            total += acc
        return total

    def evaluate_float(self, values: Mapping[str, float]) -> float:
        assigned = {self.registry.index(n): float(v) for n, v in values.items()}
        total = 0.0
        for exps, coeff in self._terms.items():
            acc = float(coeff)
            for idx, power in enumerate(exps):
                if not power:
                    continue
                if idx not in assigned:
                    raise StructuralError(
                        f"no value for variable {self.registry.names[idx]!r}")
                acc *= assigned[idx] ** power
            total += acc
        return total

    # -- printing ------------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for exps, coeff in self.terms():
            factors = []
            for idx, power in enumerate(exps):
                if power == 1:
                    factors.append(self.registry.names[idx])
                elif power > 1:
                    factors.append(f"{self.registry.names[idx]}^{power}")
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append("*".join(factors))
            elif coeff == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(str(coeff) + "*" + "*".join(factors))
        out = parts[0]
        for part in parts[1:]:
            out += part if part.startswith("-") else "+" + part
        return out

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def divexact(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact polynomial division; raises if b does not divide a."""
    _check_same_registry(a, b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    lead_b, coeff_b = b.leading()
    remainder = dict(a._terms)
    quotient: dict[tuple, Fraction] = {}
    while remainder:
        lead_r = max(remainder, key=_grlex_key)
        q_exps = tuple(x - y for x, y in zip(lead_r, lead_b))
        if any(e < 0 for e in q_exps):
            raise StructuralError("inexact polynomial division")
        q_coeff = remainder[lead_r] / coeff_b
        quotient[q_exps] = q_coeff
        for e2, c2 in b._terms.items():
            exps = tuple(x + y for x, y in zip(q_exps, e2))
            acc = remainder.get(exps, Fraction(0)) - q_coeff * c2
            if acc == 0:
                remainder.pop(exps, None)
            else:
                remainder[exps] = acc
    return Polynomial._new(a.registry, quotient)


def poly_det(matrix: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Determinant of a square polynomial matrix.

    Uses Laplace expansion with memoization over column subsets.  The scheme
    is division-free, so it never divides by a possibly-zero polynomial.
    """
    n = len(matrix)
    for row in matrix:
        if len(row) != n:
            raise StructuralError("determinant needs a square matrix")
    if n == 0:
        raise StructuralError("determinant of an empty matrix is undefined here")
    registry = matrix[0][0].registry
    for row in matrix:
        for entry in row:
            _check_same_registry(matrix[0][0], entry)

    cache: dict[tuple, Polynomial] = {}

    def minor(cols: tuple) -> Polynomial:
        if cols in cache:
            return cache[cols]
        row = n - len(cols)
        if len(cols) == 1:
            result = matrix[row][cols[0]]
        else:
            result = Polynomial.zero(registry)
            for pos, col in enumerate(cols):
                entry = matrix[row][col]
                if entry.is_zero():
                    continue
                sub = minor(cols[:pos] + cols[pos + 1:])
                term = entry * sub
                result = result + (term if pos % 2 == 0 else -term)
        cache[cols] = result
        return result

    return minor(tuple(range(n)))


class RationalFunction:
    """Quotient of two polynomials, normalized by the denominator content.

    No polynomial gcd is cancelled; equality is decided by
    cross-multiplication, which is exact and cheap at the sizes we handle.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial):
        _check_same_registry(num, den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        scale = den.content()
        inv = Fraction(1) / scale
        self.num = num * inv
        self.den = den * inv

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, Polynomial.one(p.registry))

    def __add__(self, other):
        if isinstance(other, Polynomial):
            other = RationalFunction.from_polynomial(other)
        if isinstance(other, (int, Fraction)):
            other = RationalFunction.from_polynomial(
                Polynomial.const(self.num.registry, other))
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return RationalFunction(self.num * other.den + other.num * self.den,
                                self.den * other.den)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            other = RationalFunction.from_polynomial(other)
        if isinstance(other, (int, Fraction)):
            other = RationalFunction.from_polynomial(
                Polynomial.const(self.num.registry, other))
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            other = RationalFunction.from_polynomial(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def __str__(self) -> str:
        if self.den == Polynomial.one(self.den.registry):
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


# -- parsing -------------------------------------------------------------


def parse_polynomial(registry: VariableRegistry, text: str) -> Polynomial:
    """Parse the canonical string form (and harmless variants with spaces).

    Grammar: sums of products of atoms, where an atom is a rational
    constant, a registered variable optionally raised to ``^<uint>``, or a
    parenthesized subexpression.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else ("end", "")

    def take(kind=None):
        nonlocal pos
        tok = peek()
        if kind is not None and tok[0] != kind:
            raise StructuralError(f"expected {kind}, found {tok[1]!r} in {text!r}")
        pos += 1
        return tok

    def parse_expr() -> Polynomial:
        negate = False
        if peek() == ("op", "-"):
            take()
            negate = True
        value = parse_term()
        if negate:
            value = -value
        while peek()[0] == "op" and peek()[1] in "+-":
            op = take()[1]
            term = parse_term()
            value = value + term if op == "+" else value - term
        return value

    def parse_term() -> Polynomial:
        value = parse_factor()
        while peek() == ("op", "*"):
            take()
            value = value * parse_factor()
        return value

    def parse_factor() -> Polynomial:
        kind, lex = peek()
        if kind == "number":
            take()
            return Polynomial.const(registry, Fraction(lex))
        if kind == "name":
            take()
            base = Polynomial.variable(registry, lex)
        elif peek() == ("op", "("):
            take()
            base = parse_expr()
            take_close = take()
            if take_close != ("op", ")"):
                raise StructuralError(f"unbalanced parentheses in {text!r}")
        else:
            raise StructuralError(f"unexpected token {lex!r} in {text!r}")
        if peek() == ("op", "^"):
            take()
            exp_tok = take("number")
            if "/" in exp_tok[1]:
                raise StructuralError("exponents must be integers")
            return base ** int(exp_tok[1])
        return base

    result = parse_expr()
    if peek()[0] != "end":
        raise StructuralError(f"trailing input in {text!r}")
    return result


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == "/" and j + 1 < len(text) and text[j + 1].isdigit():
                j += 1
                while j < len(text) and text[j].isdigit():
                    j += 1
            tokens.append(("number", text[i:j]))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j]))
            i = j
        elif ch in "+-*^()":
            tokens.append(("op", ch))
            i += 1
        else:
            raise StructuralError(f"bad character {ch!r} in polynomial text")
    return tokens
