"""Sparse multivariate polynomials over Q (exact) or C (double precision).

A polynomial is a mapping ``exponent tuple -> coefficient`` together with
its arity (number of variables ``X0 .. X{arity-1}``) and a field tag.
Exact coefficients are :class:`fractions.Fraction`; complex ones are Python
``complex``.  Values are treated as immutable.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

EXACT = "exact"
COMPLEX = "complex"

# relative magnitude below which a float coefficient is treated as zero
FLOAT_ZERO = 1e-14


class PolySyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def _coerce(c, field: str):
    if field == EXACT:
        if isinstance(c, Fraction):
            return c
        if isinstance(c, numbers.Rational):
            return Fraction(c)
        raise TypeError(f"non-rational coefficient {c!r} in exact field")
    return complex(c)


def _is_exact_scalar(c) -> bool:
    return isinstance(c, numbers.Rational)


class MultiPoly:
    __slots__ = ("arity", "terms", "field")

    def __init__(self, arity: int, terms: Mapping[tuple, object] | None = None,
                 field: str = EXACT):
        if field not in (EXACT, COMPLEX):
            raise ValueError(f"unknown field {field!r}")
        self.arity = arity
        self.field = field
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != arity or any(k < 0 for k in e):
                raise ValueError(f"bad exponent vector {e} for arity {arity}")
            c = _coerce(c, field)
            if e in clean:
                c = clean[e] + c
            clean[e] = c
        if field == EXACT:
            self.terms = {e: c for e, c in clean.items() if c != 0}
        else:
            scale = max((abs(c) for c in clean.values()), default=0.0)
            cut = FLOAT_ZERO * scale
            self.terms = {e: c for e, c in clean.items() if abs(c) > cut}

    # construction helpers

    @classmethod
    def zero(cls, arity: int, field: str = EXACT) -> "MultiPoly":
        return cls(arity, {}, field)

    @classmethod
    def constant(cls, c, arity: int, field: str | None = None) -> "MultiPoly":
        if field is None:
            field = EXACT if _is_exact_scalar(c) else COMPLEX
        return cls(arity, {(0,) * arity: c}, field)

    @classmethod
    def var(cls, i: int, arity: int, field: str = EXACT) -> "MultiPoly":
        if not 0 <= i < arity:
            raise ValueError(f"variable index {i} out of range for arity {arity}")
        e = [0] * arity
        e[i] = 1
        return cls(arity, {tuple(e): 1}, field)

    @classmethod
    def linear_form(cls, coeffs: Sequence, field: str | None = None) -> "MultiPoly":
        n = len(coeffs)
        if field is None:
            field = EXACT if all(_is_exact_scalar(c) for c in coeffs) else COMPLEX
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = c
        return cls(n, terms, field)

    # basic queries

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int | None:
        """Total degree; ``None`` for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def require_homogeneous(self) -> "MultiPoly":
        if not self.is_homogeneous():
            raise ValueError(f"polynomial {self} is not homogeneous")
        return self

    def variables(self) -> set[int]:
        return {i for e in self.terms for i, k in enumerate(e) if k}

    def coefficient(self, exponent: Sequence[int]):
        zero = Fraction(0) if self.field == EXACT else 0j
        return self.terms.get(tuple(exponent), zero)

    def to_complex(self) -> "MultiPoly":
        if self.field == COMPLEX:
            return self
        return MultiPoly(self.arity, {e: complex(c) for e, c in self.terms.items()}, COMPLEX)

    def max_abs_coeff(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    # arithmetic

    def _join(self, other: "MultiPoly") -> str:
        if self.arity != other.arity:
            raise ValueError(f"arity mismatch {self.arity} != {other.arity}")
        return EXACT if self.field == other.field == EXACT else COMPLEX

    def _lift(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, numbers.Number):
            return MultiPoly.constant(other, self.arity,
                                      EXACT if _is_exact_scalar(other) else COMPLEX)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        field = self._join(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return MultiPoly(self.arity, terms, field)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.arity, {e: -c for e, c in self.terms.items()}, self.field)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        field = self._join(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return MultiPoly(self.arity, terms, field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MultiPoly):
            if other.degree() not in (0,):
                raise ZeroDivisionError("division only by nonzero constants")
            other = next(iter(other.terms.values()))
        if other == 0:
            raise ZeroDivisionError("division by zero")
        if _is_exact_scalar(other) and self.field == EXACT:
            inv = 1 / Fraction(other)
        else:
            inv = 1 / complex(other)
        return self * inv

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = MultiPoly.constant(1, self.arity, self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, numbers.Number):
            other = self._lift(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def almost_equal(self, other: "MultiPoly", tol: float = 1e-10) -> bool:
        """Coefficient-wise comparison relative to the larger coefficient."""
        if self.arity != other.arity:
            return False
        scale = max(self.max_abs_coeff(), other.max_abs_coeff(), 1e-300)
        keys = set(self.terms) | set(other.terms)
        return all(abs(complex(self.coefficient(e)) - complex(other.coefficient(e)))
                   <= tol * scale for e in keys)

    # calculus and substitution

    def derivative(self, var: int) -> "MultiPoly":
        terms = {}
        for e, c in self.terms.items():
            if e[var]:
                f = list(e)
                f[var] -= 1
                terms[tuple(f)] = c * e[var]
        return MultiPoly(self.arity, terms, self.field)

    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        if len(point) != self.arity:
            raise ValueError("point has wrong dimension")
        total = 0
        for e, c in self.terms.items():
            m = c
            for x, k in zip(point, e):
                if k:
                    m = m * x ** k
            total = total + m
        return total

    def substitute(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Replace each ``X_i`` by ``images[i]`` (all of a common arity)."""
        if len(images) != self.arity:
            raise ValueError("need one image per variable")
        if not images:
            return self
        arity = images[0].arity
        field = self.field
        for im in images:
            if im.field == COMPLEX:
                field = COMPLEX
        powers: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in powers:
                powers[key] = images[i] ** k if k <= 1 else power(i, k - 1) * images[i]
            return powers[key]

        result = MultiPoly.zero(arity, field)
        for e, c in self.terms.items():
            m = MultiPoly.constant(c, arity, field)
            for i, k in enumerate(e):
                if k:
                    m = m * power(i, k)
            result = result + m
        return result

    def coefficients_in(self, var: int) -> list["MultiPoly"]:
        """Coefficients with respect to ``X_var``, lowest power first."""
        deg = self.degree_in(var)
        buckets = [dict() for _ in range(max(deg, 0) + 1)]
        for e, c in self.terms.items():
            f = list(e)
            k = f[var]
            f[var] = 0
            buckets[k][tuple(f)] = c
        return [MultiPoly(self.arity, b, self.field) for b in buckets]

    def univariate_coeffs(self, var: int) -> list:
        """Scalar coefficients (low to high) when ``var`` is the only variable used."""
        if self.variables() - {var}:
            raise ValueError("polynomial involves other variables")
        zero = Fraction(0) if self.field == EXACT else 0j
        out = [zero] * (max(self.degree_in(var), 0) + 1)
        for e, c in self.terms.items():
            out[e[var]] = c
        return out

    # printing

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        """Graded-lex order, highest first."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"MultiPoly({self.arity}, {format_poly(self)!r}, {self.field!r})"


def _format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r}+{c.imag!r}*I)"


def format_poly(p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    pieces = []
    for e, c in p.sorted_terms():
        mono = "*".join(f"X{i}" if k == 1 else f"X{i}^{k}" for i, k in enumerate(e) if k)
        neg = False
        if isinstance(c, Fraction) and c < 0:
            neg, c = True, -c
        coeff = _format_coeff(c)
        if mono and coeff in ("1", "1.0"):
            body = mono
        elif mono:
            body = f"{coeff}*{mono}"
        else:
            body = coeff
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


# parsing

_TOKEN_CHARS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _TOKEN_CHARS:
            toks.append(("op", ch, i))
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE" and j + 1 < n and (text[j + 1].isdigit()
                                                         or text[j + 1] in "+-"):
                j += 1
                if text[j] in "+-":
                    j += 1
                while j < n and text[j].isdigit():
                    j += 1
            toks.append(("num", text[i:j], i))
            i = j
        elif ch in "Xx":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise PolySyntaxError("variable name needs an index", i)
            toks.append(("var", text[i + 1:j], i))
            i = j
        elif ch in "Ii" and not (i + 1 < n and text[i + 1].isalnum()):
            toks.append(("imag", ch, i))
            i += 1
        else:
            raise PolySyntaxError(f"unexpected character {ch!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, arity: int, field: str):
        self.toks = _tokenize(text)
        self.k = 0
        self.arity = arity
        self.field = field

    def peek(self):
        return self.toks[self.k]

    def take(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def expect(self, value: str):
        tok = self.take()
        if tok[1] != value:
            raise PolySyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])

    def parse(self) -> MultiPoly:
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolySyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return p

    def expr(self) -> MultiPoly:
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> MultiPoly:
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if q.degree() != 0:
                    raise PolySyntaxError("division only by nonzero constants", pos)
                p = p / q
        return p

    def unary(self) -> MultiPoly:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if tok[1] == "-" else p
        return self.power()

    def power(self) -> MultiPoly:
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                raise PolySyntaxError("exponent must be a non-negative integer", tok[2])
            base = base ** int(tok[1])
        return base

    def atom(self) -> MultiPoly:
        kind, value, pos = self.take()
        if kind == "num":
            if any(ch in value for ch in ".eE"):
                if self.field == EXACT:
                    c = Fraction(value)
                else:
                    c = float(value)
            else:
                c = int(value)
            return MultiPoly.constant(c, self.arity, self.field)
        if kind == "var":
            idx = int(value)
            if idx >= self.arity:
                raise PolySyntaxError(
                    f"variable X{idx} out of range for arity {self.arity}", pos)
            return MultiPoly.var(idx, self.arity, self.field)
        if kind == "imag":
            if self.field == EXACT:
                raise PolySyntaxError("imaginary unit not allowed in exact field", pos)
            return MultiPoly.constant(1j, self.arity, COMPLEX)
        if value == "(":
            p = self.expr()
            self.expect(")")
            return p
        raise PolySyntaxError(f"unexpected token {value or 'end of input'!r}", pos)


def parse_poly(text: str, arity: int, field: str = EXACT) -> MultiPoly:
    """Parse ``text`` over variables ``X0..X{arity-1}``.

    >>> str(parse_poly("(X0+X1)^2 - X0^2 - 2*X0*X1", 2))
    'X1^2'
    """
    if field not in (EXACT, COMPLEX):
        raise ValueError(f"unknown field {field!r}")
    return _Parser(text, arity, field).parse()


# linear substitution

def _matrix_field(M) -> str:
    return EXACT if all(_is_exact_scalar(x) for row in M for x in row) else COMPLEX


def act_linear(p: MultiPoly, M) -> MultiPoly:
    """Return ``p o M``, i.e. the polynomial ``X -> p(M X)``.

    With this convention ``act_linear(act_linear(p, A), B) == act_linear(p, A @ B)``.
    """
    rows = [list(r) for r in M]
    n = p.arity
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix must be {n}x{n} for a polynomial of arity {n}")
    field = _matrix_field(rows)
    out_field = EXACT if field == EXACT and p.field == EXACT else COMPLEX
    if out_field == COMPLEX:
        rows = [[complex(x) for x in r] for r in rows]
    images = [MultiPoly.linear_form(r, out_field) for r in rows]
    return p.substitute(images)


# resultants

def _det(matrix: list[list[MultiPoly]], arity: int, field: str) -> MultiPoly:
    """Determinant by row-wise Laplace expansion memoised over column subsets."""
    n = len(matrix)
    zero = MultiPoly.zero(arity, field)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: frozenset) -> MultiPoly:
        if row == n:
            return MultiPoly.constant(1, arity, field)
        total = zero
        ordered = sorted(cols)
        for pos, c in enumerate(ordered):
            entry = matrix[row][c]
            if entry.is_zero():
                continue
            sub = minor(row + 1, cols - {c})
            if sub.is_zero():
                continue
            term = entry * sub
            total = total + (term if pos % 2 == 0 else -term)
        return total

    return minor(0, frozenset(range(n)))


def sylvester_matrix(p: MultiPoly, q: MultiPoly, var: int) -> list[list[MultiPoly]]:
    pc = p.coefficients_in(var)[::-1]
    qc = q.coefficients_in(var)[::-1]
    m, n = len(pc) - 1, len(qc) - 1
    size = m + n
    field = EXACT if p.field == q.field == EXACT else COMPLEX
    zero = MultiPoly.zero(p.arity, field)
    rows = []
    for i in range(n):
        rows.append([zero] * i + pc + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + qc + [zero] * (size - n - 1 - i))
    return rows


def resultant(p: MultiPoly, q: MultiPoly, var: int) -> MultiPoly:
    """Sylvester resultant eliminating ``X_var`` (rows of ``p`` first)."""
    if p.arity != q.arity:
        raise ValueError("arity mismatch")
    if not 0 <= var < p.arity:
        raise ValueError(f"variable index {var} out of range")
    if p.is_zero() or q.is_zero():
        raise ValueError("resultant of a zero polynomial is undefined")
    if p.degree_in(var) < 1 or q.degree_in(var) < 1:
        raise ValueError("both polynomials need positive degree in the eliminated variable")
    field = EXACT if p.field == q.field == EXACT else COMPLEX
    return _det(sylvester_matrix(p, q, var), p.arity, field)


def discriminant_numerator(p: MultiPoly, var: int) -> MultiPoly:
    """``Res(p, dp/dvar)``; vanishes where ``p`` has a repeated root in ``var``."""
    return resultant(p, p.derivative(var), var)


def polys_from_strings(texts: Iterable[str], arity: int, field: str = EXACT) -> list[MultiPoly]:
    return [parse_poly(t, arity, field) for t in texts]
