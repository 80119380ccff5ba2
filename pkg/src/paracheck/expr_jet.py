"""Scalar-field expressions over chart coordinates and truncated Taylor-jet
arithmetic.

An expression is parsed once against a declared coordinate list and can then
be evaluated either numerically or as a :class:`Jet`: a truncated multivariate
Taylor expansion

    coeffs[alpha] = (d^alpha f / alpha!)(center),   |alpha| <= order,

which carries exact partial derivatives (to floating-point rounding) of the
field at a point.  All higher geometry is built on these jets, so there is no
finite differencing anywhere in the main computation path.

Evaluation is batched: most helpers accept coefficient arrays of shape
``batch + (ncoeffs,)`` and broadcast over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

FUNCTIONS = ("exp", "ln", "sqrt", "sin", "cos")


class ExprError(ValueError):
    """Base class for expression parse/evaluation failures."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, position: int | None = None):
        self.name = name
        super().__init__(f"unknown identifier '{name}'", position)


class JetDomainError(ArithmeticError):
    """Arithmetic left the domain of a jet primitive (pole, ln/sqrt of a
    non-positive constant term).  Carries the offending sample point when the
    evaluation was batched over points."""

    def __init__(self, message: str, point: tuple[float, ...] | None = None):
        self.point = point
        if point is not None:
            message = f"{message} at point {point}"
        super().__init__(message)


# --------------------------------------------------------------------------
# expression trees
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "ScalarExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: "ScalarExpr"
    right: "ScalarExpr"


@dataclass(frozen=True)
class Pow:
    base: "ScalarExpr"
    exponent: float  # constant exponents only


@dataclass(frozen=True)
class Call:
    func: str  # one of FUNCTIONS
    arg: "ScalarExpr"


ScalarExpr = Num | Var | Neg | BinOp | Pow | Call


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos].isspace():
            self.pos += 1

    def peek(self) -> tuple[str, str, int]:
        """Returns (kind, text, position) without consuming."""
        self._skip_ws()
        if self.pos >= len(self.source):
            return ("end", "", self.pos)
        start = self.pos
        ch = self.source[start]
        if ch.isdigit() or ch == ".":
            j = start
            seen_dot = False
            while j < len(self.source) and (self.source[j].isdigit() or (self.source[j] == "." and not seen_dot)):
                if self.source[j] == ".":
                    seen_dot = True
                j += 1
            if j < len(self.source) and self.source[j] in "eE":
                k = j + 1
                if k < len(self.source) and self.source[k] in "+-":
                    k += 1
                if k < len(self.source) and self.source[k].isdigit():
                    while k < len(self.source) and self.source[k].isdigit():
                        k += 1
                    j = k
            return ("number", self.source[start:j], start)
        if ch.isalpha() or ch == "_":
            j = start
            while j < len(self.source) and (self.source[j].isalnum() or self.source[j] == "_"):
                j += 1
            return ("ident", self.source[start:j], start)
        if ch in "+-*/^()":
            return ("op", ch, start)
        raise ExprSyntaxError(f"unexpected character {ch!r}", start)

    def take(self) -> tuple[str, str, int]:
        kind, text, pos = self.peek()
        self.pos = pos + len(text) if kind != "end" else pos
        return kind, text, pos


class _Parser:
    """Recursive descent for the grammar

        expr   := term (("+"|"-") term)*
        term   := factor (("*"|"/") factor)*
        factor := "-" factor | power
        power  := base ("^" signed-number)?
        base   := number | ident | "(" expr ")" | func "(" expr ")"

    Precedence is pow > unary minus > mul/div > add/sub, so "-x^2" means
    -(x^2).  Exponents must be numeric constants.
    """

    def __init__(self, source: str, coords: Sequence[str]):
        self.tok = _Tokenizer(source)
        self.coords = {name: i for i, name in enumerate(coords)}

    def parse(self) -> ScalarExpr:
        node = self.expr()
        kind, text, pos = self.tok.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing token {text!r}", pos)
        return node

    def expr(self) -> ScalarExpr:
        node = self.term()
        while True:
            kind, text, _ = self.tok.peek()
            if kind == "op" and text in "+-":
                self.tok.take()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> ScalarExpr:
        node = self.factor()
        while True:
            kind, text, _ = self.tok.peek()
            if kind == "op" and text in "*/":
                self.tok.take()
                node = BinOp(text, node, self.factor())
            else:
                return node

    def factor(self) -> ScalarExpr:
        kind, text, _ = self.tok.peek()
        if kind == "op" and text == "-":
            self.tok.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> ScalarExpr:
        node = self.base()
        kind, text, _ = self.tok.peek()
        if kind == "op" and text == "^":
            self.tok.take()
            node = Pow(node, self._exponent())
        return node

    def _exponent(self) -> float:
        sign = 1.0
        kind, text, pos = self.tok.take()
        if kind == "op" and text == "-":
            sign = -1.0
            kind, text, pos = self.tok.take()
        if kind != "number":
            raise ExprSyntaxError("exponent must be a numeric constant", pos)
        return sign * float(text)

    def base(self) -> ScalarExpr:
        kind, text, pos = self.tok.take()
        if kind == "number":
            return Num(float(text))
        if kind == "ident":
            nk, nt, _ = self.tok.peek()
            if nk == "op" and nt == "(":
                if text not in FUNCTIONS:
                    raise UnknownIdentifierError(text, pos)
                self.tok.take()
                arg = self.expr()
                self._expect(")")
                return Call(text, arg)
            if text not in self.coords:
                raise UnknownIdentifierError(text, pos)
            return Var(text, self.coords[text])
        if kind == "op" and text == "(":
            node = self.expr()
            self._expect(")")
            return node
        raise ExprSyntaxError(f"expected a value, got {text!r}" if text else "unexpected end of input", pos)

    def _expect(self, op: str):
        kind, text, pos = self.tok.take()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)


def parse_expr(source: str, coords: Sequence[str]) -> ScalarExpr:
    """Parse ``source`` against the declared coordinate names."""
    return _Parser(source, coords).parse()


# --------------------------------------------------------------------------
# jet spaces
# --------------------------------------------------------------------------


def _multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(prefix, remaining, budget):
        if remaining == 1:
            out.append(prefix + (budget,))
            return
        for v in range(budget + 1):
            rec(prefix + (v,), remaining - 1, budget - v)

    by_degree: list[tuple[int, ...]] = []
    for deg in range(order + 1):
        block: list[tuple[int, ...]] = []

        def rec2(prefix, remaining, budget):
            if remaining == 0:
                if budget == 0:
                    block.append(prefix)
                return
            for v in range(budget + 1):
                rec2(prefix + (v,), remaining - 1, budget - v)

        rec2((), dim, deg)
        block.sort()
        by_degree.extend(block)
    return by_degree


class JetSpace:
    """Coefficient layout and arithmetic tables for jets of a fixed
    (dimension, order).  Instances are cached; use :meth:`get`."""

    _cache: dict[tuple[int, int], "JetSpace"] = {}

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        self.indices = _multi_indices(dim, order)
        self.ncoeffs = len(self.indices)
        self.index_of = {alpha: i for i, alpha in enumerate(self.indices)}
        self.degrees = np.array([sum(a) for a in self.indices])
        self._mul_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._diff_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    @classmethod
    def get(cls, dim: int, order: int) -> "JetSpace":
        key = (dim, order)
        if key not in cls._cache:
            cls._cache[key] = cls(dim, order)
        return cls._cache[key]

    # -- tables ------------------------------------------------------------

    def mul_table(self, order: int):
        """(I, J, T) index triples with deg(I) + deg(J) <= order and
        indices[T] = indices[I] + indices[J]."""
        order = min(order, self.order)
        if order not in self._mul_tables:
            I, J, T = [], [], []
            for i, a in enumerate(self.indices):
                da = sum(a)
                if da > order:
                    continue
                for j, b in enumerate(self.indices):
                    if da + sum(b) > order:
                        continue
                    I.append(i)
                    J.append(j)
                    T.append(self.index_of[tuple(x + y for x, y in zip(a, b))])
            self._mul_tables[order] = (np.array(I), np.array(J), np.array(T))
        return self._mul_tables[order]

    def diff_table(self, coord: int):
        """(SRC, DST, FAC): coefficient moves for d/dx_coord."""
        if coord not in self._diff_tables:
            src, dst, fac = [], [], []
            for i, a in enumerate(self.indices):
                if a[coord] >= 1:
                    b = list(a)
                    b[coord] -= 1
                    src.append(i)
                    dst.append(self.index_of[tuple(b)])
                    fac.append(a[coord])
            self._diff_tables[coord] = (np.array(src), np.array(dst), np.array(fac, dtype=float))
        return self._diff_tables[coord]

    # -- constructors --------------------------------------------------------

    def constant(self, value, batch_shape: tuple[int, ...] = ()) -> np.ndarray:
        out = np.zeros(batch_shape + (self.ncoeffs,))
        out[..., 0] = value
        return out

    def coordinate(self, i: int, value) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        out = np.zeros(value.shape + (self.ncoeffs,))
        out[..., 0] = value
        if self.order >= 1:
            e_i = tuple(1 if k == i else 0 for k in range(self.dim))
            out[..., self.index_of[e_i]] = 1.0
        return out

    def point_jets(self, points: np.ndarray) -> list[np.ndarray]:
        """Coordinate jets at a batch of points; points has shape (..., dim)."""
        points = np.asarray(points, dtype=float)
        return [self.coordinate(i, points[..., i]) for i in range(self.dim)]

    # -- arithmetic ----------------------------------------------------------

    def mul(self, A: np.ndarray, B: np.ndarray, order: int | None = None) -> np.ndarray:
        """Truncated product of jet coefficient arrays, broadcasting over
        leading axes.  ``order`` prunes work when the result is only needed
        to a lower degree."""
        if order is None:
            order = self.order
        I, J, T = self.mul_table(order)
        A, B = np.broadcast_arrays(A, B)
        out = np.zeros(A.shape)
        prod_elems = int(np.prod(A.shape[:-1], dtype=np.int64)) * len(I)
        if prod_elems <= 40_000_000 or A.ndim == 1:
            np.add.at(out, (Ellipsis, T), A[..., I] * B[..., J])
            return out
        # chunk over the leading axis to bound temporary size
        chunk = max(1, 40_000_000 // max(1, prod_elems // A.shape[0]))
        for s in range(0, A.shape[0], chunk):
            sl = slice(s, s + chunk)
            np.add.at(out[sl], (Ellipsis, T), A[sl][..., I] * B[sl][..., J])
        return out

    def diff(self, A: np.ndarray, coord: int) -> np.ndarray:
        """d/dx_coord as a jet of one order lower (top coefficients of the
        result are unreliable; callers track the working order)."""
        src, dst, fac = self.diff_table(coord)
        out = np.zeros(A.shape)
        out[..., dst] = A[..., src] * fac
        return out

    def value(self, A: np.ndarray) -> np.ndarray:
        return A[..., 0]

    def gradient_values(self, A: np.ndarray) -> np.ndarray:
        """First partials at the center, shape batch + (dim,)."""
        cols = []
        for i in range(self.dim):
            e_i = tuple(1 if k == i else 0 for k in range(self.dim))
            cols.append(A[..., self.index_of[e_i]])
        return np.stack(cols, axis=-1)

    def truncate(self, A: np.ndarray, order: int) -> np.ndarray:
        out = A.copy()
        out[..., self.degrees > order] = 0.0
        return out

    # -- analytic primitives ---------------------------------------------------

    def _compose(self, series: np.ndarray, A: np.ndarray, order: int) -> np.ndarray:
        """Horner evaluation of sum_k series[..., k] * (A - A0)^k."""
        H = A.copy()
        H[..., 0] = 0.0
        out = self.constant(series[..., order], batch_shape=A.shape[:-1])
        for k in range(order - 1, -1, -1):
            out = self.mul(out, H, order)
            out[..., 0] += series[..., k]
        return out

    def _check_positive(self, a0: np.ndarray, what: str, points: np.ndarray | None):
        bad = ~(a0 > 0)
        if np.any(bad):
            raise JetDomainError(f"{what} of non-positive constant term", _locate(bad, points))

    def reciprocal(self, A: np.ndarray, order: int | None = None, points=None) -> np.ndarray:
        order = self.order if order is None else order
        a0 = A[..., 0]
        bad = a0 == 0
        if np.any(bad):
            raise JetDomainError("division by a jet with zero constant term", _locate(bad, points))
        ks = np.arange(order + 1)
        series = (-1.0) ** ks * a0[..., None] ** (-(ks + 1))
        return self._compose(series, A, order)

    def ln(self, A: np.ndarray, order: int | None = None, points=None) -> np.ndarray:
        order = self.order if order is None else order
        a0 = A[..., 0]
        self._check_positive(a0, "ln", points)
        series = np.empty(a0.shape + (order + 1,))
        series[..., 0] = np.log(a0)
        for k in range(1, order + 1):
            series[..., k] = (-1.0) ** (k - 1) / (k * a0**k)
        return self._compose(series, A, order)

    def exp(self, A: np.ndarray, order: int | None = None, points=None) -> np.ndarray:
        order = self.order if order is None else order
        a0 = A[..., 0]
        ks = np.arange(order + 1)
        series = np.exp(a0)[..., None] / np.array([math.factorial(k) for k in ks])
        return self._compose(series, A, order)

    def sqrt(self, A: np.ndarray, order: int | None = None, points=None) -> np.ndarray:
        order = self.order if order is None else order
        a0 = A[..., 0]
        self._check_positive(a0, "sqrt", points)
        series = np.empty(a0.shape + (order + 1,))
        coef = 1.0
        for k in range(order + 1):
            series[..., k] = coef * a0 ** (0.5 - k)
            coef *= (0.5 - k) / (k + 1)
        return self._compose(series, A, order)

    def sin(self, A: np.ndarray, order: int | None = None, points=None) -> np.ndarray:
        return self._trig(A, np.sin, order)

    def cos(self, A: np.ndarray, order: int | None = None, points=None) -> np.ndarray:
        return self._trig(A, np.cos, order)

    def _trig(self, A, fn, order):
        order = self.order if order is None else order
        a0 = A[..., 0]
        series = np.empty(a0.shape + (order + 1,))
        for k in range(order + 1):
            series[..., k] = fn(a0 + k * np.pi / 2) / math.factorial(k)
        return self._compose(series, A, order)

    def power(self, A: np.ndarray, exponent: float, order: int | None = None, points=None) -> np.ndarray:
        order = self.order if order is None else order
        if float(exponent).is_integer():
            p = int(exponent)
            if p >= 0:
                out = self.constant(1.0, A.shape[:-1])
                base = A
                while p:
                    if p & 1:
                        out = self.mul(out, base, order)
                    p >>= 1
                    if p:
                        base = self.mul(base, base, order)
                return out
            return self.reciprocal(self.power(A, -p, order), order, points)
        a0 = A[..., 0]
        self._check_positive(a0, f"non-integer power {exponent}", points)
        series = np.empty(a0.shape + (order + 1,))
        coef = 1.0
        for k in range(order + 1):
            series[..., k] = coef * a0 ** (exponent - k)
            coef *= (exponent - k) / (k + 1)
        return self._compose(series, A, order)


def _locate(bad_mask: np.ndarray, points: np.ndarray | None):
    if points is None:
        return None
    hits = np.argwhere(np.atleast_1d(bad_mask))
    if len(hits) == 0:
        return None
    points = np.asarray(points)
    row = int(hits[0][0])
    if points.ndim == 1:
        return tuple(float(c) for c in points)
    return tuple(float(c) for c in points[row % points.shape[0]])


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def eval_expr(expr: ScalarExpr, space: JetSpace, coord_jets: Sequence[np.ndarray],
              order: int | None = None, points: np.ndarray | None = None) -> np.ndarray:
    """Evaluate an expression tree on jet-valued coordinates.

    ``coord_jets`` may be the chart coordinate jets from
    :meth:`JetSpace.point_jets` or arbitrary jets (used when composing a field
    through an embedding).  Returns a coefficient array shaped like the
    inputs.
    """
    order = space.order if order is None else order
    batch = np.broadcast_shapes(*(cj.shape[:-1] for cj in coord_jets)) if coord_jets else ()

    def rec(node) -> np.ndarray:
        if isinstance(node, Num):
            return space.constant(node.value, batch)
        if isinstance(node, Var):
            return np.broadcast_to(coord_jets[node.index], batch + (space.ncoeffs,)).copy()
        if isinstance(node, Neg):
            return -rec(node.arg)
        if isinstance(node, BinOp):
            a = rec(node.left)
            b = rec(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return space.mul(a, b, order)
            return space.mul(a, space.reciprocal(b, order, points), order)
        if isinstance(node, Pow):
            return space.power(rec(node.base), node.exponent, order, points)
        if isinstance(node, Call):
            return getattr(space, node.func)(rec(node.arg), order, points)
        raise TypeError(f"unknown node {node!r}")

    return rec(expr)


def eval_expr_numeric(expr: ScalarExpr, point: Sequence[float]) -> float:
    """Plain numeric evaluation (no jets)."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return float(point[expr.index])
    if isinstance(expr, Neg):
        return -eval_expr_numeric(expr.arg, point)
    if isinstance(expr, BinOp):
        a = eval_expr_numeric(expr.left, point)
        b = eval_expr_numeric(expr.right, point)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if b == 0:
            raise JetDomainError("division by zero", tuple(point))
        return a / b
    if isinstance(expr, Pow):
        return eval_expr_numeric(expr.base, point) ** expr.exponent
    if isinstance(expr, Call):
        a = eval_expr_numeric(expr.arg, point)
        if expr.func == "ln":
            if a <= 0:
                raise JetDomainError("ln of non-positive value", tuple(point))
            return math.log(a)
        if expr.func == "sqrt" and a < 0:
            raise JetDomainError("sqrt of negative value", tuple(point))
        return getattr(math, expr.func)(a)
    raise TypeError(f"unknown node {expr!r}")


# --------------------------------------------------------------------------
# the scalar Jet facade
# --------------------------------------------------------------------------


class Jet:
    """A single truncated Taylor expansion at a chart point.

    Arithmetic between jets at the same center is closed at the common order.
    Coefficients are Taylor coefficients (derivative / alpha!), so
    ``jet.coeff((0, 1))`` is directly the first partial in coordinate 1.
    """

    __slots__ = ("space", "center", "coeffs")

    def __init__(self, space: JetSpace, center: tuple[float, ...], coeffs: np.ndarray):
        self.space = space
        self.center = tuple(float(c) for c in center)
        self.coeffs = np.asarray(coeffs, dtype=float)

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coeff(self, alpha: Sequence[int]) -> float:
        return float(self.coeffs[self.space.index_of[tuple(alpha)]])

    def derivative(self, alpha: Sequence[int]) -> float:
        """d^alpha f at the center (coefficient times alpha!)."""
        fac = 1.0
        for a in alpha:
            fac *= math.factorial(a)
        return self.coeff(alpha) * fac

    def partial(self, i: int) -> float:
        return self.coeff(tuple(1 if k == i else 0 for k in range(self.space.dim)))

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {alpha: float(self.coeffs[k]) for k, alpha in enumerate(self.space.indices)}

    def _wrap(self, coeffs: np.ndarray) -> "Jet":
        return Jet(self.space, self.center, coeffs)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Jet):
            if other.space is not self.space or other.center != self.center:
                raise ValueError("jets must share a space and center")
            return other.coeffs
        return self.space.constant(float(other))

    def __add__(self, other):
        return self._wrap(self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.coeffs - self._coerce(other))

    def __rsub__(self, other):
        return self._wrap(self._coerce(other) - self.coeffs)

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __mul__(self, other):
        return self._wrap(self.space.mul(self.coeffs, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.space.mul(self.coeffs, self.space.reciprocal(self._coerce(other))))

    def __rtruediv__(self, other):
        return self._wrap(self.space.mul(self._coerce(other), self.space.reciprocal(self.coeffs)))

    def __pow__(self, exponent: float):
        return self._wrap(self.space.power(self.coeffs, exponent))


def jet_eval(expr: ScalarExpr, point: Sequence[float], order: int) -> Jet:
    """Evaluate ``expr`` as an order-``order`` jet centered at ``point``."""
    if order < 0:
        raise ValueError("jet order must be >= 0")
    point = tuple(float(p) for p in point)
    dim = len(point)
    space = JetSpace.get(dim, order)
    pts = np.asarray(point)
    coeffs = eval_expr(expr, space, space.point_jets(pts), points=pts[None, :])
    return Jet(space, point, coeffs)
