"""Parser and jet-arithmetic tests, with finite differences and exact
polynomial expansion as the independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paracheck.expr_jet import (
    BinOp,
    Call,
    ExprSyntaxError,
    Jet,
    JetDomainError,
    JetSpace,
    Num,
    UnknownIdentifierError,
    Var,
    eval_expr_numeric,
    jet_eval,
    parse_expr,
)

from fd_oracle import fd_partial


class TestParser:
    def test_nested_division(self):
        tree = parse_expr("1/(y*y)", ["x", "y"])
        assert isinstance(tree, BinOp) and tree.op == "/"
        assert tree.left == Num(1.0)
        assert tree.right == BinOp("*", Var("y", 1), Var("y", 1))

    def test_sum_of_product_and_call(self):
        tree = parse_expr("x*y + sin(x)", ["x", "y"])
        assert isinstance(tree, BinOp) and tree.op == "+"
        assert tree.left == BinOp("*", Var("x", 0), Var("y", 1))
        assert tree.right == Call("sin", Var("x", 0))

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as exc:
            parse_expr("x*z", ["x", "y"])
        assert exc.value.name == "z"
        assert exc.value.position == 2

    def test_syntax_error_carries_position(self):
        with pytest.raises(ExprSyntaxError) as exc:
            parse_expr("x + * y", ["x", "y"])
        assert exc.value.position is not None

    def test_unbalanced_paren(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("(x + y", ["x", "y"])

    def test_power_binds_tighter_than_unary_minus(self):
        assert eval_expr_numeric(parse_expr("-x^2", ["x"]), [3.0]) == -9.0

    def test_constant_exponent_only(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("x^y", ["x", "y"])

    def test_negative_exponent(self):
        assert eval_expr_numeric(parse_expr("y^-2", ["y"]), [2.0]) == 0.25

    def test_whitespace_insignificant(self):
        a = parse_expr("x * y+ sin( x )", ["x", "y"])
        b = parse_expr("x*y+sin(x)", ["x", "y"])
        assert a == b

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifierError):
            parse_expr("tan(x)", ["x"])


class TestJetEval:
    def test_inverse_square_against_finite_differences(self):
        # frozen from the central-difference oracle on y^-2 at y = 2
        f = lambda x: 1.0 / (x[0] * x[0])
        d1 = fd_partial(f, [2.0], 0, 1e-4)
        d2 = fd_partial(lambda x: fd_partial(f, x, 0, 1e-4), [2.0], 0, 1e-3)
        j = jet_eval(parse_expr("1/(y*y)", ["y"]), (2.0,), 2)
        assert j.coeff((0,)) == pytest.approx(0.25, abs=1e-12)
        assert j.coeff((1,)) == pytest.approx(d1, abs=1e-6)
        assert j.coeff((2,)) == pytest.approx(d2 / 2.0, abs=1e-6)
        assert (j.coeff((0,)), j.coeff((1,)), j.coeff((2,))) == pytest.approx((0.25, -0.25, 0.1875))

    def test_bilinear(self):
        j = jet_eval(parse_expr("x*y", ["x", "y"]), (2.0, 3.0), 2)
        assert j.value == 6.0
        assert j.partial(0) == 3.0
        assert j.partial(1) == 2.0
        assert j.coeff((1, 1)) == 1.0
        assert j.coeff((2, 0)) == 0.0
        assert j.coeff((0, 2)) == 0.0

    def test_pole_is_domain_error(self):
        with pytest.raises(JetDomainError):
            jet_eval(parse_expr("1/(y-1)", ["y"]), (1.0,), 2)

    def test_ln_of_nonpositive(self):
        with pytest.raises(JetDomainError):
            jet_eval(parse_expr("ln(x)", ["x"]), (-1.0,), 2)

    def test_sqrt_of_nonpositive(self):
        with pytest.raises(JetDomainError):
            jet_eval(parse_expr("sqrt(x)", ["x"]), (0.0,), 2)

    def test_domain_error_carries_point(self):
        with pytest.raises(JetDomainError) as exc:
            jet_eval(parse_expr("1/y", ["x", "y"]), (3.0, 0.0), 2)
        assert exc.value.point == (3.0, 0.0)

    def test_transcendental_derivatives_against_finite_differences(self):
        src = "exp(sin(x))*sqrt(y) + ln(y)*cos(x)"
        coords = ["x", "y"]
        pt = (0.7, 2.0)
        f = lambda x: eval_expr_numeric(parse_expr(src, coords), x)
        j = jet_eval(parse_expr(src, coords), pt, 3)
        for i in range(2):
            assert j.partial(i) == pytest.approx(fd_partial(f, list(pt), i, 1e-5), rel=1e-6)

    def test_derivative_accessor_scales_by_factorial(self):
        j = jet_eval(parse_expr("x^3", ["x"]), (2.0,), 3)
        assert j.derivative((3,)) == pytest.approx(6.0)
        assert j.coeff((3,)) == pytest.approx(1.0)

    def test_jet_operator_overloads(self):
        a = jet_eval(parse_expr("x^2", ["x"]), (1.5,), 3)
        b = jet_eval(parse_expr("sin(x)", ["x"]), (1.5,), 3)
        c = a * b + 2.0
        d = jet_eval(parse_expr("x^2*sin(x) + 2", ["x"]), (1.5,), 3)
        assert np.allclose(c.coeffs, d.coeffs)
        q = a / b
        r = jet_eval(parse_expr("x^2/sin(x)", ["x"]), (1.5,), 3)
        assert np.allclose(q.coeffs, r.coeffs, atol=1e-12)


# -- property tests ---------------------------------------------------------


def _poly_exprs(coords, max_deg):
    """Random polynomial as (expression string, {multi-index: coeff})."""
    scalars = st.integers(min_value=-4, max_value=4)

    def term(alpha):
        parts = []
        for name, a in zip(coords, alpha):
            parts.extend([name] * a)
        return "*".join(parts) if parts else "1"

    alphas = []

    def gen(prefix, rem, budget):
        if rem == 0:
            alphas.append(tuple(prefix))
            return
        for v in range(budget + 1):
            gen(prefix + [v], rem - 1, budget - v)

    gen([], len(coords), max_deg)

    @st.composite
    def poly(draw):
        coeffs = {}
        for alpha in alphas:
            c = draw(scalars)
            if c:
                coeffs[alpha] = float(c)
        if not coeffs:
            coeffs[(0,) * len(coords)] = 1.0
        src = " + ".join(f"{c}*{term(a)}" for a, c in sorted(coeffs.items()))
        return src, coeffs

    return poly()


def _poly_taylor_coeff(coeffs, alpha, point):
    """Exact Taylor coefficient of a polynomial at a point: differentiate
    term by term, divide by alpha!."""
    total = 0.0
    for beta, c in coeffs.items():
        if any(b < a for a, b in zip(alpha, beta)):
            continue
        v = c
        for x0, a, b in zip(point, alpha, beta):
            v *= math.comb(b, a) * x0 ** (b - a)
        total += v
    return total


@settings(max_examples=30, deadline=None)
@given(_poly_exprs(["x", "y"], 4), st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_polynomial_jets_match_exact_expansion(poly, point):
    src, coeffs = poly
    j = jet_eval(parse_expr(src, ["x", "y"]), point, 4)
    scale = max(1.0, max(abs(c) for c in coeffs.values())) * max(1.0, max(abs(p) for p in point)) ** 4
    for alpha in j.space.indices:
        expected = _poly_taylor_coeff(coeffs, alpha, point)
        assert abs(j.coeff(alpha) - expected) <= 1e-12 * scale * 16


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["exp(u)", "sin(u)", "cos(u)", "u*u + 3*u", "1/(u+4)"]),
    st.sampled_from(["x*y + 1", "sin(x) + 2", "x - y + 1.5"]),
    st.tuples(st.floats(-1, 1), st.floats(-1, 1)),
)
def test_chain_rule_composition(f_src, g_src, point):
    """Jet of f(g(x, y)) via univariate jet substitution must equal the jet
    of the textually composed tree."""
    order = 4
    composed = f_src.replace("u", f"({g_src})")
    direct = jet_eval(parse_expr(composed, ["x", "y"]), point, order)
    jg = jet_eval(parse_expr(g_src, ["x", "y"]), point, order)
    jf_at = jet_eval(parse_expr(f_src, ["u"]), (jg.value,), order)
    # substitute: f(g) = sum_k f_k (g - g0)^k
    space = jg.space
    H = jg.coeffs.copy()
    H[0] = 0.0
    out = space.constant(jf_at.coeff((order,)))
    for k in range(order - 1, -1, -1):
        out = space.mul(out, H)
        out[0] += jf_at.coeff((k,))
    assert np.allclose(out, direct.coeffs, atol=1e-10, rtol=1e-10)


def test_builtin_metric_entries_match_finite_differences(models):
    """First and second jet derivatives of every builtin metric entry agree
    with central differences (steps 1e-4 / 1e-3) within 1e-5 relative."""
    rng = np.random.default_rng(77)
    for name, model in models.items():
        lo = np.array([d[0] for d in model.domain])
        hi = np.array([d[1] for d in model.domain])
        pts = rng.uniform(lo, hi, size=(3, model.dim))
        for src_row in model.metric:
            for src in src_row:
                expr = parse_expr(src, model.coords)
                f = lambda x: eval_expr_numeric(expr, x)
                for pt in pts:
                    j = jet_eval(expr, pt, 2)
                    for i in range(model.dim):
                        fd1 = fd_partial(f, pt, i, 1e-4)
                        assert j.partial(i) == pytest.approx(fd1, rel=1e-5, abs=1e-7)
                        fd2 = fd_partial(lambda x: fd_partial(f, x, i, 1e-4), pt, i, 1e-3)
                        alpha = tuple(2 if k == i else 0 for k in range(model.dim))
                        assert j.derivative(alpha) == pytest.approx(fd2, rel=1e-5, abs=1e-6)


def test_jet_space_is_cached():
    assert JetSpace.get(3, 4) is JetSpace.get(3, 4)


def test_order_zero_jet():
    j = jet_eval(parse_expr("sin(x)*x", ["x"]), (0.5,), 0)
    assert j.value == pytest.approx(0.5 * math.sin(0.5))
    assert j.space.ncoeffs == 1
