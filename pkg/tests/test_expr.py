import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freesurf.expr import (
    Compare,
    Const,
    ExprSyntaxError,
    Kernel,
    Piecewise,
    UnboundVariableError,
    UnknownIdentifierError,
    UnknownVariableError,
    Var,
    VariableLayout,
    evaluate,
    free_vars,
    jacobian,
    maximum,
    parse,
    piecewise,
    simplify,
    sqrt,
    substitute,
    to_string,
    differentiate,
)

from strategies import LAYOUT, VARS, bindings, smooth_trees, trees

SWE = VariableLayout(("h", "hu"), (), {"g": 9.81}, 1)
h, hu = SWE.Q
g = SWE.p("g")
SWE_FLUX = (hu, hu**2 / h + g / 2 * h**2)


def swe_bind(hv, huv, gv):
    return {h: hv, hu: huv, g: gv}


# --- differentiate -----------------------------------------------------------

def test_power_rule():
    d = differentiate(g / 2 * h**2, h)
    for hv in (0.3, 1.0, 2.5):
        assert evaluate(d, swe_bind(hv, 0, 9.81)) == pytest.approx(9.81 * hv, rel=1e-15)


def test_constant_derivative_is_zero():
    assert simplify(differentiate(Const(7), SWE.x)) == Const(0)


def test_quotient_rule():
    d = differentiate(hu**2 / h, hu)
    assert evaluate(d, swe_bind(2.0, 3.0, 1.0)) == pytest.approx(2 * 3.0 / 2.0)


def test_kink_uses_first_branch():
    e = maximum(h, hu)
    # at h == hu the derivative follows the first argument
    assert evaluate(differentiate(e, h), swe_bind(1.0, 1.0, 1.0)) == 1.0
    assert evaluate(differentiate(e, hu), swe_bind(1.0, 1.0, 1.0)) == 0.0


@settings(max_examples=100, deadline=None)
@given(smooth_trees, bindings, st.sampled_from(VARS))
def test_derivative_matches_central_differences(e, bind, v):
    x = bind[v]
    step = 1e-6 * (1 + abs(x))
    up, dn = dict(bind), dict(bind)
    up[v], dn[v] = x + step, x - step
    fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * step)
    exact = evaluate(differentiate(e, v), bind)
    assert abs(exact - fd) <= 1e-5 * max(1.0, abs(fd)) + 1e-6


# --- jacobian ----------------------------------------------------------------

def test_swe_jacobian_against_finite_differences():
    J = jacobian(SWE_FLUX, SWE.Q)
    exact = np.array([[evaluate(J[i][j], swe_bind(1.0, 0.0, 1.0)) for j in range(2)] for i in range(2)])
    assert np.allclose(exact, [[0, 1], [1, 0]], atol=1e-15)
    step = 1e-6
    fd = np.zeros((2, 2))
    for j in range(2):
        q = np.array([1.0, 0.0])
        up, dn = q.copy(), q.copy()
        up[j] += step
        dn[j] -= step
        fup = [evaluate(f, swe_bind(*up, 1.0)) for f in SWE_FLUX]
        fdn = [evaluate(f, swe_bind(*dn, 1.0)) for f in SWE_FLUX]
        fd[:, j] = (np.array(fup) - np.array(fdn)) / (2 * step)
    assert np.allclose(exact, fd, atol=1e-6)


def test_jacobian_identity_and_zero():
    J = jacobian(SWE.Q, SWE.Q)
    assert [[simplify(e) for e in row] for row in J] == [[Const(1), Const(0)], [Const(0), Const(1)]]
    Z = jacobian((Const(0), Const(0)), SWE.Q)
    assert all(simplify(e) == Const(0) for row in Z for e in row)


# --- substitute ----------------------------------------------------------------

def test_substitute_simultaneous():
    u = Var("aux", 0, "u")
    e = substitute(h * u, {u: hu / h})
    assert to_string(e) == "(h * (hu / h))"
    # simultaneous: swapping does not chain
    s = substitute(h + 2 * hu, {h: hu, hu: h})
    assert evaluate(s, swe_bind(1.0, 10.0, 0)) == 10.0 + 2.0


def test_substitute_without_match_is_identity():
    e = g * h + sqrt(hu)
    assert substitute(e, {Var("aux", 3, "zz"): Const(1)}) == e


@settings(max_examples=60, deadline=None)
@given(trees, bindings)
def test_substitute_constants_matches_bindings(e, bind):
    consts = {v: Const(float(x)) for v, x in bind.items() if v.kind == "state"}
    rest = {v: x for v, x in bind.items() if v.kind != "state"}
    a = evaluate(substitute(e, consts), rest)
    b = evaluate(e, bind)
    assert a == b or (np.isnan(a) and np.isnan(b))


# --- simplify ------------------------------------------------------------------

def test_simplify_examples():
    assert simplify(parse("(2*3)*h", SWE)) == simplify(6 * h)
    assert simplify(h + 0) == h
    assert simplify(h * 1) == h and simplify(h * 0) == Const(0)
    assert simplify(h / 1) == h
    assert simplify(h**1) == h and simplify(h**0) == Const(1)


@settings(max_examples=100, deadline=None)
@given(trees, bindings)
def test_simplify_preserves_value(e, bind):
    a, b = evaluate(e, bind), evaluate(simplify(e), bind)
    if np.isfinite(a):
        assert abs(a - b) <= 1e-14 * max(1.0, abs(a))


@settings(max_examples=60, deadline=None)
@given(trees, bindings)
def test_simplify_keeps_condition_truth(e, bind):
    def conds(x):
        out = []
        stack = [x]
        while stack:
            node = stack.pop()
            if isinstance(node, Piecewise):
                out.extend(c for c, _ in node.branches if isinstance(c, Compare))
            stack.extend(node.children())
        return out

    # every surviving condition is the simplified form of an original one, with the same truth value
    original = {(to_string(simplify(c)), bool(evaluate(c, bind))) for c in conds(e)}
    for c in conds(simplify(e)):
        assert (to_string(c), bool(evaluate(c, bind))) in original


# --- parse / print -------------------------------------------------------------

def test_parse_precedence():
    assert simplify(parse("1 + 2*3", SWE)) == Const(7)
    assert evaluate(parse("2^3^2", SWE), {}) == 2.0**9
    assert evaluate(parse("-2^2", SWE), {}) == -4.0


def test_parse_product_of_names():
    L = VariableLayout(("h", "u"), (), (), 1)
    assert evaluate(parse("h*u", L), {"h": 2.0, "u": 3.0}) == 6.0


def test_ternary_matches_max():
    L = VariableLayout(("h",), (), (), 1)
    e = parse("h - z > 0 ? h - z : 0", L)
    ref = parse("max(h - z, 0)", L)
    rng = np.random.default_rng(0)
    for hv, zv in rng.uniform(-2, 2, size=(100, 2)):
        assert evaluate(e, {"h": hv, "z": zv}) == evaluate(ref, {"h": hv, "z": zv})


def test_unknown_identifier_reports_name_and_offset():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("h + hv*2", SWE)
    assert info.value.name == "hv" and info.value.offset == 4


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("h + * 2", SWE)
    assert info.value.offset == 4


@settings(max_examples=100, deadline=None)
@given(trees, bindings)
def test_parse_print_roundtrip(e, bind):
    back = parse(to_string(e), LAYOUT)
    a, b = evaluate(e, bind), evaluate(back, bind)
    assert a == b or (np.isnan(a) and np.isnan(b))


# --- kernels -------------------------------------------------------------------

def test_swe_flux_kernel():
    k = Kernel(SWE_FLUX, SWE)
    out = k(0.0, None, np.array([2.0, 0.0]), None, [9.81])
    assert out[0] == 0.0 and out[1] == pytest.approx(19.62, rel=1e-15)


def test_constant_kernel_broadcasts():
    k = Kernel([Const(5)], SWE)
    out = k(0.0, None, np.zeros((2, 7)), None, [1.0])
    assert out.shape == (1, 7) and np.all(out == 5)


def test_kernel_rejects_foreign_variable():
    with pytest.raises(UnknownVariableError):
        Kernel([Var("state", 5, "w")], SWE)


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        evaluate(h + 1, {})


def test_division_by_zero_is_ieee():
    assert np.isinf(evaluate(Const(1) / h, {h: 0.0}))


def test_eval_examples():
    assert evaluate(sqrt(4), {}) == 2.0
    L = VariableLayout(("h",), (), {"rho": 1000.0, "g": 9.81}, 1)
    hh = L.state("h")
    pw = piecewise((1, hh - L.z > 0), (0, True))
    assert evaluate(pw, {"h": 1.0, "z": 2.0}) == 0.0
    p = L.p("rho") * L.p("g") * maximum(hh - L.z, 0)
    assert evaluate(p, {"h": 1.0, "z": 0.0, "rho": 1000.0, "g": 9.81}) == pytest.approx(9810.0, rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(trees, min_size=1, max_size=4), st.integers(0, 2**31 - 1))
def test_kernel_matches_interpreter(exprs, seed):
    rng = np.random.default_rng(seed)
    n = 5
    Q = rng.uniform(0.5, 2.0, (3, n))
    A = rng.uniform(0.5, 2.0, (1, n))
    X = rng.uniform(0.5, 2.0, (4, n))
    P = np.array([rng.uniform(0.5, 2.0)])
    out = Kernel(exprs, LAYOUT)(0.0, X, Q, A, P)
    names = ["h", "hu", "q"]
    for c in range(n):
        bind = {names[i]: Q[i, c] for i in range(3)}
        bind.update(a=A[0, c], g=P[0], x=X[0, c])
        for i, e in enumerate(exprs):
            ref = evaluate(e, bind)
            if np.isnan(ref):
                assert np.isnan(out[i, c])
            else:
                assert abs(out[i, c] - ref) <= 1e-15


def test_free_vars():
    assert free_vars(g * h + 1) == {g, h}
