import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bismutkit.errors import ChartMismatchError, DegreeError, ExcludedLocusError, NumericalAbort
from bismutkit.forms import (
    Chart,
    DifferentialForm,
    SmoothMap,
    VectorField,
    basis,
    exterior_derivative,
    interior_product,
    lie_bracket,
    pullback,
    wedge,
)


def perm_sign(p):
    sign, p = 1, list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def alt_product(A, B):
    """(a^b)(v...) = 1/(k! l!) sum_sigma sgn(sigma) a(v_sigma...) b(v_sigma...)."""
    k, l = A.ndim, B.ndim
    T = np.multiply.outer(A, B)
    out = np.zeros_like(T)
    for perm in itertools.permutations(range(k + l)):
        out += perm_sign(perm) * np.transpose(T, perm)
    return out / (math.factorial(k) * math.factorial(l))


def random_form(chart, degree, rng, name=""):
    """Polynomial-coefficient form with coefficients c0 + c.x + x_i x_j."""
    n = chart.dim
    comps = {}
    for idx in basis(n, degree):
        c0, lin = rng.normal(), rng.normal(size=n)
        i, j = rng.integers(n, size=2)
        comps[idx] = (lambda c0, lin, i, j: lambda x: c0 + sum(lin[m] * x[m] for m in range(n)) + x[i] * x[j])(
            c0, lin, i, j)
    return DifferentialForm.from_components(chart, degree, comps, name)


def random_vector(chart, rng):
    n = chart.dim
    a, b = rng.normal(size=n), rng.normal(size=(n, n))

    def fn(x):
        from bismutkit.jets import Jet
        return Jet.stack([a[i] + sum(b[i, m] * x[m] for m in range(n)) * x[i] for i in range(n)])

    return VectorField.from_coordinates(chart, fn, "X")


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 3), st.integers(0, 3), st.integers(0, 10**6))
def test_wedge_matches_permutation_sum(n, k, l, seed):
    if k + l > n:
        return
    rng = np.random.default_rng(seed)
    chart = Chart("R", n)
    a, b = random_form(chart, k, rng), random_form(chart, l, rng)
    p = chart.point(rng.normal(size=n))
    got = wedge(a, b).tensor(p, 0).value
    want = alt_product(a.tensor(p, 0).value, b.tensor(p, 0).value)
    np.testing.assert_allclose(got, want, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6))
def test_d_squared_vanishes(n, seed):
    rng = np.random.default_rng(seed)
    chart = Chart("R", n)
    k = int(rng.integers(0, n))
    a = random_form(chart, k, rng)
    p = chart.point(rng.normal(size=n))
    dd = exterior_derivative(exterior_derivative(a)).evaluate(p, 3).value
    assert np.max(np.abs(dd), initial=0.0) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_leibniz_rule(n, seed):
    rng = np.random.default_rng(seed)
    chart = Chart("R", n)
    k = int(rng.integers(0, n))
    l = int(rng.integers(0, n - k))
    a, b = random_form(chart, k, rng), random_form(chart, l, rng)
    p = chart.point(rng.normal(size=n))
    lhs = exterior_derivative(wedge(a, b)).evaluate(p, 3).value
    rhs = (wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)).scale((-1) ** k)).evaluate(p, 3).value
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_interior_product_twice_vanishes(n, seed):
    rng = np.random.default_rng(seed)
    chart = Chart("R", n)
    a = random_form(chart, int(rng.integers(2, n + 1)), rng)
    X = random_vector(chart, rng)
    p = chart.point(rng.normal(size=n))
    twice = interior_product(X, interior_product(X, a)).evaluate(p, 2).value
    assert np.max(np.abs(twice)) < 1e-11


def test_interior_product_is_first_slot():
    chart = Chart("R", 3)
    rng = np.random.default_rng(3)
    a = random_form(chart, 2, rng)
    X = VectorField.coordinate(chart, 1)
    p = chart.point([0.2, 0.4, -1.0])
    v = np.array([0.5, -1.0, 2.0])
    assert interior_product(X, a).on(p, v) == pytest.approx(a.on(p, [0, 1, 0], v))


def test_d_of_coordinate_function_products():
    chart = Chart("R", 2)
    f = DifferentialForm.from_components(chart, 0, {(): lambda x: x[0] ** 2 * x[1]})
    df = exterior_derivative(f).evaluate(chart.point([3.0, 2.0]), 1).value
    np.testing.assert_allclose(df, [12.0, 9.0])


def test_unsorted_component_keys_pick_up_sign():
    chart = Chart("R", 3)
    a = DifferentialForm.from_components(chart, 2, {(2, 0): 1.0})
    assert a.on(chart.point([0, 0, 0]), [1, 0, 0], [0, 0, 1]) == pytest.approx(-1.0)


def test_lie_bracket_example():
    chart = Chart("R", 2)
    from bismutkit.jets import Jet
    X = VectorField.from_coordinates(chart, lambda x: Jet.stack([0.0 * x[0], x[0]]), "x dy")
    Y = VectorField.from_coordinates(chart, lambda x: Jet.stack([x[1], 0.0 * x[0]]), "y dx")
    val = lie_bracket(X, Y).evaluate(chart.point([1.5, -0.5]), 1).value
    np.testing.assert_allclose(val, [1.5, 0.5])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_jacobi_identity_for_vector_fields(seed):
    rng = np.random.default_rng(seed)
    chart = Chart("R", 3)
    X, Y, Z = (random_vector(chart, rng) for _ in range(3))
    p = chart.point(rng.normal(size=3))
    total = sum(lie_bracket(A, lie_bracket(B, C)).evaluate(p, 2).value
                for A, B, C in ((X, Y, Z), (Y, Z, X), (Z, X, Y)))
    assert np.max(np.abs(total)) < 1e-10


def _quadratic_map(source, target, rng):
    A = rng.normal(size=(target.dim, source.dim))
    B = 0.3 * rng.normal(size=(target.dim, source.dim))

    def fn(x):
        from bismutkit.jets import Jet
        return Jet.stack([sum(A[a, i] * x[i] + B[a, i] * x[i] * x[(i + 1) % source.dim]
                              for i in range(source.dim)) for a in range(target.dim)])

    return SmoothMap(source, target, fn)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_pullback_is_functorial_and_commutes_with_d(seed):
    rng = np.random.default_rng(seed)
    U, V, W = Chart("U", 3), Chart("V", 3), Chart("W", 4)
    f, g = _quadratic_map(U, V, rng), _quadratic_map(V, W, rng)
    a = random_form(W, 2, rng)
    p = U.point(rng.normal(size=3))
    # pullback consumes one jet order, hence the staggered evaluation orders
    lhs = pullback(g @ f, a).evaluate(p, 2).value
    rhs = pullback(f, pullback(g, a)).evaluate(p, 2).value
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)
    d_then_pull = pullback(g @ f, exterior_derivative(a)).evaluate(p, 1).value
    pull_then_d = exterior_derivative(pullback(g @ f, a)).evaluate(p, 2).value
    np.testing.assert_allclose(d_then_pull, pull_then_d, atol=1e-10)


def test_linear_pullback_of_top_form_is_determinant():
    chart = Chart("R", 3)
    M = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0], [4.0, 0.0, 1.0]])
    vol = DifferentialForm.from_components(chart, 3, {(0, 1, 2): 1.0})
    got = pullback(SmoothMap.linear(chart, chart, M), vol).evaluate(chart.point([0.1, 0.2, 0.3]), 1).value
    assert got[0] == pytest.approx(np.linalg.det(M))


def test_chart_mismatch_and_degree_errors():
    a_chart, b_chart = Chart("a", 2), Chart("b", 2)
    a = DifferentialForm.from_components(a_chart, 1, {(0,): 1.0})
    b = DifferentialForm.from_components(b_chart, 1, {(0,): 1.0})
    with pytest.raises(ChartMismatchError):
        wedge(a, b)
    with pytest.raises(ChartMismatchError):
        a.evaluate(b_chart.point([0.0, 0.0]))
    with pytest.raises(DegreeError):
        wedge(wedge(a, a), a)
    with pytest.raises(DegreeError):
        DifferentialForm.from_components(a_chart, 3, {})
    with pytest.raises(DegreeError):
        interior_product(VectorField.coordinate(a_chart, 0), DifferentialForm.from_components(a_chart, 0, {(): 1.0}))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_excluded_locus_and_nan():
    chart = Chart("punctured", 2, locus=lambda x: x[0] ** 2 + x[1] ** 2)
    with pytest.raises(ExcludedLocusError):
        chart.point([0.0, 0.0])
    with pytest.raises(NumericalAbort):
        chart.point([np.nan, 1.0])
    line = Chart("R", 1)
    f = DifferentialForm.from_components(line, 0, {(): lambda x: (x[0] - 1.0).log()})
    with pytest.raises(NumericalAbort):
        f.evaluate(line.point([0.0]))
