import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from deltachain.combinatorics import MultiIndex
from deltachain.polynomials import (
    Poly,
    PolynomialMap,
    compose,
    d_alpha,
    directional_derivative,
    iterated_directional,
    iterated_tangent_lift,
    random_polynomial_map,
    tangent_lift,
)

mi = MultiIndex.from_string

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def polys(nvars: int, degree: int = 3):
    exps = st.tuples(*([st.integers(0, degree)] * nvars))
    return st.dictionaries(exps, rationals, max_size=5).map(
        lambda d: Poly.make(nvars, d)
    )


def pts(nvars: int):
    return st.tuples(*([rationals] * nvars))


# -- polynomial arithmetic ------------------------------------------------------

def test_make_normalizes_zero_coefficients():
    p = Poly.make(2, {(1, 0): 1, (0, 1): 0})
    assert p.as_dict() == {(1, 0): Fraction(1)}
    assert not p.is_zero
    assert Poly.make(2, {}).is_zero


def test_degrees():
    p = Poly.make(2, {(2, 1): 1, (0, 1): 3})
    assert p.degree == 3
    assert p.min_degree == 1
    assert Poly.constant(2, 5).min_degree == 0
    assert Poly.make(2, {}).min_degree is None


def test_variable_and_constant():
    x = Poly.variable(2, 0)
    y = Poly.variable(2, 1)
    p = x * x + 2 * y + 3
    assert p((Fraction(2), Fraction(5))) == 4 + 10 + 3


@given(polys(2), polys(2), pts(2))
def test_ring_laws_at_points(p, q, v):
    assert (p + q)(v) == p(v) + q(v)
    assert (p * q)(v) == p(v) * q(v)
    assert (p - q)(v) == p(v) - q(v)
    assert (-p)(v) == -(p(v))


@given(polys(1), st.integers(0, 4), pts(1))
def test_power_matches_repeated_product(p, n, v):
    assert (p ** n)(v) == p(v) ** n


def test_zero_poly_evaluates_to_exact_zero():
    z = Poly.make(2, {})
    out = z((Fraction(1), Fraction(2)))
    assert out == 0 and isinstance(out, Fraction)


@given(polys(2), polys(1), polys(1), pts(1))
def test_call_with_polynomials_is_composition(p, a, b, v):
    composed = p((a, b))
    if isinstance(composed, Poly):
        assert composed(v) == p((a(v), b(v)))
    else:
        assert composed == p((a(v), b(v)))


# -- derivatives -------------------------------------------------------------------

def test_partial_of_a_monomial():
    p = Poly.make(2, {(3, 2): 4})
    assert p.partial(0).as_dict() == {(2, 2): Fraction(12)}
    assert p.partial(1).as_dict() == {(3, 1): Fraction(8)}


@given(polys(2), pts(2), pts(2))
def test_directional_is_linear_in_the_direction(p, u, w):
    both = p.directional(tuple(a + b for a, b in zip(u, w)))
    assert both == p.directional(u) + p.directional(w)


def test_mixed_partials_commute():
    rng = random.Random(5)
    f = random_polynomial_map(rng, 2, 1, 4)
    u, w = (1, 2), (3, -1)
    assert iterated_directional(f, (u, w)) == iterated_directional(f, (w, u))


def test_d_alpha_selects_directions_by_support():
    rng = random.Random(7)
    f = random_polynomial_map(rng, 2, 1, 4)
    vectors = ((1, 0), (0, 1), (2, 3))
    assert d_alpha(f, vectors, mi("101")) == iterated_directional(
        f, ((1, 0), (2, 3))
    )
    with pytest.raises(ValueError):
        d_alpha(f, vectors[:2], mi("101"))


# -- polynomial maps ----------------------------------------------------------------

def test_map_validates_component_variable_count():
    with pytest.raises(ValueError):
        PolynomialMap(2, (Poly.variable(3, 0),))


def test_compose_evaluates_pointwise():
    rng = random.Random(3)
    f = random_polynomial_map(rng, 2, 2, 2)
    g = random_polynomial_map(rng, 2, 2, 2)
    fg = compose(f, g)
    for seed in range(5):
        r = random.Random(seed)
        x = tuple(Fraction(r.randint(-4, 4)) for _ in range(2))
        assert fg(x) == f(g(x))


def test_compose_checks_dimensions():
    rng = random.Random(3)
    f = random_polynomial_map(rng, 3, 1, 2)
    g = random_polynomial_map(rng, 2, 2, 2)
    with pytest.raises(ValueError):
        compose(f, g)


def test_compose_handles_constant_components():
    f = PolynomialMap(1, (Poly.constant(1, 7),))
    g = PolynomialMap(1, (Poly.variable(1, 0),))
    assert compose(f, g)((Fraction(2),)) == (Fraction(7),)


# -- tangent lifts ------------------------------------------------------------------

def test_tangent_lift_layout():
    """The lift doubles the variables: value block first, derivative block
    second, matching the flattened two-component cuboid layout."""
    rng = random.Random(11)
    f = random_polynomial_map(rng, 2, 2, 3)
    lift = tangent_lift(f)
    assert lift.domain_dim == 4
    assert lift.codomain_dim == 4
    x = (Fraction(1), Fraction(-1))
    u = (Fraction(2), Fraction(3))
    out = lift(x + u)
    assert out[:2] == f(x)
    assert out[2:] == directional_derivative(f, u)(x)


def test_tangent_lift_is_functorial():
    rng = random.Random(13)
    f = random_polynomial_map(rng, 2, 2, 2)
    g = random_polynomial_map(rng, 2, 2, 2)
    assert tangent_lift(compose(f, g)) == compose(tangent_lift(f), tangent_lift(g))


def test_iterated_tangent_lift_is_functorial():
    rng = random.Random(17)
    f = random_polynomial_map(rng, 1, 1, 2)
    g = random_polynomial_map(rng, 1, 1, 2)
    assert iterated_tangent_lift(compose(f, g), 2) == compose(
        iterated_tangent_lift(f, 2), iterated_tangent_lift(g, 2)
    )


def test_directional_derivative_of_lift_direction():
    """Differentiating the lift along a fiber direction recovers the
    derivative of the underlying map in the value block."""
    rng = random.Random(19)
    f = random_polynomial_map(rng, 1, 1, 3)
    lift = tangent_lift(f)
    x, u = Fraction(2), Fraction(1)
    # the fiber component is linear in u by construction
    v0 = lift((x, Fraction(0)))
    v1 = lift((x, u))
    assert v0[0] == v1[0]


# -- random map generator -------------------------------------------------------------

def test_random_map_is_deterministic_per_seed():
    a = random_polynomial_map(random.Random(42), 2, 2, 3)
    b = random_polynomial_map(random.Random(42), 2, 2, 3)
    assert a == b


def test_random_map_respects_degree_and_shape():
    f = random_polynomial_map(random.Random(1), 3, 2, 2)
    assert f.domain_dim == 3
    assert f.codomain_dim == 2
    assert all(p.degree <= 2 for p in f.components)


def test_dense_random_map_has_every_monomial():
    f = random_polynomial_map(random.Random(1), 2, 1, 3, dense=True)
    (p,) = f.components
    assert len(p.as_dict()) == 10  # all monomials with total degree <= 3


def test_scaling_substitution_gives_valuations():
    """Substituting t*direction for each variable turns a polynomial into a
    univariate polynomial in t whose minimum degree is the vanishing order."""
    t = Poly.variable(1, 0)
    p = Poly.make(2, {(1, 1): 1, (0, 3): 2})
    q = p((t * 1, t * 2))
    assert q.min_degree == 2
    assert q.degree == 3
