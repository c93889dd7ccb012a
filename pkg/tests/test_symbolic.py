import json

import pytest
from hypothesis import given, settings, strategies as st

import reference_formulas as ref
from deltachain.combinatorics import MultiIndex, bell_number
from deltachain.symbolic import (
    App,
    ComponentSym,
    DeltaTerm,
    PointSym,
    Sum,
    VecSym,
    canonicalize,
    expand_chain,
    expand_tangent,
    expr_from_obj,
    expr_to_obj,
    main_part,
    order_of,
    parse,
    render,
    sort_key,
    substitute_components,
)

mi = MultiIndex.from_string


# -- expression strategy ------------------------------------------------------

names = st.sampled_from(["f", "g", "h"])
points = st.sampled_from(["x", "y"])
vec_names = st.sampled_from(["v_1", "v_2", "v_3", "w_1"])
indices = st.sampled_from(["0", "1", "01", "10", "11", "101", "110"]).map(mi)


def exprs(depth: int = 3):
    leaves = st.one_of(
        points.map(PointSym),
        vec_names.map(VecSym),
        st.tuples(st.sampled_from(["u", "w"]), indices).map(
            lambda t: ComponentSym(*t)
        ),
    )

    def extend(children):
        return st.one_of(
            st.tuples(names, children).map(lambda t: App(*t)),
            st.tuples(
                st.lists(
                    st.tuples(st.integers(0, 2), children), min_size=1, max_size=3
                ),
                names,
                children,
            ).map(
                lambda t: DeltaTerm(
                    tuple(a for a, _ in t[0]),
                    tuple(d for _, d in t[0]),
                    t[1],
                    t[2],
                )
            ),
            st.lists(children, min_size=1, max_size=4).map(
                lambda ts: Sum(tuple(ts))
            ),
        )

    return st.recursive(leaves, extend, max_leaves=depth * 4)


# -- orders ---------------------------------------------------------------------

def test_order_of_each_node_kind():
    assert order_of(PointSym("x")) == 0
    assert order_of(VecSym("v_1")) == 1
    assert order_of(ComponentSym("u", mi("101"))) == 2
    assert order_of(App("f", VecSym("v_1"))) == 0
    term = DeltaTerm((2, 1), (VecSym("v_1"), ComponentSym("u", mi("11"))), "f", PointSym("x"))
    assert order_of(term) == 2 * 1 + 1 * 2
    assert order_of(Sum((VecSym("v_1"), ComponentSym("u", mi("11"))))) == 1


def test_delta_term_validation():
    with pytest.raises(ValueError):
        DeltaTerm((1, 1), (VecSym("v_1"),), "f", PointSym("x"))
    with pytest.raises(ValueError):
        DeltaTerm((-1,), (VecSym("v_1"),), "f", PointSym("x"))


def test_sort_key_orders_components_by_order_then_position():
    comps = [ComponentSym("u", mi(s)) for s in ("11", "10", "00", "01")]
    ordered = sorted(comps, key=sort_key)
    assert [str(c.index) for c in ordered] == ["00", "01", "10", "11"]


# -- canonicalization -------------------------------------------------------------

def test_canonicalize_flattens_and_sorts_sums():
    e = Sum((Sum((VecSym("v_2"), VecSym("v_1"))), PointSym("x")))
    assert canonicalize(e) == Sum((PointSym("x"), VecSym("v_1"), VecSym("v_2")))


def test_canonicalize_collapses_trivial_nodes():
    assert canonicalize(Sum((VecSym("v_1"),))) == VecSym("v_1")
    empty = DeltaTerm((), (), "f", PointSym("x"))
    assert canonicalize(empty) == App("f", PointSym("x"))


def test_canonicalize_expands_repeated_directions():
    e = DeltaTerm((2, 0, 1), (VecSym("v_1"), VecSym("v_2"), VecSym("v_3")), "f", PointSym("x"))
    c = canonicalize(e)
    assert isinstance(c, DeltaTerm)
    assert c.alpha == (1, 1, 1)
    assert c.directions == (VecSym("v_1"), VecSym("v_1"), VecSym("v_3"))


def test_canonicalize_drops_a_term_that_loses_all_directions():
    e = DeltaTerm((0,), (VecSym("v_1"),), "f", PointSym("x"))
    assert canonicalize(e) == App("f", PointSym("x"))


@settings(max_examples=300)
@given(exprs())
def test_canonicalize_is_idempotent(e):
    c = canonicalize(e)
    assert canonicalize(c) == c


@settings(max_examples=300)
@given(exprs())
def test_canonicalize_preserves_order(e):
    assert order_of(canonicalize(e)) == order_of(e)


# -- generated expansions ----------------------------------------------------------

def test_tangent_expansion_of_the_square():
    assert expand_tangent(mi("11")) == canonicalize(ref.TANGENT_11)


def test_tangent_expansion_of_the_cube():
    got = expand_tangent(mi("111"))
    assert got == canonicalize(ref.TANGENT_111)
    assert len(got.terms) == 5


def test_chain_expansion_of_the_square():
    assert expand_chain(mi("11")) == canonicalize(ref.CHAIN_11)


def test_chain_expansion_of_the_cube():
    got = expand_chain(mi("111"))
    assert got == canonicalize(ref.CHAIN_111)
    assert len(got.terms) == 5


def test_main_part_keeps_one_term_per_partition_at_base_order():
    assert main_part(mi("11")) == canonicalize(ref.MAIN_11)
    assert main_part(mi("111")) == canonicalize(ref.MAIN_111)


@pytest.mark.parametrize("k", range(1, 6))
def test_expansions_have_one_term_per_partition(k):
    alpha = MultiIndex.ones(k)
    tangent = expand_tangent(alpha)
    chain = expand_chain(alpha)
    n = bell_number(k)
    if n == 1:
        tangent, chain = Sum((tangent,)), Sum((chain,))
    assert len(tangent.terms) == n
    assert len(chain.terms) == n


@pytest.mark.parametrize("k", range(1, 6))
def test_chain_terms_are_homogeneous_of_full_order(k):
    """Every term of the composite expansion has order exactly k: each
    direction sum is dominated by its lowest-order member, which is the
    block itself, and block orders add up to k."""
    alpha = MultiIndex.ones(k)
    chain = expand_chain(alpha)
    terms = chain.terms if isinstance(chain, Sum) else (chain,)
    for t in terms:
        assert order_of(t) == k
    main = main_part(alpha)
    main_terms = main.terms if isinstance(main, Sum) else (main,)
    for t in main_terms:
        assert order_of(t) == k


def test_expansion_handles_sparse_multi_indices():
    sparse = expand_tangent(mi("101"))
    assert len(sparse.terms) == bell_number(2)
    for term in sparse.terms:
        for d in term.directions:
            comps = d.terms if isinstance(d, Sum) else (d,)
            for c in comps:
                assert c.index <= mi("101")


def test_substitute_components():
    e = Sum((ComponentSym("u", mi("10")), App("f", ComponentSym("u", mi("01")))))
    out = substitute_components(e, lambda c: VecSym(f"s_{c.index.mask}"))
    assert out == Sum((VecSym("s_1"), App("f", VecSym("s_2"))))


# -- rendering ---------------------------------------------------------------------

def test_text_rendering_of_the_square_formulas():
    assert (
        render(expand_tangent(mi("11")))
        == "Δ_{u_{1,2}} f(u_0 + u_2 + u_1) + Δ^2_{u_2, u_1} f(u_0)"
    )
    assert render(expand_chain(mi("11"))) == (
        "Δ_{Δ^2_{v_1, v_2} g(x)} f(g(x) + Δ_{v_1} g(x) + Δ_{v_2} g(x))"
        " + Δ^2_{Δ_{v_1} g(x), Δ_{v_2} g(x)} f(g(x))"
    )


def test_latex_rendering_of_the_square_formula():
    assert render(expand_tangent(mi("11")), "latex") == (
        "\\Delta_{u_{1,2}} f(u_0 + u_2 + u_1)"
        " + \\Delta^{2}_{u_2, u_1} f(u_0)"
    )


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        render(PointSym("x"), "html")


def test_json_rendering_has_a_versioned_envelope():
    doc = json.loads(render(expand_chain(mi("11")), "json"))
    assert doc["version"] == 1
    assert doc["root"]["node"] == "sum"


# -- serialization round trips -------------------------------------------------------

@settings(max_examples=300)
@given(exprs())
def test_object_round_trip(e):
    assert expr_from_obj(expr_to_obj(e)) == e


@pytest.mark.parametrize("k", range(1, 5))
def test_json_round_trip_of_generated_formulas(k):
    alpha = MultiIndex.ones(k)
    for e in (expand_tangent(alpha), expand_chain(alpha), main_part(alpha)):
        assert parse(render(e, "json"), "json") == e


@pytest.mark.parametrize("k", range(1, 4))
def test_text_round_trip_of_generated_formulas(k):
    alpha = MultiIndex.ones(k)
    for e in (expand_tangent(alpha), expand_chain(alpha)):
        assert parse(render(e, "text"), dim=k) == e


def test_text_parse_infers_the_dimension():
    e = expand_tangent(mi("111"))
    assert parse(render(e)) == e


def test_text_parse_rejects_mismatched_exponent():
    with pytest.raises(ValueError):
        parse("Δ^3_{v_1, v_2} g(x)", dim=2)


def test_text_parse_rejects_trailing_garbage():
    with pytest.raises(ValueError):
        parse("f(x) )", dim=1)


def test_json_parse_rejects_bad_envelope():
    with pytest.raises(ValueError):
        parse(json.dumps({"root": {"node": "point", "name": "x"}}), "json")
    with pytest.raises(ValueError):
        parse(json.dumps({"version": 2, "root": {}}), "json")
