"""Exact evaluation of difference expressions and the verification suites.

Everything here computes in rational arithmetic; the only floating-point
step is the slope fit in the remainder-scaling check, which is the one
deliberately inexact report.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .combinatorics import MultiIndex, enumerate_partitions, refine
from .cuboid import (
    Cuboid,
    PointedDirections,
    Value,
    delta,
    delta_inv,
    discrete_tangent,
    inject,
    pair,
    vector_add,
    vector_sub,
)
from .polynomials import (
    Poly,
    PolynomialMap,
    compose,
    d_alpha,
    iterated_directional,
    iterated_tangent_lift,
    random_polynomial_map,
)
from .symbolic import (
    App,
    ComponentSym,
    DeltaTerm,
    Expr,
    PointSym,
    Sum,
    VecSym,
    expand_chain,
    expand_tangent,
    main_part,
)


class EvaluationError(Exception):
    """Unbound symbol, dimension mismatch, or non-evaluable expression."""


def evaluate_delta(
    F: Callable[[Value], Value],
    base: Value,
    directions: Sequence[Value],
    alpha: MultiIndex | Sequence[int] | None = None,
) -> Value:
    """Iterated difference of F at ``base``: the alternating sum of F over
    all corners base + sum of a subset of directions.

    ``alpha`` repeats direction i ``alpha[i]`` times; omitted means once
    each.  With no directions this is just F(base).
    """
    if alpha is None:
        reps = (1,) * len(directions)
    elif isinstance(alpha, MultiIndex):
        reps = alpha.bits
    else:
        reps = tuple(alpha)
    if len(reps) != len(directions):
        raise ValueError("alpha length differs from direction count")
    dirs: list[Value] = []
    for r, d in zip(reps, directions):
        dirs.extend([tuple(d)] * r)
    k = len(dirs)
    base = tuple(base)

    acc = None
    for mask in range(1 << k):
        pt = base
        for i in range(k):
            if (mask >> i) & 1:
                pt = vector_add(pt, dirs[i])
        val = tuple(F(pt))
        if (k - mask.bit_count()) % 2 == 0:
            acc = val if acc is None else vector_add(acc, val)
        else:
            acc = tuple(-x for x in val) if acc is None else vector_sub(acc, val)
    return acc


def eval_expr(e: Expr, bindings: Mapping[str, Any]) -> Value:
    """Evaluate an expression with names bound to points (tuples), cuboids,
    and callables for function symbols."""

    def lookup(name: str) -> Any:
        try:
            return bindings[name]
        except KeyError:
            raise EvaluationError(f"unbound symbol {name!r}") from None

    if isinstance(e, (PointSym, VecSym)):
        v = lookup(e.name)
        if not isinstance(v, (tuple, list)):
            raise EvaluationError(f"symbol {e.name!r} must be bound to a vector")
        return tuple(v)
    if isinstance(e, ComponentSym):
        c = lookup(e.cuboid)
        if not isinstance(c, Cuboid):
            raise EvaluationError(f"symbol {e.cuboid!r} must be bound to a cuboid")
        try:
            return c.component(e.index)
        except ValueError as exc:
            raise EvaluationError(str(exc)) from None
    if isinstance(e, App):
        F = lookup(e.func)
        if not callable(F):
            raise EvaluationError(f"symbol {e.func!r} must be bound to a map")
        return tuple(F(eval_expr(e.arg, bindings)))
    if isinstance(e, Sum):
        if not e.terms:
            raise EvaluationError("cannot evaluate an empty sum")
        acc = eval_expr(e.terms[0], bindings)
        for t in e.terms[1:]:
            try:
                acc = vector_add(acc, eval_expr(t, bindings))
            except ValueError as exc:
                raise EvaluationError(str(exc)) from None
        return acc
    if isinstance(e, DeltaTerm):
        F = lookup(e.func)
        if not callable(F):
            raise EvaluationError(f"symbol {e.func!r} must be bound to a map")
        base = eval_expr(e.base, bindings)
        dirs = [eval_expr(d, bindings) for d in e.directions]
        try:
            return evaluate_delta(F, base, dirs, e.alpha)
        except ValueError as exc:
            raise EvaluationError(str(exc)) from None
    raise EvaluationError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# deterministic pseudorandom data

def derive_seed(root: int, *labels: Any) -> int:
    """Stable child seed from a root seed and a label path."""
    msg = "|".join([str(root)] + [str(p) for p in labels])
    return int.from_bytes(hashlib.blake2b(msg.encode(), digest_size=8).digest(), "big")


class RandomRationalMap:
    """A deterministic pseudorandom map between rational vector spaces.

    Values are derived from a keyed hash of the exact input coordinates, so
    equal seeds give equal maps across runs and platforms, and every call is
    memoized.  Numerators lie in [-100, 100], denominators in [1, 16].
    """

    def __init__(self, seed: int, domain_dim: int, codomain_dim: int):
        self.seed = seed
        self.domain_dim = domain_dim
        self.codomain_dim = codomain_dim
        self._memo: dict[tuple[Fraction, ...], Value] = {}

    def __call__(self, point: Value) -> Value:
        pt = tuple(Fraction(c) for c in point)
        if len(pt) != self.domain_dim:
            raise ValueError(f"need {self.domain_dim} coordinates, got {len(pt)}")
        cached = self._memo.get(pt)
        if cached is not None:
            return cached
        key = "|".join(str(c) for c in pt)
        out = []
        for j in range(self.codomain_dim):
            digest = hashlib.blake2b(
                f"{self.seed};{j};{key}".encode(), digest_size=16
            ).digest()
            num = int.from_bytes(digest[:8], "big") % 201 - 100
            den = int.from_bytes(digest[8:], "big") % 16 + 1
            out.append(Fraction(num, den))
        value = tuple(out)
        self._memo[pt] = value
        return value


def random_rational_vector(rng: random.Random, dim: int, bound: int = 5) -> Value:
    return tuple(Fraction(rng.randint(-bound, bound)) for _ in range(dim))


def random_cuboid(rng: random.Random, dim: int, space: int, bound: int = 5) -> Cuboid:
    return Cuboid(dim, tuple(random_rational_vector(rng, space, bound) for _ in range(1 << dim)))


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class Failure:
    seed: int
    alpha: str
    detail: str

    def to_obj(self) -> dict:
        return {"seed": self.seed, "alpha": self.alpha, "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    identity: str
    trials: int
    failures: tuple[Failure, ...]
    exact: bool
    detail: str | None = None

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_obj(self) -> dict:
        obj = {
            "identity": self.identity,
            "trials": self.trials,
            "failures": [f.to_obj() for f in self.failures],
            "exact": self.exact,
        }
        if self.detail is not None:
            obj["detail"] = self.detail
        return obj


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    return json.dumps([r.to_obj() for r in reports], indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# oracle suites

def verify_chain_expansion(
    seed: int,
    trials: int = 50,
    kmax: int = 5,
    dims: tuple[int, int, int] = (2, 2, 2),
) -> list[VerificationReport]:
    """Evaluate the symbolic expansion of an iterated difference of f(g(x))
    against direct evaluation, with fresh pseudorandom maps per trial."""
    zdim, mid, out = dims
    reports = []
    for k in range(1, kmax + 1):
        alpha = MultiIndex.ones(k)
        expr = expand_chain(alpha)
        failures = []
        for t in range(trials):
            s = derive_seed(seed, "chain", k, t)
            rng = random.Random(s)
            g = RandomRationalMap(derive_seed(s, "g"), zdim, mid)
            f = RandomRationalMap(derive_seed(s, "f"), mid, out)
            x = random_rational_vector(rng, zdim)
            vs = [random_rational_vector(rng, zdim) for _ in range(k)]
            bindings = {"f": f, "g": g, "x": x}
            for i, v in enumerate(vs):
                bindings[f"v_{i + 1}"] = v
            lhs = eval_expr(expr, bindings)
            rhs = evaluate_delta(lambda p: f(g(p)), x, vs)
            if lhs != rhs:
                failures.append(Failure(s, str(alpha), "expansion differs from direct difference"))
        reports.append(VerificationReport(f"chain-expansion-k{k}", trials, tuple(failures), True))
    return reports


def verify_tangent_expansion(
    seed: int,
    trials: int = 50,
    kmax: int = 5,
    dims: tuple[int, int] = (2, 2),
) -> list[VerificationReport]:
    """Evaluate the symbolic top component of the conjugated pointwise map
    against the cuboid-level computation on random cuboids."""
    space, out = dims
    reports = []
    for k in range(1, kmax + 1):
        alpha = MultiIndex.ones(k)
        expr = expand_tangent(alpha)
        failures = []
        for t in range(trials):
            s = derive_seed(seed, "tangent", k, t)
            rng = random.Random(s)
            f = RandomRationalMap(derive_seed(s, "f"), space, out)
            cub = random_cuboid(rng, k, space)
            lhs = eval_expr(expr, {"f": f, "u": cub})
            rhs = discrete_tangent(f, cub).component(alpha)
            if lhs != rhs:
                failures.append(Failure(s, str(alpha), "expansion differs from cuboid computation"))
        reports.append(VerificationReport(f"tangent-expansion-k{k}", trials, tuple(failures), True))
    return reports


# ---------------------------------------------------------------------------
# identity suite

def _check_difference_additivity(s: int) -> str | None:
    rng = random.Random(s)
    f = RandomRationalMap(derive_seed(s, "f"), 2, 2)
    x = random_rational_vector(rng, 2)
    u = random_rational_vector(rng, 2)
    v = random_rational_vector(rng, 2)
    lhs = evaluate_delta(f, x, [vector_add(u, v)])
    rhs = vector_add(evaluate_delta(f, x, [u]), evaluate_delta(f, vector_add(x, u), [v]))
    return None if lhs == rhs else "split along the first direction failed"


def _check_pair_sum_operator(s: int) -> str | None:
    rng = random.Random(s)
    k = rng.randrange(0, 4)
    u = random_cuboid(rng, k, 2)
    v = random_cuboid(rng, k, 2)
    lhs = delta_inv(pair(u, v))
    rhs = pair(delta_inv(u), delta_inv(u + v))
    return None if lhs == rhs else f"k={k}"


def _check_pair_difference_operator(s: int) -> str | None:
    rng = random.Random(s)
    k = rng.randrange(0, 4)
    u = random_cuboid(rng, k, 2)
    v = random_cuboid(rng, k, 2)
    lhs = delta(pair(u, v))
    rhs = pair(delta(u), delta(v) - delta(u))
    return None if lhs == rhs else f"k={k}"


def _check_pair_tangent_map(s: int) -> str | None:
    rng = random.Random(s)
    k = rng.randrange(0, 3)
    f = RandomRationalMap(derive_seed(s, "f"), 2, 2)
    u = random_cuboid(rng, k, 2)
    v = random_cuboid(rng, k, 2)
    lhs = discrete_tangent(f, pair(u, v))
    tu = discrete_tangent(f, u)
    rhs = pair(tu, discrete_tangent(f, u + v) - tu)
    return None if lhs == rhs else f"k={k}"


def _check_telescoping(s: int) -> str | None:
    rng = random.Random(s)
    n = rng.randrange(1, 5)
    f = RandomRationalMap(derive_seed(s, "f"), 2, 2)
    x = random_rational_vector(rng, 2)
    w = random_rational_vector(rng, 2)
    us = [random_rational_vector(rng, 2) for _ in range(n)]
    vs = [random_rational_vector(rng, 2) for _ in range(n)]
    lhs = vector_sub(
        evaluate_delta(f, vector_add(x, w), [vector_add(a, b) for a, b in zip(us, vs)]),
        evaluate_delta(f, x, us),
    )
    total = evaluate_delta(f, x, [w] + us)
    for i in range(n):
        dirs = us[:i] + [vs[i]] + [vector_add(us[j], vs[j]) for j in range(i + 1, n)]
        total = vector_add(
            total, evaluate_delta(f, vector_add(vector_add(x, w), us[i]), dirs)
        )
    return None if lhs == total else f"n={n}"


def _check_refinement_cover(s: int) -> str | None:
    rng = random.Random(s)
    k = rng.randrange(1, 6)
    alpha = MultiIndex(tuple(rng.randint(0, 1) for _ in range(k)))
    children = []
    for p in enumerate_partitions(alpha):
        children.extend(refine(p))
    expected = set(enumerate_partitions(alpha.diamond(1)).partitions)
    if len(children) != len(expected) or set(children) != expected:
        return f"alpha={alpha}"
    return None


def _check_main_term_remainder_order(s: int) -> str | None:
    rng = random.Random(s)
    k = 2 + s % 2
    alpha = MultiIndex.ones(k)
    space = 2
    f = random_polynomial_map(rng, space, space, degree=2 + s % 2, dense=True)
    eps = Poly.variable(1, 0)
    x = random_rational_vector(rng, space)
    base = tuple(Poly.constant(1, c) for c in x)

    def component(m: MultiIndex) -> tuple:
        if m.order == 0:
            return base
        scale = eps ** m.order
        return tuple(scale * Fraction(rng.randint(-3, 3)) for _ in range(space))

    cub = Cuboid.build(k, component)
    lhs = discrete_tangent(f, cub).component(alpha)
    acc = None
    for p in enumerate_partitions(alpha):
        term = evaluate_delta(f, base, [cub.component(b) for b in p.blocks])
        acc = term if acc is None else vector_add(acc, term)
    rem = vector_sub(lhs, acc)
    vals = []
    for c in rem:
        if isinstance(c, Poly):
            if not c.is_zero:
                vals.append(c.min_degree)
        elif c != 0:
            vals.append(0)
    if vals and min(vals) < alpha.order + 1:
        return f"remainder valuation {min(vals)} below {alpha.order + 1}"
    return None


_IDENTITY_CHECKS = (
    ("difference-additivity", _check_difference_additivity),
    ("pair-sum-operator", _check_pair_sum_operator),
    ("pair-difference-operator", _check_pair_difference_operator),
    ("pair-tangent-map", _check_pair_tangent_map),
    ("telescoping-expansion", _check_telescoping),
    ("partition-refinement-cover", _check_refinement_cover),
    ("main-term-remainder-order", _check_main_term_remainder_order),
)


def identity_suite(seed: int, trials: int = 1000) -> list[VerificationReport]:
    """Run every exact structural identity check ``trials`` times each."""
    reports = []
    for name, check in _IDENTITY_CHECKS:
        failures = []
        for t in range(trials):
            s = derive_seed(seed, name, t)
            detail = check(s)
            if detail is not None:
                failures.append(Failure(s, "", detail))
        reports.append(VerificationReport(name, trials, tuple(failures), True))
    return reports


# ---------------------------------------------------------------------------
# remainder scaling

DEFAULT_EPS_EXPONENTS = tuple(range(3, 11))


@dataclass(frozen=True)
class ScalingResult:
    slope: float | None
    degenerate: bool
    norms: tuple[Fraction, ...]


def scaling_slope(
    f: PolynomialMap,
    g: PolynomialMap,
    x: Value,
    ws: Sequence[Value],
    alpha: MultiIndex,
    eps_exponents: Sequence[int] = DEFAULT_EPS_EXPONENTS,
) -> ScalingResult:
    """Fit the log-log slope of the remainder after subtracting the
    leading-order truncation, over directions scaled by 2**-j.

    The fit uses the finest three grid points: coarse scales still carry
    next-order correction terms that bias the slope, while the tail sits in
    the asymptotic regime.
    """
    expr = main_part(alpha)
    pts = []
    norms = []
    for j in sorted(eps_exponents):
        eps = Fraction(1, 2**j)
        dirs = [tuple(eps * c for c in w) for w in ws]
        bindings: dict[str, Any] = {"f": f, "g": g, "x": x}
        for i, d in enumerate(dirs):
            bindings[f"v_{i + 1}"] = d
        lhs = evaluate_delta(lambda p: f(g(p)), x, dirs, alpha)
        approx = eval_expr(expr, bindings)
        r = vector_sub(lhs, approx)
        norm = max(abs(c) for c in r)
        norms.append(norm)
        if norm:
            pts.append((math.log(float(eps)), math.log(float(norm))))
    if len(pts) < 2:
        return ScalingResult(None, True, tuple(norms))
    tail = pts[-3:]
    fit = statistics.linear_regression([p[0] for p in tail], [p[1] for p in tail])
    return ScalingResult(fit.slope, False, tuple(norms))


def verify_scaling(
    seed: int,
    alpha: MultiIndex,
    trials: int = 3,
    eps_exponents: Sequence[int] = DEFAULT_EPS_EXPONENTS,
) -> VerificationReport:
    """Check that the remainder shrinks at least like the next order.

    The slope threshold is |alpha| + 1 - 0.2; an identically zero remainder
    is degenerate and reported, not failed.
    """
    threshold = alpha.order + 1 - 0.2
    failures = []
    notes = []
    for t in range(trials):
        s = derive_seed(seed, "scaling", str(alpha), t)
        rng = random.Random(s)
        deg = alpha.order + 1
        f = random_polynomial_map(rng, 2, 2, degree=deg, dense=True)
        g = random_polynomial_map(rng, 2, 2, degree=deg, dense=True)
        x = random_rational_vector(rng, 2, bound=2)
        ws = [random_rational_vector(rng, 2, bound=3) for _ in range(alpha.dim)]
        result = scaling_slope(f, g, x, ws, alpha, eps_exponents)
        if result.degenerate:
            notes.append(f"trial {t}: degenerate (remainder identically zero)")
        elif result.slope < threshold:
            failures.append(
                Failure(s, str(alpha), f"slope {result.slope:.3f} below threshold {threshold:.3f}")
            )
            notes.append(f"trial {t}: slope {result.slope:.3f}")
        else:
            notes.append(f"trial {t}: slope {result.slope:.3f}")
    detail = f"threshold {threshold:.3f}; " + "; ".join(notes)
    return VerificationReport(
        f"remainder-scaling-{alpha}", trials, tuple(failures), False, detail
    )


# ---------------------------------------------------------------------------
# smooth composition suite

def verify_smooth_chain(alpha: MultiIndex, seed: int, trials: int = 25) -> VerificationReport:
    """Exact polynomial checks of the derivative-level composition formula,
    the lifted tangent map on injected and general cuboids, and (for small
    dimensions) functoriality of the lift."""
    k = alpha.dim
    table = enumerate_partitions(alpha)
    for p in table:
        if sum(b.order for b in p.blocks) != alpha.order:
            raise AssertionError("partition violates homogeneity")

    failures = []
    for t in range(trials):
        s = derive_seed(seed, "smooth", str(alpha), t)
        rng = random.Random(s)
        f = random_polynomial_map(rng, 2, 2, degree=2)
        g = random_polynomial_map(rng, 2, 2, degree=2)
        x = random_rational_vector(rng, 2, bound=3)
        us = [random_rational_vector(rng, 2, bound=3) for _ in range(k)]

        lhs = d_alpha(compose(f, g), us, alpha)(x)
        acc = None
        gx = g(x)
        for p in table:
            ws = [d_alpha(g, us, b)(x) for b in p.blocks]
            term = iterated_directional(f, ws)(gx)
            acc = term if acc is None else vector_add(acc, term)
        if lhs != acc:
            failures.append(Failure(s, str(alpha), "composition derivative expansion"))
            continue

        lift = iterated_tangent_lift(f, k)
        injected = inject(PointedDirections(x, tuple(us)))
        out = Cuboid.from_flat(k, 2, lift(injected.flatten()))
        ok = True
        for beta in injected.indices():
            if out.component(beta) != d_alpha(f, us, beta)(x):
                failures.append(Failure(s, str(beta), "lift disagrees on injected cuboid"))
                ok = False
                break
        if not ok:
            continue

        cub = random_cuboid(rng, k, 2, bound=3)
        out = Cuboid.from_flat(k, 2, lift(cub.flatten()))
        base = cub.component(MultiIndex.zero(k))
        acc = None
        for p in table:
            ws = [cub.component(b) for b in p.blocks]
            term = iterated_directional(f, ws)(base)
            acc = term if acc is None else vector_add(acc, term)
        if out.component(alpha) != acc:
            failures.append(Failure(s, str(alpha), "component formula on a general cuboid"))
            continue

        if k <= 2:
            comp_lift = iterated_tangent_lift(compose(f, g), k)
            glift = iterated_tangent_lift(g, k)
            flat = random_cuboid(rng, k, 2, bound=3).flatten()
            if comp_lift(flat) != lift(glift(flat)):
                failures.append(Failure(s, str(alpha), "lift is not functorial"))
    return VerificationReport(
        f"smooth-composition-{alpha}", trials, tuple(failures), True
    )


# ---------------------------------------------------------------------------
# suite dispatch

SUITE_NAMES = ("theorem-b", "eq9", "identities", "scaling", "smooth-chain", "all")


def run_suite(
    name: str,
    seed: int,
    trials: int | None = None,
    kmax: int | None = None,
    alpha: MultiIndex | None = None,
    eps_exponents: Sequence[int] = DEFAULT_EPS_EXPONENTS,
) -> list[VerificationReport]:
    """Run one named verification suite (or all of them) and return reports."""
    if name == "theorem-b":
        return verify_chain_expansion(seed, trials or 50, kmax or 5)
    if name == "eq9":
        return verify_tangent_expansion(seed, trials or 50, kmax or 5)
    if name == "identities":
        return identity_suite(seed, trials or 1000)
    if name == "scaling":
        alphas = [alpha] if alpha is not None else [MultiIndex.ones(2), MultiIndex.ones(3)]
        return [verify_scaling(seed, a, trials or 3, eps_exponents) for a in alphas]
    if name == "smooth-chain":
        ks = range(1, (kmax or 3) + 1)
        if alpha is not None:
            return [verify_smooth_chain(alpha, seed, trials or 25)]
        return [verify_smooth_chain(MultiIndex.ones(k), seed, trials or 25) for k in ks]
    if name == "all":
        out = []
        for n in SUITE_NAMES[:-1]:
            out.extend(run_suite(n, seed, trials=trials, kmax=kmax, alpha=alpha, eps_exponents=eps_exponents))
        return out
    raise ValueError(f"unknown suite: {name!r}")
