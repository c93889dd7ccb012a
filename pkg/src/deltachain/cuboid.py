"""Cuboids of vectors and the invertible difference operator on them.

A cuboid of dimension k assigns a vector to every multi-index in {0,1}^k.
Components may be exact rationals or any values supporting +, - and unary
negation (polynomials work too); nothing here ever multiplies or divides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator, Sequence

from .combinatorics import MultiIndex

Value = tuple[Any, ...]


def vector_add(a: Value, b: Value) -> Value:
    if len(a) != len(b):
        raise ValueError(f"space dimension mismatch: {len(a)} vs {len(b)}")
    return tuple(x + y for x, y in zip(a, b))


def vector_sub(a: Value, b: Value) -> Value:
    if len(a) != len(b):
        raise ValueError(f"space dimension mismatch: {len(a)} vs {len(b)}")
    return tuple(x - y for x, y in zip(a, b))


def vector_neg(a: Value) -> Value:
    return tuple(-x for x in a)


@dataclass(frozen=True)
class PointedDirections:
    """A base point together with one direction vector per cube axis."""

    base: Value
    vectors: tuple[Value, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "vectors", tuple(tuple(v) for v in self.vectors))
        for v in self.vectors:
            if len(v) != len(self.base):
                raise ValueError("direction dimension differs from base point")


@dataclass(frozen=True)
class Cuboid:
    """A family of vectors indexed by {0,1}^k, stored densely.

    Component order: the multi-index with digits (a_1, ..., a_k) sits at
    offset sum(a_i << (i-1)), so the first digit is the least significant
    bit and pairing/splitting along the last axis is plain concatenation.
    """

    dim: int
    components: tuple[Value, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(tuple(c) for c in self.components))
        if len(self.components) != 1 << self.dim:
            raise ValueError(f"need {1 << self.dim} components, got {len(self.components)}")
        space = len(self.components[0])
        if any(len(c) != space for c in self.components):
            raise ValueError("components must share one space dimension")

    @property
    def space(self) -> int:
        return len(self.components[0])

    @classmethod
    def build(cls, dim: int, fn: Callable[[MultiIndex], Value]) -> "Cuboid":
        return cls(dim, tuple(fn(m) for m in _indices(dim)))

    def component(self, index: MultiIndex) -> Value:
        if index.dim != self.dim:
            raise ValueError(f"index dimension {index.dim} differs from cuboid dimension {self.dim}")
        return self.components[index.mask]

    def indices(self) -> Iterator[MultiIndex]:
        return iter(_indices(self.dim))

    def __add__(self, other: "Cuboid") -> "Cuboid":
        self._check_shape(other)
        return Cuboid(self.dim, tuple(vector_add(a, b) for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "Cuboid") -> "Cuboid":
        self._check_shape(other)
        return Cuboid(self.dim, tuple(vector_sub(a, b) for a, b in zip(self.components, other.components)))

    def _check_shape(self, other: "Cuboid") -> None:
        if self.dim != other.dim:
            raise ValueError(f"cuboid dimension mismatch: {self.dim} vs {other.dim}")
        if self.space != other.space:
            raise ValueError(f"space dimension mismatch: {self.space} vs {other.space}")

    def flatten(self) -> Value:
        """Concatenate all components in index order."""
        return tuple(x for c in self.components for x in c)

    @classmethod
    def from_flat(cls, dim: int, space: int, values: Sequence[Any]) -> "Cuboid":
        if len(values) != (1 << dim) * space:
            raise ValueError("flat length does not match dim and space")
        comps = tuple(
            tuple(values[i * space : (i + 1) * space]) for i in range(1 << dim)
        )
        return cls(dim, comps)

    def to_json(self) -> str:
        obj = {
            "dim": self.dim,
            "space": self.space,
            "components": {
                str(m): [str(Fraction(x)) for x in self.component(m)] for m in _indices(self.dim)
            },
        }
        return json.dumps(obj, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Cuboid":
        obj = json.loads(text)
        dim, space = obj["dim"], obj["space"]
        comps = []
        for m in _indices(dim):
            raw = obj["components"][str(m)]
            if len(raw) != space:
                raise ValueError(f"component {m} has wrong space dimension")
            comps.append(tuple(Fraction(x) for x in raw))
        return cls(dim, tuple(comps))


def _indices(dim: int) -> tuple[MultiIndex, ...]:
    return tuple(
        MultiIndex(tuple((i >> b) & 1 for b in range(dim))) for i in range(1 << dim)
    )


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def delta(c: Cuboid) -> Cuboid:
    """Alternating down-set sums: component alpha becomes
    sum over beta <= alpha of (-1)^(|alpha|-|beta|) c_beta."""
    comps = []
    for m in range(1 << c.dim):
        k = m.bit_count()
        acc = None
        for s in _submasks(m):
            v = c.components[s]
            if (k - s.bit_count()) % 2 == 0:
                acc = v if acc is None else vector_add(acc, v)
            else:
                acc = vector_neg(v) if acc is None else vector_sub(acc, v)
        comps.append(acc)
    return Cuboid(c.dim, tuple(comps))


def delta_inv(c: Cuboid) -> Cuboid:
    """Down-set sums: component alpha becomes sum over beta <= alpha of c_beta."""
    comps = []
    for m in range(1 << c.dim):
        acc = None
        for s in _submasks(m):
            v = c.components[s]
            acc = v if acc is None else vector_add(acc, v)
        comps.append(acc)
    return Cuboid(c.dim, tuple(comps))


def pair(u: Cuboid, v: Cuboid) -> Cuboid:
    """Join two k-cuboids into a (k+1)-cuboid along a new last axis."""
    u._check_shape(v)
    return Cuboid(u.dim + 1, u.components + v.components)


def split(w: Cuboid) -> tuple[Cuboid, Cuboid]:
    """Inverse of ``pair``."""
    if w.dim == 0:
        raise ValueError("cannot split a 0-dimensional cuboid")
    half = 1 << (w.dim - 1)
    return Cuboid(w.dim - 1, w.components[:half]), Cuboid(w.dim - 1, w.components[half:])


def inject(p: PointedDirections) -> Cuboid:
    """The cuboid with base p.base, the i-th vector at each unit index, and
    zero at every index of order two or more."""
    base, vectors = p.base, p.vectors
    zero = tuple(x - x for x in base)

    def fn(m: MultiIndex) -> Value:
        if m.order == 0:
            return base
        if m.order == 1:
            return vectors[m.support[0]]
        return zero

    return Cuboid(len(vectors), tuple(fn(m) for m in _indices(len(vectors))))


def pointwise(f: Callable[[Value], Value], c: Cuboid) -> Cuboid:
    """Apply a map to every component."""
    comps = tuple(tuple(f(v)) for v in c.components)
    out = len(comps[0])
    if any(len(v) != out for v in comps):
        raise ValueError("map produced components of unequal dimension")
    return Cuboid(c.dim, comps)


def discrete_tangent(f: Callable[[Value], Value], c: Cuboid) -> Cuboid:
    """Conjugate the pointwise map by the difference operator."""
    return delta(pointwise(f, delta_inv(c)))
