"""Binary multi-indices, their partitions, and the refinement recursion.

A multi-index is a finite tuple of binary digits, ordered componentwise.
A partition of a nonzero multi-index splits it into nonzero pieces with
pairwise disjoint supports; partitions correspond one-to-one to set
partitions of the support, so their counts are Bell numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence


@dataclass(frozen=True)
class MultiIndex:
    """An element of {0,1}^k under the componentwise partial order.

    >>> a = MultiIndex.from_string("101")
    >>> a.order, a.dim, a.support
    (2, 3, (0, 2))
    >>> MultiIndex.from_string("100") <= a
    True
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.bits, tuple):
            object.__setattr__(self, "bits", tuple(self.bits))
        if not self.bits:
            raise ValueError("a multi-index needs at least one digit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"digits must be 0 or 1: {self.bits!r}")

    @classmethod
    def from_string(cls, s: str) -> "MultiIndex":
        if any(c not in "01" for c in s):
            raise ValueError(f"not a bitstring: {s!r}")
        return cls(tuple(int(c) for c in s))

    @classmethod
    def zero(cls, dim: int) -> "MultiIndex":
        return cls((0,) * dim)

    @classmethod
    def unit(cls, dim: int, position: int) -> "MultiIndex":
        """The multi-index with a single 1-digit at ``position`` (0-based)."""
        if not 0 <= position < dim:
            raise ValueError(f"position {position} out of range for dim {dim}")
        return cls(tuple(int(i == position) for i in range(dim)))

    @classmethod
    def ones(cls, dim: int) -> "MultiIndex":
        return cls((1,) * dim)

    @property
    def dim(self) -> int:
        return len(self.bits)

    @property
    def order(self) -> int:
        """Number of 1-digits."""
        return sum(self.bits)

    @property
    def mask(self) -> int:
        """Integer with bit i set iff digit i+1 is 1."""
        m = 0
        for i, b in enumerate(self.bits):
            m |= b << i
        return m

    @property
    def support(self) -> tuple[int, ...]:
        """0-based positions of the 1-digits, ascending."""
        return tuple(i for i, b in enumerate(self.bits) if b)

    @property
    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        """Total order key: order first, then lexicographic digits."""
        return (self.order, self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __le__(self, other: "MultiIndex") -> bool:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return all(a <= b for a, b in zip(self.bits, other.bits))

    def __lt__(self, other: "MultiIndex") -> bool:
        return self <= other and self != other

    def diamond(self, digit: int) -> "MultiIndex":
        """Append one digit."""
        if digit not in (0, 1):
            raise ValueError(f"digit must be 0 or 1: {digit!r}")
        return MultiIndex(self.bits + (digit,))

    def down_set(self) -> tuple["MultiIndex", ...]:
        """All multi-indices below self, sorted by ``sort_key``."""
        out = []
        sub = self.mask
        while True:
            out.append(MultiIndex(tuple((sub >> i) & 1 for i in range(self.dim))))
            if sub == 0:
                break
            sub = (sub - 1) & self.mask
        out.sort(key=lambda m: m.sort_key)
        return tuple(out)

    def restrict(self, positions: Sequence[int]) -> "MultiIndex":
        """Project onto the given positions; support must lie inside them."""
        picked = MultiIndex(tuple(self.bits[p] for p in positions))
        if picked.order != self.order:
            raise ValueError(f"support of {self} not contained in {positions}")
        return picked

    def embed(self, positions: Sequence[int], dim: int) -> "MultiIndex":
        """Place the digits of self at ``positions`` inside a zero index of ``dim``."""
        if len(positions) != self.dim:
            raise ValueError("positions must match dimension")
        bits = [0] * dim
        for b, p in zip(self.bits, positions):
            bits[p] = b
        return MultiIndex(tuple(bits))


def leq(a: MultiIndex, b: MultiIndex) -> bool:
    return a <= b


def diamond_set(indices: Iterable[MultiIndex], digit: int) -> tuple[MultiIndex, ...]:
    """Append a digit to every index of a set, sorted by ``sort_key``."""
    return tuple(sorted((m.diamond(digit) for m in indices), key=lambda m: m.sort_key))


@dataclass(frozen=True)
class Partition:
    """A set of nonzero multi-indices with disjoint supports summing to target.

    Blocks are kept in canonical order: ascending position of the least
    1-digit.  That order is stable under appending digits to every block,
    which the refinement step below relies on.
    """

    target: MultiIndex
    blocks: tuple[MultiIndex, ...]

    def __post_init__(self) -> None:
        blocks = tuple(self.blocks)
        if self.target.order == 0:
            if blocks:
                raise ValueError("the zero multi-index admits only the empty partition")
            object.__setattr__(self, "blocks", ())
            return
        seen = 0
        for b in blocks:
            if b.dim != self.target.dim:
                raise ValueError("block dimension mismatch")
            if b.order == 0:
                raise ValueError("blocks must be nonzero")
            if seen & b.mask:
                raise ValueError("blocks must have disjoint supports")
            seen |= b.mask
        if seen != self.target.mask:
            raise ValueError("blocks must sum to the target")
        object.__setattr__(self, "blocks", tuple(sorted(blocks, key=lambda b: b.support[0])))

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def maxord(self) -> int:
        return max((b.order for b in self.blocks), default=0)

    @property
    def sort_key(self):
        return (self.size, tuple(b.bits for b in self.blocks))


def maxord(p: Partition) -> int:
    return p.maxord


@dataclass(frozen=True)
class PartitionTable:
    """All partitions of a target, in a fixed deterministic order."""

    target: MultiIndex
    partitions: tuple[Partition, ...]

    def __len__(self) -> int:
        return len(self.partitions)

    def __iter__(self) -> Iterator[Partition]:
        return iter(self.partitions)


def _set_partitions(items: tuple[int, ...]) -> Iterator[list[list[int]]]:
    # Plain recursive enumeration: insert the first item into each block of
    # every partition of the rest, or open a new block.
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield part + [[first]]


@lru_cache(maxsize=None)
def enumerate_partitions(alpha: MultiIndex) -> PartitionTable:
    """All partitions of ``alpha``, sorted by (size, block digit strings).

    The zero multi-index has exactly one partition: the empty one.
    """
    if alpha.order == 0:
        return PartitionTable(alpha, (Partition(alpha, ()),))
    parts = []
    for groups in _set_partitions(alpha.support):
        blocks = []
        for group in groups:
            bits = [0] * alpha.dim
            for p in group:
                bits[p] = 1
            blocks.append(MultiIndex(tuple(bits)))
        parts.append(Partition(alpha, tuple(blocks)))
    parts.sort(key=lambda p: p.sort_key)
    return PartitionTable(alpha, tuple(parts))


def refine(p: Partition) -> tuple[Partition, ...]:
    """The partitions of target⋄1 obtained from ``p``.

    The first child appends 0 to every block and adds the new singleton
    block; child i (1-based) appends 1 to block i and 0 to the others.
    Across all partitions of the target these children disjointly exhaust
    the partitions of target⋄1.
    """
    new_target = p.target.diamond(1)
    new_block = MultiIndex.zero(p.target.dim).diamond(1)
    children = [Partition(new_target, tuple(b.diamond(0) for b in p.blocks) + (new_block,))]
    for i in range(p.size):
        blocks = tuple(
            b.diamond(1 if j == i else 0) for j, b in enumerate(p.blocks)
        )
        children.append(Partition(new_target, blocks))
    return tuple(children)


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    """Number of set partitions of an n-element set, via the Bell triangle.

    >>> [bell_number(n) for n in range(6)]
    [1, 1, 2, 5, 15, 52]
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]
