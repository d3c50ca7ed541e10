"""Named weight families, block sequences, and partitions of omega.

Weight rules are positive rational sequences used both as summable-ideal
weights and as the z-sequences of the tail-avoiding basis constructions.
Each rule carries the metadata needed to transport tail certificates
(monotonicity, shift factors) and the declared divergence/convergence of
its total sum, which a finite machine cannot decide on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

Q = Fraction


@dataclass(frozen=True)
class WeightRule:
    """A positive rational sequence n -> r_n with declared analytic facts."""

    name: str
    at: Callable[[int], Fraction]
    nonincreasing: bool = False
    lower_bound: Optional[Fraction] = None
    # Declared value of "sum r_n = infinity": True / False / None (unknown).
    divergent_total: Optional[bool] = None
    divergence_form: Optional[str] = None
    # Upper bound on r_n / r_{n+1} over all n, when finite.  Used to move
    # tail certificates across index shifts.
    shift_down_factor: Optional[Fraction] = None
    # ("<blocks name>" or "any", k -> weight) when r is constant on blocks
    cellwise: Optional[tuple[str, Callable[[int], Fraction]]] = None

    def values(self, n: int) -> list[Fraction]:
        return [self.at(i) for i in range(n)]

    def __repr__(self) -> str:  # keep reports compact
        return f"WeightRule({self.name})"


def reciprocal_succ() -> WeightRule:
    """r_n = 1/(n+1); the harmonic family."""
    return WeightRule(
        name="reciprocal_succ",
        at=lambda n: Q(1, n + 1),
        nonincreasing=True,
        divergent_total=True,
        divergence_form="harmonic",
        shift_down_factor=Q(2),
    )


def constant(c: Fraction | int) -> WeightRule:
    c = Q(c)
    if c <= 0:
        raise ValueError("constant weight must be positive")
    return WeightRule(
        name=f"constant({c})",
        at=lambda n: c,
        nonincreasing=True,
        lower_bound=c,
        divergent_total=True,
        divergence_form="constant",
        shift_down_factor=Q(1),
        cellwise=("any", lambda k: c),
    )


def geometric(q: Fraction | int) -> WeightRule:
    """r_n = q^n.  Divergent total iff q >= 1."""
    q = Q(q)
    if q <= 0:
        raise ValueError("geometric ratio must be positive")
    return WeightRule(
        name=f"geometric({q})",
        at=lambda n: q**n,
        nonincreasing=q <= 1,
        lower_bound=Q(1) if q >= 1 else None,
        divergent_total=q >= 1,
        divergence_form="geometric" if q >= 1 else None,
        shift_down_factor=Q(1) / q if q <= 1 else None,
    )


def per_cell(blocks: "BlockRule", cell_weight: Callable[[int], Fraction],
             name: Optional[str] = None,
             divergent_total: Optional[bool] = None) -> WeightRule:
    """r_n = w_k on the block [t_k, t_{k+1})."""

    def at(n: int) -> Fraction:
        w = Q(cell_weight(blocks.cell_of(n)))
        if w <= 0:
            raise ValueError("per-cell weight must be positive")
        return w

    return WeightRule(
        name=name or f"per_cell[{blocks.name}]",
        at=at,
        divergent_total=divergent_total,
        cellwise=(blocks.name, lambda k: Q(cell_weight(k))),
    )


@dataclass(frozen=True)
class BlockRule:
    """Strictly increasing t: omega -> omega with t_0 = 0; blocks [t_k, t_{k+1})."""

    name: str
    t: Callable[[int], int]
    affine: Optional[tuple[int, int]] = None  # (c, d) when t(k) = c*k + d

    def __post_init__(self) -> None:
        if self.t(0) != 0:
            raise ValueError("block sequence must start at 0")
        prev = 0
        for k in range(1, 12):
            cur = self.t(k)
            if cur <= prev:
                raise ValueError("block sequence must be strictly increasing")
            prev = cur

    def block(self, k: int) -> range:
        return range(self.t(k), self.t(k + 1))

    def cell_of(self, n: int) -> int:
        """Index k with n in [t_k, t_{k+1}); linear scan with doubling probe."""
        k = 0
        while self.t(k + 1) <= n:
            k += 1
        return k

    def __repr__(self) -> str:
        return f"BlockRule({self.name})"


def blocks_unit() -> BlockRule:
    return BlockRule("unit", lambda k: k, affine=(1, 0))


def blocks_even() -> BlockRule:
    return BlockRule("even", lambda k: 2 * k, affine=(2, 0))


def blocks_pow2() -> BlockRule:
    """t_0 = 0 and t_k = 2^k for k >= 1, so the blocks are [0,2), [2,4), [4,8), ..."""
    return BlockRule("pow2", lambda k: 0 if k == 0 else 2**k)


def blocks_from_boundaries(bounds: list[int], name: str = "explicit") -> BlockRule:
    """Finite boundary list continued arithmetically past its end."""
    if not bounds or bounds[0] != 0:
        raise ValueError("boundaries must start at 0")
    if any(b >= c for b, c in zip(bounds, bounds[1:])):
        raise ValueError("boundaries must be strictly increasing")
    last = bounds[-1]
    step = bounds[-1] - bounds[-2] if len(bounds) > 1 else 1

    def t(k: int) -> int:
        if k < len(bounds):
            return bounds[k]
        return last + step * (k - len(bounds) + 1)

    return BlockRule(name, t)


@dataclass(frozen=True)
class Partition:
    """A partition of omega given by its cell-index map n -> k."""

    name: str
    cell: Callable[[int], int]

    def cell_members_below(self, k: int, bound: int) -> list[int]:
        return [n for n in range(bound) if self.cell(n) == k]

    def __repr__(self) -> str:
        return f"Partition({self.name})"


def partition_pairing() -> Partition:
    """Cells are the rows of the Cantor pairing bijection omega^2 -> omega."""

    def cell(n: int) -> int:
        w = (math.isqrt(8 * n + 1) - 1) // 2
        j = n - w * (w + 1) // 2
        return w - j

    return Partition("pairing", cell)


def partition_dyadic_ruler() -> Partition:
    """Cell 0 is the evens; an odd n lands in cell v2(n+1) >= 1.

    Cell k >= 1 is the residue class {n : n = 2^k - 1 (mod 2^{k+1})}, so all
    cells are infinite.
    """

    def cell(n: int) -> int:
        if n % 2 == 0:
            return 0
        m = n + 1
        v = 0
        while m % 2 == 0:
            m //= 2
            v += 1
        return v

    return Partition("dyadic_ruler", cell)


_PARTITIONS = {
    "pairing": partition_pairing,
    "dyadic_ruler": partition_dyadic_ruler,
}

_BLOCKS = {
    "unit": blocks_unit,
    "even": blocks_even,
    "pow2": blocks_pow2,
}


def partition_by_name(name: str) -> Partition:
    try:
        return _PARTITIONS[name]()
    except KeyError:
        raise ValueError(f"unknown partition {name!r}") from None


def blocks_by_name(name: str) -> BlockRule:
    try:
        return _BLOCKS[name]()
    except KeyError:
        raise ValueError(f"unknown block rule {name!r}") from None


def weight_rule_by_name(spec: str) -> WeightRule:
    """Registry lookup: "reciprocal_succ", "constant:c", "geometric:q"."""
    if spec == "reciprocal_succ":
        return reciprocal_succ()
    if ":" in spec:
        kind, _, arg = spec.partition(":")
        if kind == "constant":
            return constant(Q(arg))
        if kind == "geometric":
            return geometric(Q(arg))
    raise ValueError(f"unknown weight rule {spec!r}")
