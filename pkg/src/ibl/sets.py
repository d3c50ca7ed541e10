"""Subsets of omega with decidable membership and optional tail certificates.

A SetExpr is a total membership predicate plus whatever was *declared* about
the set when it was built: a finiteness tag, and tail certificates keyed by
the weight family they speak about.  Certificates are the only road to a
certified In/NotIn for summable-type ideals; the combinators below transport
them where the arithmetic justifies it and drop them otherwise.

Certificate indexing:  a tail certificate bounds the weight mass of the
elements of A either by *rank* (all but the first K elements, in increasing
order) or by *value* (all elements >= N).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Union

from .weights import WeightRule

Q = Fraction


def probe_range() -> int:
    """Structural sanity-check bound; override with IBL_PROBE_RANGE."""
    return int(os.environ.get("IBL_PROBE_RANGE", 1 << 16))


# --------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class GeometricTail:
    """Tail mass of the family `family` over A is <= bound * ratio^K."""

    family: str
    ratio: Fraction
    bound: Fraction
    indexing: str = "rank"  # "rank" or "value"

    def __post_init__(self):
        if not (0 < self.ratio < 1):
            raise ValueError("geometric tail ratio must be in (0,1)")
        if self.bound <= 0:
            raise ValueError("geometric tail bound must be positive")

    def tail_bound(self, k: int) -> Fraction:
        return self.bound * self.ratio**k

    @property
    def name(self) -> str:
        return f"GeometricTail({self.family}, rho={self.ratio}, c={self.bound})"


@dataclass(frozen=True)
class ExactTailSum:
    """Closed-form upper bound N -> sum of the family over A from N on."""

    family: str
    tail: Callable[[int], Fraction]
    indexing: str = "value"

    def tail_bound(self, k: int) -> Fraction:
        return Q(self.tail(k))

    @property
    def name(self) -> str:
        return f"ExactTailSum({self.family})"


@dataclass(frozen=True)
class DivergenceWitness:
    """M -> N such that the family's partial sum over A below N is >= M."""

    family: str
    crossing: Callable[[Fraction], int]

    @property
    def name(self) -> str:
        return f"DivergenceWitness({self.family})"


@dataclass(frozen=True)
class CellCount:
    """Exact counting function k -> |A & cell_k|; None encodes an infinite cell.

    The cell structure is named by `family`: "initial_segments" means
    cell_k = [0, k), otherwise a partition name.
    """

    family: str
    count: Callable[[int], Optional[int]]

    @property
    def name(self) -> str:
        return f"CellCount({self.family})"


TailCertificate = Union[GeometricTail, ExactTailSum, DivergenceWitness, CellCount]


# --------------------------------------------------------------------------
# set expressions

@dataclass(frozen=True)
class SetExpr:
    membership: Callable[[int], bool]
    description: str
    finite: Optional[bool] = None       # declared finiteness; None = unknown
    bound: Optional[int] = None         # if finite: all elements < bound
    is_omega: bool = False
    certs: tuple[TailCertificate, ...] = ()
    stride_params: Optional[tuple[int, int]] = None  # (a, b) when A = {a + b*k}
    _enumerator: Optional[Callable[[int], list[int]]] = None

    def enumerate_below(self, n: int) -> list[int]:
        """Exactly {m < n : m in A}, increasing."""
        if self._enumerator is not None:
            return self._enumerator(n)
        return [m for m in range(n) if self.membership(m)]

    def cert_for(self, family: str, kind: Optional[type] = None):
        for c in self.certs:
            if c.family == family and (kind is None or isinstance(c, kind)):
                return c
        return None

    def with_certs(self, *certs: TailCertificate) -> "SetExpr":
        return replace(self, certs=self.certs + tuple(certs))

    def with_tags(self, finite: Optional[bool] = None, bound: Optional[int] = None) -> "SetExpr":
        return replace(self, finite=finite if finite is not None else self.finite,
                       bound=bound if bound is not None else self.bound)

    def __repr__(self) -> str:
        return f"SetExpr({self.description})"


def finite_set(elems) -> SetExpr:
    elems = sorted(set(int(e) for e in elems))
    if any(e < 0 for e in elems):
        raise ValueError("elements must be natural numbers")
    s = frozenset(elems)
    label = "{" + ",".join(map(str, elems[:8])) + (",..." if len(elems) > 8 else "") + "}"
    return SetExpr(
        membership=lambda n: n in s,
        description=label,
        finite=True,
        bound=(max(elems) + 1) if elems else 0,
        _enumerator=lambda n: [e for e in elems if e < n],
    )


def empty_set() -> SetExpr:
    return finite_set([])


def omega() -> SetExpr:
    return SetExpr(
        membership=lambda n: True,
        description="omega",
        finite=False,
        is_omega=True,
        _enumerator=lambda n: list(range(n)),
    )


def stride(a: int, b: int) -> SetExpr:
    """{a + b*k : k in omega}; b >= 1."""
    if b < 1 or a < 0:
        raise ValueError("stride needs a >= 0, b >= 1")
    return SetExpr(
        membership=lambda n: n >= a and (n - a) % b == 0,
        description=f"stride({a},{b})",
        finite=False,
        is_omega=(a == 0 and b == 1),
        stride_params=(a, b),
        _enumerator=lambda n: list(range(a, n, b)),
    )


def evens() -> SetExpr:
    return stride(0, 2)


def odds() -> SetExpr:
    return stride(1, 2)


def geometric_set(base: int, from_exp: int = 0) -> SetExpr:
    """{base^k : k >= from_exp}."""
    if base < 2:
        raise ValueError("base must be >= 2")

    def member(n: int) -> bool:
        if n < base**from_exp:
            return False
        while n % base == 0:
            n //= base
        return n == 1

    def enum(n: int) -> list[int]:
        out, v = [], base**from_exp
        while v < n:
            out.append(v)
            v *= base
        return out

    return SetExpr(member, f"powers({base},from={from_exp})", finite=False, _enumerator=enum)


def from_predicate(pred: Callable[[int], bool], description: str,
                   finite: Optional[bool] = None) -> SetExpr:
    return SetExpr(pred, description, finite=finite)


# --------------------------------------------------------------------------
# combinators

def union(a: SetExpr, b: SetExpr) -> SetExpr:
    finite = True if (a.finite is True and b.finite is True) else \
        (False if (a.finite is False or b.finite is False) else None)
    bound = None
    if finite and a.bound is not None and b.bound is not None:
        bound = max(a.bound, b.bound)
    return SetExpr(
        membership=lambda n: a.membership(n) or b.membership(n),
        description=f"({a.description} | {b.description})",
        finite=finite,
        bound=bound,
        is_omega=a.is_omega or b.is_omega,
    )


def intersect(a: SetExpr, b: SetExpr) -> SetExpr:
    finite = True if (a.finite is True or b.finite is True) else None
    bound = None
    if finite:
        cands = [x.bound for x in (a, b) if x.finite is True and x.bound is not None]
        bound = min(cands) if cands else None
    return SetExpr(
        membership=lambda n: a.membership(n) and b.membership(n),
        description=f"({a.description} & {b.description})",
        finite=finite,
        bound=bound,
    )


def difference(a: SetExpr, b: SetExpr) -> SetExpr:
    if a is b or b.is_omega:
        return empty_set()
    finite = True if a.finite is True else None
    return SetExpr(
        membership=lambda n: a.membership(n) and not b.membership(n),
        description=f"({a.description} \\ {b.description})",
        finite=finite,
        bound=a.bound if finite else None,
    )


def shifted(a: SetExpr, delta: int, rule: Optional[WeightRule] = None) -> SetExpr:
    """A + delta (delta may be negative; elements pushed below 0 are dropped).

    When `rule` is given, rank-indexed tail certificates for that family are
    transported: shifting up never increases tails of a nonincreasing family;
    shifting down multiplies them by rule.shift_down_factor per step.
    """
    if delta == 0:
        return a

    if delta > 0:
        member = lambda n: n >= delta and a.membership(n - delta)
        enum = (lambda n: [e + delta for e in a.enumerate_below(max(0, n - delta))]) \
            if a._enumerator else None
    else:
        d = -delta
        member = lambda n: a.membership(n + d)
        enum = None

    certs: list[TailCertificate] = []
    if rule is not None:
        for c in a.certs:
            if c.family != rule.name or not isinstance(c, (GeometricTail, ExactTailSum)):
                continue
            if c.indexing != "rank":
                continue
            if delta > 0 and rule.nonincreasing:
                # elements only moved to larger indices; same ranks, smaller weights
                certs.append(c)
            elif delta < 0 and rule.shift_down_factor is not None:
                f = rule.shift_down_factor ** (-delta)
                if isinstance(c, GeometricTail):
                    certs.append(replace(c, bound=c.bound * f))
                else:
                    tail = c.tail
                    certs.append(ExactTailSum(c.family, (lambda g, ff: lambda k: ff * g(k))(tail, f),
                                              indexing="rank"))

    bound = None
    if a.finite is True and a.bound is not None:
        bound = max(0, a.bound + delta)
    return SetExpr(
        membership=member,
        description=f"({a.description} + {delta})",
        finite=a.finite,
        bound=bound,
        certs=tuple(certs),
        _enumerator=enum,
    )


def is_subset_below(a: SetExpr, b: SetExpr, n: int) -> bool:
    """Pointwise a <= b on [0, n); probe evidence only."""
    return all(b.membership(m) for m in a.enumerate_below(n))
