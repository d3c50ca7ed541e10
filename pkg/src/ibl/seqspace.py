"""Exact vectors over the canonical coordinates and the norms on them.

SeqVec is a finitely supported rational vector; LazyVec is an infinitely
supported one given by a coefficient rule plus a tail certificate that makes
sup-norms (and, for geometric tails, lp tails) computable in closed form.

Norms with radicals are exposed as exact powers: lp_power_norm returns
||x||_p^p and james_sq_norm returns the squared James norm, so that every
comparison in the test suite stays in the rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .errors import UnsupportedInput
from .submeasures import Submeasure

Q = Fraction


# --------------------------------------------------------------------------
# vectors

@dataclass(frozen=True)
class SeqVec:
    """Finitely supported vector; entries sorted, no explicit zeros."""

    entries: tuple[tuple[int, Fraction], ...]

    @staticmethod
    def make(pairs: Iterable[tuple[int, Fraction | int]]) -> "SeqVec":
        acc: dict[int, Fraction] = {}
        for i, v in pairs:
            if i < 0:
                raise ValueError("indices must be natural numbers")
            acc[i] = acc.get(i, Q(0)) + Q(v)
        ent = tuple((i, v) for i, v in sorted(acc.items()) if v != 0)
        return SeqVec(ent)

    @staticmethod
    def basis(i: int, c: Fraction | int = 1) -> "SeqVec":
        return SeqVec.make([(i, c)])

    @staticmethod
    def zero() -> "SeqVec":
        return SeqVec(())

    def coeff(self, i: int) -> Fraction:
        for j, v in self.entries:
            if j == i:
                return v
            if j > i:
                break
        return Q(0)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def __repr__(self) -> str:
        inside = ", ".join(f"e{i}*{v}" for i, v in self.entries[:6])
        if len(self.entries) > 6:
            inside += ", ..."
        return f"SeqVec({inside})"


@dataclass(frozen=True)
class EventuallyZero:
    start: int  # rule(m) = 0 for all m >= start


@dataclass(frozen=True)
class GeometricTail:
    """rule(m) = coeff * ratio^(m-start) for all m >= start, |ratio| < 1."""

    start: int
    ratio: Fraction
    coeff: Fraction


@dataclass(frozen=True)
class MonotoneVanishing:
    """|rule| is nonincreasing beyond start and tends to 0 (declared)."""

    start: int


@dataclass(frozen=True)
class Opaque:
    """Coefficients known below `known_below`; nothing declared past it.
    Sup norms and tail sums refuse such vectors."""

    known_below: int


VecTail = Union[EventuallyZero, GeometricTail, MonotoneVanishing, Opaque]


@dataclass(frozen=True)
class LazyVec:
    rule: Callable[[int], Fraction]
    tail: VecTail
    description: str = ""

    def __post_init__(self):
        t = self.tail
        if isinstance(t, GeometricTail):
            if not abs(t.ratio) < 1:
                raise ValueError("geometric vector tail needs |ratio| < 1")
            for j in range(8):
                expect = t.coeff * t.ratio**j
                got = Q(self.rule(t.start + j))
                if got != expect:
                    raise ValueError(
                        f"tail spot-check failed at {t.start + j}: {got} != {expect}")
        elif isinstance(t, MonotoneVanishing):
            prev = abs(Q(self.rule(t.start)))
            for j in range(1, 9):
                cur = abs(Q(self.rule(t.start + j)))
                if cur > prev:
                    raise ValueError("tail spot-check failed: |rule| increases")
                prev = cur
        elif isinstance(t, EventuallyZero):
            for j in range(4):
                if Q(self.rule(t.start + j)) != 0:
                    raise ValueError("tail spot-check failed: nonzero past start")
        elif not isinstance(t, Opaque):
            raise TypeError("unknown tail kind")

    def coeff(self, i: int) -> Fraction:
        if isinstance(self.tail, EventuallyZero) and i >= self.tail.start:
            return Q(0)
        return Q(self.rule(i))

    def truncate(self, horizon: int) -> SeqVec:
        return SeqVec.make((i, self.coeff(i)) for i in range(horizon))

    def __repr__(self) -> str:
        return f"LazyVec({self.description or 'rule'}; {type(self.tail).__name__})"


Vector = Union[SeqVec, LazyVec]


# --------------------------------------------------------------------------
# linear structure and functionals

def add(x: SeqVec, y: SeqVec) -> SeqVec:
    return SeqVec.make(list(x.entries) + list(y.entries))


def scale(c: Fraction | int, x: SeqVec) -> SeqVec:
    c = Q(c)
    if c == 0:
        return SeqVec.zero()
    return SeqVec(tuple((i, c * v) for i, v in x.entries))


@dataclass(frozen=True)
class Functional:
    """Finitely supported functional sum of c_k e*_k; exact on any vector."""

    coeffs: tuple[tuple[int, Fraction], ...]

    @staticmethod
    def make(pairs: Iterable[tuple[int, Fraction | int]]) -> "Functional":
        acc: dict[int, Fraction] = {}
        for i, v in pairs:
            acc[i] = acc.get(i, Q(0)) + Q(v)
        return Functional(tuple((i, v) for i, v in sorted(acc.items()) if v != 0))

    @staticmethod
    def basis(i: int, c: Fraction | int = 1) -> "Functional":
        return Functional.make([(i, c)])

    def __call__(self, x: Vector) -> Fraction:
        return sum((c * x.coeff(i) for i, c in self.coeffs), Q(0))

    def scaled(self, c: Fraction | int) -> "Functional":
        c = Q(c)
        return Functional.make((i, c * v) for i, v in self.coeffs)

    def plus(self, other: "Functional") -> "Functional":
        return Functional.make(list(self.coeffs) + list(other.coeffs))

    def __repr__(self) -> str:
        inside = " + ".join(f"{v}*e{i}^*" for i, v in self.coeffs[:4])
        return f"Functional({inside}{', ...' if len(self.coeffs) > 4 else ''})"


def apply(f: Functional, x: Vector) -> Fraction:
    return f(x)


# --------------------------------------------------------------------------
# norm tags

@dataclass(frozen=True)
class Lp:
    p: Fraction

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")


@dataclass(frozen=True)
class SupC0:
    pass


@dataclass(frozen=True)
class James:
    pass


@dataclass(frozen=True)
class Phi:
    phi: Submeasure
    horizon: int


NormTag = Union[Lp, SupC0, James, Phi]


# --------------------------------------------------------------------------
# lp and sup

def lp_power_norm(x: SeqVec, p: int) -> Fraction:
    """Exact ||x||_p^p for integer p >= 1."""
    if p < 1 or int(p) != p:
        raise ValueError("exact mode needs an integer p >= 1")
    return sum((abs(v) ** p for _, v in x.entries), Q(0))


def lp_norm_float(x: SeqVec, p: float) -> float:
    """Float presentation helper; relative error well below 2^-40."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(sum(abs(float(v)) ** p for _, v in x.entries)) ** (1.0 / p)


def sup_norm(x: Vector) -> Fraction:
    if isinstance(x, SeqVec):
        return max((abs(v) for _, v in x.entries), default=Q(0))
    t = x.tail
    if isinstance(t, EventuallyZero):
        head = max((abs(x.coeff(i)) for i in range(t.start)), default=Q(0))
        return head
    if isinstance(t, GeometricTail):
        head = max((abs(x.coeff(i)) for i in range(t.start)), default=Q(0))
        return max(head, abs(t.coeff))
    if isinstance(t, MonotoneVanishing):
        head = max((abs(x.coeff(i)) for i in range(t.start + 1)), default=Q(0))
        return head
    raise UnsupportedInput("sup over an unverifiable tail")


# --------------------------------------------------------------------------
# James norm

def _canonical_positions(x: SeqVec) -> list[tuple[int, Fraction]]:
    """Support plus zero sentinels: one inside each gap between support runs,
    one after the last support index, and one before the first support index
    only when that index is positive (chains start at position >= 0, so no
    zero exists before coordinate 0)."""
    if not x.entries:
        return []
    pts: list[tuple[int, Fraction]] = []
    first = x.entries[0][0]
    if first > 0:
        pts.append((first - 1, Q(0)))
    prev: Optional[int] = None
    for i, v in x.entries:
        if prev is not None and i > prev + 1:
            pts.append((prev + 1, Q(0)))
        pts.append((i, v))
        prev = i
    pts.append((prev + 1, Q(0)))
    return pts


def _zigzag_reduce(pts: list[tuple[int, Fraction]]) -> list[tuple[int, Fraction]]:
    """Drop points interior to a monotone value run.

    For chains maximising a sum of squared increments, the value selected
    from a monotone stretch can be pushed to one of the stretch's endpoints
    (the objective is convex in each coordinate), so interior points never
    help.  Keeps the DP quadratic in the number of alternations instead of
    the support size.
    """
    if len(pts) <= 2:
        return pts
    out = [pts[0]]
    for k in range(1, len(pts) - 1):
        a, b, c = out[-1][1], pts[k][1], pts[k + 1][1]
        if (b - a) * (c - b) < 0:
            out.append(pts[k])
    out.append(pts[-1])
    return out


def james_sq_norm(x: SeqVec, reduce: bool = True) -> Fraction:
    """Exact squared James norm: max over increasing index chains of the sum
    of squared consecutive differences, via DP over canonical positions."""
    pts = _canonical_positions(x)
    if reduce:
        pts = _zigzag_reduce(pts)
    vals = [v for _, v in pts]
    m = len(vals)
    if m == 0:
        return Q(0)
    best = [Q(0)] * m
    answer = Q(0)
    for j in range(1, m):
        vj = vals[j]
        bj = Q(0)
        for i in range(j):
            cand = best[i] + (vj - vals[i]) ** 2
            if cand > bj:
                bj = cand
        best[j] = bj
        if bj > answer:
            answer = bj
    return answer


def james_brute(x: SeqVec, window: int) -> Fraction:
    """Exhaustive chain maximum; the testing oracle for james_sq_norm.

    For small windows every position in [0, window] is a chain candidate,
    with no canonicalisation at all; larger windows fall back to canonical
    positions and are refused past 18 points.
    """
    if window <= 17:
        pts = [(i, x.coeff(i)) for i in range(window + 1)]
    else:
        pts = [(i, v) for i, v in _canonical_positions(x) if i <= window]
        if len(pts) > 18:
            raise UnsupportedInput("brute-force chain search refused past 18 positions")

    vals = [v for _, v in pts]
    denom = math.lcm(*(v.denominator for v in vals)) if vals else 1
    ivals = [int(v * denom) for v in vals]
    n = len(ivals)
    best = 0

    def extend(idx: int, last: int, acc: int) -> None:
        nonlocal best
        if acc > best:
            best = acc
        for j in range(idx + 1, n):
            d = ivals[j] - last
            extend(j, ivals[j], acc + d * d)

    for s in range(n):
        extend(s, ivals[s], 0)
    return Q(best, denom * denom)


# --------------------------------------------------------------------------
# the submeasure norm

def phi_norm(x: SeqVec, phi: Submeasure, budget: int) -> Fraction:
    """|x_0| + max over the first `budget` family members of
    sum_k (k+1) mu({k}) |x_{k+1}|; exact and monotone in the budget."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    shifted_weights = [(i - 1, abs(v)) for i, v in x.entries if i >= 1]
    base = abs(x.coeff(0))
    if phi.uniform_prefix:
        return base + _phi_density_part(shifted_weights, budget)
    best = Q(0)
    for i in range(phi.members(budget)):
        mu = dict(phi.measure_at(i))
        total = sum(((k + 1) * mu[k] * w for k, w in shifted_weights if k in mu), Q(0))
        if total > best:
            best = total
    return base + best


def _phi_density_part(shifted_weights: list[tuple[int, Fraction]], budget: int) -> Fraction:
    """Density family: member i contributes prefix_i / (i+1) where prefix_i
    collects (k+1)|x_{k+1}| over k <= i.  The maximum over i < budget is
    attained where the prefix just grew, so only support corners matter."""
    best = Q(0)
    prefix = Q(0)
    for k, w in sorted(shifted_weights):
        if k >= budget:
            break
        prefix += (k + 1) * w
        val = Q(prefix, k + 1)
        if val > best:
            best = val
    return best


def tail_lp_power(v: LazyVec, p: int, start: int) -> Fraction:
    """Exact sum_{m >= start} |v_m|^p via the geometric closed form."""
    if p < 1 or int(p) != p:
        raise ValueError("p must be an integer >= 1")
    t = v.tail
    if isinstance(t, EventuallyZero):
        return sum((abs(v.coeff(m)) ** p for m in range(start, t.start)), Q(0))
    if isinstance(t, (MonotoneVanishing, Opaque)):
        raise UnsupportedInput("no closed form for this tail kind")
    ratio_p = abs(t.ratio) ** p
    if ratio_p >= 1:
        raise UnsupportedInput("divergent tail: |ratio|^p >= 1")
    head = Q(0)
    first = start
    if start < t.start:
        head = sum((abs(v.coeff(m)) ** p for m in range(start, t.start)), Q(0))
        first = t.start
    lead = abs(t.coeff * t.ratio ** (first - t.start)) ** p
    return head + lead / (1 - ratio_p)


def norm_power(x: SeqVec, tag: NormTag) -> Fraction:
    """The exact comparison key for a norm tag: ||x||_p^p, sup, or squared."""
    if isinstance(tag, Lp):
        if tag.p.denominator != 1:
            raise UnsupportedInput("exact mode needs integer p")
        return lp_power_norm(x, int(tag.p))
    if isinstance(tag, SupC0):
        return sup_norm(x)
    if isinstance(tag, James):
        return james_sq_norm(x)
    if isinstance(tag, Phi):
        return phi_norm(x, tag.phi, tag.horizon)
    raise TypeError("unknown norm tag")
