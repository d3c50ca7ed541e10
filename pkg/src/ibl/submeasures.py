"""Lower-semicontinuous submeasures presented by families of finite measures.

A submeasure here is the pointwise sup of an indexed family of finitely
supported measures; evaluating at budget H consults the first H family
members, which makes every evaluation an exact rational and monotone
nondecreasing in H.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .sets import SetExpr, probe_range

Q = Fraction

# a finite measure is a tuple of (atom, positive weight) pairs, atoms increasing
Measure = tuple[tuple[int, Fraction], ...]


def _check_measure(mu: Measure) -> Measure:
    atoms = [a for a, _ in mu]
    if atoms != sorted(set(atoms)):
        raise ValueError("measure atoms must be distinct and increasing")
    if any(w <= 0 for _, w in mu):
        raise ValueError("measure weights must be positive")
    return mu


@dataclass(frozen=True)
class Submeasure:
    """phi = sup over the family; phi_H = max over the first H members."""

    name: str
    measure_at: Callable[[int], Measure]
    size: Optional[int] = None          # None = infinite family
    full_support: bool = False          # every atom below probe range is covered
    # marks the family mu_i = uniform 1/(i+1) on [0, i], enabling O(support)
    # prefix-sum evaluation instead of walking every member's support
    uniform_prefix: bool = False
    _batch_eval: Optional[Callable[[SetExpr, int, int], Fraction]] = None

    def members(self, budget: int) -> int:
        return budget if self.size is None else min(budget, self.size)

    def __repr__(self) -> str:
        return f"Submeasure({self.name})"


def finite_family(measures: Sequence[Sequence[tuple[int, Fraction | int]]],
                  name: str = "explicit") -> Submeasure:
    mats: list[Measure] = []
    for mu in measures:
        mats.append(_check_measure(tuple((int(a), Q(w)) for a, w in mu)))
    if not mats:
        raise ValueError("empty measure family")
    frozen = tuple(mats)
    return Submeasure(name=name, measure_at=lambda i: frozen[i], size=len(frozen))


def density_family() -> Submeasure:
    """mu_i = uniform mass 1/(i+1) on [0, i]; sup is the upper-density submeasure."""

    def measure_at(i: int) -> Measure:
        w = Q(1, i + 1)
        return tuple((k, w) for k in range(i + 1))

    def batch_eval(a: SetExpr, from_: int, budget: int) -> Fraction:
        # |A & [from, i]| / (i+1) maximised over i < budget, via one enumeration
        xs = [x for x in a.enumerate_below(budget) if x >= from_]
        best = Q(0)
        for i in range(budget):
            cnt = bisect.bisect_right(xs, i)
            if cnt:
                val = Q(cnt, i + 1)
                if val > best:
                    best = val
        return best

    return Submeasure(name="density", measure_at=measure_at, size=None,
                      full_support=True, uniform_prefix=True,
                      _batch_eval=batch_eval)


def submeasure_eval(phi: Submeasure, a: SetExpr, from_: int, budget: int) -> Fraction:
    """max over the first `budget` family members of mu_i(A & [from_, oo)).

    Exact; monotone nondecreasing in the budget and nonincreasing in from_.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if phi._batch_eval is not None and phi.size is None:
        return phi._batch_eval(a, from_, budget)
    best = Q(0)
    for i in range(phi.members(budget)):
        total = Q(0)
        for atom, w in phi.measure_at(i):
            if atom >= from_ and a.membership(atom):
                total += w
        if total > best:
            best = total
    return best


def covered_atoms_below(phi: Submeasure, bound: int, scan: Optional[int] = None) -> set[int]:
    """Atoms below `bound` that appear in some scanned family member's support."""
    if phi.full_support:
        return set(range(bound))
    members = phi.size if phi.size is not None else (scan or bound)
    covered: set[int] = set()
    for i in range(members):
        for atom, _ in phi.measure_at(i):
            if atom < bound:
                covered.add(atom)
    return covered


def _singleton(n: int) -> Measure:
    return ((n, Q(1, 2**n)),)


def augment_support(phi: Submeasure, bound: Optional[int] = None) -> Submeasure:
    """Fill support holes below `bound` with singletons nu_n({n}) = 2^-n.

    The singletons are interleaved with the original members so that a finite
    budget reaches both kinds.  Idempotent on the probe range.  Exh-membership
    of sets inside the original support is unchanged: the added mass on a
    tail A \\ N is at most sum of 2^-n over n >= N.
    """
    bound = bound if bound is not None else probe_range()
    covered = covered_atoms_below(phi, bound)
    missing = [n for n in range(bound) if n not in covered]
    if not missing:
        return phi

    n_extra = len(missing)

    if phi.size is None:
        # evens walk the original family, odds walk the singletons; once the
        # singletons run out the odd slots repeat originals, which is harmless
        # because evaluation takes a max over members.
        def measure_at(i: int) -> Measure:
            j, r = divmod(i, 2)
            if r == 0:
                return phi.measure_at(j)
            return _singleton(missing[j]) if j < n_extra else phi.measure_at(j)

        new_size = None
    else:
        m = phi.size
        k = min(m, n_extra)

        def measure_at(i: int) -> Measure:
            if i < 2 * k:
                j, r = divmod(i, 2)
                return phi.measure_at(j) if r == 0 else _singleton(missing[j])
            idx = k + (i - 2 * k)
            if m <= n_extra:
                if idx >= n_extra:
                    raise IndexError("family index out of range")
                return _singleton(missing[idx])
            if idx >= m:
                raise IndexError("family index out of range")
            return phi.measure_at(idx)

        new_size = m + n_extra

    return Submeasure(
        name=f"{phi.name}+dyadic_fill",
        measure_at=measure_at,
        size=new_size,
        full_support=True,
    )
