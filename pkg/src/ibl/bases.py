"""Biorthogonal systems, their simple-over witnesses, and the constructions.

A BiorthSystem pairs vectors with coordinate functionals; a SimpleWitness
carries the (D, h, b) data that expresses the partial-sum defect of the
system against its base system as a single rank-one term.  Constructions
whose displayed defect varies inside an h-cell provide an exact per-index
difference function alongside the per-cell representative used for
threshold computations.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .errors import ContractViolation, UnsupportedInput
from .seqspace import (EventuallyZero, Functional, GeometricTail, James,
                       LazyVec, Lp, MonotoneVanishing, NormTag, Opaque, Phi,
                       SeqVec, SupC0, Vector, add, james_sq_norm,
                       lp_power_norm, phi_norm, scale, sup_norm,
                       tail_lp_power)
from .sets import SetExpr, omega, odds, stride
from .submeasures import Submeasure, covered_atoms_below
from .weights import BlockRule, Partition, WeightRule

Q = Fraction


# --------------------------------------------------------------------------
# core types

@dataclass(frozen=True)
class BiorthSystem:
    name: str
    vec_at: Callable[[int], Vector]
    fun_at: Callable[[int], Functional]
    params: dict = field(default_factory=dict)
    base: Optional["BiorthSystem"] = None  # None: the unit-vector system

    def __repr__(self) -> str:
        return f"BiorthSystem({self.name})"


@dataclass(frozen=True)
class SimpleWitness:
    """(D, h, b) with h interval-to-one on D and b_k nonzero for k in h[D].

    diff_term, when present, gives the exact defect vector at index n
    (truncated to a horizon); it exists for constructions whose defect
    varies within an h-cell, where b_at holds the minimal-norm
    representative that the threshold machinery uses.

    norm_power_override, when present, supplies the exact comparison key of
    ||b_k|| for a norm tag; used where b_k itself is only partially
    materialisable (reconstructed z-sequences) but its norm is known exactly.
    """

    d: SetExpr
    h: Callable[[int], int]
    b_at: Callable[[int], Vector]
    diff_term: Optional[Callable[[int, Vector, int], SeqVec]] = None
    norm_power_override: Optional[Callable[[int, NormTag], Fraction]] = None

    def __repr__(self) -> str:
        return f"SimpleWitness(D={self.d.description})"


@dataclass(frozen=True)
class PartialSum:
    vec: SeqVec
    truncated_at: Optional[int] = None  # set when a lazy summand was clipped


# --------------------------------------------------------------------------
# partial sums and checks

def canonical_partial_sum(x: Vector, n: int, horizon: int) -> PartialSum:
    """S_n of the unit-vector system: x restricted to coordinates <= n."""
    if isinstance(x, SeqVec):
        return PartialSum(SeqVec(tuple((i, v) for i, v in x.entries if i <= n)))
    top = min(n + 1, horizon)
    vec = SeqVec.make((i, x.coeff(i)) for i in range(top))
    return PartialSum(vec, truncated_at=horizon if n + 1 > horizon else None)


def partial_sum(system: BiorthSystem, x: Vector, n: int, horizon: int) -> PartialSum:
    """Exact S_n(system)(x), with lazy summands clipped at the horizon."""
    entries: list[tuple[int, Fraction]] = []
    truncated = False
    for i in range(n + 1):
        c = system.fun_at(i)(x)
        if c == 0:
            continue
        v = system.vec_at(i)
        if isinstance(v, LazyVec):
            if not (isinstance(v.tail, EventuallyZero) and v.tail.start <= horizon):
                truncated = True
            v = v.truncate(horizon)
        entries.extend((j, c * w) for j, w in v.entries)
    return PartialSum(SeqVec.make(entries), truncated_at=horizon if truncated else None)


def system_partial_sum(system: Optional[BiorthSystem], x: Vector, n: int,
                       horizon: int) -> PartialSum:
    if system is None:
        return canonical_partial_sum(x, n, horizon)
    return partial_sum(system, x, n, horizon)


def biorthogonality_check(system: BiorthSystem, bound: int):
    """Exact a*_n(a_m) = delta check for all n, m < bound.

    Returns (True, None) or (False, (n, m, value)) at the first failure.
    """
    for n in range(bound):
        f = system.fun_at(n)
        for m in range(bound):
            got = f(system.vec_at(m))
            want = Q(1) if n == m else Q(0)
            if got != want:
                return False, (n, m, got)
    return True, None


def base_functional(system: BiorthSystem, k: int) -> Functional:
    if system.base is None:
        return Functional.basis(k)
    return system.base.fun_at(k)


def witness_defect(system: BiorthSystem, w: SimpleWitness, n: int, x: Vector,
                   horizon: int) -> SeqVec:
    """The declared right side of the two-case identity at index n."""
    if not w.d.membership(n):
        return SeqVec.zero()
    if w.diff_term is not None:
        return w.diff_term(n, x, horizon)
    k = w.h(n)
    c = base_functional(system, k)(x)
    if c == 0:
        return SeqVec.zero()
    b = w.b_at(k)
    if isinstance(b, LazyVec):
        b = b.truncate(horizon)
    return scale(c, b)


def simple_witness_check(system: BiorthSystem, w: SimpleWitness, x: Vector,
                         n: int, horizon: int):
    """Verify S_n(base) - S_n(system) against the witness, exactly, on
    coordinates below the horizon.  Returns (ok, lhs, rhs)."""
    su = system_partial_sum(system.base, x, n, horizon)
    sa = partial_sum(system, x, n, horizon)
    lhs = add(su.vec, scale(-1, sa.vec))
    lhs = SeqVec(tuple((i, v) for i, v in lhs.entries if i < horizon))
    rhs = witness_defect(system, w, n, x, horizon)
    rhs = SeqVec(tuple((i, v) for i, v in rhs.entries if i < horizon))
    return lhs == rhs, lhs, rhs


def witness_interval_check(w: SimpleWitness, probe: int) -> bool:
    """h must be interval-to-one on D: each probed fibre is a contiguous
    integer interval contained in D."""
    fibres: dict[int, list[int]] = {}
    for n in w.d.enumerate_below(probe):
        fibres.setdefault(w.h(n), []).append(n)
    for k, pts in fibres.items():
        lo, hi = pts[0], pts[-1]
        if hi - lo + 1 != len(pts):
            return False
        for m in range(lo, hi + 1):
            if not w.d.membership(m) or w.h(m) != k:
                return False
    return True


@functools.lru_cache(maxsize=1 << 16)
def witness_norm_power(w: SimpleWitness, k: int, space: NormTag) -> Fraction:
    """Exact comparison key of ||b_k|| in the given space: the sup norm for
    c0, ||.||_p^p for lp, the squared norm for James.  Cached; witnesses are
    immutable so the cache is transparent."""
    if w.norm_power_override is not None:
        return w.norm_power_override(k, space)
    b = w.b_at(k)
    if isinstance(space, SupC0):
        return sup_norm(b)
    if isinstance(space, Lp):
        if space.p.denominator != 1:
            raise UnsupportedInput("exact thresholds need integer p")
        p = int(space.p)
        if isinstance(b, SeqVec):
            return lp_power_norm(b, p)
        return tail_lp_power(b, p, 0)
    if isinstance(space, James):
        if isinstance(b, SeqVec):
            return james_sq_norm(b)
        raise UnsupportedInput("exact James norm of a lazy vector")
    if isinstance(space, Phi):
        if isinstance(b, SeqVec):
            return phi_norm(b, space.phi, space.horizon)
        raise UnsupportedInput("phi norm of a lazy vector")
    raise TypeError("unknown space tag")


# --------------------------------------------------------------------------
# constructions

def build_known_example() -> tuple[BiorthSystem, SimpleWitness]:
    """Partial-sum vectors over the unit basis: a_n = e_0 + ... + e_n with
    a*_n = e*_n - e*_{n+1}; witnessed by D = omega, h = succ,
    b_{n+1} = e_0 + ... + e_n."""

    def vec_at(n: int) -> SeqVec:
        return SeqVec.make((i, 1) for i in range(n + 1))

    def fun_at(n: int) -> Functional:
        return Functional.make([(n, 1), (n + 1, -1)])

    def b_at(k: int) -> SeqVec:
        if k < 1:
            raise ValueError("witness vectors live on h[D] = {1, 2, ...}")
        return SeqVec.make((i, 1) for i in range(k))

    def norm_power(k: int, space: NormTag) -> Fraction:
        # ||b_k||: a block of k ones starting at coordinate 0
        if isinstance(space, SupC0):
            return Q(1)
        if isinstance(space, Lp):
            return Q(k)
        if isinstance(space, James):
            return Q(1)
        raise UnsupportedInput("no closed form in this space")

    system = BiorthSystem("known_example", vec_at, fun_at)
    witness = SimpleWitness(omega(), lambda n: n + 1, b_at,
                            norm_power_override=norm_power)
    return system, witness


def build_partition_basis(partition: Partition) -> tuple[BiorthSystem, SimpleWitness]:
    """a_n = e_n + m_n e_{n+1} where m_n is the partition cell of n; the
    partition's cell 0 must be the evens, which makes the functionals
    a*_n = e*_n - m_{n-1} e*_{n-1} biorthogonal."""
    for n in range(0, 1024, 2):
        if partition.cell(n) != 0:
            raise ValueError("partition cell 0 must contain the evens")
        if partition.cell(n + 1) == 0:
            raise ValueError("partition cell 0 must equal the evens")

    m = partition.cell

    def vec_at(n: int) -> SeqVec:
        return SeqVec.make([(n, 1), (n + 1, m(n))])

    def fun_at(n: int) -> Functional:
        if n == 0:
            return Functional.basis(0)
        return Functional.make([(n, 1), (n - 1, -m(n - 1))])

    def b_at(k: int) -> SeqVec:
        if m(k) == 0:
            raise ValueError("witness vectors live on the odd coordinates")
        return SeqVec.make([(k + 1, m(k))])

    def norm_power(k: int, space: NormTag) -> Fraction:
        # ||m_k e_{k+1}||: a single spike away from coordinate 0
        mk = Q(m(k))
        if isinstance(space, SupC0):
            return mk
        if isinstance(space, Lp):
            return mk ** int(space.p)
        if isinstance(space, James):
            return 2 * mk * mk
        raise UnsupportedInput("no closed form in this space")

    system = BiorthSystem("partition_basis", vec_at, fun_at,
                          params={"partition": partition.name})
    witness = SimpleWitness(odds(), lambda n: n, b_at,
                            norm_power_override=norm_power)
    return system, witness


@dataclass(frozen=True)
class IntervalFamily:
    """Pairwise separated intervals [lo_k, hi_k] with hi_k + 1 < lo_{k+1}."""

    at: Callable[[int], tuple[int, int]]

    def __post_init__(self):
        prev_hi = None
        for k in range(16):
            lo, hi = self.at(k)
            if lo > hi or lo < 0:
                raise ValueError(f"bad interval at {k}: [{lo}, {hi}]")
            if prev_hi is not None and lo <= prev_hi + 1:
                raise ValueError("intervals must be separated by a gap of at least one")
            prev_hi = hi

    @staticmethod
    def arithmetic(stride_len: int, width: int, offset: int) -> "IntervalFamily":
        if width + 1 >= stride_len:
            raise ValueError("intervals would touch")
        return IntervalFamily(lambda k: (stride_len * k + offset,
                                         stride_len * k + offset + width))

    def cell_of(self, n: int) -> Optional[int]:
        k = 0
        while True:
            lo, hi = self.at(k)
            if n < lo:
                return None
            if n <= hi:
                return k
            k += 1

    def union_set(self) -> SetExpr:
        fam = self

        def member(n: int) -> bool:
            return fam.cell_of(n) is not None

        return SetExpr(member, "union-of-intervals", finite=False)


def build_thm_distinguishing(intervals: IntervalFamily,
                             space: NormTag) -> tuple[BiorthSystem, SimpleWitness]:
    """The construction that makes the ideal generated by Fin and the union
    of the given intervals critical.  Exact in c0 and lp, where the block
    minimum d_k equals 1; refused for James, whose minimum is sqrt(2).

    The displayed defect varies inside each interval, so the witness keeps
    b_at as the minimal-norm representative (its norm is exactly 2^{lo_k})
    and carries the exact per-index defect separately.
    """
    if isinstance(space, James):
        raise UnsupportedInput(
            "the block minimum in the James space is sqrt(2); no exact route")
    if not isinstance(space, (SupC0, Lp)):
        raise UnsupportedInput("supported spaces: c0 and lp")

    def d_and_argmin(k: int) -> tuple[Fraction, int]:
        lo, hi = intervals.at(k)
        best, best_j = None, None
        for j in range(lo + 1, hi + 2):
            v = SeqVec.make((i, 1) for i in range(j, hi + 2))
            key = witness_norm_key = (sup_norm(v) if isinstance(space, SupC0)
                                      else lp_power_norm(v, int(space.p)))
            if best is None or key < best:
                best, best_j = key, j
        # the key is the norm for c0 and the p-th power for lp; both are
        # minimised together, and for these spaces the minimum value is 1
        if best != 1:
            raise ContractViolation("block minimum should be exactly 1 here")
        return Q(1), best_j

    def vec_at(n: int) -> SeqVec:
        k = intervals.cell_of(n)
        if k is not None:
            lo, hi = intervals.at(k)
            if n == lo:
                d, _ = d_and_argmin(k)
                coef = Q(2**n) / d
                return SeqVec.make([(n, 1)] + [(i, coef) for i in range(n + 1, hi + 2)])
        return SeqVec.basis(n)

    def fun_at(n: int) -> Functional:
        k = intervals.cell_of(n - 1) if n >= 1 else None
        if k is None:
            return Functional.basis(n)
        lo, _ = intervals.at(k)
        d, _ = d_and_argmin(k)
        return Functional.make([(n, 1), (lo, -(Q(2**lo) / d))])

    def b_at(k_img: int) -> SeqVec:
        # image side: h(n) = lo_k, so k_img is an interval's left endpoint
        k = intervals.cell_of(k_img)
        if k is None or intervals.at(k)[0] != k_img:
            raise ValueError("witness index must be an interval left endpoint")
        lo, hi = intervals.at(k)
        d, j = d_and_argmin(k)
        coef = Q(2**lo) / d
        return SeqVec.make((i, coef) for i in range(j, hi + 2))

    def diff_term(n: int, x: Vector, horizon: int) -> SeqVec:
        k = intervals.cell_of(n)
        if k is None:
            return SeqVec.zero()
        lo, hi = intervals.at(k)
        d, _ = d_and_argmin(k)
        c = Functional.basis(lo)(x)
        if c == 0:
            return SeqVec.zero()
        coef = -c * Q(2**lo) / d
        return SeqVec.make((i, coef) for i in range(n + 1, min(hi + 2, horizon)))

    def h(n: int) -> int:
        k = intervals.cell_of(n)
        if k is None:
            raise ValueError("h is defined on the interval union only")
        return intervals.at(k)[0]

    system = BiorthSystem("thm_distinguishing", vec_at, fun_at,
                          params={"space": repr(space)})
    witness = SimpleWitness(intervals.union_set(), h, b_at, diff_term=diff_term)
    return system, witness


class _AnySeqRecurrence:
    """c_0 = 1 and c_{k+1} = ||sum_{i<=k} c_i e_{t_i}|| / s_k, exactly in the
    sup and l1 norms, in floats (snapped back to rationals) otherwise."""

    def __init__(self, t: Callable[[int], int], s: Callable[[int], Fraction],
                 space: NormTag, precision: float):
        self.t = t
        self.s = s
        self.space = space
        self.precision = precision
        self.c: list[Fraction] = [Q(1)]
        self._sup = Q(1)       # running max |c_i| (sup norm of the stack)
        self._l1 = Q(1)        # running sum |c_i|
        self._float_pow = 1.0  # running sum |c_i|^p in float mode
        self.exact = isinstance(space, SupC0) or (
            isinstance(space, Lp) and space.p == 1)

    def _stack_norm(self) -> Fraction:
        if isinstance(self.space, SupC0):
            return self._sup
        if isinstance(self.space, Lp) and self.space.p == 1:
            return self._l1
        if isinstance(self.space, Lp):
            return Q(self._float_pow ** (1.0 / float(self.space.p)))
        if isinstance(self.space, James):
            vec = SeqVec.make((self.t(i), ci) for i, ci in enumerate(self.c))
            return Q(math.sqrt(float(james_sq_norm(vec))))
        raise UnsupportedInput("any-sequence recurrence supports c0, lp, James")

    def ensure(self, k: int) -> None:
        while len(self.c) <= k:
            j = len(self.c) - 1
            sk = Q(self.s(j))
            if sk <= 0:
                raise ValueError("targets s_k must be positive")
            nxt = self._stack_norm() / sk
            self.c.append(nxt)
            self._sup = max(self._sup, abs(nxt))
            self._l1 += abs(nxt)
            if isinstance(self.space, Lp) and self.space.p != 1:
                self._float_pow += abs(float(nxt)) ** float(self.space.p)

    def at(self, k: int) -> Fraction:
        self.ensure(k)
        return self.c[k]


def build_any_sequence(t: BlockRule, s: Callable[[int], Fraction], space: NormTag,
                       precision: float = 1e-9) -> tuple[BiorthSystem, SimpleWitness]:
    """For any increasing t with t_0 = 0 and positive targets s, a system
    whose witness vectors satisfy ||b_{t_{k+1}}|| = s_k (exactly in the sup
    and l1 norms; within the declared precision elsewhere)."""
    rec = _AnySeqRecurrence(t.t, s, space, precision)
    tt = t.t

    def block_index(n: int) -> int:
        return t.cell_of(n)

    def is_marker(n: int) -> Optional[int]:
        k = block_index(n)
        return k if tt(k) == n else None

    def vec_at(n: int) -> SeqVec:
        k = is_marker(n)
        if k is None:
            return SeqVec.basis(n)
        rec.ensure(k)
        return SeqVec.make((tt(i), rec.at(i)) for i in range(k + 1))

    def fun_at(n: int) -> Functional:
        k = is_marker(n)
        if k is None:
            return Functional.basis(n)
        rec.ensure(k + 1)
        return Functional.make([(tt(k), 1 / rec.at(k)),
                                (tt(k + 1), -1 / rec.at(k + 1))])

    def b_at(m: int) -> SeqVec:
        k = block_index(m)
        if k == 0 or tt(k) != m:
            raise ValueError("witness vectors live at the markers t_{k+1}")
        k -= 1  # m = t_{k+1}
        rec.ensure(k + 1)
        return SeqVec.make((tt(i), rec.at(i) / rec.at(k + 1)) for i in range(k + 1))

    def h(n: int) -> int:
        return tt(block_index(n) + 1)

    norm_power = None
    if rec.exact:
        # by the recurrence, ||b_{t_{k+1}}|| = s_k exactly in the exact modes
        def norm_power(m: int, sp: NormTag) -> Fraction:
            if type(sp) is not type(space):
                raise UnsupportedInput("witness norms known in the build space only")
            k = block_index(m) - 1
            if k < 0 or tt(k + 1) != m:
                raise ValueError("witness vectors live at the markers t_{k+1}")
            sk = Q(s(k))
            return sk if isinstance(sp, SupC0) else sk ** int(sp.p)

    system = BiorthSystem("any_sequence", vec_at, fun_at,
                          params={"t": t.name, "space": repr(space),
                                  "exact": rec.exact, "precision": precision})
    witness = SimpleWitness(omega(), h, b_at, norm_power_override=norm_power)
    return system, witness


# --------------------------------------------------------------------------
# tail-avoiding constructions

@dataclass(frozen=True)
class ZSequence:
    """A positive rational sequence with enough declared structure to make
    the tail suprema (and, when geometric, lp tails) of the derived witness
    vectors exactly computable."""

    name: str
    at: Callable[[int], Fraction]
    kind: str                     # "geometric" | "reciprocal" | "explicit"
    ratio: Optional[Fraction] = None
    values: Optional[tuple[Fraction, ...]] = None
    attain_bound: Optional[Callable[[int], int]] = None  # sup of z_m/z_n attained by this m

    def __post_init__(self):
        for n in range(8):
            if self.kind != "explicit" and self.at(n) <= 0:
                raise ValueError("z must be positive")


def z_geometric(q: Fraction) -> ZSequence:
    q = Q(q)
    if not 0 < q < 1:
        raise ValueError("need 0 < q < 1")
    return ZSequence(f"geometric({q})", lambda n: q**n, "geometric", ratio=q)


def z_reciprocal() -> ZSequence:
    return ZSequence("reciprocal_succ", lambda n: Q(1, n + 1), "reciprocal")


def build_avoid(z: ZSequence) -> tuple[BiorthSystem, SimpleWitness]:
    """Vectors a_n = z restricted to [n, oo), with functionals
    a*_0 = e*_0/z_0 and a*_n = e*_n/z_n - e*_{n-1}/z_{n-1}; witnessed by
    D = omega, h = id, b_n = -(tail of z past n)/z_n."""

    def tail_from(start: int, lead_at: int) -> object:
        if z.kind == "geometric":
            return GeometricTail(start=start, ratio=z.ratio, coeff=z.at(lead_at))
        if z.kind == "reciprocal":
            return MonotoneVanishing(start=start)
        return Opaque(known_below=len(z.values or ()))

    def vec_at(n: int) -> LazyVec:
        return LazyVec(
            rule=lambda m, n=n: z.at(m) if m >= n else Q(0),
            tail=tail_from(n, n),
            description=f"z-tail from {n}",
        )

    def fun_at(n: int) -> Functional:
        if n == 0:
            return Functional.make([(0, 1 / z.at(0))])
        return Functional.make([(n, 1 / z.at(n)), (n - 1, -1 / z.at(n - 1))])

    def b_at(n: int) -> LazyVec:
        zn = z.at(n)
        tail = tail_from(n + 1, n + 1)
        if isinstance(tail, GeometricTail):
            tail = GeometricTail(start=n + 1, ratio=z.ratio, coeff=-z.at(n + 1) / zn)
        return LazyVec(
            rule=lambda m, n=n, zn=zn: -z.at(m) / zn if m > n else Q(0),
            tail=tail,
            description=f"avoid-witness b_{n}",
        )

    norm_override = None
    if z.kind == "explicit":
        def norm_override(k: int, space: NormTag) -> Fraction:
            if isinstance(space, SupC0):
                return alpha_seq(z, k)
            raise UnsupportedInput("reconstructed z only has exact sup norms")

    system = BiorthSystem("avoid", vec_at, fun_at, params={"z": z.name})
    witness = SimpleWitness(omega(), lambda n: n, b_at,
                            norm_power_override=norm_override)
    return system, witness


def alpha_seq(z: ZSequence, n: int) -> Fraction:
    """sup_{m>n} z_m / z_n, via the sup norm of the avoid-witness vector."""
    if z.kind == "explicit":
        if z.values is None or z.attain_bound is None:
            raise UnsupportedInput("explicit z needs materialised values")
        top = z.attain_bound(n)
        if top >= len(z.values):
            raise UnsupportedInput("sup not attained below the materialised horizon")
        zn = z.values[n]
        best = max(z.values[m] / zn for m in range(n + 1, len(z.values)))
        return best
    _, w = build_avoid(z)
    return sup_norm(w.b_at(n))


def beta_seq(z: ZSequence, p: int, n: int) -> Fraction:
    """sum_{m>n} (z_m/z_n)^p, via the lp tail of the avoid-witness vector."""
    _, w = build_avoid(z)
    b = w.b_at(n)
    if not isinstance(b.tail, GeometricTail):
        raise UnsupportedInput("exact lp tails need a geometric z")
    return tail_lp_power(b, p, n + 1)


@dataclass(frozen=True)
class ProductZeroCert:
    """Declares an infinite index set on which y stays below a sub-1 bound,
    certifying that the product of the sub-1 values of y vanishes."""

    index_set: SetExpr
    bound: Fraction

    def __post_init__(self):
        if not self.bound < 1:
            raise ValueError("the declared bound must be below 1")


def reconstruct_z_from_alpha(y: Callable[[int], Fraction], n_values: int,
                             cert: Optional[ProductZeroCert]) -> ZSequence:
    """Rebuild a positive null sequence z whose tail-supremum ratios equal y.

    Anchors are the positions with y < 1; each anchor's value feeds the next
    (z at the next anchor is y_anchor * z_anchor) and off-anchor positions
    take z = (next anchor value) / y.  The certificate that sub-1 values of
    y have vanishing product is required, not tested: it is a tail property.
    """
    if cert is None:
        raise UnsupportedInput("a product-to-zero certificate is required")
    if cert.index_set.finite is True:
        raise UnsupportedInput("the certificate's index set must be infinite")
    for m in cert.index_set.enumerate_below(1 << 12)[:8]:
        if Q(y(m)) > cert.bound:
            raise ContractViolation(
                f"certificate bound {cert.bound} fails at {m}: y = {y(m)}")

    # materialise anchors until one lands at or past n_values
    anchors: list[int] = []
    scan_cap = 64 * (n_values + 1)
    m = 0
    while m < scan_cap:
        if Q(y(m)) < 1:
            anchors.append(m)
            if m >= n_values:
                break
        m += 1
    if not anchors or anchors[-1] < n_values:
        raise UnsupportedInput("not enough anchors below the scan cap")

    top = anchors[-1] + 1
    z = [Q(0)] * top
    anchor_val = {anchors[0]: Q(1)}
    for i in range(len(anchors) - 1):
        anchor_val[anchors[i + 1]] = anchor_val[anchors[i]] * Q(y(anchors[i]))
    nxt = {}
    ai = 0
    for n in range(top):
        if ai < len(anchors) and anchors[ai] == n:
            z[n] = anchor_val[n]
            ai += 1
        else:
            nxt_anchor = anchors[ai]  # first anchor past n
            z[n] = anchor_val[nxt_anchor] / Q(y(n))
        nxt[n] = anchors[ai] if ai < len(anchors) else top

    def attain_bound(n: int) -> int:
        # the supremum of z_m/z_n is attained at the first anchor past n
        j = 0
        while j < len(anchors) and anchors[j] <= n:
            j += 1
        return anchors[j] if j < len(anchors) else top

    return ZSequence(
        name="reconstructed",
        at=lambda n: z[n],
        kind="explicit",
        values=tuple(z),
        attain_bound=attain_bound,
    )


def build_v_basis() -> tuple[BiorthSystem, SimpleWitness]:
    """The ones-then-geometric vectors v_n = (1,...,1, 1, 1/2, 1/4, ...) over
    the geometric avoid system: simple over it with h = succ and lazy defect
    vectors d_{n+1} of sup norm exactly 2^-n."""
    avoid_sys, _ = build_avoid(z_geometric(Q(1, 2)))

    def vec_at(n: int) -> LazyVec:
        return LazyVec(
            rule=lambda m, n=n: Q(1) if m < n else Q(1, 2 ** (m - n)),
            tail=GeometricTail(start=n, ratio=Q(1, 2), coeff=Q(1)),
            description=f"ones^{n} then halving",
        )

    def fun_at(n: int) -> Functional:
        if n == 0:
            return Functional.make([(0, 2), (1, -2)])
        return Functional.make([(n - 1, -1), (n, 3), (n + 1, -2)])

    def b_at(k: int) -> LazyVec:
        if k < 1:
            raise ValueError("witness vectors live on h[D] = {1, 2, ...}")
        n = k - 1
        return LazyVec(
            rule=lambda j, n=n: Q(1, 2**n) if j <= n else Q(1, 2**j),
            tail=GeometricTail(start=n + 1, ratio=Q(1, 2), coeff=Q(1, 2 ** (n + 1))),
            description=f"v-defect d_{n + 1}",
        )

    system = BiorthSystem("v_basis", vec_at, fun_at, base=avoid_sys)
    witness = SimpleWitness(omega(), lambda n: n + 1, b_at)
    return system, witness


def build_double_partial_sums() -> tuple[BiorthSystem, SimpleWitness]:
    """Partial sums taken over the (non-unconditional) partial-sum system of
    c0 rather than over the unit basis: a_n = sum_{i<=n} u_i with
    a*_n = u*_n - u*_{n+1}.  The witness vectors b_{n+1} = sum_{i<=n} u_i
    have sup norm n+1; this is the regression fixture showing that the
    closed-form route needs unconditionality of the base."""
    summing, _ = build_known_example()

    def vec_at(n: int) -> SeqVec:
        return SeqVec.make((j, n + 1 - j) for j in range(n + 1))

    def fun_at(n: int) -> Functional:
        return Functional.make([(n, 1), (n + 1, -2), (n + 2, 1)])

    def b_at(k: int) -> SeqVec:
        if k < 1:
            raise ValueError("witness vectors live on h[D] = {1, 2, ...}")
        return SeqVec.make((j, k - j) for j in range(k))

    def norm_power(k: int, space: NormTag) -> Fraction:
        # b_k decreases k, k-1, ..., 1 from coordinate 0
        if isinstance(space, SupC0):
            return Q(k)
        raise UnsupportedInput("sup norms only for this fixture")

    system = BiorthSystem("double_partial_sums", vec_at, fun_at, base=summing)
    witness = SimpleWitness(omega(), lambda n: n + 1, b_at,
                            norm_power_override=norm_power)
    return system, witness


# --------------------------------------------------------------------------
# a basis for a submeasure norm

def build_phi_basis(phi: Submeasure, budget: int,
                    length: int) -> tuple[BiorthSystem, SimpleWitness]:
    """Solve p_n > 0 so that the stacked vectors a_n = sum_{i<=n} p_i e_i
    have phi-norm exactly n+1, and return the system with functionals
    a*_n = e*_n/p_n - e*_{n+1}/p_{n+1}.

    The phi-norm is affine in p_n once the other coordinates are fixed, so
    the equation is solved exactly: the least breakpoint candidate over the
    family members carrying weight at the new coordinate.
    """
    p = _solve_phi_coefficients(phi, budget, length + 1)

    def vec_at(n: int) -> SeqVec:
        if n >= length:
            raise ValueError(f"system materialised up to length {length}")
        return SeqVec.make((i, p[i]) for i in range(n + 1))

    def fun_at(n: int) -> Functional:
        if n + 1 > length:
            raise ValueError(f"system materialised up to length {length}")
        return Functional.make([(n, 1 / p[n]), (n + 1, -1 / p[n + 1])])

    def b_at(k: int) -> SeqVec:
        if k < 1:
            raise ValueError("witness vectors live on h[D] = {1, 2, ...}")
        return vec_at(k - 1)

    def norm_power(k: int, space: NormTag) -> Fraction:
        if isinstance(space, Phi) and space.phi is phi:
            return Q(k)  # the solved ladder: ||a_{k-1}||_phi = k
        raise UnsupportedInput("witness norms known for the build submeasure only")

    system = BiorthSystem("phi_basis", vec_at, fun_at,
                          params={"phi": phi.name, "budget": budget})
    witness = SimpleWitness(omega(), lambda n: n + 1, b_at,
                            norm_power_override=norm_power)
    return system, witness


def _solve_phi_coefficients(phi: Submeasure, budget: int, count: int) -> list[Fraction]:
    p: list[Fraction] = [Q(1)]  # |p_0| alone must equal 1
    members = phi.members(budget)
    measures = [dict(phi.measure_at(i)) for i in range(members)]
    # consts[i] accumulates sum_{k <= n-2} (k+1) mu_i({k}) p_{k+1} as n grows
    consts = [Q(0)] * members
    for n in range(1, count):
        target = Q(n)  # the sup part must reach (n+1) - p_0 = n
        slopes = [n * mu.get(n - 1, Q(0)) for mu in measures]
        best: Optional[Fraction] = None
        for c, s in zip(consts, slopes):
            if s > 0:
                cand = (target - c) / s
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise UnsupportedInput(
                f"no family member below {budget} weighs coordinate {n - 1}")
        assert best > 0
        reached = max(c + s * best for c, s in zip(consts, slopes))
        if reached != target:
            raise ContractViolation("breakpoint solve failed to hit the target")
        p.append(best)
        for i, s in enumerate(slopes):
            if s:
                consts[i] += s * best
    return p
