"""Ideal representations on omega and certified membership verdicts.

The membership question "A in I" is undecidable from finitely many probes,
so every answer is a Verdict: In / NotIn only when a certificate, a
structural rule, or an exact closed form justifies it, and Undetermined
(with the partial-sum trajectory as evidence) otherwise.  The Verdict
constructor enforces that discipline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

from .errors import CertificateError, ContractViolation
from .sets import (CellCount, DivergenceWitness, ExactTailSum, GeometricTail,
                   SetExpr, difference, finite_set, omega, probe_range,
                   shifted, stride)
from .submeasures import Submeasure, submeasure_eval
from .weights import BlockRule, Partition, WeightRule

Q = Fraction

# scale for integer fixed-point lower bounds of long partial sums
_FP_SCALE = 1 << 48
# switch to fixed point when a partial sum has more terms than this
_EXACT_TERM_CAP = 2048


class Answer(str, Enum):
    IN = "In"
    NOT_IN = "NotIn"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Verdict:
    answer: Answer
    horizon: int
    certificate: Optional[str] = None
    trajectory: tuple[tuple[int, Fraction], ...] = ()
    witness: tuple[int, ...] = ()
    note: str = ""

    def __post_init__(self):
        if self.answer is not Answer.UNDETERMINED and not self.certificate:
            raise ValueError("certified answers must name their justification")

    @property
    def is_in(self) -> bool:
        return self.answer is Answer.IN

    @property
    def is_not_in(self) -> bool:
        return self.answer is Answer.NOT_IN

    @property
    def undetermined(self) -> bool:
        return self.answer is Answer.UNDETERMINED


def _in(h: int, cert: str, **kw) -> Verdict:
    return Verdict(Answer.IN, h, cert, **kw)


def _not_in(h: int, cert: str, **kw) -> Verdict:
    return Verdict(Answer.NOT_IN, h, cert, **kw)


def _undet(h: int, **kw) -> Verdict:
    return Verdict(Answer.UNDETERMINED, h, None, **kw)


# --------------------------------------------------------------------------
# partial-sum machinery

def exact_partial_sum(rule: WeightRule, elements: list[int]) -> Fraction:
    total = Q(0)
    for n in elements:
        total += rule.at(n)
    return total


def lower_partial_sum(rule: WeightRule, elements: list[int]) -> Fraction:
    """Certified lower bound on the sum; integer fixed point, scale 2^48."""
    acc = 0
    for n in elements:
        r = rule.at(n)
        acc += (r.numerator * _FP_SCALE) // r.denominator
    return Q(acc, _FP_SCALE)


def partial_sum_trajectory(rule: WeightRule, a: SetExpr, budget: int,
                           points: int = 6) -> tuple[tuple[int, Fraction], ...]:
    """Partial sums at dyadic checkpoints; exact for short element lists."""
    elements = a.enumerate_below(budget)
    exact = len(elements) <= _EXACT_TERM_CAP
    summer = exact_partial_sum if exact else lower_partial_sum
    marks = sorted({budget >> i for i in range(points)} | {budget})
    out = []
    idx = 0
    run: list[int] = []
    for mark in marks:
        while idx < len(elements) and elements[idx] < mark:
            run.append(elements[idx])
            idx += 1
        out.append((mark, summer(rule, run)))
    return tuple(out)


def divergence_crossing_by_scan(rule: WeightRule, a: SetExpr, target: Fraction,
                                cap: int = 1 << 21) -> int:
    """Smallest N (by doubling scan) with a certified sum over A below N >= target.

    The accumulator is an integer fixed-point lower bound, so the returned
    crossing is rigorous.  Raises if the cap is reached first.
    """
    target_scaled = target * _FP_SCALE
    acc = 0
    for m in range(cap):
        if a.membership(m):
            r = rule.at(m)
            acc += (r.numerator * _FP_SCALE) // r.denominator
            if acc >= target_scaled:
                return m + 1
    raise CertificateError(f"no crossing of {target} below cap {cap}")


def harmonic_crossing(target: Fraction) -> int:
    """N with sum_{n<N} 1/(n+1) >= target, certified by fixed-point sums."""
    from .weights import reciprocal_succ
    return divergence_crossing_by_scan(reciprocal_succ(), omega(), Q(target))


def _harmonic_ge(target: Fraction) -> int:
    """Some K with H_K >= target: scanned exactly when affordable, otherwise
    the integral bound H_K >= ln(K+1) with a 1% float-safety margin."""
    import math as _m
    if target <= 12:
        return harmonic_crossing(target)
    return _m.ceil(_m.exp(float(target)) * 1.01) + 1


def stride_divergence_witness(a: int, b: int) -> DivergenceWitness:
    """Witness that the harmonic family diverges over the stride {a + b*k}.

    Uses 1/(a + b*k + 1) >= 1/(b*(k+1)) (valid for a < b), so the partial sum
    over the first K stride elements is at least H_K / b.
    """
    if not 0 <= a < b:
        raise ValueError("stride witness needs 0 <= a < b")

    def crossing(m: Fraction) -> int:
        k = _harmonic_ge(Q(m) * b)
        return a + b * k

    return DivergenceWitness("reciprocal_succ", crossing)


# --------------------------------------------------------------------------
# certificate verification

def _spot_check_tail_cert(rule: WeightRule, a: SetExpr, cert, budget: int) -> None:
    """Direct partial tail sums must stay below the certified bound at three
    horizons; a violated bound is a hard error, not a verdict."""
    elements = a.enumerate_below(budget)
    if not elements:
        return
    if cert.indexing == "rank":
        marks = sorted({0, len(elements) // 2, max(len(elements) - 2, 0)})
        for k in marks:
            tail = exact_partial_sum(rule, elements[k:]) if len(elements) - k <= _EXACT_TERM_CAP \
                else lower_partial_sum(rule, elements[k:])
            if tail > cert.tail_bound(k):
                raise CertificateError(
                    f"{cert.name}: tail from rank {k} is {tail} > {cert.tail_bound(k)}")
    else:
        marks = sorted({0, budget // 2, budget - 1})
        for nmark in marks:
            chunk = [e for e in elements if e >= nmark]
            tail = exact_partial_sum(rule, chunk) if len(chunk) <= _EXACT_TERM_CAP \
                else lower_partial_sum(rule, chunk)
            if tail > cert.tail_bound(nmark):
                raise CertificateError(
                    f"{cert.name}: tail from value {nmark} is {tail} > {cert.tail_bound(nmark)}")


_DIV_CHECK_CAP = 1 << 17


def _verify_divergence_witness(rule: WeightRule, a: SetExpr, cert: DivergenceWitness,
                               budget: int) -> tuple[int, ...]:
    """Check the witness by direct certified sums at the largest thresholds
    whose claimed crossings are still affordable to scan.  At least the
    threshold 1 must be checkable."""
    crossings = []
    verified = 0
    for m in (Q(10), Q(2), Q(1)):
        n_cross = cert.crossing(m)
        crossings.append(n_cross)
        if n_cross > _DIV_CHECK_CAP:
            continue
        elements = a.enumerate_below(n_cross)
        total = exact_partial_sum(rule, elements) if len(elements) <= _EXACT_TERM_CAP \
            else lower_partial_sum(rule, elements)
        if total < m:
            raise CertificateError(
                f"{cert.name}: claimed crossing {n_cross} for {m} but sum is {total}")
        verified += 1
        if verified >= 2:
            break
    if verified == 0:
        raise CertificateError(f"{cert.name}: no claimed crossing is small enough to check")
    return tuple(crossings)


# --------------------------------------------------------------------------
# the representations

class IdealRep:
    """Base: a tagged ideal representation answering certified queries."""

    name: str = "ideal"

    def contains(self, a: SetExpr, budget: int) -> Verdict:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        fast = self._finite_fast_path(a, budget)
        if fast is not None:
            return fast
        return self._contains_core(a, budget)

    def _finite_fast_path(self, a: SetExpr, budget: int) -> Optional[Verdict]:
        if a.finite is True:
            if a.bound is not None:
                return _in(budget, "finite-literal", note=f"bound={a.bound}")
            window = max(budget // 4, 8)
            seen = a.enumerate_below(budget)
            if not seen or seen[-1] < budget - window:
                return _in(budget, "finite-tag+stabilization",
                           note=f"no elements in last {window} of horizon")
            return _undet(budget, note="finite tag not confirmed at this horizon")
        return None

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"IdealRep({self.name})"


class FinIdeal(IdealRep):
    name = "Fin"

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        if a.finite is False:
            return _not_in(budget, "infinite-tag")
        cert = a.cert_for("initial_segments", CellCount)
        if cert is not None:
            lo, hi = cert.count(1 << 20), cert.count(1 << 40)
            if lo is None or hi is None or hi > lo:
                _spot_check_cellcount_prefix(a, cert, budget)
                return _not_in(budget, cert.name, note="counting function grows")
        sample = tuple((n, Q(len(a.enumerate_below(n)))) for n in (budget // 2, budget))
        return _undet(budget, trajectory=sample)


def _spot_check_cellcount_prefix(a: SetExpr, cert: CellCount, budget: int) -> None:
    for mark in (min(budget, 64), budget):
        declared = cert.count(mark)
        actual = len(a.enumerate_below(mark))
        if declared is not None and declared != actual:
            raise CertificateError(
                f"{cert.name}: count below {mark} is {actual}, declared {declared}")


class FinPlusIdeal(IdealRep):
    """The ideal generated by Fin and one declared set E."""

    def __init__(self, e: SetExpr):
        self.e = e
        self.name = f"FinPlus({e.description})"

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        residual = difference(a, self.e)
        v = FinIdeal().contains(residual, budget)
        return Verdict(v.answer, v.horizon, v.certificate, v.trajectory, v.witness,
                       note=f"on A\\E: {v.note}" if v.note else "on A\\E")


class SummableIdeal(IdealRep):
    def __init__(self, rule: WeightRule):
        if rule.divergent_total is False:
            raise ValueError(f"{rule.name}: total sum declared finite; not a summable ideal")
        if rule.divergent_total is None:
            self._nontriviality_heuristic(rule)
        self.rule = rule
        self.name = f"Summable({rule.name})"

    @staticmethod
    def _nontriviality_heuristic(rule: WeightRule) -> None:
        acc = 0
        threshold = 1000 * _FP_SCALE
        for n in range(1 << 20):
            r = rule.at(n)
            acc += (r.numerator * _FP_SCALE) // r.denominator
            if acc >= threshold:
                return
        warnings.warn(
            f"{rule.name}: partial sums did not exceed 10^3 by 2^20; "
            "divergence of the total is only declared, not observed", stacklevel=3)

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        rule = self.rule
        div = a.cert_for(rule.name, DivergenceWitness)
        if div is not None:
            crossings = _verify_divergence_witness(rule, a, div, budget)
            return _not_in(budget, div.name, witness=crossings)
        if a.is_omega and rule.divergent_total:
            return _not_in(budget, "declared-total-divergence",
                           note=rule.divergence_form or "")
        if rule.lower_bound is not None and a.finite is False:
            return _not_in(budget, f"weight-lower-bound({rule.lower_bound})+infinite-tag")
        geo = a.cert_for(rule.name, GeometricTail)
        if geo is not None:
            _spot_check_tail_cert(rule, a, geo, budget)
            head = exact_partial_sum(rule, a.enumerate_below(budget)[:_EXACT_TERM_CAP])
            return _in(budget, geo.name, trajectory=((budget, head),))
        ets = a.cert_for(rule.name, ExactTailSum)
        if ets is not None:
            _spot_check_tail_cert(rule, a, ets, budget)
            marks = (budget, 2 * budget, 4 * budget) if ets.indexing == "value" else (0, 1, 2)
            vals = [ets.tail_bound(m) for m in marks]
            if not all(x >= y for x, y in zip(vals, vals[1:])):
                raise CertificateError(f"{ets.name}: tail bounds not nonincreasing")
            head = exact_partial_sum(rule, a.enumerate_below(budget)[:_EXACT_TERM_CAP])
            return _in(budget, ets.name, trajectory=((budget, head),))
        return _undet(budget, trajectory=partial_sum_trajectory(rule, a, budget))


class BlockIdeal(IdealRep):
    """Sets judged by which blocks they touch, the touched set weighed by r."""

    def __init__(self, rule: WeightRule, blocks: BlockRule):
        self.rule = rule
        self.blocks = blocks
        self.inner = SummableIdeal(rule)
        self.name = f"Block({rule.name};{blocks.name})"

    def touch_cert_family(self) -> str:
        return f"touch[{self.blocks.name}]:{self.rule.name}"

    def touched_set(self, a: SetExpr, cells: int) -> SetExpr:
        blocks = self.blocks

        def member(k: int) -> bool:
            return any(a.membership(n) for n in blocks.block(k))

        def enum(kbound: int) -> list[int]:
            top = blocks.t(kbound)
            out: list[int] = []
            k = 0
            nxt = blocks.t(1)
            for n in a.enumerate_below(top):
                while nxt <= n:
                    k += 1
                    nxt = blocks.t(k + 1)
                if not out or out[-1] != k:
                    out.append(k)
            return out

        finite = a.finite
        bound = None
        if a.finite is True and a.bound is not None:
            bound = blocks.cell_of(max(a.bound - 1, 0)) + 1
        certs = []
        c = a.cert_for(self.touch_cert_family())
        if c is not None:
            certs.append(_rekey(c, self.rule.name))
        return SetExpr(member, f"touched[{blocks.name}]({a.description})",
                       finite=finite, bound=bound, is_omega=a.is_omega,
                       certs=tuple(certs), _enumerator=enum)

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        touched = self.touched_set(a, budget)
        v = self.inner.contains(touched, budget)
        return Verdict(v.answer, v.horizon, v.certificate, v.trajectory, v.witness,
                       note=f"on touched-block set: {v.note}" if v.note else
                       "on touched-block set")


def _rekey(cert, family: str):
    from dataclasses import replace
    return replace(cert, family=family)


class DensityIdeal(IdealRep):
    """Asymptotic density zero.  Certified answers need an exact counting
    function for the initial segments; thresholds are fixed and reported."""

    name = "Density"
    NOT_IN_FLOOR = Q(1, 16)

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        cert = a.cert_for("initial_segments", CellCount)
        sample_grid = []
        j, n = 0, 1
        while n <= budget:
            if n > 1:
                cnt = cert.count(n) if cert is not None else len(a.enumerate_below(n))
                if cnt is None:
                    return _not_in(budget, cert.name, note="infinite count declared")
                sample_grid.append((n, Q(cnt, n)))
            n *= 2
        if cert is None:
            return _undet(budget, trajectory=tuple(sample_grid))
        _spot_check_cellcount_prefix(a, cert, min(budget, 4096))
        half = sample_grid[len(sample_grid) // 2:]
        dens = [d for _, d in half]
        if min(dens) >= self.NOT_IN_FLOOR:
            return _not_in(budget, cert.name,
                           trajectory=tuple(half),
                           note=f"density floor {self.NOT_IN_FLOOR} on dyadic tail grid")
        if max(dens) <= Q(16, budget):
            return _in(budget, cert.name, trajectory=tuple(half),
                       note=f"density ceiling 16/{budget} on dyadic tail grid")
        return _undet(budget, trajectory=tuple(sample_grid))


class ProductIdeal(IdealRep):
    """{empty}xFin transported along a partition: finite trace in every cell."""

    def __init__(self, partition: Partition):
        self.partition = partition
        self.name = f"Product({partition.name})"
        for k in range(4):
            if len(partition.cell_members_below(k, 1 << 12)) < 2:
                raise ContractViolation(
                    f"partition {partition.name}: cell {k} too small on probe range")

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        part = self.partition
        cert = a.cert_for(part.name, CellCount)
        if a.is_omega:
            return _not_in(budget, "omega-meets-every-cell-infinitely")
        if cert is None:
            counts = {}
            for n in a.enumerate_below(budget):
                k = part.cell(n)
                counts[k] = counts.get(k, 0) + 1
            traj = tuple(sorted((k, Q(v)) for k, v in counts.items()))[:16]
            return _undet(budget, trajectory=traj)
        probe_cells = min(budget, 64)
        declared = []
        for k in range(probe_cells):
            c = cert.count(k)
            if c is None:
                return _not_in(budget, cert.name, witness=(k,),
                               note=f"cell {k} declared infinite")
            declared.append(c)
        spot_bound = min(budget, 4096)
        for k in range(3):
            actual = sum(1 for n in part.cell_members_below(k, spot_bound)
                         if a.membership(n))
            if actual > declared[k]:
                raise CertificateError(
                    f"{cert.name}: cell {k} already holds {actual} below {spot_bound}, "
                    f"declared {declared[k]}")
        return _in(budget, cert.name, note=f"all cell counts finite (probed {probe_cells})")


class DirectSumIdeal(IdealRep):
    """I (+) J along a declared split set: A is in the sum iff the part of A
    inside the split lands in I (via the split's increasing enumeration) and
    the rest lands in J."""

    def __init__(self, left: IdealRep, right: IdealRep, split: SetExpr):
        self.left = left
        self.right = right
        self.split = split
        self.name = f"DirectSum({left.name},{right.name};{split.description})"

    def _transport(self, a: SetExpr, inside: bool, work: int) -> SetExpr:
        split = self.split
        cache: dict[int, int] = {}

        def element(m: int) -> int:
            if m in cache:
                return cache[m]
            bound = 256
            while bound <= work:
                if inside:
                    pool = split.enumerate_below(bound)
                else:
                    s = set(split.enumerate_below(bound))
                    pool = [x for x in range(bound) if x not in s]
                if len(pool) > m:
                    for j, e in enumerate(pool):
                        cache[j] = e
                    return pool[m]
                bound *= 2
            raise ContractViolation("direct-sum transport exceeded its work cap")

        return SetExpr(
            membership=lambda m: a.membership(element(m)),
            description=f"{'left' if inside else 'right'}-part({a.description})",
            finite=a.finite if a.finite is True else None,
        )

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        work = probe_range() * 4
        lv = self.left.contains(self._transport(a, True, work), budget)
        rv = self.right.contains(self._transport(a, False, work), budget)
        if lv.is_not_in or rv.is_not_in:
            bad = lv if lv.is_not_in else rv
            return _not_in(budget, bad.certificate or "component",
                           note=f"{'left' if lv.is_not_in else 'right'} component rejects")
        if lv.is_in and rv.is_in:
            return _in(budget, f"{lv.certificate}+{rv.certificate}",
                       note="both components certified")
        return _undet(budget, note="component verdicts not both certified")


class PushforwardIdeal(IdealRep):
    """Image of an ideal along a bijection f (with declared inverse)."""

    def __init__(self, inner: IdealRep, f: Callable[[int], int],
                 finv: Callable[[int], int]):
        bound = probe_range()
        for n in range(bound):
            if finv(f(n)) != n:
                raise ContractViolation(f"f_inv(f({n})) = {finv(f(n))} != {n}")
        self.inner = inner
        self.f = f
        self.finv = finv
        self.name = f"Pushforward({inner.name})"

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        f = self.f
        if a.finite is True and a.bound is not None:
            pre = finite_set(self.finv(e) for e in a.enumerate_below(a.bound))
        else:
            pre = SetExpr(lambda n: a.membership(f(n)),
                          f"preimage({a.description})",
                          finite=a.finite, is_omega=a.is_omega)
        v = self.inner.contains(pre, budget)
        return Verdict(v.answer, v.horizon, v.certificate, v.trajectory, v.witness,
                       note=f"via preimage: {v.note}" if v.note else "via preimage")


class FinPhiIdeal(IdealRep):
    """Fin(phi): sets of finite submeasure."""

    def __init__(self, phi: Submeasure):
        self.phi = phi
        self.name = f"FinPhi({phi.name})"

    def cert_family(self) -> str:
        return f"fin:{self.phi.name}"

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        fam = self.cert_family()
        bound_cert = a.cert_for(fam, ExactTailSum)
        if bound_cert is not None:
            declared = bound_cert.tail_bound(0)
            observed = submeasure_eval(self.phi, a, 0, budget)
            if observed > declared:
                raise CertificateError(
                    f"{bound_cert.name}: phi at budget {budget} is {observed} > {declared}")
            return _in(budget, bound_cert.name, trajectory=((budget, observed),))
        div = a.cert_for(fam, DivergenceWitness)
        if div is not None:
            marks = []
            for m in (Q(1), Q(10)):
                i = div.crossing(m)
                val = sum(w for atom, w in self.phi.measure_at(i) if a.membership(atom))
                if val < m:
                    raise CertificateError(f"{div.name}: member {i} gives {val} < {m}")
                marks.append(i)
            return _not_in(budget, div.name, witness=tuple(marks))
        traj = tuple((h, submeasure_eval(self.phi, a, 0, h))
                     for h in (budget // 4 or 1, budget // 2 or 1, budget))
        return _undet(budget, trajectory=traj)


class ExhPhiIdeal(IdealRep):
    """Exh(phi): sets whose tail submeasure vanishes."""

    def __init__(self, phi: Submeasure):
        self.phi = phi
        self.name = f"ExhPhi({phi.name})"

    def cert_family(self) -> str:
        return f"exh:{self.phi.name}"

    VANISH_TARGET = Q(1, 1 << 16)

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        fam = self.cert_family()
        tail_cert = a.cert_for(fam, ExactTailSum)
        if tail_cert is not None:
            marks = (budget, 4 * budget, 16 * budget)
            vals = [tail_cert.tail_bound(m) for m in marks]
            if not all(x >= y for x, y in zip(vals, vals[1:])):
                raise CertificateError(f"{tail_cert.name}: tail bounds not nonincreasing")
            if vals[-1] > self.VANISH_TARGET:
                return _undet(budget, trajectory=tuple(zip(marks, vals)),
                              note="certified tail not yet below the vanish target")
            observed = submeasure_eval(self.phi, a, marks[0], budget)
            if observed > vals[0]:
                raise CertificateError(
                    f"{tail_cert.name}: phi(A from {marks[0]}) = {observed} > {vals[0]}")
            return _in(budget, tail_cert.name, trajectory=tuple(zip(marks, vals)))
        traj = tuple((n, submeasure_eval(self.phi, a, n, budget))
                     for n in (0, budget // 4 or 1, budget // 2 or 1, budget))
        return _undet(budget, trajectory=traj)


class ShiftedIdeal(IdealRep):
    """shift(I): A is a member iff A minus {0} is B+1 for some member B of I."""

    def __init__(self, inner: IdealRep):
        self.inner = inner
        self.name = f"shift({inner.name})"

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        rule = getattr(self.inner, "rule", None)
        pred = shifted(a, -1, rule=rule)
        if a.is_omega:
            pred = omega()
        v = self.inner.contains(pred, budget)
        return Verdict(v.answer, v.horizon, v.certificate, v.trajectory, v.witness,
                       note=f"via predecessors: {v.note}" if v.note else "via predecessors")


class PullbackIdeal(IdealRep):
    """A is a member iff {n : k_{n+1} - 1 in A} is in the inner ideal."""

    def __init__(self, inner: IdealRep, kseq: BlockRule):
        prev = kseq.t(0)
        if prev != 0:
            raise ValueError("k must start at 0")
        self.inner = inner
        self.kseq = kseq
        self.name = f"pullback[{kseq.name}]({inner.name})"

    def cert_family(self) -> str:
        rule = getattr(self.inner, "rule", None)
        return f"pullback[{self.kseq.name}]:{rule.name if rule else self.inner.name}"

    def defining_set(self, a: SetExpr) -> SetExpr:
        k = self.kseq.t

        def g(n: int) -> int:
            return k(n + 1) - 1

        structural = _pullback_structural(a, self.kseq)
        if structural is not None:
            base = structural
        else:
            base = SetExpr(
                membership=lambda n: a.membership(g(n)),
                description=f"pullback[{self.kseq.name}]({a.description})",
                # k(n+1)-1 >= n, so the preimage of a bounded set is bounded
                finite=a.finite,
                bound=a.bound,
                is_omega=a.is_omega,
            )
        c = a.cert_for(self.cert_family())
        if c is not None:
            rule = getattr(self.inner, "rule", None)
            if rule is not None:
                base = base.with_certs(_rekey(c, rule.name))
        return base

    def _contains_core(self, a: SetExpr, budget: int) -> Verdict:
        v = self.inner.contains(self.defining_set(a), budget)
        return Verdict(v.answer, v.horizon, v.certificate, v.trajectory, v.witness,
                       note=f"on defining set: {v.note}" if v.note else "on defining set")


def _pullback_structural(a: SetExpr, kseq: BlockRule) -> Optional[SetExpr]:
    """Closed form for {n : k(n+1)-1 in A} when k is affine and A is a stride."""
    affine = kseq.affine
    if affine is None or a.stride_params is None:
        return None
    c, d = affine
    sa, sb = a.stride_params
    e = c + d - 1  # g(n) = c*n + e
    import math
    gcd = math.gcd(c, sb)
    if (sa - e) % gcd != 0:
        hits = [n for n in range(max(sb, 4) * 2) if a.membership(c * n + e)]
        return finite_set(hits)
    m = sb // gcd
    inv = pow(c // gcd, -1, m) if m > 1 else 0
    r = (((sa - e) // gcd) * inv) % m if m > 1 else 0
    n_min = 0
    while c * n_min + e < sa:
        n_min += 1
    start = n_min + ((r - n_min) % m) if m > 0 else n_min
    return stride(start, max(m, 1))


# --------------------------------------------------------------------------
# the module operations

def ideal_contains(ideal: IdealRep, a: SetExpr, budget: int) -> Verdict:
    return ideal.contains(a, budget)


def shift_ideal(ideal: IdealRep) -> IdealRep:
    return ShiftedIdeal(ideal)


def block_pullback(ideal: IdealRep, kseq: BlockRule) -> IdealRep:
    return PullbackIdeal(ideal, kseq)


# --------------------------------------------------------------------------
# the summable-vs-block falsifier

@dataclass(frozen=True)
class FalsifierReport:
    """Evidence that no weight sequence realises the pow2-block harmonic
    ideal as a plain summable ideal, at the probed horizon.

    Two candidate witnesses from the contradiction argument are reported:
    the block-minima selection set (one cheapest point per block), and the
    union of the blocks indexed by a sparse Z'.  Whichever side the weights
    favour, the other exposes the mismatch.
    """

    horizon: int
    minima: tuple[tuple[int, int, Fraction], ...]   # (block k, argmin n_k, d_k)
    z: tuple[int, ...]                               # {k : 2^k * d_k >= 1}
    z_sparse: tuple[int, ...]
    z_sparse_weight: Fraction                        # sum 1/(k+1) over z_sparse
    selection_sums: tuple[tuple[int, Fraction], ...]  # running sums over {n_k}
    union_sums: tuple[tuple[int, Fraction], ...]      # running sums over the union
    selection_touches_every_block: bool

    @property
    def selection_total(self) -> Fraction:
        return self.selection_sums[-1][1] if self.selection_sums else Q(0)

    @property
    def union_total(self) -> Fraction:
        return self.union_sums[-1][1] if self.union_sums else Q(0)


def summable_falsifier(rule: WeightRule, blocks: Optional[BlockRule] = None,
                       horizon: int = 12) -> FalsifierReport:
    """Run the two-witness discrepancy computation for candidate weights."""
    from .weights import blocks_pow2
    blocks = blocks or blocks_pow2()
    if horizon < 1:
        raise ValueError("horizon must be >= 1")

    cellwise = rule.cellwise is not None and rule.cellwise[0] in ("any", blocks.name)
    minima = []
    for k in range(horizon):
        blk = blocks.block(k)
        if cellwise:
            minima.append((k, blk.start, rule.cellwise[1](k)))
            continue
        if len(blk) > (1 << 18):
            raise ValueError("block too large to scan; lower the horizon")
        best_n, best = None, None
        for n in blk:
            r = rule.at(n)
            if r <= 0:
                raise ValueError(f"weights must be positive; r_{n} = {r}")
            if best is None or r < best:
                best_n, best = n, r
        minima.append((k, best_n, best))

    z = tuple(k for k, _, d in minima if (2**k) * d >= 1)
    # sparse pick inside Z: indices of the form 2^j - 1, harmonically small
    z_sparse = tuple(k for k in z if (k + 1) & k == 0)
    z_weight = sum((Q(1, k + 1) for k in z_sparse), Q(0))

    sel_sums = []
    acc = Q(0)
    for k, n_k, d_k in minima:
        acc += d_k
        sel_sums.append((n_k, acc))

    union_sums = []
    acc = Q(0)
    count = 0
    for k in z_sparse:
        blk = blocks.block(k)
        if cellwise:
            acc += len(blk) * rule.cellwise[1](k)
        else:
            for n in blk:
                acc += rule.at(n)
        count += len(blk)
        union_sums.append((count, acc))

    return FalsifierReport(
        horizon=horizon,
        minima=tuple(minima),
        z=z,
        z_sparse=z_sparse,
        z_sparse_weight=z_weight,
        selection_sums=tuple(sel_sums),
        union_sums=tuple(union_sums),
        selection_touches_every_block=True,
    )
