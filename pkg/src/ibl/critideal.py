"""Critical ideals of simple systems: generator sets, closed forms,
membership verdicts, and the trichotomy classification.

Threshold comparisons against radical-valued norms are done on exact powers
(p-th powers for lp, squares for the James norm), so every generator-set
decision is a rational comparison.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .bases import (BiorthSystem, SimpleWitness, base_functional,
                    biorthogonality_check, witness_norm_power)
from .errors import CertificateError, ContractViolation, UnsupportedInput
from .ideals import (Answer, BlockIdeal, ExhPhiIdeal, FinIdeal, IdealRep,
                     Verdict, _in, _not_in, _undet)
from .seqspace import (Functional, James, Lp, NormTag, Phi, SeqVec, SupC0,
                       sup_norm)
from .sets import (ExactTailSum, SetExpr, difference, finite_set, omega,
                   union)
from .weights import BlockRule, WeightRule

Q = Fraction


# --------------------------------------------------------------------------
# generator sets (the threshold sets A_x)

@dataclass(frozen=True)
class GeneratorSet:
    system: str
    x: SeqVec
    space: NormTag
    horizon: int
    elements: tuple[int, ...]

    def as_set(self) -> SetExpr:
        return finite_set(self.elements)


def _threshold_holds(coeff: Fraction, norm_key: Fraction, space: NormTag) -> bool:
    """|coeff| >= 1 / ||b|| with the norm given by its exact comparison key."""
    if coeff == 0:
        return False
    if isinstance(space, Lp):
        p = int(space.p)
        return abs(coeff) ** p * norm_key >= 1
    if isinstance(space, James):
        return coeff * coeff * norm_key >= 1
    return abs(coeff) * norm_key >= 1


def generator_set(system: BiorthSystem, w: SimpleWitness, x: SeqVec,
                  space: NormTag, horizon: int) -> GeneratorSet:
    """A_x = {n in D : |u*_{h(n)}(x)| >= 1/||b_{h(n)}||}, exactly, below the
    horizon; u* is the base system's functional (the unit one by default)."""
    elems = []
    for n in w.d.enumerate_below(horizon):
        k = w.h(n)
        coeff = base_functional(system, k)(x)
        if coeff == 0:
            continue
        key = witness_norm_power(w, k, space)
        if _threshold_holds(coeff, key, space):
            elems.append(n)
    return GeneratorSet(system.name, x, space, horizon, tuple(elems))


# --------------------------------------------------------------------------
# closed forms

@dataclass(frozen=True)
class SummableBlockForm:
    """CR as a block-summable ideal: cell weights ||b||^-p on witness fibres
    and 1 on the off-D singletons, blocks following the fibre partition."""

    ideal: BlockIdeal
    fibre_partition: "_FibrePartition"
    fibre_is_witness: Callable[[int], bool]
    provenance: str

    def weight_at_index(self, n: int) -> Fraction:
        """The weight of the cell containing index n."""
        return self.ideal.rule.at(self.fibre_partition.cell_of(n))

    def touch_family(self) -> str:
        """The certificate family to attach to query sets: certificates
        speak about the touched-block set under the closed form's weights."""
        return self.ideal.touch_cert_family()

    def weight_family(self) -> str:
        return self.ideal.rule.name


@dataclass(frozen=True)
class LimitForm:
    """CR via vanishing thresholds: A \\ D finite and 1/||b_{h(n)}|| -> 0
    along A.  threshold_key(n) is the exact comparison key of ||b_{h(n)}||;
    key_floor, when set, is a proven positive lower bound on 1/||b_{h(n)}||
    over all of D (making every infinite subset of D a non-member)."""

    d: SetExpr
    h: Callable[[int], int]
    threshold_key: Callable[[int], Fraction]
    space: NormTag
    key_floor: Optional[Fraction] = None
    provenance: str = ""


@dataclass(frozen=True)
class ExhForm:
    ideal: ExhPhiIdeal
    provenance: str


CRClosedForm = Union[SummableBlockForm, LimitForm, ExhForm]


class _FibrePartition:
    """Consecutive intervals of omega: h-fibres inside D, singletons off D."""

    def __init__(self, w: SimpleWitness, probe: int):
        self.w = w
        self.bounds = [0]
        self.witness_fibre: list[bool] = []
        self.images: list[Optional[int]] = []
        self._extend_to(probe)

    def _extend_to(self, top: int) -> None:
        while self.bounds[-1] < top:
            start = self.bounds[-1]
            if self.w.d.membership(start):
                k = self.w.h(start)
                self.bounds.append(self._fibre_end(start, k))
                self.witness_fibre.append(True)
                self.images.append(k)
            else:
                self.bounds.append(start + 1)
                self.witness_fibre.append(False)
                self.images.append(None)

    def _fibre_end(self, start: int, k: int) -> int:
        """First position past the fibre of `start`; exponential search plus
        bisection, sound because fibres are intervals (interval-to-one h)."""

        def inside(n: int) -> bool:
            return self.w.d.membership(n) and self.w.h(n) == k

        off = 1
        while inside(start + off):
            off *= 2
        lo, hi = off // 2, off
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if inside(start + mid):
                lo = mid
            else:
                hi = mid
        return start + hi

    def cell_of(self, n: int) -> int:
        self._extend_to(n + 1)
        return bisect.bisect_right(self.bounds, n) - 1

    def boundary(self, k: int) -> int:
        while len(self.bounds) <= k:
            self._extend_to(self.bounds[-1] + 1)
        return self.bounds[k]


def cr_closed_form(system: BiorthSystem, w: SimpleWitness,
                   space: NormTag) -> CRClosedForm:
    """The closed form of the critical ideal, where the base system is
    unconditional: block-summable for lp, threshold-limit for c0, Exh for a
    submeasure norm.  Refused for the James space (use classify instead) and
    for systems over a non-canonical base."""
    if isinstance(space, James):
        raise UnsupportedInput(
            "the unit system is not unconditional in the James space; "
            "use classify / the generator-set machinery instead")
    if system.base is not None:
        raise UnsupportedInput(
            "closed form requires the canonical unconditional base system")

    if isinstance(space, Lp):
        if space.p.denominator != 1:
            raise UnsupportedInput("exact closed form needs integer p")
        p = int(space.p)
        fib = _FibrePartition(w, 64)
        norm_cache: dict[int, Fraction] = {}

        def weight_of_cell(k: int) -> Fraction:
            if k not in norm_cache:
                fib.boundary(k + 1)
                if fib.witness_fibre[k]:
                    key = witness_norm_power(w, fib.images[k], space)
                    norm_cache[k] = 1 / key
                else:
                    norm_cache[k] = Q(1)
            return norm_cache[k]

        def fibre_is_witness(k: int) -> bool:
            fib.boundary(k + 1)
            return fib.witness_fibre[k]

        blocks = BlockRule(f"fibres[{system.name}]", fib.boundary)
        # the block ideal weighs touched *cells*, so the rule is cell-indexed
        rule = WeightRule(
            name=f"cr[{system.name};p={p}]",
            at=weight_of_cell,
            divergent_total=True,
        )
        return SummableBlockForm(
            ideal=BlockIdeal(rule, blocks),
            fibre_partition=fib,
            fibre_is_witness=fibre_is_witness,
            provenance=f"{system.name} over lp(p={p})",
        )

    if isinstance(space, SupC0):
        floor = _threshold_floor(system, w)
        return LimitForm(
            d=w.d, h=w.h,
            threshold_key=lambda n: witness_norm_power(w, w.h(n), space),
            space=space,
            key_floor=floor,
            provenance=f"{system.name} over c0",
        )

    if isinstance(space, Phi):
        probe = 24
        for n in range(probe):
            key = witness_norm_power(w, w.h(n), space)
            if key != n + 1:
                raise UnsupportedInput(
                    "the Exh closed form is materialised only for systems with "
                    f"phi-norm ladder ||b_{{h(n)}}|| = n+1; at n={n} got {key}")
        return ExhForm(ideal=ExhPhiIdeal(space.phi),
                       provenance=f"{system.name} over phi-space")

    raise TypeError("unknown space tag")


def _threshold_floor(system: BiorthSystem, w: SimpleWitness) -> Optional[Fraction]:
    """A positive floor for 1/||b|| over D, when the construction provides
    one: constant-ratio geometric z (alpha constant) and the reciprocal z
    (alpha below 1) both give a floor of 1."""
    if system.name != "avoid":
        return None
    zname = system.params.get("z", "")
    if zname.startswith("geometric"):
        q = Q(zname[len("geometric("):-1])
        return 1 / q
    if zname == "reciprocal_succ":
        return Q(1)
    return None


def cr_membership(system: BiorthSystem, w: SimpleWitness, space: NormTag,
                  a: SetExpr, budget: int) -> Verdict:
    """Delegate membership to the closed form; the evidence records a sample
    of the image set h[A & D]."""
    form = cr_closed_form(system, w, space)
    image_sample = tuple(w.h(n) for n in a.enumerate_below(min(budget, 64))
                         if w.d.membership(n))[:16]

    def with_image(v: Verdict) -> Verdict:
        tag = f"h[A&D] sample {list(image_sample)}"
        return Verdict(v.answer, v.horizon, v.certificate, v.trajectory,
                       v.witness, note=f"{v.note}; {tag}" if v.note else tag)

    if isinstance(form, (SummableBlockForm, ExhForm)):
        return with_image(form.ideal.contains(a, budget))

    # the c0 limit form
    off_d = difference(a, form.d)
    off_verdict = FinIdeal().contains(off_d, budget)
    if off_verdict.is_not_in:
        return with_image(_not_in(budget, off_verdict.certificate or "off-D-infinite",
                                  note="A \\ D is not finite"))
    if a.finite is True:
        return with_image(_in(budget, "finite-literal"))
    if form.key_floor is not None and a.finite is False and off_verdict.is_in:
        return with_image(_not_in(
            budget, f"threshold-floor({form.key_floor})",
            note="thresholds bounded below; no infinite set converges"))
    keys = tuple(form.threshold_key(n) for n in a.enumerate_below(min(budget, 64))
                 if form.d.membership(n))[:16]
    return with_image(_undet(budget, trajectory=tuple(enumerate(keys)),
                             note="no certificate for the threshold limit"))


def lem2_series_coordinate(system: BiorthSystem, w: SimpleWitness,
                           coord: int, upto: int,
                           space: NormTag = SupC0()) -> list[tuple[int, Fraction]]:
    """Partial sums, at one coordinate, of the closed-form series
    sum over n in D of u_{h(n)} / ||b_{h(n)}||.  A diagnostic: over a
    non-unconditional base the coordinate sums can diverge even when the
    critical ideal is everything."""
    base = system.base
    acc = Q(0)
    out = []
    for n in w.d.enumerate_below(upto):
        k = w.h(n)
        vec = base.vec_at(k) if base is not None else SeqVec.basis(k)
        key = witness_norm_power(w, k, space)
        if isinstance(space, SupC0):
            norm = key
        else:
            raise UnsupportedInput("diagnostic materialised for sup norms")
        acc += vec.coeff(coord) / norm
        out.append((n, acc))
    return out


# --------------------------------------------------------------------------
# the c0 / James trichotomy

@dataclass(frozen=True)
class BucketData:
    index: int
    count: int
    first: int
    last: int
    judged_infinite: bool
    mature: bool


@dataclass(frozen=True)
class TrichotomyClass:
    kind: str                      # "fin" | "fin_plus" | "product" | "trivial"
    horizon: int
    window: int
    buckets: tuple[BucketData, ...]
    s_indices: tuple[int, ...]     # mature buckets judged infinite
    t_sample: tuple[int, ...]      # union of mature finite buckets (probe)
    degenerate_warning: bool = False

    @property
    def t_set(self) -> SetExpr:
        return finite_set(self.t_sample)


def _norm_bucket(key: Fraction, space: NormTag) -> int:
    """Bands of the witness norm: 0 below 1, else k with k <= ||b|| < k+1.
    James keys are squares, so the band is found via integer square root."""
    if isinstance(space, James):
        if key < 1:
            return 0
        k = math.isqrt(key.numerator // key.denominator)
        while (k + 1) * (k + 1) <= key:
            k += 1
        while k * k > key:
            k -= 1
        return max(k, 0)
    if key < 1:
        return 0
    return key.numerator // key.denominator


PRODUCT_MIN_BUCKETS = 4
T_MIN_ELEMENTS = 8


def classify_c0(w: SimpleWitness, space: NormTag, horizon: int,
                window: Optional[int] = None) -> TrichotomyClass:
    """Sort witness norms into unit bands and judge the band structure:
    finitely many populated bands of bounded norm -> fin; one bounded band
    plus escaping norms -> fin_plus; ever more infinite bands -> product.

    Finiteness of a band is judged by a stabilisation window (no new element
    in the last `window` probes); bands born after horizon/2 are too young
    to judge and are excluded from both sides.  The verdict is labelled with
    its horizon and window.
    """
    if not isinstance(space, (SupC0, James)):
        raise UnsupportedInput("classification applies to c0 and the James space")
    window = window if window is not None else horizon // 8
    if window < 1 or horizon < 4 * window:
        raise ValueError("need horizon >= 4 * window")

    members: dict[int, list[int]] = {}
    for n in w.d.enumerate_below(horizon):
        key = witness_norm_power(w, w.h(n), space)
        members.setdefault(_norm_bucket(key, space), []).append(n)

    buckets = []
    s_indices = []
    t_elems: list[int] = []
    for k in sorted(members):
        pts = members[k]
        mature = pts[0] < horizon // 2
        alive = pts[-1] >= horizon - window
        buckets.append(BucketData(k, len(pts), pts[0], pts[-1], alive, mature))
        if mature and alive:
            s_indices.append(k)
        elif mature:
            t_elems.extend(pts)

    covered = set(t_elems)
    non_t = [n for n in range(horizon) if n not in covered]
    degenerate = bool(non_t) and max(non_t) < horizon - window

    if degenerate:
        kind = "trivial"
    elif len(s_indices) >= PRODUCT_MIN_BUCKETS:
        kind = "product"
    elif len(t_elems) >= T_MIN_ELEMENTS:
        kind = "fin_plus"
    else:
        kind = "fin"

    return TrichotomyClass(
        kind=kind,
        horizon=horizon,
        window=window,
        buckets=tuple(buckets),
        s_indices=tuple(s_indices),
        t_sample=tuple(sorted(t_elems)),
        degenerate_warning=degenerate,
    )


# --------------------------------------------------------------------------
# the James-space witness vector

def _rational_upper_sqrt(q: Fraction) -> Fraction:
    """A rational u with u*u >= q, within 2^-20 above the true root."""
    if q <= 0:
        return Q(0)
    scale = 1 << 20
    num = q.numerator * scale * scale
    den = q.denominator
    root = math.isqrt(num // den)
    while root * root * den < num:
        root += 1
    return Q(root, scale)


def james_witness_x(w: SimpleWitness, a: SetExpr, horizon: int,
                    vanish_cert: Optional[Callable[[int], int]],
                    space: NormTag = James()) -> SeqVec:
    """The staircase vector whose generator set swallows A, built from the
    band decomposition A_k = {n in A : 1/||b_{h(n)}|| > 1/(k+1)}.

    Requires the declared certificate k -> n_0 that thresholds along A sit
    at or below 1/(k+1) past n_0; spot-checked on the probe range.
    """
    if vanish_cert is None:
        raise UnsupportedInput(
            "a vanishing-threshold certificate along A is required")
    elems = a.enumerate_below(horizon)
    if not elems:
        return SeqVec.zero()

    def threshold_exceeds(n: int, k: int) -> bool:
        # 1/||b_{h(n)}|| > 1/(k+1), via exact comparison keys
        key = witness_norm_power(w, w.h(n), space)
        if isinstance(space, James):
            return (k + 1) * (k + 1) > key
        return (k + 1) > key

    # spot-check the certificate on a few bands
    for k in (0, 1, 3):
        n0 = vanish_cert(k)
        for n in elems:
            if n >= n0 and threshold_exceeds(n, k):
                raise CertificateError(
                    f"vanish certificate fails: threshold at {n} exceeds 1/{k + 1}")

    bands: dict[int, list[int]] = {}
    for n in elems:
        k = 0
        while not threshold_exceeds(n, k):
            k += 1
            if k > 4 * horizon:
                raise ContractViolation("threshold vanished entirely; b must be nonzero")
        bands.setdefault(k, []).append(n)  # least k with threshold > 1/(k+1)

    ks = sorted(bands)
    k_min = ks[0]
    max_h = {k: max(w.h(n) for n in bands[k]) for k in ks}
    running = []
    top = 0
    for k in ks:
        top = max(top, max_h[k])
        running.append((k, top))

    entries: dict[int, Fraction] = {}
    prev_top = -1
    for k, top in running:
        # band k collects thresholds in (1/(k+1), 1/k], so the level 1/k
        # dominates them; the first band needs the actual maximum
        level = Q(1, k) if k > k_min else _first_band_level(w, bands[k_min], space)
        for i in range(prev_top + 1, min(top, horizon - 1) + 1):
            entries[i] = level
        prev_top = max(prev_top, min(top, horizon - 1))
    return SeqVec.make(entries.items())


def _first_band_level(w: SimpleWitness, band: list[int], space: NormTag) -> Fraction:
    """A rational value at least every threshold 1/||b_{h(n)}|| in the band."""
    worst = Q(0)
    for n in band:
        key = witness_norm_power(w, w.h(n), space)
        if isinstance(space, James):
            worst = max(worst, _rational_upper_sqrt(1 / key))
        else:
            worst = max(worst, 1 / key)
    return worst


# --------------------------------------------------------------------------
# pseudo-unions

def pseudo_union(system: BiorthSystem, w: SimpleWitness, space: NormTag,
                 sets: Sequence[SetExpr], budget: int = 256) -> SetExpr:
    """A single set almost containing each certified member: drop from each
    A_k its head below m_k, where the k-th certified tail (in the closed
    form's weights) falls below 2^-k in norm, and take the union.

    Each input must carry a value-indexed ExactTailSum certificate for the
    closed form's weight family.  The result carries the composed
    certificate and is itself certified a member.
    """
    if not isinstance(space, Lp):
        raise UnsupportedInput("pseudo-union is materialised for lp closed forms")
    form = cr_closed_form(system, w, space)
    family = form.ideal.rule.name
    p = int(space.p)

    if not sets:
        return finite_set([])

    cuts: list[int] = []
    certs: list[ExactTailSum] = []
    for k, a in enumerate(sets):
        cert = a.cert_for(family, ExactTailSum)
        if cert is None or cert.indexing != "value":
            raise UnsupportedInput(
                f"input {k} lacks a value-indexed tail certificate for {family}")
        target = Q(1, 2 ** (k * p))  # ||.||_p < 2^-k iff power sum < 2^-kp
        m = 1
        while cert.tail_bound(m) >= target:
            m *= 2
            if m > (1 << 24):
                raise CertificateError("certified tail never reaches the target")
        cuts.append(max(m, cuts[-1] if cuts else 0))  # nondecreasing cuts
        certs.append(cert)

    parts = sets

    def member(n: int) -> bool:
        for a_k, m_k in zip(parts, cuts):
            if m_k > n:
                break
            if a_k.membership(n):
                return True
        return False

    def composed_tail(m: int) -> Fraction:
        total = Q(0)
        for k, (cert, m_k) in enumerate(zip(certs, cuts)):
            total += cert.tail_bound(max(m, m_k))
        return total

    out = SetExpr(
        membership=member,
        description="pseudo-union(" + ",".join(a.description for a in parts) + ")",
        finite=False if any(a.finite is False for a in parts) else None,
        certs=(ExactTailSum(family, composed_tail, indexing="value"),
               ExactTailSum(form.touch_family(), composed_tail, indexing="value")),
    )

    for k, (a_k, m_k) in enumerate(zip(parts, cuts)):
        leaked = [n for n in a_k.enumerate_below(budget)
                  if w.d.membership(n) and n >= m_k and not out.membership(n)]
        if leaked:
            raise ContractViolation(f"input {k} lost elements {leaked[:4]}")
    verdict = form.ideal.contains(out, budget)
    if not verdict.is_in:
        raise ContractViolation("pseudo-union failed its own membership check")
    return out


# --------------------------------------------------------------------------
# FDD blocks and the shifted-space check

def fdd_blocks_from_nontall(a: SetExpr, probe: int = 256) -> BlockRule:
    """Block boundaries from the increasing enumeration of a set on which
    the ideal restricts to Fin: [0, n_0], (n_0, n_1], ..."""
    elems = a.enumerate_below(probe)
    if len(elems) < 4:
        raise ValueError("need an infinite (probed: at least 4 elements) set")
    bounds = [0] + [n + 1 for n in elems]
    if bounds[1] == 0:
        bounds = bounds[1:]  # n_0 = 0 collapses the first block boundary
    return BlockRule(f"fdd[{a.description}]",
                     _continue_boundaries(bounds))


def _continue_boundaries(bounds: list[int]):
    step = bounds[-1] - bounds[-2] if len(bounds) > 1 else 1

    def t(k: int) -> int:
        if k < len(bounds):
            return bounds[k]
        return bounds[-1] + step * (k - len(bounds) + 1)

    return t


@dataclass(frozen=True)
class CjReport:
    ideal: str
    horizon: int
    declared_checks: tuple[tuple[str, bool], ...]   # A vs A_x equality probes
    support_checks: tuple[tuple[str, bool], ...]    # random x: A_x inside the declared set
    passed: bool


def cj_critical_check(ideal: IdealRep, horizon: int,
                      declared_members: Sequence[SetExpr],
                      random_probes: int = 20, seed: int = 7) -> CjReport:
    """Both inclusions of the shifted-space criticality argument, on probes.

    The ambient space is the sup-normed sequence space carrying only vectors
    supported on a successor-shifted member of the ideal; the witness ladder
    has ||b_{n+1}|| = n+1 exactly, so the threshold at n is 1/(n+1).

    Forward: every declared member A, via x with x_{n+1} = 1/(n+1) on A,
    satisfies A_x = A below the horizon.  Backward: for random x supported
    inside a shifted declared member, A_x stays inside that member.
    """
    from .bases import build_any_sequence
    from .prng import SplitMix64
    from .weights import blocks_unit

    system, w = build_any_sequence(blocks_unit(), lambda k: Q(k + 1), SupC0())

    declared = []
    for a in declared_members:
        elems = [n for n in a.enumerate_below(horizon - 1)]
        x = SeqVec.make((n + 1, Q(1, n + 1)) for n in elems)
        gen = generator_set(system, w, x, SupC0(), horizon - 1)
        declared.append((a.description, list(gen.elements) == elems))

    rng = SplitMix64(seed)
    support_checks = []
    for t in range(random_probes):
        base = declared_members[rng.below(len(declared_members))]
        pool = base.enumerate_below(horizon - 1)
        if not pool:
            support_checks.append((f"probe{t}", True))
            continue
        size = rng.between(1, min(12, len(pool)))
        chosen = sorted(rng.choice(pool) for _ in range(size))
        x = SeqVec.make((n + 1, Q(rng.between(1, 8), rng.between(1, 5)))
                        for n in set(chosen))
        gen = generator_set(system, w, x, SupC0(), horizon - 1)
        ok = all(base.membership(n) for n in gen.elements)
        support_checks.append((f"probe{t}[{base.description}]", ok))

    passed = all(ok for _, ok in declared) and all(ok for _, ok in support_checks)
    return CjReport(ideal.name, horizon, tuple(declared), tuple(support_checks), passed)
