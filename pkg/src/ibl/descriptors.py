"""JSON descriptors for sets, ideals, vectors, spaces, and constructions.

Rationals cross the wire as "num/den" strings so nothing ever touches a
float.  Certificates are restricted to the closed forms the registry can
reconstruct from data: geometric and exact-tail bounds, stride divergence
witnesses, and stride/geometric counting functions.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .bases import (BiorthSystem, IntervalFamily, ProductZeroCert,
                    SimpleWitness, build_any_sequence, build_avoid,
                    build_double_partial_sums, build_known_example,
                    build_partition_basis, build_phi_basis,
                    build_thm_distinguishing, build_v_basis,
                    reconstruct_z_from_alpha, z_geometric, z_reciprocal)
from .errors import UnsupportedInput
from .ideals import (BlockIdeal, DensityIdeal, FinIdeal, FinPlusIdeal,
                     IdealRep, ProductIdeal, SummableIdeal,
                     stride_divergence_witness)
from .seqspace import (EventuallyZero, GeometricTail as VecGeometricTail,
                       James, LazyVec, Lp, MonotoneVanishing, NormTag, Phi,
                       SeqVec, SupC0, Vector)
from .sets import (CellCount, ExactTailSum, GeometricTail, SetExpr,
                   finite_set, geometric_set, intersect, omega, shifted,
                   stride, union)
from .submeasures import Submeasure, density_family, finite_family
from .weights import (WeightRule, blocks_by_name, partition_by_name,
                      per_cell, weight_rule_by_name)

Q = Fraction


def fmt_q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_q(s: Any) -> Fraction:
    if isinstance(s, int):
        return Q(s)
    if isinstance(s, str):
        return Q(s)
    raise ValueError(f"expected a rational string, got {s!r}")


# --------------------------------------------------------------------------
# weight rules

def parse_weight_rule(spec: Any) -> WeightRule:
    if isinstance(spec, str):
        return weight_rule_by_name(spec)
    rule = spec["rule"]
    if rule == "per_cell":
        blocks = blocks_by_name(spec["t"])
        inner = weight_rule_by_name(spec["cell_rule"])
        return per_cell(blocks, inner.at,
                        name=f"per_cell[{spec['t']}]:{inner.name}",
                        divergent_total=spec.get("divergent_total"))
    if rule == "geometric":
        return weight_rule_by_name(f"geometric:{spec['q']}")
    if rule == "constant":
        return weight_rule_by_name(f"constant:{spec['c']}")
    if rule == "reciprocal_succ":
        return weight_rule_by_name("reciprocal_succ")
    raise ValueError(f"unknown weight rule {spec!r}")


# --------------------------------------------------------------------------
# tail certificates (the JSON-expressible subset)

def parse_cert(spec: dict) -> object:
    kind = spec["kind"]
    if kind == "geometric_tail":
        return GeometricTail(spec["family"], parse_q(spec["ratio"]),
                             parse_q(spec["bound"]), spec.get("indexing", "rank"))
    if kind == "divergence":
        if spec.get("form") != "harmonic_stride":
            raise UnsupportedInput("only stride witnesses for the harmonic family "
                                   "are expressible in JSON")
        base = stride_divergence_witness(spec["a"], spec["b"])
        fam = spec.get("family", base.family)
        from dataclasses import replace
        return replace(base, family=fam)
    if kind == "cellcount":
        form = spec.get("form")
        if form == "stride":
            a, b = spec["a"], spec["b"]
            return CellCount(spec.get("family", "initial_segments"),
                             lambda n: max(0, (n - a + b - 1) // b) if n > a else 0)
        if form == "geometric":
            base = spec["base"]

            def count(n: int, base=base) -> int:
                c, v = 0, 1
                while v < n:
                    c += 1
                    v *= base
                return c

            return CellCount(spec.get("family", "initial_segments"), count)
        raise UnsupportedInput("cellcount forms: stride, geometric")
    raise ValueError(f"unknown certificate kind {kind!r}")


# --------------------------------------------------------------------------
# sets

def parse_set(spec: dict) -> SetExpr:
    kind = spec["kind"]
    if kind == "finite":
        out = finite_set(spec["elems"])
    elif kind == "stride":
        out = stride(spec["a"], spec["b"])
    elif kind == "geometric":
        out = geometric_set(spec["base"], spec.get("from_exp", 0))
    elif kind == "omega":
        out = omega()
    elif kind == "union":
        parts = [parse_set(p) for p in spec["parts"]]
        out = parts[0]
        for p in parts[1:]:
            out = union(out, p)
    elif kind == "intersect":
        parts = [parse_set(p) for p in spec["parts"]]
        out = parts[0]
        for p in parts[1:]:
            out = intersect(out, p)
    elif kind == "shift":
        rule = parse_weight_rule(spec["transport"]) if "transport" in spec else None
        out = shifted(parse_set(spec["of"]), spec["by"], rule=rule)
    else:
        raise ValueError(f"unknown set kind {kind!r}")
    certs = spec.get("tail_cert")
    if certs is not None:
        if isinstance(certs, dict):
            certs = [certs]
        out = out.with_certs(*(parse_cert(c) for c in certs))
    return out


# --------------------------------------------------------------------------
# ideals

def parse_ideal(spec: dict) -> IdealRep:
    kind = spec["kind"]
    if kind == "fin":
        return FinIdeal()
    if kind == "finplus":
        return FinPlusIdeal(parse_set(spec["set"]))
    if kind == "summable":
        return SummableIdeal(parse_weight_rule(spec["weights"]))
    if kind == "block":
        return BlockIdeal(parse_weight_rule(spec["weights"]),
                          blocks_by_name(spec["t"]))
    if kind == "density":
        return DensityIdeal()
    if kind == "product":
        return ProductIdeal(partition_by_name(spec["partition"]))
    raise ValueError(f"unknown ideal kind {kind!r}")


# --------------------------------------------------------------------------
# submeasures and spaces

def parse_submeasure(spec: Any) -> Submeasure:
    if spec == "density":
        return density_family()
    if isinstance(spec, dict) and spec.get("family") == "explicit":
        measures = [[(a, parse_q(w)) for a, w in mu] for mu in spec["measures"]]
        return finite_family(measures, name=spec.get("name", "explicit"))
    raise ValueError(f"unknown submeasure {spec!r}")


def parse_space(spec: str) -> NormTag:
    if spec == "c0":
        return SupC0()
    if spec == "james":
        return James()
    if spec.startswith("lp:"):
        return Lp(parse_q(spec[3:]))
    if spec.startswith("phi:"):
        _, fam, budget = spec.split(":")
        return Phi(parse_submeasure(fam), int(budget))
    raise ValueError(f"unknown space {spec!r}")


def space_label(space: NormTag) -> str:
    if isinstance(space, SupC0):
        return "c0"
    if isinstance(space, James):
        return "james"
    if isinstance(space, Lp):
        return f"lp:{space.p}" if space.p.denominator != 1 else f"lp:{int(space.p)}"
    if isinstance(space, Phi):
        return f"phi:{space.phi.name}:{space.horizon}"
    raise TypeError


# --------------------------------------------------------------------------
# vectors

def parse_vector(spec: dict) -> Vector:
    if "entries" in spec:
        return SeqVec.make((int(i), parse_q(v)) for i, v in spec["entries"])
    rule_spec = spec["rule"]
    tail_spec = spec["tail"]
    if rule_spec["name"] != "z_times_indicator":
        raise ValueError("lazy vector rules: z_times_indicator")
    zname = rule_spec["z"]
    z = z_geometric(Q(zname[len("geometric:"):])) if zname.startswith("geometric:") \
        else z_reciprocal()
    start = int(rule_spec["from"])
    tail_kind = tail_spec["kind"]
    if tail_kind == "geometric":
        tail = VecGeometricTail(int(tail_spec["start"]), parse_q(tail_spec["ratio"]),
                                parse_q(tail_spec["coeff"]))
    elif tail_kind == "monotone":
        tail = MonotoneVanishing(int(tail_spec["start"]))
    elif tail_kind == "eventually_zero":
        tail = EventuallyZero(int(tail_spec["start"]))
    else:
        raise ValueError(f"unknown tail kind {tail_kind!r}")
    return LazyVec(rule=lambda m: z.at(m) if m >= start else Q(0), tail=tail,
                   description=f"{zname} from {start}")


def vector_to_json(x: Vector, horizon: int = 64) -> dict:
    if isinstance(x, LazyVec):
        x = x.truncate(horizon)
    return {"entries": [[i, fmt_q(v)] for i, v in x.entries]}


# --------------------------------------------------------------------------
# constructions

def parse_construction(spec: dict) -> tuple[BiorthSystem, SimpleWitness]:
    name = spec["construction"]
    if name == "known_example":
        return build_known_example()
    if name == "partition":
        return build_partition_basis(partition_by_name(spec.get("partition",
                                                                "dyadic_ruler")))
    if name == "thm_distinguishing":
        ivs = spec["intervals"]
        if isinstance(ivs, str) and ivs.startswith("arithmetic:"):
            _, s, wdt, off = ivs.split(":")
            fam = IntervalFamily.arithmetic(int(s), int(wdt), int(off))
        else:
            pairs = [tuple(int(x) for x in p) for p in ivs]
            # continue an explicit list by repeating its final shape and gap
            if len(pairs) >= 2:
                step = pairs[-1][0] - pairs[-2][0]
            else:
                step = pairs[-1][1] - pairs[-1][0] + 2
            last_lo, last_hi = pairs[-1]

            def at(k: int) -> tuple[int, int]:
                if k < len(pairs):
                    return pairs[k]
                j = k - len(pairs) + 1
                return (last_lo + step * j, last_hi + step * j)

            fam = IntervalFamily(at)
        return build_thm_distinguishing(fam, parse_space(spec.get("space", "c0")))
    if name == "any_sequence":
        t = blocks_by_name(spec.get("t", "unit"))
        s_spec = spec.get("s", "succ")
        if s_spec == "succ":
            s = lambda k: Q(k + 1)
        elif s_spec.startswith("constant:"):
            c = parse_q(s_spec[len("constant:"):])
            s = lambda k: c
        else:
            raise ValueError(f"unknown target sequence {s_spec!r}")
        return build_any_sequence(t, s, parse_space(spec.get("space", "c0")),
                                  float(spec.get("precision", 1e-9)))
    if name == "avoid":
        zname = spec["z"]
        z = z_geometric(Q(zname[len("geometric:"):])) if zname.startswith("geometric:") \
            else z_reciprocal()
        return build_avoid(z)
    if name == "v_basis":
        return build_v_basis()
    if name == "double_partial_sums":
        return build_double_partial_sums()
    if name == "phi_basis":
        phi = parse_submeasure(spec.get("family", "density"))
        return build_phi_basis(phi, int(spec.get("budget", 64)),
                               int(spec.get("length", 32)))
    raise ValueError(f"unknown construction {name!r}")


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
