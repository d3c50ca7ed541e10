from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from ibl.sets import (GeometricTail, difference, empty_set, evens, finite_set,
                      geometric_set, intersect, is_subset_below, odds, omega,
                      shifted, stride, union)
from ibl.weights import reciprocal_succ


def test_finite_set_enumeration():
    a = finite_set([5, 1, 3, 3])
    assert a.enumerate_below(10) == [1, 3, 5]
    assert a.enumerate_below(4) == [1, 3]
    assert a.finite is True and a.bound == 6


def test_stride_and_geometric():
    assert evens().enumerate_below(9) == [0, 2, 4, 6, 8]
    assert odds().enumerate_below(8) == [1, 3, 5, 7]
    assert geometric_set(2).enumerate_below(20) == [1, 2, 4, 8, 16]
    assert geometric_set(2, from_exp=2).enumerate_below(20) == [4, 8, 16]
    assert geometric_set(3).membership(27)
    assert not geometric_set(3).membership(12)


def test_omega_and_unit_stride_flagged():
    assert omega().is_omega
    assert stride(0, 1).is_omega
    assert not stride(0, 2).is_omega


@given(st.integers(0, 200))
def test_union_intersect_difference_pointwise(n):
    a, b = evens(), geometric_set(2)
    assert union(a, b).membership(n) == (a.membership(n) or b.membership(n))
    assert intersect(a, b).membership(n) == (a.membership(n) and b.membership(n))
    assert difference(a, b).membership(n) == (a.membership(n) and not b.membership(n))


def test_difference_identity_and_omega_shortcuts():
    a = evens()
    assert difference(a, a).enumerate_below(100) == []
    assert difference(a, omega()).finite is True


def test_tag_propagation():
    f = finite_set([1, 2])
    assert union(f, finite_set([9])).finite is True
    assert union(f, evens()).finite is False
    assert intersect(evens(), f).finite is True
    assert difference(f, evens()).finite is True


def test_shift_membership_and_enumeration():
    a = shifted(geometric_set(2), 1)
    assert a.enumerate_below(20) == [2, 3, 5, 9, 17]
    down = shifted(a, -1)
    assert down.membership(1) and down.membership(16)


def test_shift_transports_rank_certificates():
    rule = reciprocal_succ()
    cert = GeometricTail("reciprocal_succ", Q(1, 2), Q(2), "rank")
    a = geometric_set(2).with_certs(cert)
    up = shifted(a, 1, rule=rule)
    moved = up.cert_for("reciprocal_succ")
    assert moved is not None and moved.bound == Q(2)  # nonincreasing: unchanged
    down = shifted(up, -1, rule=rule)
    back = down.cert_for("reciprocal_succ")
    assert back is not None and back.bound == Q(4)  # one step of the shift factor


def test_subset_probe():
    assert is_subset_below(geometric_set(4), geometric_set(2), 1000)
    assert not is_subset_below(evens(), geometric_set(2), 10)


def test_geometric_tail_validation():
    with pytest.raises(ValueError):
        GeometricTail("w", Q(3, 2), Q(1))
    with pytest.raises(ValueError):
        GeometricTail("w", Q(1, 2), Q(0))
