import math

import pytest

from grassqp.path_algebra import (
    CapMismatch,
    PathError,
    PathSum,
    Potential,
    apply_endomorphism,
    canonical_rotation,
    compose,
    cyclic_derivative,
    cyclically_equivalent,
    longest_cycle_len,
    m_adic_order,
    make_path,
    product_path,
    trivial,
)
from grassqp.postnikov import face_potential, initial_diagram
from grassqp.quiver_core import Arrow, IcedQuiver

# alpha: 1->2, beta: 2->3, gamma: 3->1 ; the cycle gamma.beta.alpha traverses 1, 2, 3
TRI = IcedQuiver(3, 0, (Arrow(1, 1, 2), Arrow(2, 2, 3), Arrow(3, 3, 1)))
SQ = IcedQuiver(4, 0, (Arrow(1, 1, 2), Arrow(2, 2, 3), Arrow(3, 3, 4), Arrow(4, 4, 1)))
# alpha: 1->2, gamma, beta: 2->1
TWO = IcedQuiver(2, 0, (Arrow(1, 1, 2), Arrow(2, 2, 1), Arrow(3, 2, 1)))


def ps(q, *terms, cap=10):
    return PathSum(q, {make_path(q, t): c for t, c in terms}, cap)


class TestPaths:
    def test_composability_checked(self):
        with pytest.raises(PathError):
            make_path(TRI, (1, 3))

    def test_product_notation(self):
        # "beta alpha" means alpha first
        assert product_path(TRI, 2, 1).arrows == (1, 2)

    def test_compose(self):
        a, b = make_path(TRI, (1,)), make_path(TRI, (2,))
        assert compose(b, a).arrows == (1, 2)
        assert compose(a, b) is None
        assert compose(a, trivial(1)) == a

    def test_str_reads_right_to_left(self):
        assert str(make_path(TRI, (1, 2, 3))) == "3.2.1"
        assert str(trivial(4)) == "e4"


class TestCanonicalRotation:
    def test_three_cycle(self):
        c = make_path(TRI, (2, 3, 1))
        assert canonical_rotation(c, TRI).arrows == (1, 2, 3)

    def test_square(self):
        c = make_path(SQ, (3, 4, 1, 2))
        r = canonical_rotation(c, SQ)
        assert r.arrows[0] == 1 and r.start == 1

    def test_not_a_cycle(self):
        with pytest.raises(PathError):
            canonical_rotation(make_path(TRI, (1, 2)), TRI)

    def test_cyclic_equivalence(self):
        c1, c2 = make_path(TRI, (1, 2, 3)), make_path(TRI, (3, 1, 2))
        assert cyclically_equivalent(c1, c2, TRI)
        assert cyclically_equivalent(c1, c1, TRI)
        assert not cyclically_equivalent(make_path(TWO, (1, 2, 1, 3)), make_path(TWO, (1, 3, 1, 3)), TWO)


class TestPathSum:
    def test_cap_mismatch(self):
        with pytest.raises(CapMismatch):
            ps(TRI, ((1,), 1), cap=3) + ps(TRI, ((1,), 1), cap=4)

    def test_zero_terms_dropped(self):
        x = ps(TRI, ((1,), 1)) - ps(TRI, ((1,), 1))
        assert not x and x.terms == {}

    def test_multiplication_truncates(self):
        a = ps(TRI, ((1, 2), 1), cap=3)
        b = ps(TRI, ((3, 1), 1), cap=3)
        assert not (b * a)  # length 4 > cap
        assert (ps(TRI, ((3,), 1), cap=3) * a).terms == {make_path(TRI, (1, 2, 3)): 1}

    def test_serialization(self):
        x = ps(TRI, ((1, 2), 2), ((1,), -1))
        assert PathSum.from_list(TRI, x.to_list(), x.cap) == x

    def test_potential_keys_are_canonical(self):
        w = Potential(TRI, {make_path(TRI, (2, 3, 1)): 1, make_path(TRI, (3, 1, 2)): 2}, 10)
        assert w.terms == {make_path(TRI, (1, 2, 3)): 3}


class TestCyclicDerivative:
    def test_unique_occurrence(self):
        w = Potential(TRI, {make_path(TRI, (1, 2, 3)): 1}, 10)
        # d_alpha(gamma beta alpha) = gamma beta
        assert cyclic_derivative(w, 1).terms == {make_path(TRI, (2, 3)): 1}

    def test_repeated_arrow(self):
        # the cycle beta alpha gamma alpha; each occurrence of alpha contributes once
        w = Potential(TWO, {make_path(TWO, (1, 2, 1, 3)): 1}, 10)
        d = cyclic_derivative(w, 1)
        assert d.terms == {make_path(TWO, (2, 1, 3)): 1, make_path(TWO, (3, 1, 2)): 1}

    def test_absent_arrow(self):
        w = Potential(TRI, {make_path(TRI, (1, 2, 3)): 1}, 10)
        assert not cyclic_derivative(w, 99)

    def test_term_counts_match_occurrences(self):
        w = Potential(TWO, {make_path(TWO, (1, 2, 1, 3, 1, 2)): 1}, 10)
        d = cyclic_derivative(w, 1)
        assert sum(d.terms.values()) == 3
        assert all(len(p) == 5 for p in d.terms)


class TestEndomorphism:
    def test_identity(self):
        x = ps(TRI, ((1, 2), 1), ((3,), 2))
        assert apply_endomorphism({}, x) == x

    def test_sign_change(self):
        x = ps(TRI, ((1, 2), 1))
        y = apply_endomorphism({1: ps(TRI, ((1,), -1))}, x)
        assert y.terms == {make_path(TRI, (1, 2)): -1}

    def test_unitriangular(self):
        # [gamma beta] -> [gamma beta] + t applied to q[gamma beta]
        q = IcedQuiver(3, 0, (Arrow(1, 1, 3), Arrow(2, 1, 2), Arrow(3, 2, 3), Arrow(4, 3, 1)))
        x = ps(q, ((1, 4), 1))
        t = ps(q, ((2, 3), 1))
        y = apply_endomorphism({1: ps(q, ((1,), 1)) + t}, x)
        assert y == ps(q, ((1, 4), 1), ((2, 3, 4), 1))

    def test_non_parallel_image(self):
        with pytest.raises(PathError):
            apply_endomorphism({1: ps(TRI, ((2,), 1))}, ps(TRI, ((1,), 1)))


class TestOrders:
    def test_order_of_zero(self):
        assert m_adic_order(PathSum(TRI, {}, 5)) == math.inf

    def test_order_with_idempotent(self):
        x = PathSum(TRI, {trivial(1): 1, make_path(TRI, (1, 2)): 1}, 5)
        assert m_adic_order(x) == 0

    def test_order_two(self):
        assert m_adic_order(ps(TWO, ((1, 2), 1), ((1, 3), -1))) == 2

    def test_longest_cycle(self):
        assert longest_cycle_len(Potential(TRI, {make_path(TRI, (1, 2, 3)): 1}, 5)) == 3
        assert longest_cycle_len(Potential(TRI, {}, 5)) == 0

    @pytest.mark.parametrize("k,n", [(3, 6), (3, 7), (4, 8)])
    def test_principal_potential_has_squares(self, k, n):
        w = face_potential(initial_diagram(k, n), "type2")
        assert longest_cycle_len(w) == 4
