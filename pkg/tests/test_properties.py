"""Invariants checked on generated inputs."""
import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from grassqp.cluster import TRIVIAL, Seed, mutate_seed
from grassqp.jacobian import IdealBasis
from grassqp.path_algebra import (
    PathSum,
    Potential,
    apply_endomorphism,
    canonical_rotation,
    cyclic_derivative,
    make_path,
    rotations,
)
from grassqp.postnikov import (
    diagram_iqp,
    diagram_isomorphic,
    exchangeable_vertices,
    geometric_exchange,
    initial_diagram,
    validate,
)
from grassqp.qp import apply_signs, equivalent_up_to_signs
from grassqp.quiver_core import Arrow, IcedQuiver, are_isomorphic, mutate_quiver, opposite, same_up_to_ids

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def quivers(draw, max_mutable=5, max_frozen=2):
    n = draw(st.integers(1, max_mutable))
    m = draw(st.integers(0, max_frozen))
    arrows = []
    for u in range(1, n + m + 1):
        for v in range(u + 1, n + m + 1):
            if u > n and v > n:
                continue
            k = draw(st.integers(-2, 2))
            s, t = (u, v) if k > 0 else (v, u)
            for _ in range(abs(k)):
                arrows.append(Arrow(len(arrows) + 1, s, t))
    return IcedQuiver(n, m, tuple(arrows))


# two vertices with two arrows each way: 1, 2 : 1 -> 2 and 3, 4 : 2 -> 1
BI = IcedQuiver(2, 0, (Arrow(1, 1, 2), Arrow(2, 1, 2), Arrow(3, 2, 1), Arrow(4, 2, 1)))


@st.composite
def bi_paths(draw, start, min_len=1, max_len=6):
    length = draw(st.integers(min_len, max_len))
    arrows, v = [], start
    for _ in range(length):
        a = draw(st.sampled_from([1, 2] if v == 1 else [3, 4]))
        arrows.append(a)
        v = 2 if v == 1 else 1
    return make_path(BI, arrows)


@st.composite
def bi_cycles(draw):
    half = draw(st.integers(1, 3))
    return draw(bi_paths(1, 2 * half, 2 * half))


@given(quivers(), st.data())
@SETTINGS
def test_quiver_mutation_involution(q, data):
    i = data.draw(st.integers(1, q.n))
    once = mutate_quiver(q, i)
    assert (once.n, once.m) == (q.n, q.m)
    assert same_up_to_ids(mutate_quiver(once, i), q)


@given(quivers(), st.data())
@SETTINGS
def test_mutation_commutes_with_opposite(q, data):
    i = data.draw(st.integers(1, q.n))
    assert are_isomorphic(mutate_quiver(opposite(q), i), opposite(mutate_quiver(q, i))) is not None


@given(quivers(max_mutable=4, max_frozen=1), st.data())
@SETTINGS
def test_seed_involution(q, data):
    s = Seed.initial(q, TRIVIAL)
    i = data.draw(st.integers(1, q.n))
    assert mutate_seed(mutate_seed(s, i), i).variables == s.variables


@given(bi_cycles(), st.integers(0, 5))
@SETTINGS
def test_canonical_rotation_is_a_class_invariant(c, k):
    r = rotations(c, BI)[k % len(c)]
    assert canonical_rotation(r, BI) == canonical_rotation(c, BI)
    assert canonical_rotation(canonical_rotation(c, BI), BI) == canonical_rotation(c, BI)


@given(st.lists(st.tuples(bi_cycles(), st.integers(-3, 3)), min_size=1, max_size=4), st.integers(1, 4))
@SETTINGS
def test_cyclic_derivative_ignores_rotation(terms, a):
    raw = PathSum(BI, {}, 12)
    rotated = PathSum(BI, {}, 12)
    for c, coeff in terms:
        raw = raw + PathSum(BI, {c: coeff}, 12)
        rot = rotations(c, BI)[len(c) // 2]
        rotated = rotated + PathSum(BI, {rot: coeff}, 12)
    assert cyclic_derivative(raw, a) == cyclic_derivative(rotated, a)
    assert cyclic_derivative(raw, a) == cyclic_derivative(Potential(BI, raw.terms, 12), a)


@given(bi_paths(1, 1, 4), st.data())
@SETTINGS
def test_endomorphism_is_multiplicative(x, data):
    y = data.draw(bi_paths(x.end, 1, 4))
    phi = {}
    for a in (1, 2, 3, 4):
        src, tgt = BI.src(a), BI.tgt(a)
        extra = data.draw(bi_paths(src, 3, 3))
        img = PathSum.arrow(BI, a, 10)
        if extra.end == tgt:
            img = img + PathSum(BI, {extra: data.draw(st.integers(-2, 2))}, 10)
        phi[a] = img
    X, Y = PathSum(BI, {x: 1}, 10), PathSum(BI, {y: 1}, 10)
    assert apply_endomorphism(phi, Y * X) == apply_endomorphism(phi, Y) * apply_endomorphism(phi, X)


@given(bi_paths(1, 1, 5), st.integers(2, 9), st.data())
@SETTINGS
def test_truncation_coherence(x, low, data):
    y = data.draw(bi_paths(x.end, 1, 5))
    full = (PathSum(BI, {y: 1}, 10) * PathSum(BI, {x: 1}, 10)).truncate(low)
    small = PathSum(BI, {y: 1}, low) * PathSum(BI, {x: 1}, low)
    assert full.terms == small.terms


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_sign_flips_are_recovered(seed):
    rng = random.Random(seed)
    fd = initial_diagram(*rng.choice([(2, 5), (3, 6), (3, 7)]))
    w = diagram_iqp(fd).potential
    xi = {a.id: rng.choice([1, -1]) for a in w.quiver.arrows}
    flipped = apply_signs(w, xi)
    found = equivalent_up_to_signs(w, flipped, w.quiver)
    assert found is not None and apply_signs(w, found) == flipped


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_exchange_walks_stay_valid_and_involutive(seed):
    rng = random.Random(seed)
    fd = initial_diagram(*rng.choice([(2, 6), (3, 6), (3, 7), (4, 8)]))
    for _ in range(4):
        a = rng.choice(exchangeable_vertices(fd))
        nxt = geometric_exchange(fd, a)
        assert validate(nxt).ok
        assert diagram_isomorphic(geometric_exchange(nxt, a), fd)
        fd = nxt


@given(st.integers(0, 10_000))
@settings(max_examples=10, deadline=None)
def test_ideal_basis_is_monotone(seed):
    rng = random.Random(seed)
    fd = initial_diagram(2, rng.choice([5, 6]))
    for _ in range(rng.randint(0, 3)):
        fd = geometric_exchange(fd, rng.choice(exchangeable_vertices(fd)))
    p = diagram_iqp(fd, rng.choice(["type3", "bkm"]))
    lo = rng.randint(4, 6)
    assert IdealBasis.build(p, lo + 2).graded_counts()[:lo] == IdealBasis.build(p, lo).graded_counts()
