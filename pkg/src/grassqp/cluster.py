"""Seeds, exchange relations and exchange-graph exploration.

Cluster variables live in the fraction field ``ZZ(x_1, ..., x_{n+m})`` from
sympy, whose elements are kept as reduced fractions, so equality of normal
forms is plain ``==``.
"""
from __future__ import annotations

import csv
import io
import json
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import networkx as nx
import sympy
from sympy import ZZ
from sympy.polys.fields import FracElement, FracField, field as frac_field

from .quiver_core import IcedQuiver, QuiverError, are_isomorphic, mutate_quiver, principal_part

TRIVIAL = "trivial"
GEOMETRIC = "geometric"


@lru_cache(maxsize=None)
def ambient_field(size: int) -> FracField:
    names = ",".join(f"x{i}" for i in range(1, size + 1)) or "x0"
    return frac_field(names, ZZ)[0]


@dataclass(frozen=True)
class Seed:
    quiver: IcedQuiver
    variables: tuple[FracElement, ...]
    coefficients: str = GEOMETRIC

    @classmethod
    def initial(cls, q: IcedQuiver, coefficients: str = GEOMETRIC) -> Seed:
        if coefficients not in (TRIVIAL, GEOMETRIC):
            raise ValueError(f"unknown coefficient mode {coefficients!r}")
        K = ambient_field(q.num_vertices)
        gens = K.gens if q.num_vertices else ()
        xs = [gens[v - 1] if (v <= q.n or coefficients == GEOMETRIC) else K.one for v in q.vertices]
        return cls(q, tuple(xs), coefficients)

    @property
    def field(self) -> FracField:
        return ambient_field(self.quiver.num_vertices)

    def x(self, v: int) -> FracElement:
        return self.variables[v - 1]

    @property
    def cluster(self) -> frozenset:
        return frozenset(self.variables[: self.quiver.n])

    def to_dict(self) -> dict:
        return {
            "format": "seed.v1",
            "quiver": self.quiver.to_dict(),
            "coefficients": self.coefficients,
            "variables": [str(x.as_expr()) for x in self.variables],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> Seed:
        q = IcedQuiver.from_dict(d["quiver"])
        K = ambient_field(q.num_vertices)
        syms = {str(s): s for s in K.symbols}
        xs = tuple(K.from_expr(sympy.sympify(e, locals=syms)) for e in d["variables"])
        return cls(q, xs, d.get("coefficients", GEOMETRIC))

    @classmethod
    def from_json(cls, s: str) -> Seed:
        return cls.from_dict(json.loads(s))


def exchange_binomial(s: Seed, i: int) -> tuple[FracElement, FracElement]:
    """The two monomials of the exchange relation at ``i`` (out-neighbours first)."""
    K = s.field
    out_m, in_m = K.one, K.one
    for a in s.quiver.out_arrows(i):
        out_m *= s.x(a.tgt)
    for a in s.quiver.in_arrows(i):
        in_m *= s.x(a.src)
    return out_m, in_m


def mutate_seed(s: Seed, i: int) -> Seed:
    q = s.quiver
    if not 1 <= i <= q.num_vertices:
        raise QuiverError(f"vertex {i} out of range")
    if q.is_frozen(i):
        raise QuiverError(f"vertex {i} is frozen")
    out_m, in_m = exchange_binomial(s, i)
    xs = list(s.variables)
    xs[i - 1] = (out_m + in_m) / s.x(i)
    return Seed(mutate_quiver(q, i), tuple(xs), s.coefficients)


def mutate_seed_sequence(s: Seed, path) -> Seed:
    for i in path:
        s = mutate_seed(s, i)
    return s


# -- exchange graph -------------------------------------------------------------

@dataclass
class ExchangeGraphReport:
    seed_count: int | None
    max_seeds: int
    exceeded: bool
    eccentricity: int
    diameter: int | None
    iso_classes: int
    seeds: list[Seed] = field(default_factory=list, repr=False)
    edges: list[tuple[int, int, int]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "seed_count": self.seed_count if not self.exceeded else None,
            "exceeded": self.exceeded,
            "max_seeds": self.max_seeds,
            "eccentricity": self.eccentricity,
            "diameter": self.diameter,
            "iso_classes": self.iso_classes,
        }

    def __str__(self) -> str:
        if self.exceeded:
            return f"Exceeded({self.max_seeds})"
        return f"{self.seed_count} seeds"


def _iso_classes(quivers: list[IcedQuiver]) -> int:
    buckets: dict[str, list[IcedQuiver]] = {}
    for q in quivers:
        g = nx.MultiDiGraph()
        g.add_nodes_from(q.vertices)
        g.add_edges_from((a.src, a.tgt) for a in q.arrows)
        key = nx.weisfeiler_lehman_graph_hash(nx.DiGraph(g)) + f"/{q.multiplicities().total()}"
        reps = buckets.setdefault(key, [])
        if not any(are_isomorphic(r, q, fix_frozen=False) for r in reps):
            reps.append(q)
    return sum(len(v) for v in buckets.values())


def explore_exchange_graph(s: Seed, max_seeds: int = 10_000, diameter_limit: int = 3000) -> ExchangeGraphReport:
    """Breadth-first closure of the exchange graph from ``s``.

    Seeds are identified by their unordered clusters.  ``diameter`` is
    computed only for closed graphs with at most ``diameter_limit`` seeds.
    """
    index = {s.cluster: 0}
    seeds = [s]
    depth = [0]
    edges: list[tuple[int, int, int]] = []
    dq = deque([0])
    exceeded = False
    while dq and not exceeded:
        u = dq.popleft()
        for i in range(1, s.quiver.n + 1):
            t = mutate_seed(seeds[u], i)
            key = t.cluster
            w = index.get(key)
            if w is None:
                if len(seeds) >= max_seeds:
                    exceeded = True
                    break
                w = len(seeds)
                index[key] = w
                seeds.append(t)
                depth.append(depth[u] + 1)
                dq.append(w)
            if u < w:
                edges.append((u, w, i))
    diameter = None
    if not exceeded and len(seeds) <= diameter_limit:
        g = nx.Graph()
        g.add_nodes_from(range(len(seeds)))
        g.add_edges_from((u, w) for u, w, _ in edges)
        diameter = nx.diameter(g)
    quivers = [principal_part(x.quiver) if x.coefficients == TRIVIAL else x.quiver for x in seeds]
    return ExchangeGraphReport(
        None if exceeded else len(seeds),
        max_seeds,
        exceeded,
        max(depth),
        diameter,
        _iso_classes(quivers),
        seeds,
        edges,
    )


def exchange_graph_csv(rows: list[dict]) -> str:
    cols = ["k", "n", "coefficients", "seed_count", "exceeded", "eccentricity", "diameter", "iso_classes"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# -- Laurent phenomenon ---------------------------------------------------------------

def is_laurent(x: FracElement) -> bool:
    return len(x.denom.terms()) == 1


def has_positive_numerator(x: FracElement) -> bool:
    sign = 1 if x.denom.LC > 0 else -1
    return all(c * sign >= 0 for _, c in x.numer.terms())


def laurent_check(s0: Seed, path) -> bool:
    s = s0
    if not all(is_laurent(x) for x in s.variables):
        return False
    for i in path:
        s = mutate_seed(s, i)
        if not is_laurent(s.x(i)):
            return False
    return True


def positivity_check(s0: Seed, path) -> list[tuple[int, ...]]:
    """Prefixes of ``path`` whose new variable has a negative numerator coefficient."""
    bad = []
    s = s0
    for j, i in enumerate(path):
        s = mutate_seed(s, i)
        if not has_positive_numerator(s.x(i)):
            bad.append(tuple(path[: j + 1]))
    return bad


def random_path(n: int, length: int, rng: random.Random) -> list[int]:
    """A mutation sequence without immediate repeats."""
    out: list[int] = []
    for _ in range(length):
        choices = [i for i in range(1, n + 1) if not out or i != out[-1]]
        if not choices:
            break
        out.append(rng.choice(choices))
    return out


# -- Plücker coordinates --------------------------------------------------------------

def minor(mat: list[list[Fraction]], cols: tuple[int, ...]) -> Fraction:
    """Determinant of the columns ``cols`` (1-based) of a ``k x n`` matrix."""
    m = [[Fraction(mat[r][c - 1]) for c in cols] for r in range(len(mat))]
    k = len(m)
    det = Fraction(1)
    for j in range(k):
        piv = next((r for r in range(j, k) if m[r][j] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != j:
            m[j], m[piv] = m[piv], m[j]
            det = -det
        det *= m[j][j]
        for r in range(j + 1, k):
            f = m[r][j] / m[j][j]
            if f:
                for c in range(j, k):
                    m[r][c] -= f * m[j][c]
    return det


def random_matrix(k: int, n: int, rng: random.Random, bound: int = 9) -> list[list[Fraction]]:
    return [[Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for _ in range(n)] for _ in range(k)]


def plucker_point(labels: dict[int, tuple[int, ...]], mat) -> dict[int, Fraction]:
    return {v: minor(mat, cols) for v, cols in labels.items()}


def evaluate(x: FracElement, point: dict[int, Fraction]) -> Fraction:
    """Substitute ``x_v -> point[v]`` in a rational function."""
    def ev(poly) -> Fraction:
        total = Fraction(0)
        for mon, c in poly.terms():
            t = Fraction(int(c))
            for v, e in enumerate(mon, 1):
                if e:
                    t *= point[v] ** e
            total += t
        return total
    return ev(x.numer) / ev(x.denom)


def three_term_identities(k: int, n: int, mat) -> bool:
    """Sanity check of the oracle itself: short Plücker relations for ``k = 2``."""
    if k != 2:
        raise ValueError("three-term relations are stated for k = 2")
    for a, b, c, d in combinations(range(1, n + 1), 4):
        lhs = minor(mat, (a, c)) * minor(mat, (b, d))
        rhs = minor(mat, (a, b)) * minor(mat, (c, d)) + minor(mat, (a, d)) * minor(mat, (b, c))
        if lhs != rhs:
            return False
    return True


def plucker_exchange_check(fd0, mat, max_diagrams: int = 500) -> list[tuple]:
    """Check every exchange relation in the geometric exchange graph of ``fd0``
    against the minors of ``mat``.

    Vertices carry the minors of their region labels; an exchange at ``a``
    must satisfy ``x_a x_a' = prod(out-neighbours) + prod(in-neighbours)``
    where ``x_a'`` is the minor of ``a``'s label after the exchange.
    Returns the failing ``(labels, vertex)`` pairs.
    """
    from .postnikov import exchangeable_vertices, geometric_exchange, region_label_sets

    failures = []
    seen = set()
    dq = deque([fd0])
    while dq and len(seen) < max_diagrams:
        fd = dq.popleft()
        labels = region_label_sets(fd)
        key = frozenset(labels.values())
        if key in seen:
            continue
        seen.add(key)
        pt = plucker_point(labels, mat)
        q = fd.quiver
        for a in exchangeable_vertices(fd):
            fd2 = geometric_exchange(fd, a)
            new = minor(mat, region_label_sets(fd2)[a])
            out_m, in_m = Fraction(1), Fraction(1)
            for b in q.out_arrows(a):
                out_m *= pt[b.tgt]
            for b in q.in_arrows(a):
                in_m *= pt[b.src]
            if pt[a] * new != out_m + in_m:
                failures.append((labels, a))
            dq.append(fd2)
    return failures
