"""Iced quivers with potentials: pre-mutation, reduction and mutation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import networkx as nx

from .path_algebra import (
    Path,
    PathSum,
    Potential,
    apply_endomorphism,
    canonical_rotation,
    cyclic_derivative,
    m_adic_order,
    make_path,
)
from .quiver_core import (
    Arrow,
    ArrowClass,
    IcedQuiver,
    MutationRecord,
    classify_arrow,
    premutate_arrows,
)

DEFAULT_CAP = 24


class QPError(ValueError):
    pass


class SplitError(QPError):
    def __init__(self, degree: int):
        super().__init__(f"cap too small: elimination still changing terms in degree {degree}")
        self.degree = degree


class Cancelled(RuntimeError):
    pass


@dataclass(frozen=True)
class IQP:
    quiver: IcedQuiver
    potential: Potential
    cap: int = DEFAULT_CAP

    def __post_init__(self) -> None:
        if self.potential.quiver != self.quiver:
            object.__setattr__(self, "potential", Potential(self.quiver, self.potential.terms, self.cap))
        if self.potential.cap != self.cap:
            object.__setattr__(self, "potential", Potential(self.quiver, self.potential.terms, self.cap))

    @classmethod
    def from_terms(cls, q: IcedQuiver, terms: dict[tuple[int, ...], object], cap: int = DEFAULT_CAP) -> IQP:
        """Terms keyed by arrow ids in traversal order."""
        return cls(q, Potential(q, {make_path(q, k): c for k, c in terms.items()}, cap), cap)

    def check_terms(self) -> list[Path]:
        """Terms made only of external arrows (these are not allowed in an IQP)."""
        bad = []
        for p in self.potential.terms:
            if all(classify_arrow(self.quiver, a) is ArrowClass.EXTERNAL for a in p.arrows):
                bad.append(p)
        return bad

    def to_dict(self) -> dict:
        d = self.quiver.to_dict()
        d["potential"] = self.potential.to_list()
        d["cap"] = self.cap
        return d

    @classmethod
    def from_dict(cls, d: dict) -> IQP:
        q = IcedQuiver.from_dict(d)
        cap = int(d.get("cap", DEFAULT_CAP))
        return cls(q, Potential.from_list(q, d.get("potential", []), cap), cap)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class Transcript:
    """Substitutions applied in order; each step maps arrow ids to path sums."""

    steps: list[tuple[str, dict[int, PathSum]]] = field(default_factory=list)

    def add(self, kind: str, phi: dict[int, PathSum]) -> None:
        self.steps.append((kind, phi))

    def replay(self, w: Potential) -> Potential:
        for _, phi in self.steps:
            w = apply_endomorphism(phi, w)
        return w

    def __len__(self) -> int:
        return len(self.steps)


# -- pre-mutation -------------------------------------------------------------

def premutate(p: IQP, i: int) -> tuple[IQP, MutationRecord]:
    q = p.quiver
    if not 1 <= i <= q.num_vertices:
        raise QPError(f"vertex {i} out of range")
    if q.is_frozen(i):
        raise QPError(f"vertex {i} is frozen")
    ins = {a.src for a in q.in_arrows(i)}
    if any(a.tgt in ins for a in q.out_arrows(i)):
        raise QPError(f"vertex {i} lies on a 2-cycle")
    arrows, rec = premutate_arrows(q, i)
    nq = q.with_arrows(arrows)
    comp_of = {pair: cid for cid, pair in rec.composites.items()}
    star_of = {old: sid for sid, old in rec.stars.items()}

    terms: dict[Path, Fraction] = {}
    for path, c in p.potential.terms.items():
        arr = path.arrows
        # start the walk away from i so that every visit to i is a 2-path inside it
        k0 = next(k for k, a in enumerate(arr) if q.src(a) != i)
        arr = arr[k0:] + arr[:k0]
        out: list[int] = []
        k = 0
        while k < len(arr):
            a = arr[k]
            if q.tgt(a) == i:
                out.append(comp_of[(arr[k + 1], a)])
                k += 2
            else:
                out.append(a)
                k += 1
        np_ = make_path(nq, out)
        terms[np_] = terms.get(np_, 0) + c
    for cid, (alpha, beta) in rec.composites.items():
        cyc = make_path(nq, (star_of[alpha], star_of[beta], cid))
        terms[cyc] = terms.get(cyc, 0) + 1
    return IQP(nq, Potential(nq, terms, p.cap), p.cap), rec


# -- reduction ----------------------------------------------------------------

def _two_cycle_blocks(w: Potential) -> dict[tuple[int, int], dict[tuple[int, int], Fraction]]:
    """Quadratic part grouped by vertex pair ``(u, v)``, ``u < v``: entries keyed
    by ``(arrow u->v, arrow v->u)``."""
    q = w.quiver
    blocks: dict[tuple[int, int], dict[tuple[int, int], Fraction]] = {}
    for p, c in w.terms.items():
        if len(p) != 2:
            continue
        x, y = p.arrows
        u, v = q.src(x), q.tgt(x)
        if u > v:
            x, y, u, v = y, x, v, u
        blocks.setdefault((u, v), {})[(x, y)] = c
    return blocks


def _arrow_sum(q: IcedQuiver, cap: int, coeffs: dict[int, Fraction]) -> PathSum:
    return PathSum(q, {make_path(q, (a,)): c for a, c in coeffs.items()}, cap)


def _normalize_quadratic(w: Potential, transcript: Transcript, check: Callable[[], None]) -> tuple[Potential, list[tuple[int, int]]]:
    """Linear changes of arrows until the quadratic part is a sum of distinct ``x*y``."""
    q = w.quiver
    cap = w.cap
    pivots: list[tuple[int, int]] = []
    used: set[int] = set()
    while True:
        check()
        best = None
        for (u, v), block in _two_cycle_blocks(w).items():
            for (x, y), c in block.items():
                if x in used or y in used:
                    continue
                key = (min(x, y), max(x, y))
                if best is None or key < best[0]:
                    best = (key, x, y, block)
        if best is None:
            break
        _, x0, y0, block = best
        c0 = block[(x0, y0)]
        # make the row of x0 equal to x0*y0
        row = {y: c for (x, y), c in block.items() if x == x0 and y not in used}
        if len(row) > 1 or c0 != 1:
            img = {y0: 1 / c0}
            for y, c in row.items():
                if y != y0:
                    img[y] = -c / c0
            phi = {y0: _arrow_sum(q, cap, img)}
            w = Potential.from_pathsum(apply_endomorphism(phi, w))
            transcript.add("linear", phi)
            block = _two_cycle_blocks(w).get(_pair_key(q, x0), {})
        col = {x: c for (x, y), c in block.items() if y == y0 and x != x0 and x not in used}
        if col:
            img = {x0: Fraction(1)}
            for x, c in col.items():
                img[x] = -c
            phi = {x0: _arrow_sum(q, cap, img)}
            w = Potential.from_pathsum(apply_endomorphism(phi, w))
            transcript.add("linear", phi)
        pivots.append((x0, y0))
        used.update((x0, y0))
    return w, pivots


def _pair_key(q: IcedQuiver, x: int) -> tuple[int, int]:
    u, v = q.src(x), q.tgt(x)
    return (u, v) if u < v else (v, u)


def split(p: IQP, strict: bool = True, cancel: Callable[[], bool] | None = None) -> tuple[IQP, IQP, Transcript]:
    """Right-equivalence to trivial part plus reduced part.

    With ``strict`` the elimination must finish below the cap; otherwise a
    ``SplitError`` names the degree that overflowed.
    """
    q, cap = p.quiver, p.cap

    def check() -> None:
        if cancel is not None and cancel():
            raise Cancelled("split cancelled")

    transcript = Transcript()
    w, pivots = _normalize_quadratic(p.potential, transcript, check)
    partner: dict[int, int] = {}
    for x, y in pivots:
        partner[x] = y
        partner[y] = x
    pivot_terms = {canonical_rotation(make_path(q, (y, x)), q) for x, y in pivots}

    work_cap = 2 * cap
    while True:
        check()
        dirty = [
            t for t in w.terms
            if t not in pivot_terms and any(a in partner for a in t.arrows)
        ]
        if not dirty:
            break
        t = min(dirty, key=Path.sort_key)
        c = w.terms[t]
        arr = t.arrows
        k = next(j for j, a in enumerate(arr) if a in partner)
        x = arr[k]
        y = partner[x]
        # the term is c * x * u with u read from just after x round to just before it
        u = arr[k + 1:] + arr[:k]
        u_path = Path(u, q.tgt(x), q.src(x))
        pivot_coeff = w.terms[canonical_rotation(make_path(q, (y, x)), q)]
        img = PathSum(q, {make_path(q, (y,)): 1, u_path: -c / pivot_coeff}, work_cap)
        phi = {y: img}
        wide = apply_endomorphism(phi, PathSum(q, w.terms, work_cap), work_cap)
        over = [len(r) for r in wide.terms if len(r) > cap]
        if over:
            if strict:
                raise SplitError(min(over))
        w = Potential(q, {r: v for r, v in wide.terms.items() if len(r) <= cap}, cap)
        transcript.add("unitriangular", {y: img.with_cap(cap)})

    trivial_ids = set(partner)
    triv_q = q.with_arrows(a for a in q.arrows if a.id in trivial_ids)
    red_q = q.with_arrows(a for a in q.arrows if a.id not in trivial_ids)
    triv_terms = {make_path(triv_q, (y, x)): w.terms[canonical_rotation(make_path(q, (y, x)), q)] for x, y in pivots}
    red_terms = {make_path(red_q, t.arrows): c for t, c in w.terms.items() if t not in pivot_terms}
    trivial_part = IQP(triv_q, Potential(triv_q, triv_terms, cap), cap)
    reduced = IQP(red_q, Potential(red_q, red_terms, cap), cap)
    return trivial_part, reduced, transcript


def mutate_with_record(p: IQP, i: int, strict: bool = True) -> tuple[IQP, MutationRecord, Transcript]:
    pre, rec = premutate(p, i)
    _, reduced, tr = split(pre, strict=strict)
    return reduced, rec, tr


def mutate(p: IQP, i: int, strict: bool = True) -> IQP:
    return mutate_with_record(p, i, strict)[0]


def direct_sum(a: IQP, b: IQP) -> IQP:
    if (a.quiver.n, a.quiver.m) != (b.quiver.n, b.quiver.m):
        raise QPError("direct sum needs the same vertices and frozen set")
    if a.cap != b.cap:
        raise QPError("direct sum needs equal caps")
    taken = {x.id for x in a.quiver.arrows}
    nid = max(taken | {x.id for x in b.quiver.arrows}, default=0) + 1
    rename: dict[int, int] = {}
    for x in b.quiver.arrows:
        if x.id in taken:
            rename[x.id] = nid
            nid += 1
        else:
            rename[x.id] = x.id
    arrows = list(a.quiver.arrows) + [Arrow(rename[x.id], x.src, x.tgt) for x in b.quiver.arrows]
    q = a.quiver.with_arrows(arrows)
    terms: dict[Path, Fraction] = {make_path(q, t.arrows): c for t, c in a.potential.terms.items()}
    for t, c in b.potential.terms.items():
        path = make_path(q, tuple(rename[x] for x in t.arrows))
        terms[path] = terms.get(path, 0) + c
    return IQP(q, Potential(q, terms, a.cap), a.cap)


# -- sign equivalence ---------------------------------------------------------

def _solve_gf2(rows: list[tuple[int, int]], nvars: int) -> int | None:
    """Solve ``row_mask . x = rhs`` over GF(2); returns one solution as a bitmask."""
    pivots: dict[int, tuple[int, int]] = {}
    for mask, rhs in rows:
        for bit, (pm, pr) in pivots.items():
            if mask >> bit & 1:
                mask ^= pm
                rhs ^= pr
        if mask == 0:
            if rhs:
                return None
            continue
        bit = mask.bit_length() - 1
        for b2, (pm, pr) in list(pivots.items()):
            if pm >> bit & 1:
                pivots[b2] = (pm ^ mask, pr ^ rhs)
        pivots[bit] = (mask, rhs)
    sol = 0
    for bit, (pm, pr) in pivots.items():
        # free variables are zero, so each pivot variable equals its rhs
        if pr:
            sol |= 1 << bit
    return sol


def equivalent_up_to_signs(w1: PathSum, w2: PathSum, q: IcedQuiver) -> dict[int, int] | None:
    """Signs ``xi`` with ``xi(w1) == w2`` up to rotation of cycles, or ``None``."""
    t1 = {canonical_rotation(p, q): c for p, c in w1.terms.items()}
    t2 = {canonical_rotation(p, q): c for p, c in w2.terms.items()}
    if set(t1) != set(t2):
        return None
    ids = [a.id for a in q.arrows]
    index = {a: k for k, a in enumerate(ids)}
    rows = []
    for path, c in t1.items():
        ratio = t2[path] / c
        if ratio not in (1, -1):
            return None
        mask = 0
        for a in path.arrows:
            mask ^= 1 << index[a]
        rows.append((mask, 1 if ratio == -1 else 0))
    sol = _solve_gf2(rows, len(ids))
    if sol is None:
        return None
    return {a: (-1 if sol >> index[a] & 1 else 1) for a in ids}


def apply_signs(w: Potential, xi: dict[int, int]) -> Potential:
    terms = {}
    for p, c in w.terms.items():
        s = 1
        for a in p.arrows:
            s *= xi.get(a, 1)
        terms[p] = c * s
    return Potential(w.quiver, terms, w.cap)


# -- checks -------------------------------------------------------------------

def is_reduced(p: IQP) -> bool:
    if p.check_terms():
        return False
    for a in p.quiver.unexternal_arrows():
        if m_adic_order(cyclic_derivative(p.potential, a)) < 2:
            return False
    return True


def induced_cycles(q: IcedQuiver, max_len: int | None = None) -> list[Path]:
    """Cycles whose vertex set spans a full subquiver consisting of that cycle only."""
    g = nx.DiGraph()
    g.add_nodes_from(q.vertices)
    mult = q.multiplicities()
    for (s, t) in mult:
        g.add_edge(s, t)
    arrow_of = {}
    for a in q.arrows:
        arrow_of.setdefault((a.src, a.tgt), a.id)
    out = []
    for cyc in nx.simple_cycles(g, length_bound=max_len) if max_len else nx.simple_cycles(g):
        vs = set(cyc)
        count = sum(k for (s, t), k in mult.items() if s in vs and t in vs)
        if count != len(cyc):
            continue
        arrows = [arrow_of[(cyc[j], cyc[(j + 1) % len(cyc)])] for j in range(len(cyc))]
        out.append(canonical_rotation(make_path(q, arrows), q))
    return sorted(set(out), key=Path.sort_key)


def check_induced_cycle_condition(p: IQP) -> list[Path]:
    return [c for c in induced_cycles(p.quiver) if c not in p.potential.terms]


def arrow_bijections(q1: IcedQuiver, q2: IcedQuiver, limit: int = 5000):
    """Bijections of arrow ids ``q1 -> q2`` that fix every vertex.

    Parallel arrows may be permuted; arrows with the same id and endpoints in
    both quivers are matched first, so identical quivers yield the identity first.
    """
    from itertools import islice, permutations, product

    if q1.multiplicities() != q2.multiplicities():
        return
    groups1: dict[tuple[int, int], list[int]] = {}
    groups2: dict[tuple[int, int], list[int]] = {}
    for a in q1.arrows:
        groups1.setdefault((a.src, a.tgt), []).append(a.id)
    for a in q2.arrows:
        groups2.setdefault((a.src, a.tgt), []).append(a.id)
    keys = sorted(groups1)
    options = []
    for key in keys:
        g1, g2 = groups1[key], groups2[key]
        # put shared ids in matching positions so the first permutation keeps them
        shared = [x for x in g1 if x in g2]
        g2 = shared + [x for x in g2 if x not in shared]
        g1 = shared + [x for x in g1 if x not in shared]
        options.append([(g1, perm) for perm in permutations(g2)])
    for choice in islice(product(*options), limit):
        mapping = {}
        for g1, perm in choice:
            mapping.update(zip(g1, perm))
        yield mapping


def relabel_potential(w: PathSum, mapping: dict[int, int], q2: IcedQuiver) -> Potential:
    return Potential(q2, {make_path(q2, tuple(mapping[a] for a in p.arrows)): c for p, c in w.terms.items()}, w.cap)


def sign_equivalent_iqps(p1: IQP, p2: IQP) -> tuple[dict[int, int], dict[int, int]] | None:
    """Arrow bijection and sign map carrying ``p1``'s potential to ``p2``'s."""
    for mapping in arrow_bijections(p1.quiver, p2.quiver):
        w = relabel_potential(p1.potential, mapping, p2.quiver)
        xi = equivalent_up_to_signs(w, p2.potential, p2.quiver)
        if xi is not None:
            return mapping, xi
    return None
