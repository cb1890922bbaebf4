"""Jacobian ideals cut off at a path-length bound.

Everything decomposes by (source, target) vertex pairs, so echelon forms
are kept per block.  Columns are ordered by path length and then arrow ids,
and the leading entry of a row is its shortest path: the surviving (non
leading) paths of length ``d`` then count the associated graded quotient in
degree ``d``.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction

from .path_algebra import (
    Path,
    PathSum,
    all_paths,
    canonical_rotation,
    cyclic_derivative,
    cycles_up_to,
    path_power,
    paths_from,
    trivial,
)
from .qp import IQP
from .quiver_core import IcedQuiver


class CapExceeded(ValueError):
    pass


def jacobian_generators(p: IQP) -> dict[int, PathSum]:
    """``d_a W`` for every internal or boundary arrow ``a``."""
    return {a: cyclic_derivative(p.potential, a) for a in p.quiver.unexternal_arrows()}


def _paths_into(q: IcedQuiver, v: int, max_len: int) -> list[Path]:
    out = [trivial(v)]
    frontier = [trivial(v)]
    for _ in range(max_len):
        nxt = []
        for r in frontier:
            for a in q.in_arrows(r.start):
                nxt.append(Path((a.id,) + r.arrows, a.src, r.end))
        out.extend(nxt)
        frontier = nxt
    return out


class _Echelon:
    """Incremental row echelon form over the rationals with shortest-path leads."""

    __slots__ = ("rows",)

    def __init__(self) -> None:
        self.rows: dict[tuple, dict[tuple, Fraction]] = {}

    def reduce(self, row: dict[tuple, Fraction]) -> dict[tuple, Fraction]:
        row = dict(row)
        while row:
            lead = min(row)
            piv = self.rows.get(lead)
            if piv is None:
                return row
            c = row[lead]
            for col, v in piv.items():
                nv = row.get(col, 0) - c * v
                if nv:
                    row[col] = nv
                else:
                    row.pop(col, None)
        return row

    def add(self, row: dict[tuple, Fraction]) -> bool:
        row = self.reduce(row)
        if not row:
            return False
        lead = min(row)
        c = row[lead]
        if c != 1:
            row = {k: v / c for k, v in row.items()}
        self.rows[lead] = row
        return True


def _key(p: Path) -> tuple:
    return (len(p.arrows), p.arrows)


@dataclass
class IdealBasis:
    """Echelon form of ``J`` modulo paths of length ``>= cap``."""

    iqp: IQP
    cap: int
    blocks: dict[tuple[int, int], _Echelon] = field(default_factory=dict)
    max_generator_degree: int = 0

    @classmethod
    def build(cls, p: IQP, cap: int) -> IdealBasis:
        q = p.quiver
        gens = [g for g in jacobian_generators(p).values() if g.terms]
        basis = cls(p, cap)
        basis.max_generator_degree = max((max(len(t) for t in g.terms) for g in gens), default=0)
        blocks: dict[tuple[int, int], _Echelon] = defaultdict(_Echelon)
        left_cache: dict[int, list[Path]] = {}
        right_cache: dict[int, list[Path]] = {}
        for g in gens:
            terms = [(t, c) for t, c in g.terms.items() if len(t) < cap]
            if not terms:
                continue
            s, t_ = terms[0][0].start, terms[0][0].end
            low = min(len(t) for t, _ in terms)
            room = cap - 1 - low
            if t_ not in left_cache:
                left_cache[t_] = paths_from(q, t_, cap - 1)
            if s not in right_cache:
                right_cache[s] = _paths_into(q, s, cap - 1)
            lefts = [x for x in left_cache[t_] if len(x) <= room]
            rights = [x for x in right_cache[s] if len(x) <= room]
            for r in rights:
                for lft in lefts:
                    if len(r) + len(lft) > room:
                        continue
                    row: dict[tuple, Fraction] = {}
                    for path, c in terms:
                        total = len(r) + len(path) + len(lft)
                        if total >= cap:
                            continue
                        key = (total, r.arrows + path.arrows + lft.arrows)
                        row[key] = row.get(key, 0) + c
                    row = {k: v for k, v in row.items() if v}
                    if row:
                        blocks[(r.start, lft.end)].add(row)
        basis.blocks = dict(blocks)
        return basis

    # -- queries -----------------------------------------------------------------
    def surviving_paths(self) -> list[Path]:
        q = self.iqp.quiver
        out = []
        for p in all_paths(q, self.cap - 1):
            blk = self.blocks.get((p.start, p.end))
            if blk is None or _key(p) not in blk.rows:
                out.append(p)
        return out

    def quotient_dimension(self) -> tuple[int, bool]:
        surv = self.surviving_paths()
        by_len = defaultdict(int)
        for p in surv:
            by_len[len(p)] += 1
        n = self.cap
        top_clear = by_len.get(n - 1, 0) == 0 and by_len.get(n - 2, 0) == 0
        longest = max((len(p) for p in surv), default=0)
        stabilized = top_clear and longest <= n - self.max_generator_degree
        return len(surv), stabilized

    def graded_counts(self) -> list[int]:
        by_len = [0] * self.cap
        for p in self.surviving_paths():
            by_len[len(p)] += 1
        return by_len

    @property
    def stabilized(self) -> bool:
        return self.quotient_dimension()[1]

    def contains(self, x: PathSum) -> bool:
        terms = {}
        for p, c in x.terms.items():
            if not p.arrows:
                return False if c else True
            if len(p) >= self.cap:
                if not self._nilpotent_below(len(p)):
                    raise CapExceeded(f"term of length {len(p)} beyond cap {self.cap}")
                continue
            terms.setdefault((p.start, p.end), {})[_key(p)] = c
        for blk_key, row in terms.items():
            blk = self.blocks.get(blk_key)
            if blk is None:
                if any(row.values()):
                    return False
                continue
            if blk.reduce(row):
                return False
        return True

    def _nilpotent_below(self, length: int) -> bool:
        counts = self.graded_counts()
        # no survivors in some degree d <= length means every path of length >= d lies in J
        return any(counts[d] == 0 for d in range(1, min(length, self.cap - 1) + 1))


def quotient_dimension(p: IQP, cap: int) -> tuple[int, bool]:
    if cap < 2:
        raise ValueError("cap must be at least 2")
    return IdealBasis.build(p, cap).quotient_dimension()


def is_in_ideal(x: PathSum, basis: IdealBasis) -> bool:
    return basis.contains(x)


# -- rigidity ---------------------------------------------------------------------

@dataclass
class RigidityReport:
    cap: int
    rigid_up_to_cap: bool
    stabilized: bool
    witnesses: list[Path]

    @property
    def partial(self) -> bool:
        return not self.stabilized

    @property
    def rigid(self) -> bool:
        return self.rigid_up_to_cap and self.stabilized

    def to_dict(self) -> dict:
        return {
            "cap": self.cap,
            "rigid_up_to_cap": self.rigid_up_to_cap,
            "stabilized": self.stabilized,
            "partial": self.partial,
            "witnesses": [list(w.arrows) for w in self.witnesses],
        }


def _cyclic_span(basis: IdealBasis) -> _Echelon:
    q = basis.iqp.quiver
    ech = _Echelon()
    for (s, t), blk in sorted(basis.blocks.items()):
        if s != t:
            continue
        for row in blk.rows.values():
            img: dict[tuple, Fraction] = {}
            for (ln, arrows), c in row.items():
                if not arrows:
                    continue
                rep = canonical_rotation(Path(arrows, s, s), q)
                key = _key(rep)
                img[key] = img.get(key, 0) + c
            img = {k: v for k, v in img.items() if v}
            if img:
                ech.add(img)
    return ech


def rigidity_certificate(p: IQP, cap: int, basis: IdealBasis | None = None) -> RigidityReport:
    """Check every cycle of length below ``cap`` against ``J`` plus rotation differences."""
    basis = basis or IdealBasis.build(p, cap)
    _, stab = basis.quotient_dimension()
    span = _cyclic_span(basis)
    witnesses = []
    for c in cycles_up_to(p.quiver, cap - 1):
        if span.reduce({_key(c): Fraction(1)}):
            witnesses.append(c)
    return RigidityReport(cap, not witnesses, stab, witnesses)


def in_cyclic_closure(x: PathSum, basis: IdealBasis) -> bool:
    """Whether a sum of cycles lies in ``J`` plus rotation differences (below the cap)."""
    q = basis.iqp.quiver
    row: dict[tuple, Fraction] = {}
    for p, c in x.terms.items():
        if len(p) >= basis.cap:
            raise CapExceeded(f"cycle of length {len(p)} beyond cap {basis.cap}")
        key = _key(canonical_rotation(p, q))
        row[key] = row.get(key, 0) + c
    row = {k: v for k, v in row.items() if v}
    return not _cyclic_span(basis).reduce(row)


# -- finiteness ----------------------------------------------------------------------

@dataclass
class FinitenessVerdict:
    stabilized: bool
    dimension: int | None
    caps: list[int]
    dims: list[int]

    def __str__(self) -> str:
        if self.stabilized:
            return f"Stabilized({self.dimension})"
        return f"GrowingThrough({self.caps[-1]})"

    def to_dict(self) -> dict:
        return {"verdict": str(self), "caps": self.caps, "dims": self.dims}


def jacobi_finite_probe(p: IQP, caps: list[int]) -> FinitenessVerdict:
    caps = sorted(caps)
    dims, flags = [], []
    for n in caps:
        d, s = quotient_dimension(p, n)
        dims.append(d)
        flags.append(s)
    settled = flags[-1] and (len(dims) < 2 or dims[-1] == dims[-2])
    return FinitenessVerdict(settled, dims[-1] if settled else None, caps, dims)


# -- essential length -------------------------------------------------------------------

def binomial_relations(p: IQP) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs ``(u, u')`` of paths with ``d_a W = c (u - u')``."""
    rels = []
    for g in jacobian_generators(p).values():
        if len(g.terms) != 2:
            continue
        (u, cu), (v, cv) = g.terms.items()
        if cu == -cv:
            rels.append((u.arrows, v.arrows))
    return rels


def _rotate_to(c: Path, v: int, q: IcedQuiver) -> Path | None:
    arr = c.arrows
    for k in range(len(arr)):
        if q.src(arr[k]) == v:
            rot = arr[k:] + arr[:k]
            return Path(rot, v, v)
    return None


def essential_length(
    l: Path,
    p: IQP,
    fundamental: list[Path],
    basis: IdealBasis | None = None,
    max_len: int | None = None,
) -> tuple[int, Path] | None:
    """Smallest ``m`` with ``l`` equal to ``w**m`` for a fundamental cycle ``w`` at
    ``l``'s endpoint, where paths are identified by binomial Jacobian relations
    (replacing one side of ``d_a W = u - u'`` by the other inside a path).

    Paths longer than ``max_len`` are not explored.  When ``basis`` is given the
    difference ``l - w**m`` is also confirmed to lie in its ideal.
    """
    q = p.quiver
    if not l.is_cycle:
        raise ValueError("essential length needs a cycle")
    v = l.start
    max_len = max_len or (basis.cap - 1 if basis else 2 * len(l) + 4)
    at_v = {}
    for w in fundamental:
        r = _rotate_to(w, v, q)
        if r is not None:
            at_v[r.arrows] = r
    rules = []
    for u, u2 in binomial_relations(p):
        rules.append((u, u2))
        rules.append((u2, u))

    def power_of(arrows: tuple[int, ...]) -> tuple[int, Path] | None:
        for w_arr, w in at_v.items():
            lw = len(w_arr)
            if len(arrows) % lw == 0 and arrows == w_arr * (len(arrows) // lw):
                return len(arrows) // lw, w
        return None

    seen = {l.arrows}
    dq = deque([l.arrows])
    best: tuple[int, Path] | None = None
    while dq:
        cur = dq.popleft()
        hit = power_of(cur)
        if hit and (best is None or hit[0] < best[0]):
            best = hit
        for u, u2 in rules:
            lu = len(u)
            start = 0
            while True:
                j = _find(cur, u, start)
                if j < 0:
                    break
                nxt = cur[:j] + u2 + cur[j + lu:]
                if len(nxt) <= max_len and nxt not in seen:
                    seen.add(nxt)
                    dq.append(nxt)
                start = j + 1
    if best and basis is not None:
        m, w = best
        diff = PathSum(q, {l: 1}, max(basis.cap, len(l) + len(w) * m)) - PathSum(q, {path_power(w, m): 1}, max(basis.cap, len(l) + len(w) * m))
        if diff and not _safe_contains(basis, diff):
            raise AssertionError("binomial rewriting left the ideal")
    return best


def _safe_contains(basis: IdealBasis, x: PathSum) -> bool:
    try:
        return basis.contains(x)
    except CapExceeded:
        return True


def _find(seq: tuple[int, ...], sub: tuple[int, ...], start: int) -> int:
    n, m = len(seq), len(sub)
    for j in range(start, n - m + 1):
        if seq[j:j + m] == sub:
            return j
    return -1


def random_cycle(q: IcedQuiver, max_len: int, rng) -> Path | None:
    """A random closed walk of length at most ``max_len`` (rejection sampling)."""
    for _ in range(1000):
        v = rng.choice(list(q.vertices))
        arrows = []
        cur = v
        target_len = rng.randint(2, max_len)
        for _ in range(target_len):
            outs = q.out_arrows(cur)
            if not outs:
                break
            a = rng.choice(outs)
            arrows.append(a.id)
            cur = a.tgt
            if cur == v and len(arrows) >= 2 and rng.random() < 0.35:
                break
        if arrows and cur == v:
            return Path(tuple(arrows), v, v)
    return None
