"""Truncated noncommutative polynomials over the paths of a quiver.

A path is stored by its arrows in the order they are traversed.  Products
follow the right-to-left convention: ``x * y`` walks ``y`` first and then
``x``, so the path ``j -b-> i -a-> k`` is the product ``a * b``.
Coefficients are exact rationals.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .quiver_core import IcedQuiver, QuiverError


class PathError(ValueError):
    pass


class CapMismatch(PathError):
    pass


@dataclass(frozen=True, slots=True)
class Path:
    """``arrows`` in traversal order; ``start``/``end`` are the source/target vertex."""

    arrows: tuple[int, ...]
    start: int
    end: int

    def __len__(self) -> int:
        return len(self.arrows)

    @property
    def is_trivial(self) -> bool:
        return not self.arrows

    @property
    def is_cycle(self) -> bool:
        return bool(self.arrows) and self.start == self.end

    def sort_key(self) -> tuple:
        return (len(self.arrows), self.arrows, self.start)

    def __str__(self) -> str:
        if not self.arrows:
            return f"e{self.start}"
        return ".".join(str(a) for a in reversed(self.arrows))


def trivial(v: int) -> Path:
    return Path((), v, v)


def make_path(q: IcedQuiver, arrows: Iterable[int]) -> Path:
    """Path from arrow ids in traversal order, checking composability."""
    arrows = tuple(arrows)
    if not arrows:
        raise PathError("use trivial(v) for length-0 paths")
    for x, y in zip(arrows, arrows[1:]):
        if q.tgt(x) != q.src(y):
            raise PathError(f"arrows {x} and {y} do not compose")
    return Path(arrows, q.src(arrows[0]), q.tgt(arrows[-1]))


def product_path(q: IcedQuiver, *factors: int) -> Path:
    """Path written as a product, leftmost factor last: ``product_path(q, a, b)`` is ``ab``."""
    return make_path(q, reversed(factors))


def compose(p: Path, r: Path) -> Path | None:
    """``p * r`` (``r`` first) or ``None`` when they do not compose."""
    if r.end != p.start:
        return None
    if not r.arrows:
        return p
    if not p.arrows:
        return r
    return Path(r.arrows + p.arrows, r.start, p.end)


def rotations(c: Path, q: IcedQuiver) -> list[Path]:
    if not c.is_cycle:
        raise PathError("not a cycle")
    arr = c.arrows
    out = []
    for k in range(len(arr)):
        rot = arr[k:] + arr[:k]
        v = q.src(rot[0])
        out.append(Path(rot, v, v))
    return out


def canonical_rotation(c: Path, q: IcedQuiver) -> Path:
    """The rotation whose traversal id sequence is lexicographically smallest."""
    if not c.is_cycle:
        raise PathError("not a cycle")
    arr = c.arrows
    best = min(range(len(arr)), key=lambda k: (arr[k:] + arr[:k], k))
    rot = arr[best:] + arr[:best]
    v = q.src(rot[0])
    return Path(rot, v, v)


def cyclically_equivalent(c1: Path, c2: Path, q: IcedQuiver) -> bool:
    return canonical_rotation(c1, q) == canonical_rotation(c2, q)


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class PathSum:
    """Finite sum of paths with rational coefficients, truncated above ``cap``."""

    __slots__ = ("quiver", "cap", "terms")

    def __init__(self, quiver: IcedQuiver, terms: Mapping[Path, object] | None = None, cap: int = 16):
        self.quiver = quiver
        self.cap = cap
        clean: dict[Path, Fraction] = {}
        for p, c in (terms or {}).items():
            if len(p) > cap:
                continue
            c = _frac(c)
            if c:
                clean[p] = clean.get(p, 0) + c
                if not clean[p]:
                    del clean[p]
        self.terms = clean

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, q: IcedQuiver, cap: int) -> PathSum:
        return cls(q, {}, cap)

    @classmethod
    def of(cls, q: IcedQuiver, path: Path, cap: int, coeff=1) -> PathSum:
        return cls(q, {path: coeff}, cap)

    @classmethod
    def arrow(cls, q: IcedQuiver, aid: int, cap: int, coeff=1) -> PathSum:
        return cls(q, {make_path(q, (aid,)): coeff}, cap)

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: PathSum) -> None:
        if self.cap != other.cap:
            raise CapMismatch(f"caps differ: {self.cap} vs {other.cap}")
        if self.quiver is not other.quiver and self.quiver != other.quiver:
            raise PathError("path sums over different quivers")

    def _new(self, terms: dict[Path, Fraction]) -> PathSum:
        out = object.__new__(type(self))
        out.quiver, out.cap, out.terms = self.quiver, self.cap, terms
        return out

    def __add__(self, other: PathSum) -> PathSum:
        self._check(other)
        terms = dict(self.terms)
        for p, c in other.terms.items():
            v = terms.get(p, 0) + c
            if v:
                terms[p] = v
            else:
                terms.pop(p, None)
        return self._new(terms)

    def __neg__(self) -> PathSum:
        return self._new({p: -c for p, c in self.terms.items()})

    def __sub__(self, other: PathSum) -> PathSum:
        return self + (-other)

    def scale(self, c) -> PathSum:
        c = _frac(c)
        if not c:
            return self._new({})
        return self._new({p: c * x for p, x in self.terms.items()})

    def __mul__(self, other: PathSum) -> PathSum:
        self._check(other)
        terms: dict[Path, Fraction] = {}
        for p, c in self.terms.items():
            for r, d in other.terms.items():
                if len(p) + len(r) > self.cap:
                    continue
                pr = compose(p, r)
                if pr is None:
                    continue
                v = terms.get(pr, 0) + c * d
                if v:
                    terms[pr] = v
                else:
                    del terms[pr]
        return PathSum(self.quiver, terms, self.cap)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PathSum):
            return NotImplemented
        return self.cap == other.cap and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def truncate(self, cap: int) -> PathSum:
        return PathSum(self.quiver, {p: c for p, c in self.terms.items() if len(p) <= cap}, cap)

    def with_cap(self, cap: int) -> PathSum:
        return PathSum(self.quiver, self.terms, cap)

    def sorted_terms(self) -> list[tuple[Path, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: t[0].sort_key())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for p, c in self.sorted_terms():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coeff = "" if mag == 1 else f"{mag}*"
            parts.append(f"{sign} {coeff}{p}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s

    __repr__ = __str__

    # -- serialization ---------------------------------------------------
    def to_list(self) -> list:
        return [[c.numerator, c.denominator, list(p.arrows)] for p, c in self.sorted_terms() if p.arrows]

    @classmethod
    def from_list(cls, q: IcedQuiver, data: list, cap: int) -> PathSum:
        return cls(q, {make_path(q, ids): Fraction(num, den) for num, den, ids in data}, cap)

    def to_json(self) -> str:
        return json.dumps(self.to_list())


class Potential(PathSum):
    """A path sum of cycles, each stored in canonical rotation."""

    __slots__ = ()

    def __init__(self, quiver: IcedQuiver, terms: Mapping[Path, object] | None = None, cap: int = 16):
        canon: dict[Path, Fraction] = {}
        for p, c in (terms or {}).items():
            if not p.is_cycle:
                raise PathError(f"potential term {p} is not a cycle")
            key = canonical_rotation(p, quiver)
            canon[key] = canon.get(key, 0) + _frac(c)
        super().__init__(quiver, canon, cap)

    @classmethod
    def from_pathsum(cls, x: PathSum) -> Potential:
        return cls(x.quiver, {p: c for p, c in x.terms.items() if p.arrows}, x.cap)

    def __add__(self, other: PathSum) -> Potential:
        return Potential.from_pathsum(PathSum.__add__(self, other))

    def __neg__(self) -> Potential:
        return self._new({p: -c for p, c in self.terms.items()})

    def __sub__(self, other: PathSum) -> Potential:
        return self + (-other)

    def scale(self, c) -> Potential:
        return Potential.from_pathsum(PathSum.scale(self, c))

    @classmethod
    def from_list(cls, q: IcedQuiver, data: list, cap: int) -> Potential:
        return cls(q, {make_path(q, ids): Fraction(num, den) for num, den, ids in data}, cap)


def cyclic_derivative(w: PathSum, aid: int) -> PathSum:
    """``d_a`` of a potential: for each occurrence of ``a`` in a cycle, the rest of
    the cycle read from just after ``a`` back round to just before it."""
    q = w.quiver
    terms: dict[Path, Fraction] = {}
    if not q.has_arrow(aid):
        return PathSum(q, {}, w.cap)
    for p, c in w.terms.items():
        arr = p.arrows
        for k, x in enumerate(arr):
            if x != aid:
                continue
            rest = arr[k + 1:] + arr[:k]
            if rest:
                path = Path(rest, q.tgt(aid), q.src(aid))
            else:
                path = trivial(q.tgt(aid))
            terms[path] = terms.get(path, 0) + c
    return PathSum(q, terms, w.cap)


def apply_endomorphism(
    phi: Mapping[int, PathSum] | Callable[[int], PathSum | None],
    x: PathSum,
    cap: int | None = None,
    target: IcedQuiver | None = None,
) -> PathSum:
    """Image of ``x`` under the algebra map fixing vertices and sending ``a`` to ``phi(a)``.

    Arrows missing from ``phi`` are fixed.  ``target`` is the quiver of the image
    when ``phi`` maps into a different arrow set (defaults to ``x.quiver``).
    """
    cap = x.cap if cap is None else cap
    q = x.quiver
    tq = target or q
    get = phi.get if isinstance(phi, Mapping) else phi
    images: dict[int, PathSum] = {}

    def image(a: int) -> PathSum:
        if a not in images:
            img = get(a)
            if img is None:
                img = PathSum.arrow(tq, a, cap)
            else:
                for p in img.terms:
                    if (p.start, p.end) != (q.src(a), q.tgt(a)):
                        raise PathError(f"image of arrow {a} is not parallel to it")
                img = PathSum(tq, img.terms, cap)
            images[a] = img
        return images[a]

    total: dict[Path, Fraction] = {}
    for p, c in x.terms.items():
        if not p.arrows:
            total[p] = total.get(p, 0) + c
            continue
        acc = image(p.arrows[0])
        for a in p.arrows[1:]:
            acc = image(a) * acc
            if not acc:
                break
        for r, d in acc.terms.items():
            total[r] = total.get(r, 0) + c * d
    out = PathSum(tq, total, cap)
    if isinstance(x, Potential):
        return Potential.from_pathsum(out)
    return out


def m_adic_order(x: PathSum) -> float:
    if not x.terms:
        return math.inf
    return min(len(p) for p in x.terms)


def longest_cycle_len(w: PathSum) -> int:
    return max((len(p) for p in w.terms), default=0)


def path_power(p: Path, k: int) -> Path:
    if not p.is_cycle:
        raise PathError("powers need a cycle")
    return Path(p.arrows * k, p.start, p.end)


def paths_from(q: IcedQuiver, v: int, max_len: int) -> list[Path]:
    """All paths starting at ``v`` of length ``<= max_len`` (including ``e_v``)."""
    out = [trivial(v)]
    frontier = [trivial(v)]
    for _ in range(max_len):
        nxt = []
        for p in frontier:
            for a in q.out_arrows(p.end):
                nxt.append(Path(p.arrows + (a.id,), p.start, a.tgt))
        out.extend(nxt)
        frontier = nxt
    return out


def all_paths(q: IcedQuiver, max_len: int) -> list[Path]:
    out = []
    for v in q.vertices:
        out.extend(paths_from(q, v, max_len))
    return out


def cycles_up_to(q: IcedQuiver, max_len: int) -> list[Path]:
    """One representative (canonical rotation) per cyclic class of length ``<= max_len``."""
    seen: set[Path] = set()
    for p in all_paths(q, max_len):
        if p.is_cycle:
            seen.add(canonical_rotation(p, q))
    return sorted(seen, key=Path.sort_key)


__all__ = [
    "CapMismatch",
    "Path",
    "PathError",
    "PathSum",
    "Potential",
    "QuiverError",
    "all_paths",
    "apply_endomorphism",
    "canonical_rotation",
    "compose",
    "cycles_up_to",
    "cyclic_derivative",
    "cyclically_equivalent",
    "longest_cycle_len",
    "m_adic_order",
    "make_path",
    "path_power",
    "paths_from",
    "product_path",
    "rotations",
    "trivial",
]
