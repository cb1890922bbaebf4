"""Iced quivers and Fomin-Zelevinsky mutation.

Vertices are ``1..n+m``; the last ``m`` of them are frozen.  Arrows carry
stable integer ids so that potentials can point at individual parallel
arrows.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher


class ArrowClass(Enum):
    INTERNAL = "internal"
    BOUNDARY = "boundary"
    EXTERNAL = "external"


@dataclass(frozen=True, order=True)
class Arrow:
    id: int
    src: int
    tgt: int


class QuiverError(ValueError):
    pass


@dataclass(frozen=True)
class IcedQuiver:
    n: int
    m: int
    arrows: tuple[Arrow, ...] = ()

    def __post_init__(self) -> None:
        arrows = tuple(sorted(Arrow(*a) if not isinstance(a, Arrow) else a for a in self.arrows))
        object.__setattr__(self, "arrows", arrows)
        if self.n < 0 or self.m < 0:
            raise QuiverError("negative vertex count")
        seen = set()
        for a in arrows:
            if a.id in seen:
                raise QuiverError(f"duplicate arrow id {a.id}")
            seen.add(a.id)
            if a.src == a.tgt:
                raise QuiverError(f"loop at vertex {a.src} (arrow {a.id})")
            for v in (a.src, a.tgt):
                if not 1 <= v <= self.n + self.m:
                    raise QuiverError(f"vertex {v} out of range in arrow {a.id}")

    # -- basic accessors -------------------------------------------------
    @property
    def num_vertices(self) -> int:
        return self.n + self.m

    @property
    def vertices(self) -> range:
        return range(1, self.n + self.m + 1)

    @property
    def frozen(self) -> range:
        return range(self.n + 1, self.n + self.m + 1)

    def is_frozen(self, v: int) -> bool:
        return v > self.n

    @cached_property
    def _by_id(self) -> dict[int, Arrow]:
        return {a.id: a for a in self.arrows}

    def arrow(self, aid: int) -> Arrow:
        try:
            return self._by_id[aid]
        except KeyError:
            raise QuiverError(f"unknown arrow id {aid}") from None

    def has_arrow(self, aid: int) -> bool:
        return aid in self._by_id

    def src(self, aid: int) -> int:
        return self.arrow(aid).src

    def tgt(self, aid: int) -> int:
        return self.arrow(aid).tgt

    @cached_property
    def _out(self) -> dict[int, tuple[Arrow, ...]]:
        out: dict[int, list[Arrow]] = defaultdict(list)
        for a in self.arrows:
            out[a.src].append(a)
        return {v: tuple(x) for v, x in out.items()}

    @cached_property
    def _in(self) -> dict[int, tuple[Arrow, ...]]:
        inn: dict[int, list[Arrow]] = defaultdict(list)
        for a in self.arrows:
            inn[a.tgt].append(a)
        return {v: tuple(x) for v, x in inn.items()}

    def out_arrows(self, v: int) -> tuple[Arrow, ...]:
        return self._out.get(v, ())

    def in_arrows(self, v: int) -> tuple[Arrow, ...]:
        return self._in.get(v, ())

    def degree(self, v: int) -> int:
        return len(self.out_arrows(v)) + len(self.in_arrows(v))

    @property
    def next_id(self) -> int:
        return max((a.id for a in self.arrows), default=0) + 1

    def multiplicities(self) -> Counter:
        return Counter((a.src, a.tgt) for a in self.arrows)

    def classify(self, aid: int) -> ArrowClass:
        return classify_arrow(self, aid)

    def unexternal_arrows(self) -> list[int]:
        return [a.id for a in self.arrows if classify_arrow(self, a.id) is not ArrowClass.EXTERNAL]

    def with_arrows(self, arrows) -> IcedQuiver:
        return IcedQuiver(self.n, self.m, tuple(arrows))

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "arrows": [[a.id, a.src, a.tgt] for a in self.arrows]}

    @classmethod
    def from_dict(cls, d: dict) -> IcedQuiver:
        return cls(int(d["n"]), int(d["m"]), tuple(Arrow(*map(int, a)) for a in d["arrows"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> IcedQuiver:
        return cls.from_dict(json.loads(s))

    def to_dot(self, labels: dict[int, str] | None = None) -> str:
        labels = labels or {}
        lines = ["digraph Q {"]
        for v in self.vertices:
            shape = "box" if self.is_frozen(v) else "ellipse"
            lines.append(f'  {v} [label="{labels.get(v, v)}", shape={shape}];')
        for a in self.arrows:
            style = ", style=dashed" if classify_arrow(self, a.id) is ArrowClass.EXTERNAL else ""
            lines.append(f'  {a.src} -> {a.tgt} [label="{a.id}"{style}];')
        lines.append("}")
        return "\n".join(lines)


def classify_arrow(q: IcedQuiver, aid: int) -> ArrowClass:
    a = q.arrow(aid)
    fs, ft = q.is_frozen(a.src), q.is_frozen(a.tgt)
    if fs and ft:
        return ArrowClass.EXTERNAL
    if fs or ft:
        return ArrowClass.BOUNDARY
    return ArrowClass.INTERNAL


def principal_part(q: IcedQuiver) -> IcedQuiver:
    keep = [a for a in q.arrows if not q.is_frozen(a.src) and not q.is_frozen(a.tgt)]
    return IcedQuiver(q.n, 0, tuple(keep))


def opposite(q: IcedQuiver) -> IcedQuiver:
    return q.with_arrows(Arrow(a.id, a.tgt, a.src) for a in q.arrows)


@dataclass(frozen=True)
class MutationRecord:
    """Where the new arrows of a mutation came from.

    ``composites`` maps a new id to ``(alpha, beta)`` for the composite of the
    2-path ``beta`` then ``alpha``; ``stars`` maps a new id to the reversed arrow.
    """

    vertex: int
    composites: dict[int, tuple[int, int]] = field(default_factory=dict)
    stars: dict[int, int] = field(default_factory=dict)
    removed: tuple[tuple[int, int], ...] = ()


def two_paths_through(q: IcedQuiver, i: int) -> list[tuple[int, int]]:
    """All pairs ``(alpha, beta)`` with ``beta`` into ``i`` and ``alpha`` out of ``i``."""
    return [(a.id, b.id) for b in q.in_arrows(i) for a in q.out_arrows(i)]


def premutate_arrows(q: IcedQuiver, i: int) -> tuple[list[Arrow], MutationRecord]:
    """Steps (1) and (2) of mutation: composites then stars, ids from one counter."""
    if not 1 <= i <= q.num_vertices:
        raise QuiverError(f"vertex {i} out of range")
    if q.is_frozen(i):
        raise QuiverError(f"vertex {i} is frozen")
    ins = {a.src for a in q.in_arrows(i)}
    if any(a.tgt in ins for a in q.out_arrows(i)):
        raise QuiverError(f"vertex {i} lies on a 2-cycle")
    nid = q.next_id
    composites: dict[int, tuple[int, int]] = {}
    stars: dict[int, int] = {}
    new: list[Arrow] = []
    for alpha, beta in two_paths_through(q, i):
        composites[nid] = (alpha, beta)
        new.append(Arrow(nid, q.src(beta), q.tgt(alpha)))
        nid += 1
    for a in q.arrows:
        if i in (a.src, a.tgt):
            stars[nid] = a.id
            new.append(Arrow(nid, a.tgt, a.src))
            nid += 1
    kept = [a for a in q.arrows if i not in (a.src, a.tgt)]
    return kept + new, MutationRecord(i, composites, stars)


def remove_two_cycles(arrows: list[Arrow]) -> tuple[list[Arrow], list[tuple[int, int]]]:
    """Greedily delete 2-cycles, always taking the pair with the smallest ids first."""
    by_pair: dict[tuple[int, int], list[int]] = defaultdict(list)
    for a in arrows:
        by_pair[(a.src, a.tgt)].append(a.id)
    candidates = []
    for (s, t), ids in by_pair.items():
        back = by_pair.get((t, s))
        if back and s < t:
            candidates.append((s, t))
    removed: list[tuple[int, int]] = []
    dead: set[int] = set()
    for s, t in candidates:
        fwd, back = sorted(by_pair[(s, t)]), sorted(by_pair[(t, s)])
        pairs = []
        # pairing smallest with smallest is what the greedy rule produces
        for x, y in zip(fwd, back):
            pairs.append((min(x, y), max(x, y)))
        removed.extend(pairs)
        for x, y in pairs:
            dead.update((x, y))
    removed.sort()
    return [a for a in arrows if a.id not in dead], removed


def mutate_quiver_record(q: IcedQuiver, i: int) -> tuple[IcedQuiver, MutationRecord]:
    arrows, rec = premutate_arrows(q, i)
    arrows, removed = remove_two_cycles(arrows)
    rec = MutationRecord(i, rec.composites, rec.stars, tuple(removed))
    return q.with_arrows(arrows), rec


def mutate_quiver(q: IcedQuiver, i: int) -> IcedQuiver:
    return mutate_quiver_record(q, i)[0]


def same_up_to_ids(q1: IcedQuiver, q2: IcedQuiver) -> bool:
    """Equal vertex sets and equal arrow multiplicities for every ordered pair."""
    return (q1.n, q1.m) == (q2.n, q2.m) and q1.multiplicities() == q2.multiplicities()


def normalize_ids(q: IcedQuiver) -> IcedQuiver:
    arrows = sorted(q.arrows, key=lambda a: (a.src, a.tgt, a.id))
    return q.with_arrows(Arrow(k, a.src, a.tgt) for k, a in enumerate(arrows, 1))


def _as_digraph(q: IcedQuiver, fix_frozen: bool) -> nx.DiGraph:
    g = nx.DiGraph()
    for v in q.vertices:
        if q.is_frozen(v):
            tag = ("F", v) if fix_frozen else ("F",)
        else:
            tag = ("M",)
        g.add_node(v, tag=tag)
    for (s, t), k in q.multiplicities().items():
        g.add_edge(s, t, mult=k)
    return g


def are_isomorphic(q1: IcedQuiver, q2: IcedQuiver, fix_frozen: bool = True) -> dict[int, int] | None:
    """A vertex bijection ``q1 -> q2`` preserving arrow multiplicities, or ``None``.

    Frozen vertices go to frozen vertices, and to themselves when ``fix_frozen``.
    The identity is tried first so that equal quivers map trivially.
    """
    if (q1.n, q1.m) != (q2.n, q2.m):
        return None
    if same_up_to_ids(q1, q2):
        return {v: v for v in q1.vertices}
    if q1.multiplicities().total() != q2.multiplicities().total():
        return None
    gm = DiGraphMatcher(
        _as_digraph(q1, fix_frozen),
        _as_digraph(q2, fix_frozen),
        node_match=lambda x, y: x["tag"] == y["tag"],
        edge_match=lambda x, y: x["mult"] == y["mult"],
    )
    for mapping in gm.isomorphisms_iter():
        return dict(sorted(mapping.items()))
    return None
