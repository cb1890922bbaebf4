"""Postnikov diagrams in their dual form: a planar iced quiver with its faces.

The diagram is stored as the quiver with an arrow at every boundary marked
point (the dimer-style completion).  Arrows at anticlockwise markers are
*virtual*: they close the boundary faces but do not belong to the quiver
with clockwise external arrows only.  Faces are directed cycles of the
completed quiver, tagged CW or ACW; a face is *closed* when it uses no
virtual arrow.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum

from .path_algebra import Path, Potential, canonical_rotation, make_path
from .qp import IQP, DEFAULT_CAP
from .quiver_core import (
    Arrow,
    ArrowClass,
    IcedQuiver,
    classify_arrow,
    premutate_arrows,
    principal_part,
)

CW, ACW = "CW", "ACW"


def other(t: str) -> str:
    return ACW if t == CW else CW


class Variant(Enum):
    TYPE1 = "type1"  # no external arrows
    TYPE2 = "type2"  # principal part
    TYPE3 = "type3"  # external arrows at clockwise markers
    COMPLETE = "bkm"  # external arrows at every marker

    @classmethod
    def parse(cls, s: str | Variant) -> Variant:
        if isinstance(s, Variant):
            return s
        key = s.lower()
        roman = {"typei": "type1", "typeii": "type2", "typeiii": "type3"}
        try:
            return cls(roman.get(key, key))
        except ValueError:
            raise ValueError(f"unknown variant {s!r}") from None


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class Face:
    arrows: tuple[int, ...]
    orient: str


def _rotate_min(arrows: tuple[int, ...]) -> tuple[int, ...]:
    k = min(range(len(arrows)), key=lambda j: arrows[j:] + arrows[:j])
    return arrows[k:] + arrows[:k]


@dataclass(frozen=True)
class FaceDiagram:
    k: int
    full: IcedQuiver
    virtual: frozenset[int]
    faces: tuple[Face, ...]
    boundary: tuple[int, ...]
    levels: dict = field(default_factory=dict, compare=False)
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        faces = tuple(Face(_rotate_min(tuple(f.arrows)), f.orient) for f in self.faces)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "virtual", frozenset(self.virtual))

    @property
    def n(self) -> int:
        return len(self.boundary)

    @property
    def quiver(self) -> IcedQuiver:
        return self.variant_quiver(Variant.TYPE3)

    def is_closed(self, f: Face) -> bool:
        return not any(a in self.virtual for a in f.arrows)

    def variant_quiver(self, v: Variant | str) -> IcedQuiver:
        v = Variant.parse(v)
        q = self.full
        if v is Variant.COMPLETE:
            return q
        real = [a for a in q.arrows if a.id not in self.virtual]
        if v is Variant.TYPE3:
            return q.with_arrows(real)
        q3 = q.with_arrows(real)
        no_ext = [a for a in real if classify_arrow(q3, a.id) is not ArrowClass.EXTERNAL]
        q1 = q.with_arrows(no_ext)
        if v is Variant.TYPE1:
            return q1
        return principal_part(q1)

    # -- incidence -----------------------------------------------------------
    def faces_of(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for j, f in enumerate(self.faces):
            for a in f.arrows:
                out[a].append(j)
        return out

    def next_in_face(self) -> dict[tuple[int, str], int]:
        """``(a, T) -> b``: the arrow after ``a`` in the face of type ``T`` holding ``a``."""
        nxt: dict[tuple[int, str], int] = {}
        for f in self.faces:
            arr = f.arrows
            for j, a in enumerate(arr):
                nxt[(a, f.orient)] = arr[(j + 1) % len(arr)]
        return nxt

    def rotation(self) -> dict[int, list[int]]:
        """Anticlockwise order of the arrows at each vertex, read off face corners.

        At a frozen vertex the list starts just after the outer region.
        """
        q = self.full
        succ: dict[int, dict[int, int]] = defaultdict(dict)
        for f in self.faces:
            arr = f.arrows
            for j, x in enumerate(arr):
                y = arr[(j + 1) % len(arr)]
                v = q.tgt(x)
                if f.orient == CW:
                    succ[v][x] = y
                else:
                    succ[v][y] = x
        rot: dict[int, list[int]] = {}
        for v in q.vertices:
            inc = [a.id for a in q.in_arrows(v)] + [a.id for a in q.out_arrows(v)]
            if not inc:
                rot[v] = []
                continue
            s = succ.get(v, {})
            has_pred = set(s.values())
            starts = [a for a in inc if a not in has_pred]
            start = min(starts) if starts else min(inc)
            order = [start]
            while order[-1] in s and s[order[-1]] != start and len(order) <= len(inc):
                order.append(s[order[-1]])
            rot[v] = order
        return rot

    def boundary_arrows(self) -> list[int | None]:
        """The arrow at marker ``i`` (between ``boundary[i]`` and ``boundary[i+1]``)."""
        fo = self.faces_of()
        out: list[int | None] = []
        n = self.n
        for i in range(n):
            u, v = self.boundary[i], self.boundary[(i + 1) % n]
            cands = [
                a.id for a in self.full.arrows
                if {a.src, a.tgt} == {u, v} and len(fo.get(a.id, ())) == 1
            ]
            out.append(cands[0] if len(cands) == 1 else None)
        return out

    def markers(self) -> list[str]:
        """``CW`` where the quiver has the forward external arrow, ``ACW`` otherwise."""
        out = []
        for i, a in enumerate(self.boundary_arrows()):
            out.append(ACW if a is None or a in self.virtual else CW)
        return out

    def fundamental_cycles(self, variant: Variant | str = Variant.TYPE3) -> list[tuple[Path, str, ArrowClass]]:
        """Closed faces of the variant as cycles, with their class.

        A cycle is internal when all its arrows are, external when it has an
        external arrow, and boundary otherwise.
        """
        q = self.variant_quiver(variant)
        out = []
        for f in self.faces:
            if not all(q.has_arrow(a) for a in f.arrows):
                continue
            classes = {classify_arrow(q, a) for a in f.arrows}
            if classes == {ArrowClass.INTERNAL}:
                c = ArrowClass.INTERNAL
            elif ArrowClass.EXTERNAL in classes:
                c = ArrowClass.EXTERNAL
            else:
                c = ArrowClass.BOUNDARY
            out.append((canonical_rotation(make_path(q, f.arrows), q), f.orient, c))
        return out

    def level_of(self, f: Face) -> int | None:
        return self.levels.get(f.arrows)

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        d = self.quiver.to_dict()
        d["k"] = self.k
        d["virtual_arrows"] = [[a.id, a.src, a.tgt] for a in self.full.arrows if a.id in self.virtual]
        d["rotation"] = {str(v): r for v, r in self.rotation().items()}
        d["faces"] = [[list(f.arrows), f.orient, self.is_closed(f)] for f in self.faces]
        d["boundary"] = list(self.boundary)
        d["markers"] = self.markers()
        d["levels"] = [[list(k), v] for k, v in sorted(self.levels.items())]
        if self.labels:
            d["labels"] = {str(v): s for v, s in self.labels.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> FaceDiagram:
        arrows = [Arrow(*map(int, a)) for a in d["arrows"]]
        virt = [Arrow(*map(int, a)) for a in d.get("virtual_arrows", [])]
        full = IcedQuiver(int(d["n"]), int(d["m"]), tuple(arrows + virt))
        faces = tuple(Face(tuple(f[0]), f[1]) for f in d["faces"])
        levels = {tuple(k): v for k, v in d.get("levels", [])}
        labels = {int(v): s for v, s in d.get("labels", {}).items()}
        return cls(int(d["k"]), full, frozenset(a.id for a in virt), faces, tuple(d["boundary"]), levels, labels)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dot(self) -> str:
        q = self.full
        lines = ["digraph D {"]
        for v in q.vertices:
            shape = "box" if q.is_frozen(v) else "ellipse"
            lines.append(f'  {v} [label="{self.labels.get(v, v)}", shape={shape}];')
        for a in q.arrows:
            attrs = [f'label="{a.id}"']
            if classify_arrow(q, a.id) is ArrowClass.EXTERNAL:
                attrs.append("style=dotted" if a.id in self.virtual else "style=dashed")
            lines.append(f"  {a.src} -> {a.tgt} [{', '.join(attrs)}];")
        for j, f in enumerate(self.faces):
            lines.append(f"  // face {j} {f.orient}: {' '.join(map(str, f.arrows))}")
        lines.append("}")
        return "\n".join(lines)

    def to_tikz(self, coords: dict[int, tuple[float, float]] | None = None) -> str:
        coords = coords or _circle_coords(self)
        lines = ["\\begin{tikzpicture}[scale=1.5]"]
        for f in self.faces:
            pts = " -- ".join(f"({coords[self.full.src(a)][0]:.3f},{coords[self.full.src(a)][1]:.3f})" for a in f.arrows)
            shade = "gray!25" if f.orient == CW else "gray!8"
            lines.append(f"  \\fill[{shade}] {pts} -- cycle;")
        for v in self.full.vertices:
            x, y = coords[v]
            lines.append(f"  \\node ({v}) at ({x:.3f},{y:.3f}) {{{self.labels.get(v, v)}}};")
        for a in self.full.arrows:
            style = "->, dotted" if a.id in self.virtual else "->"
            lines.append(f"  \\draw[{style}] ({a.src}) -- ({a.tgt});")
        lines.append("\\end{tikzpicture}")
        return "\n".join(lines)


def _circle_coords(fd: FaceDiagram) -> dict[int, tuple[float, float]]:
    coords = {}
    n = fd.n
    for j, v in enumerate(fd.boundary):
        t = math.pi / 2 - 2 * math.pi * j / n
        coords[v] = (math.cos(t), math.sin(t))
    inner = [v for v in fd.full.vertices if not fd.full.is_frozen(v)]
    for j, v in enumerate(inner):
        t = 2 * math.pi * j / max(len(inner), 1)
        coords[v] = (0.5 * math.cos(t), 0.5 * math.sin(t))
    return coords


# -- construction from an embedding --------------------------------------------

def diagram_from_embedding(
    k: int,
    n_mut: int,
    boundary: list[int],
    arrows: list[tuple[int, int]],
    coords: dict[int, tuple[float, float]],
    labels: dict[int, str] | None = None,
    level_fn=None,
) -> FaceDiagram:
    """Build a diagram from a straight-line embedding.

    ``arrows`` must not contain arrows between consecutive boundary vertices;
    those are added here, oriented so that each boundary face is a directed
    cycle.  Boundary vertices are listed clockwise and must be ``n_mut+1..``.
    """
    nb = len(boundary)
    if sorted(boundary) != list(range(n_mut + 1, n_mut + nb + 1)):
        raise DiagramError("boundary must list the frozen vertices")
    edges: list[list[int]] = [[s, t] for s, t in arrows]
    bd_edges = []
    for i in range(nb):
        bd_edges.append(len(edges))
        edges.append([boundary[i], boundary[(i + 1) % nb]])
    inc: dict[int, list[tuple[float, int]]] = defaultdict(list)
    for e, (s, t) in enumerate(edges):
        for u, w in ((s, t), (t, s)):
            ang = math.atan2(coords[w][1] - coords[u][1], coords[w][0] - coords[u][0])
            inc[u].append((ang, e))
    for u in inc:
        inc[u].sort()
    pos = {(u, e): j for u in inc for j, (_, e) in enumerate(inc[u])}

    def other_end(e: int, u: int) -> int:
        s, t = edges[e]
        return t if u == s else s

    seen: set[tuple[int, int]] = set()
    raw_faces: list[list[tuple[int, int]]] = []
    for e in range(len(edges)):
        for u in edges[e]:
            if (u, e) in seen:
                continue
            face = []
            cur_u, cur_e = u, e
            while (cur_u, cur_e) not in seen:
                seen.add((cur_u, cur_e))
                face.append((cur_u, cur_e))
                v = other_end(cur_e, cur_u)
                j = pos[(v, cur_e)]
                nxt_e = inc[v][(j - 1) % len(inc[v])][1]
                cur_u, cur_e = v, nxt_e
            raw_faces.append(face)

    def area(face) -> float:
        s = 0.0
        for u, e in face:
            v = other_end(e, u)
            s += coords[u][0] * coords[v][1] - coords[v][0] * coords[u][1]
        return s / 2

    bounded = [f for f in raw_faces if area(f) > 1e-12]
    # orient boundary edges so that their (unique) bounded face is a directed cycle
    bd_set = set(bd_edges)
    for f in bounded:
        for idx, (u, e) in enumerate(f):
            if e in bd_set:
                # the darts of f run anticlockwise; decide the direction from a neighbour
                prev_u, prev_e = f[idx - 1]
                prev_forward = edges[prev_e][0] == prev_u
                if prev_forward:
                    edges[e] = [u, other_end(e, u)]
                else:
                    edges[e] = [other_end(e, u), u]
    full_arrows = [Arrow(j + 1, s, t) for j, (s, t) in enumerate(edges)]
    full = IcedQuiver(n_mut, nb, tuple(full_arrows))
    faces = []
    levels = {}
    for f in bounded:
        dirs = [edges[e][0] == u for u, e in f]
        if all(dirs):
            arr = tuple(e + 1 for _, e in f)
            orient = ACW
        elif not any(dirs):
            arr = tuple(e + 1 for _, e in reversed(f))
            orient = CW
        else:
            raise DiagramError("a face is not a directed cycle")
        face = Face(_rotate_min(arr), orient)
        faces.append(face)
        if level_fn is not None:
            levels[face.arrows] = level_fn([u for u, _ in f])
    virtual = set()
    for i, e in enumerate(bd_edges):
        if edges[e][0] != boundary[i]:
            virtual.add(e + 1)
    return FaceDiagram(k, full, frozenset(virtual), tuple(faces), tuple(boundary), levels, labels or {})


# -- initial diagrams ------------------------------------------------------------

def _grid_arrow(c: int, r: int, c2: int, r2: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Checkerboard orientation of the grid edge between two adjacent points."""
    if r == r2:
        lo = min(c, c2)
        left = (lo + r) % 2 == 0
        a, b = (lo + 1, r), (lo, r)
        return (a, b) if left else (b, a)
    lo = min(r, r2)
    up = (c + lo) % 2 == 0
    a, b = (c, lo), (c, lo + 1)
    return (a, b) if up else (b, a)


def initial_diagram(k: int, n: int) -> FaceDiagram:
    """The rectangular initial diagram for ``Gr(k, n)``.

    The mutable part is a ``(k-1) x (n-k-1)`` grid with checkerboard
    orientation.  Frozen vertices sit around it: along the left and right
    sides they close triangles on grid edges pointing clockwise, along the top
    and bottom on edges pointing anticlockwise, and the leftover corner slots
    carry single arrows.
    """
    if not (2 <= k <= n - 2):
        raise DiagramError(f"need 2 <= k <= n-2, got k={k}, n={n}")
    C, R = k - 1, n - k - 1
    grid = [(c, r) for r in range(R) for c in range(C)]
    vid = {p: j + 1 for j, p in enumerate(grid)}
    coords: dict[int, tuple[float, float]] = {vid[p]: (float(p[0]), float(p[1])) for p in grid}
    arrows: list[tuple[int, int]] = []
    gdir: dict[frozenset, tuple] = {}
    for c, r in grid:
        for c2, r2 in ((c + 1, r), (c, r + 1)):
            if (c2, r2) in vid:
                a, b = _grid_arrow(c, r, c2, r2)
                arrows.append((vid[a], vid[b]))
                gdir[frozenset((a, b))] = (a, b)

    sides = [
        ("L", [(0, r) for r in range(R)]),
        ("T", [(c, R - 1) for c in range(C)]),
        ("R", [(C - 1, r) for r in reversed(range(R))]),
        ("B", [(c, 0) for c in reversed(range(C))]),
    ]
    outward = {"L": (-1.0, 0.0), "T": (0.0, 1.0), "R": (1.0, 0.0), "B": (0.0, -1.0)}
    # each frozen vertex is a list of slots (grid point, side)
    frozen_slots: list[list[tuple[tuple[int, int], str]]] = []
    for side, pts in sides:
        j = 0
        while j < len(pts):
            if j + 1 < len(pts):
                a, b = gdir[frozenset((pts[j], pts[j + 1]))]
                clockwise = a == pts[j]
                want_cw = side in ("L", "R")
                if clockwise == want_cw:
                    frozen_slots.append([(pts[j], side), (pts[j + 1], side)])
                    j += 2
                    continue
            frozen_slots.append([(pts[j], side)])
            j += 1

    n_mut = len(grid)
    if len(frozen_slots) != n:
        raise DiagramError(f"construction produced {len(frozen_slots)} frozen vertices, expected {n}")

    def slot_pos(p, side):
        dx, dy = outward[side]
        x = -1.0 if side == "L" else (float(C) if side == "R" else float(p[0]))
        y = -1.0 if side == "B" else (float(R) if side == "T" else float(p[1]))
        return x, y

    boundary = []
    slot_of: dict[tuple[tuple[int, int], str], int] = {}
    for j, slots in enumerate(frozen_slots):
        f = n_mut + 1 + j
        boundary.append(f)
        pts = [slot_pos(p, s) for p, s in slots]
        coords[f] = (sum(x for x, _ in pts) / len(pts), sum(y for _, y in pts) / len(pts))
        for s in slots:
            slot_of[s] = f

    # direction of each slot arrow from alternation around its grid point
    dirs = {"E": 0, "N": 1, "W": 2, "S": 3}
    side_dir = {"L": "W", "T": "N", "R": "E", "B": "S"}
    for p in grid:
        c, r = p
        around: list[tuple[str, object]] = []
        for d, q_ in (("E", (c + 1, r)), ("N", (c, r + 1)), ("W", (c - 1, r)), ("S", (c, r - 1))):
            if q_ in vid:
                a, b = gdir[frozenset((p, q_))]
                around.append((d, "out" if a == p else "in"))
        for side in ("L", "T", "R", "B"):
            if (p, side) in slot_of:
                around.append((side_dir[side], (p, side)))
        around.sort(key=lambda t: dirs[t[0]])
        known = [j for j, (_, x) in enumerate(around) if x in ("in", "out")]
        if known:
            j0 = known[0]
            base = around[j0][1]
        else:
            j0, base = 0, "in"
        for j, (d, x) in enumerate(around):
            want = base if (j - j0) % 2 == 0 else ("out" if base == "in" else "in")
            if x in ("in", "out"):
                if x != want:
                    raise DiagramError(f"grid point {p} does not alternate")
                continue
            f = slot_of[x]
            arrows.append((vid[p], f) if want == "out" else (f, vid[p]))

    def level_fn(vs: list[int]) -> int:
        # level coordinates are shifted by one from the grid indices
        pts = [(coords[v][0] + 1, coords[v][1] + 1) for v in vs]
        top = max(y for _, y in pts)
        i0 = min(x for x, y in pts if y == top)
        j0 = top
        if j0 != int(j0):
            return int(j0 - 0.5)
        if i0 != 0:
            return int(j0)
        if j0 == n - k:
            return int(j0) - 1
        return int(j0)

    fd = diagram_from_embedding(k, n_mut, boundary, arrows, coords, level_fn=level_fn)
    labels = region_labels(fd)
    return FaceDiagram(fd.k, fd.full, fd.virtual, fd.faces, fd.boundary, fd.levels, labels)


# -- zigzag paths and validation -------------------------------------------------

def zigzag_paths(fd: FaceDiagram) -> list[list[tuple[int, str]] | None]:
    """The strand starting at each marker as a list of ``(arrow, side)`` states."""
    nxt = fd.next_in_face()
    bas = fd.boundary_arrows()
    fo = fd.faces_of()
    face_type = {}
    for a, js in fo.items():
        if len(js) == 1:
            face_type[a] = fd.faces[js[0]].orient
    out: list[list[tuple[int, str]] | None] = []
    limit = 4 * len(fd.full.arrows) + 4
    for e in bas:
        if e is None:
            out.append(None)
            continue
        state = (e, face_type[e])
        trail = [state]
        ok = False
        for _ in range(limit):
            a, t = state
            if (a, t) not in nxt:
                ok = True
                break
            state = (nxt[(a, t)], other(t))
            trail.append(state)
        out.append(trail if ok else None)
    return out


def trip_permutation(fd: FaceDiagram) -> list[int | None]:
    bas = fd.boundary_arrows()
    where = {a: i for i, a in enumerate(bas) if a is not None}
    perm: list[int | None] = []
    for z in zigzag_paths(fd):
        if not z:
            perm.append(None)
            continue
        perm.append(where.get(z[-1][0]))
    return perm


def region_label_sets(fd: FaceDiagram) -> dict[int, tuple[int, ...]]:
    """The strands (numbered from 1) having each vertex on their left.

    Falls back to right sides if that gives ``k``-subsets instead.
    """
    q = fd.full
    left_sets: dict[int, set[int]] = defaultdict(set)
    right_sets: dict[int, set[int]] = defaultdict(set)
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for a in q.arrows:
        adj[a.src].append((a.tgt, a.id))
        adj[a.tgt].append((a.src, a.id))
    for i, z in enumerate(zigzag_paths(fd)):
        if not z:
            return {}
        cut = {a for a, _ in z}
        a0, t0 = z[0]
        seed_left = q.src(a0) if t0 == ACW else q.tgt(a0)
        side = {seed_left: 0}
        dq = deque([seed_left])
        while dq:
            u = dq.popleft()
            for w, aid in adj[u]:
                s = side[u] ^ (1 if aid in cut else 0)
                if w not in side:
                    side[w] = s
                    dq.append(w)
        for v, s in side.items():
            (left_sets if s == 0 else right_sets)[v].add(i + 1)
    sizes = {len(left_sets[v]) for v in q.vertices}
    chosen = left_sets if sizes == {fd.k} else right_sets
    return {v: tuple(sorted(chosen[v])) for v in q.vertices}


def region_labels(fd: FaceDiagram) -> dict[int, str]:
    sep = "" if fd.n < 10 else ","
    return {v: sep.join(map(str, s)) for v, s in region_label_sets(fd).items()}


@dataclass
class ValidationReport:
    checks: dict[str, bool] = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)
    permutation: list[int | None] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def fail(self, check: str, msg: str) -> None:
        self.checks[check] = False
        self.messages.append(f"{check}: {msg}")

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "messages": self.messages, "permutation": self.permutation}


def validate(fd: FaceDiagram) -> ValidationReport:
    rep = ValidationReport()
    q = fd.full
    names = ["directed_faces", "face_incidence", "alternation", "boundary", "rotation", "euler", "markers", "trip"]
    for c in names:
        rep.checks[c] = True

    for j, f in enumerate(fd.faces):
        if len(f.arrows) < 2:
            rep.fail("directed_faces", f"face {j} too short")
            continue
        try:
            p = make_path(q, f.arrows)
            if not p.is_cycle:
                rep.fail("directed_faces", f"face {j} is not closed")
        except Exception as exc:  # composability or unknown arrow
            rep.fail("directed_faces", f"face {j}: {exc}")

    fo = fd.faces_of()
    frozen_pos = {v: i for i, v in enumerate(fd.boundary)}
    nb = fd.n
    for a in q.arrows:
        js = fo.get(a.id, [])
        if len(js) == 2:
            o1, o2 = (fd.faces[j].orient for j in js)
            if o1 == o2:
                rep.fail("alternation", f"arrow {a.id} has two {o1} faces")
        elif len(js) == 1:
            ext = q.is_frozen(a.src) and q.is_frozen(a.tgt)
            consecutive = ext and (frozen_pos[a.tgt] - frozen_pos[a.src]) % nb in (1, nb - 1)
            if not consecutive:
                rep.fail("face_incidence", f"arrow {a.id} lies in one face but is not on the boundary")
        else:
            rep.fail("face_incidence", f"arrow {a.id} lies in {len(js)} faces")
        if a.id in fd.virtual:
            if not (q.is_frozen(a.src) and q.is_frozen(a.tgt)) or len(js) != 1:
                rep.fail("boundary", f"virtual arrow {a.id} is not a boundary arrow")
        elif q.is_frozen(a.src) and q.is_frozen(a.tgt) and len(js) != 1:
            rep.fail("boundary", f"external arrow {a.id} is not on the boundary")

    bas = fd.boundary_arrows()
    for i, a in enumerate(bas):
        if a is None:
            rep.fail("markers", f"no boundary arrow at marker {i}")
            continue
        forward = q.src(a) == fd.boundary[i]
        if forward == (a in fd.virtual):
            rep.fail("markers", f"marker {i}: arrow {a} direction disagrees with its type")

    rot = fd.rotation()
    for v in q.vertices:
        d = q.degree(v)
        if len(rot[v]) != d:
            rep.fail("rotation", f"corners at vertex {v} do not form one fan")

    V, E, F = q.num_vertices, len(q.arrows), len(fd.faces)
    if V - E + F != 1:
        rep.fail("euler", f"V-E+F = {V - E + F}")

    perm = trip_permutation(fd)
    rep.permutation = perm
    for i, j in enumerate(perm):
        if j is None or (j - i) % nb != fd.k % nb:
            rep.fail("trip", f"strand {i} ends at {j}")
            break
    return rep


# -- potentials and variants --------------------------------------------------------

def build_quiver_variant(fd: FaceDiagram, v: Variant | str) -> IcedQuiver:
    return fd.variant_quiver(v)


def face_potential(fd: FaceDiagram, v: Variant | str = Variant.TYPE3, cap: int = DEFAULT_CAP) -> Potential:
    q = fd.variant_quiver(v)
    terms = {}
    for f in fd.faces:
        if all(q.has_arrow(a) for a in f.arrows):
            terms[make_path(q, f.arrows)] = 1 if f.orient == CW else -1
    return Potential(q, terms, cap)


def diagram_iqp(fd: FaceDiagram, v: Variant | str = Variant.TYPE3, cap: int = DEFAULT_CAP) -> IQP:
    q = fd.variant_quiver(v)
    return IQP(q, face_potential(fd, v, cap), cap)


# -- geometric exchange ------------------------------------------------------------

def exchangeable_vertices(fd: FaceDiagram) -> list[int]:
    """Mutable vertices of degree four whose arrows alternate in and out."""
    q = fd.full
    rot = fd.rotation()
    out = []
    for v in range(1, q.n + 1):
        r = rot[v]
        if len(r) != 4 or q.degree(v) != 4:
            continue
        kinds = [q.tgt(a) == v for a in r]
        if all(kinds[j] != kinds[(j + 1) % 4] for j in range(4)):
            out.append(v)
    return out


def geometric_exchange(fd: FaceDiagram, a: int, digon_order: str = "asc") -> FaceDiagram:
    q = fd.full
    if not 1 <= a <= q.num_vertices:
        raise DiagramError(f"vertex {a} out of range")
    if q.is_frozen(a):
        raise DiagramError(f"vertex {a} is frozen")
    if q.degree(a) != 4:
        raise DiagramError(f"vertex {a} has degree {q.degree(a)}, need 4")
    if a not in exchangeable_vertices(fd):
        raise DiagramError(f"arrows at vertex {a} do not alternate")

    arrows, rec = premutate_arrows(q, a)
    nq = q.with_arrows(arrows)
    comp_of = {pair: cid for cid, pair in rec.composites.items()}
    star_of = {old: sid for sid, old in rec.stars.items()}

    faces: list[Face] = []
    face_with_comp: dict[int, int] = {}
    for f in fd.faces:
        arr = f.arrows
        hits = [j for j, x in enumerate(arr) if q.tgt(x) == a]
        if not hits:
            faces.append(f)
            continue
        if len(hits) != 1:
            raise DiagramError(f"face through {a} visits it twice")
        j = hits[0]
        x, y = arr[j], arr[(j + 1) % len(arr)]
        cid = comp_of[(y, x)]
        rest = arr[j + 2:] + arr[:j] if j + 1 < len(arr) else arr[1:j]
        new = (cid,) + rest
        face_with_comp[cid] = len(faces)
        faces.append(Face(new, f.orient))
    for cid, (alpha, beta) in rec.composites.items():
        orient = other(faces[face_with_comp[cid]].orient)
        faces.append(Face((star_of[alpha], star_of[beta], cid), orient))

    virtual = set(fd.virtual)
    dead: set[int] = set()
    order = sorted(rec.composites, reverse=(digon_order == "desc"))
    for cid in order:
        live = [j for j, f in enumerate(faces) if f is not None and cid in f.arrows]
        digons = [j for j in live if len(faces[j].arrows) == 2]
        if not digons:
            continue
        dj = digons[0]
        z = next(x for x in faces[dj].arrows if x != cid)
        tj = next(j for j in live if j != dj)
        others = [j for j, f in enumerate(faces) if f is not None and j != dj and z in f.arrows]
        tri = faces[tj].arrows
        if others:
            gj = others[0]
            g = faces[gj].arrows
            k0 = g.index(z)
            via = g[k0 + 1:] + g[:k0]
            k1 = tri.index(cid)
            merged = tri[:k1] + via + tri[k1 + 1:]
            faces[tj] = Face(merged, faces[tj].orient)
            faces[gj] = None
            faces[dj] = None
            dead.update((cid, z))
        else:
            # z sat on the boundary; the composite takes its place with the other type
            faces[dj] = None
            dead.add(z)
            if z in virtual:
                virtual.discard(z)
            else:
                virtual.add(cid)
    new_arrows = [x for x in nq.arrows if x.id not in dead]
    full = nq.with_arrows(new_arrows)
    virtual -= dead
    new_faces = tuple(f for f in faces if f is not None)
    return FaceDiagram(fd.k, full, frozenset(virtual), new_faces, fd.boundary, {}, {})


def diagram_isomorphic(d1: FaceDiagram, d2: FaceDiagram) -> bool:
    """Same quiver (vertex-wise) and the same faces read as vertex cycles."""
    from .quiver_core import same_up_to_ids

    if not same_up_to_ids(d1.full, d2.full) or not same_up_to_ids(d1.quiver, d2.quiver):
        return False

    def vcycles(d: FaceDiagram):
        out = []
        for f in d.faces:
            vs = tuple(d.full.src(a) for a in f.arrows)
            out.append((_rotate_min(vs), f.orient))
        return sorted(out)

    return vcycles(d1) == vcycles(d2)
