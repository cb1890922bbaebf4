import math

import pytest

from grassqp.postnikov import diagram_from_embedding
from grassqp.qp import IQP
from grassqp.quiver_core import Arrow, IcedQuiver

GR37_FROZEN = ["671", "712", "123", "234", "345", "456", "567"]
GR37_INNER = {
    "267": (104, 0.58),
    "126": (63, 0.47),
    "256": (160, 0.25),
    "125": (15, 0.3),
    "356": (220, 0.52),
    "235": (295, 0.4),
}
GR37_ARROWS = (
    "671>267 267>567 267>126 126>712 125>126 123>125 126>256 256>267 256>125 256>356 "
    "567>256 356>456 356>235 235>256 125>235 235>345 345>356 234>235 235>123"
).split()


def build_gr37():
    """A Gr(3,7) diagram given by region labels and a rough planar drawing."""
    names = list(GR37_INNER) + GR37_FROZEN
    vid = {s: i for i, s in enumerate(names, 1)}
    coords = {}
    for s, (ang, r) in GR37_INNER.items():
        coords[vid[s]] = (r * math.cos(math.radians(ang)), r * math.sin(math.radians(ang)))
    for j, s in enumerate(GR37_FROZEN, 1):
        t = math.radians(125.7 - 51.4 * j)
        coords[vid[s]] = (math.cos(t), math.sin(t))
    arrows = []
    for a in GR37_ARROWS:
        s, t = a.split(">")
        arrows.append((vid[s], vid[t]))
    fd = diagram_from_embedding(3, 6, [vid[s] for s in GR37_FROZEN], arrows, coords)
    return fd, vid


@pytest.fixture
def gr37():
    return build_gr37()


def three_cycle() -> IQP:
    q = IcedQuiver(3, 0, (Arrow(1, 1, 2), Arrow(2, 2, 3), Arrow(3, 3, 1)))
    return IQP.from_terms(q, {(1, 2, 3): 1})


@pytest.fixture
def cyc3():
    return three_cycle()
