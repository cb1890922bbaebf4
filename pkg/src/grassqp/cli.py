"""Command-line driver.

Every command prints a human table by default and a JSON object with
``--json``; both carry the tool version, the property being checked, the
full configuration and the random seed.  The exit status is 0 exactly when
every check of the invoked command passes.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath
from typing import Callable

from . import __version__
from .cluster import GEOMETRIC, TRIVIAL, Seed, exchange_graph_csv, explore_exchange_graph
from .jacobian import jacobi_finite_probe, rigidity_certificate
from .path_algebra import canonical_rotation
from .postnikov import (
    FaceDiagram,
    Variant,
    diagram_iqp,
    exchangeable_vertices,
    geometric_exchange,
    initial_diagram,
    validate,
)
from .qp import mutate as mutate_iqp, sign_equivalent_iqps
from .quiver_core import mutate_quiver, same_up_to_ids

PROPERTIES = {
    "init": "initial Postnikov diagram and its quiver with potential",
    "verify-compat": "geometric exchange agrees with QP mutation (quiver and potential up to signs)",
    "jacobian": "finite dimensionality of the Jacobian algebra",
    "rigidity": "rigidity: every cycle is cyclically equivalent to an element of the Jacobian ideal",
    "exchange-graph": "finite exchange graph",
}


@dataclass
class RunConfig:
    command: str
    k: int
    n: int
    variant: str = "type3"
    cap: int = 12
    cap_min: int = 6
    seed: int = 0
    trials: int = 100
    length: int = 6
    max_seeds: int = 10_000
    coefficients: str = TRIVIAL
    out: str | None = None
    as_json: bool = False
    corrupt: bool = False

    def check(self) -> None:
        if not 2 <= self.k <= self.n - 2:
            raise ValueError(f"need 2 <= k <= n-2, got k={self.k}, n={self.n}")
        if self.command in ("jacobian", "rigidity") and self.cap < 4:
            raise ValueError("cap must be at least 4 for Jacobian computations")
        Variant.parse(self.variant)


@dataclass
class Report:
    config: RunConfig
    passed: bool
    result: dict = field(default_factory=dict)
    rows: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg.pop("as_json")
        return {
            "version": __version__,
            "property": PROPERTIES[self.config.command],
            "config": cfg,
            "seed": self.config.seed,
            "passed": self.passed,
            "result": self.result,
        }

    def render(self) -> str:
        if self.config.as_json:
            return json.dumps(self.to_dict(), indent=2, default=str)
        c = self.config
        head = [
            ("version", __version__),
            ("property", PROPERTIES[c.command]),
            ("command", c.command),
            ("Gr(k,n)", f"Gr({c.k},{c.n})"),
            ("seed", str(c.seed)),
        ]
        rows = head + self.rows + [("status", "PASS" if self.passed else "FAIL")]
        w = max(len(a) for a, _ in rows)
        return "\n".join(f"{a.ljust(w)}  {b}" for a, b in rows)


# -- compatibility ----------------------------------------------------------------

Exchange = Callable[[FaceDiagram, int], FaceDiagram]


def skip_surgery(fd: FaceDiagram, a: int) -> FaceDiagram:
    """A broken exchange rule that leaves the diagram untouched (negative control)."""
    return fd


def compat_step(fd: FaceDiagram, p, a: int, variant: Variant, exchange: Exchange):
    """One exchange on both sides.  Returns the new pair and a failure message or ``None``."""
    fd2 = exchange(fd, a)
    p2 = mutate_iqp(p, a)
    rep = validate(fd2)
    if not rep.ok:
        return fd2, p2, f"invalid diagram: {'; '.join(rep.messages)}"
    if not same_up_to_ids(fd2.quiver, mutate_quiver(fd.quiver, a)):
        return fd2, p2, "exchanged quiver differs from the mutated quiver"
    geo = diagram_iqp(fd2, variant, p.cap)
    if not same_up_to_ids(geo.quiver, p2.quiver):
        return fd2, p2, "exchanged QP quiver differs from the mutated QP quiver"
    if sign_equivalent_iqps(p2, geo) is None:
        return fd2, p2, "potentials are not equal up to arrow signs"
    return fd2, p2, None


def verify_compat(
    k: int,
    n: int,
    trials: int,
    length: int,
    seed: int,
    variant: Variant | str = Variant.TYPE3,
    exchange: Exchange = geometric_exchange,
) -> dict:
    """Random exchange sequences run through the diagram and the QP pipelines."""
    variant = Variant.parse(variant)
    rng = random.Random(seed)
    fd0 = initial_diagram(k, n)
    p0 = diagram_iqp(fd0, variant)
    failures = []
    steps = 0
    for t in range(trials):
        fd, p = fd0, p0
        seq: list[int] = []
        for _ in range(rng.randint(1, length)):
            choices = exchangeable_vertices(fd)
            if not choices:
                break
            a = rng.choice(choices)
            seq.append(a)
            fd, p, err = compat_step(fd, p, a, variant, exchange)
            steps += 1
            if err:
                failures.append({"trial": t, "sequence": seq, "error": err})
                break
    return {"trials": trials, "steps": steps, "failures": failures}


# -- commands ---------------------------------------------------------------------

def cmd_init(cfg: RunConfig) -> Report:
    fd = initial_diagram(cfg.k, cfg.n)
    v = Variant.parse(cfg.variant)
    p = diagram_iqp(fd, v)
    rep = validate(fd)
    q = p.quiver
    res = {
        "vertices": q.num_vertices,
        "mutable": q.n,
        "arrows": len(q.arrows),
        "potential_terms": len(p.potential.terms),
        "valid": rep.ok,
    }
    if cfg.out:
        out = FsPath(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"gr{cfg.k}_{cfg.n}"
        (out / f"{stem}.facediagram.json").write_text(fd.to_json())
        (out / f"{stem}.{v.value}.iqp.json").write_text(p.to_json())
        res["files"] = [str(out / f"{stem}.facediagram.json"), str(out / f"{stem}.{v.value}.iqp.json")]
    rows = [(k, str(val)) for k, val in res.items()]
    return Report(cfg, rep.ok, res, rows)


def cmd_verify_compat(cfg: RunConfig) -> Report:
    t0 = time.perf_counter()
    exchange = skip_surgery if cfg.corrupt else geometric_exchange
    res = verify_compat(cfg.k, cfg.n, cfg.trials, cfg.length, cfg.seed, cfg.variant, exchange)
    res["seconds"] = round(time.perf_counter() - t0, 2)
    rows = [("trials", str(cfg.trials)), ("steps", str(res["steps"])), ("failures", str(len(res["failures"])))]
    if res["failures"]:
        f = res["failures"][0]
        rows.append(("witness", f"trial {f['trial']}, exchanges {f['sequence']}: {f['error']}"))
    return Report(cfg, not res["failures"], res, rows)


def cmd_jacobian(cfg: RunConfig) -> Report:
    v = Variant.parse(cfg.variant)
    p = diagram_iqp(initial_diagram(cfg.k, cfg.n), v)
    caps = list(range(min(cfg.cap_min, cfg.cap), cfg.cap + 1))
    verdict = jacobi_finite_probe(p, caps)
    expect_finite = v is not Variant.COMPLETE
    if expect_finite:
        ok = verdict.stabilized
    else:
        ok = all(a < b for a, b in zip(verdict.dims, verdict.dims[1:]))
    res = verdict.to_dict() | {"expected": "finite" if expect_finite else "growing"}
    rows = [(f"dim @ cap {c}", str(d)) for c, d in zip(verdict.caps, verdict.dims)]
    rows.append(("verdict", str(verdict)))
    return Report(cfg, ok, res, rows)


def cmd_rigidity(cfg: RunConfig) -> Report:
    v = Variant.parse(cfg.variant)
    fd = initial_diagram(cfg.k, cfg.n)
    p = diagram_iqp(fd, v)
    rep = rigidity_certificate(p, cfg.cap)
    fundamental = {c.arrows for c, _, _ in fd.fundamental_cycles(v)}
    face_witnesses = [w for w in rep.witnesses if canonical_rotation(w, p.quiver).arrows in fundamental]
    if v is Variant.COMPLETE:
        ok = not rep.rigid_up_to_cap and bool(face_witnesses)
    else:
        ok = rep.rigid
    res = rep.to_dict() | {"fundamental_witnesses": [list(w.arrows) for w in face_witnesses]}
    rows = [
        ("cap", str(cfg.cap)),
        ("stabilized", str(rep.stabilized)),
        ("rigid up to cap", str(rep.rigid_up_to_cap)),
        ("witnesses", str(len(rep.witnesses))),
    ]
    if face_witnesses:
        rows.append(("face witness", str(face_witnesses[0])))
    return Report(cfg, ok, res, rows)


def cmd_exchange_graph(cfg: RunConfig) -> Report:
    fd = initial_diagram(cfg.k, cfg.n)
    t0 = time.perf_counter()
    rep = explore_exchange_graph(Seed.initial(fd.quiver, cfg.coefficients), cfg.max_seeds)
    res = rep.to_dict() | {"seconds": round(time.perf_counter() - t0, 2)}
    if cfg.out:
        row = res | {"k": cfg.k, "n": cfg.n, "coefficients": cfg.coefficients}
        FsPath(cfg.out).write_text(exchange_graph_csv([row]))
    rows = [(k, str(val)) for k, val in rep.to_dict().items()]
    return Report(cfg, not rep.exceeded, res, rows)


COMMANDS = {
    "init": cmd_init,
    "verify-compat": cmd_verify_compat,
    "jacobian": cmd_jacobian,
    "rigidity": cmd_rigidity,
    "exchange-graph": cmd_exchange_graph,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grassqp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=PROPERTIES[name])
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--variant", default="type3", choices=[v.value for v in Variant])
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", dest="as_json", action="store_true")
        sp.add_argument("--out")
        if name in ("jacobian", "rigidity"):
            sp.add_argument("--cap", type=int, default=12 if name == "jacobian" else 10)
        if name == "jacobian":
            sp.add_argument("--cap-min", type=int, default=6)
        if name == "verify-compat":
            sp.add_argument("--trials", type=int, default=100)
            sp.add_argument("--len", dest="length", type=int, default=6)
            sp.add_argument("--corrupt", action="store_true", help="use a broken exchange rule (negative control)")
        if name == "exchange-graph":
            sp.add_argument("--max-seeds", type=int, default=10_000)
            sp.add_argument("--coefficients", choices=[TRIVIAL, GEOMETRIC], default=TRIVIAL)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    cfg = RunConfig(**args)
    try:
        cfg.check()
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    report = COMMANDS[cfg.command](cfg)
    print(report.render())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
