"""Beam search over growing unit-distance configurations, and symbolic reconstruction of the result."""

from __future__ import annotations

import json
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, TextIO

import numpy as np

from .algebra import FieldElement, Tower, TowerElement, adjoin_sqrt, to_float, tower_of
from .formats import BirthOrder
from .geometry import ExactPoint, PointSet
from .moser_lp import FourierGrid, SolverFailure, upper_bound

log = logging.getLogger(__name__)

MIN_CHILD_SEPARATION = 0.1
DEDUP_TOL = 1e-9
KEY_DIGITS = 9


@dataclass
class BeamNode:
    points: PointSet
    score: float
    parent: BeamNode | None = None
    birth: tuple[complex, tuple[int, int]] | None = None
    depth: int = 0

    def key(self) -> tuple:
        return canonical_key(self.points)

    def record(self) -> dict:
        rec = {"depth": self.depth, "score": self.score if math.isfinite(self.score) else None,
               "points": [[p.real, p.imag] for p in self.points.floats]}
        if self.birth is not None:
            rec["anchors"] = [a + 1 for a in self.birth[1]]
        return rec


@dataclass
class SearchConfig:
    width: int = 100
    depth: int = 1
    grid: FourierGrid = field(default_factory=lambda: FourierGrid(0.1, 120.0))
    iec_k_min: int = 1
    iec_k_max: int | None = None
    workers: int = 1
    # optional random subsample of the children at each level (None keeps all of them)
    max_children: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("beam width must be at least 1")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.workers < 1:
            raise ValueError("need at least one worker")


def _round(x: float) -> float:
    return round(x, KEY_DIGITS) + 0.0


def canonical_key(X: PointSet) -> tuple:
    return tuple(sorted((_round(p.real), _round(p.imag)) for p in X.floats))


def circle_intersections(a: complex, b: complex) -> list[complex]:
    """Points at distance 1 from both a and b."""
    d = abs(b - a)
    if d >= 2.0 or d == 0.0:
        return []
    m = (a + b) / 2
    h = math.sqrt(max(0.0, 1.0 - d * d / 4))
    n = 1j * (b - a) / d
    return [m + h * n, m - h * n]


def generate_children(node: BeamNode | PointSet) -> list[tuple[complex, tuple[int, int]]]:
    """Candidate new points with two unit anchors, at least 0.1 away from every existing point."""
    X = node.points if isinstance(node, BeamNode) else node
    fl = np.array(X.floats)
    out: list[tuple[complex, tuple[int, int]]] = []
    n = len(fl)
    for i in range(n):
        for j in range(i + 1, n):
            for p in circle_intersections(complex(fl[i]), complex(fl[j])):
                if np.min(np.abs(fl - p)) < MIN_CHILD_SEPARATION:
                    continue
                if any(abs(p - q) <= DEDUP_TOL for q, _ in out):
                    continue
                out.append((p, (i, j)))
    out.sort(key=lambda c: (_round(c[0].real), _round(c[0].imag)))
    return out


def _score(args) -> float:
    pts, grid, kmin, kmax = args
    try:
        return upper_bound(PointSet(pts), grid, kmin, kmax)
    except (SolverFailure, ValueError) as exc:
        log.warning("scoring failed: %s", exc)
        return math.inf


def _score_all(sets: list[tuple], cfg: SearchConfig) -> list[float]:
    jobs = [(pts, cfg.grid, cfg.iec_k_min, cfg.iec_k_max) for pts in sets]
    if cfg.workers == 1 or len(jobs) <= 1:
        return [_score(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_score, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))


@dataclass
class SearchResult:
    best: BeamNode
    frontiers: list[list[BeamNode]]
    failures: int = 0


def beam_search(root: PointSet, cfg: SearchConfig, *, log_stream: TextIO | None = None,
                progress: Callable[[int, int], None] | None = None,
                frontier: list[BeamNode] | None = None) -> SearchResult:
    """Expand, score and prune for ``cfg.depth`` levels; return the lowest-scoring node seen.

    Passing ``frontier`` resumes from a saved level instead of scoring the root.
    """
    if root.exact:
        root = root.to_float()
    if len(root) < 2:
        raise ValueError("the root needs at least two points")
    if frontier is None:
        frontier = [BeamNode(root, _score_all([root.points], cfg)[0])]
    best = min(frontier, key=lambda nd: (nd.score, nd.key()))
    frontiers = [frontier]
    failures = 0
    if log_stream is not None:
        for nd in frontier:
            log_stream.write(json.dumps(nd.record()) + "\n")
    rng = random.Random(cfg.seed)
    start = frontier[0].depth
    for level in range(start + 1, start + cfg.depth + 1):
        seen: set[tuple] = set()
        pending: list[tuple[BeamNode, complex, tuple[int, int], PointSet]] = []
        for nd in frontier:
            for p, anchors in generate_children(nd):
                Y = PointSet(nd.points.points + (p,))
                k = canonical_key(Y)
                if k in seen:
                    continue
                seen.add(k)
                pending.append((nd, p, anchors, Y))
        if cfg.max_children is not None and len(pending) > cfg.max_children:
            pending = rng.sample(pending, cfg.max_children)
        scores = _score_all([Y.points for *_, Y in pending], cfg)
        children = []
        for (nd, p, anchors, Y), s in zip(pending, scores):
            if not math.isfinite(s):
                failures += 1
            children.append(BeamNode(Y, s, nd, (p, anchors), level))
        children.sort(key=lambda nd: (nd.score, nd.key()))
        if log_stream is not None:
            for nd in children:
                log_stream.write(json.dumps(nd.record()) + "\n")
        frontier = [c for c in children if math.isfinite(c.score)][: cfg.width]
        if progress is not None:
            progress(level, len(children))
        if not frontier:
            break
        frontiers.append(frontier)
        if (frontier[0].score, frontier[0].key()) < (best.score, best.key()):
            best = frontier[0]
    return SearchResult(best, frontiers, failures)


def save_frontier(nodes: Iterable[BeamNode], stream: TextIO) -> None:
    for nd in nodes:
        stream.write(json.dumps(nd.record()) + "\n")


def load_frontier(stream: TextIO) -> list[BeamNode]:
    out = []
    for line in stream:
        if line.strip():
            rec = json.loads(line)
            pts = PointSet(complex(a, b) for a, b in rec["points"])
            score = math.inf if rec["score"] is None else float(rec["score"])
            out.append(BeamNode(pts, score, None, None, int(rec["depth"])))
    return out


# --- symbolic reconstruction ----------------------------------------------------
MATCH_TOL = 1e-6


class ReconstructionFailure(ValueError):
    pass


class InconsistencyError(ValueError):
    pass


@dataclass
class SymbolizeReport:
    rules: dict[int, tuple[str, tuple[int, ...]]] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for rule, _ in self.rules.values():
            out[rule] = out.get(rule, 0) + 1
        return out

    def to_text(self) -> str:
        lines = [f"{i + 1} {rule} {' '.join(str(s + 1) for s in src)}".rstrip()
                 for i, (rule, src) in sorted(self.rules.items())]
        return "\n".join(lines) + "\n"


_OMEGA = ExactPoint(Fraction(1, 2), FieldElement(0, Fraction(1, 2)))
_OMEGA_BAR = _OMEGA.conj()
_I = ExactPoint(0, 1)


def _lower(x):
    return x.lower() if isinstance(x, TowerElement) else x


def _rational(x: float) -> Fraction | None:
    q = Fraction(x).limit_denominator(10**6)
    return q if abs(float(q) - x) <= 1e-12 else None


def _is_unit(p: ExactPoint, q: ExactPoint) -> bool:
    return (p - q).abs2() == 1


class _Symbolizer:
    def __init__(self, fl: list[complex]):
        self.fl = fl
        self.exact: dict[int, ExactPoint] = {}
        self.done: list[int] = []
        self.tower = Tower.BASE
        self.report = SymbolizeReport()

    def accept(self, i: int, p: ExactPoint, rule: str, src: tuple[int, ...]):
        p = ExactPoint(_lower(p.re), _lower(p.im))
        if abs(p.to_complex() - self.fl[i]) > MATCH_TOL:
            raise InconsistencyError(f"point {i + 1}: exact value drifted from its coordinates")
        self.exact[i] = p
        self.done.append(i)
        self.report.rules[i] = (rule, src)
        for x in (p.re, p.im):
            t = tower_of(x)
            if self.tower.is_ancestor_of(t):
                self.tower = t

    def anchors(self, i: int, declared: tuple[int, ...] | None) -> list[int]:
        if declared:
            return list(declared)
        return [j for j in self.done if abs(abs(self.fl[j] - self.fl[i]) - 1.0) <= MATCH_TOL]

    def valid(self, p: ExactPoint, anchors: list[int]) -> bool:
        return all(_is_unit(p, self.exact[j]) for j in anchors)

    def rule1(self, i):
        done = self.done
        if len(done) < 3:
            return
        f = np.array([self.fl[j] for j in done])
        sums = f[:, None] + f[None, :] - self.fl[i]
        for ia in range(len(done)):
            for ib in range(ia + 1, len(done)):
                hits = np.nonzero(np.abs(f - sums[ia, ib]) <= MATCH_TOL)[0]
                for ic in hits:
                    if ic in (ia, ib):
                        continue
                    a, b, c = done[ia], done[ib], done[ic]
                    yield self.exact[a] + self.exact[b] - self.exact[c], (a, b, c)

    def rule2(self, i):
        for ia, a in enumerate(self.done):
            for b in self.done[ia + 1:]:
                if abs(abs(self.fl[a] - self.fl[b]) - 1.0) > MATCH_TOL:
                    continue
                pa, pb = self.exact[a], self.exact[b]
                if not _is_unit(pa, pb):
                    continue
                for w in (_OMEGA, _OMEGA_BAR):
                    apex = pa + (pb - pa) * w
                    if abs(apex.to_complex() - self.fl[i]) <= MATCH_TOL:
                        yield apex, (a, b)

    def rule3(self, i, anchors):
        for ia, a in enumerate(anchors):
            for b in anchors[ia + 1:]:
                pa, pb = self.exact[a], self.exact[b]
                D = (pb - pa).abs2()
                r = 1 / D - Fraction(1, 4)
                if to_float(r) < -1e-12:
                    continue
                self.tower, s = adjoin_sqrt(self.tower, r)
                m = (pa + pb) * Fraction(1, 2)
                n = _I * (pb - pa) * s
                for cand in sorted((m + n, m - n), key=lambda z: abs(z.to_complex() - self.fl[i])):
                    if abs(cand.to_complex() - self.fl[i]) <= MATCH_TOL:
                        yield cand, (a, b)


def symbolize(points: PointSet, order: BirthOrder | None = None,
              root: PointSet | None = None) -> tuple[PointSet, SymbolizeReport]:
    """Recover exact coordinates for a floating point set.

    The first ``len(root)`` points are taken from ``root`` (checked numerically).
    Without a root the first two processed points must have rational
    coordinates.  Every other point is produced by the first rule that fits:
    (1) parallelogram completion, (2) apex of a unit equilateral triangle,
    (3) intersection of two unit circles over a square-root extension.
    """
    fl = list(points.floats)
    n = len(fl)
    order = order or BirthOrder()
    sym = _Symbolizer(fl)
    start = 0
    if root is not None:
        if not root.exact:
            raise ValueError("root must be exact")
        if len(root) > n:
            raise ReconstructionFailure("root is larger than the point set")
        for i, p in enumerate(root.points):
            if abs(p.to_complex() - fl[i]) > MATCH_TOL:
                raise ReconstructionFailure(f"point {i + 1} does not match the root")
            sym.accept(i, p, "root", ())
        start = len(root)
    seq = list(order.order) or list(range(start, n))
    if sorted(seq) != list(range(start, n)):
        raise ReconstructionFailure("birth order must list every non-root point exactly once")
    for pos, i in enumerate(seq):
        if root is None and pos < 2:
            re, im = _rational(fl[i].real), _rational(fl[i].imag)
            if re is None or im is None:
                raise ReconstructionFailure(f"point {i + 1}: seed points need rational coordinates")
            sym.accept(i, ExactPoint(re, im), "seed", ())
            continue
        declared = order.anchors.get(i)
        anchors = sym.anchors(i, declared)
        if declared and any(j not in sym.exact for j in declared):
            raise ReconstructionFailure(f"point {i + 1}: anchors must be processed earlier")
        rejected = False
        for rule, gen in (("1", sym.rule1(i)), ("2", sym.rule2(i)), ("3", sym.rule3(i, anchors))):
            found = None
            for cand, src in gen:
                if sym.valid(cand, anchors):
                    found = (cand, src)
                    break
                rejected = True
            if found:
                sym.accept(i, found[0], rule, found[1])
                break
        else:
            if rejected:
                raise InconsistencyError(f"point {i + 1}: candidates fail the exact unit-distance check")
            raise ReconstructionFailure(f"point {i + 1}: no construction rule applies")
    return PointSet([sym.exact[i] for i in range(n)]), sym.report
