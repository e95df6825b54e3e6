"""Unit-distance graphs, independent sets and (geometric) fractional chromatic numbers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import PointSet, congruence_pairs
from .lp import LpModel, solve_exact

MAX_ATOM_VERTICES = 30
MAX_MASK_VERTICES = 63


class CapacityError(ValueError):
    pass


@dataclass
class UnitDistanceGraph:
    n: int
    edges: frozenset[tuple[int, int]]
    adj: list[int] = field(init=False, repr=False)

    def __post_init__(self):
        if self.n > MAX_MASK_VERTICES:
            raise CapacityError(f"at most {MAX_MASK_VERTICES} vertices supported")
        self.adj = [0] * self.n
        for i, j in self.edges:
            self.adj[i] |= 1 << j
            self.adj[j] |= 1 << i

    @classmethod
    def from_edges(cls, n: int, edges) -> UnitDistanceGraph:
        return cls(n, frozenset(tuple(sorted(e)) for e in edges))

    def is_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def is_independent(self, mask: int) -> bool:
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            if self.adj[v] & mask:
                return False
            m &= m - 1
        return True


def build_udg(X: PointSet) -> UnitDistanceGraph:
    n = len(X)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if X.is_unit(i, j)]
    return UnitDistanceGraph.from_edges(n, edges)


def independent_sets(G: UnitDistanceGraph) -> list[int]:
    """All independent sets as bitmasks, the empty set included, in increasing mask order."""
    if G.n > MAX_ATOM_VERTICES:
        raise CapacityError(f"independent set enumeration limited to {MAX_ATOM_VERTICES} vertices")
    out: list[int] = []
    adj = G.adj

    # vertices are added in decreasing index order so each set is reached once
    def grow(mask: int, forbidden: int, top: int):
        out.append(mask)
        for v in range(top):
            if not forbidden >> v & 1:
                grow(mask | 1 << v, forbidden | adj[v], v)

    grow(0, 0, G.n)
    out.sort()
    return out


def mask_members(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _cover_model(G: UnitDistanceGraph, form: str, atoms: list[int]) -> LpModel:
    if form not in ("inequality", "equality"):
        raise ValueError("form must be 'inequality' or 'equality'")
    model = LpModel(maximize=False, name="fractional-chromatic")
    for S in atoms:
        model.add_variable(f"g{S:x}", "atom", 1)
    sense = ">=" if form == "inequality" else "="
    for v in range(G.n):
        cols = [k for k, S in enumerate(atoms) if S >> v & 1]
        model.add_row(cols, [1] * len(cols), sense, 1, "FCN-cover", f"cover{v + 1}")
    return model


def _solve(model: LpModel) -> Fraction:
    sol = solve_exact(model)
    if not sol.optimal:
        raise RuntimeError(f"exact LP ended with status {sol.status}")
    return sol.objective


def fractional_chromatic(G: UnitDistanceGraph, form: str = "inequality") -> Fraction:
    atoms = [S for S in independent_sets(G) if S]
    return _solve(_cover_model(G, form, atoms))


def geometric_fractional_chromatic(X: PointSet, k_max: int = 2) -> Fraction:
    if not X.exact:
        raise ValueError("geometric fractional chromatic number needs an exact point set")
    G = build_udg(X)
    atoms = [S for S in independent_sets(G) if S]
    model = _cover_model(G, "equality", atoms)
    for I, J in congruence_pairs(X, 1, k_max, True, G):
        mi = sum(1 << v for v in I)
        mj = sum(1 << v for v in J)
        coef: dict[int, int] = {}
        for k, T in enumerate(atoms):
            c = (T & mi == mi) - (T & mj == mj)
            if c:
                coef[k] = c
        if coef:
            cols = sorted(coef)
            model.add_row(cols, [coef[k] for k in cols], "=", 0, "GFCN-congruence")
    return _solve(model)
