"""The master linear program over Fourier masses and atom densities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .bessel import j0
from .geometry import PointSet, congruence_pairs
from .udgraph import UnitDistanceGraph, build_udg, independent_sets

CROFT_X = 0.96553
CROFT_DENSITY = 0.22936


@dataclass(frozen=True)
class FourierGrid:
    step: float = 0.05
    t_max: float = 600.0

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError("grid step must be positive")
        if not (self.t_max >= 0 and math.isfinite(self.t_max)):
            raise ValueError("t_max must be non-negative")

    @property
    def size(self) -> int:
        return int(math.floor(self.t_max / self.step + 1e-9)) + 1

    def nodes(self) -> np.ndarray:
        return np.arange(self.size, dtype=float) * self.step

    def describe(self) -> str:
        return f"step={self.step!r} tmax={self.t_max!r}"


@dataclass(frozen=True)
class IecPolicy:
    k_min: int = 1
    k_max: int | None = None  # all sizes
    independent_only: bool = True
    dedup: bool = False

    def describe(self) -> str:
        kmax = "all" if self.k_max is None else self.k_max
        return (f"kmin={self.k_min} kmax={kmax} independent={int(self.independent_only)} "
                f"dedup={int(self.dedup)}")


@dataclass
class MoserLpInstance:
    X: PointSet
    G: UnitDistanceGraph
    atoms: list[int]
    grid: FourierGrid
    policy: IecPolicy
    model: lp.LpModel
    kappa_cols: range
    atom_cols: range
    ie1_vertices: list[int]
    ie2_pairs: list[tuple[int, int, float]]
    iec_pairs: list[tuple[tuple[int, ...], tuple[int, ...]]]
    rows: dict[str, list[int]] = field(default_factory=dict)

    def summary(self) -> str:
        counts = self.model.role_counts()
        lines = [f"{'points':<18}{len(self.X):>8}", f"{'unit edges':<18}{len(self.G.edges):>8}",
                 f"{'fourier columns':<18}{len(self.kappa_cols):>8}",
                 f"{'atom columns':<18}{len(self.atom_cols):>8}"]
        for role in ("C0", "IET", "IE1", "IE2", "IEC"):
            lines.append(f"{role + ' rows':<18}{counts.get('row:' + role, 0):>8}")
        return "\n".join(lines)

    def fingerprint(self) -> dict[str, str]:
        return {"points": self.X.digest(), "n": str(len(self.X)), "grid": self.grid.describe(),
                "iec": self.policy.describe()}


def _superset_cols(atoms: list[int], mask: int, offset: int) -> list[int]:
    return [offset + k for k, S in enumerate(atoms) if S & mask == mask]


def build(X: PointSet, grid: FourierGrid | None = None, iec_k_min: int = 1, iec_k_max: int | None = None,
          *, independent_only: bool = True, dedup: bool = False) -> MoserLpInstance:
    """Assemble the program: maximize the Fourier mass subject to C0, IET, IE1, IE2 and IEC rows."""
    grid = grid or FourierGrid()
    policy = IecPolicy(iec_k_min, iec_k_max, independent_only, dedup)
    n = len(X)
    G = build_udg(X)
    atoms = independent_sets(G)
    t = grid.nodes()
    model = lp.LpModel(maximize=True, name="moser-lp")
    for i in range(len(t)):
        model.add_variable(f"kappa{i}", "fourier", 1.0)
    k0 = len(t)
    for S in atoms:
        model.add_variable(f"a{S:x}", "atom")
    kappa_cols = range(0, k0)
    atom_cols = range(k0, k0 + len(atoms))
    rows: dict[str, list[int]] = {r: [] for r in ("C0", "IET", "IE1", "IE2", "IEC")}
    kc = np.arange(k0)

    rows["C0"].append(model.add_row(kc, j0(t), "=", 0.0, "C0", "C0"))
    rows["IET"].append(model.add_row(list(atom_cols), [1.0] * len(atoms), "=", 1.0, "IET", "IET"))

    ie1_vertices = [0] if dedup else list(range(n))
    ones = np.ones(k0)
    for j in ie1_vertices:
        sc = _superset_cols(atoms, 1 << j, k0)
        model.add_row(np.concatenate([kc, sc]), np.concatenate([ones, -np.ones(len(sc))]), "=", 0.0,
                      "IE1", f"IE1_{j + 1}")
        rows["IE1"].append(model.n_rows - 1)

    ids = X.distance_ids
    seen_dist: set[int] = set()
    ie2_pairs = []
    for j in range(n):
        for k in range(j + 1, n):
            if X.is_unit(j, k):
                continue
            if dedup:
                if ids[j][k] in seen_dist:
                    continue
                seen_dist.add(ids[j][k])
            d = X.distance(j, k)
            sc = _superset_cols(atoms, 1 << j | 1 << k, k0)
            model.add_row(np.concatenate([kc, sc]), np.concatenate([j0(t * d), -np.ones(len(sc))]), "=", 0.0,
                          "IE2", f"IE2_{j + 1}_{k + 1}")
            rows["IE2"].append(model.n_rows - 1)
            ie2_pairs.append((j, k, d))

    iec_pairs = []
    if dedup:
        # the minimal variant moves singleton and pair equalities into congruence rows
        iec_pairs.extend(congruence_pairs(X, 1, 2, independent_only, G))
    k_lo = max(iec_k_min, 3) if dedup else iec_k_min
    k_hi = n if iec_k_max is None else min(iec_k_max, n)
    if k_lo <= k_hi:
        iec_pairs.extend(congruence_pairs(X, k_lo, k_hi, independent_only, G))
    for I, J in iec_pairs:
        mi = sum(1 << v for v in I)
        mj = sum(1 << v for v in J)
        coef: dict[int, float] = {}
        for kk, S in enumerate(atoms):
            c = (S & mi == mi) - (S & mj == mj)
            if c:
                coef[k0 + kk] = float(c)
        cols = sorted(coef)
        name = "IEC_" + "-".join(str(v + 1) for v in I) + "_" + "-".join(str(v + 1) for v in J)
        rows["IEC"].append(model.add_row(cols, [coef[c] for c in cols], "=", 0.0, "IEC", name))

    return MoserLpInstance(X, G, atoms, grid, policy, model, kappa_cols, atom_cols, ie1_vertices,
                           ie2_pairs, iec_pairs, rows)


class SolverFailure(RuntimeError):
    def __init__(self, status: str, message: str = ""):
        super().__init__(f"solver status {status}: {message}".rstrip(": "))
        self.status = status


def solve_instance(inst: MoserLpInstance, *, time_limit: float | None = None,
                   method: str = "highs-ipm") -> lp.LpSolution:
    # dual simplex stalls on the full-size programs; interior point with crossover still yields a basic solution
    sol = lp.solve(inst.model, time_limit=time_limit, method=method)
    if not sol.optimal:
        raise SolverFailure(sol.status, sol.message)
    return sol


def upper_bound(X: PointSet, grid: FourierGrid | None = None, iec_k_min: int = 1, iec_k_max: int | None = None,
                **kw) -> float:
    time_limit = kw.pop("time_limit", None)
    inst = build(X, grid, iec_k_min, iec_k_max, **kw)
    return solve_instance(inst, time_limit=time_limit).objective


def autocorrelation_profile(kappa, grid: FourierGrid, radii) -> list[tuple[float, float]]:
    """Pairs (r, sum_i kappa_i J0(t_i r))."""
    kappa = np.asarray(kappa, dtype=float)
    t = grid.nodes()
    if kappa.shape != t.shape:
        raise ValueError("kappa does not match the grid")
    out = []
    for r in radii:
        out.append((float(r), float(np.dot(kappa, j0(t * float(r))))))
    return out


def croft_density(x: float) -> float:
    """Density of the hexagonal packing of radius-1/2 discs clipped by hexagons of height x."""
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    r, d = 0.5, x / 2
    if 2 * d / math.sqrt(3) <= r:
        # hexagon corners lie inside the disc
        area = 2 * math.sqrt(3) * d * d
    else:
        area = math.pi * r * r
        if d < r:
            area -= 6 * (r * r * math.acos(d / r) - d * math.sqrt(r * r - d * d))
    return area / (math.sqrt(3) / 2 * (1 + x) ** 2)
