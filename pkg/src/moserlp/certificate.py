"""Dual certificates: extraction from a solved program, text round-trip and rigorous verification.

A certificate (w0, wT, w1, w2, wc) proves an upper bound wT on the density of a
unit-distance avoiding planar set once

* W(t) = w0 J0(t) + sum_j w1(j) + sum_{j<k} w2(j,k) J0(|x_j - x_k| t) >= 1 for all t >= 0, and
* V(S) = wT - sum_{i in S} w1(i) - sum_{pairs in S} w2 + sum_{I in S} wc - sum_{J in S} wc >= 0
  for every independent set S of the unit-distance graph.

Verification measures the slacks nu (atoms) and mu (Bessel sum) and reports
(wT + nu) / (1 - mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .bessel import CertifiedMinReport, WeightedBesselSum, certified_min
from .geometry import PointSet
from .lp import LpSolution
from .moser_lp import MoserLpInstance
from .udgraph import build_udg, independent_sets

DEFAULT_NU_CAP = 1e-5


class CertificateError(ValueError):
    """Malformed certificate or provenance mismatch."""


class VerificationFailure(Exception):
    def __init__(self, reason: str, result: CertifiedBound | None = None):
        super().__init__(reason)
        self.reason = reason
        self.result = result


Subset = tuple[int, ...]


@dataclass
class DualCertificate:
    w0: float
    wT: float
    w1: dict[int, float] = field(default_factory=dict)
    w2: dict[tuple[int, int], float] = field(default_factory=dict)
    wc: dict[tuple[Subset, Subset], float] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)
    report: str = ""

    def __post_init__(self):
        vals = [self.w0, self.wT, *self.w1.values(), *self.w2.values(), *self.wc.values()]
        if not all(math.isfinite(v) for v in vals):
            raise CertificateError("certificate entries must be finite")
        for j, k in self.w2:
            if j == k:
                raise CertificateError("w2 pair with repeated index")
        for I, J in self.wc:
            if len(I) != len(J) or not I:
                raise CertificateError("wc pairs need equal, non-empty index sets")

    def check_indices(self, n: int) -> None:
        idx = list(self.w1)
        for pair in self.w2:
            idx.extend(pair)
        for I, J in self.wc:
            idx.extend(I)
            idx.extend(J)
        if idx and not (0 <= min(idx) and max(idx) < n):
            raise CertificateError(f"certificate references indices outside 1..{n}")

    def weighted_sum(self, X: PointSet) -> WeightedBesselSum:
        terms = tuple((c, X.distance(j, k)) for (j, k), c in sorted(self.w2.items()) if c != 0.0)
        return WeightedBesselSum(self.w0, math.fsum(self.w1.values()), terms)

    def with_wc(self, wc: dict) -> DualCertificate:
        return DualCertificate(self.w0, self.wT, dict(self.w1), dict(self.w2), dict(wc), dict(self.provenance))

    def __eq__(self, other):
        if not isinstance(other, DualCertificate):
            return NotImplemented
        return (self.w0, self.wT, self.w1, self.w2, self.wc, self.provenance) == \
               (other.w0, other.wT, other.w1, other.w2, other.wc, other.provenance)


# --- extraction ---------------------------------------------------------------
def extract(inst: MoserLpInstance, sol: LpSolution, *, drop_zero: bool = True) -> DualCertificate:
    """Read the weights off the row duals of a solved instance."""
    if not sol.optimal:
        raise CertificateError(f"cannot extract from a {sol.status} solution")
    y = sol.y
    if len(y) != inst.model.n_rows:
        raise CertificateError("solution does not belong to this instance")

    def keep(v):
        return not drop_zero or v != 0.0

    w0 = float(y[inst.rows["C0"][0]])
    wT = float(y[inst.rows["IET"][0]])
    w1 = {j: float(y[r]) for j, r in zip(inst.ie1_vertices, inst.rows["IE1"]) if keep(y[r])}
    w2 = {(j, k): float(y[r]) for (j, k, _), r in zip(inst.ie2_pairs, inst.rows["IE2"]) if keep(y[r])}
    wc = {pair: float(y[r]) for pair, r in zip(inst.iec_pairs, inst.rows["IEC"]) if keep(y[r])}
    return DualCertificate(w0, wT, w1, w2, wc, inst.fingerprint())


# --- text format --------------------------------------------------------------
def _fmt_set(S: Subset) -> str:
    return ",".join(str(v + 1) for v in S)


def _parse_set(tok: str) -> Subset:
    return tuple(int(v) - 1 for v in tok.split(","))


def format_certificate(c: DualCertificate) -> str:
    out = ["[meta]"]
    out += [f"{k} = {v}" for k, v in c.provenance.items()]
    out += ["[scalars]", f"w0 = {c.w0!r}", f"wT = {c.wT!r}", "[w1]"]
    out += [f"{j + 1} {v!r}" for j, v in sorted(c.w1.items())]
    out.append("[w2]")
    out += [f"{j + 1} {k + 1} {v!r}" for (j, k), v in sorted(c.w2.items())]
    out.append("[wc]")
    out += [f"{_fmt_set(I)} {_fmt_set(J)} {v!r}" for (I, J), v in c.wc.items()]
    if c.report:
        out.append("[report]")
        out += c.report.rstrip("\n").splitlines()
    return "\n".join(out) + "\n"


def parse_certificate(text: str) -> DualCertificate:
    section = None
    meta: dict[str, str] = {}
    scalars: dict[str, float] = {}
    w1: dict[int, float] = {}
    w2: dict[tuple[int, int], float] = {}
    wc: dict[tuple[Subset, Subset], float] = {}
    report: list[str] = []
    for no, raw in enumerate(text.splitlines(), 1):
        if section == "report":
            if raw.strip().startswith("[") and raw.strip().endswith("]") and raw.strip() != "[report]":
                raise CertificateError(f"line {no}: sections may not follow [report]")
            report.append(raw)
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            if section not in ("meta", "scalars", "w1", "w2", "wc", "report"):
                raise CertificateError(f"line {no}: unknown section {line}")
            continue
        try:
            if section == "meta":
                k, v = (s.strip() for s in line.split("=", 1))
                meta[k] = v
            elif section == "scalars":
                k, v = (s.strip() for s in line.split("=", 1))
                if k not in ("w0", "wT"):
                    raise CertificateError(f"line {no}: unknown scalar {k}")
                scalars[k] = float(v)
            elif section == "w1":
                a, v = line.split()
                w1[int(a) - 1] = float(v)
            elif section == "w2":
                a, b, v = line.split()
                j, k = sorted((int(a) - 1, int(b) - 1))
                w2[(j, k)] = float(v)
            elif section == "wc":
                a, b, v = line.split()
                wc[(_parse_set(a), _parse_set(b))] = float(v)
            else:
                raise CertificateError(f"line {no}: content outside a section")
        except ValueError as exc:
            if isinstance(exc, CertificateError):
                raise
            raise CertificateError(f"line {no}: {exc}") from None
    if set(scalars) != {"w0", "wT"}:
        raise CertificateError("[scalars] must define w0 and wT")
    rep = "\n".join(report).strip("\n")
    return DualCertificate(scalars["w0"], scalars["wT"], w1, w2, wc, meta, rep + "\n" if rep else "")


# --- atom check ---------------------------------------------------------------
def _check_provenance(X: PointSet, cert: DualCertificate) -> None:
    digest = cert.provenance.get("points")
    if digest is None or digest != X.digest():
        raise CertificateError("certificate provenance does not match the point set")
    if "n" in cert.provenance and int(cert.provenance["n"]) != len(X):
        raise CertificateError("certificate provenance does not match the point count")
    cert.check_indices(len(X))


@dataclass
class VReport:
    nu: float
    nu_exact: Fraction
    min_V: float
    argmin_atom: tuple[int, ...]
    atoms: int


def _v_values(X: PointSet, cert: DualCertificate, atoms: list[int]) -> tuple[list[Fraction], list[int]]:
    # every double is an exact dyadic rational; V is accumulated exactly
    contrib: dict[int, Fraction] = {}

    def add(mask: int, v: float):
        if v != 0.0:
            contrib[mask] = contrib.get(mask, Fraction(0)) + Fraction(v)

    for j, v in cert.w1.items():
        add(1 << j, -v)
    for (j, k), v in cert.w2.items():
        add(1 << j | 1 << k, -v)
    for (I, J), v in cert.wc.items():
        add(sum(1 << i for i in I), v)
        add(sum(1 << i for i in J), -v)
    wT = Fraction(cert.wT)
    values = []
    for S in atoms:
        total = wT
        sub = S
        while True:
            c = contrib.get(sub)
            if c is not None:
                total += c
            if sub == 0:
                break
            sub = (sub - 1) & S
        values.append(total)
    return values, atoms


def check_V(X: PointSet | MoserLpInstance, cert: DualCertificate) -> VReport:
    """nu = max(0, -min_S V(S)) over all independent atoms, evaluated exactly."""
    if isinstance(X, MoserLpInstance):
        atoms = X.atoms
        X = X.X
    else:
        atoms = independent_sets(build_udg(X))
    _check_provenance(X, cert)
    values, atoms = _v_values(X, cert, atoms)
    k = min(range(len(values)), key=values.__getitem__)
    vmin = values[k]
    nu_exact = max(Fraction(0), -vmin)
    nu = float(nu_exact)
    if Fraction(nu) < nu_exact:
        nu = math.nextafter(nu, math.inf)
    members = tuple(i + 1 for i in range(len(X)) if atoms[k] >> i & 1)
    return VReport(nu, nu_exact, float(vmin), members, len(atoms))


# --- verification -------------------------------------------------------------
@dataclass
class CertifiedBound:
    raw_wT: float
    nu: float
    mu: float
    final_bound: float
    tail_bound: float
    min_report: CertifiedMinReport
    v_report: VReport
    passed: bool = True
    reason: str = ""

    def to_text(self) -> str:
        lines = [
            f"wT = {self.raw_wT!r}",
            f"nu = {self.nu!r}",
            f"min_V_atom = {' '.join(map(str, self.v_report.argmin_atom)) or '(empty)'}",
            f"atoms = {self.v_report.atoms}",
            f"mu = {self.mu!r}",
            f"tail_bound = {self.tail_bound!r}",
            f"final_bound = {self.final_bound!r}",
            f"status = {'PASS' if self.passed else 'FAIL'}",
        ]
        if self.reason:
            lines.append(f"reason = {self.reason}")
        return "\n".join(lines) + "\n" + self.min_report.to_text() + "\n"


def _round_up(x: float) -> float:
    return math.nextafter(x, math.inf)


def verify(X: PointSet, cert: DualCertificate, T: float = 1e4, h: float = 1e-4, *,
           nu_cap: float = DEFAULT_NU_CAP, coarse_step: float | None = None,
           tail_scale_floor: float | None = None, tail_coef: float | None = None,
           raise_on_failure: bool = True) -> CertifiedBound:
    """Check both halves of the certificate and return the certified bound (wT + nu) / (1 - mu)."""
    if not X.exact:
        raise CertificateError("verification needs exact points")
    vrep = check_V(X, cert)
    W = cert.weighted_sum(X)
    rep = certified_min(W, T, h, coarse_step=coarse_step, tail_scale_floor=tail_scale_floor,
                        tail_coef=tail_coef)
    lower = min(rep.certified_lower_bound, rep.tail_bound)
    mu = max(0.0, _round_up(1.0 - lower))
    reason = ""
    if rep.tail_bound < 1.0:
        reason = f"tail bound {rep.tail_bound!r} < 1 on [{T!r}, inf)"
    elif mu >= 1.0:
        reason = f"mu = {mu!r} >= 1"
    elif vrep.nu > nu_cap:
        reason = f"atom violation nu = {vrep.nu!r} exceeds cap {nu_cap!r}"
    final = _round_up((cert.wT + vrep.nu) / (1.0 - mu)) if mu < 1.0 else math.inf
    result = CertifiedBound(cert.wT, vrep.nu, mu, final, rep.tail_bound, rep, vrep, not reason, reason)
    if reason and raise_on_failure:
        raise VerificationFailure(reason, result)
    return result


# --- fitting wc to given scalars ----------------------------------------------
def fit_wc(inst: MoserLpInstance, cert: DualCertificate, *, time_limit: float | None = None) -> tuple[DualCertificate, float]:
    """Choose wc for fixed (w0, wT, w1, w2) minimising the largest atom violation.

    Solves  min nu  s.t.  V(S) + nu >= 0 for every atom S,  over free wc and nu >= 0.
    Returns the completed certificate and the optimal nu reported by the solver.
    """
    from . import lp

    base, atoms = _v_values(inst.X, cert.with_wc({}), inst.atoms)
    model = lp.LpModel(maximize=False, name="fit-wc")
    nu = model.add_variable("nu", "auxiliary", 1.0)
    cols_by_atom: list[dict[int, float]] = [dict() for _ in atoms]
    index = {S: k for k, S in enumerate(atoms)}
    for p, (I, J) in enumerate(inst.iec_pairs):
        pos = model.add_variable(f"wc{p}+", "auxiliary")
        neg = model.add_variable(f"wc{p}-", "auxiliary")
        mi = sum(1 << v for v in I)
        mj = sum(1 << v for v in J)
        for S, k in index.items():
            c = (S & mi == mi) - (S & mj == mj)
            if c:
                cols_by_atom[k][pos] = float(c)
                cols_by_atom[k][neg] = -float(c)
    for k, S in enumerate(atoms):
        row = cols_by_atom[k]
        row[nu] = 1.0
        cols = sorted(row)
        model.add_row(cols, [row[c] for c in cols], ">=", -float(base[k]), "other")
    sol = lp.solve(model, time_limit=time_limit)
    if not sol.optimal:
        raise CertificateError(f"wc fit failed: {sol.status}")
    wc = {}
    for p, pair in enumerate(inst.iec_pairs):
        v = float(sol.x[1 + 2 * p] - sol.x[2 + 2 * p])
        if v != 0.0:
            wc[pair] = v
    out = cert.with_wc(wc)
    out.provenance = {**cert.provenance, **inst.fingerprint()}
    return out, float(sol.objective)
