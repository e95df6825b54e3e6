"""Text formats: point-set files, birth-order files and key = value run configs."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .algebra import FieldElement
from .geometry import ExactPoint, PointSet


class FormatError(ValueError):
    pass


@dataclass
class PointSetFile:
    mode: str
    points: list
    edges: list[tuple[int, int]] | None = None  # 1-based, as written

    def point_set(self) -> PointSet:
        return PointSet(self.points)


def _clean(text: str) -> list[tuple[int, str]]:
    out = []
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def parse_points(text: str) -> PointSetFile:
    lines = _clean(text)
    if not lines:
        raise FormatError("empty point-set file")
    no, head = lines[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] not in ("exact", "float"):
        raise FormatError(f"line {no}: expected header 'exact N' or 'float N'")
    mode = parts[0]
    try:
        n = int(parts[1])
    except ValueError:
        raise FormatError(f"line {no}: bad point count") from None
    body = lines[1:]
    if len(body) < n:
        raise FormatError(f"expected {n} points, found {len(body)}")
    points = []
    for no, line in body[:n]:
        toks = line.split()
        try:
            if mode == "exact":
                if len(toks) != 8:
                    raise FormatError(f"line {no}: exact points need 8 rational tokens")
                points.append(ExactPoint(FieldElement.from_tokens(toks[:4]), FieldElement.from_tokens(toks[4:])))
            else:
                if len(toks) != 2:
                    raise FormatError(f"line {no}: float points need 2 tokens")
                points.append(complex(float(toks[0]), float(toks[1])))
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {no}: {exc}") from None
    rest = body[n:]
    edges = None
    if rest:
        no, line = rest[0]
        if line != "[edges]":
            raise FormatError(f"line {no}: unexpected content after points")
        edges = []
        for no, line in rest[1:]:
            toks = line.split()
            if len(toks) != 2:
                raise FormatError(f"line {no}: an edge is two indices")
            i, j = int(toks[0]), int(toks[1])
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise FormatError(f"line {no}: edge indices out of range")
            edges.append((i, j))
    return PointSetFile(mode, points, edges)


def format_points(f: PointSetFile, comment: str | None = None) -> str:
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(f"{f.mode} {len(f.points)}")
    for p in f.points:
        if f.mode == "exact":
            out.append(" ".join(p.re.to_tokens() + p.im.to_tokens()))
        else:
            p = complex(p)
            out.append(f"{p.real!r} {p.imag!r}")
    if f.edges is not None:
        out.append("[edges]")
        out.extend(f"{i} {j}" for i, j in f.edges)
    return "\n".join(out) + "\n"


def point_file_from_set(X: PointSet, edges=None) -> PointSetFile:
    return PointSetFile("exact" if X.exact else "float", list(X.points), edges)


FIXTURES = ("moser-spindle", "x23", "x23-float", "x23-order", "k2", "k3", "table2-partial-cert")


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture by short name (``x23``) or file name."""
    data = resources.files("moserlp") / "data"
    for cand in (name, name + ".pts", name + ".order", name + ".cert"):
        p = data / cand
        if p.is_file():
            return Path(str(p))
    raise FileNotFoundError(name)


def resolve(path_or_name: str) -> Path:
    p = Path(path_or_name)
    if p.exists():
        return p
    try:
        return fixture_path(path_or_name)
    except FileNotFoundError:
        raise FileNotFoundError(f"no such file or bundled fixture: {path_or_name}") from None


def load_points(path_or_name: str) -> PointSetFile:
    return parse_points(resolve(path_or_name).read_text())


# --- birth-order files --------------------------------------------------------
@dataclass
class BirthOrder:
    """``root`` names an exact file whose points are the first entries; the rest follow in order."""

    root: str | None = None
    order: list[int] = field(default_factory=list)  # 0-based point indices
    anchors: dict[int, tuple[int, ...]] = field(default_factory=dict)


def parse_order(text: str) -> BirthOrder:
    bo = BirthOrder()
    for no, line in _clean(text):
        toks = line.split()
        if toks[0] == "root":
            if len(toks) != 2 or bo.root is not None:
                raise FormatError(f"line {no}: 'root <file>' given twice or malformed")
            bo.root = toks[1]
            continue
        try:
            idx = [int(t) - 1 for t in toks]
        except ValueError:
            raise FormatError(f"line {no}: indices must be integers") from None
        if min(idx) < 0:
            raise FormatError(f"line {no}: indices are 1-based")
        bo.order.append(idx[0])
        if len(idx) > 1:
            bo.anchors[idx[0]] = tuple(idx[1:])
    return bo


def format_order(bo: BirthOrder) -> str:
    out = []
    if bo.root:
        out.append(f"root {bo.root}")
    for i in bo.order:
        out.append(" ".join(str(k + 1) for k in (i, *bo.anchors.get(i, ()))))
    return "\n".join(out) + "\n"


# --- run configuration --------------------------------------------------------
@dataclass
class RunConfig:
    grid_step: float = 0.05
    grid_tmax: float = 600.0
    iec_kmin: int = 1
    iec_kmax: int = 0  # 0: every subset size
    iec_independent: bool = True
    dedup: bool = False
    time_limit: float = 0.0
    verify_T: float = 10000.0
    verify_h: float = 1e-4
    nu_cap: float = 1e-5
    search_width: int = 100
    search_depth: int = 1
    search_step: float = 0.1
    search_tmax: float = 120.0
    workers: int = 0

    def __post_init__(self):
        if self.workers == 0:
            self.workers = int(os.environ.get("MOSERLP_WORKERS", "1"))


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    types = {f.name: f.type for f in fields(RunConfig)}
    updates = {}
    for no, line in _clean(text):
        if "=" not in line:
            raise FormatError(f"line {no}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_").replace(".", "_")
        if key not in types:
            raise FormatError(f"line {no}: unknown key {key!r}")
        kind = types[key]
        try:
            if kind == "bool":
                if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(val)
                updates[key] = val.lower() in ("true", "1", "yes")
            elif kind == "int":
                updates[key] = int(val)
            else:
                updates[key] = float(val)
        except ValueError:
            raise FormatError(f"line {no}: bad value for {key}") from None
    return replace(cfg, **updates)


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {getattr(cfg, f.name)}\n" for f in fields(RunConfig))
