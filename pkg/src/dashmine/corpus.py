"""Canonical dashboard specification: types, parsing, grid normalization, stats.

A dashboard is a set of rectangular views on a pixel canvas plus directed
filter/brush links between views.  All downstream analysis works on the
normalized n x n grid (n = 4 by default), with the origin at the top-left
and y increasing downward, so the top row is gy = 0.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

GRID_N = 4

DTYPES = ("numerical", "nominal", "ordinal")
OPS = ("none", "count", "sum", "avg", "min", "max")
MARKS = (
    "bar",
    "line",
    "area",
    "circle",
    "square",
    "shape",
    "text",
    "text_table",
    "map",
    "pie",
    "gantt",
    "polygon",
    "heatmap",
)
CHANNELS = ("x", "y", "color", "size", "shape")
COORDINATION_KINDS = ("filter", "brush")


class SpecError(ValueError):
    """Invalid dashboard specification; `path` is the offending JSON pointer."""

    def __init__(self, message: str, path: str = "") -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


@dataclass(frozen=True)
class DataField:
    name: str
    dtype: str
    op: str = "none"

    def __post_init__(self) -> None:
        if not self.name:
            raise SpecError("field name must be non-empty")
        if self.dtype not in DTYPES:
            raise SpecError(f"unknown dtype {self.dtype!r}")
        if self.op not in OPS:
            raise SpecError(f"unknown op {self.op!r}")


@dataclass(frozen=True)
class ViewSpec:
    id: str
    mark: str
    fields: tuple[DataField, ...] = ()
    encodings: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    layout_px: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise SpecError("view id must be non-empty")
        if self.mark not in MARKS:
            raise SpecError(f"unknown mark {self.mark!r}")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SpecError(f"duplicate field name in view {self.id!r}")
        enc = {ch: tuple(self.encodings.get(ch, ())) for ch in CHANNELS}
        for extra in set(self.encodings) - set(CHANNELS):
            raise SpecError(f"unknown channel {extra!r} in view {self.id!r}")
        known = set(names)
        for ch in CHANNELS:
            for fname in enc[ch]:
                if fname not in known:
                    raise SpecError(
                        f"encoded field {fname!r} not in field list of view {self.id!r}"
                    )
        object.__setattr__(self, "encodings", enc)
        if self.layout_px is not None:
            x, y, w, h = self.layout_px
            if w <= 0 or h <= 0:
                raise SpecError(f"view {self.id!r} must have positive size")

    def field_names(self) -> frozenset[str]:
        return frozenset(f.name for f in self.fields)

    def channel_fields(self, channel: str) -> tuple[str, ...]:
        return tuple(self.encodings.get(channel, ()))


@dataclass(frozen=True)
class Coordination:
    source: str
    target: str
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in COORDINATION_KINDS:
            raise SpecError(f"unknown coordination kind {self.kind!r}")
        if self.source == self.target:
            raise SpecError("coordination source and target must differ")


@dataclass(frozen=True)
class GridArrangement:
    view: str
    gx: int
    gy: int
    gw: int
    gh: int
    n: int = GRID_N

    def __post_init__(self) -> None:
        if not (0 <= self.gx and 0 <= self.gy):
            raise SpecError(f"negative grid position for view {self.view!r}")
        if not (1 <= self.gw and 1 <= self.gh):
            raise SpecError(f"grid span must be >= 1 for view {self.view!r}")
        if self.gx + self.gw > self.n or self.gy + self.gh > self.n:
            raise SpecError(f"view {self.view!r} exceeds the {self.n}x{self.n} grid")

    @property
    def rect(self) -> tuple[int, int, int, int]:
        return (self.gx, self.gy, self.gw, self.gh)


def rects_overlap(a: tuple, b: tuple) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


@dataclass(frozen=True)
class DashboardSpec:
    id: str
    canvas_px: tuple[float, float]
    views: tuple[ViewSpec, ...]
    coordinations: tuple[Coordination, ...] = ()

    def __post_init__(self) -> None:
        if len(self.views) < 2:
            raise SpecError(f"dashboard {self.id!r} needs at least 2 views")
        w, h = self.canvas_px
        if w <= 0 or h <= 0:
            raise SpecError(f"dashboard {self.id!r} canvas must be positive")
        ids = [v.id for v in self.views]
        if len(set(ids)) != len(ids):
            raise SpecError(f"duplicate view id in dashboard {self.id!r}")
        known = set(ids)
        seen_links = set()
        for c in self.coordinations:
            for vid in (c.source, c.target):
                if vid not in known:
                    raise SpecError(f"coordination references unknown view {vid!r}")
            if (c.source, c.target) in seen_links:
                raise SpecError(
                    f"duplicate coordination {c.source!r} -> {c.target!r}"
                )
            seen_links.add((c.source, c.target))
        placed = [v for v in self.views if v.layout_px is not None]
        for i, a in enumerate(placed):
            for b in placed[i + 1 :]:
                if rects_overlap(a.layout_px, b.layout_px):
                    raise SpecError(
                        f"views {a.id!r} and {b.id!r} overlap in pixel layout"
                    )

    def view(self, view_id: str) -> ViewSpec:
        for v in self.views:
            if v.id == view_id:
                return v
        raise KeyError(view_id)

    def link_kind(self, source: str, target: str) -> str | None:
        for c in self.coordinations:
            if c.source == source and c.target == target:
                return c.kind
        return None


# ---------------------------------------------------------------------------
# Parsing and serialization


def _expect(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SpecError(f"missing required key {key!r}", path)
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise SpecError(f"key {key!r} has wrong type", f"{path}/{key}")
    return value


def _parse_view(raw, path: str) -> ViewSpec:
    vid = _expect(raw, "id", path, str)
    mark = _expect(raw, "mark", path, str)
    if mark not in MARKS:
        raise SpecError(f"unknown mark {mark!r}", f"{path}/mark")
    fields = []
    for i, rf in enumerate(_expect(raw, "fields", path, list)):
        fpath = f"{path}/fields/{i}"
        name = _expect(rf, "name", fpath, str)
        dtype = _expect(rf, "dtype", fpath, str)
        op = rf.get("op", "none")
        if dtype not in DTYPES:
            raise SpecError(f"unknown dtype {dtype!r}", f"{fpath}/dtype")
        if not isinstance(op, str) or op not in OPS:
            raise SpecError(f"unknown op {op!r}", f"{fpath}/op")
        if not name:
            raise SpecError("field name must be non-empty", f"{fpath}/name")
        fields.append(DataField(name=name, dtype=dtype, op=op))
    if len({f.name for f in fields}) != len(fields):
        raise SpecError("duplicate field name", f"{path}/fields")

    encodings = {}
    raw_enc = _expect(raw, "encodings", path, dict)
    for ch in set(raw_enc) - set(CHANNELS):
        raise SpecError(f"unknown channel {ch!r}", f"{path}/encodings")
    known = {f.name for f in fields}
    for ch in CHANNELS:
        entries = raw_enc.get(ch, [])
        if not isinstance(entries, list):
            raise SpecError("channel must map to a list", f"{path}/encodings/{ch}")
        for j, fname in enumerate(entries):
            if fname not in known:
                raise SpecError(
                    f"encoded field {fname!r} not declared in fields",
                    f"{path}/encodings/{ch}/{j}",
                )
        encodings[ch] = tuple(entries)

    layout = None
    if raw.get("layout") is not None:
        lp = f"{path}/layout"
        rl = raw["layout"]
        layout = tuple(float(_expect(rl, k, lp, (int, float))) for k in
                       ("x_px", "y_px", "w_px", "h_px"))
        if layout[2] <= 0 or layout[3] <= 0:
            raise SpecError("view size must be positive", lp)
    try:
        return ViewSpec(id=vid, mark=mark, fields=tuple(fields),
                        encodings=encodings, layout_px=layout)
    except SpecError as exc:
        raise SpecError(exc.message, path) from None


def parse_dashboard(text: str, *, require_layout: bool = True) -> DashboardSpec:
    """Parse and validate one dashboard from its canonical JSON text.

    With `require_layout=False` the per-view `layout` block and the
    `coordinations` list may be omitted (the recommender's input format,
    where arrangement and coordination are outputs).
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise SpecError("top level must be an object")

    did = _expect(raw, "id", "", str)
    canvas = _expect(raw, "canvas", "", dict)
    cw = float(_expect(canvas, "width_px", "/canvas", (int, float)))
    ch = float(_expect(canvas, "height_px", "/canvas", (int, float)))
    if cw <= 0 or ch <= 0:
        raise SpecError("canvas must be positive", "/canvas")

    views = []
    for i, rv in enumerate(_expect(raw, "views", "", list)):
        view = _parse_view(rv, f"/views/{i}")
        if require_layout and view.layout_px is None:
            raise SpecError("missing required key 'layout'", f"/views/{i}")
        views.append(view)
    if len(views) < 2:
        raise SpecError("dashboard needs at least 2 views", "/views")
    ids = [v.id for v in views]
    if len(set(ids)) != len(ids):
        raise SpecError("duplicate view id", "/views")

    coords = []
    raw_coords = raw.get("coordinations", [])
    if not isinstance(raw_coords, list):
        raise SpecError("coordinations must be a list", "/coordinations")
    known = set(ids)
    seen = set()
    for i, rc in enumerate(raw_coords):
        cpath = f"/coordinations/{i}"
        src = _expect(rc, "source", cpath, str)
        tgt = _expect(rc, "target", cpath, str)
        kind = _expect(rc, "kind", cpath, str)
        if kind not in COORDINATION_KINDS:
            raise SpecError(f"unknown coordination kind {kind!r}", f"{cpath}/kind")
        if src not in known:
            raise SpecError(f"unknown view id {src!r}", f"{cpath}/source")
        if tgt not in known:
            raise SpecError(f"unknown view id {tgt!r}", f"{cpath}/target")
        if src == tgt:
            raise SpecError("source and target must differ", cpath)
        if (src, tgt) in seen:
            raise SpecError(f"duplicate coordination {src!r} -> {tgt!r}", cpath)
        seen.add((src, tgt))
        coords.append(Coordination(source=src, target=tgt, kind=kind))

    try:
        return DashboardSpec(id=did, canvas_px=(cw, ch), views=tuple(views),
                             coordinations=tuple(coords))
    except SpecError as exc:
        raise SpecError(exc.message, "") from None


def dashboard_to_dict(dash: DashboardSpec) -> dict:
    return {
        "id": dash.id,
        "canvas": {"width_px": dash.canvas_px[0], "height_px": dash.canvas_px[1]},
        "views": [
            {
                "id": v.id,
                "mark": v.mark,
                "fields": [
                    {"name": f.name, "dtype": f.dtype, "op": f.op} for f in v.fields
                ],
                "encodings": {ch: list(v.encodings.get(ch, ())) for ch in CHANNELS},
                "layout": None
                if v.layout_px is None
                else {
                    "x_px": v.layout_px[0],
                    "y_px": v.layout_px[1],
                    "w_px": v.layout_px[2],
                    "h_px": v.layout_px[3],
                },
            }
            for v in dash.views
        ],
        "coordinations": [
            {"source": c.source, "target": c.target, "kind": c.kind}
            for c in dash.coordinations
        ],
    }


def serialize_dashboard(dash: DashboardSpec) -> str:
    return json.dumps(dashboard_to_dict(dash), indent=2) + "\n"


def corpus_digest(corpus: Sequence[DashboardSpec]) -> str:
    """Stable content hash of a corpus, independent of load order."""
    blobs = sorted(json.dumps(dashboard_to_dict(d), sort_keys=True) for d in corpus)
    h = hashlib.sha256()
    for blob in blobs:
        h.update(blob.encode())
        h.update(b"\n")
    return h.hexdigest()[:16]


def load_corpus_dir(directory: str | Path) -> tuple[list[DashboardSpec], list[str]]:
    """Load every *.json dashboard under `directory` (sorted by filename).

    Returns (dashboards, errors); errors carry the file path and reason.
    """
    directory = Path(directory)
    dashboards: list[DashboardSpec] = []
    errors: list[str] = []
    for path in sorted(directory.glob("*.json")):
        if path.name == "ledger.json":
            continue
        try:
            dashboards.append(parse_dashboard(path.read_text()))
        except SpecError as exc:
            errors.append(f"{path}: {exc}")
    return dashboards, errors


# ---------------------------------------------------------------------------
# Grid normalization


def _round_half_away(v: float) -> int:
    return int(math.floor(v + 0.5)) if v >= 0 else -int(math.floor(-v + 0.5))


def _snap_axis(lo: float, hi: float, extent: float, n: int) -> tuple[int, int]:
    a = _round_half_away(n * lo / extent)
    b = _round_half_away(n * hi / extent)
    a = min(max(a, 0), n - 1)
    b = min(max(b, a + 1), n)
    if b == a:  # only possible when a == n after clamping above
        a, b = n - 1, n
    return a, b - a


def normalize_to_grid(
    dashboard: DashboardSpec, n: int = GRID_N
) -> dict[str, GridArrangement]:
    """Snap each view's pixel rectangle to the n x n grid.

    Each edge rounds independently to the nearest gridline (half away from
    zero) and spans are clamped to >= 1.  Raises SpecError if two snapped
    rectangles collide.
    """
    if n < 1:
        raise ValueError("grid resolution must be >= 1")
    cw, ch = dashboard.canvas_px
    out: dict[str, GridArrangement] = {}
    for v in dashboard.views:
        if v.layout_px is None:
            raise SpecError(f"view {v.id!r} has no pixel layout to normalize")
        x, y, w, h = v.layout_px
        gx, gw = _snap_axis(x, x + w, cw, n)
        gy, gh = _snap_axis(y, y + h, ch, n)
        out[v.id] = GridArrangement(view=v.id, gx=gx, gy=gy, gw=gw, gh=gh, n=n)
    ids = [v.id for v in dashboard.views]
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            if rects_overlap(out[a].rect, out[b].rect):
                raise SpecError(
                    f"views {a!r} and {b!r} snap to overlapping grid rectangles"
                )
    return out


# ---------------------------------------------------------------------------
# Corpus statistics


@dataclass
class StatsReport:
    dashboards: int
    views: int
    view_count: dict[int, int]
    marks: dict[str, int]
    coordination: dict[str, int]

    def to_dict(self) -> dict:
        def with_fractions(counts: Mapping, total: int) -> dict:
            return {
                str(k): {
                    "count": counts[k],
                    "fraction": round(counts[k] / total, 6) if total else 0.0,
                }
                for k in sorted(counts, key=str)
            }

        return {
            "dashboards": self.dashboards,
            "views": self.views,
            "view_count": with_fractions(self.view_count, self.dashboards),
            "marks": with_fractions(self.marks, self.views),
            "coordination": with_fractions(
                self.coordination, sum(self.coordination.values())
            ),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def corpus_stats(corpus: Iterable[DashboardSpec]) -> StatsReport:
    """Distributions of views per dashboard, mark types, and coordination.

    The coordination histogram counts filter and brush links individually;
    `none` counts unordered view pairs with no link in either direction.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus must be non-empty")
    view_count: dict[int, int] = {}
    marks: dict[str, int] = {}
    coord = {"none": 0, "filter": 0, "brush": 0}
    n_views = 0
    for dash in corpus:
        v = len(dash.views)
        n_views += v
        view_count[v] = view_count.get(v, 0) + 1
        for view in dash.views:
            marks[view.mark] = marks.get(view.mark, 0) + 1
        linked_pairs = set()
        for c in dash.coordinations:
            coord[c.kind] += 1
            linked_pairs.add(frozenset((c.source, c.target)))
        coord["none"] += v * (v - 1) // 2 - len(linked_pairs)
    return StatsReport(
        dashboards=len(corpus),
        views=n_views,
        view_count=view_count,
        marks=marks,
        coordination=coord,
    )
