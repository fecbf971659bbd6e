"""Feature registry and extraction for single views and ordered view pairs.

The registry is fixed: 33 single-view raw features (data, encoding, layout
blocks) and 41 pairwise raw features (data relationship, encoding
relationship, arrangement relationship, coordination blocks).  Raw features
are binarized corpus-wide: numeric features split at their mean, categorical
features one-hot, booleans pass through.

Feature groups drive the rule-mining mappings:

    sde  single-view data & encoding
    sa   single-view arrangement
    pde  pairwise data & encoding relationship
    pa   pairwise arrangement relationship
    pc   pairwise coordination
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from dashmine.corpus import (
    CHANNELS,
    DTYPES,
    GRID_N,
    MARKS,
    OPS,
    Coordination,
    GridArrangement,
    ViewSpec,
)

GROUPS = ("sde", "sa", "pde", "pa", "pc")

# Octant order: position of view A relative to view B, by the compass
# direction of B's center seen from A's center (E, NE, N, NW, W, SW, S, SE).
OCTANT_FEATURES = (
    "a_left_of_b",          # B east of A
    "a_bottom_left_of_b",   # B north-east of A
    "a_below_b",            # B north of A
    "a_bottom_right_of_b",  # B north-west of A
    "a_right_of_b",         # B west of A
    "a_top_right_of_b",     # B south-west of A
    "a_above_b",            # B south of A
    "a_top_left_of_b",      # B south-east of A
)


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str  # count | boolean | categorical | scalar
    group: str
    categories: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("count", "boolean", "categorical", "scalar"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.group not in GROUPS:
            raise ValueError(f"unknown feature group {self.group!r}")
        if self.kind == "categorical" and not self.categories:
            raise ValueError(f"categorical feature {self.name!r} needs categories")

    def bit_names(self) -> tuple[str, ...]:
        if self.kind == "categorical":
            return tuple(f"{self.name}={c}" for c in self.categories)
        return (self.name,)


@dataclass(frozen=True)
class FeatureRegistry:
    single_view: tuple[FeatureSpec, ...]
    pairwise: tuple[FeatureSpec, ...]

    def __post_init__(self) -> None:
        names = [f.name for f in self.single_view + self.pairwise]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique across the registry")

    def section(self, kind: str) -> tuple[FeatureSpec, ...]:
        return self.single_view if kind == "single" else self.pairwise

    def bit_names(self, kind: str) -> tuple[str, ...]:
        return tuple(b for f in self.section(kind) for b in f.bit_names())

    def bits_for_group(self, group: str) -> tuple[str, ...]:
        section = self.single_view if group in ("sde", "sa") else self.pairwise
        return tuple(
            b for f in section if f.group == group for b in f.bit_names()
        )


def build_registry() -> FeatureRegistry:
    single: list[FeatureSpec] = []
    # Data block: field counts by type and by operation, plus the total.
    for dtype in DTYPES:
        single.append(FeatureSpec(f"count_{dtype}", "count", "sde"))
    for op in OPS:
        single.append(FeatureSpec(f"count_op_{op}", "count", "sde"))
    single.append(FeatureSpec("n_fields", "count", "sde"))
    # Encoding block: mark plus per-channel usage.
    single.append(FeatureSpec("mark", "categorical", "sde", categories=MARKS))
    for ch in CHANNELS:
        single.append(FeatureSpec(f"n_fields_{ch}", "count", "sde"))
    for ch in CHANNELS:
        single.append(FeatureSpec(f"uses_{ch}", "boolean", "sde"))
    # Layout block: grid cell, normalized pixel rectangle, derived shape.
    for name in ("gx", "gy", "gw", "gh"):
        single.append(FeatureSpec(name, "count", "sa"))
    for name in ("px_x", "px_y", "px_w", "px_h"):
        single.append(FeatureSpec(name, "scalar", "sa"))
    single.append(FeatureSpec("grid_area", "count", "sa"))
    single.append(FeatureSpec("aspect", "scalar", "sa"))
    single.append(FeatureSpec("cx", "scalar", "sa"))
    single.append(FeatureSpec("cy", "scalar", "sa"))

    pair: list[FeatureSpec] = []
    # Data relationship.
    pair.append(FeatureSpec("same_total_fields", "boolean", "pde"))
    pair.append(FeatureSpec("a_more_fields", "boolean", "pde"))
    pair.append(FeatureSpec("shared_field_count", "count", "pde"))
    pair.append(FeatureSpec("shared_any", "boolean", "pde"))
    pair.append(FeatureSpec("shared_fraction", "scalar", "pde"))
    # Encoding relationship, per channel plus mark equality.
    for ch in CHANNELS:
        pair.append(FeatureSpec(f"is_equal_count_{ch}", "boolean", "pde"))
        pair.append(FeatureSpec(f"is_overlapping_{ch}", "boolean", "pde"))
        pair.append(FeatureSpec(f"count_overlapping_{ch}", "count", "pde"))
    pair.append(FeatureSpec("same_mark", "boolean", "pde"))
    # Arrangement relationship.
    pair.append(FeatureSpec("a_larger_area", "boolean", "pa"))
    pair.append(FeatureSpec("same_width", "boolean", "pa"))
    pair.append(FeatureSpec("same_height", "boolean", "pa"))
    pair.append(FeatureSpec("same_area", "boolean", "pa"))
    pair.append(FeatureSpec("center_distance", "scalar", "pa"))
    pair.append(FeatureSpec("rel_angle", "scalar", "pa"))
    pair.append(FeatureSpec("is_neighbour", "boolean", "pa"))
    for name in OCTANT_FEATURES:
        pair.append(FeatureSpec(name, "boolean", "pa"))
    # Coordination.
    pair.append(FeatureSpec("has_coordination", "boolean", "pc"))
    pair.append(FeatureSpec("a_filters_b", "boolean", "pc"))
    pair.append(FeatureSpec("b_filters_a", "boolean", "pc"))
    pair.append(FeatureSpec("a_brushes_b", "boolean", "pc"))
    pair.append(FeatureSpec("b_brushes_a", "boolean", "pc"))

    return FeatureRegistry(single_view=tuple(single), pairwise=tuple(pair))


REGISTRY = build_registry()


@dataclass(frozen=True)
class RawFeatures:
    subject: str | tuple[str, str]
    kind: str  # "single" | "pair"
    values: dict[str, float | bool | str]

    def __post_init__(self) -> None:
        expected = {f.name for f in REGISTRY.section(self.kind)}
        if set(self.values) != expected:
            missing = sorted(expected - set(self.values))
            extra = sorted(set(self.values) - expected)
            raise ValueError(
                f"raw feature keys do not match registry (missing={missing}, extra={extra})"
            )


@dataclass(frozen=True)
class FeatureVector:
    subject: str | tuple[str, str]
    kind: str
    bits: dict[str, bool]
    thresholds: dict[str, float]


# ---------------------------------------------------------------------------
# Single-view extraction


def data_encoding_values(view: ViewSpec) -> dict:
    """The single-view data and encoding block."""
    values: dict[str, float | bool | str] = {}
    for dtype in DTYPES:
        values[f"count_{dtype}"] = sum(1 for f in view.fields if f.dtype == dtype)
    for op in OPS:
        values[f"count_op_{op}"] = sum(1 for f in view.fields if f.op == op)
    values["n_fields"] = len(view.fields)
    values["mark"] = view.mark
    for ch in CHANNELS:
        values[f"n_fields_{ch}"] = len(view.channel_fields(ch))
    for ch in CHANNELS:
        values[f"uses_{ch}"] = len(view.channel_fields(ch)) > 0
    return values


def arrangement_values(arr: GridArrangement) -> dict:
    """The single-view layout block; px_* default to grid fractions."""
    return {
        "gx": arr.gx,
        "gy": arr.gy,
        "gw": arr.gw,
        "gh": arr.gh,
        "px_x": arr.gx / arr.n,
        "px_y": arr.gy / arr.n,
        "px_w": arr.gw / arr.n,
        "px_h": arr.gh / arr.n,
        "grid_area": arr.gw * arr.gh,
        "aspect": arr.gw / arr.gh,
        "cx": arr.gx + arr.gw / 2,
        "cy": arr.gy + arr.gh / 2,
    }


def extract_single_view(view: ViewSpec, arr: GridArrangement) -> RawFeatures:
    """The 33 per-view raw features over data, encoding, and layout."""
    values = data_encoding_values(view)
    values.update(arrangement_values(arr))
    return RawFeatures(subject=view.id, kind="single", values=values)


def single_view_features_px(
    view: ViewSpec,
    arr: GridArrangement,
    layout_px: tuple[float, float, float, float],
    canvas_px: tuple[float, float],
) -> RawFeatures:
    """Like extract_single_view but with px_* taken from the true pixel layout."""
    raw = extract_single_view(view, arr)
    x, y, w, h = layout_px
    cw, ch = canvas_px
    values = dict(raw.values)
    values["px_x"] = x / cw
    values["px_y"] = y / ch
    values["px_w"] = w / cw
    values["px_h"] = h / ch
    return RawFeatures(subject=view.id, kind="single", values=values)


# ---------------------------------------------------------------------------
# Pairwise extraction


def _center(arr: GridArrangement) -> tuple[float, float]:
    return (arr.gx + arr.gw / 2, arr.gy + arr.gh / 2)


def relative_angle(arr_a: GridArrangement, arr_b: GridArrangement) -> float:
    """Direction of B's center from A's center, degrees in [0, 360).

    0 degrees points east and angles grow counterclockwise on screen (y is
    down, so "north" means B is above A).
    """
    ax, ay = _center(arr_a)
    bx, by = _center(arr_b)
    dx, dy = bx - ax, by - ay
    if dx == 0 and dy == 0:
        return 0.0
    return math.degrees(math.atan2(-dy, dx)) % 360.0


def octant_of(angle_deg: float) -> int:
    """Index into OCTANT_FEATURES for a direction angle."""
    return int(((angle_deg + 22.5) % 360.0) // 45.0)


def is_neighbour(a: tuple, b: tuple) -> bool:
    """Edge adjacency with positive-length shared border (corners excluded)."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    vertical_touch = ax + aw == bx or bx + bw == ax
    horizontal_touch = ay + ah == by or by + bh == ay
    y_overlap = min(ay + ah, by + bh) - max(ay, by) > 0
    x_overlap = min(ax + aw, bx + bw) - max(ax, bx) > 0
    return (vertical_touch and y_overlap) or (horizontal_touch and x_overlap)


def data_encoding_relationship(view_a: ViewSpec, view_b: ViewSpec) -> dict:
    """The pairwise data-relationship and encoding-relationship block."""
    values: dict[str, float | bool] = {}
    fields_a = view_a.field_names()
    fields_b = view_b.field_names()
    shared = fields_a & fields_b
    union = fields_a | fields_b
    values["same_total_fields"] = len(fields_a) == len(fields_b)
    values["a_more_fields"] = len(fields_a) > len(fields_b)
    values["shared_field_count"] = len(shared)
    values["shared_any"] = bool(shared)
    values["shared_fraction"] = len(shared) / len(union) if union else 0.0
    for ch in CHANNELS:
        ca = view_a.channel_fields(ch)
        cb = view_b.channel_fields(ch)
        overlap = set(ca) & set(cb)
        values[f"is_equal_count_{ch}"] = len(ca) == len(cb)
        values[f"is_overlapping_{ch}"] = bool(overlap)
        values[f"count_overlapping_{ch}"] = len(overlap)
    values["same_mark"] = view_a.mark == view_b.mark
    return values


def arrangement_relationship(arr_a: GridArrangement, arr_b: GridArrangement) -> dict:
    """The pairwise arrangement-relationship block (sizes and relative layout)."""
    values: dict[str, float | bool] = {}
    area_a = arr_a.gw * arr_a.gh
    area_b = arr_b.gw * arr_b.gh
    values["a_larger_area"] = area_a > area_b
    values["same_width"] = arr_a.gw == arr_b.gw
    values["same_height"] = arr_a.gh == arr_b.gh
    values["same_area"] = area_a == area_b
    ax, ay = _center(arr_a)
    bx, by = _center(arr_b)
    values["center_distance"] = math.hypot(bx - ax, by - ay)
    angle = relative_angle(arr_a, arr_b)
    values["rel_angle"] = angle
    values["is_neighbour"] = is_neighbour(arr_a.rect, arr_b.rect)
    octant = octant_of(angle)
    for i, name in enumerate(OCTANT_FEATURES):
        values[name] = i == octant
    return values


def coordination_relationship(kind_ab: str | None, kind_ba: str | None) -> dict:
    """The pairwise coordination block from the two directed link kinds."""
    return {
        "has_coordination": kind_ab is not None or kind_ba is not None,
        "a_filters_b": kind_ab == "filter",
        "b_filters_a": kind_ba == "filter",
        "a_brushes_b": kind_ab == "brush",
        "b_brushes_a": kind_ba == "brush",
    }


def extract_pairwise(
    view_a: ViewSpec,
    view_b: ViewSpec,
    arr_a: GridArrangement,
    arr_b: GridArrangement,
    coords: Sequence[Coordination] = (),
) -> RawFeatures:
    """The 41 raw features of the ordered pair (A, B)."""
    if view_a.id == view_b.id:
        raise ValueError("pairwise features need two distinct views")
    values: dict[str, float | bool | str] = {}
    values.update(data_encoding_relationship(view_a, view_b))
    values.update(arrangement_relationship(arr_a, arr_b))
    kind_ab = _link_kind(coords, view_a.id, view_b.id)
    kind_ba = _link_kind(coords, view_b.id, view_a.id)
    values.update(coordination_relationship(kind_ab, kind_ba))
    return RawFeatures(subject=(view_a.id, view_b.id), kind="pair", values=values)


def _link_kind(coords: Sequence[Coordination], source: str, target: str) -> str | None:
    for c in coords:
        if c.source == source and c.target == target:
            return c.kind
    return None


# ---------------------------------------------------------------------------
# Binarization


def binarize(
    corpus_raw: Sequence[RawFeatures],
    registry: FeatureRegistry = REGISTRY,
    thresholds: dict[str, float] | None = None,
) -> tuple[list[FeatureVector], dict[str, float], list[str]]:
    """Convert raw feature records into boolean vectors.

    Numeric features (counts and scalars) binarize as `value >= mean`, with
    the mean taken over the whole input unless `thresholds` is supplied (as
    at recommendation time, reusing training means).  Returns the vectors,
    the thresholds used, and warnings for constant numeric features.
    """
    if not corpus_raw:
        raise ValueError("cannot binarize an empty corpus")
    kind = corpus_raw[0].kind
    if any(r.kind != kind for r in corpus_raw):
        raise ValueError("all records must come from the same registry section")
    specs = registry.section(kind)

    warnings: list[str] = []
    if thresholds is None:
        thresholds = {}
        for spec in specs:
            if spec.kind in ("count", "scalar"):
                vals = np.array([float(r.values[spec.name]) for r in corpus_raw])
                if not np.all(np.isfinite(vals)):
                    raise ValueError(f"non-finite values for feature {spec.name!r}")
                thresholds[spec.name] = float(vals.mean())
                if vals.min() == vals.max():
                    warnings.append(
                        f"feature {spec.name!r} is constant at {vals[0]}; "
                        "its bit is always true"
                    )
    else:
        for spec in specs:
            if spec.kind in ("count", "scalar") and spec.name not in thresholds:
                raise KeyError(f"missing threshold for feature {spec.name!r}")

    vectors = []
    for record in corpus_raw:
        bits: dict[str, bool] = {}
        for spec in specs:
            value = record.values[spec.name]
            if spec.kind == "boolean":
                bits[spec.name] = bool(value)
            elif spec.kind == "categorical":
                for cat in spec.categories:
                    bits[f"{spec.name}={cat}"] = value == cat
            else:
                bits[spec.name] = float(value) >= thresholds[spec.name]
        vectors.append(
            FeatureVector(subject=record.subject, kind=kind, bits=bits,
                          thresholds={k: thresholds[k] for k in sorted(thresholds)})
        )
    used = {
        spec.name: thresholds[spec.name]
        for spec in specs
        if spec.kind in ("count", "scalar")
    }
    return vectors, used, warnings


def bits_to_array(
    vectors: Iterable[FeatureVector], bit_names: Sequence[str]
) -> np.ndarray:
    """Stack bit vectors into a (n_subjects, n_bits) float32 matrix."""
    rows = [[1.0 if v.bits[name] else 0.0 for name in bit_names] for v in vectors]
    return np.asarray(rows, dtype=np.float32)


def raw_to_bits(
    record: RawFeatures,
    thresholds: dict[str, float],
    registry: FeatureRegistry = REGISTRY,
) -> dict[str, bool]:
    """Binarize one record with fixed thresholds (no corpus pass)."""
    vectors, _, _ = binarize([record], registry, thresholds=thresholds)
    return vectors[0].bits


def block_bits(
    values: dict,
    group: str,
    thresholds: dict[str, float],
    registry: FeatureRegistry = REGISTRY,
) -> dict[str, bool]:
    """Binarize one feature-group block of raw values with fixed thresholds."""
    section = registry.single_view if group in ("sde", "sa") else registry.pairwise
    bits: dict[str, bool] = {}
    for spec in section:
        if spec.group != group:
            continue
        value = values[spec.name]
        if spec.kind == "boolean":
            bits[spec.name] = bool(value)
        elif spec.kind == "categorical":
            for cat in spec.categories:
                bits[f"{spec.name}={cat}"] = value == cat
        else:
            if spec.name not in thresholds:
                raise KeyError(f"missing threshold for feature {spec.name!r}")
            bits[spec.name] = float(value) >= thresholds[spec.name]
    return bits
