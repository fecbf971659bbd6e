import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dashmine.corpus import Coordination, DataField, GridArrangement, ViewSpec
from dashmine.features import (
    OCTANT_FEATURES,
    REGISTRY,
    binarize,
    build_registry,
    extract_pairwise,
    extract_single_view,
    octant_of,
    relative_angle,
)


def bar(vid="A", fields=("o", "n"), x=("o",), y=("n",), mark="bar", **enc):
    dtypes = {"o": "ordinal", "n": "numerical"}
    fs = tuple(DataField(f, dtypes.get(f, "nominal")) for f in fields)
    encodings = {"x": tuple(x), "y": tuple(y)}
    encodings.update({k: tuple(v) for k, v in enc.items()})
    return ViewSpec(id=vid, mark=mark, fields=fs, encodings=encodings)


def rect(vid, gx, gy, gw, gh):
    return GridArrangement(vid, gx, gy, gw, gh)


class TestRegistry:
    def test_section_sizes(self):
        reg = build_registry()
        assert len(reg.single_view) == 33
        assert len(reg.pairwise) == 41

    def test_names_unique_and_stable(self):
        reg1 = build_registry()
        reg2 = build_registry()
        names1 = [f.name for f in reg1.single_view + reg1.pairwise]
        assert names1 == [f.name for f in reg2.single_view + reg2.pairwise]
        assert len(set(names1)) == len(names1)

    def test_group_partition(self):
        reg = build_registry()
        assert len(reg.bits_for_group("sde")) == 33
        assert len(reg.bits_for_group("sa")) == 12
        assert len(reg.bits_for_group("pde")) == 21
        assert len(reg.bits_for_group("pa")) == 15
        assert len(reg.bits_for_group("pc")) == 5


class TestSingleView:
    def test_bar_chart_counts(self):
        view = bar()
        raw = extract_single_view(view, rect("A", 0, 0, 2, 2))
        assert raw.values["count_ordinal"] == 1
        assert raw.values["count_numerical"] == 1
        assert raw.values["n_fields_x"] == 1
        assert raw.values["n_fields_y"] == 1
        assert raw.values["uses_x"] is True
        assert raw.values["uses_color"] is False

    def test_top_strip_layout_values(self):
        view = bar("T", mark="text", y=())
        raw = extract_single_view(view, rect("T", 0, 0, 4, 1))
        assert raw.values["gh"] == 1
        assert raw.values["grid_area"] == 4
        assert raw.values["aspect"] == 4.0
        assert raw.values["cy"] == 0.5
        assert raw.values["gy"] == 0

    def test_empty_view(self):
        view = ViewSpec(id="E", mark="pie", fields=(), encodings={})
        raw = extract_single_view(view, rect("E", 0, 0, 1, 1))
        for name in ("count_numerical", "count_nominal", "count_ordinal",
                     "n_fields", "n_fields_x", "n_fields_color"):
            assert raw.values[name] == 0
        for ch in ("x", "y", "color", "size", "shape"):
            assert raw.values[f"uses_{ch}"] is False

    def test_exactly_33_values(self):
        raw = extract_single_view(bar(), rect("A", 0, 0, 1, 1))
        assert len(raw.values) == 33


class TestPairwise:
    def test_high_overlap_color_sharing_pair(self):
        # Five distinct fields, four shared, both color-encode the same one.
        fields_c = ("f1", "f2", "f3", "f4")
        fields_d = ("f1", "f2", "f3", "f4", "f5")
        c = ViewSpec(
            id="C", mark="circle",
            fields=tuple(DataField(f, "numerical") for f in fields_c),
            encodings={"x": ("f1",), "y": ("f2",), "color": ("f4",)},
        )
        d = ViewSpec(
            id="D", mark="circle",
            fields=tuple(DataField(f, "numerical") for f in fields_d),
            encodings={"x": ("f3",), "y": ("f5",), "color": ("f4",)},
        )
        coords = [Coordination("C", "D", "brush"), Coordination("D", "C", "brush")]
        raw = extract_pairwise(c, d, rect("C", 0, 2, 2, 2), rect("D", 2, 2, 2, 2),
                               coords)
        assert raw.values["shared_fraction"] == pytest.approx(0.8)
        assert raw.values["count_overlapping_color"] == 1
        assert raw.values["a_brushes_b"] is True
        assert raw.values["b_brushes_a"] is True

    def test_side_by_side_twins(self):
        a = bar("A")
        b = bar("B")
        raw = extract_pairwise(a, b, rect("A", 0, 0, 2, 4), rect("B", 2, 0, 2, 4))
        assert raw.values["same_total_fields"] is True
        assert raw.values["same_mark"] is True
        assert raw.values["same_width"] and raw.values["same_height"]
        assert raw.values["is_neighbour"] is True
        assert raw.values["a_left_of_b"] is True
        assert raw.values["center_distance"] == pytest.approx(2.0)
        assert raw.values["rel_angle"] == pytest.approx(0.0)

    def test_diagonal_corners(self):
        a, b = bar("A"), bar("B")
        raw = extract_pairwise(a, b, rect("A", 0, 0, 1, 1), rect("B", 3, 3, 1, 1))
        assert raw.values["is_neighbour"] is False
        assert raw.values["a_top_left_of_b"] is True
        assert raw.values["center_distance"] == pytest.approx(math.sqrt(18))

    def test_corner_touch_is_not_neighbour(self):
        a, b = bar("A"), bar("B")
        raw = extract_pairwise(a, b, rect("A", 0, 0, 2, 2), rect("B", 2, 2, 2, 2))
        assert raw.values["is_neighbour"] is False

    def test_exactly_41_values(self):
        raw = extract_pairwise(bar("A"), bar("B"), rect("A", 0, 0, 2, 4),
                               rect("B", 2, 0, 2, 4))
        assert len(raw.values) == 41

    def test_shared_count_bounded_by_smaller_view(self):
        a = bar("A", fields=("o", "n", "m"))
        b = bar("B", fields=("o",), x=("o",), y=())
        raw = extract_pairwise(a, b, rect("A", 0, 0, 2, 4), rect("B", 2, 0, 2, 4))
        assert raw.values["shared_field_count"] <= 1
        assert raw.values["a_more_fields"] is True
        mirrored = extract_pairwise(b, a, rect("B", 2, 0, 2, 4),
                                    rect("A", 0, 0, 2, 4))
        assert mirrored.values["a_more_fields"] is False

    @given(
        ax=st.integers(0, 3), ay=st.integers(0, 3),
        bx=st.integers(0, 3), by=st.integers(0, 3),
        data=st.data(),
    )
    @settings(max_examples=60, deadline=None)
    def test_mirror_consistency(self, ax, ay, bx, by, data):
        aw = data.draw(st.integers(1, 4 - ax))
        ah = data.draw(st.integers(1, 4 - ay))
        bw = data.draw(st.integers(1, 4 - bx))
        bh = data.draw(st.integers(1, 4 - by))
        ra, rb = rect("A", ax, ay, aw, ah), rect("B", bx, by, bw, bh)
        from dashmine.corpus import rects_overlap
        if rects_overlap(ra.rect, rb.rect):
            return
        fwd = extract_pairwise(bar("A"), bar("B"), ra, rb)
        bwd = extract_pairwise(bar("B"), bar("A"), rb, ra)
        assert fwd.values["is_neighbour"] == bwd.values["is_neighbour"]
        assert fwd.values["a_left_of_b"] == bwd.values["a_right_of_b"]
        assert fwd.values["a_above_b"] == bwd.values["a_below_b"]
        assert fwd.values["a_top_left_of_b"] == bwd.values["a_bottom_right_of_b"]
        assert fwd.values["center_distance"] == pytest.approx(
            bwd.values["center_distance"]
        )
        assert sum(fwd.values[n] for n in OCTANT_FEATURES) == 1

    def test_octant_of_covers_circle(self):
        assert octant_of(0.0) == 0
        assert octant_of(90.0) == 2
        assert octant_of(315.0) == 7
        assert octant_of(337.5) == 0

    def test_relative_angle_north_points_up(self):
        # B above A on screen (smaller gy) is "north".
        a = rect("A", 0, 2, 2, 2)
        b = rect("B", 0, 0, 2, 2)
        assert relative_angle(a, b) == pytest.approx(90.0)


class TestBinarize:
    def test_two_point_mean(self):
        a = extract_pairwise(bar("A"), bar("B"), rect("A", 0, 0, 2, 4),
                             rect("B", 2, 0, 2, 4))
        b = extract_pairwise(bar("A"), bar("B"), rect("A", 0, 0, 1, 1),
                             rect("B", 3, 3, 1, 1))
        # distances 2.0 and sqrt(18) ~ 4.24 -> mean ~ 3.12
        vectors, thresholds, _ = binarize([a, b])
        assert thresholds["center_distance"] == pytest.approx(
            (2.0 + math.sqrt(18)) / 2
        )
        assert vectors[0].bits["center_distance"] is False
        assert vectors[1].bits["center_distance"] is True

    def test_mark_one_hot(self):
        raw = extract_single_view(bar("T", mark="text", y=()),
                                  rect("T", 0, 0, 4, 1))
        vectors, _, _ = binarize([raw])
        bits = vectors[0].bits
        assert bits["mark=text"] is True
        assert sum(bits[f"mark={m}"] for m in
                   ("bar", "line", "area", "circle", "square", "shape", "text",
                    "text_table", "map", "pie", "gantt", "polygon", "heatmap")) == 1

    def test_planted_split_separates_groups(self):
        views = [bar(f"v{i}") for i in range(8)]
        rects = [rect(f"v{i}", 0, 0, 1, 1 if i < 4 else 4) for i in range(8)]
        raws = [extract_single_view(v, r) for v, r in zip(views, rects)]
        vectors, thresholds, _ = binarize(raws)
        assert thresholds["gh"] == pytest.approx(2.5)
        assert [v.bits["gh"] for v in vectors] == [False] * 4 + [True] * 4

    def test_constant_feature_warns_and_is_true(self):
        raws = [
            extract_single_view(bar("A"), rect("A", 0, 0, 2, 2)),
            extract_single_view(bar("B"), rect("B", 2, 0, 2, 2)),
        ]
        vectors, _, warnings = binarize(raws)
        assert any("constant" in w for w in warnings)
        assert all(v.bits["gh"] for v in vectors)

    def test_ordering_preserved(self):
        raws = [
            extract_single_view(bar("A"), rect("A", 0, 0, 1, 1)),
            extract_single_view(bar("B"), rect("B", 0, 1, 1, 3)),
        ]
        vectors, thresholds, _ = binarize(raws)
        lo, hi = sorted([1, 3])
        assert not vectors[0].bits["gh"]  # 1 < mean(2)
        assert vectors[1].bits["gh"]  # 3 >= mean(2)

    def test_reuse_thresholds(self):
        raws = [
            extract_single_view(bar("A"), rect("A", 0, 0, 1, 1)),
            extract_single_view(bar("B"), rect("B", 0, 1, 1, 3)),
        ]
        _, thresholds, _ = binarize(raws)
        vectors, used, _ = binarize([raws[0]], thresholds=thresholds)
        assert used == thresholds
        assert vectors[0].bits["gh"] is False

    def test_mixed_kinds_rejected(self):
        single = extract_single_view(bar("A"), rect("A", 0, 0, 2, 2))
        pair = extract_pairwise(bar("A"), bar("B"), rect("A", 0, 0, 2, 4),
                                rect("B", 2, 0, 2, 4))
        with pytest.raises(ValueError):
            binarize([single, pair])
