import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dashmine.corpus import (
    GridArrangement,
    SpecError,
    corpus_stats,
    normalize_to_grid,
    parse_dashboard,
    serialize_dashboard,
)
from tests.conftest import make_dashboard_json


class TestParse:
    def test_four_view_dashboard_with_mutual_brush(self):
        views = []
        layouts = [
            (0, 0, 1920, 270),
            (0, 270, 480, 810),
            (480, 270, 720, 810),
            (1200, 270, 720, 810),
        ]
        marks = ["text", "map", "bar", "circle"]
        for i, (mark, (x, y, w, h)) in enumerate(zip(marks, layouts)):
            views.append(
                {
                    "id": "ABCD"[i],
                    "mark": mark,
                    "fields": [{"name": "f", "dtype": "nominal", "op": "none"}],
                    "encodings": {"x": ["f"], "y": [], "color": [], "size": [],
                                  "shape": []},
                    "layout": {"x_px": x, "y_px": y, "w_px": w, "h_px": h},
                }
            )
        coords = [
            {"source": "C", "target": "D", "kind": "brush"},
            {"source": "D", "target": "C", "kind": "brush"},
        ]
        dash = parse_dashboard(make_dashboard_json(views=views, coordinations=coords))
        assert len(dash.views) == 4
        assert len(dash.coordinations) == 2
        assert dash.link_kind("C", "D") == "brush"
        assert dash.link_kind("D", "C") == "brush"

    def test_minimal_two_view_filter(self):
        views = [
            {
                "id": "A",
                "mark": "bar",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 0, "y_px": 0, "w_px": 960, "h_px": 1080},
            },
            {
                "id": "B",
                "mark": "line",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 960, "y_px": 0, "w_px": 960, "h_px": 1080},
            },
        ]
        dash = parse_dashboard(
            make_dashboard_json(
                views=views,
                coordinations=[{"source": "A", "target": "B", "kind": "filter"}],
            )
        )
        assert len(dash.views) == 2
        assert len(dash.coordinations) == 1

    def test_dangling_coordination_reports_json_path(self):
        with pytest.raises(SpecError) as err:
            parse_dashboard(
                make_dashboard_json(
                    coordinations=[{"source": "B", "target": "Z", "kind": "filter"}]
                )
            )
        assert err.value.path == "/coordinations/0/target"

    def test_duplicate_view_id_rejected(self):
        raw = json.loads(make_dashboard_json())
        raw["views"][1]["id"] = "A"
        with pytest.raises(SpecError):
            parse_dashboard(json.dumps(raw))

    def test_unknown_mark_rejected_with_path(self):
        raw = json.loads(make_dashboard_json())
        raw["views"][0]["mark"] = "sparkline"
        with pytest.raises(SpecError) as err:
            parse_dashboard(json.dumps(raw))
        assert err.value.path == "/views/0/mark"

    def test_encoded_field_must_exist(self):
        raw = json.loads(make_dashboard_json())
        raw["views"][0]["encodings"]["color"] = ["ghost"]
        with pytest.raises(SpecError) as err:
            parse_dashboard(json.dumps(raw))
        assert "ghost" in str(err.value)

    def test_overlapping_views_rejected(self):
        raw = json.loads(make_dashboard_json())
        raw["views"][1]["layout"]["x_px"] = 0
        raw["views"][1]["layout"]["y_px"] = 0
        with pytest.raises(SpecError) as err:
            parse_dashboard(json.dumps(raw))
        assert "overlap" in str(err.value)

    def test_single_view_rejected(self):
        raw = json.loads(make_dashboard_json())
        raw["views"] = raw["views"][:1]
        raw["coordinations"] = []
        with pytest.raises(SpecError):
            parse_dashboard(json.dumps(raw))

    def test_round_trip(self, demo_dashboard):
        again = parse_dashboard(serialize_dashboard(demo_dashboard))
        assert again == demo_dashboard

    def test_layout_optional_for_recommend_input(self):
        raw = json.loads(make_dashboard_json(coordinations=[]))
        for view in raw["views"]:
            del view["layout"]
        dash = parse_dashboard(json.dumps(raw), require_layout=False)
        assert all(v.layout_px is None for v in dash.views)
        with pytest.raises(SpecError):
            parse_dashboard(json.dumps(raw))


class TestNormalize:
    def test_quarter_aligned_view(self, demo_dashboard):
        grid = normalize_to_grid(demo_dashboard)
        assert grid["A"].rect == (0, 0, 4, 1)
        assert grid["B"].rect == (0, 1, 2, 3)
        assert grid["C"].rect == (2, 1, 2, 3)

    def test_full_canvas_view(self):
        views = [
            {
                "id": "A",
                "mark": "bar",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 0, "y_px": 0, "w_px": 1920, "h_px": 540},
            },
            {
                "id": "B",
                "mark": "line",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 0, "y_px": 540, "w_px": 1920, "h_px": 540},
            },
        ]
        dash = parse_dashboard(make_dashboard_json(views=views, coordinations=[]))
        grid = normalize_to_grid(dash)
        assert grid["A"].rect == (0, 0, 4, 2)
        assert grid["B"].rect == (0, 2, 4, 2)

    def test_text_strip_lands_on_top_row(self, demo_dashboard):
        grid = normalize_to_grid(demo_dashboard)
        assert grid["A"].gy == 0
        assert grid["A"].gh == 1

    def test_snapping_rounds_half_away_from_zero(self):
        # 0.5-cell edges round up: x in [0, 600] of 1920 -> right edge at
        # 600/480 = 1.25 cells snaps to 1.
        views = [
            {
                "id": "A",
                "mark": "bar",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 0, "y_px": 0, "w_px": 600, "h_px": 1080},
            },
            {
                "id": "B",
                "mark": "line",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 600, "y_px": 0, "w_px": 1320, "h_px": 1080},
            },
        ]
        dash = parse_dashboard(make_dashboard_json(views=views, coordinations=[]))
        grid = normalize_to_grid(dash)
        assert grid["A"].rect == (0, 0, 1, 4)
        assert grid["B"].rect == (1, 0, 3, 4)

    def test_thin_view_span_clamped_to_one(self):
        views = [
            {
                "id": "A",
                "mark": "bar",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 0, "y_px": 0, "w_px": 40, "h_px": 1080},
            },
            {
                "id": "B",
                "mark": "line",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 700, "y_px": 0, "w_px": 1220, "h_px": 1080},
            },
        ]
        dash = parse_dashboard(make_dashboard_json(views=views, coordinations=[]))
        grid = normalize_to_grid(dash)
        assert grid["A"].gw == 1

    def test_snapping_collision_reports_both_ids(self):
        views = [
            {
                "id": "A",
                "mark": "bar",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 0, "y_px": 0, "w_px": 1000, "h_px": 1080},
            },
            {
                "id": "B",
                "mark": "line",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 1000, "y_px": 0, "w_px": 100, "h_px": 1080},
            },
            {
                "id": "C",
                "mark": "pie",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 1100, "y_px": 0, "w_px": 820, "h_px": 1080},
            },
        ]
        dash = parse_dashboard(make_dashboard_json(views=views, coordinations=[]))
        with pytest.raises(SpecError) as err:
            normalize_to_grid(dash)
        message = str(err.value)
        assert "'B'" in message

    def test_idempotent_on_grid_aligned_input(self, demo_dashboard):
        grid = normalize_to_grid(demo_dashboard)
        # Rebuild the dashboard from the snapped grid and normalize again.
        raw = json.loads(serialize_dashboard(demo_dashboard))
        for view in raw["views"]:
            arr = grid[view["id"]]
            view["layout"] = {
                "x_px": arr.gx * 480.0,
                "y_px": arr.gy * 270.0,
                "w_px": arr.gw * 480.0,
                "h_px": arr.gh * 270.0,
            }
        snapped = parse_dashboard(json.dumps(raw))
        again = normalize_to_grid(snapped)
        assert {k: v.rect for k, v in again.items()} == {
            k: v.rect for k, v in grid.items()
        }

    @given(
        x=st.integers(0, 3),
        y=st.integers(0, 3),
        st_data=st.data(),
    )
    @settings(max_examples=40, deadline=None)
    def test_grid_rects_stay_inside_canvas(self, x, y, st_data):
        w = st_data.draw(st.integers(1, 4 - x))
        h = st_data.draw(st.integers(1, 4 - y))
        arr = GridArrangement("v", x, y, w, h)
        assert arr.gx + arr.gw <= 4
        assert arr.gy + arr.gh <= 4


class TestStats:
    def test_direct_counts(self):
        views = [
            {
                "id": f"v{i}",
                "mark": "bar",
                "fields": [],
                "encodings": {"x": [], "y": [], "color": [], "size": [], "shape": []},
                "layout": {"x_px": 640 * i, "y_px": 0, "w_px": 640, "h_px": 1080},
            }
            for i in range(3)
        ]
        dash = parse_dashboard(
            make_dashboard_json(
                views=views,
                coordinations=[{"source": "v0", "target": "v1", "kind": "filter"}],
            )
        )
        report = corpus_stats([dash])
        assert report.view_count == {3: 1}
        assert report.marks == {"bar": 3}
        assert report.coordination == {"none": 2, "filter": 1, "brush": 0}

    def test_additive_under_duplication(self, demo_dashboard):
        one = corpus_stats([demo_dashboard])
        two = corpus_stats([demo_dashboard, demo_dashboard])
        assert two.view_count == {k: 2 * v for k, v in one.view_count.items()}
        assert two.marks == {k: 2 * v for k, v in one.marks.items()}
        assert two.coordination == {
            k: 2 * v for k, v in one.coordination.items()
        }

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            corpus_stats([])

    def test_fractions_rounded_to_six_places(self, demo_dashboard):
        data = corpus_stats([demo_dashboard]).to_dict()
        for section in ("view_count", "marks", "coordination"):
            for entry in data[section].values():
                assert entry["fraction"] == round(entry["fraction"], 6)
