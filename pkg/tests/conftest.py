import json

import pytest

from dashmine.corpus import parse_dashboard


def make_dashboard_json(
    dash_id="demo",
    canvas=(1920, 1080),
    views=None,
    coordinations=None,
):
    if views is None:
        views = [
            {
                "id": "A",
                "mark": "text",
                "fields": [{"name": "title", "dtype": "nominal", "op": "none"}],
                "encodings": {"x": ["title"], "y": [], "color": [], "size": [],
                              "shape": []},
                "layout": {"x_px": 0, "y_px": 0, "w_px": 1920, "h_px": 270},
            },
            {
                "id": "B",
                "mark": "bar",
                "fields": [
                    {"name": "region", "dtype": "ordinal", "op": "none"},
                    {"name": "sales", "dtype": "numerical", "op": "sum"},
                ],
                "encodings": {"x": ["region"], "y": ["sales"], "color": [],
                              "size": [], "shape": []},
                "layout": {"x_px": 0, "y_px": 270, "w_px": 960, "h_px": 810},
            },
            {
                "id": "C",
                "mark": "line",
                "fields": [
                    {"name": "month", "dtype": "ordinal", "op": "none"},
                    {"name": "sales", "dtype": "numerical", "op": "sum"},
                ],
                "encodings": {"x": ["month"], "y": ["sales"], "color": [],
                              "size": [], "shape": []},
                "layout": {"x_px": 960, "y_px": 270, "w_px": 960, "h_px": 810},
            },
        ]
    if coordinations is None:
        coordinations = [{"source": "B", "target": "C", "kind": "filter"}]
    return json.dumps(
        {
            "id": dash_id,
            "canvas": {"width_px": canvas[0], "height_px": canvas[1]},
            "views": views,
            "coordinations": coordinations,
        }
    )


@pytest.fixture
def demo_dashboard():
    return parse_dashboard(make_dashboard_json())
