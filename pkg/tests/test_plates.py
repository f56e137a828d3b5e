import json
import math
import xml.etree.ElementTree as ET

import pytest

from skiagraph.compare import compare_config
from skiagraph.construction import TorusElevationSpec, run_construction
from skiagraph.oracle import Torus3, oracle_shade
from skiagraph.plates import PRESETS, PlateStyle, plate_construction, plate_matrix, plate_overlay

NS = {"svg": "http://www.w3.org/2000/svg"}


def parse(svg):
    root = ET.fromstring(svg.encode())
    assert root.tag == "{http://www.w3.org/2000/svg}svg"
    return root


def check_viewbox(root, scale=96.0):
    w_in = float(root.get("width").removesuffix("in"))
    h_in = float(root.get("height").removesuffix("in"))
    x0, y0, w, h = map(float, root.get("viewBox").split())
    assert (x0, y0) == (0, 0)
    assert w == pytest.approx(w_in * scale, abs=0.01)
    assert h == pytest.approx(h_in * scale, abs=0.01)
    return w, h


@pytest.fixture(scope="module")
def trace_6x2():
    return run_construction(TorusElevationSpec(6, 2))


def test_construction_plate_labels(trace_6x2):
    root = parse(plate_construction(trace_6x2))
    labels = [t.text for t in root.iter("{http://www.w3.org/2000/svg}text") if t.get("class") == "label"]
    assert len(labels) == 19
    assert {"n''", "o''", "C", "D", "E"} <= set(labels)


def test_construction_plate_dimensions(trace_6x2):
    style = PlateStyle()
    root = parse(plate_construction(trace_6x2, style))
    w, _ = check_viewbox(root)
    assert w == pytest.approx((6 + 2 * style.margin) * style.scale, abs=0.01)
    small = parse(plate_construction(trace_6x2, PlateStyle(scale=50)))
    check_viewbox(small, 50)


def test_construction_plate_deterministic(trace_6x2):
    meta = {"seed": 0, "resolution": 1024}
    a = plate_construction(trace_6x2, metadata=meta)
    b = plate_construction(run_construction(TorusElevationSpec(6, 2)), metadata=dict(meta))
    assert a == b
    assert json.loads(parse(a).find("svg:metadata", NS).text) == meta


def test_style_rejects_bad_scale():
    with pytest.raises(ValueError):
        PlateStyle(scale=0)


@pytest.mark.parametrize("preset, cells", [("fig4", 24), ("fig5", 30), ("all", 54)])
def test_matrix_cell_counts(preset, cells):
    widths, heights = PRESETS[preset]
    plate = plate_matrix(widths, heights, name=preset)
    assert plate.cell_count == cells == len(plate.traces)
    root = parse(plate.svg)
    check_viewbox(root)
    groups = [g for g in root.iter("{http://www.w3.org/2000/svg}g") if g.get("class") == "cell"]
    assert len(groups) == cells


def test_matrix_order_and_horn_cell():
    plate = plate_matrix(*PRESETS["fig5"])
    cells = plate.manifest["cells"]
    assert [c["width"] for c in cells[:5]] == [16, 15, 14, 13, 12]
    assert [c["height"] for c in cells[::5]] == [6, 5, 4, 3, 2, 1]
    horn = next(c for c in cells if (c["width"], c["height"]) == (12, 6))
    assert horn["status"] == "ok" and horn["R"] == horn["r"] == 3


def test_matrix_fits_page():
    style = PlateStyle()
    plate = plate_matrix(*PRESETS["all"], style=style)
    root = parse(plate.svg)
    assert float(root.get("width").removesuffix("in")) <= style.page[0] + 1e-3
    assert float(root.get("height").removesuffix("in")) <= style.page[1] + 1e-3


def test_matrix_skips_spindle():
    plate = plate_matrix([10], [6])
    assert plate.cell_count == 0
    (cell,) = plate.manifest["cells"]
    assert cell["status"] == "skipped" and "SpindleNotSupported" in cell["reason"]
    assert "skipped" in plate.svg


def test_matrix_skips_are_per_cell():
    plate = plate_matrix([10, 12], [6, 1])
    assert plate.cell_count == 3
    assert sum(c["status"] == "skipped" for c in plate.manifest["cells"]) == 1


def test_overlay_structure(trace_6x2):
    oracle = oracle_shade(Torus3(2, 1))
    reports = compare_config(trace_6x2.spec, oracle=oracle)
    svg = plate_overlay(trace_6x2, oracle, reports)
    assert svg == plate_overlay(trace_6x2, oracle, reports)
    root = parse(svg)
    check_viewbox(root)
    groups = {g.get("id"): g for g in root.iter("{http://www.w3.org/2000/svg}g") if g.get("id")}
    assert {"oracle", "construction"} <= set(groups)
    strokes = {e.get("stroke") for e in groups["oracle"]} , {e.get("stroke") for e in groups["construction"]}
    assert not strokes[0] & strokes[1]
    caption = " ".join(t.text for t in root.iter("{http://www.w3.org/2000/svg}text"))
    assert "hausdorff" in caption
    for name in ("D", "E"):
        marks = [(float(c.get("cx")), float(c.get("cy"))) for g in groups.values()
                 for c in g.iter("{http://www.w3.org/2000/svg}circle") if c.get("class") == f"landmark-{name}"]
        assert len(marks) == 2
        assert math.dist(*marks) < 1.0
