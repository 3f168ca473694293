import xml.etree.ElementTree as ET

import numpy as np

from foldcycle.output import RunManifest, csv_text, fmt, read_csv_body, svg_plot, write_csv

SVG = "{http://www.w3.org/2000/svg}"


def test_fmt_round_trips_floats():
    for v in (0.1, 1 / 3, -2.5e-300, np.float64(0.7), 3):
        assert float(fmt(v)) == float(v)
    assert fmt(np.float64(0.5)) == "0.5"
    assert fmt(np.int64(4)) == "4"
    assert fmt(True) == "true"


def test_manifest_header_and_body(tmp_path):
    man = RunManifest("scan", None, {"alpha": 2, "eps": 0.01}, str(tmp_path))
    path = write_csv(str(tmp_path / "x.csv"), ["a", "b"], [(1, 0.5), (2, 0.25)], man)
    text = open(path).read()
    header = [ln for ln in text.splitlines() if ln.startswith("# ")]
    assert len(header) == len(man.lines())
    assert "# command: scan" in header and "# overrides: alpha=2;eps=0.01" in header
    assert read_csv_body(path) == [["a", "b"], ["1", "0.5"], ["2", "0.25"]]


def test_csv_text_is_deterministic():
    rows = [(0.1, 0.2), (0.3, 1e-20)]
    assert csv_text(["x", "y"], rows) == csv_text(["x", "y"], rows)


def test_svg_is_valid_with_axes_ticks_and_caption():
    man = RunManifest("verify", None, {})
    text = svg_plot([("simulation", [0.01, 0.02, 0.04], [1e-4, 4e-4, 1.6e-3], "points"),
                     ("slope 2", [0.01, 0.04], [1e-4, 1.6e-3], "line")],
                    "exit drift", "exit y scales like eps^2", "eps", "|exit y|", manifest=man)
    root = ET.fromstring(text)
    assert root.tag == SVG + "svg"
    texts = [t.text for t in root.iter(SVG + "text")]
    assert "exit drift" in texts and "exit y scales like eps^2" in texts
    assert sum(1 for t in texts if t and t.startswith("10^")) >= 10
    assert len(list(root.iter(SVG + "line"))) >= 12
    assert len(list(root.iter(SVG + "circle"))) == 3
    assert len(list(root.iter(SVG + "polyline"))) == 1
