import xml.dom.minidom

import numpy as np

from oodcf.svgplot import ScatterPlot


def build_plot():
    plot = ScatterPlot(title="demo", comment="config: {}")
    plot.add_group("a", "#1f77b4", np.array([[0.0, 0.0], [1.0, 2.0], [-1.0, 0.5]]))
    plot.add_group("b", "#d62728", np.array([[3.0, 3.0]]))
    plot.add_arrow("pc1", "#333333", (0.0, 0.0), (2.0, 0.0))
    plot.add_polyline("path", "#ff7f0e", np.array([[0.0, 2.0], [0.0, 1.0], [1.0, 1.0]]))
    return plot


def test_renders_valid_xml():
    doc = xml.dom.minidom.parseString(build_plot().render())
    assert doc.documentElement.tagName == "svg"


def test_contains_expected_elements():
    svg = build_plot().render()
    # 4 scatter points + 2 trajectory endpoint markers + 1 legend dot per label
    assert svg.count("<circle") == 4 + 2 + 3
    assert svg.count("<polyline") == 1
    assert "demo" in svg
    assert "config: {}" in svg


def test_render_deterministic():
    assert build_plot().render() == build_plot().render()


def test_write(tmp_path):
    path = tmp_path / "plot.svg"
    build_plot().write(path)
    xml.dom.minidom.parse(str(path))


def test_degenerate_single_point():
    plot = ScatterPlot()
    plot.add_group("only", "#000000", np.array([[5.0, 5.0]]))
    xml.dom.minidom.parseString(plot.render())
