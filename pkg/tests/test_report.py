import json

import pytest

import analysis
import ingest
import report
from analysis import Histogram, InterArrivalSummary, ThreadCurvePoint

SUMMARY_HEADER = "label,n,tps,median,mean,sdev,cv,p90,p95,p99,min,max"

HOME = InterArrivalSummary(
    "010_Home", 10026, 8.36, 82.0, 119.68, 119.18, 119.18 / 119.68, 278.0, 358.0, 555.0, 0.0, 1201.0
)
TOTAL = InterArrivalSummary(
    "Total", 38072, 31.73, 22.0, 31.52, 31.59, 31.59 / 31.52, 73.0, 94.0, 143.0, 0.0, 435.0
)
LONELY = InterArrivalSummary("040_Statistics", 1, 1.98, None, None, None, None, None, None, None, None, None)


def test_summary_text_layout():
    text = report.render_summary_table([TOTAL, HOME], "text").decode()
    assert text == (
        f"{SUMMARY_HEADER}\n"
        "010_Home,10026,8.36,82,119.68,119.18,1,278,358,555,0,1201\n"
        "Total,38072,31.73,22,31.52,31.59,1,73,94,143,0,435\n"
    )


def test_summary_csv_keeps_two_decimals():
    text = report.render_summary_table([HOME, TOTAL], "csv").decode()
    assert text.splitlines()[-1] == "Total,38072,31.73,22,31.52,31.59,1.00,73,94,143,0,435"


def test_summary_undefined_cells():
    text = report.render_summary_table([LONELY, TOTAL], "text").decode()
    assert text.splitlines()[1] == "040_Statistics,1,1.98,undef,undef,undef,undef,undef,undef,undef,undef,undef"

    csv_text = report.render_summary_table([LONELY, TOTAL], "csv").decode()
    assert csv_text.splitlines()[1] == "040_Statistics,1,1.98,,,,,,,,,"

    document = json.loads(report.render_summary_table([LONELY, TOTAL], "json"))
    assert document["table"] == "interarrival_summary"
    assert document["columns"] == SUMMARY_HEADER.split(",")
    assert document["rows"][0]["mean"] is None
    assert document["rows"][1]["cv"] == pytest.approx(31.59 / 31.52)


def test_cv_other_than_one_is_shown_with_decimals():
    row = InterArrivalSummary("x", 3, 1.0, 1.0, 2.0, 3.0, 1.5, 4.0, 5.0, 6.0, 0.5, 7.25)
    line = report.render_summary_table([row], "text").decode().splitlines()[1]
    assert line == "x,3,1.00,1,2.00,3.00,1.50,4,5,6,0.50,7.25"


def test_thread_curve_layout():
    points = [
        ThreadCurvePoint(1, 187, 0.156, 6391.96, 3555.83, 0.5563),
        ThreadCurvePoint(2, 2, 0.01, 300.0, None, None),
    ]
    assert report.render_thread_curve(points, "text").decode() == (
        "thread_count,trans,tps,drt_mean,drt_sdev,cov_drt\n"
        "1,187,0.16,6391.96,3555.83,0.56\n"
        "2,2,0.01,300.00,undef,undef\n"
    )
    assert report.render_thread_curve(points, "csv").decode().splitlines()[2] == "2,2,0.01,300.00,,"


def test_curve_matrix_aligns_runs():
    curves = {
        "1800": [ThreadCurvePoint(1, 10, 1.0, 5.0, 3.0, 0.56), ThreadCurvePoint(2, 20, 2.0, 2.0, 1.6, 0.8)],
        "2100": [ThreadCurvePoint(1, 10, 1.0, 5.0, 3.0, 0.61)],
    }
    assert report.render_curve_matrix(curves, "text").decode() == (
        "thread_count,1800,2100\n"
        "1,0.56,0.61\n"
        "2,0.80,\n"
    )
    rows = json.loads(report.render_curve_matrix(curves, "json"))["rows"]
    assert rows[1] == {"thread_count": 2, "1800": 0.8, "2100": None}


def test_histogram_table():
    hist = Histogram(bin_width=1.0, origin=0.0, counts=(1, 3), theoretical=(0.25, 0.5))
    assert report.render_histogram_data(hist, "text").decode() == (
        "bin,observed,theoretical\n"
        "0,0.2500,0.2500\n"
        "1,0.7500,0.5000\n"
    )
    rows = json.loads(report.render_histogram_data(hist, "json"))["rows"]
    assert rows[1]["count"] == 3

    bare = Histogram(bin_width=50.0, origin=0.0, counts=(2, 2))
    assert report.render_histogram_data(bare, "csv").decode().splitlines()[2] == "50,0.5000,"


def test_empty_histogram_is_rejected():
    with pytest.raises(ValueError, match="histogram is empty"):
        report.render_histogram_data(Histogram(bin_width=1.0, origin=0.0, counts=(0, 0)))


def test_ratios_table():
    ratios = analysis.closed_loop_ratios(2500, 75, 229, 77.56)
    assert report.render_ratios(ratios, "text").decode() == (
        "z_mean,r_mean,r_sdev,cov_r,rt_mean,rort_mean,tps,n_estimate\n"
        "2500.00,75.00,229.00,3.05,2575.00,0.0291,77.56,199.72\n"
    )
    no_sdev = analysis.closed_loop_ratios(2500, 75, None, 77.56)
    assert report.render_ratios(no_sdev, "csv").decode().splitlines()[1].startswith("2500.00,75.00,,,")


def test_unknown_format():
    with pytest.raises(ValueError, match="unknown output format"):
        report.render_summary_table([TOTAL], "xml")


def test_document_text_and_json():
    doc = report.ReportDocument(
        title=report.summary_title("run1830", 300000, 1200000),
        sections=(("summary", [HOME, TOTAL]), ("ratios", analysis.closed_loop_ratios(6250, 53, 156, 31.73))),
    )
    text = report.render_document(doc, "text").decode()
    lines = text.splitlines()
    assert lines[0] == "Inter-arrival Summary Statistics (ms) - run1830_300_1200"
    assert lines[1] == SUMMARY_HEADER
    assert lines[4] == ""
    assert lines[5].startswith("z_mean,")

    csv_text = report.render_document(doc, "csv").decode()
    assert csv_text.splitlines()[0] == SUMMARY_HEADER

    document = json.loads(report.render_document(doc, "json"))
    assert document["title"] == lines[0]
    assert [s["table"] for s in document["sections"]] == ["interarrival_summary", "closed_loop_ratios"]


def test_document_rejects_unknown_section():
    with pytest.raises(ValueError, match="unknown report section"):
        report.render_document(report.ReportDocument("t", (("pie", None),)))


def test_render_log_reads_back(sample_set, sample_path):
    data = report.render_log(sample_set)
    assert data.decode().splitlines()[0] == ",".join(ingest.HEADER)
    assert data.decode().splitlines()[1] == sample_path.read_text().splitlines()[1]
    assert ingest.parse_log(data) == sample_set


def test_svg_histogram():
    hist = Histogram(bin_width=1.0, origin=0.0, counts=(2, 5, 3), theoretical=(0.2, 0.5, 0.3))
    svg = report.render_svg(report.histogram_series(hist), kind="histogram", title="Rates & counts").decode()
    assert svg.startswith('<?xml version="1.0"')
    assert "<svg" in svg
    assert svg.rstrip().endswith("</svg>")
    assert svg.count('class="bar"') == 3
    assert svg.count('class="series"') == 1
    assert "Rates &amp; counts" in svg


def test_svg_curve_is_deterministic():
    points = [ThreadCurvePoint(k, 10 * k, 1.0, 5.0, 4.0, 0.5 + k / 10) for k in (1, 2, 5)]
    series = [report.curve_series(points, "1830")]
    first = report.render_svg(series, x_label="threads", y_label="CoV_DRT")
    assert first == report.render_svg(series, x_label="threads", y_label="CoV_DRT")
    assert first.decode().count("<circle") == 3


def test_svg_needs_data():
    empty = report.curve_series([ThreadCurvePoint(1, 1, 1.0, None, None, None)])
    with pytest.raises(ValueError, match="nothing to plot"):
        report.render_svg([empty])
