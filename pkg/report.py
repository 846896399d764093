# report.py
"""Tables, log files and SVG plots for the analysis results.

Text output follows the aggregate report layout (comma separated, cv shown
as a bare ``1`` when it rounds to 1.00); CSV always carries two decimals;
JSON carries full precision with ``null`` for undefined statistics.
"""
import csv
import io
import json
from dataclasses import dataclass
from xml.sax.saxutils import escape

from ingest import HEADER

FORMATS = ("text", "csv", "json")
SUMMARY_COLUMNS = ("label", "n", "tps", "median", "mean", "sdev", "cv", "p90", "p95", "p99", "min", "max")
CURVE_COLUMNS = ("thread_count", "trans", "tps", "drt_mean", "drt_sdev", "cov_drt")
HISTOGRAM_COLUMNS = ("bin", "observed", "theoretical")
RATIO_COLUMNS = ("z_mean", "r_mean", "r_sdev", "cov_r", "rt_mean", "rort_mean", "tps", "n_estimate")

UNDEFINED_TEXT = "undef"
SUMMARY_TITLE = "Inter-arrival Summary Statistics (ms)"


@dataclass(frozen=True, slots=True)
class Table:
    name: str
    columns: tuple
    text_rows: list
    csv_rows: list
    records: list


@dataclass(frozen=True, slots=True)
class ReportDocument:
    title: str
    sections: tuple


@dataclass(frozen=True, slots=True)
class PlotSeries:
    name: str
    xs: tuple
    ys: tuple


def _check_format(fmt):
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}; use one of {', '.join(FORMATS)}")


def _fixed(value, undefined, places=2):
    if value is None:
        return undefined
    return f"{value:.{places}f}"


def _plain(value, undefined):
    # order statistics of integer-millisecond gaps print as integers
    if value is None:
        return undefined
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.2f}"


def _cv_text(value):
    if value is None:
        return UNDEFINED_TEXT
    shown = f"{value:.2f}"
    return "1" if shown == "1.00" else shown


def _summary_table(rows):
    if not rows:
        raise ValueError("no summary rows to render")
    ordered = [r for r in rows if r.label != "Total"] + [r for r in rows if r.label == "Total"]

    def cells(r, undefined, cv_cell):
        return [
            r.label,
            str(r.n),
            _fixed(r.tps, undefined),
            _plain(r.median, undefined),
            _fixed(r.mean, undefined),
            _fixed(r.sdev, undefined),
            cv_cell,
            _plain(r.p90, undefined),
            _plain(r.p95, undefined),
            _plain(r.p99, undefined),
            _plain(r.min, undefined),
            _plain(r.max, undefined),
        ]

    return Table(
        name="interarrival_summary",
        columns=SUMMARY_COLUMNS,
        text_rows=[cells(r, UNDEFINED_TEXT, _cv_text(r.cv)) for r in ordered],
        csv_rows=[cells(r, "", _fixed(r.cv, "")) for r in ordered],
        records=[{c: getattr(r, c) for c in SUMMARY_COLUMNS} for r in ordered],
    )


def _curve_table(points):
    if not points:
        raise ValueError("no thread-curve points to render")

    def cells(p, undefined):
        return [
            str(p.thread_count),
            str(p.trans),
            _fixed(p.tps, undefined),
            _fixed(p.drt_mean, undefined),
            _fixed(p.drt_sdev, undefined),
            _fixed(p.cov_drt, undefined),
        ]

    return Table(
        name="thread_curve",
        columns=CURVE_COLUMNS,
        text_rows=[cells(p, UNDEFINED_TEXT) for p in points],
        csv_rows=[cells(p, "") for p in points],
        records=[{c: getattr(p, c) for c in CURVE_COLUMNS} for p in points],
    )


def _matrix_table(curves):
    if not curves:
        raise ValueError("no thread curves to render")
    runs = list(curves)
    by_run = {run: {p.thread_count: p.cov_drt for p in points} for run, points in curves.items()}
    counts = sorted({k for cells in by_run.values() for k in cells})

    def cells(k, undefined, missing):
        row = [str(k)]
        for run in runs:
            if k not in by_run[run]:
                row.append(missing)
            else:
                row.append(_fixed(by_run[run][k], undefined))
        return row

    return Table(
        name="thread_curve_matrix",
        columns=("thread_count", *runs),
        text_rows=[cells(k, UNDEFINED_TEXT, "") for k in counts],
        csv_rows=[cells(k, "", "") for k in counts],
        records=[{"thread_count": k, **{run: by_run[run].get(k) for run in runs}} for k in counts],
    )


def _histogram_table(hist):
    total = hist.total
    if not hist.counts or total == 0:
        raise ValueError("histogram is empty")

    rows = []
    for i, count in enumerate(hist.counts):
        edge = hist.origin + i * hist.bin_width
        theoretical = hist.theoretical[i] if hist.theoretical is not None else None
        rows.append((edge, count / total, theoretical, count))

    return Table(
        name="histogram",
        columns=HISTOGRAM_COLUMNS,
        text_rows=[[_plain(e, ""), f"{o:.4f}", _fixed(t, "", 4)] for e, o, t, _ in rows],
        csv_rows=[[_plain(e, ""), f"{o:.4f}", _fixed(t, "", 4)] for e, o, t, _ in rows],
        records=[
            {"bin": e, "count": c, "observed": o, "theoretical": t} for e, o, t, c in rows
        ],
    )


def _ratios_table(ratios):
    def cells(undefined):
        return [
            _fixed(ratios.z_mean, undefined),
            _fixed(ratios.r_mean, undefined),
            _fixed(ratios.r_sdev, undefined),
            _fixed(ratios.cov_r, undefined),
            _fixed(ratios.rt_mean, undefined),
            _fixed(ratios.rort_mean, undefined, 4),
            _fixed(ratios.tps, undefined),
            _fixed(ratios.n_estimate, undefined),
        ]

    return Table(
        name="closed_loop_ratios",
        columns=RATIO_COLUMNS,
        text_rows=[cells(UNDEFINED_TEXT)],
        csv_rows=[cells("")],
        records=[{c: getattr(ratios, c) for c in RATIO_COLUMNS}],
    )


def _delimited(columns, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def _table_json(table):
    return {"table": table.name, "columns": list(table.columns), "rows": table.records}


def _emit(table, fmt):
    _check_format(fmt)
    if fmt == "json":
        return (json.dumps(_table_json(table), indent=2) + "\n").encode("utf-8")
    rows = table.text_rows if fmt == "text" else table.csv_rows
    return _delimited(table.columns, rows).encode("utf-8")


def render_summary_table(rows, fmt="text"):
    return _emit(_summary_table(rows), fmt)


def render_thread_curve(points, fmt="text"):
    return _emit(_curve_table(points), fmt)


def render_curve_matrix(curves, fmt="text"):
    return _emit(_matrix_table(curves), fmt)


def render_histogram_data(hist, fmt="text"):
    return _emit(_histogram_table(hist), fmt)


def render_ratios(ratios, fmt="text"):
    return _emit(_ratios_table(ratios), fmt)


_SECTION_TABLES = {
    "summary": _summary_table,
    "curve": _curve_table,
    "matrix": _matrix_table,
    "histogram": _histogram_table,
    "ratios": _ratios_table,
}


def render_document(doc, fmt="text"):
    _check_format(fmt)
    tables = []
    for kind, payload in doc.sections:
        if kind not in _SECTION_TABLES:
            raise ValueError(f"unknown report section {kind!r}")
        tables.append(_SECTION_TABLES[kind](payload))

    if fmt == "json":
        body = {"title": doc.title, "sections": [_table_json(t) for t in tables]}
        return (json.dumps(body, indent=2) + "\n").encode("utf-8")

    body = "\n".join(_emit(t, fmt).decode("utf-8") for t in tables)
    if fmt == "text":
        body = f"{doc.title}\n{body}"
    return body.encode("utf-8")


def summary_title(source, trim_start_ms, window_ms):
    return f"{SUMMARY_TITLE} - {source}_{round(trim_start_ms / 1000)}_{round(window_ms / 1000)}"


def render_log(record_set):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for r in record_set.records:
        writer.writerow(
            [
                r.timestamp_ms,
                r.elapsed_ms,
                r.label,
                r.response_code,
                r.response_message,
                r.thread_name,
                r.data_type,
                "TRUE" if r.success else "FALSE",
                r.byte_count,
                r.first_byte_ms,
            ]
        )
    return buffer.getvalue().encode("utf-8")


def histogram_series(hist):
    total = hist.total
    if total == 0:
        raise ValueError("histogram is empty")
    xs = tuple(hist.origin + i * hist.bin_width for i in range(len(hist.counts)))
    series = [PlotSeries("observed", xs, tuple(c / total for c in hist.counts))]
    if hist.theoretical is not None:
        series.append(PlotSeries("theoretical", xs, tuple(hist.theoretical)))
    return series


def curve_series(points, name="cov_drt"):
    defined = [p for p in points if p.cov_drt is not None]
    return PlotSeries(
        name,
        tuple(float(p.thread_count) for p in defined),
        tuple(p.cov_drt for p in defined),
    )


_WIDTH, _HEIGHT = 640, 400
_LEFT, _RIGHT, _TOP, _BOTTOM = 64, 24, 40, 48
_COLORS = ("#2b7bba", "#e0a100", "#3a9e4f", "#c0392b", "#7d3c98", "#616a6b", "#16a085")
_TICKS = 5


def _coord(v):
    return f"{v:.2f}"


def _tick_label(v):
    return f"{round(v, 4):g}"


def render_svg(series, kind="curve", title="", x_label="", y_label=""):
    if kind not in ("histogram", "curve"):
        raise ValueError(f"unknown plot kind {kind!r}")
    series = [s for s in series if s.xs]
    if not series:
        raise ValueError("nothing to plot")
    for s in series:
        if len(s.xs) != len(s.ys):
            raise ValueError(f"series {s.name!r} has mismatched x and y lengths")

    xs = [x for s in series for x in s.xs]
    ys = [y for s in series for y in s.ys]
    step = 0.0
    if kind == "histogram":
        edges = sorted(set(series[0].xs))
        step = min((b - a for a, b in zip(edges, edges[1:])), default=1.0)
    x_lo, x_hi = min(xs), max(xs) + step
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    y_hi = max(ys) * 1.05 if max(ys) > 0 else 1.0
    y_lo = min(0.0, min(ys))

    plot_w = _WIDTH - _LEFT - _RIGHT
    plot_h = _HEIGHT - _TOP - _BOTTOM

    def sx(x):
        return _LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return _TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        out.append(
            f'<text x="{_WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>'
        )

    bottom, right = _TOP + plot_h, _LEFT + plot_w
    out.append(f'<line class="axis" x1="{_LEFT}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="#000000"/>')
    out.append(f'<line class="axis" x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{bottom}" stroke="#000000"/>')
    for i in range(_TICKS + 1):
        xv = x_lo + (x_hi - x_lo) * i / _TICKS
        yv = y_lo + (y_hi - y_lo) * i / _TICKS
        out.append(
            f'<text x="{_coord(sx(xv))}" y="{bottom + 16}" text-anchor="middle" font-size="10">'
            f"{_tick_label(xv)}</text>"
        )
        out.append(
            f'<text x="{_LEFT - 6}" y="{_coord(sy(yv) + 3)}" text-anchor="end" font-size="10">'
            f"{_tick_label(yv)}</text>"
        )
    if x_label:
        out.append(
            f'<text x="{_LEFT + plot_w / 2:.2f}" y="{_HEIGHT - 8}" text-anchor="middle" font-size="12">'
            f"{escape(x_label)}</text>"
        )
    if y_label:
        out.append(
            f'<text x="14" y="{_TOP + plot_h / 2:.2f}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 14 {_TOP + plot_h / 2:.2f})">{escape(y_label)}</text>'
        )

    for index, s in enumerate(series):
        color = _COLORS[index % len(_COLORS)]
        if kind == "histogram" and index == 0:
            for x, y in zip(s.xs, s.ys):
                top = sy(max(y, 0.0))
                out.append(
                    f'<rect class="bar" x="{_coord(sx(x))}" y="{_coord(top)}" '
                    f'width="{_coord(sx(x + step) - sx(x))}" height="{_coord(sy(0.0) - top)}" '
                    f'fill="{color}" stroke="#ffffff"/>'
                )
            continue
        shift = step / 2
        points = " ".join(f"{_coord(sx(x + shift))},{_coord(sy(y))}" for x, y in zip(s.xs, s.ys))
        out.append(f'<polyline class="series" points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in zip(s.xs, s.ys):
            out.append(f'<circle cx="{_coord(sx(x + shift))}" cy="{_coord(sy(y))}" r="2.5" fill="{color}"/>')

    for index, s in enumerate(series):
        color = _COLORS[index % len(_COLORS)]
        y = _TOP + 12 + 16 * index
        out.append(f'<rect x="{right - 120}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{right - 104}" y="{y}" font-size="11">{escape(s.name)}</text>')

    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
