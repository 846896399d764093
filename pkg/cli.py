# cli.py
import argparse
import json
import logging
import sys
from pathlib import Path

import analysis
import ingest
import report
import simulator
from config import OUTPUT_FORMATS, configure_logging, default_format, load_config_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _non_negative_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _int_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _spec_arg(parse):
    def convert(text):
        try:
            parse(text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from None
        return text

    return convert


def _source_name(paths):
    names = ["stdin" if p == "-" else Path(p).stem for p in paths]
    return "+".join(names)


def _write(out, data):
    if out in (None, "-"):
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()
        return
    with open(out, "wb") as f:
        f.write(data)
    logger.info("wrote %s", out)


def _load(paths, args, config):
    sets = ingest.load_files(paths, has_header=args.header, columns=config.get("columns"))
    record_set = sets[0] if len(sets) == 1 else ingest.merge([(s, 0) for s in sets])
    window = ingest.TrimWindow(args.trim_start_ms, args.trim_end_ms)
    return ingest.trim(record_set, window)


def cmd_analyze(args, config):
    record_set = _load(args.inputs, args, config)
    if args.label:
        record_set = ingest.filter_records(record_set, by_label=args.label)
        if not record_set.records:
            raise ValueError(f"no records with label {args.label!r}")

    if len(record_set) >= 2:
        diffs = analysis.interarrival_diffs(record_set)
        logger.debug(
            "first inter-arrival difference: %d ms (%d events)", int(diffs.diffs_ms[0]), diffs.n_events
        )
    rows = analysis.per_label_report(record_set)
    title = report.summary_title(_source_name(args.inputs), args.trim_start_ms, record_set.span_ms)
    doc = report.ReportDocument(title=title, sections=(("summary", rows),))
    _write(args.out, report.render_document(doc, args.format))
    return EXIT_OK


def cmd_curve(args, config):
    curves = {}
    for path in args.inputs:
        record_set = _load([path], args, config)
        curves[_source_name([path])] = analysis.thread_curve(
            record_set, ordering=args.threads_order, checkpoints=args.checkpoints
        )

    if len(curves) == 1:
        run, points = next(iter(curves.items()))
        doc = report.ReportDocument(
            title=f"CoV_DRT vs thread group size - {run}", sections=(("curve", points),)
        )
    else:
        doc = report.ReportDocument(
            title=f"CoV_DRT vs thread group size - {', '.join(curves)}",
            sections=(("matrix", curves),),
        )
    _write(args.out, report.render_document(doc, args.format))

    if args.svg:
        series = [report.curve_series(points, run) for run, points in curves.items()]
        _write(
            args.svg,
            report.render_svg(
                series, kind="curve", title=doc.title, x_label="threads", y_label="CoV_DRT"
            ),
        )
    return EXIT_OK


def cmd_histogram(args, config):
    record_set = _load(args.inputs, args, config)
    source = _source_name(args.inputs)

    if args.kind == "counts":
        counts = analysis.requests_per_interval(record_set, args.bin_width_ms)
        index = analysis.dispersion_index(counts.per_bin) if len(counts.per_bin.counts) >= 2 else None
        shown = "undef" if index is None else f"{index:.2f}"
        title = (
            f"Requests per interval ({args.bin_width_ms / 1000:g} s) - {source}, "
            f"mean {counts.mean:.2f}, dispersion index {shown}"
        )
        if counts.per_bin.partial_final:
            logger.info("final %g ms bin is partial and left out of the statistics", args.bin_width_ms)
        hist = counts.frequency
        x_label = "requests per interval"
    else:
        diffs = analysis.interarrival_diffs(record_set)
        hist = analysis.interarrival_histogram(diffs, args.bin_width_ms)
        title = f"Time between requests ({args.bin_width_ms:g} ms bins) - {source}"
        x_label = "ms between requests"

    doc = report.ReportDocument(title=title, sections=(("histogram", hist),))
    _write(args.out, report.render_document(doc, args.format))
    if args.svg:
        _write(
            args.svg,
            report.render_svg(
                report.histogram_series(hist),
                kind="histogram",
                title=title,
                x_label=x_label,
                y_label="fraction",
            ),
        )
    return EXIT_OK


def cmd_merge(args, config):
    offsets = args.offset_ms or [0] * len(args.inputs)
    if len(offsets) != len(args.inputs):
        raise UsageError(
            f"got {len(offsets)} --offset-ms value(s) for {len(args.inputs)} input file(s)"
        )
    sets = ingest.load_files(args.inputs, has_header=args.header, columns=config.get("columns"))
    merged = ingest.merge(list(zip(sets, offsets)))
    logger.info("merged %d records from %d files", len(merged), merged.source_count)
    _write(args.out, report.render_log(merged))
    return EXIT_OK


def cmd_ratios(args, config):
    ratios = analysis.closed_loop_ratios(args.z_mean, args.r_mean, args.r_sdev, args.tps)
    _write(args.out, report.render_ratios(ratios, args.format))
    return EXIT_OK


def cmd_simulate(args, config):
    settings = dict(config.get("simulate") or {})
    # flag dests match the setting keys
    for key in simulator.SETTING_KEYS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    try:
        sim_config = simulator.build_config(settings)
    except ValueError as e:
        raise UsageError(str(e)) from None

    record_set = simulator.simulate(sim_config)
    _write(args.out, report.render_log(record_set))

    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    if sim_config.mode == "closed":
        ratios = analysis.observed_ratios(record_set, simulator.think_mean(sim_config.think))
        logger.info(
            "simulated %d launches: tps %.2f, R_mean %.2f ms, RoRT_mean %.2f%%, N estimate %.1f",
            len(record_set),
            ratios.tps,
            ratios.r_mean,
            ratios.rort_mean * 100,
            ratios.n_estimate,
        )
        stream.write(report.render_ratios(ratios, "text").decode("utf-8"))
    else:
        summary = analysis.summarize(analysis.interarrival_diffs(record_set), "Total")
        stream.write(report.render_summary_table([summary], "text").decode("utf-8"))
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("-q", "--quiet", action="count", default=0, help="less logging")
    parser.add_argument("--config", help="YAML config file")


def _add_input_options(parser):
    parser.add_argument("inputs", nargs="+", help="aggregate report CSV file(s); - for stdin")
    parser.add_argument("--header", choices=ingest.HEADER_MODES, default="auto", help="header row present")
    parser.add_argument("--trim-start-ms", type=_non_negative_int, default=0)
    parser.add_argument("--trim-end-ms", type=_non_negative_int, default=0)


def _add_output_options(parser):
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default=None)
    parser.add_argument("--out", help="output file (default stdout)")


def build_parser():
    parser = _Parser(
        prog="request-timing",
        description="Measure how independently a load generator launches requests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="inter-arrival summary per label plus Total")
    _add_common(p)
    _add_input_options(p)
    _add_output_options(p)
    p.add_argument("--label", help="only analyse this web event name")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("curve", help="CoV_DRT as threads are added one at a time")
    _add_common(p)
    _add_input_options(p)
    _add_output_options(p)
    p.add_argument(
        "--threads-order",
        type=lambda text: [name.strip() for name in text.split(",") if name.strip()],
        help="comma-separated thread names (default: numeric suffix order)",
    )
    p.add_argument("--checkpoints", type=_int_list, help="comma-separated thread counts")
    p.add_argument("--svg", help="also write the curve as SVG")
    p.set_defaults(handler=cmd_curve)

    p = sub.add_parser("histogram", help="requests per interval or time between requests")
    _add_common(p)
    _add_input_options(p)
    _add_output_options(p)
    p.add_argument("--bin-width-ms", type=_positive_float, default=10000.0)
    p.add_argument("--kind", choices=("counts", "gaps"), default="counts")
    p.add_argument("--svg", help="also write the histogram as SVG")
    p.set_defaults(handler=cmd_histogram)

    p = sub.add_parser("merge", help="merge logs from several load generators")
    _add_common(p)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--header", choices=ingest.HEADER_MODES, default="auto")
    p.add_argument(
        "--offset-ms", type=int, action="append", help="clock offset per input, in input order"
    )
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(handler=cmd_merge)

    p = sub.add_parser("ratios", help="closed-loop ratios and N = Tps x RT_mean")
    _add_common(p)
    p.add_argument("--z-mean", type=float, required=True, help="mean think time (ms)")
    p.add_argument("--r-mean", type=float, required=True, help="mean response time (ms)")
    p.add_argument("--r-sdev", type=float, default=None, help="response time sdev (ms)")
    p.add_argument("--tps", type=float, required=True, help="transactions per second")
    _add_output_options(p)
    p.set_defaults(handler=cmd_ratios)

    p = sub.add_parser("simulate", help="generate a load-tool log")
    _add_common(p)
    p.add_argument("--mode", choices=simulator.MODES)
    p.add_argument("--threads", type=int)
    p.add_argument("--think", type=_spec_arg(simulator.parse_think), help="fixed:v | uniform:offset:range | exp:mean")
    p.add_argument("--sut", type=_spec_arg(simulator.parse_sut), help="zero | lognormal:mean:cov | queue:c:mean:cov")
    p.add_argument("--duration-ms", type=int)
    p.add_argument("--arrivals", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--labels", type=_spec_arg(simulator.parse_labels), help="name=weight,...")
    p.add_argument("--epoch-ms", type=int)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(handler=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose - args.quiet)

    try:
        if hasattr(args, "format") and args.format is None:
            try:
                args.format = default_format()
            except ValueError as e:
                raise UsageError(str(e)) from None
        config = load_config_file(args.config) if args.config else {}
        effective = {k: v for k, v in sorted(vars(args).items()) if k != "handler"}
        logger.info("effective configuration: %s", json.dumps(effective, sort_keys=True, default=str))
        return args.handler(args, config)
    except UsageError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
