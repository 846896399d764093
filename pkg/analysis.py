# analysis.py
"""Inter-arrival statistics for load-tool launch logs.

Launch timestamps are sorted and differenced; the coefficient of variation
of those differences is the traffic quality measure (about 1 for
independent, Poisson-like launches, above 1 for bunching, below 1 for
assembly-line spacing).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ingest import thread_names

logger = logging.getLogger(__name__)

TOTAL_LABEL = "Total"
PERCENTILES = (50, 90, 95, 99)
DEFAULT_CHECKPOINTS = (
    tuple(range(1, 11)) + tuple(range(15, 51, 5)) + (75, 100, 125, 150, 175, 200)
)


@dataclass(frozen=True, slots=True, eq=False)
class DiffSeries:
    diffs_ms: np.ndarray
    window_ms: float
    n_events: int


@dataclass(frozen=True, slots=True)
class InterArrivalSummary:
    label: str
    n: int
    tps: float | None
    median: float | None
    mean: float | None
    sdev: float | None
    cv: float | None
    p90: float | None
    p95: float | None
    p99: float | None
    min: float | None
    max: float | None

    @property
    def is_defined(self):
        return self.mean is not None


@dataclass(frozen=True, slots=True)
class ThreadCurvePoint:
    thread_count: int
    trans: int
    tps: float | None
    drt_mean: float | None
    drt_sdev: float | None
    cov_drt: float | None


@dataclass(frozen=True, slots=True)
class Histogram:
    bin_width: float
    origin: float
    counts: tuple
    theoretical: tuple | None = None
    partial_final: bool = False

    @property
    def total(self):
        return sum(self.counts)


@dataclass(frozen=True, slots=True)
class IntervalCounts:
    per_bin: Histogram
    frequency: Histogram
    mean: float
    variance: float | None


@dataclass(frozen=True, slots=True)
class ClosedLoopRatios:
    z_mean: float
    r_mean: float
    r_sdev: float | None
    cov_r: float | None
    rt_mean: float
    rort_mean: float
    tps: float
    n_estimate: float


def _sorted_timestamps(record_set):
    return np.sort(np.asarray(record_set.timestamps(), dtype=np.int64), kind="stable")


def _rate(n_events, window_ms):
    if window_ms <= 0:
        return None
    return n_events / (window_ms / 1000.0)


def _diff_series(timestamps, window_ms=None):
    if len(timestamps) < 2:
        raise ValueError("insufficient events")
    diffs = np.diff(timestamps).astype(np.float64)
    diffs.flags.writeable = False
    if window_ms is None:
        window_ms = float(timestamps[-1] - timestamps[0])
    return DiffSeries(diffs_ms=diffs, window_ms=float(window_ms), n_events=len(timestamps))


def interarrival_diffs(record_set):
    return _diff_series(_sorted_timestamps(record_set))


def nearest_rank(sorted_values, percent):
    # integer ceil(percent * n / 100) avoids float rounding pushing the rank up
    n = len(sorted_values)
    rank = max(1, -(-percent * n // 100))
    return float(sorted_values[rank - 1])


def _spread(diffs):
    mean = float(diffs.mean())
    sdev = float(diffs.std(ddof=1)) if len(diffs) >= 2 else None
    cv = sdev / mean if sdev is not None and mean > 0 else None
    return mean, sdev, cv


def summarize(diffs, label):
    d = diffs.diffs_ms
    tps = _rate(diffs.n_events, diffs.window_ms)
    if len(d) == 0:
        return _undefined_summary(label, diffs.n_events, tps)

    mean, sdev, cv = _spread(d)
    s = np.sort(d)
    median, p90, p95, p99 = (nearest_rank(s, p) for p in PERCENTILES)
    return InterArrivalSummary(
        label=label,
        n=diffs.n_events,
        tps=tps,
        median=median,
        mean=mean,
        sdev=sdev,
        cv=cv,
        p90=p90,
        p95=p95,
        p99=p99,
        min=float(s[0]),
        max=float(s[-1]),
    )


def _undefined_summary(label, n, tps):
    return InterArrivalSummary(label, n, tps, None, None, None, None, None, None, None, None, None)


def _summarize_group(timestamps, window_ms, label):
    if len(timestamps) < 2:
        return _undefined_summary(label, len(timestamps), _rate(len(timestamps), window_ms))
    return summarize(_diff_series(timestamps, window_ms), label)


def per_label_report(record_set):
    if not record_set.records:
        raise ValueError("no records")

    window_ms = float(record_set.span_ms)
    by_label = {}
    for r in record_set.records:
        by_label.setdefault(r.label, []).append(r.timestamp_ms)

    rows = []
    for label in sorted(by_label):
        timestamps = np.sort(np.asarray(by_label[label], dtype=np.int64), kind="stable")
        row = _summarize_group(timestamps, window_ms, label)
        if not row.is_defined:
            logger.warning("label %s has %d record(s); statistics undefined", label, row.n)
        rows.append(row)

    rows.append(_summarize_group(_sorted_timestamps(record_set), window_ms, TOTAL_LABEL))
    return rows


def default_checkpoints(thread_count):
    return [k for k in DEFAULT_CHECKPOINTS if k <= thread_count]


def thread_curve(record_set, ordering=None, checkpoints=None):
    if ordering is None:
        ordering = thread_names(record_set)
    ordering = list(ordering)
    if not ordering:
        raise ValueError("thread ordering is empty")

    by_thread = {}
    for r in record_set.records:
        by_thread.setdefault(r.thread_name, []).append(r.timestamp_ms)
    duplicates = sorted({name for name in ordering if ordering.count(name) > 1})
    if duplicates:
        raise ValueError(f"thread ordering repeats: {', '.join(duplicates)}")
    missing = [name for name in ordering if name not in by_thread]
    if missing:
        raise ValueError(f"threads not found in log: {', '.join(missing)}")

    if checkpoints is None:
        checkpoints = default_checkpoints(len(ordering))
    checkpoints = sorted(set(int(k) for k in checkpoints))
    if not checkpoints:
        raise ValueError("no checkpoints")
    out_of_range = [k for k in checkpoints if not 1 <= k <= len(ordering)]
    if out_of_range:
        raise ValueError(
            f"checkpoints outside 1..{len(ordering)}: {', '.join(map(str, out_of_range))}"
        )

    window_ms = float(record_set.span_ms)
    points = []
    for k in checkpoints:
        pooled = np.concatenate(
            [np.asarray(by_thread[name], dtype=np.int64) for name in ordering[:k]]
        )
        pooled = np.sort(pooled, kind="stable")
        trans = len(pooled)
        mean = sdev = cv = None
        if trans >= 2:
            mean, sdev, cv = _spread(np.diff(pooled).astype(np.float64))
        points.append(
            ThreadCurvePoint(
                thread_count=k,
                trans=trans,
                tps=_rate(trans, window_ms),
                drt_mean=mean,
                drt_sdev=sdev,
                cov_drt=cv,
            )
        )
    return points


def requests_per_interval(record_set, bin_width_ms):
    if not record_set.records:
        raise ValueError("no records")
    if bin_width_ms <= 0:
        raise ValueError("bin width must be positive")

    timestamps = _sorted_timestamps(record_set)
    origin = int(timestamps[0])
    span = float(timestamps[-1] - origin)
    n_bins = max(1, math.ceil(span / bin_width_ms))
    partial = span % bin_width_ms != 0

    index = np.floor((timestamps - origin) / bin_width_ms).astype(np.int64)
    index = np.clip(index, 0, n_bins - 1)
    counts = np.bincount(index, minlength=n_bins)

    complete = counts[:-1] if partial and n_bins >= 3 else counts
    mean = float(complete.mean())
    variance = float(complete.var(ddof=1)) if len(complete) >= 2 else None

    frequency = np.bincount(complete)
    theoretical = tuple(poisson_pmf(k, mean) for k in range(len(frequency)))
    return IntervalCounts(
        per_bin=Histogram(
            bin_width=float(bin_width_ms),
            origin=float(origin),
            counts=tuple(int(c) for c in counts),
            partial_final=partial,
        ),
        frequency=Histogram(
            bin_width=1.0,
            origin=0.0,
            counts=tuple(int(c) for c in frequency),
            theoretical=theoretical,
        ),
        mean=mean,
        variance=variance,
    )


def dispersion_index(hist):
    counts = np.asarray(hist.counts, dtype=np.float64)
    if hist.partial_final and len(counts) >= 3:
        counts = counts[:-1]
    if len(counts) < 2:
        raise ValueError("dispersion index needs at least two bins")
    mean = float(counts.mean())
    if mean == 0:
        return None
    return float(counts.var(ddof=1)) / mean


def interarrival_histogram(diffs, bin_width_ms):
    if bin_width_ms <= 0:
        raise ValueError("bin width must be positive")
    d = diffs.diffs_ms
    if len(d) == 0:
        raise ValueError("insufficient events")

    index = np.floor(d / bin_width_ms).astype(np.int64)
    counts = np.bincount(index)
    mean = float(d.mean())
    theoretical = None
    if mean > 0:
        edges = np.arange(len(counts) + 1, dtype=np.float64) * bin_width_ms
        survival = np.exp(-edges / mean)
        theoretical = tuple(float(p) for p in survival[:-1] - survival[1:])
    return Histogram(
        bin_width=float(bin_width_ms),
        origin=0.0,
        counts=tuple(int(c) for c in counts),
        theoretical=theoretical,
    )


def poisson_pmf(k, lam):
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    if lam == 0:
        return 1.0 if k == 0 else 0.0
    return float(stats.poisson.pmf(int(k), lam))


def exp_quantile(q, mean):
    if not 0 < q < 1:
        raise ValueError(f"quantile must lie in (0, 1), got {q}")
    if mean <= 0:
        raise ValueError(f"mean must be positive, got {mean}")
    return float(stats.expon.ppf(q, scale=mean))


def closed_loop_ratios(z_mean, r_mean, r_sdev, tps):
    if z_mean < 0 or r_mean < 0 or tps < 0 or (r_sdev is not None and r_sdev < 0):
        raise ValueError("closed-loop inputs must be non-negative")
    rt_mean = z_mean + r_mean
    if rt_mean <= 0:
        raise ValueError("round-trip time must be positive")
    cov_r = r_sdev / r_mean if r_sdev is not None and r_mean > 0 else None
    return ClosedLoopRatios(
        z_mean=float(z_mean),
        r_mean=float(r_mean),
        r_sdev=None if r_sdev is None else float(r_sdev),
        cov_r=cov_r,
        rt_mean=float(rt_mean),
        rort_mean=r_mean / rt_mean,
        tps=float(tps),
        n_estimate=tps * rt_mean / 1000.0,
    )


def observed_ratios(record_set, z_mean):
    if len(record_set) < 2:
        raise ValueError("insufficient events")
    elapsed = np.asarray([r.elapsed_ms for r in record_set.records], dtype=np.float64)
    tps = _rate(len(record_set), float(record_set.span_ms))
    if tps is None:
        raise ValueError("log spans zero time")
    return closed_loop_ratios(
        z_mean=z_mean,
        r_mean=float(elapsed.mean()),
        r_sdev=float(elapsed.std(ddof=1)),
        tps=tps,
    )
