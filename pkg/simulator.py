# simulator.py
"""Deterministic request-log generation.

Open loop: launch times drawn independently over the horizon.
Closed loop: N virtual-user threads each cycle think (Z) -> launch ->
response (R) -> think, over a virtual millisecond clock.

Random streams: the root seed feeds ``numpy.random.SeedSequence(seed)``;
thread k (1-based) draws from ``default_rng(SeedSequence(seed).spawn(N)[k - 1])``.
The open-loop generator uses ``default_rng(SeedSequence(seed))`` directly.
"""
import bisect
import heapq
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ingest import RecordSet, RequestRecord

logger = logging.getLogger(__name__)

THINK_KINDS = ("fixed", "uniform", "exponential")
SUT_KINDS = ("zero", "independent", "queue")
MODES = ("open", "closed")

DEFAULT_EPOCH_MS = 1331861400000
THREAD_GROUP = "Thread Group 1"
OPEN_LOOP_GROUP = "Open Loop 1"

# Default traffic mix; weights are relative request counts
DEFAULT_LABELS = (
    ("010_Home", 10026),
    ("012_Home_jpg", 10205),
    ("020_Dept", 4975),
    ("022_Dept_jpg", 5068),
    ("030_Demographics", 5220),
    ("040_Statistics", 2573),
)

BYTE_COUNTS = {
    "010_Home": 17991,
    "012_Home_jpg": 141907,
    "020_Dept": 26632,
    "022_Dept_jpg": 31541,
    "030_Demographics": 48317,
    "040_Statistics": 110193,
}


@dataclass(frozen=True, slots=True)
class ThinkTimeSpec:
    kind: str
    value_ms: float = 0.0
    offset_ms: float = 0.0
    range_ms: float = 0.0
    mean_ms: float = 0.0

    def __post_init__(self):
        if self.kind not in THINK_KINDS:
            raise ValueError(f"unknown think-time kind {self.kind!r}")
        if min(self.value_ms, self.offset_ms, self.range_ms, self.mean_ms) < 0:
            raise ValueError("think-time parameters must be non-negative")


@dataclass(frozen=True, slots=True)
class SutModelSpec:
    kind: str = "zero"
    r_mean_ms: float = 0.0
    cov_r: float = 0.0
    servers: int = 1
    service_mean_ms: float = 0.0
    service_cov: float = 0.0

    def __post_init__(self):
        if self.kind not in SUT_KINDS:
            raise ValueError(f"unknown SUT model kind {self.kind!r}")
        if self.kind == "independent" and (self.r_mean_ms <= 0 or self.cov_r < 0):
            raise ValueError("independent SUT needs a positive mean and non-negative cov")
        if self.kind == "queue" and (
            self.servers < 1 or self.service_mean_ms <= 0 or self.service_cov < 0
        ):
            raise ValueError("queue SUT needs servers >= 1, a positive service mean and cov >= 0")


@dataclass(frozen=True, slots=True)
class SimConfig:
    mode: str
    horizon_ms: int
    seed: int = 0
    threads: int = 1
    arrivals: int = 0
    think: ThinkTimeSpec | None = None
    sut: SutModelSpec = field(default_factory=SutModelSpec)
    labels: tuple = DEFAULT_LABELS
    epoch_ms: int = DEFAULT_EPOCH_MS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown simulation mode {self.mode!r}")
        if self.horizon_ms <= 0:
            raise ValueError("horizon must be positive")
        if self.epoch_ms < 1:
            raise ValueError("epoch_ms must be positive")
        if not self.labels:
            raise ValueError("at least one label is required")
        if any(weight <= 0 for _, weight in self.labels):
            raise ValueError("label weights must be positive")
        if self.mode == "closed":
            if self.threads < 1:
                raise ValueError("closed loop needs at least one thread")
            if self.think is None:
                raise ValueError("closed loop needs a think-time spec")
            if think_mean(self.think) == 0 and self.sut.kind == "zero":
                raise ValueError("think time and response time are both zero")
        elif self.arrivals < 2:
            raise ValueError("open loop needs at least two arrivals")


class SutModel:
    """Runtime state of a SUT model; the queue kind keeps per-server free times."""

    def __init__(self, spec):
        self.spec = spec
        self.free_at = [0.0] * spec.servers if spec.kind == "queue" else []
        self.served = 0
        self.total_wait_ms = 0.0


def _lognormal(stream, mean, cov):
    if cov == 0:
        return float(mean)
    sigma2 = math.log1p(cov * cov)
    mu = math.log(mean) - sigma2 / 2
    return float(stream.lognormal(mu, math.sqrt(sigma2)))


def sample_think(spec, stream):
    if spec.kind == "fixed":
        return float(spec.value_ms)
    if spec.kind == "uniform":
        return spec.offset_ms + spec.range_ms * stream.random()
    return -spec.mean_ms * math.log1p(-stream.random())


def think_mean(spec):
    if spec.kind == "fixed":
        return float(spec.value_ms)
    if spec.kind == "uniform":
        return spec.offset_ms + spec.range_ms / 2
    return float(spec.mean_ms)


def sut_response(model, at_time, stream):
    spec = model.spec
    model.served += 1
    if spec.kind == "zero":
        return 0.0
    if spec.kind == "independent":
        return _lognormal(stream, spec.r_mean_ms, spec.cov_r)

    # FIFO: arrivals reach the station in launch-time order
    free = heapq.heappop(model.free_at)
    start = max(at_time, free)
    finish = start + _lognormal(stream, spec.service_mean_ms, spec.service_cov)
    heapq.heappush(model.free_at, finish)
    model.total_wait_ms += start - at_time
    return finish - at_time


def thread_streams(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _label_table(labels):
    names = [name for name, _ in labels]
    cumulative = []
    total = 0.0
    for _, weight in labels:
        total += weight
        cumulative.append(total)
    return names, cumulative, total


def _pick_label(table, u):
    names, cumulative, total = table
    index = bisect.bisect_right(cumulative, u * total)
    return names[min(index, len(names) - 1)]


def _to_ms(t):
    return int(t + 0.5)


def _record(timestamp_ms, elapsed_ms, label, thread_name):
    return RequestRecord(
        timestamp_ms=timestamp_ms,
        elapsed_ms=elapsed_ms,
        label=label,
        response_code="200",
        response_message="OK",
        thread_name=thread_name,
        data_type="text",
        success=True,
        byte_count=BYTE_COUNTS.get(label, 0),
        first_byte_ms=0,
    )


def simulate_open_loop(config):
    if config.mode != "open":
        raise ValueError("simulate_open_loop needs an open-loop config")

    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    launches = np.sort(rng.uniform(0.0, config.horizon_ms, config.arrivals))
    picks = rng.random(config.arrivals)
    table = _label_table(config.labels)

    records = [
        _record(
            config.epoch_ms + _to_ms(t),
            0,
            _pick_label(table, u),
            f"{OPEN_LOOP_GROUP}-{i}",
        )
        for i, (t, u) in enumerate(zip(launches.tolist(), picks.tolist()), start=1)
    ]
    logger.debug("open loop: %d arrivals over %d ms", len(records), config.horizon_ms)
    return RecordSet.from_records(records)


def simulate_closed_loop(config):
    if config.mode != "closed":
        raise ValueError("simulate_closed_loop needs a closed-loop config")

    streams = thread_streams(config.seed, config.threads)
    names = [f"{THREAD_GROUP}-{k}" for k in range(1, config.threads + 1)]
    table = _label_table(config.labels)
    model = SutModel(config.sut)
    horizon = config.horizon_ms

    # (virtual time, sequence number, thread index) gives a deterministic replay order
    events = []
    seq = 0
    for k, stream in enumerate(streams):
        launch = sample_think(config.think, stream)
        if launch <= horizon:
            events.append((launch, seq, k))
            seq += 1
    heapq.heapify(events)

    records = []
    while events:
        t, _, k = heapq.heappop(events)
        stream = streams[k]
        label = _pick_label(table, stream.random())
        response = sut_response(model, t, stream)
        records.append(
            _record(config.epoch_ms + _to_ms(t), _to_ms(response), label, names[k])
        )

        launch = t + response + sample_think(config.think, stream)
        if launch <= horizon:
            heapq.heappush(events, (launch, seq, k))
            seq += 1

    if config.sut.kind == "queue" and model.served:
        logger.debug(
            "queue model: %d requests, mean wait %.2f ms",
            model.served,
            model.total_wait_ms / model.served,
        )
    if not records:
        raise ValueError("no launches fell inside the horizon")
    return RecordSet.from_records(records)


def simulate(config):
    if config.mode == "open":
        return simulate_open_loop(config)
    return simulate_closed_loop(config)


def _numbers(text, parts, count):
    if len(parts) != count:
        raise ValueError(f"invalid spec {text!r}: expected {count} parameter(s)")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"invalid spec {text!r}: parameters must be numbers") from None


def parse_think(text):
    kind, *parts = str(text).strip().split(":")
    kind = kind.lower()
    try:
        if kind == "fixed":
            (value,) = _numbers(text, parts, 1)
            return ThinkTimeSpec("fixed", value_ms=value)
        if kind == "uniform":
            offset, width = _numbers(text, parts, 2)
            return ThinkTimeSpec("uniform", offset_ms=offset, range_ms=width)
        if kind in ("exp", "exponential"):
            (mean,) = _numbers(text, parts, 1)
            return ThinkTimeSpec("exponential", mean_ms=mean)
    except ValueError as e:
        if str(e).startswith("invalid spec"):
            raise
        raise ValueError(f"invalid spec {text!r}: {e}") from None
    raise ValueError(f"invalid think-time spec {text!r}: use fixed:v, uniform:offset:range or exp:mean")


def parse_sut(text):
    kind, *parts = str(text).strip().split(":")
    kind = kind.lower()
    try:
        if kind == "zero" and not parts:
            return SutModelSpec("zero")
        if kind in ("lognormal", "independent"):
            mean, cov = _numbers(text, parts, 2)
            return SutModelSpec("independent", r_mean_ms=mean, cov_r=cov)
        if kind == "queue":
            servers, mean, cov = _numbers(text, parts, 3)
            if servers != int(servers):
                raise ValueError("server count must be an integer")
            return SutModelSpec(
                "queue", servers=int(servers), service_mean_ms=mean, service_cov=cov
            )
    except ValueError as e:
        if str(e).startswith("invalid spec"):
            raise
        raise ValueError(f"invalid spec {text!r}: {e}") from None
    raise ValueError(f"invalid SUT spec {text!r}: use zero, lognormal:mean:cov or queue:c:mean:cov")


def parse_labels(value):
    if isinstance(value, dict):
        items = list(value.items())
    else:
        items = []
        for chunk in str(value).split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            name, sep, weight = chunk.partition("=")
            items.append((name.strip(), weight.strip() if sep else 1))

    labels = []
    for name, weight in items:
        name = str(name).strip()
        if not name:
            raise ValueError(f"invalid label list {value!r}: empty label name")
        try:
            weight = float(weight)
        except (TypeError, ValueError):
            raise ValueError(f"invalid weight for label {name!r}: {weight!r}") from None
        if weight <= 0:
            raise ValueError(f"label {name!r} needs a positive weight")
        labels.append((name, weight))
    if not labels:
        raise ValueError(f"invalid label list {value!r}")
    return tuple(labels)


SETTING_KEYS = ("mode", "threads", "think", "sut", "duration_ms", "arrivals", "seed", "labels", "epoch_ms")


def build_config(settings):
    unknown = sorted(set(settings) - set(SETTING_KEYS))
    if unknown:
        raise ValueError(f"unknown simulation settings: {', '.join(unknown)}")

    mode = str(settings.get("mode", "closed"))
    duration = settings.get("duration_ms")
    if duration is None:
        raise ValueError("simulation needs duration_ms")

    think = settings.get("think")
    if think is not None and not isinstance(think, ThinkTimeSpec):
        think = parse_think(think)
    sut = settings.get("sut", "zero")
    if not isinstance(sut, SutModelSpec):
        sut = parse_sut(sut)
    labels = settings.get("labels")
    labels = DEFAULT_LABELS if labels is None else parse_labels(labels)

    return SimConfig(
        mode=mode,
        horizon_ms=int(duration),
        seed=int(settings.get("seed", 0)),
        threads=int(settings.get("threads", 1)),
        arrivals=int(settings.get("arrivals", 0)),
        think=think,
        sut=sut,
        labels=labels,
        epoch_ms=int(settings.get("epoch_ms", DEFAULT_EPOCH_MS)),
    )
