# ingest.py
"""Load-tool event logs: parsing, merging, trimming and filtering.

Timestamps are read as request launch times. Logs written with
end-of-request timestamps would need the elapsed time subtracted first;
this module does not attempt that reconstruction.
"""
import csv
import io
import logging
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

logger = logging.getLogger(__name__)

FIELDS = (
    "timestamp_ms",
    "elapsed_ms",
    "label",
    "response_code",
    "response_message",
    "thread_name",
    "data_type",
    "success",
    "byte_count",
    "first_byte_ms",
)

# Aggregate Report listener captions, in positional order
HEADER = (
    "TimeStamp (ms)",
    "R (ms)",
    "Web Event Name",
    "Response Code",
    "Response Message",
    "User Thread",
    "Data Type",
    "Success",
    "Byte Count",
    "R (1st Byte) (ms)",
)

# JMeter's own CSV column names
JMETER_NAMES = (
    "timeStamp",
    "elapsed",
    "label",
    "responseCode",
    "responseMessage",
    "threadName",
    "dataType",
    "success",
    "bytes",
    "Latency",
)

HEADER_MODES = ("auto", "yes", "no")

_THREAD_SUFFIX = re.compile(r"(\d+)$")


@dataclass(frozen=True, slots=True)
class RequestRecord:
    timestamp_ms: int
    elapsed_ms: int
    label: str
    response_code: str
    response_message: str
    thread_name: str
    data_type: str
    success: bool
    byte_count: int
    first_byte_ms: int

    def __post_init__(self):
        if self.timestamp_ms <= 0:
            raise ValueError(f"timestamp must be positive, got {self.timestamp_ms}")
        if self.elapsed_ms < 0:
            raise ValueError(f"elapsed time must be non-negative, got {self.elapsed_ms}")
        if not 0 <= self.first_byte_ms <= self.elapsed_ms:
            raise ValueError(
                f"first-byte time {self.first_byte_ms} outside [0, {self.elapsed_ms}]"
            )
        if not self.label:
            raise ValueError("label is empty")
        if not self.thread_name:
            raise ValueError("thread name is empty")


@dataclass(frozen=True, slots=True)
class RecordSet:
    records: tuple
    source_count: int = 1

    @classmethod
    def from_records(cls, records, source_count=1):
        # sorted() is stable: equal timestamps keep their input order
        ordered = tuple(sorted(records, key=lambda r: r.timestamp_ms))
        return cls(records=ordered, source_count=source_count)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def first_ms(self):
        return self.records[0].timestamp_ms

    @property
    def last_ms(self):
        return self.records[-1].timestamp_ms

    @property
    def span_ms(self):
        return self.last_ms - self.first_ms if self.records else 0

    def timestamps(self):
        return [r.timestamp_ms for r in self.records]


@dataclass(frozen=True, slots=True)
class TrimWindow:
    start_offset_ms: int = 0
    end_offset_ms: int = 0

    def __post_init__(self):
        if self.start_offset_ms < 0 or self.end_offset_ms < 0:
            raise ValueError("trim offsets must be non-negative")


def _looks_numeric(text):
    try:
        int(text.strip())
    except ValueError:
        return False
    return True


def _resolve_columns(header_row, columns=None):
    names = [name.strip() for name in header_row]
    lookup = {name.lower(): i for i, name in enumerate(names)}
    positions = []
    for i, field in enumerate(FIELDS):
        candidates = []
        if columns and field in columns:
            candidates.append(columns[field])
        candidates += [HEADER[i], JMETER_NAMES[i], field]
        for candidate in candidates:
            index = lookup.get(str(candidate).strip().lower())
            if index is not None:
                positions.append(index)
                break
        else:
            return None
    return positions


def _parse_int(text, field, line_no):
    try:
        return int(text.strip())
    except ValueError:
        raise ValueError(f"line {line_no}: {field} is not an integer: {text!r}") from None


def _parse_success(text, line_no):
    value = text.strip().lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise ValueError(f"line {line_no}: success flag is not a boolean: {text!r}")


def _record_from_row(fields, line_no):
    try:
        return RequestRecord(
            timestamp_ms=_parse_int(fields[0], "timestamp", line_no),
            elapsed_ms=_parse_int(fields[1], "elapsed time", line_no),
            label=fields[2].strip(),
            response_code=fields[3].strip(),
            response_message=fields[4].strip(),
            thread_name=fields[5].strip(),
            data_type=fields[6].strip(),
            success=_parse_success(fields[7], line_no),
            byte_count=_parse_int(fields[8], "byte count", line_no),
            first_byte_ms=_parse_int(fields[9], "first-byte time", line_no),
        )
    except ValueError as e:
        message = str(e)
        if message.startswith("line "):
            raise
        raise ValueError(f"line {line_no}: {message}") from None


def parse_log(data, has_header="auto", columns=None):
    if has_header not in HEADER_MODES:
        raise ValueError(f"has_header must be one of {', '.join(HEADER_MODES)}")

    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text, newline=""))

    positions = None
    width = len(FIELDS)
    records = []
    first_row = True
    for row in reader:
        line_no = reader.line_num
        if not row or all(not field.strip() for field in row):
            continue

        if first_row:
            first_row = False
            is_header = has_header == "yes" or (
                has_header == "auto" and not _looks_numeric(row[0])
            )
            if is_header:
                positions = _resolve_columns(row, columns)
                if positions is None and len(row) != len(FIELDS):
                    raise ValueError(
                        f"line {line_no}: header does not name the {len(FIELDS)} log columns"
                    )
                width = len(row)
                logger.debug("header columns %s", row)
                continue

        if len(row) != width:
            raise ValueError(f"line {line_no}: expected {width} fields, got {len(row)}")
        fields = [row[i] for i in positions] if positions else row
        records.append(_record_from_row(fields, line_no))

    if not records:
        raise ValueError("no records")
    return RecordSet.from_records(records, source_count=1)


def read_log(path, has_header="auto", columns=None):
    if path == "-":
        data = sys.stdin.buffer.read()
    else:
        with open(path, "rb") as f:
            data = f.read()
    try:
        record_set = parse_log(data, has_header=has_header, columns=columns)
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from None
    logger.info("loaded %d records from %s", len(record_set), path)
    return record_set


def load_files(paths, has_header="auto", columns=None, max_workers=4):
    if not paths:
        raise ValueError("no input files")
    if len(paths) == 1:
        return [read_log(paths[0], has_header, columns)]

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        # map() yields in submission order, independent of completion order
        return list(executor.map(lambda p: read_log(p, has_header, columns), paths))


def _shift(record, offset_ms):
    if offset_ms == 0:
        return record
    return RequestRecord(
        timestamp_ms=record.timestamp_ms + offset_ms,
        elapsed_ms=record.elapsed_ms,
        label=record.label,
        response_code=record.response_code,
        response_message=record.response_message,
        thread_name=record.thread_name,
        data_type=record.data_type,
        success=record.success,
        byte_count=record.byte_count,
        first_byte_ms=record.first_byte_ms,
    )


def merge(sets):
    if not sets:
        raise ValueError("merge needs at least one record set")
    shifted = []
    for record_set, offset_ms in sets:
        shifted.extend(_shift(r, int(offset_ms)) for r in record_set.records)
    return RecordSet.from_records(shifted, source_count=len(sets))


def trim(record_set, window):
    if not record_set.records:
        raise ValueError("no records")
    offsets = window.start_offset_ms + window.end_offset_ms
    if offsets and offsets >= record_set.span_ms:
        raise ValueError("trim window empty")
    lo = record_set.first_ms + window.start_offset_ms
    hi = record_set.last_ms - window.end_offset_ms
    logger.debug("trim bounds [%d, %d]", lo, hi)
    kept = tuple(r for r in record_set.records if lo <= r.timestamp_ms <= hi)
    if not kept:
        raise ValueError("trim window empty")
    return RecordSet(records=kept, source_count=record_set.source_count)


def filter_records(record_set, by_label=None, by_threads=None):
    threads = set(by_threads) if by_threads is not None else None
    kept = tuple(
        r
        for r in record_set.records
        if (by_label is None or r.label == by_label)
        and (threads is None or r.thread_name in threads)
    )
    return RecordSet(records=kept, source_count=record_set.source_count)


def _thread_sort_key(name):
    match = _THREAD_SUFFIX.search(name)
    if match is None:
        return (1, name, 0)
    return (0, name[: match.start()], int(match.group(1)))


def thread_names(record_set):
    return sorted({r.thread_name for r in record_set.records}, key=_thread_sort_key)
