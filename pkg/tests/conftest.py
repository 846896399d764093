from pathlib import Path

import pytest

import ingest
from config import FORMAT_ENV_VAR

FIXTURES_DIR = Path(__file__).parent / "fixtures"
SAMPLE_LOG = FIXTURES_DIR / "aggregate_report_sample.csv"


@pytest.fixture
def sample_path():
    return SAMPLE_LOG


@pytest.fixture
def sample_set():
    return ingest.read_log(str(SAMPLE_LOG))


@pytest.fixture(autouse=True)
def _no_format_env(monkeypatch):
    monkeypatch.delenv(FORMAT_ENV_VAR, raising=False)


def make_record(timestamp_ms, thread_name="Thread Group 1-1", label="010_Home", elapsed_ms=0):
    return ingest.RequestRecord(
        timestamp_ms=timestamp_ms,
        elapsed_ms=elapsed_ms,
        label=label,
        response_code="200",
        response_message="OK",
        thread_name=thread_name,
        data_type="text",
        success=True,
        byte_count=0,
        first_byte_ms=0,
    )


def make_set(timestamps, thread_name="Thread Group 1-1", label="010_Home"):
    return ingest.RecordSet.from_records(
        [make_record(t, thread_name=thread_name, label=label) for t in timestamps]
    )
