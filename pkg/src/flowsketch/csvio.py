"""
CSV formats: packet traces, record snapshots / ground truth, model curves and
experiment results.
"""
import csv
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator

from .core import FlowKey, FlowRecord
from .exceptions import TraceInputError
from .traffic import TRACE_HEADER, GroundTruth, TraceEvent, csv_rows, open_csv


RECORD_HEADER = ("src", "dst", "sport", "dport", "proto", "count")
RESULT_COLUMNS = ("algorithm", "trace", "n_flows", "budget_bytes", "metric", "threshold", "value", "seed")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.10g" % value
    return str(value)


@contextmanager
def open_output(path=None, stdout=None):
    """A text handle on `path`, or `stdout` (sys.stdout by default) for None / '-'."""
    if path is None or str(path) == "-":
        yield stdout or sys.stdout
        return
    with Path(path).open("w", newline="") as handle:
        yield handle


def write_trace(events: Iterable[TraceEvent], path=None, stdout=None):
    with open_output(path, stdout) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for event in events:
            key = event.key
            writer.writerow((event.timestamp, key.src, key.dst, key.src_port, key.dst_port, key.protocol))


def write_records_csv(records: Iterable[FlowRecord], path=None, stdout=None):
    with open_output(path, stdout) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        for record in records:
            key = record.key
            writer.writerow((key.src, key.dst, key.src_port, key.dst_port, key.protocol, record.count))


def write_ground_truth(truth: GroundTruth, path=None, stdout=None):
    write_records_csv((FlowRecord(key, count) for key, count in sorted(truth.flows.items())), path, stdout)


def read_records_csv(path) -> Iterator[FlowRecord]:
    path = Path(path)
    handle, reader = open_csv(path, "record file not found")
    with handle:
        rows = csv_rows(reader, path)
        header = next(rows, None)
        if header is None or tuple(cell.strip() for cell in header) != RECORD_HEADER:
            raise TraceInputError(f"bad header {header!r}, expected {','.join(RECORD_HEADER)}", path=path, line=1)
        for row in rows:
            if not row:
                continue
            if len(row) != len(RECORD_HEADER):
                raise TraceInputError(
                    f"expected {len(RECORD_HEADER)} fields, got {len(row)}", path=path, line=reader.line_num
                )
            try:
                *fields, count = row
                key = FlowKey.parse(*fields)
                yield FlowRecord(key, int(count))
            except ValueError as ex:
                raise TraceInputError(str(ex), path=path, line=reader.line_num)


def write_rows(rows: Iterable[dict], columns: Iterable[str], path=None, stdout=None):
    columns = tuple(columns)
    with open_output(path, stdout) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(format_value(row.get(column)) for column in columns)


def write_results(rows: Iterable[dict], path=None, stdout=None):
    write_rows(rows, RESULT_COLUMNS, path, stdout)
