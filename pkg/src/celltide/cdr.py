"""Parsing and cleansing of gridded call-data-record activity files.

Raw input is tab-separated text, one record per line:
    grid_id, timestamp_ms, country_code, sms_in, sms_out, call_in, call_out, internet
Empty numeric fields mean "missing" and are read as 0.0. A day of data lives
in one file; a directory of day-files is merged into a single gap-free
per-grid series of 10-minute slots.
"""

import os
from dataclasses import dataclass, field

import numpy as np

SLOT_MS = 600_000  # 10 minutes

CHANNELS = ("sms_in", "sms_out", "call_in", "call_out", "internet")


class ParseError(ValueError):
    """Malformed CDR line; carries file/line location in the message."""


class IngestError(RuntimeError):
    """Directory-level ingestion failure."""


@dataclass(frozen=True)
class CdrRecord:
    grid_id: int
    timestamp_ms: int
    country_code: int
    sms_in: float = 0.0
    sms_out: float = 0.0
    call_in: float = 0.0
    call_out: float = 0.0
    internet: float = 0.0

    def channel(self, name: str) -> float:
        if name not in CHANNELS:
            raise ValueError(f"unknown channel {name!r}")
        return getattr(self, name)


@dataclass
class ActivitySeries:
    """Gap-free per-grid series of one activity channel, one value per slot."""

    grid_id: int
    channel: str
    t0_ms: int
    values: np.ndarray
    slot_ms: int = SLOT_MS

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)

    def slot_timestamp_ms(self, slot: int) -> int:
        return self.t0_ms + slot * self.slot_ms


def _float_field(raw: str) -> float:
    raw = raw.strip()
    if not raw:
        return 0.0  # missing fields are zeros
    return float(raw)


def parse_line(line: str, lineno: int = 0) -> CdrRecord | None:
    """Parse one raw tab-separated record; blank lines yield None.

    Missing trailing columns and empty activity fields are read as 0.0.
    A non-numeric grid id or timestamp raises ParseError carrying `lineno`.
    """
    line = line.rstrip("\n\r")
    if not line.strip():
        return None
    parts = line.split("\t")
    parts += [""] * (8 - len(parts))
    try:
        grid_id = int(parts[0])
        timestamp_ms = int(float(parts[1]))
    except ValueError as exc:
        raise ParseError(f"line {lineno}: bad grid/timestamp field: {exc}") from None
    try:
        country = int(float(parts[2])) if parts[2].strip() else 0
        acts = [_float_field(p) for p in parts[3:8]]
    except ValueError as exc:
        raise ParseError(f"line {lineno}: bad numeric field: {exc}") from None
    return CdrRecord(grid_id, timestamp_ms, country, *acts)


def ms_to_slot(timestamp_ms: int, t0_ms: int) -> int:
    """Slot index of a timestamp; floors stragglers to their 10-minute slot."""
    if timestamp_ms < t0_ms:
        raise ValueError(f"timestamp {timestamp_ms} precedes series origin {t0_ms}")
    return (timestamp_ms - t0_ms) // SLOT_MS


def aggregate(records, grid_id: int, channel: str, t0_ms: int, n_slots: int) -> ActivitySeries:
    """Sum the chosen channel of all same-grid records into per-slot totals.

    Multiple records landing on one slot (different country codes, duplicate
    entries) are summed; slots with no records stay 0.0. Records for other
    grids or outside [t0, t0 + n_slots) are ignored. Summation follows input
    order, so results are deterministic.
    """
    if n_slots <= 0:
        raise ValueError("n_slots must be positive")
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    values = np.zeros(n_slots, dtype=np.float64)
    for rec in records:
        if rec.grid_id != grid_id or rec.timestamp_ms < t0_ms:
            continue
        slot = ms_to_slot(rec.timestamp_ms, t0_ms)
        if slot < n_slots:
            values[slot] += rec.channel(channel)
    return ActivitySeries(grid_id, channel, t0_ms, values)


def _parse_file(path: str, grid_id: int):
    """Yield (timestamp_ms, channel values tuple) for one grid from one file."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                rec = parse_line(line, lineno)
            except ParseError as exc:
                raise IngestError(f"{os.path.basename(path)}: {exc}") from None
            if rec is not None and rec.grid_id == grid_id:
                out.append(rec)
    return out


def ingest_dir(dir_path: str, grid_id: int, channel: str) -> ActivitySeries:
    """Merge all day-files of a directory into one gap-free activity series.

    Files are processed in lexicographic name order; the series origin is the
    slot-aligned floor of the earliest timestamp seen, and the series spans
    first to last observed slot with zeros where nothing was recorded.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    names = sorted(n for n in os.listdir(dir_path)
                   if os.path.isfile(os.path.join(dir_path, n)))
    if not names:
        raise IngestError(f"no input files in {dir_path}")
    records: list[CdrRecord] = []
    for name in names:
        records.extend(_parse_file(os.path.join(dir_path, name), grid_id))
    if not records:
        raise IngestError(f"no records for grid {grid_id} in {dir_path}")
    t0_ms = min(r.timestamp_ms for r in records) // SLOT_MS * SLOT_MS
    last_slot = max(ms_to_slot(r.timestamp_ms, t0_ms) for r in records)
    return aggregate(records, grid_id, channel, t0_ms, last_slot + 1)


def write_series_csv(series: ActivitySeries, path: str) -> None:
    """Series CSV: `slot,timestamp_ms,value` with round-trip-exact floats."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("slot,timestamp_ms,value\n")
        for i, v in enumerate(series.values):
            fh.write(f"{i},{series.slot_timestamp_ms(i)},{v:.17g}\n")


def read_series_csv(path: str, grid_id: int = 0, channel: str = "internet") -> ActivitySeries:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "slot,timestamp_ms,value":
            raise ParseError(f"{path}: unexpected series header {header!r}")
        t0_ms = None
        values = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                slot_s, ts_s, val_s = line.strip().split(",")
                slot, ts, val = int(slot_s), int(ts_s), float(val_s)
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            if t0_ms is None:
                t0_ms = ts - slot * SLOT_MS
            if slot != len(values):
                raise ParseError(f"{path}: line {lineno}: slot {slot} out of order")
            values.append(val)
    if not values:
        raise ParseError(f"{path}: empty series")
    return ActivitySeries(grid_id, channel, t0_ms, np.array(values))
