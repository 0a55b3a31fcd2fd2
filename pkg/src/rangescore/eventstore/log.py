"""Durable append-only storage: NDJSON event segments plus a raw-bytes store.

Layout under the data dir:

    events/events-00000001.ndjson     record lines; sealed segments end with
                                      a trailer {"count": n, "sha256": hex}
    raw/raw.bin                       length-prefixed original sensor bytes

A record exists once its line (with trailing newline) is on disk; append
fsyncs before returning, so a returned seq survives power loss. Recovery
truncates at most one torn final line per store and refuses to open anything
else that is inconsistent: silently skipping committed data would break the
gapless-seq contract that scoring epochs hang off.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
import threading
from datetime import datetime
from pathlib import Path
from typing import Iterator, Mapping

from rangescore.eventstore.records import (
    EventKind,
    EventRecord,
    StreamCursor,
    utcnow,
    validate_payload,
)

log = logging.getLogger(__name__)

SEGMENT_PREFIX = "events-"
SEGMENT_SUFFIX = ".ndjson"
DEFAULT_SEGMENT_RECORDS = 10_000

_RAW_LEN = struct.Struct(">Q")


class LogCorrupt(Exception):
    """Store contents violate the format; refusing to open."""


class InvalidCursor(ValueError):
    """Cursor position is negative or beyond the log end."""


def _segment_name(first_seq: int) -> str:
    return f"{SEGMENT_PREFIX}{first_seq:08d}{SEGMENT_SUFFIX}"


class EventLog:
    """Segmented append-only event log; one writer, many readers.

    All committed records are also kept in memory (a competition is desk
    scale), so replay and rebuild never touch the disk after open.
    """

    def __init__(self, data_dir: str | Path, sync: bool = True,
                 segment_records: int = DEFAULT_SEGMENT_RECORDS):
        self._dir = Path(data_dir) / "events"
        self._dir.mkdir(parents=True, exist_ok=True)
        self._sync = sync
        self._segment_records = segment_records
        self._lock = threading.Lock()
        self._records: list[EventRecord] = []
        self._active_path: Path | None = None
        self._active_file = None
        self._active_count = 0
        self._open()

    # -- open / recovery ---------------------------------------------------

    def _segments(self) -> list[Path]:
        return sorted(self._dir.glob(f"{SEGMENT_PREFIX}*{SEGMENT_SUFFIX}"))

    def _open(self) -> None:
        segments = self._segments()
        for path in segments[:-1]:
            self._load_sealed(path)
        active_lines: list[str] = []
        if segments:
            active_lines = self._load_active(segments[-1])
        for i, record in enumerate(self._records, start=1):
            if record.seq != i:
                raise LogCorrupt(f"seq gap: expected {i}, found {record.seq}")
        if segments and active_lines is not None:
            self._active_path = segments[-1]
            self._active_count = len(active_lines)
        self._reopen_active()

    def _load_sealed(self, path: Path) -> None:
        data = path.read_text(encoding="utf-8")
        if not data.endswith("\n"):
            raise LogCorrupt(f"sealed segment {path.name} lacks final newline")
        lines = data.splitlines()
        if not lines:
            raise LogCorrupt(f"sealed segment {path.name} is empty")
        trailer = _parse_trailer(lines[-1])
        if trailer is None:
            raise LogCorrupt(f"segment {path.name} has no trailer but is not the last segment")
        body = lines[:-1]
        digest = _body_digest(body)
        if trailer["sha256"] != digest:
            raise LogCorrupt(f"segment {path.name} checksum mismatch")
        if trailer["count"] != len(body):
            raise LogCorrupt(f"segment {path.name} count mismatch")
        for line in body:
            self._records.append(EventRecord.from_line(line))

    def _load_active(self, path: Path) -> list[str]:
        """Load the newest segment, truncating one torn final line if needed.

        Returns the record lines, or None when the segment turned out to be
        sealed (trailer present): the next append then starts a new segment.
        """
        data = path.read_bytes()
        text = data.decode("utf-8", errors="replace")
        torn = text != "" and not text.endswith("\n")
        lines = text.splitlines()
        if torn:
            dropped = lines.pop()
            log.warning("truncating torn final line (%d bytes) in %s", len(dropped), path.name)
            keep = sum(len(l.encode()) + 1 for l in lines)
            with open(path, "r+b") as fh:
                fh.truncate(keep)
                fh.flush()
                os.fsync(fh.fileno())
        if lines and _parse_trailer(lines[-1]) is not None:
            # crash after seal but before the next segment was created
            body = lines[:-1]
            trailer = _parse_trailer(lines[-1])
            if trailer["sha256"] != _body_digest(body) or trailer["count"] != len(body):
                raise LogCorrupt(f"segment {path.name} trailer mismatch")
            for line in body:
                self._records.append(EventRecord.from_line(line))
            return None
        for i, line in enumerate(lines):
            try:
                self._records.append(EventRecord.from_line(line))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise LogCorrupt(
                    f"segment {path.name} line {i + 1} unreadable mid-file: {exc}"
                ) from exc
        return lines

    def _reopen_active(self) -> None:
        if self._active_path is None:
            first = self._records[-1].seq + 1 if self._records else 1
            self._active_path = self._dir / _segment_name(first)
            self._active_count = 0
        self._active_file = open(self._active_path, "ab")

    # -- append ------------------------------------------------------------

    @property
    def next_seq(self) -> int:
        return len(self._records) + 1

    @property
    def max_seq(self) -> int:
        return len(self._records)

    def append(self, kind: EventKind, payload: Mapping,
               committed_at: datetime | None = None) -> EventRecord:
        """Validate, persist, fsync, remember. Returns the committed record."""
        validate_payload(kind, payload)
        with self._lock:
            record = EventRecord(
                seq=self.next_seq,
                kind=kind,
                payload=dict(payload),
                committed_at=committed_at if committed_at is not None else utcnow(),
            )
            line = record.to_line() + "\n"
            self._active_file.write(line.encode("utf-8"))
            self._active_file.flush()
            if self._sync:
                os.fsync(self._active_file.fileno())
            self._records.append(record)
            self._active_count += 1
            if self._active_count >= self._segment_records:
                self._seal_active()
            return record

    def _seal_active(self) -> None:
        body = [r.to_line() for r in self._records[-self._active_count:]]
        trailer = json.dumps(
            {"count": self._active_count, "sha256": _body_digest(body)},
            separators=(",", ":"), sort_keys=True,
        )
        self._active_file.write((trailer + "\n").encode("utf-8"))
        self._active_file.flush()
        os.fsync(self._active_file.fileno())
        self._active_file.close()
        self._active_path = self._dir / _segment_name(self.next_seq)
        self._active_count = 0
        self._active_file = open(self._active_path, "ab")

    def close(self) -> None:
        if self._active_file is not None:
            self._active_file.flush()
            if self._sync:
                os.fsync(self._active_file.fileno())
            self._active_file.close()
            self._active_file = None

    # -- read --------------------------------------------------------------

    def records(self) -> list[EventRecord]:
        return list(self._records)

    def get(self, seq: int) -> EventRecord:
        if not 1 <= seq <= self.max_seq:
            raise InvalidCursor(f"seq {seq} outside 1..{self.max_seq}")
        return self._records[seq - 1]

    def replay(self, cursor: StreamCursor) -> Iterator[EventRecord]:
        """Records strictly after cursor.position, in order, filtered."""
        if cursor.position < 0 or cursor.position > self.max_seq:
            raise InvalidCursor(
                f"cursor {cursor.position} outside 0..{self.max_seq}"
            )
        for record in self._records[cursor.position:]:
            if cursor.admits(record):
                yield record


def _parse_trailer(line: str) -> dict | None:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError:
        return None
    if isinstance(doc, dict) and "sha256" in doc and "count" in doc and "seq" not in doc:
        return doc
    return None


def _body_digest(lines: list[str]) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


class RawStore:
    """Original sensor bytes, length-prefixed, addressed by file offset.

    Alert events reference their raw evidence by offset so disputes can be
    settled from what the sensor actually sent, not from the parse of it.
    """

    def __init__(self, data_dir: str | Path, sync: bool = True):
        raw_dir = Path(data_dir) / "raw"
        raw_dir.mkdir(parents=True, exist_ok=True)
        self._path = raw_dir / "raw.bin"
        self._sync = sync
        self._lock = threading.Lock()
        self._end = self._recover()
        self._file = open(self._path, "ab")
        self._read_fd = os.open(self._path, os.O_RDONLY)

    def _recover(self) -> int:
        if not self._path.exists():
            return 0
        size = self._path.stat().st_size
        good = 0
        with open(self._path, "rb") as fh:
            while True:
                header = fh.read(_RAW_LEN.size)
                if len(header) < _RAW_LEN.size:
                    break
                (length,) = _RAW_LEN.unpack(header)
                payload = fh.read(length)
                if len(payload) < length:
                    break
                good = fh.tell()
        if good != size:
            log.warning("truncating torn raw store tail (%d -> %d bytes)", size, good)
            with open(self._path, "r+b") as fh:
                fh.truncate(good)
                fh.flush()
                os.fsync(fh.fileno())
        return good

    def append(self, data: bytes) -> int:
        with self._lock:
            offset = self._end
            self._file.write(_RAW_LEN.pack(len(data)))
            self._file.write(data)
            self._file.flush()
            if self._sync:
                os.fsync(self._file.fileno())
            self._end += _RAW_LEN.size + len(data)
            return offset

    def read(self, offset: int) -> bytes:
        if offset < 0 or offset >= self._end:
            raise ValueError(f"raw offset {offset} out of range")
        header = os.pread(self._read_fd, _RAW_LEN.size, offset)
        if len(header) < _RAW_LEN.size:
            raise ValueError(f"raw offset {offset} is torn")
        (length,) = _RAW_LEN.unpack(header)
        payload = os.pread(self._read_fd, length, offset + _RAW_LEN.size)
        if len(payload) < length:
            raise ValueError(f"raw record at {offset} is truncated")
        return payload

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
        if self._read_fd is not None:
            os.close(self._read_fd)
            self._read_fd = None
