"""Result records and their CSV form."""

import csv
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from rdstc.errors import RdstcError

__all__ = [
    "BerRecord",
    "BoundRecord",
    "ConvergenceRecord",
    "OutputError",
    "read_csv",
    "write_csv",
]


class OutputError(RdstcError, OSError):
    """Writing or reading a results file failed."""


@dataclass(frozen=True)
class BerRecord:
    snr_db: float
    scheme: str
    bits_sent: int
    bit_errors: int
    ber: float
    packets: int
    seed: int

    @staticmethod
    def sort_key(r):
        return (r.snr_db, r.scheme)


@dataclass(frozen=True)
class ConvergenceRecord:
    symbols_received: int
    scheme: str
    running_ber: float

    @staticmethod
    def sort_key(r):
        return (r.scheme, r.symbols_received)


@dataclass(frozen=True)
class BoundRecord:
    snr_db: float
    case: str
    bound_value: float
    channel_draws: int

    @staticmethod
    def sort_key(r):
        return (r.snr_db, r.case)


_FLOAT_FIELDS = {"ber", "running_ber", "bound_value"}


def _fmt(name, value):
    if name in _FLOAT_FIELDS:
        return f"{value:.6g}"
    if name == "snr_db":
        return f"{value:g}"
    return str(value)


def write_csv(records, path, record_type=None):
    """Write ``records`` with a header; rows are sorted by the record's natural key."""
    records = list(records)
    record_type = record_type or (type(records[0]) if records else BerRecord)
    names = [f.name for f in fields(record_type)]
    rows = sorted(records, key=record_type.sort_key)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for r in rows:
                w.writerow([_fmt(n, v) for n, v in zip(names, astuple(r))])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def read_csv(path, record_type=BerRecord):
    """Parse a file written by :func:`write_csv` back into records."""
    types = {f.name: f.type for f in fields(record_type)}
    try:
        with open(Path(path), newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            return [record_type(**{k: types[k](v) for k, v in row.items()}) for row in reader]
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
