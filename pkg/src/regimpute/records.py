"""Record data model, TSV ingestion/serialization, and missingness statistics.

The record file format is UTF-8 tab-separated text with a header row. The
six core columns are id, name, category, address, postcode, data_source;
lon, lat and provenance columns are written by downstream stages and read
back when present. Empty cells mean "absent".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .categories import normalize_category

POSTCODE_RE = re.compile(r"^[0-9]{6}$")
_YEAR_RE = re.compile(r"(?<![0-9])([0-9]{4})(?![0-9])")

ORIGINAL = "original"
IMPUTED = "imputed"

# Fields whose absence is tracked and that imputation stages may fill.
TRACKED_FIELDS = ("name", "category", "address", "postcode", "data_source", "coordinates")

_CORE_COLUMNS = ("id", "name", "category", "address", "postcode", "data_source")
_ALL_COLUMNS = _CORE_COLUMNS + ("lon", "lat", "provenance")


@dataclass
class EnterpriseRecord:
    """One registration row; optional fields are None when absent."""

    id: str
    name: str | None = None
    category: str | None = None
    address: str | None = None
    postcode: str | None = None
    data_source: str | None = None
    reg_year: int | None = None
    coordinates: tuple[float, float] | None = None  # (lon, lat) degrees
    provenance: dict[str, str] = field(default_factory=dict)

    def mark_imputed(self, field_name: str) -> None:
        self.provenance[field_name] = IMPUTED

    def provenance_of(self, field_name: str) -> str:
        return self.provenance.get(field_name, ORIGINAL)


@dataclass(frozen=True)
class RowDiagnostic:
    line_no: int
    message: str


@dataclass
class IngestResult:
    records: list[EnterpriseRecord]
    diagnostics: list[RowDiagnostic]

    @property
    def error_count(self) -> int:
        return len(self.diagnostics)


@dataclass(frozen=True)
class MissingnessReport:
    total: int
    missing: dict[str, float]  # field -> fraction absent, in [0, 1]


def parse_reg_year(data_source: str | None) -> int | None:
    """First standalone 4-digit number in [1900, 2100], if any."""
    if not data_source:
        return None
    for m in _YEAR_RE.finditer(data_source):
        year = int(m.group(1))
        if 1900 <= year <= 2100:
            return year
    return None


def _is_missing(record: EnterpriseRecord, field_name: str):
    value = getattr(record, "coordinates" if field_name == "coordinates" else field_name)
    return value is None or value == ""


def missingness(records: Sequence[EnterpriseRecord]) -> MissingnessReport:
    """Per-field fraction of absent values; all zeros for empty input."""
    total = len(records)
    if total == 0:
        return MissingnessReport(0, {f: 0.0 for f in TRACKED_FIELDS})
    counts = {f: 0 for f in TRACKED_FIELDS}
    for rec in records:
        for f in TRACKED_FIELDS:
            if _is_missing(rec, f):
                counts[f] += 1
    return MissingnessReport(total, {f: counts[f] / total for f in TRACKED_FIELDS})


class GroundTruth:
    """Pre-masking values keyed by (record id, field). Sidecar to a
    synthetic corpus; used to score imputation results."""

    def __init__(self, values: dict[tuple[str, str], str] | None = None):
        self.values: dict[tuple[str, str], str] = dict(values or {})

    def set(self, rec_id: str, field_name: str, value: str) -> None:
        self.values[(rec_id, field_name)] = value

    def get(self, rec_id: str, field_name: str) -> str | None:
        return self.values.get((rec_id, field_name))

    def ids_for(self, field_name: str) -> list[str]:
        return [rid for (rid, f) in self.values if f == field_name]

    def __len__(self) -> int:
        return len(self.values)

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("id\tfield\tvalue\n")
            for (rid, field_name), value in self.values.items():
                fh.write(f"{_clean(rid)}\t{_clean(field_name)}\t{_clean(value)}\n")

    @classmethod
    def read(cls, path: str | Path) -> "GroundTruth":
        truth = cls()
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header != ["id", "field", "value"]:
                raise ValueError(f"{path}: not a ground-truth sidecar")
            for line in fh:
                line = line.rstrip("\n").rstrip("\r")
                if not line:
                    continue
                rid, field_name, value = line.split("\t")
                truth.set(rid, field_name, value)
        return truth


def _parse_provenance(cell: str) -> dict[str, str]:
    prov: dict[str, str] = {}
    for part in cell.split(";"):
        if not part:
            continue
        name, _, flag = part.partition("=")
        prov[name] = flag
    return prov


def _format_provenance(prov: dict[str, str]) -> str:
    imputed = sorted(name for name, flag in prov.items() if flag == IMPUTED)
    return ";".join(f"{name}={IMPUTED}" for name in imputed)


def _parse_row(columns: dict[str, int], cells: list[str]) -> EnterpriseRecord:
    def cell(name: str) -> str | None:
        idx = columns.get(name)
        if idx is None or idx >= len(cells):
            return None
        return cells[idx] or None

    rec_id = cell("id")
    if not rec_id:
        raise ValueError("empty id")

    category = cell("category")
    if category is not None:
        symbol = normalize_category(category)
        if symbol is None:
            raise ValueError(f"unknown category {category!r}")
        category = symbol

    postcode = cell("postcode")
    if postcode is not None and not POSTCODE_RE.match(postcode):
        raise ValueError(f"invalid postcode {postcode!r}")

    coordinates = None
    lon_cell, lat_cell = cell("lon"), cell("lat")
    if lon_cell is not None or lat_cell is not None:
        if lon_cell is None or lat_cell is None:
            raise ValueError("lon/lat must both be present")
        try:
            coordinates = (float(lon_cell), float(lat_cell))
        except ValueError:
            raise ValueError(f"invalid coordinates {lon_cell!r}, {lat_cell!r}") from None

    data_source = cell("data_source")
    prov_cell = cell("provenance")
    return EnterpriseRecord(
        id=rec_id,
        name=cell("name"),
        category=category,
        address=cell("address"),
        postcode=postcode,
        data_source=data_source,
        reg_year=parse_reg_year(data_source),
        coordinates=coordinates,
        provenance=_parse_provenance(prov_cell) if prov_cell else {},
    )


def ingest(path: str | Path) -> IngestResult:
    """Read a record TSV. Malformed rows are skipped with a diagnostic;
    an unreadable file or a header missing core columns is fatal."""
    path = Path(path)
    records: list[EnterpriseRecord] = []
    diagnostics: list[RowDiagnostic] = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").rstrip("\r")
        names = header.split("\t")
        columns = {name: i for i, name in enumerate(names)}
        missing_cols = [c for c in _CORE_COLUMNS if c not in columns]
        if missing_cols:
            raise ValueError(f"{path}: header lacks columns {missing_cols}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != len(names):
                diagnostics.append(RowDiagnostic(line_no, f"expected {len(names)} cells, got {len(cells)}"))
                continue
            try:
                records.append(_parse_row(columns, cells))
            except ValueError as exc:
                diagnostics.append(RowDiagnostic(line_no, str(exc)))
    return IngestResult(records, diagnostics)


def _clean(value: str | None) -> str:
    if value is None:
        return ""
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"field value contains tab/newline: {value!r}")
    return value


def write_records(records: Iterable[EnterpriseRecord], path: str | Path) -> None:
    """Write records as TSV; ingest() of the result reproduces them."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(_ALL_COLUMNS) + "\n")
        for rec in records:
            lon = repr(rec.coordinates[0]) if rec.coordinates else ""
            lat = repr(rec.coordinates[1]) if rec.coordinates else ""
            cells = (
                _clean(rec.id),
                _clean(rec.name),
                _clean(rec.category),
                _clean(rec.address),
                _clean(rec.postcode),
                _clean(rec.data_source),
                lon,
                lat,
                _format_provenance(rec.provenance),
            )
            fh.write("\t".join(cells) + "\n")
