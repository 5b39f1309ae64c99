"""CSV and JSON readers/writers for measurements, signatures, distances and reports.

Floats in CSV files are written with 17 significant digits so that a
read/write round trip is exact.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import timedelta
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import CarrierSigError, MalformedInputError
from .matching import DistanceRecord
from .signature import Signature
from .stats import Histogram
from .timeseries import compute_eirp, format_timestamp, parse_timestamp

EIRP_COLUMNS = ["carrier_id", "timestamp", "eirp_dbw"]
BUDGET_COLUMNS = ["carrier_id", "timestamp", "p_sa_dbm", "l_fs_db", "g_ant_db", "g_path_db"]
DISTANCE_COLUMNS = ["carrier_a", "carrier_b", "distance", "same_antenna"]
HISTOGRAM_COLUMNS = ["bin_lo", "bin_hi", "count_same", "count_different"]


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def human(x: float) -> float:
    """Round to 6 significant digits for report fields."""
    return float(f"{float(x):.6g}")


def _float(text: str, where: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"{where}: not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise MalformedInputError(f"{where}: non-finite value {text!r}")
    return value


def _open_rows(path: Path):
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from exc
    return handle


def read_measurements(path: Path, snr_min_db: Optional[float] = 3.0) -> dict:
    """Load a measurements CSV into ``{carrier_id: (epoch_seconds, eirp_dbw)}``.

    Either header form is accepted. When an ``snr_db`` column is present and
    ``snr_min_db`` is not None, rows below the threshold are dropped.
    """
    raw: dict = {}
    with _open_rows(path) as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        if header[:3] == EIRP_COLUMNS:
            budget = False
        elif header[:6] == BUDGET_COLUMNS:
            budget = True
        else:
            raise MalformedInputError(f"{path}: unrecognized measurement header {header}")
        has_snr = "snr_db" in header
        for lineno, row in enumerate(reader, 2):
            where = f"{path}:{lineno}"
            if None in row or any(v is None for v in row.values()):
                raise MalformedInputError(f"{where}: wrong number of fields")
            if has_snr and snr_min_db is not None and row["snr_db"].strip():
                if _float(row["snr_db"], where) < snr_min_db:
                    continue
            if budget:
                eirp = compute_eirp(*(_float(row[c], where) for c in BUDGET_COLUMNS[2:]))
            else:
                eirp = _float(row["eirp_dbw"], where)
            ts = parse_timestamp(row["timestamp"])
            cid = row["carrier_id"].strip()
            if not cid:
                raise MalformedInputError(f"{where}: empty carrier_id")
            raw.setdefault(cid, ([], []))
            raw[cid][0].append(ts.timestamp())
            raw[cid][1].append(eirp)
    if not raw:
        raise MalformedInputError(f"{path}: no measurements")
    return {cid: (np.array(t), np.array(v)) for cid, (t, v) in sorted(raw.items())}


def write_measurements(path: Path, fleet) -> None:
    """Write a simulated fleet in the ``carrier_id,timestamp,eirp_dbw`` form."""
    stamps = [format_timestamp(fleet.spec.start + timedelta(seconds=float(dt)))
              for dt in fleet.offsets]
    with open(path, "w", newline="") as handle:
        handle.write(",".join(EIRP_COLUMNS) + "\n")
        for cid in fleet.carrier_ids:
            values = fleet.eirp[cid]
            handle.writelines(f"{cid},{ts},{fmt(v)}\n" for ts, v in zip(stamps, values))


def read_carriers(path: Path) -> tuple:
    """Return ``(antenna_of, satellite_of)`` from ``carrier_id,antenna_id[,satellite_id]``."""
    antenna_of, satellite_of = {}, {}
    with _open_rows(path) as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        if header[:2] != ["carrier_id", "antenna_id"]:
            raise MalformedInputError(f"{path}: expected header carrier_id,antenna_id, got {header}")
        for lineno, row in enumerate(reader, 2):
            cid = (row["carrier_id"] or "").strip()
            if not cid:
                raise MalformedInputError(f"{path}:{lineno}: empty carrier_id")
            if cid in antenna_of:
                raise MalformedInputError(f"{path}:{lineno}: duplicate carrier {cid}")
            antenna_of[cid] = (row["antenna_id"] or "").strip() or None
            satellite_of[cid] = (row.get("satellite_id") or "").strip() or None
    return antenna_of, satellite_of


def write_carriers(path: Path, antenna_of: dict, satellite_of: Optional[dict] = None) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        if satellite_of:
            writer.writerow(["carrier_id", "antenna_id", "satellite_id"])
            for cid in sorted(antenna_of):
                writer.writerow([cid, antenna_of[cid] or "", satellite_of.get(cid) or ""])
        else:
            writer.writerow(["carrier_id", "antenna_id"])
            for cid in sorted(antenna_of):
                writer.writerow([cid, antenna_of[cid] or ""])


def write_signatures(path: Path, signatures: Iterable[Signature]) -> None:
    sigs = sorted(signatures, key=lambda s: s.carrier_id)
    if not sigs:
        raise CarrierSigError("no signatures to write")
    n = sigs[0].period_samples
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["carrier_id", "period_hours", "samples_per_period"]
                        + [f"v2_{i}" for i in range(n)])
        for s in sigs:
            writer.writerow([s.carrier_id, fmt(s.period_hours), s.period_samples]
                            + [fmt(v) for v in s.vector])


def read_signatures(path: Path) -> list:
    out = []
    with _open_rows(path) as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[:3] != ["carrier_id", "period_hours", "samples_per_period"]:
            raise MalformedInputError(f"{path}: not a signature file")
        n = len(header) - 3
        for lineno, row in enumerate(reader, 2):
            where = f"{path}:{lineno}"
            if len(row) != len(header):
                raise MalformedInputError(f"{where}: expected {len(header)} fields, got {len(row)}")
            if int(_float(row[2], where)) != n:
                raise MalformedInputError(f"{where}: samples_per_period does not match header")
            out.append(Signature(
                carrier_id=row[0],
                vector=[_float(v, where) for v in row[3:]],
                period=timedelta(hours=_float(row[1], where)),
            ))
    if not out:
        raise MalformedInputError(f"{path}: no signatures")
    return out


def _flag(value: Optional[bool]) -> str:
    return "" if value is None else ("true" if value else "false")


def _parse_flag(text: str, where: str) -> Optional[bool]:
    t = text.strip().lower()
    if t in ("", "na", "none"):
        return None
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise MalformedInputError(f"{where}: bad same_antenna flag {text!r}")


def write_distances(path: Path, records: Iterable[DistanceRecord]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DISTANCE_COLUMNS)
        for r in records:
            writer.writerow([r.carrier_a, r.carrier_b, fmt(r.distance), _flag(r.same_antenna)])


def read_distances(path: Path) -> list:
    out = []
    with _open_rows(path) as handle:
        reader = csv.DictReader(handle)
        if (reader.fieldnames or [])[:4] != DISTANCE_COLUMNS:
            raise MalformedInputError(f"{path}: expected header {','.join(DISTANCE_COLUMNS)}")
        for lineno, row in enumerate(reader, 2):
            where = f"{path}:{lineno}"
            if any(row.get(c) is None for c in DISTANCE_COLUMNS):
                raise MalformedInputError(f"{where}: wrong number of fields")
            try:
                out.append(DistanceRecord(
                    row["carrier_a"], row["carrier_b"], _float(row["distance"], where),
                    _parse_flag(row["same_antenna"], where)))
            except ValueError as exc:
                raise MalformedInputError(f"{where}: {exc}") from exc
    return out


def write_histogram(path: Path, same: Histogram, diff: Histogram) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HISTOGRAM_COLUMNS)
        for lo, hi, cs, cd in zip(same.edges[:-1], same.edges[1:], same.counts, diff.counts):
            writer.writerow([fmt(lo), fmt(hi), int(cs), int(cd)])


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
