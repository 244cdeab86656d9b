"""Persistence of signature datasets as delimited text.

One file format covers raw signatures, labeled training data and sim-agent
profiles: a comma-separated table whose first three columns are metadata
(``browser``, ``family``, ``release_date``) followed by one column per
test-case attribute.  Outcome cells hold exactly ``P``, ``S`` or ``N``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .errors import StoreError
from .signatures import BrowserSignature, Outcome, SignatureDataset, confidence

METADATA_COLUMNS = ("browser", "family", "release_date")

_TOKEN_BY_OUTCOME = {Outcome.PASS: "P", Outcome.SENT: "S", Outcome.NA: "N"}
_OUTCOME_BY_TOKEN = {"P": Outcome.PASS, "S": Outcome.SENT, "N": Outcome.NA}

DEFAULT_MIN_CONFIDENCE = 0.90


@dataclass
class ImportResult:
    dataset: SignatureDataset
    # (1-based data-row number, confidence) for each excluded row
    excluded: list[tuple[int, float]]


def export_signatures_text(ds: SignatureDataset) -> str:
    """Render the dataset in the interchange format, deterministically."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(METADATA_COLUMNS) + list(ds.attributes))
    for sig in ds.signatures:
        row = [
            sig.browser_label,
            sig.family or "",
            sig.release_date.isoformat() if sig.release_date else "",
        ]
        row.extend(_TOKEN_BY_OUTCOME[sig.outcomes[a]] for a in ds.attributes)
        writer.writerow(row)
    return buf.getvalue()


def export_signatures(ds: SignatureDataset, path: str | Path) -> None:
    Path(path).write_text(export_signatures_text(ds), encoding="utf-8")


def _parse_row(
    row: list[str], attributes: list[str], row_no: int
) -> BrowserSignature:
    expected = len(METADATA_COLUMNS) + len(attributes)
    if len(row) != expected:
        raise StoreError(
            f"expected {expected} columns, got {len(row)}", row=row_no
        )
    browser_label, family_text, date_text = row[:3]
    release_date: date | None = None
    if date_text:
        try:
            release_date = date.fromisoformat(date_text)
        except ValueError:
            raise StoreError(
                f"release_date {date_text!r} is not an ISO-8601 date", row=row_no
            ) from None
    outcomes: dict[str, Outcome] = {}
    for attr, cell in zip(attributes, row[3:]):
        outcome = _OUTCOME_BY_TOKEN.get(cell)
        if outcome is None:
            raise StoreError(
                f"unknown outcome token {cell!r} in column {attr!r} "
                f"(expected P, S or N)",
                row=row_no,
            )
        outcomes[attr] = outcome
    return BrowserSignature(
        outcomes=outcomes,
        browser_label=browser_label,
        family=family_text or None,
        release_date=release_date,
    )


def import_signatures_text(
    text: str, min_confidence: float = DEFAULT_MIN_CONFIDENCE
) -> ImportResult:
    """Parse the interchange format, excluding rows below the confidence gate."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise StoreError("empty file: missing header") from None
    if tuple(header[: len(METADATA_COLUMNS)]) != METADATA_COLUMNS:
        raise StoreError(
            f"header must start with {','.join(METADATA_COLUMNS)}, "
            f"got {','.join(header[:3])}"
        )
    attributes = header[len(METADATA_COLUMNS):]

    signatures: list[BrowserSignature] = []
    excluded: list[tuple[int, float]] = []
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        sig = _parse_row(row, attributes, row_no)
        conf = confidence(sig) if sig.outcomes else 0.0
        if conf < min_confidence:
            excluded.append((row_no, conf))
            continue
        signatures.append(sig)
    return ImportResult(
        dataset=SignatureDataset(signatures=signatures, attributes=attributes),
        excluded=excluded,
    )


def import_signatures(
    path: str | Path, min_confidence: float = DEFAULT_MIN_CONFIDENCE
) -> ImportResult:
    return import_signatures_text(
        Path(path).read_text(encoding="utf-8"), min_confidence
    )


def exclusion_report(result: ImportResult) -> str:
    """Line-delimited ``row_index,confidence`` for every excluded row."""
    return "".join(f"{row},{conf:.6f}\n" for row, conf in result.excluded)
