"""Analysis reports: distance tables, fingerprint verdicts, timemap exports."""

from __future__ import annotations

import io
import itertools
import statistics
from dataclasses import dataclass

from .errors import EmptyDatasetError, QuirkprintError, ZeroOverlapError
from .signatures import (
    BrowserSignature,
    SignatureDataset,
    confidence,
    family_size,
    median_dataset_distance,
    median_family_distance,
    mhd,
    nearest_neighbors,
)


@dataclass
class DistanceRow:
    browser: str
    neighbors: list[str]
    mhd: int
    mdf: float | None
    family_size: int
    mdd: float | None


@dataclass
class DistanceReport:
    rows: list[DistanceRow]


def _format_median(value: float | None) -> str:
    if value is None:
        return "-"
    if float(value).is_integer():
        return str(int(value))
    return f"{value:g}"


def build_distance_report(ds: SignatureDataset) -> DistanceReport:
    """Per-browser nearest neighbor, MHD, MDF, family size and MDD.

    Rows are ordered by MDF ascending with undefined-MDF rows first,
    mirroring the published table layout.
    """
    rows = []
    for sig in ds.signatures:
        neighbors = nearest_neighbors(sig, ds)
        mdf = (
            median_family_distance(sig, ds) if sig.family is not None else None
        )
        rows.append(
            DistanceRow(
                browser=sig.browser_label,
                neighbors=[label for label, _ in neighbors],
                mhd=neighbors[0][1],
                mdf=mdf,
                family_size=family_size(sig, ds),
                mdd=median_dataset_distance(sig, ds),
            )
        )
    rows.sort(
        key=lambda r: (r.mdf is not None, r.mdf if r.mdf is not None else 0.0, r.browser)
    )
    return DistanceReport(rows=rows)


def render_distance_table(report: DistanceReport) -> str:
    """Plain-text six-column table."""
    header = ["Browser", "Nearest Neighbor (MHD)", "MHD", "MDF", "Fsize", "MDD"]
    body = [
        [
            row.browser,
            ", ".join(row.neighbors),
            str(row.mhd),
            _format_median(row.mdf),
            str(row.family_size),
            _format_median(row.mdd),
        ]
        for row in report.rows
    ]
    widths = [
        max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
        for i in range(len(header))
    ]
    out = io.StringIO()

    def emit(cells: list[str]) -> None:
        out.write(
            " | ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()
            + "\n"
        )

    emit(header)
    out.write("-+-".join("-" * w for w in widths) + "\n")
    for cells in body:
        emit(cells)
    return out.getvalue()


@dataclass
class FingerprintReport:
    query_label: str
    confidence: float
    neighbors: list[str]
    mhd: int
    mdf: float | None
    mdf_family: str | None
    mdd: float | None
    verdict: str  # exact-match | family-match | outlier
    matched_family: str | None


def outlier_threshold(ds: SignatureDataset, factor: float = 2.0) -> float | None:
    """``factor`` times the dataset median of member MDDs."""
    mdds = []
    for sig in ds.signatures:
        mdd = median_dataset_distance(sig, ds)
        if mdd is not None:
            mdds.append(mdd)
    if not mdds:
        return None
    return factor * statistics.median(mdds)


def fingerprint(
    query: BrowserSignature,
    ds: SignatureDataset,
    outlier_factor: float = 2.0,
) -> FingerprintReport:
    """Nearest-neighbor fingerprint of a query signature with a verdict.

    The verdict is exact-match at distance 0, outlier when the query's
    median distance to the dataset exceeds the outlier threshold, and
    family-match otherwise.  MDF is computed against the query's own
    family when labeled, else against the nearest neighbor's family.
    """
    if not ds.signatures:
        raise EmptyDatasetError("cannot fingerprint against an empty dataset")
    neighbors = nearest_neighbors(query, ds)
    distance = neighbors[0][1]
    labels = [label for label, _ in neighbors]

    by_label = {sig.browser_label: sig for sig in ds.signatures}
    neighbor_families = {
        by_label[label].family
        for label in labels
        if label in by_label and by_label[label].family
    }
    matched_family = sorted(neighbor_families)[0] if neighbor_families else None

    mdf_family = query.family or matched_family
    mdf = None
    if mdf_family is not None:
        probe = BrowserSignature(
            outcomes=query.outcomes,
            browser_label=query.browser_label,
            family=mdf_family,
        )
        mdf = median_family_distance(probe, ds)

    mdd = median_dataset_distance(query, ds)

    if distance == 0:
        verdict = "exact-match"
    else:
        threshold = outlier_threshold(ds, outlier_factor)
        if threshold is not None and mdd is not None and mdd > threshold:
            verdict = "outlier"
        else:
            verdict = "family-match"
    return FingerprintReport(
        query_label=query.browser_label,
        confidence=confidence(query),
        neighbors=labels,
        mhd=distance,
        mdf=mdf,
        mdf_family=mdf_family,
        mdd=mdd,
        verdict=verdict,
        matched_family=matched_family,
    )


def render_fingerprint_report(report: FingerprintReport) -> str:
    lines = [
        f"query: {report.query_label}",
        f"confidence: {report.confidence:.4f}",
        f"nearest neighbor(s) at MHD {report.mhd}: {', '.join(report.neighbors)}",
    ]
    if report.mdf_family is not None:
        lines.append(f"MDF ({report.mdf_family}): {_format_median(report.mdf)}")
    lines.append(f"MDD: {_format_median(report.mdd)}")
    if report.verdict == "family-match" and report.matched_family:
        lines.append(f"verdict: family-match ({report.matched_family})")
    else:
        lines.append(f"verdict: {report.verdict}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TimemapPoint:
    browser_a: str
    browser_b: str
    days_apart: int
    distance: int
    same_family: bool


def timemap_points(
    ds: SignatureDataset, family: str | None = None
) -> list[TimemapPoint]:
    """One point per unordered signature pair: release-date gap vs MHD.

    With ``family`` set, only pairs inside that family are emitted.
    Requires release dates on every participating signature.
    """
    signatures = ds.signatures
    if family is not None:
        signatures = [s for s in signatures if s.family == family]
    for sig in signatures:
        if sig.release_date is None:
            raise QuirkprintError(
                f"signature {sig.browser_label!r} has no release_date; "
                f"timemap needs one per row"
            )
    points = []
    for a, b in itertools.combinations(signatures, 2):
        try:
            distance, _ = mhd(a, b)
        except ZeroOverlapError:
            raise QuirkprintError(
                f"signatures {a.browser_label!r} and {b.browser_label!r} share "
                f"no non-NA positions; cannot place them on the timemap"
            ) from None
        points.append(
            TimemapPoint(
                browser_a=a.browser_label,
                browser_b=b.browser_label,
                days_apart=abs((a.release_date - b.release_date).days),  # type: ignore[operator]
                distance=distance,
                same_family=(
                    a.family is not None and a.family == b.family
                ),
            )
        )
    points.sort(key=lambda p: (p.browser_a, p.browser_b))
    return points


def render_timemap_csv(points: list[TimemapPoint]) -> str:
    lines = ["browser_a,browser_b,days_apart,distance,same_family"]
    for p in points:
        lines.append(
            f"{_csv_cell(p.browser_a)},{_csv_cell(p.browser_b)},"
            f"{p.days_apart},{p.distance},{str(p.same_family).lower()}"
        )
    return "\n".join(lines) + "\n"


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text
