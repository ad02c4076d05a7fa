"""CSV ingest and date alignment for rate panels and CDS series.

Panel CSV layout::

    date,Barclays,JPM Chase,...,LIBOR
    2011-04-18,0.2760,0.2500,...,0.2760

Dates are ISO-8601.  An empty cell is carried forward from the previous
business day; an empty cell on the first row is an error.  Rates are kept in
percent and CDS spreads in basis points.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyEntity, MissingBenchmark, NoOverlap, ParseError
from .export import format_float

# Panel members and domiciles over 4/2011-7/2012
PANEL_BANKS = (
    ("Barclays", "UK"),
    ("JPM Chase", "US"),
    ("BTMU", "Japan"),
    ("BOFA", "US"),
    ("BNP Paribas", "France"),
    ("CA-CIB", "France"),
    ("Citibank", "US"),
    ("Credit Suisse", "Switzerland"),
    ("Deutsche Bank", "Germany"),
    ("HSBC", "UK"),
    ("Lloyds", "UK"),
    ("Norinchukin", "Japan"),
    ("Rabobank", "Holland"),
    ("RBC", "Canada"),
    ("RBS", "UK"),
    ("Societe Gen", "France"),
    ("Sumitomo", "Japan"),
    ("UBS AG", "Switzerland"),
)


@dataclass(frozen=True)
class PanelSeries:
    dates: tuple
    entities: tuple
    values: np.ndarray
    benchmark: str | None = None
    domiciles: dict = field(default_factory=dict)
    n_filled: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "entities", tuple(self.entities))
        if values.shape != (len(self.dates), len(self.entities)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.entities)} entities"
            )
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel values must be finite")
        if self.benchmark is not None and self.benchmark not in self.entities:
            raise MissingBenchmark(f"benchmark {self.benchmark!r} not among entities")

    @property
    def n_days(self):
        return len(self.dates)

    def column(self, label):
        return self.values[:, self.entities.index(label)]

    @property
    def benchmark_series(self):
        if self.benchmark is None:
            raise MissingBenchmark("panel has no benchmark column")
        return self.column(self.benchmark)

    @property
    def members(self):
        """Entity labels other than the benchmark, in column order."""
        return tuple(e for e in self.entities if e != self.benchmark)

    def select_dates(self, dates):
        keep = set(dates)
        rows = [i for i, d in enumerate(self.dates) if d in keep]
        return PanelSeries(
            dates=[self.dates[i] for i in rows],
            entities=self.entities,
            values=self.values[rows],
            benchmark=self.benchmark,
            domiciles=dict(self.domiciles),
            n_filled=self.n_filled,
        )

    def __eq__(self, other):
        if not isinstance(other, PanelSeries):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.entities == other.entities
            and self.benchmark == other.benchmark
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class CdsPanel:
    dates: tuple
    entity: str
    cds_spread_bp: np.ndarray
    short_rate_pct: np.ndarray
    n_filled: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        spread = np.asarray(self.cds_spread_bp, dtype=float)
        rate = np.asarray(self.short_rate_pct, dtype=float)
        object.__setattr__(self, "cds_spread_bp", spread)
        object.__setattr__(self, "short_rate_pct", rate)
        if not (spread.shape == rate.shape == (len(self.dates),)):
            raise ValueError("CDS spread, short rate and dates must have equal length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if np.any(spread < 0):
            raise ValueError("CDS spreads must be non-negative")
        if not (np.all(np.isfinite(spread)) and np.all(np.isfinite(rate))):
            raise ValueError("CDS values must be finite")

    def select_dates(self, dates):
        keep = set(dates)
        rows = [i for i, d in enumerate(self.dates) if d in keep]
        return CdsPanel(
            dates=[self.dates[i] for i in rows],
            entity=self.entity,
            cds_spread_bp=self.cds_spread_bp[rows],
            short_rate_pct=self.short_rate_pct[rows],
            n_filled=self.n_filled,
        )

    def __eq__(self, other):
        if not isinstance(other, CdsPanel):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.entity == other.entity
            and np.array_equal(self.cds_spread_bp, other.cds_spread_bp)
            and np.array_equal(self.short_rate_pct, other.short_rate_pct)
        )

    __hash__ = None


def _read_table(text):
    """Parse a dated numeric CSV, returning (header, dates, cells, fill_count).

    Missing cells are carried forward; ``cells`` is a list of float rows.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [(reader.line_num, row) for row in reader if any(c.strip() for c in row)]
    if not rows:
        raise ParseError("empty input", line=1)
    header_line, header = rows[0]
    header = [h.strip() for h in header]
    if not header or header[0].lower() != "date":
        raise ParseError("header must start with 'date'", line=header_line)
    labels = header[1:]
    if len(set(labels)) != len(labels):
        raise ParseError("duplicate column label in header", line=header_line)

    dates, cells, fills = [], [], 0
    previous = [None] * len(labels)
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, found {len(row)}", line=line)
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise ParseError(f"malformed date {row[0]!r}", line=line) from None
        if dates and date <= dates[-1]:
            raise ParseError(f"date {date} is not after {dates[-1]}", line=line)
        parsed = []
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "":
                parsed.append(None)
                continue
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric cell {cell!r} in column {labels[j]!r}", line=line) from None
            if not np.isfinite(value):
                raise ParseError(f"non-finite cell {cell!r} in column {labels[j]!r}", line=line)
            parsed.append(value)
        dates.append(date)
        cells.append(parsed)
    if not dates:
        raise ParseError("no data rows", line=header_line)

    for j, label in enumerate(labels):
        if all(r[j] is None for r in cells):
            raise EmptyEntity(f"column {label!r} has no values")
    for i, r in enumerate(cells):
        for j, value in enumerate(r):
            if value is None:
                if previous[j] is None:
                    raise ParseError(
                        f"first value of column {labels[j]!r} is missing; nothing to carry forward",
                        line=rows[i + 1][0],
                    )
                r[j] = previous[j]
                fills += 1
            previous[j] = r[j]
    return labels, dates, cells, fills


def parse_panel_csv(text, benchmark_label="LIBOR", domiciles=None):
    """Parse panel CSV text into a :class:`PanelSeries`.

    ``benchmark_label=None`` accepts a panel without a benchmark column (used
    for residual files).  The number of carried-forward cells is stored in
    ``n_filled``.
    """
    labels, dates, cells, fills = _read_table(text)
    if benchmark_label is not None and benchmark_label not in labels:
        raise MissingBenchmark(f"benchmark column {benchmark_label!r} not in header {labels}")
    return PanelSeries(
        dates=dates,
        entities=labels,
        values=np.array(cells, dtype=float).reshape(len(dates), len(labels)),
        benchmark=benchmark_label,
        domiciles=dict(domiciles or {}),
        n_filled=fills,
    )


def panel_to_csv(panel):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["date", *panel.entities])
    for date, row in zip(panel.dates, panel.values):
        writer.writerow([date.isoformat(), *(format_float(v) for v in row)])
    return buf.getvalue()


def parse_cds_csv(text, entity):
    """Parse ``date,cds_spread_bp,short_rate_pct`` CSV text for one entity."""
    labels, dates, cells, fills = _read_table(text)
    expected = ["cds_spread_bp", "short_rate_pct"]
    if labels != expected:
        raise ParseError(f"CDS header must be date,{','.join(expected)}; got {labels}", line=1)
    arr = np.array(cells, dtype=float)
    if np.any(arr[:, 0] < 0):
        bad = int(np.argmax(arr[:, 0] < 0))
        raise ParseError("negative CDS spread", line=bad + 2)
    return CdsPanel(dates=dates, entity=entity, cds_spread_bp=arr[:, 0], short_rate_pct=arr[:, 1], n_filled=fills)


def cds_to_csv(cds):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["date", "cds_spread_bp", "short_rate_pct"])
    for date, s, r in zip(cds.dates, cds.cds_spread_bp, cds.short_rate_pct):
        writer.writerow([date.isoformat(), format_float(s), format_float(r)])
    return buf.getvalue()


def align(panel, cds):
    """Restrict a panel and a CDS series to their common dates."""
    common = set(panel.dates).intersection(cds.dates)
    if not common:
        raise NoOverlap(f"panel and CDS series for {cds.entity!r} share no dates")
    if len(common) == len(panel.dates) == len(cds.dates):
        return panel, cds
    return panel.select_dates(common), cds.select_dates(common)


def business_days(start, n):
    """``n`` consecutive Monday-Friday dates starting on or after ``start``."""
    out = []
    day = start
    while len(out) < n:
        if day.weekday() < 5:
            out.append(day)
        day += dt.timedelta(days=1)
    return out
