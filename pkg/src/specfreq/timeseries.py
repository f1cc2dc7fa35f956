"""Panel data model, CSV ingestion, differencing, and sample autocovariances.

Conventions
-----------
* A panel is an ``n x p`` real matrix: rows are time points, columns are
  series.  Series indices in the public API are 1-based, matching the
  labels written to reports.
* Frequencies are radians in ``[-pi, pi)``.  Values outside that range are
  rejected rather than wrapped.
* Sample autocovariances use the ``1/n`` divisor at every lag.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InsufficientLength,
    InvalidParameter,
    NonFiniteValue,
    NonNumericValue,
    RaggedInput,
)

MIN_ROWS = 3


@dataclass(frozen=True)
class TimePanel:
    """An observed ``n x p`` panel with one label per series."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidParameter(f"panel must be 2-D, got shape {values.shape}")
        n, p = values.shape
        if n < MIN_ROWS:
            raise InsufficientLength(f"panel needs at least {MIN_ROWS} rows, got {n}")
        if p < 1:
            raise InvalidParameter("panel needs at least one series")
        if not np.isfinite(values).all():
            raise NonFiniteValue("panel contains NaN or infinite entries")
        if len(self.labels) != p:
            raise DimensionMismatch(f"expected {p} labels, got {len(self.labels)}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def centered(self) -> np.ndarray:
        """Values minus the per-series mean."""
        return self.values - self.values.mean(axis=0)


def default_labels(p: int) -> tuple[str, ...]:
    return tuple(f"s{j}" for j in range(1, p + 1))


@dataclass(frozen=True)
class IndexSet:
    """An ordered set of distinct 1-based ``(i, j)`` series pairs.

    The position of each pair inside ``pairs`` fixes the layout of every
    derived quantity (lag-product panels, bootstrap blocks), so equality of
    two IndexSets is order-sensitive.
    """

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        if len(pairs) < 1:
            raise InvalidParameter("IndexSet needs at least one pair")
        if len(set(pairs)) != len(pairs):
            raise InvalidParameter("IndexSet pairs must be distinct")
        for i, j in pairs:
            if i < 1 or j < 1:
                raise InvalidParameter(f"series indices are 1-based, got ({i}, {j})")
        object.__setattr__(self, "pairs", pairs)

    @property
    def r(self) -> int:
        return len(self.pairs)

    def validate_for(self, p: int) -> None:
        for i, j in self.pairs:
            if i > p or j > p:
                raise InvalidParameter(f"pair ({i}, {j}) out of range for p={p}")

    def row_indices(self) -> np.ndarray:
        """0-based first-coordinate indices, in pair order."""
        return np.array([i - 1 for i, _ in self.pairs], dtype=np.intp)

    def col_indices(self) -> np.ndarray:
        """0-based second-coordinate indices, in pair order."""
        return np.array([j - 1 for _, j in self.pairs], dtype=np.intp)

    @staticmethod
    def all_offdiagonal(p: int) -> "IndexSet":
        """All pairs (i, j) with i > j; r = p(p-1)/2."""
        if p < 2:
            raise InvalidParameter("all_offdiagonal needs p >= 2")
        return IndexSet(tuple((i, j) for i in range(2, p + 1) for j in range(1, i)))

    @staticmethod
    def diagonal(p: int) -> "IndexSet":
        """The p auto-spectrum pairs (i, i)."""
        return IndexSet(tuple((i, i) for i in range(1, p + 1)))

    @staticmethod
    def block(rows: "list[int] | tuple[int, ...]", cols: "list[int] | tuple[int, ...]") -> "IndexSet":
        """All (i, j) with i in rows and j in cols (1-based, row-major order)."""
        return IndexSet(tuple((int(i), int(j)) for i in rows for j in cols))


PI = math.pi

# Seasonal frequency presets: quarterly K=4 and monthly K=12.
QUARTERLY = (-PI, -PI / 2, 0.0, PI / 2)
MONTHLY = tuple(-PI + k * PI / 6 for k in range(12))

DEFAULT_GRID_CAP = 512


@dataclass(frozen=True)
class FrequencySet:
    """A finite set of frequencies or an interval evaluated on a grid.

    Discrete sets hold strictly increasing frequencies in ``[-pi, pi)``.
    Intervals ``[lo, hi]`` with ``-pi <= lo < hi <= pi`` are evaluated on a
    uniform grid including both endpoints; when ``hi == pi`` the grid is
    half-open (``pi`` itself excluded).  ``grid_points=None`` defers the
    grid size to ``min(n, 512)`` at evaluation time.
    """

    frequencies: tuple[float, ...] | None = None
    interval: tuple[float, float] | None = None
    grid_points: int | None = None

    def __post_init__(self):
        if (self.frequencies is None) == (self.interval is None):
            raise InvalidParameter("specify exactly one of frequencies or interval")
        if self.frequencies is not None:
            freqs = tuple(float(w) for w in self.frequencies)
            if len(freqs) < 1:
                raise InvalidParameter("frequency list must be non-empty")
            for w in freqs:
                if not (-PI <= w < PI):
                    raise InvalidParameter(f"frequency {w} outside [-pi, pi)")
            if any(b <= a for a, b in zip(freqs, freqs[1:])):
                raise InvalidParameter("frequencies must be strictly increasing")
            object.__setattr__(self, "frequencies", freqs)
        else:
            lo, hi = (float(self.interval[0]), float(self.interval[1]))
            if not (-PI <= lo < hi <= PI):
                raise InvalidParameter(f"interval [{lo}, {hi}] must satisfy -pi <= lo < hi <= pi")
            if self.grid_points is not None and self.grid_points < 2:
                raise InvalidParameter("interval grid needs at least 2 points")
            object.__setattr__(self, "interval", (lo, hi))

    @staticmethod
    def discrete(frequencies) -> "FrequencySet":
        return FrequencySet(frequencies=tuple(frequencies))

    @staticmethod
    def from_interval(lo: float, hi: float, grid_points: int | None = None) -> "FrequencySet":
        return FrequencySet(interval=(lo, hi), grid_points=grid_points)

    @staticmethod
    def quarterly() -> "FrequencySet":
        return FrequencySet.discrete(QUARTERLY)

    @staticmethod
    def monthly() -> "FrequencySet":
        return FrequencySet.discrete(MONTHLY)

    @property
    def is_interval(self) -> bool:
        return self.interval is not None

    def m_j(self, n: int) -> int:
        """Effective frequency count: K for a discrete set, n for an interval."""
        if self.frequencies is not None:
            return len(self.frequencies)
        return int(n)

    def evaluate(self, n: int) -> np.ndarray:
        """The frequency grid this set is computed on for a length-n sample."""
        if self.frequencies is not None:
            return np.array(self.frequencies, dtype=np.float64)
        lo, hi = self.interval
        g = self.grid_points if self.grid_points is not None else max(2, min(int(n), DEFAULT_GRID_CAP))
        if hi == PI:
            return np.linspace(lo, hi, g, endpoint=False)
        return np.linspace(lo, hi, g)


@dataclass(frozen=True)
class AutocovSet:
    """Sample autocovariance matrices for lags ``-max_lag..max_lag``.

    ``gamma[max_lag + k]`` holds the ``p x p`` matrix at lag ``k``; negative
    lags are exact transposes of the positive ones.
    """

    gamma: np.ndarray
    max_lag: int
    n: int = field(default=0)

    def at(self, k: int) -> np.ndarray:
        if abs(k) > self.max_lag:
            raise InvalidParameter(f"lag {k} outside computed range +-{self.max_lag}")
        return self.gamma[self.max_lag + k]

    def pair_sequence(self, i: int, j: int) -> np.ndarray:
        """gamma_{i,j}(k) for k = -max_lag..max_lag (1-based i, j)."""
        return self.gamma[:, i - 1, j - 1]


def load_csv(path, has_header: bool | None = None) -> TimePanel:
    """Read a comma-separated panel: one column per series, rows in time order.

    ``has_header=None`` sniffs: a first row with any non-numeric cell is
    treated as the header.  NaN or infinite cells are rejected.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read(), has_header=has_header)


def parse_csv(text: str, has_header: bool | None = None) -> TimePanel:
    """Parse CSV text; see :func:`load_csv`."""
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise EmptyInput("no data rows found")

    def try_parse(row):
        out = []
        for cell in row:
            try:
                out.append(float(cell))
            except ValueError:
                return None
        return out

    labels: tuple[str, ...] | None = None
    if has_header is None:
        has_header = try_parse(rows[0]) is None
    if has_header:
        labels = tuple(c.strip() for c in rows[0])
        rows = rows[1:]
        if not rows:
            raise EmptyInput("header present but no data rows")

    width = len(rows[0])
    body = np.empty((len(rows), width), dtype=np.float64)
    for t, row in enumerate(rows):
        if len(row) != width:
            raise RaggedInput(f"row {t + 1} has {len(row)} cells, expected {width}")
        parsed = try_parse(row)
        if parsed is None:
            bad = next(c for c in row if try_parse([c]) is None)
            raise NonNumericValue(f"row {t + 1}: cannot parse {bad!r} as a number")
        body[t] = parsed
    if not np.isfinite(body).all():
        raise NonFiniteValue("CSV contains NaN or infinite values")
    if body.shape[0] < MIN_ROWS:
        raise InsufficientLength(f"need at least {MIN_ROWS} rows, got {body.shape[0]}")
    if labels is None:
        labels = default_labels(width)
    elif len(labels) != width:
        raise RaggedInput(f"header has {len(labels)} cells, body rows have {width}")
    return TimePanel(values=body, labels=labels)


def difference(panel: TimePanel, kind: str = "regular", period: int = 1) -> TimePanel:
    """First differences (``regular``) or lag-``period`` seasonal differences.

    Returns a panel of ``n - lag`` rows with ``y_t = x_{t+lag} - x_t``.
    """
    if kind == "regular":
        lag = 1
    elif kind == "seasonal":
        if period < 2:
            raise InvalidParameter("seasonal differencing needs period >= 2")
        lag = int(period)
    else:
        raise InvalidParameter(f"unknown differencing kind {kind!r}")
    if panel.n - lag < MIN_ROWS:
        raise InsufficientLength(
            f"cannot difference at lag {lag}: {panel.n} rows leave {panel.n - lag} < {MIN_ROWS}"
        )
    y = panel.values[lag:] - panel.values[:-lag]
    return TimePanel(values=y, labels=panel.labels)


def autocov(panel: TimePanel, max_lag: int) -> AutocovSet:
    """Sample autocovariances with divisor ``n`` at every lag.

    For ``k >= 0``: ``gamma(k) = (1/n) * sum_{t=1}^{n-k} (x_{t+k} - xbar)(x_t - xbar)^T``,
    and ``gamma(-k)`` is its exact transpose.
    """
    max_lag = int(max_lag)
    n = panel.n
    if max_lag < 0:
        raise InvalidParameter("max_lag must be non-negative")
    if max_lag >= n:
        raise InsufficientLength(f"max_lag {max_lag} must be < n = {n}")
    x = panel.centered()
    gamma = np.empty((2 * max_lag + 1, panel.p, panel.p), dtype=np.float64)
    for k in range(max_lag + 1):
        g = x[k:].T @ x[: n - k] / n
        gamma[max_lag + k] = g
        if k:
            gamma[max_lag - k] = g.T
    return AutocovSet(gamma=gamma, max_lag=max_lag, n=n)
