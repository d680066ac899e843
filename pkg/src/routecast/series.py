"""Univariate series data model, long-CSV ingestion, splitting and transforms."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateSeries,
    DomainError,
    DuplicateTimestamp,
    HorizonTooLong,
    InvalidConfig,
    MissingColumn,
    NonFiniteValue,
    NonUniformSpacing,
    UnknownDataset,
)

DEFAULT_SCHEMA = ("series_id", "timestamp", "value")

_NAMED_FREQUENCIES = {"hourly": 3600, "daily": 86400}


@dataclass(frozen=True)
class Frequency:
    """Sampling frequency: ``hourly``, ``daily`` or ``other`` with an explicit step."""

    kind: str
    seconds: int

    @classmethod
    def parse(cls, text: str) -> "Frequency":
        text = text.strip().lower()
        if text in _NAMED_FREQUENCIES:
            return cls(text, _NAMED_FREQUENCIES[text])
        if text.startswith("other"):
            _, _, secs = text.partition(":")
            try:
                seconds = int(secs or text[len("other(") : -1])
            except ValueError:
                raise InvalidConfig(f"cannot parse frequency {text!r}") from None
            if seconds <= 0:
                raise InvalidConfig(f"frequency step must be positive, got {seconds}")
            return cls("other", seconds)
        raise InvalidConfig(f"unknown frequency {text!r}")

    def __str__(self) -> str:
        return self.kind if self.kind != "other" else f"other:{self.seconds}"


HOURLY = Frequency("hourly", 3600)
DAILY = Frequency("daily", 86400)


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    frequency: Frequency
    seasonal_period: int
    mase_m: int
    horizon: int

    def __post_init__(self):
        if self.seasonal_period < 1 or self.mase_m < 1 or self.horizon < 1:
            raise InvalidConfig(f"dataset {self.name!r}: S, m and horizon must be >= 1")

    @classmethod
    def from_dict(cls, name: str, d: dict) -> "DatasetConfig":
        try:
            return cls(
                name=name,
                frequency=Frequency.parse(str(d["frequency"])),
                seasonal_period=int(d["seasonal_period"]),
                mase_m=int(d["mase_m"]),
                horizon=int(d["horizon"]),
            )
        except KeyError as exc:
            raise InvalidConfig(f"dataset {name!r} is missing key {exc}") from None

    def to_dict(self) -> dict:
        return {
            "frequency": str(self.frequency),
            "seasonal_period": self.seasonal_period,
            "mase_m": self.mase_m,
            "horizon": self.horizon,
        }


# Seasonality, scaling lag and horizon per benchmark dataset.
DEFAULT_DATASETS: dict[str, DatasetConfig] = {
    "Traffic": DatasetConfig("Traffic", HOURLY, 168, 24, 168),
    "Energy": DatasetConfig("Energy", HOURLY, 24, 24, 24),
    "Exchange": DatasetConfig("Exchange", DAILY, 7, 7, 96),
    "M4-Daily": DatasetConfig("M4-Daily", DAILY, 7, 7, 14),
}


def load_dataset_configs(path: str | Path | None = None) -> dict[str, DatasetConfig]:
    """Read a ``{name: {frequency, seasonal_period, mase_m, horizon}}`` JSON map.

    Entries from the file are layered over :data:`DEFAULT_DATASETS`.
    """
    configs = dict(DEFAULT_DATASETS)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        for name, entry in raw.items():
            configs[name] = DatasetConfig.from_dict(name, entry)
    return configs


def get_dataset(name: str, configs: dict[str, DatasetConfig] | None = None) -> DatasetConfig:
    configs = DEFAULT_DATASETS if configs is None else configs
    try:
        return configs[name]
    except KeyError:
        raise UnknownDataset(f"no dataset config named {name!r}; known: {sorted(configs)}") from None


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Series:
    """One univariate series.

    ``timestamps`` is either an int64 array of step indices or a
    ``datetime64[s]`` array. Arrays are stored read-only.
    """

    id: str
    timestamps: np.ndarray
    values: np.ndarray
    frequency: Frequency = HOURLY
    seasonal_period: int = 1
    mase_m: int = 1

    def __post_init__(self):
        ts = np.asarray(self.timestamps)
        if ts.dtype.kind not in "iM":
            ts = ts.astype(np.int64)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 1:
            raise ValueError(f"series {self.id!r}: values must be a non-empty 1-D sequence")
        if len(ts) != len(vals):
            raise ValueError(f"series {self.id!r}: {len(ts)} timestamps but {len(vals)} values")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValue("non-finite value", series_id=self.id)
        if self.seasonal_period < 1 or self.mase_m < 1:
            raise InvalidConfig("seasonal_period and mase_m must be >= 1", series_id=self.id)
        _check_spacing(ts, self.id)
        object.__setattr__(self, "timestamps", _freeze(ts))
        object.__setattr__(self, "values", _freeze(vals))

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.id == other.id
            and self.frequency == other.frequency
            and self.seasonal_period == other.seasonal_period
            and self.mase_m == other.mase_m
            and self.timestamps.dtype == other.timestamps.dtype
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def head(self, n: int) -> "Series":
        return self._slice(slice(0, n))

    def tail(self, n: int) -> "Series":
        return self._slice(slice(len(self) - n, len(self)))

    def _slice(self, sl: slice) -> "Series":
        return Series(
            self.id,
            self.timestamps[sl],
            self.values[sl],
            self.frequency,
            self.seasonal_period,
            self.mase_m,
        )

    def datetimes(self) -> np.ndarray:
        """Timestamps as ``datetime64[s]``; integer steps count from the Unix epoch."""
        return to_datetimes(self.timestamps, self.frequency)

    def step(self) -> np.timedelta64 | int:
        if len(self) >= 2:
            return self.timestamps[1] - self.timestamps[0]
        if self.timestamps.dtype.kind == "M":
            return np.timedelta64(self.frequency.seconds, "s")
        return 1


def to_datetimes(timestamps: np.ndarray, frequency: Frequency) -> np.ndarray:
    ts = np.asarray(timestamps)
    if ts.dtype.kind == "M":
        return ts.astype("datetime64[s]")
    return (ts.astype(np.int64) * frequency.seconds).astype("datetime64[s]")


def _check_spacing(ts: np.ndarray, series_id: str) -> None:
    if len(ts) < 2:
        return
    d = np.diff(ts)
    zero = np.zeros((), dtype=d.dtype)
    if np.any(d == zero):
        raise DuplicateTimestamp("duplicate timestamp", series_id=series_id)
    if np.any(d < zero):
        raise NonUniformSpacing("timestamps not strictly increasing", series_id=series_id)
    if np.any(d != d[0]):
        i = int(np.argmax(d != d[0]))
        raise NonUniformSpacing(
            f"gap detected after position {i}: step {d[i]} != {d[0]}", series_id=series_id
        )


@dataclass(frozen=True)
class SplitSeries:
    history: Series
    actuals: np.ndarray
    actual_timestamps: np.ndarray
    horizon: int

    @property
    def id(self) -> str:
        return self.history.id


def split_last_h(s: Series, horizon: int) -> SplitSeries:
    """Hold out the last ``horizon`` points as actuals."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if horizon >= len(s):
        raise HorizonTooLong(f"horizon {horizon} >= series length {len(s)}", series_id=s.id)
    cut = len(s) - horizon
    return SplitSeries(
        history=s.head(cut),
        actuals=_freeze(s.values[cut:]),
        actual_timestamps=_freeze(s.timestamps[cut:]),
        horizon=horizon,
    )


# --------------------------------------------------------------------------- csv


def _parse_timestamps(raw: list[str]) -> np.ndarray:
    try:
        ints = [int(x) for x in raw]
    except ValueError:
        pass
    else:
        if any(i < 0 for i in ints):
            raise ValueError("integer timestamps must be non-negative")
        return np.array(ints, dtype=np.int64)
    out = []
    for x in raw:
        x = x.strip()
        if x.endswith("Z"):
            x = x[:-1] + "+00:00"
        dt = datetime.fromisoformat(x)
        if dt.tzinfo is not None:
            dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
        out.append(np.datetime64(dt, "s"))
    return np.array(out, dtype="datetime64[s]")


def ingest_long_csv(
    path: str | Path,
    dataset: DatasetConfig,
    schema: Sequence[str] = DEFAULT_SCHEMA,
) -> list[Series]:
    """Load a long-format CSV into one :class:`Series` per id, sorted by id.

    Seasonal metadata comes from ``dataset``; nothing is inferred.
    """
    id_col, ts_col, val_col = schema
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (id_col, ts_col, val_col) if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {missing}; header is {header}")
        groups: dict[str, tuple[list[str], list[float]]] = {}
        for row in reader:
            sid = row[id_col]
            try:
                v = float(row[val_col])
            except (TypeError, ValueError):
                raise NonFiniteValue(f"unparseable value {row[val_col]!r}", series_id=sid) from None
            if not math.isfinite(v):
                raise NonFiniteValue(f"non-finite value {row[val_col]!r}", series_id=sid)
            ts, vals = groups.setdefault(sid, ([], []))
            ts.append(row[ts_col])
            vals.append(v)

    corpus = []
    for sid in sorted(groups):
        raw_ts, vals = groups[sid]
        try:
            ts = _parse_timestamps(raw_ts)
        except ValueError as exc:
            raise NonUniformSpacing(f"unparseable timestamp: {exc}", series_id=sid) from None
        order = np.argsort(ts, kind="stable")
        corpus.append(
            Series(
                sid,
                ts[order],
                np.asarray(vals)[order],
                dataset.frequency,
                dataset.seasonal_period,
                dataset.mase_m,
            )
        )
    return corpus


def format_timestamp(t) -> str:
    if isinstance(t, np.datetime64):
        return str(t.astype("datetime64[s]"))
    return str(int(t))


def write_long_csv(corpus: Iterable[Series], path: str | Path) -> None:
    """Write a corpus in the same long format :func:`ingest_long_csv` reads (lossless floats)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DEFAULT_SCHEMA)
        for s in corpus:
            for t, v in zip(s.timestamps, s.values):
                w.writerow([s.id, format_timestamp(t), repr(float(v))])


# --------------------------------------------------------------------- transforms


@dataclass(frozen=True)
class Transform:
    kind: str  # "zscore" | "log1p" | "identity"
    fitted_mean: float = 0.0
    fitted_std: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zscore", "log1p", "identity"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "zscore" and not self.fitted_std > 0:
            raise DegenerateSeries("zscore requires positive training std")


def fit_transform(kind: str, training_values) -> Transform:
    """Fit a transform on training values only (population std for zscore)."""
    x = np.asarray(training_values, dtype=float)
    if kind == "zscore":
        std = float(np.std(x))
        if not std > 0:
            raise DegenerateSeries("zero training variance")
        return Transform("zscore", float(np.mean(x)), std)
    if kind == "log1p":
        if np.any(x <= -1):
            raise DomainError("log1p requires values > -1")
    return Transform(kind)


def apply(t: Transform, values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if t.kind == "zscore":
        return (x - t.fitted_mean) / t.fitted_std
    if t.kind == "log1p":
        if np.any(x <= -1):
            raise DomainError("log1p requires values > -1")
        return np.log1p(x)
    return x.copy()


def invert(t: Transform, values) -> np.ndarray:
    y = np.asarray(values, dtype=float)
    if t.kind == "zscore":
        return y * t.fitted_std + t.fitted_mean
    if t.kind == "log1p":
        return np.expm1(y)
    return y.copy()
