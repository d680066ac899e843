from __future__ import annotations

import csv
import time
from pathlib import Path

import numpy as np

from ..errors import MalformedResponse, NotFound
from ..series import Series
from .base import GENERALIST, Backend, ForecastRequest, ForecastResult, make_result, request_from

STORE_HEADER = ("series_id", "model_name", "step", "value")


class ForecastStore:
    """Pre-recorded forecasts keyed by ``(series_id, model_name)``.

    On disk: CSV ``series_id,model_name,step,value`` with ``step`` in ``1..H``.
    """

    def __init__(self):
        self._data: dict[tuple[str, str], np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key) -> bool:
        return key in self._data

    def put(self, series_id: str, model_name: str, values) -> None:
        v = np.array(values, dtype=float)
        v.flags.writeable = False
        self._data[(series_id, model_name)] = v

    def get(self, series_id: str, model_name: str, horizon: int) -> np.ndarray:
        v = self._data.get((series_id, model_name))
        if v is None or len(v) != horizon:
            raise NotFound(
                f"no stored forecast for model {model_name!r} with horizon {horizon}",
                series_id=series_id,
            )
        return v

    def models(self) -> list[str]:
        return sorted({m for _, m in self._data})

    @classmethod
    def load(cls, path: str | Path) -> "ForecastStore":
        rows: dict[tuple[str, str], dict[int, float]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in STORE_HEADER if c not in (reader.fieldnames or [])]
            if missing:
                raise MalformedResponse(f"{path}: replay store missing columns {missing}")
            for r in reader:
                key = (r["series_id"], r["model_name"])
                rows.setdefault(key, {})[int(r["step"])] = float(r["value"])
        store = cls()
        for key, steps in rows.items():
            h = len(steps)
            if sorted(steps) != list(range(1, h + 1)):
                raise MalformedResponse(
                    f"steps for model {key[1]!r} are not 1..{h}", series_id=key[0]
                )
            store.put(key[0], key[1], [steps[i] for i in range(1, h + 1)])
        return store

    def save(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(STORE_HEADER)
            for (sid, model) in sorted(self._data):
                for step, v in enumerate(self._data[(sid, model)], start=1):
                    w.writerow([sid, model, step, repr(float(v))])


def replay_forecast(req: ForecastRequest, store: ForecastStore, model_name: str) -> ForecastResult:
    t0 = time.perf_counter_ns()
    values = store.get(req.series_id, model_name, req.horizon)
    return make_result(req, values, model_name, t0)


class Replay(Backend):
    """Generalist backed by recorded forecasts (e.g. foundation-model outputs)."""

    forecaster_class = GENERALIST

    def __init__(self, store: ForecastStore, model_name: str, name: str | None = None):
        self.store = store
        self.model_name = model_name
        self.name = name or model_name

    def forecast(self, history: Series, horizon: int) -> ForecastResult:
        res = replay_forecast(request_from(history, horizon), self.store, self.model_name)
        return ForecastResult(res.series_id, res.values, self.name, res.latency_micros)
