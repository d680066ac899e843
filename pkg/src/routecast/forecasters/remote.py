"""HTTP client for a remote generalist forecasting service.

Wire format::

    POST <url>  {"series_id": str, "history": [num], "horizon": int, "frequency": str}
    200         {"forecast": [num], "model": str, "latency_micros": int (optional)}
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import httpx

from ..errors import LengthMismatch, MalformedResponse, Timeout
from ..series import Series
from .base import GENERALIST, Backend, ForecastRequest, ForecastResult, check_forecast, request_from


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    timeout: float = 10.0
    max_in_flight: int = 8

    @classmethod
    def from_dict(cls, d: dict) -> "EndpointConfig":
        return cls(d["url"], float(d.get("timeout", 10.0)), int(d.get("max_in_flight", 8)))


def encode_request(req: ForecastRequest) -> dict:
    return {
        "series_id": req.series_id,
        "history": [float(x) for x in req.history],
        "horizon": req.horizon,
        "frequency": str(req.frequency),
    }


def decode_response(req: ForecastRequest, body) -> tuple[list[float], str, int | None]:
    if not isinstance(body, dict) or not isinstance(body.get("forecast"), list):
        raise MalformedResponse("response lacks a 'forecast' list", series_id=req.series_id)
    raw = body["forecast"]
    try:
        values = [float(v) for v in raw]
    except (TypeError, ValueError):
        raise MalformedResponse("non-numeric forecast value", series_id=req.series_id) from None
    if len(values) != req.horizon:
        raise LengthMismatch(
            f"service returned {len(values)} values for horizon {req.horizon}",
            series_id=req.series_id,
        )
    if not all(math.isfinite(v) for v in values):
        raise MalformedResponse("service returned non-finite values", series_id=req.series_id)
    model = str(body.get("model", "remote"))
    svc = body.get("latency_micros")
    return values, model, int(svc) if isinstance(svc, (int, float)) else None


def remote_forecast(
    req: ForecastRequest, endpoint: EndpointConfig, client: httpx.Client | None = None
) -> ForecastResult:
    """POST one request; ``latency_micros`` is the client-side round trip."""
    own = client is None
    client = client or httpx.Client(timeout=endpoint.timeout)
    try:
        t0 = time.perf_counter_ns()
        try:
            resp = client.post(endpoint.url, json=encode_request(req), timeout=endpoint.timeout)
        except httpx.TimeoutException as exc:
            raise Timeout(f"no response within {endpoint.timeout}s: {exc}", series_id=req.series_id) from exc
        except httpx.HTTPError as exc:
            raise MalformedResponse(f"transport error: {exc}", series_id=req.series_id) from exc
        rtt = (time.perf_counter_ns() - t0) // 1000
    finally:
        if own:
            client.close()
    if resp.status_code in (408, 504):
        raise Timeout(f"service timed out (HTTP {resp.status_code})", series_id=req.series_id)
    if resp.status_code != 200:
        raise MalformedResponse(f"HTTP {resp.status_code}", series_id=req.series_id)
    try:
        body = resp.json()
    except ValueError:
        raise MalformedResponse("response is not JSON", series_id=req.series_id) from None
    values, model, svc = decode_response(req, body)
    return ForecastResult(req.series_id, check_forecast(req, values), model, int(rtt), (), svc)


def remote_forecast_many(
    reqs: Sequence[ForecastRequest], endpoint: EndpointConfig, client: httpx.Client | None = None
) -> list[ForecastResult]:
    """Run requests with at most ``endpoint.max_in_flight`` in flight; order is preserved."""
    own = client is None
    client = client or httpx.Client(timeout=endpoint.timeout)
    try:
        with ThreadPoolExecutor(max_workers=max(1, endpoint.max_in_flight)) as pool:
            return list(pool.map(lambda r: remote_forecast(r, endpoint, client), reqs))
    finally:
        if own:
            client.close()


class Remote(Backend):
    forecaster_class = GENERALIST

    def __init__(self, endpoint: EndpointConfig, name: str = "remote"):
        self.endpoint = endpoint
        self.name = name
        self._client = httpx.Client(timeout=endpoint.timeout)

    def forecast(self, history: Series, horizon: int) -> ForecastResult:
        res = remote_forecast(request_from(history, horizon), self.endpoint, self._client)
        return ForecastResult(
            res.series_id, res.values, self.name, res.latency_micros, res.warnings,
            res.service_latency_micros,
        )

    def close(self) -> None:
        self._client.close()
