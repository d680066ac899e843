"""Forecasting backends.

Specialists (trained per series, CPU): :class:`SeasonalNaive`, :class:`DLinear`,
:class:`LagRidge`. Generalists (stand-ins for a foundation-model service):
:class:`Remote` and :class:`Replay`.
"""

from .base import (
    GENERALIST,
    SPECIALIST,
    Backend,
    ForecastRequest,
    ForecastResult,
    request_from,
)
from .bench import LatencyStats, bench_latency
from .dlinear import DLinear, DLinearModel, decompose, dlinear_fit, dlinear_predict
from .lagridge import (
    DAILY_PROFILE,
    HOURLY_PROFILE,
    FeatureProfile,
    LagRidge,
    LagRidgeModel,
    lagridge_fit,
    lagridge_predict,
)
from .naive import SeasonalNaive, seasonal_naive, seasonal_naive_values
from .remote import EndpointConfig, Remote, remote_forecast, remote_forecast_many
from .replay import ForecastStore, Replay, replay_forecast

__all__ = [
    "GENERALIST",
    "SPECIALIST",
    "Backend",
    "ForecastRequest",
    "ForecastResult",
    "request_from",
    "LatencyStats",
    "bench_latency",
    "DLinear",
    "DLinearModel",
    "decompose",
    "dlinear_fit",
    "dlinear_predict",
    "DAILY_PROFILE",
    "HOURLY_PROFILE",
    "FeatureProfile",
    "LagRidge",
    "LagRidgeModel",
    "lagridge_fit",
    "lagridge_predict",
    "SeasonalNaive",
    "seasonal_naive",
    "seasonal_naive_values",
    "EndpointConfig",
    "Remote",
    "remote_forecast",
    "remote_forecast_many",
    "ForecastStore",
    "Replay",
    "replay_forecast",
]
