"""Route time series between generalist and specialist forecasters.

Series-level features (spectral entropy, coefficient of variation, seasonal
autocorrelation, trend R^2) drive a threshold rule; forecasts are scored with
MASE/sMAPE/RMSE and the cost/accuracy trade-off is swept over the fraction of
series sent to the expensive generalist.
"""

from .features import SeriesFeatures, extract_all
from .metrics import mase, rmse, smape
from .pareto import CostModel, expected_cost, pareto_sweep
from .router import RouterConfig, route
from .series import Series, split_last_h

__version__ = "0.1.0"

__all__ = [
    "SeriesFeatures",
    "extract_all",
    "mase",
    "rmse",
    "smape",
    "CostModel",
    "expected_cost",
    "pareto_sweep",
    "RouterConfig",
    "route",
    "Series",
    "split_last_h",
]
