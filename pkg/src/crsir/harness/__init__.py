from .config import PanelConfig, load_config
from .data import Panel, apply_transform, load_panel, read_delimited
from .evaluation import EvalReport, cross_validate, forecast_origin, rmse, rolling_oos
from .simulation import rmse_table, simulate_design, simulate_factor_panel

__all__ = [
    "EvalReport",
    "Panel",
    "PanelConfig",
    "apply_transform",
    "cross_validate",
    "forecast_origin",
    "load_config",
    "load_panel",
    "read_delimited",
    "rmse",
    "rolling_oos",
    "simulate_design",
    "simulate_factor_panel",
    "rmse_table",
]
