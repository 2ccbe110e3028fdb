from .scenario import ScenarioScript, load_script
from .runner import RunMetrics, run_scenario
from .report import aggregate, write_csv

__all__ = [
    "ScenarioScript", "load_script",
    "RunMetrics", "run_scenario",
    "aggregate", "write_csv",
]
