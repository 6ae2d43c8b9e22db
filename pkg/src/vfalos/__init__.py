"""Vector-field adaptive LOS path following for differential-thrust surface vessels."""

from .config import build_scenario, load_config
from .sim import SimLog, run_scenario

__all__ = ["SimLog", "build_scenario", "load_config", "run_scenario"]
__version__ = "0.1.0"
