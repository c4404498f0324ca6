__version__ = "0.1.0"

from .settings import decolab_settings  # noqa: E402,F401  # configures Django first
from .exception_handler import exception_handler  # noqa: E402
from .runner import run_scenario, validate_config  # noqa: E402

__all__ = ("exception_handler", "run_scenario", "validate_config")
