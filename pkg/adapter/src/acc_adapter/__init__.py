"""Reference model-backend server for the acckit wire protocol."""

from .config import AdapterConfig
from .server import build_handler

__version__ = "0.1.0"

__all__ = ["AdapterConfig", "build_handler"]
