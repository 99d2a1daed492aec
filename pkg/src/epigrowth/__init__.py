"""Epidemic dynamics coupled to an optimal-growth planner."""

from .config import load_config, load_preset, preset_model
from .forms import Model, ModelParams

__all__ = ["Model", "ModelParams", "load_config", "load_preset", "preset_model"]
__version__ = "0.1.0"
