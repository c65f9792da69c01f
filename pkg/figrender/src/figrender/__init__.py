"""figrender: turns the simulator's CSV artifacts into figure images."""

__version__ = "0.1.0"

from .render import FIGURE_IDS, render
from .schemas import SchemaError
