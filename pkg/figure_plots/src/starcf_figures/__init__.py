"""Line-plot renderer for the sweep CSVs written by the starcf CLI."""

from .presets import PRESET_NAMES, preset_spec
from .spec import PlotSpec, SchemaError

__all__ = ["PlotSpec", "SchemaError", "PRESET_NAMES", "preset_spec"]
__version__ = "0.1.0"
