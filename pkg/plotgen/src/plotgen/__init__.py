"""Figure generation for the cavity-QED simulator's CSV output.

Reads only the documented CSV columns; performs no physics.  Rendering is
deterministic: identical inputs and spec produce byte-identical image files.
"""

from .spec import FigureSpec, PlotgenError
from .render import render

__version__ = "0.1.0"
__all__ = ["FigureSpec", "PlotgenError", "render", "__version__"]
