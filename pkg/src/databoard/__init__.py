"""databoard: a mixed-initiative web-data workbench engine.

Extract structured data from page snapshots into versioned table and chart
instances, transform them with a deterministic tool catalog, and drive
proactive and reactive guidance over a replayable wire protocol.
"""

from .cells import Cell
from .instances import Column, SourceRef, TableInstance, VisualizationInstance
from .session import Session
from .workspace import Workspace

__version__ = "0.1.0"

__all__ = ["Cell", "Column", "SourceRef", "TableInstance",
           "VisualizationInstance", "Session", "Workspace", "__version__"]
