"""bitension-lab: numerical verification of biharmonic maps and surfaces."""
from bitensionlab.errors import BitensionError

__version__ = "0.1.0"

__all__ = ["BitensionError", "__version__"]
