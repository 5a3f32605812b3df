"""folia: exact verification of Weitzenboeck-type identities on foliated frames."""

__version__ = "0.1.0"

from .frames import BUILTIN_MODELS, FrameError, FrameSpec, builtin_model, load_frame, validate
from .scalars import Eps

__all__ = [
    "__version__", "BUILTIN_MODELS", "Eps", "FrameError", "FrameSpec", "builtin_model",
    "load_frame", "validate",
]
