"""Post-quench quantum geometric tensor of the SSH chain: closed forms and numerical oracles."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AtCriticalPoint,
    ConfigInvalid,
    DegenerateGrid,
    DegenerateStencil,
    GapClosed,
    InvalidParameters,
    IoFailure,
    QgtError,
    StepTooLarge,
)
from .model import ModelParams  # noqa: E402
from .quench import QuenchProtocol  # noqa: E402

__all__ = [
    "AtCriticalPoint",
    "ConfigInvalid",
    "DegenerateGrid",
    "DegenerateStencil",
    "GapClosed",
    "InvalidParameters",
    "IoFailure",
    "ModelParams",
    "QgtError",
    "QuenchProtocol",
    "StepTooLarge",
    "__version__",
]
