"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class QgtError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameters(QgtError, ValueError):
    """Model or protocol parameters outside their physical domain."""


class GapClosed(QgtError):
    """The two bands touch at the requested momentum; the eigenbasis is ambiguous."""


class DegenerateStencil(GapClosed):
    """A finite-difference stencil reaches into the exclusion zone of a gap-closing point."""


class StepTooLarge(QgtError, ValueError):
    """Finite-difference step outside the accepted window [1e-7, 1e-2]."""


class AtCriticalPoint(QgtError):
    """Sign diagnostics requested exactly at m_i = 1, where they are undefined."""


class ConfigInvalid(QgtError, ValueError):
    """Scan or CLI configuration is incomplete or inconsistent."""


class DegenerateGrid(QgtError):
    """Every node of a requested grid was excluded as degenerate."""


class IoFailure(QgtError, OSError):
    """Reading or writing an export file failed."""
