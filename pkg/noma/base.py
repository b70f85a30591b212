from abc import ABCMeta, abstractmethod
from dataclasses import dataclass
from enum import StrEnum
from typing import TYPE_CHECKING, ClassVar

import numpy as np

if TYPE_CHECKING:
    from .channel import ChannelRealization
    from .constellation import Constellation


class Modulation(StrEnum):
    PAM = "pam"
    QAM = "qam"


class DetectorKind(StrEnum):
    JMLD = "jmld"
    SICD = "sicd"


class Source(StrEnum):
    SIMULATED = "simulated"
    BOUND = "analytical-bound"


class NomaError(Exception):
    """Raised when a simulation or analysis step cannot proceed."""

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ConfigurationError(NomaError):
    """Invalid scenario, plan or configuration value."""


class UsageError(NomaError):
    """Invalid call arguments (wrong lengths, indices out of range)."""


class ResourceError(NomaError):
    """An enumeration would exceed its configured budget."""


@dataclass(kw_only=True, frozen=True, eq=False)
class DetectionResult:
    """Decision of a multiuser detector for one received vector."""

    indices: tuple[int, ...]
    bits: tuple[tuple[int, ...], ...]
    metric: float


class BaseDetector(metaclass=ABCMeta):
    """Abstract base class for multiuser detectors."""

    kind: ClassVar[DetectorKind]

    def __call__(
        self,
        y: np.ndarray,
        realization: "ChannelRealization",
        constellations: "list[Constellation]",
    ) -> DetectionResult:
        """Detects one received vector y of length L."""
        y = np.asarray(y, dtype=complex)
        check_dimensions(y[None, :], realization.effective, constellations)
        indices = self.detect_batch(y[None, :], realization.effective, constellations)[0]
        composite = sum(
            h * c.points[i]
            for h, c, i in zip(realization.effective, constellations, indices)
        )
        metric = float(np.sum(np.abs(y - composite) ** 2))
        return DetectionResult(
            indices=tuple(int(i) for i in indices),
            bits=tuple(c.symbol_bits(int(i)) for c, i in zip(constellations, indices)),
            metric=metric,
        )

    @abstractmethod
    def detect_batch(
        self,
        y: np.ndarray,
        effective: np.ndarray,
        constellations: "list[Constellation]",
    ) -> np.ndarray:
        """
        Detects S received vectors at once.

        y has shape (S, L); effective is either one shared channel (N, L) or one
        channel per vector (S, N, L). Returns symbol indices of shape (S, N).
        """
        raise NotImplementedError


def check_dimensions(y: np.ndarray, effective: np.ndarray, constellations) -> None:
    """Raises UsageError when y, the channel and the constellations disagree."""
    if y.ndim != 2:
        raise UsageError(f"received block must be two-dimensional, got shape {y.shape}")
    if effective.ndim not in (2, 3):
        raise UsageError(f"channel must have shape (N, L) or (S, N, L), got {effective.shape}")
    n_users, antennas = effective.shape[-2:]
    if y.shape[1] != antennas:
        raise UsageError(
            f"received vector has length {y.shape[1]} but the channel has {antennas} antennas"
        )
    if effective.ndim == 3 and effective.shape[0] != y.shape[0]:
        raise UsageError(
            f"{effective.shape[0]} channel realizations for {y.shape[0]} received vectors"
        )
    if len(constellations) != n_users:
        raise UsageError(
            f"{len(constellations)} constellations for {n_users} users"
        )
