"""
Gray-coded I-PAM and square M-QAM constellations scaled to a common bit energy.

Levels run from the most negative amplitude (index 0) to the most positive one
and carry a reflected-binary Gray label, so the first label bit is 0 on the
negative half of every axis. A QAM point with index a*I + b combines in-phase
level a and quadrature level b; its label is the in-phase word followed by the
quadrature word.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .base import ConfigurationError, Modulation, UsageError


def _is_power_of_two(value: int) -> bool:
    return isinstance(value, (int, np.integer)) and value >= 1 and value & (value - 1) == 0


def gray_labels(levels: int) -> np.ndarray:
    """Reflected-binary Gray words (MSB first) for levels 0..levels-1."""
    width = int(math.log2(levels))
    codes = np.arange(levels) ^ (np.arange(levels) >> 1)
    shifts = np.arange(width - 1, -1, -1)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def pam_levels(levels: int, scale: float) -> np.ndarray:
    """Amplitudes (2(i+1) - I - 1)*d for zero-based i."""
    return (2 * np.arange(1, levels + 1) - levels - 1) * scale


@dataclass(kw_only=True, frozen=True, eq=False)
class Constellation:
    """Immutable constellation: points, Gray labels and the half-spacing d."""

    kind: Modulation
    order: int
    scale: float
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.points.flags.writeable = False
        self.labels.flags.writeable = False
        words = self.labels.astype(np.int64) @ (1 << np.arange(self.bits_per_symbol - 1, -1, -1))
        index_of_word = np.empty(self.order, dtype=np.int64)
        index_of_word[words] = np.arange(self.order)
        index_of_word.flags.writeable = False
        object.__setattr__(self, "_index_of_word", index_of_word)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))

    @property
    def axis_order(self) -> int:
        return self.order if self.kind == Modulation.PAM else math.isqrt(self.order)

    @property
    def complex_points(self) -> np.ndarray:
        return self.points.astype(complex)

    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def map_bits(self, bits) -> int:
        """Returns the index whose label equals the bit word."""
        word = tuple(int(b) for b in bits)
        if len(word) != self.bits_per_symbol:
            raise UsageError(
                f"bit word has length {len(word)}, expected {self.bits_per_symbol} for order {self.order}"
            )
        if any(b not in (0, 1) for b in word):
            raise UsageError(f"bit word {word} contains values other than 0 and 1")
        value = 0
        for b in word:
            value = (value << 1) | b
        return int(self._index_of_word[value])

    def symbol_bits(self, index: int) -> tuple[int, ...]:
        """Returns the Gray label of the symbol at index."""
        if not 0 <= index < self.order:
            raise UsageError(f"symbol index {index} outside 0..{self.order - 1}")
        return tuple(int(b) for b in self.labels[index])

    def hamming_table(self) -> np.ndarray:
        """Bit differences between every pair of labels, shape (order, order)."""
        return (self.labels[:, None, :] != self.labels[None, :, :]).sum(axis=-1)

    def nearest(self, r: np.ndarray) -> np.ndarray:
        """Indices of the points closest to each complex sample in r."""
        levels = self.axis_order
        def axis_index(x):
            return np.clip(np.rint((x / self.scale + levels - 1) / 2), 0, levels - 1).astype(np.int64)

        r = np.asarray(r)
        if self.kind == Modulation.PAM:
            return axis_index(r.real)
        return axis_index(r.real) * levels + axis_index(r.imag)


class PamConstellation(Constellation):
    """Gray-coded I-PAM with E_symbol = Eb*log2(I)."""


class QamConstellation(Constellation):
    """Gray-coded square M-QAM scaled as d = sqrt(3*Eb*log2(M) / (2(M-1)))."""


def _check_bit_energy(bit_energy: float) -> None:
    if not bit_energy > 0:
        raise ConfigurationError(f"bit energy must be positive, got {bit_energy}")


def pam_scale(order: int, bit_energy: float) -> float:
    return math.sqrt(3 * bit_energy * math.log2(order) / (order**2 - 1))


def qam_scale(order: int, bit_energy: float) -> float:
    return math.sqrt(3 * bit_energy * math.log2(order) / (2 * (order - 1)))


def check_order(order: int, kind: Modulation) -> None:
    """Raises ConfigurationError unless order is valid for the modulation kind."""
    if kind == Modulation.PAM:
        if not _is_power_of_two(order) or order < 2:
            raise ConfigurationError(f"PAM order must be a power of 2 and at least 2, got {order}")
        return
    if not _is_power_of_two(order) or order < 4:
        raise ConfigurationError(f"QAM order must be a power of 2 and at least 4, got {order}")
    if int(math.log2(order)) % 2:
        raise ConfigurationError(
            f"QAM order {order} is not square (odd power of 2); only square QAM is supported"
        )


@lru_cache(maxsize=64)
def build_pam(order: int, bit_energy: float) -> PamConstellation:
    check_order(order, Modulation.PAM)
    _check_bit_energy(bit_energy)
    scale = pam_scale(order, bit_energy)
    return PamConstellation(
        kind=Modulation.PAM,
        order=int(order),
        scale=scale,
        points=pam_levels(order, scale),
        labels=gray_labels(order),
    )


@lru_cache(maxsize=64)
def build_qam(order: int, bit_energy: float) -> QamConstellation:
    check_order(order, Modulation.QAM)
    _check_bit_energy(bit_energy)
    axis = math.isqrt(order)
    scale = qam_scale(order, bit_energy)
    levels = pam_levels(axis, scale)
    axis_labels = gray_labels(axis)
    points = (levels[:, None] + 1j * levels[None, :]).reshape(-1)
    labels = np.concatenate(
        [np.repeat(axis_labels, axis, axis=0), np.tile(axis_labels, (axis, 1))], axis=1
    )
    return QamConstellation(
        kind=Modulation.QAM,
        order=int(order),
        scale=scale,
        points=points,
        labels=labels,
    )


def build_constellation(order: int, bit_energy: float, kind: Modulation) -> Constellation:
    if kind == Modulation.PAM:
        return build_pam(order, bit_energy)
    return build_qam(order, bit_energy)


def map_bits(constellation: Constellation, bits) -> int:
    return constellation.map_bits(bits)


def symbol_bits(constellation: Constellation, index: int) -> tuple[int, ...]:
    return constellation.symbol_bits(index)
