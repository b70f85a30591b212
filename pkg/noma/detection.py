"""
Joint maximum-likelihood (JMLD) and successive interference cancellation (SICD)
detectors for the uplink superposition.
"""

import math
from enum import StrEnum
from typing import ClassVar

import numpy as np

from .base import BaseDetector, DetectionResult, DetectorKind, check_dimensions
from .channel import ChannelRealization
from .constellation import Constellation


# complex entries held by one metric evaluation (S x T x L)
METRIC_CHUNK_ENTRIES = 1 << 21


class SicOrdering(StrEnum):
    INSTANTANEOUS = "instantaneous"
    STATISTICAL = "statistical"


def _composite_tables(effective: np.ndarray, constellations: list[Constellation]) -> np.ndarray:
    """
    Incremental partial sums over the mixed-radix tuple space, user 1 outermost.

    effective has shape (..., N, L); returns (..., prod(M), L).
    """
    lead = effective.shape[:-2]
    antennas = effective.shape[-1]
    table = np.zeros(lead + (1, antennas), dtype=complex)
    for n, constellation in enumerate(constellations):
        contribution = constellation.complex_points[:, None] * effective[..., n, None, :]
        table = (table[..., :, None, :] + contribution[..., None, :, :]).reshape(
            lead + (-1, antennas)
        )
    return table


def composite_points(
    realization: ChannelRealization, constellations: list[Constellation]
) -> np.ndarray:
    """Table of sum_n h_n s_{n,t_n} for every tuple t in row-major order, shape (prod(M), L)."""
    check_dimensions(
        np.zeros((1, realization.antennas)), realization.effective, constellations
    )
    return _composite_tables(realization.effective, constellations)


class JointMLDetector(BaseDetector):
    """
    Exhaustive search over all prod(M_n) composite hypotheses.
    Ties go to the smallest enumeration index.
    """

    kind: ClassVar[DetectorKind] = DetectorKind.JMLD

    def detect_batch(self, y, effective, constellations):
        y = np.asarray(y, dtype=complex)
        effective = np.asarray(effective, dtype=complex)
        check_dimensions(y, effective, constellations)
        orders = [c.order for c in constellations]
        hypotheses = math.prod(orders)
        antennas = y.shape[1]
        step = max(1, METRIC_CHUNK_ENTRIES // (hypotheses * antennas))
        best = np.empty(y.shape[0], dtype=np.int64)

        shared = None
        if effective.ndim == 2:
            shared = _composite_tables(effective, constellations)
        for start in range(0, y.shape[0], step):
            stop = min(start + step, y.shape[0])
            if shared is None:
                table = _composite_tables(effective[start:stop], constellations)
            else:
                table = shared[None]
            residual = y[start:stop, None, :] - table
            metric = (residual.real**2 + residual.imag**2).sum(axis=-1)
            best[start:stop] = np.argmin(metric, axis=1)
        return np.stack(np.unravel_index(best, orders), axis=1)


class SICDetector(BaseDetector):
    """
    MRC successive interference cancellation: users in decreasing ||h_n||,
    scalar MRC, nearest-point slicing, hard re-encoding and subtraction.
    """

    kind: ClassVar[DetectorKind] = DetectorKind.SICD

    def __init__(self, ordering: SicOrdering | str = SicOrdering.INSTANTANEOUS):
        self.ordering = SicOrdering(ordering)

    def detect_batch(self, y, effective, constellations):
        y = np.asarray(y, dtype=complex)
        effective = np.asarray(effective, dtype=complex)
        check_dimensions(y, effective, constellations)
        count = y.shape[0]
        n_users = len(constellations)
        if effective.ndim == 2:
            effective = np.broadcast_to(effective, (count,) + effective.shape)

        if self.ordering == SicOrdering.INSTANTANEOUS:
            norms = np.linalg.norm(effective, axis=-1)
            # stable sort keeps scenario order for equal norms
            order = np.argsort(-norms, axis=1, kind="stable")
        else:
            order = np.broadcast_to(np.arange(n_users), (count, n_users))

        residual = y.copy()
        decided = np.zeros((count, n_users), dtype=np.int64)
        rows = np.arange(count)
        for stage in range(n_users):
            users = order[:, stage]
            h = effective[rows, users]
            energy = (h.real**2 + h.imag**2).sum(axis=-1)
            combined = (np.conj(h) * residual).sum(axis=-1) / energy
            symbols = np.empty(count, dtype=complex)
            for n, constellation in enumerate(constellations):
                mask = users == n
                if not mask.any():
                    continue
                picks = constellation.nearest(combined[mask])
                decided[mask, n] = picks
                symbols[mask] = constellation.complex_points[picks]
            residual -= h * symbols[:, None]
        return decided


def jmld_detect(
    y, realization: ChannelRealization, constellations: list[Constellation]
) -> DetectionResult:
    return JointMLDetector()(y, realization, constellations)


def sicd_detect(
    y,
    realization: ChannelRealization,
    constellations: list[Constellation],
    ordering: SicOrdering | str = SicOrdering.INSTANTANEOUS,
) -> DetectionResult:
    return SICDetector(ordering)(y, realization, constellations)
