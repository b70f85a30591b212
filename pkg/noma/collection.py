"""Collection classes for managing several detectors."""

import numpy as np

from .base import BaseDetector, DetectorKind, UsageError
from .constellation import Constellation
from .detection import JointMLDetector, SicOrdering, SICDetector


class DetectorCollection:
    """A collection of detectors run on the same received samples."""

    def __init__(self, *detectors: BaseDetector):
        self.detectors = detectors
        self.detector_map = {detector.kind: detector for detector in detectors}

    @classmethod
    def from_kinds(
        cls,
        kinds,
        *,
        sic_ordering: SicOrdering | str = SicOrdering.INSTANTANEOUS,
    ) -> "DetectorCollection":
        detectors: list[BaseDetector] = []
        for kind in kinds:
            kind = DetectorKind(kind)
            if kind == DetectorKind.JMLD:
                detectors.append(JointMLDetector())
            else:
                detectors.append(SICDetector(sic_ordering))
        return cls(*detectors)

    @property
    def kinds(self) -> tuple[DetectorKind, ...]:
        return tuple(self.detector_map)

    def run(
        self,
        *,
        kind: DetectorKind,
        y: np.ndarray,
        effective: np.ndarray,
        constellations: list[Constellation],
    ) -> np.ndarray:
        detector = self.detector_map.get(DetectorKind(kind))
        if not detector:
            raise UsageError(f"Detector {kind} is not in this collection")
        return detector.detect_batch(y, effective, constellations)

    def run_all(self, **kwargs) -> dict[DetectorKind, np.ndarray]:
        return {kind: self.run(kind=kind, **kwargs) for kind in self.detector_map}
