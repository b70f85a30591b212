"""
Seeded Monte Carlo plan and the per-chunk worker.

A grid point is simulated in chunks of CHUNK_SYMBOLS symbols. Chunk c of point
p draws from its own substream SeedSequence(seed, spawn_key=(p, c)) in the order
channel gains, symbol indices, noise, so a chunk's counts do not depend on which
process evaluates it.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .base import ConfigurationError, DetectorKind
from .channel import Scenario, complex_normal, sample_gains
from .collection import DetectorCollection
from .detection import SicOrdering

CHUNK_SYMBOLS = 4096
# chunks evaluated between two checks of the stop rule
ROUND_CHUNKS = 16

DEFAULT_MIN_ERRORS = 400
DEFAULT_MAX_SYMBOLS = 2_000_000


@dataclass(kw_only=True, frozen=True)
class SimPlan:
    scenario: Scenario
    ebn0_grid: tuple[float, ...]
    detectors: tuple[DetectorKind, ...] = (DetectorKind.JMLD,)
    min_bit_errors: int = DEFAULT_MIN_ERRORS
    max_symbols: int = DEFAULT_MAX_SYMBOLS
    block_len: int = 1
    seed: int = 0
    sic_ordering: SicOrdering = SicOrdering.INSTANTANEOUS

    def __post_init__(self):
        object.__setattr__(self, "ebn0_grid", tuple(float(x) for x in self.ebn0_grid))
        object.__setattr__(self, "detectors", tuple(DetectorKind(d) for d in self.detectors))
        object.__setattr__(self, "sic_ordering", SicOrdering(self.sic_ordering))
        if not self.ebn0_grid:
            raise ConfigurationError("the Eb/N0 grid is empty")
        if any(b <= a for a, b in zip(self.ebn0_grid, self.ebn0_grid[1:])):
            raise ConfigurationError("the Eb/N0 grid must be strictly increasing")
        if not self.detectors:
            raise ConfigurationError("at least one detector is required")
        if len(set(self.detectors)) != len(self.detectors):
            raise ConfigurationError("detectors must not repeat")
        if self.min_bit_errors < 1:
            raise ConfigurationError(f"min_bit_errors must be at least 1, got {self.min_bit_errors}")
        if self.max_symbols < 1:
            raise ConfigurationError(f"max_symbols must be at least 1, got {self.max_symbols}")
        if self.block_len < 1:
            raise ConfigurationError(f"block_len must be at least 1, got {self.block_len}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def detector(self) -> DetectorKind:
        """The primary detector; further entries are evaluated on the same draws."""
        return self.detectors[0]

    @property
    def chunk_symbols(self) -> int:
        """Whole blocks per chunk, at least one block."""
        return max(1, CHUNK_SYMBOLS // self.block_len) * self.block_len

    def chunk_count(self) -> int:
        return math.ceil(self.max_symbols / self.chunk_symbols)

    def chunk_size(self, chunk: int) -> int:
        return min(self.chunk_symbols, self.max_symbols - chunk * self.chunk_symbols)

    def task(self, point: int, chunk: int) -> "ChunkTask":
        return ChunkTask(
            scenario=self.scenario.at_ebn0(self.ebn0_grid[point]),
            detectors=self.detectors,
            sic_ordering=self.sic_ordering,
            seed=self.seed,
            point=point,
            chunk=chunk,
            symbols=self.chunk_size(chunk),
            block_len=self.block_len,
        )


@dataclass(kw_only=True, frozen=True)
class ChunkTask:
    scenario: Scenario
    detectors: tuple[DetectorKind, ...]
    sic_ordering: SicOrdering
    seed: int
    point: int
    chunk: int
    symbols: int
    block_len: int


@dataclass(kw_only=True, frozen=True)
class ChunkResult:
    point: int
    chunk: int
    symbols: int
    bit_errors: dict[DetectorKind, tuple[int, ...]] = field(default_factory=dict)


def chunk_rng(seed: int, point: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(point, chunk)))


def simulate_chunk(task: ChunkTask) -> ChunkResult:
    """Draws one chunk and counts per-user bit errors for every detector."""
    scenario = task.scenario
    rng = chunk_rng(task.seed, task.point, task.chunk)
    constellations = scenario.constellations()
    orders = np.array(scenario.orders)
    blocks = math.ceil(task.symbols / task.block_len)

    gains = sample_gains(rng, scenario, blocks)
    sent = rng.integers(0, orders, size=(blocks * task.block_len, scenario.n_users))[: task.symbols]
    effective = np.sqrt(scenario.powers)[None, :, None] * gains
    per_symbol = np.repeat(effective, task.block_len, axis=0)[: task.symbols]
    x = np.stack(
        [c.complex_points[sent[:, n]] for n, c in enumerate(constellations)], axis=1
    )
    y = np.einsum("sn,snl->sl", x, per_symbol)
    if scenario.noise_psd > 0:
        y = y + complex_normal(rng, y.shape, scenario.noise_psd)

    collection = DetectorCollection.from_kinds(task.detectors, sic_ordering=task.sic_ordering)
    tables = [c.hamming_table() for c in constellations]
    counts = {}
    for kind in collection.kinds:
        if task.block_len == 1:
            decided = collection.run(
                kind=kind, y=y, effective=per_symbol, constellations=constellations
            )
        else:
            decided = np.concatenate(
                [
                    collection.run(
                        kind=kind,
                        y=y[b * task.block_len : (b + 1) * task.block_len],
                        effective=effective[b],
                        constellations=constellations,
                    )
                    for b in range(blocks)
                ]
            )
        counts[kind] = tuple(
            int(table[sent[:, n], decided[:, n]].sum()) for n, table in enumerate(tables)
        )
    return ChunkResult(point=task.point, chunk=task.chunk, symbols=task.symbols, bit_errors=counts)
