"""
Monte Carlo sampling loop: sweeps the Eb/N0 grid of a SimPlan, fanning chunks
out to worker processes, and collects per-user BER curves for every detector.
"""

import asyncio
import logging
import math
from collections.abc import Callable

from noma import BerCurve, BerPoint, DetectorKind, SimPlan
from noma.montecarlo import ROUND_CHUNKS, simulate_chunk
from noma.run import default_workers, make_executor, run

logger = logging.getLogger(__name__)


async def sampling_loop(
    *,
    plan: SimPlan,
    point_callback: Callable[[DetectorKind, list[BerPoint]], None] | None = None,
    workers: int | None = None,
    timeout: float | None = None,
) -> dict[DetectorKind, BerCurve]:
    """
    Simulates every grid point until each user of each detector has
    plan.min_bit_errors bit errors or plan.max_symbols symbols were sent.

    The stop rule is checked after whole rounds of ROUND_CHUNKS chunks, so the
    result is identical for any worker count.
    """
    workers = workers or default_workers()
    executor = make_executor(workers)
    bits_per_symbol = [int(math.log2(m)) for m in plan.scenario.orders]
    collected: dict[DetectorKind, list[BerPoint]] = {kind: [] for kind in plan.detectors}
    try:
        for point, ebn0 in enumerate(plan.ebn0_grid):
            errors = {kind: [0] * plan.scenario.n_users for kind in plan.detectors}
            symbols = 0
            chunk, total = 0, plan.chunk_count()
            while chunk < total:
                batch = range(chunk, min(chunk + ROUND_CHUNKS, total))
                results = await run(
                    simulate_chunk,
                    [plan.task(point, c) for c in batch],
                    executor=executor,
                    timeout=timeout,
                )
                for result in results:
                    symbols += result.symbols
                    for kind, counts in result.bit_errors.items():
                        errors[kind] = [a + b for a, b in zip(errors[kind], counts)]
                chunk = batch.stop
                if all(e >= plan.min_bit_errors for counts in errors.values() for e in counts):
                    break
            else:
                logger.info(
                    "%.2f dB: symbol cap %d reached before %d errors per user",
                    ebn0,
                    plan.max_symbols,
                    plan.min_bit_errors,
                )

            for kind, counts in errors.items():
                points = [
                    BerPoint.simulated(
                        ebn0_db=ebn0,
                        user=n + 1,
                        bit_errors=count,
                        bits_sent=symbols * bits_per_symbol[n],
                    )
                    for n, count in enumerate(counts)
                ]
                collected[kind].extend(points)
                if point_callback:
                    point_callback(kind, points)
            logger.info(
                "%.2f dB done: %d symbols, errors %s",
                ebn0,
                symbols,
                {kind.value: counts for kind, counts in errors.items()},
            )
    finally:
        if executor is not None:
            executor.shutdown(cancel_futures=True)

    return {kind: BerCurve(points=tuple(points)) for kind, points in collected.items()}


def run_ber(plan: SimPlan, *, workers: int | None = None, timeout: float | None = None) -> BerCurve:
    """Simulated curve of the plan's primary detector."""
    curves = asyncio.run(sampling_loop(plan=plan, workers=workers, timeout=timeout))
    return curves[plan.detector]
