"""
Run configuration: built-in scenario presets, key-value config files and
environment settings.

Config files use dotenv syntax, one KEY=value per line:

    MODULATION=qam
    ANTENNAS=4
    ORDERS=16,16,16
    GAINS_DB=0,-3,-6
    EBN0=0:40:4
"""

import logging
import math
import os
from dataclasses import dataclass, field, replace
from enum import StrEnum
from pathlib import Path

from dotenv import dotenv_values

from .base import ConfigurationError, DetectorKind, Modulation, UsageError
from .bound import DEFAULT_TERM_BUDGET
from .channel import Scenario, UserSpec, db_to_linear
from .detection import SicOrdering
from .montecarlo import DEFAULT_MAX_SYMBOLS, DEFAULT_MIN_ERRORS, SimPlan

logger = logging.getLogger(__name__)

DEFAULT_EBN0 = "0:40:4"
# JMLD searches at least this many hypotheses per symbol get the reduced cap
LARGE_SEARCH = 1 << 18
REDUCED_MAX_SYMBOLS = 10**5


class Mode(StrEnum):
    BOUND = "bound"
    SIMULATE = "simulate"
    COMPARE = "compare"


@dataclass(kw_only=True, frozen=True)
class ScenarioSpec:
    """Scenario as configured: dB values are kept verbatim."""

    modulation: Modulation = Modulation.QAM
    antennas: int
    bit_energy: float = 1.0
    orders: tuple[int, ...]
    gains_db: tuple[float, ...]
    powers_db: tuple[float, ...]

    def build(self) -> Scenario:
        return Scenario(
            users=tuple(
                UserSpec(mod_order=m, power=db_to_linear(p), channel_var=db_to_linear(g))
                for m, g, p in zip(self.orders, self.gains_db, self.powers_db)
            ),
            antennas=self.antennas,
            bit_energy=self.bit_energy,
            modulation=self.modulation,
        )


PRESETS: dict[str, ScenarioSpec] = {
    "scenario-1": ScenarioSpec(
        antennas=4, orders=(256, 16), gains_db=(0.0, -3.0), powers_db=(0.0, 0.0)
    ),
    "scenario-2": ScenarioSpec(
        antennas=4, orders=(16, 16, 16), gains_db=(0.0, -3.0, -6.0), powers_db=(0.0, 0.0, 0.0)
    ),
    "scenario-3": ScenarioSpec(
        antennas=4,
        orders=(256, 64, 16, 4),
        gains_db=(0.0, -3.0, -6.0, -9.0),
        powers_db=(0.0, 0.0, 0.0, 0.0),
    ),
}


def load_preset_spec(name: str) -> ScenarioSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise UsageError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}"
        ) from None


def load_preset(name: str) -> Scenario:
    """Scenario of a named preset (equal powers, L = 4)."""
    return load_preset_spec(name).build()


def parse_grid(text: str) -> tuple[float, ...]:
    """Parses 'start:stop:step' (stop included) or a single value in dB."""
    parts = [p.strip() for p in str(text).split(":")]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigurationError(f"EBN0 must be start:stop:step or a number, got {text!r}") from None
    if len(values) == 1:
        return (values[0],)
    if len(values) != 3:
        raise ConfigurationError(f"EBN0 must be start:stop:step or a number, got {text!r}")
    start, stop, step = values
    if not step > 0:
        raise ConfigurationError(f"EBN0 step must be positive, got {step:g}")
    if stop < start:
        raise ConfigurationError(f"EBN0 stop {stop:g} is below start {start:g}")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return tuple(round(start + k * step, 10) for k in range(count))


@dataclass(kw_only=True, frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    preset: str | None = None
    config_path: str | None = None
    mode: Mode = Mode.BOUND
    detector: DetectorKind = DetectorKind.JMLD
    sicd_ordering: SicOrdering = SicOrdering.INSTANTANEOUS
    ebn0: str = DEFAULT_EBN0
    seed: int = 0
    min_errors: int = DEFAULT_MIN_ERRORS
    max_symbols: int | None = None
    block_len: int = 1
    fmt: str = "csv"
    out: str | None = None
    grid: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if (self.preset is None) == (self.config_path is None):
            raise UsageError("exactly one scenario source (preset or config file) is required")
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "detector", DetectorKind(self.detector))
        object.__setattr__(self, "sicd_ordering", SicOrdering(self.sicd_ordering))
        if self.fmt not in ("csv", "json"):
            raise ConfigurationError(f"FORMAT must be csv or json, got {self.fmt!r}")
        object.__setattr__(self, "grid", parse_grid(self.ebn0))

    def replace(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)

    def symbol_cap(self) -> int:
        if self.max_symbols is not None:
            return self.max_symbols
        if math.prod(self.scenario.orders) >= LARGE_SEARCH:
            logger.warning(
                "JMLD searches %d hypotheses per symbol; symbol cap reduced to %d",
                math.prod(self.scenario.orders),
                REDUCED_MAX_SYMBOLS,
            )
            return REDUCED_MAX_SYMBOLS
        return DEFAULT_MAX_SYMBOLS

    def plan(self, detectors: tuple[DetectorKind, ...] | None = None) -> SimPlan:
        return SimPlan(
            scenario=self.scenario.build(),
            ebn0_grid=self.grid,
            detectors=detectors or (self.detector,),
            min_bit_errors=self.min_errors,
            max_symbols=self.symbol_cap(),
            block_len=self.block_len,
            seed=self.seed,
            sic_ordering=self.sicd_ordering,
        )


CONFIG_KEYS = (
    "MODULATION",
    "ANTENNAS",
    "BIT_ENERGY",
    "ORDERS",
    "GAINS_DB",
    "POWERS_DB",
    "MODE",
    "DETECTOR",
    "SICD_ORDERING",
    "EBN0",
    "SEED",
    "MIN_ERRORS",
    "MAX_SYMBOLS",
    "BLOCK_LEN",
    "FORMAT",
    "OUT",
)


def _field(values: dict, key: str, convert, constraint: str, default=None):
    raw = values.get(key)
    if raw is None or raw.strip() == "":
        if default is None:
            raise ConfigurationError(f"{key} is required ({constraint})")
        return default
    try:
        return convert(raw.strip())
    except (ValueError, TypeError):
        raise ConfigurationError(f"{key}={raw!r} is invalid: {constraint}") from None


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _enum(kind):
    def convert(text):
        return kind(text.lower())

    return convert


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(text)
    return value


def parse_config(path: str | os.PathLike) -> tuple[Scenario, RunConfig]:
    """Reads and validates a key-value config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file {path} does not exist")
    values = dotenv_values(path)
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigurationError(
            f"unknown config key {unknown[0]}; valid keys: {', '.join(CONFIG_KEYS)}"
        )

    orders = _field(values, "ORDERS", _int_list, "comma-separated modulation orders")
    n = len(orders)
    zeros = tuple(0.0 for _ in orders)
    gains_db = _field(values, "GAINS_DB", _float_list, "comma-separated gains in dB", zeros)
    powers_db = _field(values, "POWERS_DB", _float_list, "comma-separated powers in dB", zeros)
    for key, items in (("GAINS_DB", gains_db), ("POWERS_DB", powers_db)):
        if len(items) != n:
            raise ConfigurationError(f"{key} has {len(items)} entries but ORDERS has {n}")

    # same linear P*sigma^2 product that Scenario validates
    strengths = [db_to_linear(p) * db_to_linear(g) for g, p in zip(gains_db, powers_db)]
    ranking = sorted(range(n), key=lambda k: -strengths[k])
    if ranking != list(range(n)):
        logger.warning(
            "users in %s reordered by received strength: %s",
            path,
            ", ".join(str(k + 1) for k in ranking),
        )
        orders = tuple(orders[k] for k in ranking)
        gains_db = tuple(gains_db[k] for k in ranking)
        powers_db = tuple(powers_db[k] for k in ranking)

    spec = ScenarioSpec(
        modulation=_field(values, "MODULATION", _enum(Modulation), "qam or pam", Modulation.QAM),
        antennas=_field(values, "ANTENNAS", _positive_int, "a positive integer"),
        bit_energy=_field(values, "BIT_ENERGY", float, "a positive number", 1.0),
        orders=orders,
        gains_db=gains_db,
        powers_db=powers_db,
    )
    scenario = spec.build()
    max_symbols = values.get("MAX_SYMBOLS")
    config = RunConfig(
        scenario=spec,
        config_path=str(path),
        mode=_field(values, "MODE", _enum(Mode), "bound, simulate or compare", Mode.BOUND),
        detector=_field(values, "DETECTOR", _enum(DetectorKind), "jmld or sicd", DetectorKind.JMLD),
        sicd_ordering=_field(
            values,
            "SICD_ORDERING",
            _enum(SicOrdering),
            "instantaneous or statistical",
            SicOrdering.INSTANTANEOUS,
        ),
        ebn0=_field(values, "EBN0", str, "start:stop:step in dB", DEFAULT_EBN0),
        seed=_field(values, "SEED", int, "a 64-bit unsigned integer", 0),
        min_errors=_field(values, "MIN_ERRORS", _positive_int, "a positive integer", DEFAULT_MIN_ERRORS),
        max_symbols=(
            _field(values, "MAX_SYMBOLS", _positive_int, "a positive integer") if max_symbols else None
        ),
        block_len=_field(values, "BLOCK_LEN", _positive_int, "a positive integer", 1),
        fmt=_field(values, "FORMAT", str.lower, "csv or json", "csv"),
        out=values.get("OUT") or None,
    )
    return scenario, config


def _join(values) -> str:
    return ",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in values)


def dump_config(config: RunConfig) -> str:
    """Config file text that parse_config reads back to the same scenario and run."""
    spec = config.scenario
    lines = [
        f"MODULATION={spec.modulation.value}",
        f"ANTENNAS={spec.antennas}",
        f"BIT_ENERGY={spec.bit_energy!r}",
        f"ORDERS={_join(spec.orders)}",
        f"GAINS_DB={_join(spec.gains_db)}",
        f"POWERS_DB={_join(spec.powers_db)}",
        f"MODE={config.mode.value}",
        f"DETECTOR={config.detector.value}",
        f"SICD_ORDERING={config.sicd_ordering.value}",
        f"EBN0={config.ebn0}",
        f"SEED={config.seed}",
        f"MIN_ERRORS={config.min_errors}",
    ]
    if config.max_symbols is not None:
        lines.append(f"MAX_SYMBOLS={config.max_symbols}")
    lines += [f"BLOCK_LEN={config.block_len}", f"FORMAT={config.fmt}"]
    if config.out:
        lines.append(f"OUT={config.out}")
    return "\n".join(lines) + "\n"


def term_budget() -> int:
    """Post-deduplication term budget, NOMA_TERM_BUDGET overrides the default."""
    value = os.getenv("NOMA_TERM_BUDGET")
    if not value:
        return DEFAULT_TERM_BUDGET
    try:
        budget = int(float(value))
    except ValueError:
        budget = 0
    if budget < 1:
        raise ConfigurationError(f"NOMA_TERM_BUDGET must be a positive integer, got {value!r}")
    return budget


def log_level() -> str:
    return os.getenv("NOMA_LOG_LEVEL", "WARNING").upper()
