"""
Uplink channel model: y = sum_n g_n sqrt(P_n) x_n + w at an L-antenna receiver.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .base import ConfigurationError, Modulation, UsageError
from .constellation import Constellation, build_constellation, check_order


def db_to_linear(value_db: float) -> float:
    return 10 ** (value_db / 10)


@dataclass(kw_only=True, frozen=True)
class UserSpec:
    """One uplink user: modulation order, transmit power and channel variance (linear)."""

    mod_order: int
    power: float = 1.0
    channel_var: float = 1.0

    def __post_init__(self):
        if not self.power > 0:
            raise ConfigurationError(f"user power must be positive, got {self.power}")
        if not self.channel_var > 0:
            raise ConfigurationError(f"channel variance must be positive, got {self.channel_var}")

    @property
    def strength(self) -> float:
        """Average received strength P * sigma^2."""
        return self.power * self.channel_var


@dataclass(kw_only=True, frozen=True)
class Scenario:
    users: tuple[UserSpec, ...]
    antennas: int
    bit_energy: float = 1.0
    noise_psd: float = 1.0
    modulation: Modulation = Modulation.QAM

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "modulation", Modulation(self.modulation))
        if not self.users:
            raise ConfigurationError("a scenario needs at least one user")
        if not isinstance(self.antennas, int) or self.antennas < 1:
            raise ConfigurationError(f"antenna count must be a positive integer, got {self.antennas}")
        if not self.bit_energy > 0:
            raise ConfigurationError(f"bit energy must be positive, got {self.bit_energy}")
        if not self.noise_psd >= 0:
            raise ConfigurationError(f"noise PSD must be non-negative, got {self.noise_psd}")
        for n, user in enumerate(self.users, start=1):
            try:
                check_order(user.mod_order, self.modulation)
            except ConfigurationError as exc:
                raise ConfigurationError(f"user {n}: {exc.message}") from None
        strengths = [user.strength for user in self.users]
        if any(a < b for a, b in zip(strengths, strengths[1:])):
            raise ConfigurationError(
                "users must be ordered by non-increasing P*sigma^2, got "
                + ", ".join(f"{s:.4g}" for s in strengths)
            )

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(user.mod_order for user in self.users)

    @property
    def powers(self) -> np.ndarray:
        return np.array([user.power for user in self.users])

    @property
    def channel_vars(self) -> np.ndarray:
        return np.array([user.channel_var for user in self.users])

    @property
    def ebn0_db(self) -> float:
        if self.noise_psd == 0:
            return math.inf
        return 10 * math.log10(self.bit_energy / self.noise_psd)

    def at_ebn0(self, ebn0_db: float) -> "Scenario":
        """Returns a copy whose N0 gives the requested Eb/N0."""
        return replace(self, noise_psd=self.bit_energy / db_to_linear(ebn0_db))

    def replace(self, **kwargs) -> "Scenario":
        return replace(self, **kwargs)

    def constellations(self) -> list[Constellation]:
        return [
            build_constellation(order, self.bit_energy, self.modulation)
            for order in self.orders
        ]


@dataclass(kw_only=True, frozen=True, eq=False)
class ChannelRealization:
    """Per-user gains g_n (N, L) and effective gains h_n = sqrt(P_n) g_n."""

    gains: np.ndarray
    effective: np.ndarray = field(init=False)
    powers: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        powers = np.asarray(self.powers, dtype=float)
        if gains.ndim != 2 or powers.shape != (gains.shape[0],):
            raise UsageError(
                f"gains of shape {gains.shape} do not match {powers.shape[0] if powers.ndim else 0} powers"
            )
        effective = np.sqrt(powers)[:, None] * gains
        for array in (gains, powers, effective):
            array.flags.writeable = False
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "effective", effective)

    @property
    def n_users(self) -> int:
        return self.gains.shape[0]

    @property
    def antennas(self) -> int:
        return self.gains.shape[1]


def complex_normal(rng: np.random.Generator, shape, variance) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples, variance/2 per real dimension."""
    std = np.sqrt(np.asarray(variance, dtype=float) / 2)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_gains(rng: np.random.Generator, scenario: Scenario, count: int) -> np.ndarray:
    """Draws `count` independent gain sets, shape (count, N, L)."""
    shape = (count, scenario.n_users, scenario.antennas)
    return complex_normal(rng, shape, scenario.channel_vars[None, :, None])


def sample_channel(rng: np.random.Generator, scenario: Scenario) -> ChannelRealization:
    return ChannelRealization(gains=sample_gains(rng, scenario, 1)[0], powers=scenario.powers)


def superimpose(realization: ChannelRealization, symbols) -> np.ndarray:
    """Noiseless received vector sum_n h_n x_n."""
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.shape != (realization.n_users,):
        raise UsageError(
            f"expected {realization.n_users} symbols (one per user), got shape {symbols.shape}"
        )
    return symbols @ realization.effective


def add_noise(signal, noise_psd: float, rng: np.random.Generator) -> np.ndarray:
    """Adds complex AWGN with per-component variance N0."""
    if not noise_psd >= 0:
        raise ConfigurationError(f"noise PSD must be non-negative, got {noise_psd}")
    signal = np.asarray(signal, dtype=complex)
    if noise_psd == 0:
        return signal.copy()
    return signal + complex_normal(rng, signal.shape, noise_psd)
