"""
Union-bound BER analysis of joint ML detection for uplink NOMA with Gray-coded
I-PAM or square M-QAM users over i.i.d. Rayleigh fading with L-branch MRC.

Distances are kept in units of 2*d_k as Gaussian integers. For a target user n
the erroneous composites are enumerated row-major with user 1 outermost: user n
runs over the half of its constellation whose first label bit is 1, every other
user k over all of its symbols. Each pairwise event then has average branch SNR

    Gamma = sum_k gamma_k * |D_k(m)|^2

and averages to E[Q(sqrt(Omega))] with Omega ~ Erlang(L, Gamma).
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .base import ConfigurationError, Modulation, ResourceError, Source, UsageError
from .channel import ChannelRealization, Scenario
from .constellation import build_constellation, check_order
from .curve import BerCurve, BerPoint

logger = logging.getLogger(__name__)

DEFAULT_TERM_BUDGET = 10**8
BRUTE_FORCE_LIMIT = 1 << 20


def _check_axis_order(order: int) -> None:
    try:
        check_order(order, Modulation.PAM)
    except ConfigurationError as exc:
        raise ConfigurationError(f"axis order: {exc.message}") from None


def pam_half_distances(order: int, *, signed: bool = False) -> np.ndarray:
    """
    Matrix E of shape (I/2, I/2): E[j, i] = |i - (j + I/2)| (1-based i, j), the
    spacing between tested level i and erroneous level j + I/2.
    """
    _check_axis_order(order)
    half = order // 2
    i = np.arange(1, half + 1)[None, :]
    j = np.arange(1, half + 1)[:, None]
    diff = i - (j + half)
    return diff if signed else np.abs(diff)


def pam_all_distances(order: int, *, signed: bool = False) -> np.ndarray:
    """Matrix d of shape (I, I/2): d[j, i] = |i - j|, tested level i against every level j."""
    _check_axis_order(order)
    i = np.arange(1, order // 2 + 1)[None, :]
    j = np.arange(1, order + 1)[:, None]
    diff = i - j
    return diff if signed else np.abs(diff)


def qam_half_distances(axis_order: int, *, signed: bool = False) -> np.ndarray:
    """E_qam = E_pam (x) 1_(I, I/2) + j * 1_(I/2, I/2) (x) d_pam, shape (M/2, M/4)."""
    half = pam_half_distances(axis_order, signed=signed)
    full = pam_all_distances(axis_order, signed=signed)
    rows = axis_order // 2
    return np.kron(half, np.ones((axis_order, rows))) + 1j * np.kron(
        np.ones((rows, rows)), full
    )


def qam_all_distances(axis_order: int, *, signed: bool = False) -> np.ndarray:
    """d_qam = d_pam (x) 1_(I, I/2) + j * 1_(I, I/2) (x) d_pam, shape (M, M/4)."""
    full = pam_all_distances(axis_order, signed=signed)
    ones = np.ones((axis_order, axis_order // 2))
    return np.kron(full, ones) + 1j * np.kron(ones, full)


@dataclass(kw_only=True, frozen=True, eq=False)
class DistanceMatrixPam:
    half: np.ndarray
    all: np.ndarray


@dataclass(kw_only=True, frozen=True, eq=False)
class DistanceMatrixQam:
    half: np.ndarray
    all: np.ndarray


def distance_matrices(order: int, kind: Modulation, *, signed: bool = False):
    """Per-user distance matrices for a PAM order or a QAM order M (axis sqrt(M))."""
    check_order(order, kind)
    if kind == Modulation.PAM:
        return DistanceMatrixPam(
            half=pam_half_distances(order, signed=signed),
            all=pam_all_distances(order, signed=signed),
        )
    axis = math.isqrt(order)
    return DistanceMatrixQam(
        half=qam_half_distances(axis, signed=signed),
        all=qam_all_distances(axis, signed=signed),
    )


def tested_range(order: int, kind: Modulation) -> int:
    """Number of tested symbols: the negative half (PAM) or one quadrant (QAM)."""
    return order // 2 if kind == Modulation.PAM else order // 4


def raw_term_count(orders, kind: Modulation) -> int:
    return math.prod(tested_range(o, kind) for o in orders) * (math.prod(orders) // 2)


@dataclass(kw_only=True, frozen=True, eq=False)
class CompositeDistanceSet:
    """The N vectors D_k for one (target, tested tuple); vectors has shape (N, prod(M)/2)."""

    target: int
    indices: tuple[int, ...]
    vectors: np.ndarray

    def as_multiset(self) -> Counter:
        """Multiset of per-m tuples ((Re D_1, Im D_1), ..., (Re D_N, Im D_N))."""
        re = np.rint(self.vectors.real).astype(np.int64)
        im = np.rint(self.vectors.imag).astype(np.int64)
        return Counter(
            tuple(zip(re[:, m].tolist(), im[:, m].tolist())) for m in range(re.shape[1])
        )

    def squared_norms(self) -> np.ndarray:
        """Exact |D_k(m)|^2 as int64, shape (N, prod(M)/2)."""
        re = np.rint(self.vectors.real).astype(np.int64)
        im = np.rint(self.vectors.imag).astype(np.int64)
        return re * re + im * im


def _check_tuple(target: int, indices, orders, kind: Modulation) -> None:
    if len(indices) != len(orders):
        raise UsageError(f"{len(indices)} tested indices for {len(orders)} users")
    if not 0 <= target < len(orders):
        raise UsageError(f"target user {target} outside 0..{len(orders) - 1}")
    for k, (index, order) in enumerate(zip(indices, orders)):
        limit = tested_range(order, kind)
        if not 0 <= index < limit:
            raise UsageError(f"tested index {index} of user {k} outside 0..{limit - 1}")


def composite_distance_vectors(
    target: int,
    indices,
    orders,
    kind: Modulation = Modulation.QAM,
    *,
    signed: bool = False,
) -> CompositeDistanceSet:
    """Kronecker assembly of D_k for the tested tuple `indices` (zero-based)."""
    kind = Modulation(kind)
    orders = tuple(int(o) for o in orders)
    indices = tuple(int(i) for i in indices)
    _check_tuple(target, indices, orders, kind)

    vectors = []
    for k, order in enumerate(orders):
        matrices = distance_matrices(order, kind, signed=signed)
        before = math.prod(orders[:k])
        after = math.prod(orders[k + 1 :])
        if k == target:
            column = matrices.half[:, indices[k]]
        elif k < target:
            column = matrices.all[:, indices[k]]
            after //= 2
        else:
            column = matrices.all[:, indices[k]]
            before //= 2
        vectors.append(np.kron(np.ones(before), np.kron(column, np.ones(after))))
    return CompositeDistanceSet(
        target=target, indices=indices, vectors=np.array(vectors, dtype=complex)
    )


def brute_force_distances(
    target: int,
    indices,
    orders,
    kind: Modulation = Modulation.QAM,
    *,
    signed: bool = False,
) -> CompositeDistanceSet:
    """
    Direct enumeration of the erroneous composites from constellation geometry:
    the transmitted tuple holds each user's tested symbol, the decided tuple
    holds any symbol with first bit 1 for the target and any symbol for the
    others. Differences are (s_tx - s_dec) / (2 d_k).
    """
    kind = Modulation(kind)
    orders = tuple(int(o) for o in orders)
    indices = tuple(int(i) for i in indices)
    _check_tuple(target, indices, orders, kind)
    if math.prod(orders) > BRUTE_FORCE_LIMIT:
        raise ResourceError(
            f"brute-force enumeration of {math.prod(orders)} composites exceeds {BRUTE_FORCE_LIMIT}"
        )

    differences = []
    for k, (order, index) in enumerate(zip(orders, indices)):
        constellation = build_constellation(order, 1.0, kind)
        if kind == Modulation.QAM:
            axis = constellation.axis_order
            a, b = divmod(index, axis // 2)
            sent = a * axis + b
        else:
            sent = index
        if constellation.labels[sent, 0] != 0:
            raise UsageError(f"tested symbol {index} of user {k} does not have first bit 0")
        candidates = np.arange(order)
        if k == target:
            candidates = candidates[constellation.labels[:, 0] == 1]
        points = constellation.complex_points
        diff = (points[sent] - points[candidates]) / (2 * constellation.scale)
        diff = np.rint(diff.real) + 1j * np.rint(diff.imag)
        if not signed:
            diff = np.abs(diff.real) + 1j * np.abs(diff.imag)
        differences.append(diff)

    grids = np.meshgrid(*differences, indexing="ij")
    return CompositeDistanceSet(
        target=target,
        indices=indices,
        vectors=np.array([grid.reshape(-1) for grid in grids], dtype=complex),
    )


@dataclass(kw_only=True, frozen=True, eq=False)
class GammaSpectrum:
    """
    Deduplicated Gamma spectrum of one target user. Row t says that
    `multiplicities[t]` pairwise events have |D_k|^2 = coefficients[t, k].
    """

    target: int
    kind: Modulation
    orders: tuple[int, ...]
    coefficients: np.ndarray
    multiplicities: np.ndarray

    def __len__(self) -> int:
        return self.coefficients.shape[0]

    @property
    def total_multiplicity(self) -> int:
        return int(self.multiplicities.sum())

    def gammas(self, user_gamma: np.ndarray) -> np.ndarray:
        """Gamma of every entry for the per-user gamma values."""
        return self.coefficients @ np.asarray(user_gamma, dtype=float)

    def to_text(self) -> str:
        lines = [
            ",".join(str(c) for c in row) + f" {count}"
            for row, count in zip(self.coefficients.tolist(), self.multiplicities.tolist())
        ]
        return "\n".join(lines) + "\n"


def _factorized_spectrum(target, orders, kind, budget) -> tuple[np.ndarray, np.ndarray]:
    values, counts = [], []
    for k, order in enumerate(orders):
        matrices = distance_matrices(order, kind)
        matrix = matrices.half if k == target else matrices.all
        norms = np.rint(matrix.real).astype(np.int64) ** 2 + np.rint(
            np.imag(matrix)
        ).astype(np.int64) ** 2
        unique, count = np.unique(norms, return_counts=True)
        values.append(unique)
        counts.append(count.astype(np.int64))
    size = math.prod(len(v) for v in values)
    if size > budget:
        raise ResourceError(f"spectrum has {size} distinct terms, budget is {budget}")
    coefficients = np.stack(
        [grid.reshape(-1) for grid in np.meshgrid(*values, indexing="ij")], axis=1
    )
    multiplicities = np.ones(size, dtype=np.int64)
    for grid in np.meshgrid(*counts, indexing="ij"):
        multiplicities *= grid.reshape(-1)
    return coefficients, multiplicities


def _tested_tuples(orders, kind):
    return itertools.product(*(range(tested_range(o, kind)) for o in orders))


def _direct_spectrum(target, orders, kind, budget) -> tuple[np.ndarray, np.ndarray]:
    raw = raw_term_count(orders, kind)
    if raw > budget:
        raise ResourceError(f"direct spectrum needs {raw} raw terms, budget is {budget}")
    totals: Counter = Counter()
    for indices in _tested_tuples(orders, kind):
        norms = composite_distance_vectors(target, indices, orders, kind).squared_norms()
        unique, count = np.unique(norms.T, axis=0, return_counts=True)
        totals.update({tuple(row): int(c) for row, c in zip(unique.tolist(), count)})
    keys = sorted(totals)
    return (
        np.array(keys, dtype=np.int64).reshape(len(keys), len(orders)),
        np.array([totals[key] for key in keys], dtype=np.int64),
    )


def gamma_spectrum(
    target: int,
    scenario: Scenario,
    kind: Modulation | None = None,
    *,
    method: str = "factorized",
    budget: int = DEFAULT_TERM_BUDGET,
) -> GammaSpectrum:
    """
    Coefficient tuples (|D_1(m)|^2, ..., |D_N(m)|^2) over every tested tuple and
    every m, aggregated by tuple. "factorized" builds the product of per-user
    histograms; "direct" walks the tuples and m one by one.
    """
    kind = Modulation(kind or scenario.modulation)
    orders = scenario.orders
    for order in orders:
        check_order(order, kind)
    if not 0 <= target < len(orders):
        raise UsageError(f"target user {target} outside 0..{len(orders) - 1}")
    if method == "factorized":
        coefficients, multiplicities = _factorized_spectrum(target, orders, kind, budget)
    elif method == "direct":
        coefficients, multiplicities = _direct_spectrum(target, orders, kind, budget)
    else:
        raise UsageError(f"unknown spectrum method {method!r}")
    spectrum = GammaSpectrum(
        target=target,
        kind=kind,
        orders=orders,
        coefficients=coefficients,
        multiplicities=multiplicities,
    )
    logger.info(
        "user %d spectrum: %d terms after deduplication (%d raw)",
        target + 1,
        len(spectrum),
        spectrum.total_multiplicity,
    )
    return spectrum


def q_function(x):
    """Gaussian tail Q(x) = erfc(x / sqrt(2)) / 2."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2))


def chi_square_pdf(zeta, branches: int, gamma: float):
    """Density zeta^(L-1) exp(-zeta/Gamma) / ((L-1)! Gamma^L) of the MRC output SNR."""
    if not gamma > 0:
        raise UsageError(f"Gamma must be positive, got {gamma}")
    if branches < 1:
        raise UsageError(f"branch count must be at least 1, got {branches}")
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta < 0):
        raise UsageError("zeta must be non-negative")
    result = stats.gamma.pdf(zeta, a=branches, scale=gamma)
    return float(result) if result.ndim == 0 else result


def avg_q_over_fading(gamma, branches: int):
    """
    E[Q(sqrt(Omega))] for Omega with the L-branch Erlang density of mean L*Gamma:

        (1/2) [1 - sum_{l<L} C(2l, l) (1 + 2/Gamma)^(-1/2) (2 Gamma + 4)^(-l)]

    evaluated as ((1-mu)/2)^L sum_{l<L} C(L-1+l, l) ((1+mu)/2)^l with
    mu = sqrt(Gamma / (Gamma + 2)), which keeps full relative precision when the
    result is far below machine epsilon.
    """
    if not isinstance(branches, (int, np.integer)) or branches < 1:
        raise UsageError(f"branch count must be a positive integer, got {branches}")
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0) or np.any(np.isnan(gamma)):
        raise UsageError("Gamma must be non-negative")
    mu = np.sqrt(gamma / (gamma + 2))
    lower = 1 / ((gamma + 2) * (1 + mu))
    upper = (1 + mu) / 2
    total = sum(special.comb(branches - 1 + l, l, exact=True) * upper**l for l in range(branches))
    result = lower**branches * total
    return float(result) if result.ndim == 0 else result


def user_gammas(scenario: Scenario, kind: Modulation | None = None) -> np.ndarray:
    """
    gamma_k = 6 Eb log2(I)/(I^2-1) * P sigma^2/N0 (PAM) or
    3 Eb log2(M)/(M-1) * P sigma^2/N0 (QAM).
    """
    kind = Modulation(kind or scenario.modulation)
    orders = np.array(scenario.orders, dtype=float)
    if kind == Modulation.PAM:
        energy = 6 * scenario.bit_energy * np.log2(orders) / (orders**2 - 1)
    else:
        energy = 3 * scenario.bit_energy * np.log2(orders) / (orders - 1)
    strength = scenario.powers * scenario.channel_vars
    with np.errstate(divide="ignore"):
        return energy * strength / scenario.noise_psd


def bound_prefactor(target: int, orders, kind: Modulation) -> float:
    """Leading constant multiplying the sum of [1 - ...] brackets."""
    order = orders[target]
    if kind == Modulation.PAM:
        lead = (order - 1) / (2 * math.log2(order))
        return lead * math.prod(2 / o for o in orders)
    lead = (math.isqrt(order) - 1) / math.log2(order)
    return lead * math.prod(4 / o for o in orders)


def ber_from_spectrum(spectrum: GammaSpectrum, scenario: Scenario) -> float:
    if scenario.noise_psd == 0:
        return 0.0
    brackets = 2 * avg_q_over_fading(
        spectrum.gammas(user_gammas(scenario, spectrum.kind)), scenario.antennas
    )
    prefactor = bound_prefactor(spectrum.target, spectrum.orders, spectrum.kind)
    return prefactor * float(np.dot(spectrum.multiplicities.astype(float), brackets))


def ber_bound(
    target: int,
    scenario: Scenario,
    kind: Modulation | None = None,
    *,
    dedup: bool = True,
    budget: int = DEFAULT_TERM_BUDGET,
) -> float:
    """
    Average BER upper bound of user `target`. With dedup the sum runs over the
    Gamma spectrum; without it every tested tuple and m is evaluated directly.
    """
    kind = Modulation(kind or scenario.modulation)
    if dedup:
        spectrum = gamma_spectrum(target, scenario, kind, budget=budget)
        return ber_from_spectrum(spectrum, scenario)

    orders = scenario.orders
    raw = raw_term_count(orders, kind)
    if raw > budget:
        raise ResourceError(f"bound needs {raw} raw terms, budget is {budget}")
    if scenario.noise_psd == 0:
        return 0.0
    gammas = user_gammas(scenario, kind)
    total = 0.0
    for indices in _tested_tuples(orders, kind):
        norms = composite_distance_vectors(target, indices, orders, kind).squared_norms()
        total += float(np.sum(2 * avg_q_over_fading(gammas @ norms, scenario.antennas)))
    return bound_prefactor(target, orders, kind) * total


def conditional_union_bound(
    target: int,
    realization: ChannelRealization,
    scenario: Scenario,
    kind: Modulation | None = None,
    *,
    budget: int = DEFAULT_TERM_BUDGET,
) -> float:
    """
    Union bound for one fixed channel realization, Q(||Dt|| / sqrt(2 N0)) with
    Dt = sum_k 2 d_k h_k D_k(m). Signed distances are used so the value is the
    exact fixed-channel union bound.
    """
    kind = Modulation(kind or scenario.modulation)
    orders = scenario.orders
    if realization.n_users != len(orders):
        raise UsageError(f"realization has {realization.n_users} users, scenario {len(orders)}")
    raw = raw_term_count(orders, kind)
    if raw > budget:
        raise ResourceError(f"conditional bound needs {raw} raw terms, budget is {budget}")
    if scenario.noise_psd == 0:
        return 0.0
    scales = np.array(
        [build_constellation(o, scenario.bit_energy, kind).scale for o in orders]
    )
    weighted = 2 * scales[:, None] * realization.effective
    total = 0.0
    for indices in _tested_tuples(orders, kind):
        vectors = composite_distance_vectors(target, indices, orders, kind, signed=True).vectors
        dt = vectors.T @ weighted
        distance = np.sqrt((np.abs(dt) ** 2).sum(axis=1))
        total += float(np.sum(2 * q_function(distance / math.sqrt(2 * scenario.noise_psd))))
    return bound_prefactor(target, orders, kind) * total


def bound_curve(
    scenario: Scenario,
    ebn0_grid,
    kind: Modulation | None = None,
    *,
    budget: int = DEFAULT_TERM_BUDGET,
) -> BerCurve:
    """Analytical-bound curve for every user, one spectrum per user reused over the grid."""
    kind = Modulation(kind or scenario.modulation)
    points = []
    spectra = [gamma_spectrum(n, scenario, kind, budget=budget) for n in range(scenario.n_users)]
    for ebn0 in ebn0_grid:
        at_point = scenario.at_ebn0(ebn0)
        for spectrum in spectra:
            value = ber_from_spectrum(spectrum, at_point)
            if value > 1:
                logger.warning(
                    "bound for user %d at %.2f dB is %.3g (> 1, union bound is loose here)",
                    spectrum.target + 1,
                    ebn0,
                    value,
                )
            points.append(
                BerPoint(ebn0_db=float(ebn0), user=spectrum.target + 1, ber=value, source=Source.BOUND)
            )
    return BerCurve(points=tuple(points))
