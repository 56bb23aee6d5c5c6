"""Closed-form channel models for the SNS and SCF key-generation protocols.

Both channels share the same symmetric geometry: an untrusted relay halfway
between the two parties, fiber loss ``alpha`` dB/km, detector efficiency
``eta_d`` and dark-count probability ``p_d`` per window per detector.  The
functions here evaluate the per-window effective-event (exactly one
detector clicks) rates and fold them into the pre-pairing observables
``(N_t, E, Delta_un, e_ph)`` consumed by the pairing iteration.

All functions are pure; counts are expected values (floats).
"""

import math
from dataclasses import dataclass

from .errors import DomainError, NoDataError
from .pairing import ChannelObservables

__all__ = [
    "SystemParams",
    "SnsParams",
    "ScfParams",
    "WindowRates",
    "ScfPhaseDetail",
    "bessel_i0",
    "sns_window_rates",
    "sns_observables",
    "scf_window_rates",
    "scf_observables",
    "scf_phase_bound",
]

# Power series below this argument, asymptotic expansion above.  At the
# crossover the asymptotic tail is ~e^(-2x), far below float64 precision.
_I0_SERIES_CUTOFF = 40.0


@dataclass(frozen=True)
class SystemParams:
    """Fixed experimental constants.

    ``distance_km`` is the full sender-receiver distance; the relay sits
    at the midpoint, so each arm spans half of it.  ``epsilon`` is the
    security-level target and ``g`` the forgery-bound split parameter.
    """

    alpha: float = 0.2
    eta_d: float = 0.8
    p_d: float = 1e-11
    e_d: float = 0.0
    distance_km: float = 0.0
    epsilon: float = 1e-5
    g: float = 1e-12

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha!r}")
        if self.distance_km < 0:
            raise DomainError(
                f"distance_km must be >= 0, got {self.distance_km!r}")
        for name in ("eta_d", "p_d", "e_d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")

    def eta(self):
        """Total one-arm efficiency: fiber transmission times eta_d."""
        return 10.0 ** (-self.alpha * (self.distance_km / 2.0) / 10.0) \
            * self.eta_d


@dataclass(frozen=True)
class SnsParams:
    """Protocol parameters of the SNS channel.

    ``mu`` is the signal intensity, ``q`` the send probability inside a
    signal window, ``p_z`` the signal-window probability and ``n_pulses``
    the total number of time windows.
    """

    mu: float
    q: float
    p_z: float
    n_pulses: float = 1e12

    def __post_init__(self):
        if self.mu <= 0:
            raise DomainError(f"mu must be > 0, got {self.mu!r}")
        for name in ("q", "p_z"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class ScfParams:
    """Protocol parameters of the SCF channel.

    ``gamma_v`` is the fraction of windows sacrificed to the test subset
    used for parameter estimation.
    """

    mu: float
    q: float
    gamma_v: float = 0.1
    n_pulses: float = 1e12

    def __post_init__(self):
        if self.mu <= 0:
            raise DomainError(f"mu must be > 0, got {self.mu!r}")
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"q must lie in [0, 1], got {self.q!r}")
        if not 0.0 < self.gamma_v < 1.0:
            raise DomainError(
                f"gamma_v must lie in (0, 1), got {self.gamma_v!r}")


@dataclass(frozen=True)
class WindowRates:
    """Per-window, per-detector effective-event rates.

    Keys are window labels ("B", "O" plus "C0"/"C1" for SNS or "Z" for
    SCF); values are probabilities in [0, 1].
    """

    left: dict
    right: dict

    def total(self, window):
        return self.left[window] + self.right[window]


@dataclass(frozen=True)
class ScfPhaseDetail:
    """Diagnostics of the SCF phase-error upper bound."""

    e_ph_raw: float
    e_ph: float
    clamped: bool
    s_lower_clamped: bool


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Power series sum_k (x/2)^(2k) / (k!)^2 for small arguments, standard
    large-argument expansion e^x / sqrt(2 pi x) * sum_k a_k / x^k above
    the crossover; relative error <= 1e-12 over the tested grid.
    """
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x!r}")
    if x <= _I0_SERIES_CUTOFF:
        total = 1.0
        term = 1.0
        quarter_sq = 0.25 * x * x
        for k in range(1, 200):
            term *= quarter_sq / (k * k)
            total += term
            if term < total * 1e-18:
                break
        return total
    total = 1.0
    term = 1.0
    for k in range(1, 60):
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        if term >= 1.0:  # asymptotic series started diverging
            break
        total += term
        if term < total * 1e-18:
            break
    return math.exp(x) / math.sqrt(2.0 * math.pi * x) * total


def sns_window_rates(sys_params, proto):
    """Per-detector effective-event rates in the four SNS signal-window
    categories (both-send B, neither-send O, single-send C0/C1).

    Both detectors see identical rates in the symmetric setup.
    """
    eta = sys_params.eta()
    p_d = sys_params.p_d
    mu = proto.mu
    one = 1.0 - p_d
    s_b = one * math.exp(-eta * mu) * bessel_i0(eta * mu) \
        - one * one * math.exp(-2.0 * eta * mu)
    s_c = one * math.exp(-eta * mu / 2.0) - one * one * math.exp(-eta * mu)
    s_o = p_d * one
    rates = {"B": s_b, "C0": s_c, "C1": s_c, "O": s_o}
    return WindowRates(left=dict(rates), right=dict(rates))


def sns_observables(sys_params, proto):
    """Pre-pairing observables of the SNS channel (infinite-decoy limit).

    Raises :class:`NoDataError` when the setting yields no sifted bits.
    """
    rates = sns_window_rates(sys_params, proto)
    n = proto.n_pulses
    q = proto.q
    p_z = proto.p_z
    n_b = n * p_z ** 2 * q ** 2 * rates.total("B")
    n_o = n * p_z ** 2 * (1.0 - q) ** 2 * rates.total("O")
    n_c0 = n * p_z ** 2 * q * (1.0 - q) * rates.total("C0")
    n_c1 = n * p_z ** 2 * q * (1.0 - q) * rates.total("C1")
    n_t = n_b + n_o + n_c0 + n_c1
    if n_t <= 0.0:
        raise NoDataError("no sifted bits at this setting")
    eta = sys_params.eta()
    p_d = sys_params.p_d
    s_1 = (1.0 - p_d) * (eta + 2.0 * p_d * (1.0 - eta))
    n_1 = n * p_z ** 2 * q * (1.0 - q) * proto.mu * math.exp(-proto.mu) * s_1
    delta_un = min(1.0, 2.0 * n_1 / n_t)
    e_ph0 = p_d * (1.0 - p_d) * (1.0 - eta) / s_1 if s_1 > 0.0 else 0.5
    e_ph = sys_params.e_d * (1.0 - 2.0 * e_ph0) + e_ph0
    return ChannelObservables(
        n_t=n_t,
        bit_flip=(n_b + n_o) / n_t,
        untagged_frac=delta_un,
        phase_flip=e_ph,
    )


def scf_window_rates(sys_params, proto):
    """Per-detector effective-event rates in the SCF window categories,
    after misalignment mixing.

    The bare rates send all both-send (B-window) light to the left
    detector; misalignment ``e_d`` swaps a fraction of events between the
    detectors: S'^d = (1 - e_d) S^d + e_d S^d'.
    """
    eta = sys_params.eta()
    p_d = sys_params.p_d
    mu = proto.mu
    one = 1.0 - p_d
    exp2 = math.exp(-2.0 * eta * mu)
    s_b_l = exp2 * p_d * one + (1.0 - exp2) * one
    s_b_r = exp2 * one * p_d
    s_z = one * math.exp(-eta * mu / 2.0) - one * one * math.exp(-eta * mu)
    s_o = p_d * one
    e_d = sys_params.e_d
    left = {
        "B": (1.0 - e_d) * s_b_l + e_d * s_b_r,
        "Z": s_z,
        "O": s_o,
    }
    right = {
        "B": (1.0 - e_d) * s_b_r + e_d * s_b_l,
        "Z": s_z,
        "O": s_o,
    }
    return WindowRates(left=left, right=right)


def _scf_x_plus_bounds(rate_o, rate_b, mu):
    """Upper and lower bounds on the X+ source counting rate of one
    detector, from the observed O- and B-window rates of that detector.

    The lower bound can go negative at long distance; it is clamped at
    zero and flagged.
    """
    t = math.exp(-mu)
    base = t * rate_o + rate_b / t
    cross = 2.0 * math.sqrt(rate_o * rate_b) \
        + 2.0 * (1.0 - t) * math.sqrt(rate_o) \
        + 2.0 * (1.0 - t) / t * math.sqrt(rate_b)
    norm = 1.0 / (2.0 * (1.0 + t))
    upper = norm * (base + (1.0 - t) ** 2 / t + cross)
    lower = norm * (base - cross)
    clamped = lower < 0.0
    return upper, max(0.0, lower), clamped


def scf_phase_bound(sys_params, proto):
    """Upper bound on the SCF phase-flip error rate of untagged bits.

    The bound compares the dark-port X+ rate against the bright-port one;
    it can exceed 1 at long distance, where it is clamped and flagged.
    """
    rates = scf_window_rates(sys_params, proto)
    mu = proto.mu
    upper_r, _, _ = _scf_x_plus_bounds(rates.right["O"], rates.right["B"], mu)
    _, lower_l, s_clamped = _scf_x_plus_bounds(
        rates.left["O"], rates.left["B"], mu)
    s_z_l = rates.left["Z"]
    s_z_r = rates.right["Z"]
    denom = 2.0 * (s_z_l + s_z_r)
    if denom <= 0.0:
        raise NoDataError("no untagged-window rate at this setting")
    raw = ((1.0 + math.exp(-mu)) * (upper_r - lower_l) + 2.0 * s_z_l) / denom
    e_ph = min(1.0, max(0.0, raw))
    return ScfPhaseDetail(
        e_ph_raw=raw,
        e_ph=e_ph,
        clamped=not 0.0 <= raw <= 1.0,
        s_lower_clamped=s_clamped,
    )


def scf_observables(sys_params, proto):
    """Pre-pairing observables of the SCF channel.

    Bit-flip and untagged statistics come from the test subset ``v``; the
    sifted-bit count scales to the complementary key subset.  Raises
    :class:`NoDataError` when the test subset is empty.
    """
    rates = scf_window_rates(sys_params, proto)
    n = proto.n_pulses
    q = proto.q
    gv = proto.gamma_v
    n_b = n * gv * q ** 2 * rates.total("B")
    n_o = n * gv * (1.0 - q) ** 2 * rates.total("O")
    n_z = 2.0 * n * gv * q * (1.0 - q) * rates.total("Z")
    n_v = n_b + n_o + n_z
    if n_v <= 0.0:
        raise NoDataError("empty test subset at this setting")
    detail = scf_phase_bound(sys_params, proto)
    return ChannelObservables(
        n_t=n_v * (1.0 - gv) / gv,
        bit_flip=(n_b + n_o) / n_v,
        untagged_frac=n_z / n_v,
        phase_flip=detail.e_ph,
    )
