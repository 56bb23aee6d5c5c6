"""Core math of the random-pairing iteration.

Random pairing takes a sifted bit string, pairs its positions uniformly at
random, and keeps one parity bit per pair.  Length halves; the bit-flip,
untagged-fraction and phase-flip statistics transform by closed-form
iteration rules.  This module implements those rules, the binary entropy
function and its inverse, the per-bit secure fraction of the paired string,
and the asymptotic key length of a paired-and-corrected key.

Everything here is pure and deterministic; no shared state.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "ChannelObservables",
    "PairedStats",
    "KeyLengthParams",
    "KeyLength",
    "binary_entropy",
    "inv_binary_entropy",
    "pair_bit_flip",
    "pair_untagged",
    "pair_phase",
    "pair_tagged_untagged_phase",
    "secure_fraction",
    "pair_observables",
    "rp_key_length",
]

_INV_H_TOL = 1e-12
_INV_H_MAX_ITER = 200


def _check_prob(x, name):
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")


@dataclass(frozen=True)
class ChannelObservables:
    """Pre-pairing statistics of one key-generation channel.

    Attributes
    ----------
    n_t : float
        Number of sifted effective bits (expected count in simulation
        mode; callers truncate to an even integer before pairing).
    bit_flip : float
        Bit-flip error rate of the sifted string, in [0, 1].
    untagged_frac : float
        Fraction of untagged bits, in [0, 1].
    phase_flip : float
        Phase-flip error rate of the untagged bits, in [0, 1].
    """

    n_t: float
    bit_flip: float
    untagged_frac: float
    phase_flip: float

    def __post_init__(self):
        if self.n_t < 0:
            raise DomainError(f"n_t must be >= 0, got {self.n_t!r}")
        _check_prob(self.bit_flip, "bit_flip")
        _check_prob(self.untagged_frac, "untagged_frac")
        _check_prob(self.phase_flip, "phase_flip")


@dataclass(frozen=True)
class PairedStats:
    """Post-pairing statistics derived from :class:`ChannelObservables`.

    ``phase_even`` / ``phase_odd`` are the phase-flip rates of parity bits
    from untagged-untagged pairs conditioned on the discarded member showing
    an even / odd number of phase errors; ``p_even`` is the probability of
    the even branch.  ``secure_fraction`` may be negative at high error
    rates; rate computations clamp it at zero, diagnostics keep the raw
    value.
    """

    n_t_prime: float
    bit_flip_prime: float
    untagged_frac_prime: float
    p_even: float
    phase_even: float
    phase_odd: float
    secure_fraction: float


@dataclass(frozen=True)
class KeyLengthParams:
    """Error-correction efficiency, typically 1.1 to 1.2."""

    ec_coefficient: float = 1.1

    def __post_init__(self):
        if self.ec_coefficient < 1.0:
            raise DomainError(
                f"ec_coefficient must be >= 1, got {self.ec_coefficient!r}")


@dataclass(frozen=True)
class KeyLength:
    """Asymptotic key length, raw and clamped at zero."""

    raw: float
    clamped: float
    dropped_bit: bool


def binary_entropy(x):
    """Binary Shannon entropy H(x) = -x log2 x - (1-x) log2 (1-x).

    Defined by continuity as 0 at the endpoints.  Raises
    :class:`DomainError` outside [0, 1].
    """
    _check_prob(x, "x")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def inv_binary_entropy(y):
    """Inverse of :func:`binary_entropy` on the branch [0, 1/2].

    Returns the unique x in [0, 1/2] with H(x) = y, found by bisection
    (H is monotone increasing on [0, 1/2]); the result satisfies
    |H(x) - y| <= 1e-12 up to floating-point limits near y = 1.
    """
    _check_prob(y, "y")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(_INV_H_MAX_ITER):
        mid = 0.5 * (lo + hi)
        h = binary_entropy(mid)
        if abs(h - y) <= _INV_H_TOL:
            return mid
        if h < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pair_bit_flip(e):
    """Expected bit-flip error rate of parity bits: 2e(1-e).

    A parity bit is wrong exactly when one member of its pair is wrong.
    """
    _check_prob(e, "e")
    return 2.0 * e * (1.0 - e)


def pair_untagged(d):
    """Untagged fraction after pairing: d^2 + 2d(1-d).

    A parity bit counts as untagged when at least one member of its pair
    is untagged.
    """
    _check_prob(d, "d")
    return d * d + 2.0 * d * (1.0 - d)


def pair_phase(e_ph):
    """Phase-error branch statistics for untagged-untagged pairs.

    Returns ``(p_even, phase_even, phase_odd)``: the probability that the
    pair carries an even number (0 or 2) of phase errors, and the
    conditional phase-flip rates of the kept parity bit in the even and
    odd branches.  The odd branch is exactly 1/2 regardless of ``e_ph``.
    """
    _check_prob(e_ph, "e_ph")
    p_even = e_ph * e_ph + (1.0 - e_ph) ** 2
    phase_even = e_ph * e_ph / p_even
    return p_even, phase_even, 0.5


def pair_tagged_untagged_phase(e_ph):
    """Phase-flip rate of parity bits from mixed untagged-tagged pairs.

    The tagged member carries no phase information, so the rate passes
    through unchanged.
    """
    _check_prob(e_ph, "e_ph")
    return e_ph


def secure_fraction(d, e_ph):
    """Per-bit secure fraction of the paired string.

    Combines the untagged fraction after pairing with the entropy cost of
    the three pair categories (untagged-untagged even/odd branches and
    mixed pairs).  May be negative when error rates are high; callers
    clamp for rate purposes.
    """
    _check_prob(d, "d")
    _check_prob(e_ph, "e_ph")
    d_prime = pair_untagged(d)
    p_even, phase_even, phase_odd = pair_phase(e_ph)
    uu_cost = p_even * binary_entropy(phase_even) \
        + (1.0 - p_even) * binary_entropy(phase_odd)
    ut_cost = binary_entropy(pair_tagged_untagged_phase(e_ph))
    return d_prime - d * d * uu_cost - 2.0 * d * (1.0 - d) * ut_cost


def pair_observables(obs):
    """Apply the full pairing iteration to channel observables.

    An odd sifted-bit count drops one bit before pairing; the paired
    count is floor(n_t / 2).
    """
    n_prime = math.floor(obs.n_t) // 2 if float(obs.n_t).is_integer() \
        else obs.n_t / 2.0
    p_even, phase_even, phase_odd = pair_phase(obs.phase_flip)
    return PairedStats(
        n_t_prime=n_prime,
        bit_flip_prime=pair_bit_flip(obs.bit_flip),
        untagged_frac_prime=pair_untagged(obs.untagged_frac),
        p_even=p_even,
        phase_even=phase_even,
        phase_odd=phase_odd,
        secure_fraction=secure_fraction(obs.untagged_frac, obs.phase_flip),
    )


def rp_key_length(obs, params=KeyLengthParams()):
    """Asymptotic key length of the paired string after correction.

    ``raw`` = n_t' * secure_fraction - f * n_t' * H(E') and may be
    negative; ``clamped`` floors it at zero.  ``dropped_bit`` records
    whether an odd integer count lost a bit to make pairing possible.
    """
    n_t = obs.n_t
    dropped = False
    if float(n_t).is_integer() and int(n_t) % 2 == 1:
        n_t = n_t - 1
        dropped = True
    n_prime = n_t / 2.0
    h = secure_fraction(obs.untagged_frac, obs.phase_flip)
    e_prime = pair_bit_flip(obs.bit_flip)
    raw = n_prime * h - params.ec_coefficient * n_prime * binary_entropy(e_prime)
    return KeyLength(raw=raw, clamped=max(0.0, raw), dropped_bit=dropped)
