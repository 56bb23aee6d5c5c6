"""Asymptotic security evaluation and signature-rate pipeline.

The security level of a run is the maximum of three probabilities: an
honest run aborting (zero asymptotically), a receiver forging a signature
the other receiver accepts, and the signer repudiating a delivered
message.  Given the paired-string statistics this module computes those
probabilities, derives the acceptance thresholds, finds the minimal
signature length meeting a target level, and assembles the end-to-end
signature rate for either channel with or without random pairing.
"""

import math
from dataclasses import dataclass, field

from .channels import ScfParams, SnsParams, scf_observables, sns_observables
from .errors import DomainError, InfeasibleError
from .pairing import (
    binary_entropy,
    inv_binary_entropy,
    pair_bit_flip,
    secure_fraction,
)

__all__ = [
    "DEFAULT_EPS_E",
    "SIG_LEN_CAP",
    "SecurityReport",
    "RateResult",
    "guess_error_rate",
    "thresholds",
    "repudiation_prob",
    "forgery_prob",
    "min_signature_length",
    "baseline_secure_fraction",
    "asymptotic_pipeline",
]

# The smoothing term of the min-entropy bound enters the forgery
# probability as eps_e / g; with g = 1e-12 it must stay well below
# g * epsilon ~ 1e-17 for a 1e-5 security target to be reachable.
DEFAULT_EPS_E = 1e-19

SIG_LEN_CAP = 10 ** 12


@dataclass(frozen=True)
class SecurityReport:
    """Security probabilities and thresholds at a chosen signature length.

    ``e_half`` is the bit-flip mismatch rate of a kept half-signature and
    ``p_e`` the minimum error rate of a forger guessing it; the acceptance
    thresholds sit at thirds of the gap between them.
    """

    p_ro: float
    p_fo: float
    p_re: float
    epsilon: float
    s_a: float
    s_v: float
    p_e: float
    sig_len: int
    r: int
    g: float
    eps_e: float
    e_half: float


@dataclass(frozen=True)
class RateResult:
    """Signature rate of one protocol setting plus its breakdown."""

    rate: float
    n_s: float
    n_pulses: float
    sig_len: int
    params_used: dict
    report: SecurityReport
    improvement: float | None = None
    diagnostics: dict = field(default_factory=dict)


def guess_error_rate(h):
    """Minimum error rate of a forger guessing a kept half-signature
    whose per-bit secure fraction is ``h`` (clamped to [0, 1])."""
    return inv_binary_entropy(min(1.0, max(0.0, h)))


def thresholds(e_half, p_e):
    """Acceptance thresholds at thirds of the gap between the honest
    mismatch rate and the forger's minimum error rate.

    Raises :class:`InfeasibleError` when the gap closes.
    """
    if not 0.0 <= e_half <= 1.0:
        raise DomainError(f"e_half must lie in [0, 1], got {e_half!r}")
    if not 0.0 <= p_e <= 0.5:
        raise DomainError(f"p_e must lie in [0, 0.5], got {p_e!r}")
    if e_half >= p_e:
        raise InfeasibleError(
            f"honest mismatch rate {e_half:.6g} reaches the forger error "
            f"rate {p_e:.6g}", constraint="threshold-gap")
    gap = p_e - e_half
    return e_half + gap / 3.0, e_half + 2.0 * gap / 3.0


def repudiation_prob(sig_len, s_a, s_v):
    """Probability that a repudiating signer splits the receivers'
    verdicts, capped at 1."""
    if s_v <= s_a:
        raise DomainError(f"need s_v > s_a, got {s_a!r}, {s_v!r}")
    return min(1.0, 2.0 * math.exp(-0.25 * (s_v - s_a) ** 2 * sig_len))


def forgery_prob(sig_len, h, r, g, eps_e=DEFAULT_EPS_E):
    """Forgery probability bound, capped at 1.

    The dominant term is 2^(-(L/2) [h - H(2r/L)]) / g; the exponent is
    handled in log2 space so signature lengths around 1e6 neither
    overflow nor lose the additive eps_e / g + g floor.
    """
    if sig_len <= 0:
        return 1.0
    x = 2.0 * r / sig_len
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"2r/L must lie in [0, 1], got {x!r}")
    exponent = -(sig_len / 2.0) * (h - binary_entropy(x))
    if exponent >= math.log2(g):
        return 1.0  # 2^exponent / g >= 1 already
    term = 2.0 ** exponent  # may underflow to 0.0; floor terms remain
    return min(1.0, (term + eps_e) / g + g)


def min_signature_length(h, e_half, target_eps, g, eps_e=DEFAULT_EPS_E):
    """Smallest even signature length meeting the repudiation and forgery
    targets, with the verification-threshold error budget r = floor(s_v L/2).

    Searches by doubling then bisection; honest-abort probability is zero
    asymptotically.  Returns ``(sig_len, r, report)``.
    """
    h = min(1.0, max(0.0, h))
    p_e = guess_error_rate(h)
    s_a, s_v = thresholds(e_half, p_e)
    if eps_e / g + g > target_eps:
        raise InfeasibleError(
            f"forgery floor eps_e/g + g = {eps_e / g + g:.3g} exceeds the "
            f"target {target_eps:.3g}", constraint="forgery-floor")

    def feasible(length):
        r = int(s_v * length / 2.0)
        p_re = repudiation_prob(length, s_a, s_v)
        p_fo = forgery_prob(length, h, r, g, eps_e)
        return p_re <= target_eps and p_fo <= target_eps

    lo, hi = 2, 4
    while not feasible(hi):
        lo, hi = hi, hi * 2
        if hi > SIG_LEN_CAP:
            raise InfeasibleError(
                f"no signature length up to {SIG_LEN_CAP:.0e} meets the "
                f"target {target_eps:.3g}", constraint="sig-len-cap")
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid += mid % 2
        if mid == hi:
            mid -= 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    sig_len = hi
    for _ in range(100):  # polish minimality against floor(r) wiggle
        if sig_len > 2 and feasible(sig_len - 2):
            sig_len -= 2
        else:
            break
    r = int(s_v * sig_len / 2.0)
    p_fo = forgery_prob(sig_len, h, r, g, eps_e)
    p_re = repudiation_prob(sig_len, s_a, s_v)
    report = SecurityReport(
        p_ro=0.0, p_fo=p_fo, p_re=p_re,
        epsilon=max(0.0, p_fo, p_re),
        s_a=s_a, s_v=s_v, p_e=p_e,
        sig_len=sig_len, r=r, g=g, eps_e=eps_e, e_half=e_half,
    )
    return sig_len, r, report


def baseline_secure_fraction(d, e_ph):
    """Per-bit secure fraction without random pairing: the untagged
    fraction discounted by the phase-error entropy.

    Phase-error bounds beyond 1/2 carry no security; they saturate at
    the maximal-entropy point instead of wrapping around it.
    """
    return d * (1.0 - binary_entropy(min(0.5, e_ph)))


def asymptotic_pipeline(sys_params, proto, use_rp=True, eps_e=DEFAULT_EPS_E):
    """End-to-end asymptotic signature rate for one protocol setting.

    Computes channel observables, applies the pairing iteration when
    ``use_rp`` is set, derives thresholds and the minimal signature
    length at the system security target, and returns signatures per
    transmitted pulse.  Propagates :class:`InfeasibleError`.
    """
    if isinstance(proto, SnsParams):
        obs = sns_observables(sys_params, proto)
        params = {"mode": "sns", "mu": proto.mu, "q": proto.q,
                  "p_z": proto.p_z}
    elif isinstance(proto, ScfParams):
        obs = scf_observables(sys_params, proto)
        params = {"mode": "scf", "mu": proto.mu, "q": proto.q,
                  "gamma_v": proto.gamma_v}
    else:
        raise TypeError(f"unsupported protocol parameters: {proto!r}")
    params["use_rp"] = use_rp

    # a phase-error bound at or above 1/2 certifies nothing; cap it at
    # the maximal-entropy point so a loose bound cannot gain security
    phase = min(0.5, obs.phase_flip)
    if use_rp:
        h_raw = secure_fraction(obs.untagged_frac, phase)
        e_half = pair_bit_flip(obs.bit_flip)
        n_eff = obs.n_t / 2.0
    else:
        h_raw = baseline_secure_fraction(obs.untagged_frac, phase)
        e_half = obs.bit_flip
        n_eff = obs.n_t

    sig_len, _, report = min_signature_length(
        h_raw, e_half, sys_params.epsilon, sys_params.g, eps_e)
    n_s = n_eff / (2.0 * sig_len)
    return RateResult(
        rate=n_s / proto.n_pulses,
        n_s=n_s,
        n_pulses=proto.n_pulses,
        sig_len=sig_len,
        params_used=params,
        report=report,
        diagnostics={
            "n_t": obs.n_t,
            "bit_flip": obs.bit_flip,
            "untagged_frac": obs.untagged_frac,
            "phase_flip": obs.phase_flip,
            "secure_fraction_raw": h_raw,
            "e_half": e_half,
        },
    )
