"""Finite-size pipeline: concentration bounds, decoy estimation, and R_f.

With a finite pulse budget every population quantity of the asymptotic
pipeline becomes an estimate: two-sided Chernoff bounds translate between
observed counts, expectations and realized values at failure probability
``xi``; a sampling bound penalizes the tested bit-flip rate; a
three-intensity decoy analysis lower-bounds the single-photon counting
rate and upper-bounds the phase-flip error of the untagged bits.  The
secure fraction is then built from bounded pair counts, and the finite
signature rate R_f = 1/N_f follows from the smallest pulse budget that
can sign one message at the target security level.

Simulation mode replaces experimentally observed counts by their expected
values from the channel closed forms and then applies both Chernoff
directions, mirroring how the numbers are produced in practice.
"""

import math
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.optimize import brentq

from .channels import SnsParams, bessel_i0, sns_observables
from .errors import ConvergenceError, DomainError, InfeasibleError
from .pairing import binary_entropy, pair_bit_flip
from .security import (
    DEFAULT_EPS_E,
    RateResult,
    SecurityReport,
    forgery_prob,
    guess_error_rate,
    repudiation_prob,
    thresholds,
)

__all__ = [
    "FiniteParams",
    "DecoyObservations",
    "PairCounts",
    "BoundValue",
    "chernoff_expected_bounds",
    "chernoff_real_bounds",
    "chernoff_real_interval",
    "serfling_mu",
    "finite_bit_flip",
    "slice_error_rates",
    "simulate_decoy_observations",
    "decoy_s1_lower",
    "decoy_eph_upper",
    "pair_counts",
    "hf",
    "finite_security",
    "finite_rate_pipeline",
]

_QUAD_REL_TOL = 1e-10


@dataclass(frozen=True)
class FiniteParams:
    """Free parameters of the finite-size protocol.

    Decoy windows use three intensities: vacuum, ``mu1`` and ``mu2``,
    chosen with probabilities ``p0``, ``p1_dec``, ``p2_dec``.
    ``delta_slice`` is the width (radians) of the phase slices used for
    the phase-error estimate, ``gamma_t`` the fraction of the kept half
    sacrificed to the bit-flip test, ``eps_pe`` the parameter-estimation
    failure probability, ``xi`` the per-bound Chernoff failure
    probability, and ``n_pulses`` the maximum pulse budget the rate
    search may spend.
    """

    mu: float
    q: float
    mu1: float
    mu2: float
    p_z: float
    p0: float
    p1_dec: float
    p2_dec: float
    delta_slice: float
    gamma_t: float
    eps_pe: float
    g: float
    xi: float
    n_pulses: float = 1e16
    eps_e: float = DEFAULT_EPS_E

    def __post_init__(self):
        if self.mu <= 0:
            raise DomainError(f"mu must be > 0, got {self.mu!r}")
        if not 0.0 < self.mu1 < self.mu2:
            raise DomainError(
                f"need 0 < mu1 < mu2, got {self.mu1!r}, {self.mu2!r}")
        for name in ("q", "p_z", "p0", "p1_dec", "p2_dec"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
        if self.p0 + self.p1_dec + self.p2_dec > 1.0 + 1e-12:
            raise DomainError("decoy intensity probabilities exceed 1")
        if not 0.0 < self.delta_slice < 2.0 * math.pi:
            raise DomainError(
                f"delta_slice must lie in (0, 2 pi), got {self.delta_slice!r}")
        if not 0.0 < self.gamma_t < 1.0:
            raise DomainError(
                f"gamma_t must lie in (0, 1), got {self.gamma_t!r}")
        for name in ("eps_pe", "xi"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise DomainError(f"{name} must lie in [0, 1), got {v!r}")
        if not 0.0 < self.g < 1.0:
            raise DomainError(f"g must lie in (0, 1), got {self.g!r}")
        if self.n_pulses <= 0:
            raise DomainError(f"n_pulses must be > 0, got {self.n_pulses!r}")


@dataclass(frozen=True)
class DecoyObservations:
    """Observed decoy-window statistics (expected values in simulation).

    ``counts[(i, j)]`` is the number of effective events from source
    ``(mu_i, mu_j)`` among ``instances[(i, j)]`` windows.  The slice
    fields hold the error-detector effective-event count of each phase
    slice set and the number of instances per set.
    """

    counts: dict
    instances: dict
    slice_err_plus: float
    slice_err_minus: float
    slice_instances: float

    def rate_bounds(self, i, j, xi):
        """Expected-value bounds of the source-(i, j) counting rate."""
        lo, hi = chernoff_expected_bounds(self.counts[(i, j)], xi)
        n = self.instances[(i, j)]
        return lo / n, hi / n


@dataclass(frozen=True)
class PairCounts:
    """Pair-category counts inside one kept half-signature, with the
    realized-value bounds used by the secure fraction."""

    n0: float
    n1: float
    n2: float
    n_ut: float
    n0_lower: float
    n2_upper: float
    n_ut_lower: float


@dataclass(frozen=True)
class BoundValue:
    """A one-sided bound plus a flag marking that clamping occurred."""

    value: float
    clamped: bool = False


def _tail_exponent_upper(delta):
    # log of the upper-tail Chernoff kernel e^d / (1+d)^(1+d)
    return delta - (1.0 + delta) * math.log1p(delta)


def _tail_exponent_lower(delta):
    # log of the lower-tail Chernoff kernel e^-d / (1-d)^(1-d)
    return -delta - (1.0 - delta) * math.log1p(-delta)


_DELTA_CAP = 1e250  # beyond this the bound is indistinguishable from 0


def _solve_monotone(func, target, hi_start):
    """Root of func(delta) = target for a decreasing func with func(0) = 0
    and target < 0; brackets by doubling (then squaring, for the huge
    deviations of near-zero counts) and solves with brentq."""
    lo = 0.0
    hi = min(hi_start, _DELTA_CAP)
    for _ in range(200):
        if func(hi) < target:
            break
        if hi >= _DELTA_CAP:
            raise ConvergenceError("failed to bracket Chernoff deviation")
        lo = hi
        hi = min(_DELTA_CAP, hi * 2.0 if hi < 2.0 else hi * hi)
    else:
        raise ConvergenceError("failed to bracket Chernoff deviation")
    root = brentq(lambda d: func(d) - target, lo, hi,
                  xtol=1e-30, rtol=8.9e-16, maxiter=1000)
    return root


def chernoff_expected_bounds(x_observed, xi):
    """Two-sided bound on the expectation behind an observed count.

    Solves the two defining tail equations in log form to residual below
    1e-9 and returns ``(X / (1 + delta1), X / (1 - delta2))``.  An
    observed count of zero has no meaningful lower tail; the upper bound
    follows the exact zero-count tail ln(2/xi).
    """
    if x_observed < 0:
        raise DomainError(f"observed count must be >= 0, got {x_observed!r}")
    if not 0.0 < xi < 1.0:
        raise DomainError(f"xi must lie in (0, 1), got {xi!r}")
    target = math.log(xi / 2.0)
    if x_observed == 0.0:
        return 0.0, math.log(2.0 / xi)
    x = float(x_observed)
    guess = math.sqrt(-2.0 * target / x) + 1e-12

    def upper_tail(d):
        return _tail_exponent_upper(d) * x / (1.0 + d)

    # a handful of observed counts cannot push the lower bound above
    # zero: the required deviation overflows before reaching xi/2
    if upper_tail(1e250) > target:
        lower = 0.0
    else:
        d1 = _solve_monotone(upper_tail, target, guess)
        lower = x / (1.0 + d1)
    d2 = _solve_monotone(
        lambda d: _tail_exponent_lower(d) * x / (1.0 - d)
        if d < 1.0 else -1e300,  # keep brentq endpoints finite
        target, min(guess, 0.5))
    return lower, x / (1.0 - d2)


def chernoff_real_bounds(y_expected, xi):
    """Bounds on the realized value behind an expectation, with the
    deviation factors solved from (kernel)^Y = xi/2.

    Returns ``((1 + delta1') Y, (1 - delta2') Y)`` in the source
    convention, whose labels are orientation-swapped relative to their
    magnitudes; use :func:`chernoff_real_interval` for a (min, max)
    pair.  When the expectation is too small for the lower tail to
    certify anything (Y <= ln(2/xi)) the shrinking factor saturates at
    zero.
    """
    if y_expected < 0:
        raise DomainError(f"expectation must be >= 0, got {y_expected!r}")
    if not 0.0 < xi < 1.0:
        raise DomainError(f"xi must lie in (0, 1), got {xi!r}")
    if y_expected == 0.0:
        return 0.0, 0.0
    y = float(y_expected)
    target = math.log(xi / 2.0)
    guess = math.sqrt(-2.0 * target / y) + 1e-12
    d1 = _solve_monotone(
        lambda d: _tail_exponent_upper(d) * y, target, guess)
    if -y >= target:  # lower tail cannot reach xi/2
        d2 = 1.0
    else:
        d2 = _solve_monotone(
            lambda d: _tail_exponent_lower(d) * y
            if d < 1.0 else -y,
            target, min(guess, 0.5))
    return (1.0 + d1) * y, (1.0 - d2) * y


def chernoff_real_interval(y_expected, xi):
    """Orientation-corrected realized-value interval (min, max)."""
    a, b = chernoff_real_bounds(y_expected, xi)
    return min(a, b), max(a, b)


def serfling_mu(half_len, t, eps_pe):
    """Sampling penalty when ``t`` randomly tested bits stand in for the
    error rate of a kept half of ``half_len`` bits."""
    if not 0 < t <= half_len:
        raise DomainError(f"need 0 < t <= half_len, got {t!r}, {half_len!r}")
    if not 0.0 < eps_pe < 1.0:
        raise DomainError(f"eps_pe must lie in (0, 1), got {eps_pe!r}")
    full_len = 2.0 * half_len
    return math.sqrt(
        (half_len - t + 1.0) * math.log(1.0 / eps_pe) / (t * full_len))


def finite_bit_flip(e, mu_pen):
    """Tested bit-flip rate of the paired kept half plus the sampling
    penalty, capped at 1.  ``e`` is the pre-pairing rate; the expected
    tested value is the pairing iteration 2e(1-e)."""
    return min(1.0, pair_bit_flip(e) + mu_pen)


def slice_error_rates(eta, mu1, p_d, delta):
    """Error-port and total click rates of the phase-slice instances.

    Both integrands are centered on exp(-2 eta mu1) to avoid the
    cancellation between the phase average and the no-click reference;
    adaptive quadrature at 1e-10 relative tolerance.
    """
    two_em = 2.0 * eta * mu1
    base = (1.0 - p_d) * math.exp(-two_em)

    def err_integrand(d):
        return math.expm1(two_em * math.sin(d / 2.0) ** 2)

    def tot_integrand(d):
        return math.expm1(two_em * math.cos(d / 2.0) ** 2)

    i_err, _ = quad(err_integrand, -delta / 2.0, delta / 2.0,
                    epsabs=0.0, epsrel=_QUAD_REL_TOL, limit=200)
    i_tot, _ = quad(tot_integrand, -delta / 2.0, delta / 2.0,
                    epsabs=0.0, epsrel=_QUAD_REL_TOL, limit=200)
    t_x = base * (i_err / delta + p_d)
    s_x = base * (i_tot / delta + p_d) + t_x
    return t_x, s_x


def _pair_source_rate(eta, p_d, mu_i, mu_j):
    """Effective-event rate (both detectors) of two phase-randomized
    sources with intensities mu_i and mu_j behind the beam splitter.

    Reduces to the printed signal-window forms: both-send recovers the
    B-window rate pair, single-send the C-window pair, vacuum-vacuum the
    dark-count pair.
    """
    total = mu_i + mu_j
    cross = eta * math.sqrt(mu_i * mu_j)
    one = 1.0 - p_d
    return 2.0 * one * math.exp(-eta * total / 2.0) * bessel_i0(cross) \
        - 2.0 * one * one * math.exp(-eta * total)


def simulate_decoy_observations(sys_params, p, n_pulses):
    """Expected decoy-window observations for a given pulse budget."""
    eta = sys_params.eta()
    p_d = sys_params.p_d
    decoy_window = (1.0 - p.p_z) ** 2 * n_pulses
    probs = {0: p.p0, 1: p.p1_dec, 2: p.p2_dec}
    intensities = {0: 0.0, 1: p.mu1, 2: p.mu2}
    counts = {}
    instances = {}
    for i, j in ((0, 0), (0, 1), (1, 0), (0, 2), (2, 0)):
        n_ij = decoy_window * probs[i] * probs[j]
        rate = _pair_source_rate(eta, p_d, intensities[i], intensities[j])
        instances[(i, j)] = n_ij
        counts[(i, j)] = rate * n_ij
    t_x, s_x = slice_error_rates(eta, p.mu1, p_d, p.delta_slice)
    n_slice = p.delta_slice / (2.0 * math.pi) \
        * (1.0 - p.p_z) ** 2 * p.p1_dec ** 2 * n_pulses
    err = (t_x * (1.0 - 2.0 * sys_params.e_d) + sys_params.e_d * s_x) \
        * n_slice
    return DecoyObservations(
        counts=counts,
        instances=instances,
        slice_err_plus=err,
        slice_err_minus=err,
        slice_instances=n_slice,
    )


def decoy_s1_lower(obs, p):
    """Expected-value lower bound on the single-photon counting rate from
    the three-intensity decoy observations; negative estimates clamp to
    zero with a flag."""
    mu1, mu2 = p.mu1, p.mu2
    s01_lo, _ = obs.rate_bounds(0, 1, p.xi)
    s10_lo, _ = obs.rate_bounds(1, 0, p.xi)
    _, s02_hi = obs.rate_bounds(0, 2, p.xi)
    _, s20_hi = obs.rate_bounds(2, 0, p.xi)
    _, s00_hi = obs.rate_bounds(0, 0, p.xi)
    denom = mu1 * mu2 * (mu2 - mu1)
    quad_diff = mu2 ** 2 - mu1 ** 2
    s01 = (mu2 ** 2 * math.exp(mu1) * s01_lo
           - mu1 ** 2 * math.exp(mu2) * s02_hi
           - quad_diff * s00_hi) / denom
    s10 = (mu2 ** 2 * math.exp(mu1) * s10_lo
           - mu1 ** 2 * math.exp(mu2) * s20_hi
           - quad_diff * s00_hi) / denom
    value = 0.5 * (s01 + s10)
    if value < 0.0:
        return BoundValue(0.0, clamped=True)
    return BoundValue(value)


def decoy_eph_upper(obs, p, s1_lower):
    """Expected-value upper bound on the single-photon phase-flip error
    rate from the phase-slice error counts, clamped to [0, 1/2]."""
    if s1_lower <= 0.0:
        raise InfeasibleError(
            "single-photon rate lower bound is zero; phase error "
            "unbounded", constraint="decoy-s1")
    _, err_hi = chernoff_expected_bounds(
        obs.slice_err_plus + obs.slice_err_minus, p.xi)
    t_delta_hi = err_hi / (2.0 * obs.slice_instances)
    s00_lo, _ = obs.rate_bounds(0, 0, p.xi)
    atten = math.exp(-2.0 * p.mu1)
    raw = (t_delta_hi - 0.5 * atten * s00_lo) \
        / (2.0 * p.mu1 * atten * s1_lower)
    value = min(0.5, max(0.0, raw))
    return BoundValue(value, clamped=not 0.0 <= raw <= 0.5)


def pair_counts(sig_len, d_uf, e_ph, xi):
    """Pair-category counts of a kept half-signature with realized-value
    bounds: pairs of two untagged bits split by phase-error multiplicity
    (0, 1 or 2), plus mixed untagged-tagged pairs."""
    n0 = 0.5 * sig_len * d_uf ** 2 * (1.0 - e_ph) ** 2
    n1 = sig_len * d_uf ** 2 * e_ph * (1.0 - e_ph)
    n2 = 0.5 * sig_len * d_uf ** 2 * e_ph ** 2
    n_ut = sig_len * d_uf * (1.0 - d_uf)
    n0_lo, _ = chernoff_real_interval(n0, xi)
    _, n2_hi = chernoff_real_interval(n2, xi)
    n_ut_lo, _ = chernoff_real_interval(n_ut, xi)
    return PairCounts(n0=n0, n1=n1, n2=n2, n_ut=n_ut,
                      n0_lower=n0_lo, n2_upper=n2_hi, n_ut_lower=n_ut_lo)


def hf(pc, e_ph, sig_len):
    """Finite secure fraction of the kept half from bounded pair counts.

    Even-parity untagged pairs contribute through the bounded ratio of
    double-error pairs; odd-parity pairs carry maximal entropy and drop
    out; mixed pairs keep the untagged phase-error rate.
    """
    even = pc.n0_lower + pc.n2_upper
    if even <= 0.0:
        raise InfeasibleError(
            "no even-parity untagged pairs survive the bounds",
            constraint="pair-counts")
    ratio = pc.n2_upper / even
    return 2.0 / sig_len * (
        even * (1.0 - binary_entropy(min(1.0, ratio)))
        + pc.n_ut_lower * (1.0 - binary_entropy(min(1.0, e_ph))))


def finite_security(hf_val, e_f, pc, p, sig_len):
    """Finite-size security probabilities at one signature length.

    Robustness costs twice the parameter-estimation failure; forgery
    gains the estimation terms eps_pe + 8 xi on top of the asymptotic
    structure; repudiation keeps its form with finite thresholds.
    """
    p_e = guess_error_rate(hf_val)
    s_a, s_v = thresholds(e_f, p_e)
    r = int(s_v * sig_len / 2.0)
    p_ro = min(1.0, 2.0 * p.eps_pe)
    p_fo = min(1.0, forgery_prob(sig_len, min(1.0, max(0.0, hf_val)), r,
                                 p.g, p.eps_e) + p.eps_pe + 8.0 * p.xi)
    p_re = repudiation_prob(sig_len, s_a, s_v)
    return SecurityReport(
        p_ro=p_ro, p_fo=p_fo, p_re=p_re,
        epsilon=max(p_ro, p_fo, p_re),
        s_a=s_a, s_v=s_v, p_e=p_e,
        sig_len=sig_len, r=r, g=p.g, eps_e=p.eps_e, e_half=e_f,
    )


class _FiniteEvaluator:
    """Evaluates feasibility of one finite setting across pulse budgets.

    Caches every budget-independent quantity (window rates, slice
    integrals, per-pulse sifted fraction) so the nested searches over
    the budget and the signature length stay cheap.
    """

    def __init__(self, sys_params, p, use_rp, target_eps):
        self.sys = sys_params
        self.p = p
        self.use_rp = use_rp
        self.target = target_eps
        proto = SnsParams(mu=p.mu, q=p.q, p_z=p.p_z, n_pulses=1.0)
        obs = sns_observables(sys_params, proto)
        self.bit_flip = obs.bit_flip
        self.n_t_per_pulse = obs.n_t  # proportional to the budget
        self.s1_coeff = 2.0 * p.p_z ** 2 * p.q * (1.0 - p.q) \
            * p.mu * math.exp(-p.mu)

    def floors(self):
        """Budget-independent feasibility floors; raises if violated."""
        p = self.p
        if 2.0 * p.eps_pe > self.target:
            raise InfeasibleError(
                f"robustness floor 2 eps_pe = {2 * p.eps_pe:.3g} exceeds "
                f"the target {self.target:.3g}", constraint="robustness-floor")
        floor = p.eps_e / p.g + p.g + p.eps_pe + 8.0 * p.xi
        if floor > self.target:
            raise InfeasibleError(
                f"forgery floor {floor:.3g} exceeds the target "
                f"{self.target:.3g}", constraint="forgery-floor")

    def channel_estimates(self, n_pulses):
        """Decoy-estimated untagged fraction and phase error at a budget."""
        p = self.p
        obs = simulate_decoy_observations(self.sys, p, n_pulses)
        s1 = decoy_s1_lower(obs, p)
        eph = decoy_eph_upper(obs, p, s1.value)
        n_t = self.n_t_per_pulse * n_pulses
        n1_expect = self.s1_coeff * n_pulses * s1.value
        n1_lo, _ = chernoff_real_interval(n1_expect, p.xi)
        d_uf = min(1.0, n1_lo / n_t)
        if d_uf <= 0.0:
            raise InfeasibleError(
                "untagged-bit estimate vanishes at this budget",
                constraint="decoy-untagged")
        _, eph_hi = chernoff_real_interval(n_t * d_uf * eph.value, p.xi)
        # beyond 1/2 the bound certifies nothing: saturate at the
        # maximal-entropy point
        e_ph_f = min(0.5, eph_hi / (n_t * d_uf))
        return d_uf, e_ph_f, n_t

    def security_at(self, sig_len, d_uf, e_ph_f):
        """Security report at one signature length, or None."""
        p = self.p
        t_test = int(p.gamma_t * sig_len / 2.0)
        if t_test < 1:
            return None
        try:
            pen = serfling_mu(sig_len / 2.0, t_test, p.eps_pe)
            if self.use_rp:
                e_f = finite_bit_flip(self.bit_flip, pen)
                pc = pair_counts(sig_len, d_uf, e_ph_f, p.xi)
                h_val = hf(pc, e_ph_f, sig_len)
            else:
                e_f = min(1.0, self.bit_flip + pen)
                n_u = 0.5 * sig_len * d_uf
                n_u_lo, _ = chernoff_real_interval(n_u, p.xi)
                pc = PairCounts(n0=0.0, n1=0.0, n2=0.0, n_ut=n_u,
                                n0_lower=0.0, n2_upper=0.0,
                                n_ut_lower=n_u_lo)
                h_val = 2.0 / sig_len * n_u_lo \
                    * (1.0 - binary_entropy(min(1.0, e_ph_f)))
            report = finite_security(h_val, e_f, pc, p, sig_len)
        except InfeasibleError:
            return None
        if report.epsilon > self.target:
            return None
        return report

    def capacity_cap(self, n_t):
        """Largest even signature length the sifted bits can carry."""
        n_eff = n_t / 2.0 if self.use_rp else n_t
        cap = n_eff / (2.0 + self.p.gamma_t / 2.0)
        cap = int(cap)
        return cap - cap % 2

    def min_sig_len(self, n_pulses):
        """Smallest even feasible signature length at a budget, with its
        report, or None when none fits the capacity."""
        d_uf, e_ph_f, n_t = self.channel_estimates(n_pulses)
        cap = self.capacity_cap(n_t)
        if cap < 2:
            return None
        lo, hi = 2, 4
        while True:
            probe = min(hi, cap)
            if self.security_at(probe, d_uf, e_ph_f) is not None:
                hi = probe
                break
            if probe >= cap:
                return None
            lo, hi = probe, hi * 2
        while hi - lo > 2:
            mid = (lo + hi) // 2
            mid += mid % 2
            if mid == hi:
                mid -= 2
            if self.security_at(mid, d_uf, e_ph_f) is not None:
                hi = mid
            else:
                lo = mid
        report = self.security_at(hi, d_uf, e_ph_f)
        return hi, report, d_uf, e_ph_f, n_t


def finite_rate_pipeline(sys_params, p, use_rp=True):
    """Finite signature rate R_f = 1/N_f for one parameter setting.

    Finds the smallest pulse budget N_f <= ``p.n_pulses`` whose sifted
    bits can carry one message's signature strings (plus the bit-flip
    test overhead) at the system security target, after the full
    estimation chain.  Raises :class:`InfeasibleError` naming the
    binding constraint when even the full budget fails.
    """
    ev = _FiniteEvaluator(sys_params, p, use_rp, sys_params.epsilon)
    ev.floors()

    def solve(n_pulses):
        try:
            return ev.min_sig_len(n_pulses)
        except InfeasibleError:
            return None

    hi = p.n_pulses
    best = solve(hi)
    if best is None:
        try:
            ev.min_sig_len(hi)
        except InfeasibleError as err:
            raise InfeasibleError(str(err), constraint=err.constraint)
        raise InfeasibleError(
            f"pulse budget {hi:.3g} cannot carry a signature at the "
            f"target {sys_params.epsilon:.3g}", constraint="pulse-budget")
    lo = hi / 4.0
    while lo >= 1.0:
        res = solve(lo)
        if res is None:
            break
        hi, best = lo, res
        lo /= 4.0
    lo = max(lo, 1.0)
    # log-space bisection down to 0.1% of the minimal budget
    while hi / lo > 1.001:
        mid = math.sqrt(lo * hi)
        res = solve(mid)
        if res is not None:
            hi, best = mid, res
        else:
            lo = mid
    sig_len, report, d_uf, e_ph_f, n_t = best
    t_test = int(p.gamma_t * sig_len / 2.0)
    params = {"mode": "sns-finite", "use_rp": use_rp, "mu": p.mu,
              "q": p.q, "mu1": p.mu1, "mu2": p.mu2, "p_z": p.p_z,
              "p0": p.p0, "p1_dec": p.p1_dec, "p2_dec": p.p2_dec,
              "delta_slice": p.delta_slice, "gamma_t": p.gamma_t,
              "eps_pe": p.eps_pe, "g": p.g, "xi": p.xi}
    return RateResult(
        rate=1.0 / hi,
        n_s=1.0,
        n_pulses=hi,
        sig_len=sig_len,
        params_used=params,
        report=report,
        diagnostics={
            "n_t": n_t,
            "bit_flip": ev.bit_flip,
            "untagged_frac_bound": d_uf,
            "phase_flip_bound": e_ph_f,
            "test_bits": t_test,
        },
    )
