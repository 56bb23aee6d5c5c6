"""Seeded bit-string Monte Carlo of the protocol.

Everything here works on explicit bit strings and masks rather than
channel physics: positions are untagged with a given probability, the
receiver's string differs from the signer's at the bit-flip rate, and
phase errors are bookkeeping marks on untagged positions.  This gives an
independent empirical check of the pairing iteration formulas, and a
full dress rehearsal of the distribution stage (pairing, signature
selection, symmetrization) and the messaging stage (threshold
comparisons, forwarding).

All sampling is driven by ``numpy.random.default_rng`` with explicit
seeds; identical seeds give identical outputs.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .pairing import pair_phase

__all__ = [
    "TaggedBitString",
    "PairLog",
    "PhaseIterationReport",
    "ReceiverShare",
    "SignatureBundle",
    "MessagingOutcome",
    "sample_correlated_strings",
    "random_pairing",
    "verify_phase_iteration",
    "symmetrize",
    "make_signature_bundle",
    "run_messaging",
    "encode_message",
]


@dataclass(frozen=True)
class TaggedBitString:
    """Bit string with untagged and phase-error position masks."""

    bits: np.ndarray
    untagged_mask: np.ndarray
    phase_error_mask: np.ndarray

    def __post_init__(self):
        if not (len(self.bits) == len(self.untagged_mask)
                == len(self.phase_error_mask)):
            raise DomainError("masks must match the bit-string length")

    def __len__(self):
        return len(self.bits)


@dataclass(frozen=True)
class PairLog:
    """Per-pair bookkeeping of one random pairing.

    ``category`` counts untagged members (0 tag-tag, 1 mixed, 2 both
    untagged); ``phase_parity_odd`` holds, for both-untagged pairs, the
    parity of the two phase marks.
    """

    first_index: np.ndarray
    second_index: np.ndarray
    category: np.ndarray
    phase_parity_odd: np.ndarray


@dataclass(frozen=True)
class PhaseIterationReport:
    """Empirical vs analytic branch statistics of the phase iteration."""

    trials: int
    p_even_emp: float
    p_even_expected: float
    p_even_sigma: float
    phase_even_emp: float
    phase_even_expected: float
    phase_even_sigma: float
    phase_odd_emp: float
    phase_odd_expected: float
    phase_odd_sigma: float

    def max_sigma_deviation(self):
        out = 0.0
        for emp, exp, sig in (
                (self.p_even_emp, self.p_even_expected, self.p_even_sigma),
                (self.phase_even_emp, self.phase_even_expected,
                 self.phase_even_sigma),
                (self.phase_odd_emp, self.phase_odd_expected,
                 self.phase_odd_sigma)):
            if sig == 0.0:
                if emp != exp:
                    return math.inf
                continue
            out = max(out, abs(emp - exp) / sig)
        return out


def sample_correlated_strings(obs, n, seed):
    """Signer/receiver string pair with the error model of ``obs``.

    Positions are untagged with probability ``obs.untagged_frac``; the
    receiver's bit flips with probability ``obs.bit_flip``; untagged
    positions carry a phase mark with probability ``obs.phase_flip``.
    """
    if n % 2 != 0:
        raise DomainError(f"n must be even, got {n!r}")
    rng = np.random.default_rng(seed)
    alice_bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    flips = rng.random(n) < obs.bit_flip
    bob_bits = np.where(flips, 1 - alice_bits, alice_bits).astype(np.uint8)
    untagged = rng.random(n) < obs.untagged_frac
    phase = (rng.random(n) < obs.phase_flip) & untagged
    alice = TaggedBitString(alice_bits, untagged, phase)
    bob = TaggedBitString(bob_bits, untagged.copy(), phase.copy())
    return alice, bob


def random_pairing(a, b, seed):
    """Uniform random perfect matching; parity bits replace each pair.

    The outcome untagged mask marks pairs with at least one untagged
    member.  The outcome phase mark is the pair's phase-mark parity for
    both-untagged pairs and the untagged member's mark for mixed pairs;
    tag-tag pairs carry no mark.
    """
    if len(a) != len(b) or len(a) % 2 != 0:
        raise DomainError("strings must have equal even lengths")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(a))
    i, j = order[0::2], order[1::2]
    category = a.untagged_mask[i].astype(np.int8) \
        + a.untagged_mask[j].astype(np.int8)
    parity = a.phase_error_mask[i] ^ a.phase_error_mask[j]
    mixed_mark = np.where(a.untagged_mask[i], a.phase_error_mask[i],
                          a.phase_error_mask[j])
    out_phase = np.where(category == 2, parity,
                         np.where(category == 1, mixed_mark, False))
    out_untagged = category > 0
    log = PairLog(first_index=i, second_index=j, category=category,
                  phase_parity_odd=parity & (category == 2))

    def fold(s):
        return TaggedBitString(
            bits=(s.bits[i] ^ s.bits[j]).astype(np.uint8),
            untagged_mask=out_untagged.copy(),
            phase_error_mask=out_phase.copy(),
        )

    return fold(a), fold(b), log


def verify_phase_iteration(e_ph, trials, seed):
    """Empirical phase-branch statistics against the analytic iteration.

    Draws independent phase-mark pairs, splits them by parity, and
    reports the branch probability and the conditional first-member
    error rates with binomial standard errors.
    """
    if trials < 10 ** 5:
        raise DomainError(f"need at least 1e5 trials, got {trials!r}")
    rng = np.random.default_rng(seed)
    first = rng.random(trials) < e_ph
    second = rng.random(trials) < e_ph
    even = first == second
    n_even = int(np.count_nonzero(even))
    n_odd = trials - n_even
    p_even, phase_even, phase_odd = pair_phase(e_ph)
    p_even_emp = n_even / trials
    e1_emp = float(np.count_nonzero(first & even)) / n_even if n_even else 0.0
    e2_emp = float(np.count_nonzero(first & ~even)) / n_odd if n_odd else 0.0

    def sigma(p, n):
        return math.sqrt(p * (1.0 - p) / n) if n else 0.0

    return PhaseIterationReport(
        trials=trials,
        p_even_emp=p_even_emp,
        p_even_expected=p_even,
        p_even_sigma=sigma(p_even, trials),
        phase_even_emp=e1_emp,
        phase_even_expected=phase_even,
        phase_even_sigma=sigma(phase_even, n_even),
        phase_odd_emp=e2_emp,
        phase_odd_expected=phase_odd,
        phase_odd_sigma=sigma(phase_odd, n_odd),
    )


@dataclass(frozen=True)
class ReceiverShare:
    """One receiver's split of a signature string after symmetrization."""

    kept_positions: np.ndarray
    kept_bits: np.ndarray
    sent_positions: np.ndarray
    sent_bits: np.ndarray


def symmetrize(k_bob, k_charlie, seed):
    """Each receiver forwards a random half of his string, with
    positions, and keeps the rest."""
    k_bob = np.asarray(k_bob, dtype=np.uint8)
    k_charlie = np.asarray(k_charlie, dtype=np.uint8)
    if len(k_bob) != len(k_charlie) or len(k_bob) % 2 != 0:
        raise DomainError("strings must have equal even lengths")
    rng = np.random.default_rng(seed)

    def split(bits):
        order = rng.permutation(len(bits))
        sent = np.sort(order[:len(bits) // 2])
        kept = np.sort(order[len(bits) // 2:])
        return ReceiverShare(
            kept_positions=kept, kept_bits=bits[kept],
            sent_positions=sent, sent_bits=bits[sent],
        )

    return split(k_bob), split(k_charlie)


@dataclass(frozen=True)
class SignatureBundle:
    """Alice's signature strings plus the receivers' symmetrized shares,
    per one-bit message value."""

    sig_len: int
    alice_bob: dict
    alice_charlie: dict
    bob_shares: dict
    charlie_shares: dict


def make_signature_bundle(obs, sig_len, seed):
    """Distribution-stage rehearsal at the signature level.

    Draws the correlated signer/receiver strings for both message
    values on both channels (error model of ``obs``, already paired if
    the caller says so) and symmetrizes the receivers' strings.
    """
    if sig_len % 2 != 0:
        raise DomainError(f"sig_len must be even, got {sig_len!r}")
    alice_bob, alice_charlie = {}, {}
    bob_shares, charlie_shares = {}, {}
    for m in (0, 1):
        a_b, k_b = sample_correlated_strings(obs, sig_len, [seed, m, 0])
        a_c, k_c = sample_correlated_strings(obs, sig_len, [seed, m, 1])
        alice_bob[m] = a_b.bits
        alice_charlie[m] = a_c.bits
        bob_shares[m], charlie_shares[m] = symmetrize(
            k_b.bits, k_c.bits, [seed, m, 2])
    return SignatureBundle(
        sig_len=sig_len,
        alice_bob=alice_bob,
        alice_charlie=alice_charlie,
        bob_shares=bob_shares,
        charlie_shares=charlie_shares,
    )


@dataclass(frozen=True)
class MessagingOutcome:
    bob_accepts: bool
    charlie_accepts: bool
    mismatch_rates: tuple


def _mismatch(received, reference, positions):
    return float(np.count_nonzero(received != reference[positions])) \
        / len(positions)


def run_messaging(bundle, m, s_a, s_v, signature=None):
    """Messaging-stage verdicts for message ``m``.

    Bob checks his kept half and the half Charlie forwarded him against
    the signature, both strictly below ``s_a``; Charlie, after
    forwarding, checks his two halves strictly below ``s_v``.  Passing
    ``signature`` overrides Alice's honest strings (forgery attempts).
    """
    if not 0.0 < s_a < s_v < 0.5:
        raise DomainError("need 0 < s_a < s_v < 1/2")
    sig_b, sig_c = signature if signature is not None else (
        bundle.alice_bob[m], bundle.alice_charlie[m])
    bob = bundle.bob_shares[m]
    charlie = bundle.charlie_shares[m]
    bob_rates = (
        _mismatch(bob.kept_bits, sig_b, bob.kept_positions),
        _mismatch(charlie.sent_bits, sig_c, charlie.sent_positions),
    )
    charlie_rates = (
        _mismatch(bob.sent_bits, sig_b, bob.sent_positions),
        _mismatch(charlie.kept_bits, sig_c, charlie.kept_positions),
    )
    return MessagingOutcome(
        bob_accepts=all(r < s_a for r in bob_rates),
        charlie_accepts=all(r < s_v for r in charlie_rates),
        mismatch_rates=bob_rates + charlie_rates,
    )


def encode_message(bits):
    """Multi-bit encoding: delimiter 111, then 000 per 0 and 010 per 1,
    then the closing 111."""
    out = [1, 1, 1]
    for bit in bits:
        if bit not in (0, 1):
            raise DomainError(f"message bits must be 0 or 1, got {bit!r}")
        out.extend((0, 0, 0) if bit == 0 else (0, 1, 0))
    out.extend((1, 1, 1))
    return out