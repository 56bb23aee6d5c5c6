"""Tests of the bit-string Monte Carlo against the iteration formulas."""

import math

import numpy as np
import pytest

from rpqds.errors import DomainError
from rpqds.mc import (
    encode_message,
    make_signature_bundle,
    random_pairing,
    run_messaging,
    sample_correlated_strings,
    symmetrize,
    verify_phase_iteration,
)
from rpqds.pairing import (
    ChannelObservables,
    pair_bit_flip,
    pair_untagged,
)


def obs(e, d, e_ph, n=10 ** 6):
    return ChannelObservables(n_t=n, bit_flip=e, untagged_frac=d,
                              phase_flip=e_ph)


def test_sample_error_free_strings_identical():
    alice, bob = sample_correlated_strings(obs(0.0, 0.5, 0.1), 10 ** 4, 1)
    assert np.array_equal(alice.bits, bob.bits)


def test_sample_all_untagged():
    alice, _ = sample_correlated_strings(obs(0.1, 1.0, 0.1), 10 ** 5, 2)
    assert alice.untagged_mask.all()


def test_sample_mismatch_rate_within_3_sigma():
    n = 10 ** 6
    alice, bob = sample_correlated_strings(obs(0.2, 0.5, 0.1), n, 3)
    emp = np.count_nonzero(alice.bits != bob.bits) / n
    sigma = math.sqrt(0.2 * 0.8 / n)
    assert abs(emp - 0.2) <= 3 * sigma


def test_sample_requires_even_length():
    with pytest.raises(DomainError):
        sample_correlated_strings(obs(0.1, 0.5, 0.1), 101, 0)


def test_pairing_all_zero_strings():
    from rpqds.mc import TaggedBitString
    zeros = TaggedBitString(np.zeros(1000, dtype=np.uint8),
                            np.zeros(1000, dtype=bool),
                            np.zeros(1000, dtype=bool))
    a2, b2, _ = random_pairing(zeros, zeros, 5)
    assert not a2.bits.any()
    assert not b2.bits.any()
    assert len(a2) == 500


def test_pairing_is_perfect_matching():
    alice, bob = sample_correlated_strings(obs(0.1, 0.5, 0.1), 10 ** 4, 6)
    _, _, log = random_pairing(alice, bob, 7)
    used = np.concatenate([log.first_index, log.second_index])
    assert len(np.unique(used)) == 10 ** 4


def test_pairing_bit_flip_iteration_3_sigma():
    n = 10 ** 6
    alice, bob = sample_correlated_strings(obs(0.1, 0.5, 0.05), n, 8)
    a2, b2, _ = random_pairing(alice, bob, 9)
    emp = np.count_nonzero(a2.bits != b2.bits) / (n // 2)
    expected = pair_bit_flip(0.1)
    sigma = math.sqrt(expected * (1 - expected) / (n // 2))
    assert abs(emp - expected) <= 3 * sigma


def test_pairing_untagged_iteration_3_sigma():
    n = 10 ** 6
    alice, bob = sample_correlated_strings(obs(0.05, 0.6, 0.05), n, 10)
    a2, _, _ = random_pairing(alice, bob, 11)
    emp = np.count_nonzero(a2.untagged_mask) / (n // 2)
    expected = pair_untagged(0.6)
    sigma = math.sqrt(expected * (1 - expected) / (n // 2))
    assert abs(emp - expected) <= 3 * sigma


def test_pairing_seeded_determinism():
    alice, bob = sample_correlated_strings(obs(0.1, 0.5, 0.1), 10 ** 4, 12)
    a1, b1, log1 = random_pairing(alice, bob, 13)
    a2, b2, log2 = random_pairing(alice, bob, 13)
    assert np.array_equal(a1.bits, a2.bits)
    assert np.array_equal(log1.first_index, log2.first_index)


def test_verify_phase_iteration_error_free():
    report = verify_phase_iteration(0.0, 10 ** 5, 14)
    assert report.p_even_emp == 1.0
    assert report.phase_even_emp == 0.0


def test_verify_phase_iteration_symmetric_point():
    report = verify_phase_iteration(0.5, 10 ** 6, 15)
    assert report.max_sigma_deviation() <= 3.0


def test_verify_phase_iteration_derived_point():
    report = verify_phase_iteration(0.1, 10 ** 7, 16)
    assert report.phase_even_expected == pytest.approx(0.01 / 0.82,
                                                       abs=1e-12)
    assert report.max_sigma_deviation() <= 3.0
    assert abs(report.phase_even_emp - 0.012195) <= 3 * report.phase_even_sigma


def test_symmetrize_minimal_length():
    bob, charlie = symmetrize([0, 1], [1, 0], 17)
    assert len(bob.kept_positions) == 1
    assert len(bob.sent_positions) == 1
    assert len(charlie.kept_positions) == 1


def test_symmetrize_partition_of_positions():
    rng = np.random.default_rng(18)
    k_b = rng.integers(0, 2, 1000, dtype=np.uint8)
    k_c = rng.integers(0, 2, 1000, dtype=np.uint8)
    bob, charlie = symmetrize(k_b, k_c, 19)
    for share in (bob, charlie):
        union = np.union1d(share.kept_positions, share.sent_positions)
        assert np.array_equal(union, np.arange(1000))
        assert len(np.intersect1d(share.kept_positions,
                                  share.sent_positions)) == 0
    assert np.array_equal(k_b[bob.kept_positions], bob.kept_bits)


def test_symmetrize_deterministic():
    k = np.arange(100) % 2
    a1, c1 = symmetrize(k, k[::-1], 20)
    a2, c2 = symmetrize(k, k[::-1], 20)
    assert np.array_equal(a1.kept_positions, a2.kept_positions)
    assert np.array_equal(c1.sent_positions, c2.sent_positions)


def test_messaging_error_free_accepts():
    bundle = make_signature_bundle(obs(0.0, 1.0, 0.0), 1000, 21)
    outcome = run_messaging(bundle, 0, 0.1, 0.2)
    assert outcome.bob_accepts
    assert outcome.charlie_accepts
    assert outcome.mismatch_rates == (0.0, 0.0, 0.0, 0.0)


def test_messaging_all_flipped_signature_rejected():
    bundle = make_signature_bundle(obs(0.0, 1.0, 0.0), 1000, 22)
    forged = (1 - bundle.alice_bob[0], 1 - bundle.alice_charlie[0])
    outcome = run_messaging(bundle, 0, 0.1, 0.2, signature=forged)
    assert not outcome.bob_accepts
    assert not outcome.charlie_accepts
    assert min(outcome.mismatch_rates) == 1.0


def test_messaging_honest_acceptance_rate():
    # mismatch rate well below the acceptance threshold: at least 99 %
    # of seeded honest runs must accept on both sides
    e_prime = 0.02
    accept = 0
    trials = 10 ** 3
    for trial in range(trials):
        bundle = make_signature_bundle(obs(e_prime, 1.0, 0.0), 400,
                                       [23, trial])
        outcome = run_messaging(bundle, trial % 2, 0.05, 0.10)
        accept += outcome.bob_accepts and outcome.charlie_accepts
    assert accept >= 0.99 * trials


def test_encode_message_examples():
    assert encode_message([]) == [1, 1, 1, 1, 1, 1]
    assert encode_message([0]) == [1, 1, 1, 0, 0, 0, 1, 1, 1]
    assert encode_message([1, 0]) == [1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1]
    with pytest.raises(DomainError):
        encode_message([2])