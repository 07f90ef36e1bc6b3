from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from y00lab.cryptanalysis import (
    CipherScenario,
    block_attack,
    blocks_to_bytes,
    bits_to_bytes,
    brute_force_otp,
    bytes_to_bits,
    concat_blocks,
    derive_stream,
    otp_encrypt,
    split_blocks,
)
from y00lab.errors import DomainError
from y00lab.experiments import SAMPLE_TEXT, eve_for, recover_key, session_config
from y00lab.feistel import encrypt_array
from y00lab.prng import BaseStream
from y00lab.protocol import run_session
from y00lab.wheel import predict_keystream_bits

PLANTED = 0xACE1


def small_space(planted=PLANTED, n=3000, seed=0):
    rng = np.random.default_rng(seed)
    keys = set(int(k) for k in rng.integers(1, 1 << 16, n)) | {planted}
    return np.array(sorted(keys), dtype=np.uint64)


def test_otp_examples():
    p = np.array([1, 0, 1, 1])
    r = np.array([0, 1, 1, 0])
    assert list(otp_encrypt(p, r)) == [1, 1, 0, 1]
    assert list(otp_encrypt(np.zeros(4), r)) == list(r)
    assert list(otp_encrypt(otp_encrypt(p, r), r)) == list(p)
    assert not derive_stream(r, r).any()
    with pytest.raises(DomainError):
        otp_encrypt(p, r[:3])
    with pytest.raises(DomainError):
        derive_stream(p, np.array([2, 0, 0, 0]))


def test_block_packing():
    assert list(concat_blocks(np.array([1, 0, 1, 1]), 4)) == [0xB]
    bits = np.array([1, 0, 0, 1, 1])
    assert list(concat_blocks(bits, 1)) == list(bits)
    with pytest.raises(DomainError):
        concat_blocks(bits, 4)


@given(st.lists(st.integers(0, 1), min_size=0, max_size=40).map(lambda b: b[: len(b) - len(b) % 8]))
def test_pack_round_trips(bits):
    arr = np.array(bits, dtype=np.uint8)
    assert list(split_blocks(concat_blocks(arr, 8), 8)) == bits
    assert list(bytes_to_bits(bits_to_bytes(arr))) == bits


def test_blocks_to_bytes_big_endian():
    assert list(blocks_to_bytes(np.array([0x4869]), 16)) == [0x48, 0x69]


def test_scenario_validation():
    with pytest.raises(DomainError):
        CipherScenario("one_time_pad", b"")
    with pytest.raises(DomainError):
        CipherScenario("block", b"abc", 16)
    with pytest.raises(DomainError):
        CipherScenario("stream", b"ab")
    assert CipherScenario("block", b"abcd").n_bits == 32


def _otp_setup(noiseless, alpha2=400.0, seed=0, size=256):
    cfg = session_config(n=8 * size, alpha2=alpha2, seed=seed, noiseless=noiseless)
    recs = run_session(cfg, eve_for(cfg))
    p = bytes_to_bits(SAMPLE_TEXT[:size])
    r = np.array([x.r for x in recs], dtype=np.uint8)
    l = np.array([x.eve.l for x in recs], dtype=np.uint8)
    k_eve = np.array([x.eve.k_eve for x in recs])
    return cfg, recs, p, otp_encrypt(p, r), l, k_eve


def test_derive_stream_equals_p_xor_ktilde_noiseless():
    cfg = session_config(n=10_000, noiseless=True)
    recs = run_session(cfg, eve_for(cfg))
    p = np.random.default_rng(0).integers(0, 2, 10_000).astype(np.uint8)
    r = np.array([x.r for x in recs], dtype=np.uint8)
    l = np.array([x.eve.l for x in recs], dtype=np.uint8)
    kt = predict_keystream_bits(np.array([x.k for x in recs]), np.array([x.eve.k_eve for x in recs]), 1024)
    assert np.array_equal(derive_stream(otp_encrypt(p, r), l), p ^ kt)


@pytest.mark.parametrize("noiseless", [True, False])
def test_brute_force_recovers_planted(noiseless):
    cfg, _, p, c, l, k_eve = _otp_setup(noiseless)
    res = brute_force_otp(derive_stream(c, l), k_eve, cfg.keystream, key_space=small_space())
    assert res.recovered_key == PLANTED
    assert res.margin > 0 and res.detected
    assert res.plaintext == SAMPLE_TEXT[:256]
    scores = [s for _, s in res.ranked_candidates]
    assert scores == sorted(scores, reverse=True)
    assert res.keys_tried == len(small_space())


def test_brute_force_scrambled_bases_negative_control():
    cfg, _, p, c, l, k_eve = _otp_setup(False)
    scrambled = np.random.default_rng(3).permutation(k_eve)
    res = brute_force_otp(derive_stream(c, l), scrambled, cfg.keystream, key_space=small_space())
    assert res.recovered_key != PLANTED
    assert not res.detected


def test_brute_force_input_checks():
    cfg, _, p, c, l, k_eve = _otp_setup(True, size=16)
    with pytest.raises(DomainError):
        brute_force_otp(derive_stream(c, l)[:120], k_eve[:120], cfg.keystream)
    with pytest.raises(DomainError):
        brute_force_otp(derive_stream(c, l), k_eve, cfg.keystream, key_space=np.array([], dtype=np.uint64))
    with pytest.raises(DomainError):
        brute_force_otp(derive_stream(c, l), k_eve, cfg.keystream, key_space=np.array([0]))
    with pytest.raises(DomainError):
        brute_force_otp(derive_stream(c, l), k_eve[:-1], cfg.keystream)


def test_workers_do_not_change_result():
    cfg, _, p, c, l, k_eve = _otp_setup(True, size=32)
    space = small_space(n=4000)
    a = brute_force_otp(derive_stream(c, l), k_eve, cfg.keystream, key_space=space, timed=False)
    b = brute_force_otp(derive_stream(c, l), k_eve, cfg.keystream, key_space=space, timed=False, workers=2)
    assert a.to_dict() == b.to_dict()
    assert a.elapsed_ms is None


def _block_setup(noiseless, n_blocks=64, N=16, seed=0):
    text = (SAMPLE_TEXT * 2)[: n_blocks * N // 8]
    cfg = session_config(n=8 * len(text), seed=seed, noiseless=noiseless)
    recs = run_session(cfg, eve_for(cfg))
    p = bytes_to_bits(text)
    r = np.array([x.r for x in recs], dtype=np.uint8)
    l = np.array([x.eve.l for x in recs], dtype=np.uint8)
    k_eve = np.array([x.eve.k_eve for x in recs])
    C = encrypt_array(concat_blocks(p, N), concat_blocks(r, N), N, 4)
    return cfg, text, C, concat_blocks(l, N), k_eve


def test_block_attack_recovers_planted():
    cfg, text, C, L, k_eve = _block_setup(True)
    res = block_attack(C, L, k_eve, cfg.keystream, key_space=small_space())
    assert res.recovered_key == PLANTED and res.margin > 0
    assert res.plaintext == text


def test_block_attack_true_key_decrypts_exactly():
    cfg, text, C, L, k_eve = _block_setup(True, n_blocks=16)
    res = block_attack(C, L, k_eve, cfg.keystream, key_space=np.array([PLANTED], dtype=np.uint64))
    assert res.plaintext == text


def test_block_attack_random_ciphertext_negative_control():
    cfg, text, C, L, k_eve = _block_setup(True)
    C_rand = np.random.default_rng(8).integers(0, 1 << 16, len(C))
    res = block_attack(C_rand, L, k_eve, cfg.keystream, key_space=small_space(n=8000))
    assert res.score < res.threshold and not res.detected


def test_block_attack_input_checks():
    cfg, text, C, L, k_eve = _block_setup(True, n_blocks=8)
    with pytest.raises(DomainError):
        block_attack(C[:0], L[:0], k_eve[:0], cfg.keystream)
    with pytest.raises(DomainError):
        block_attack(C, L[:-1], k_eve, cfg.keystream)


def test_recover_key_pipeline_small():
    cfg = session_config(n=1, noiseless=True)
    out = recover_key(cfg, CipherScenario("one_time_pad", SAMPLE_TEXT[:64]), timed=False)
    assert out.planted_first and out.plaintext_exact
    assert len(out.records) == 512
    rep = out.report(cfg, CipherScenario("one_time_pad", SAMPLE_TEXT[:64]))
    assert rep["recovered_key"] == "0xace1" and rep["elapsed_ms"] is None
