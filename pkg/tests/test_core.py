import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarstack.core import (
    CRC24C_LEN, CRC24C_POLY, CodeConfigError, ReliabilitySequence, attach_crc, bits_to_hex,
    build_code_config, config_from_info_set, crc_check, crc_compute, encode, encode_systematic,
    hex_to_bits, nr_sequence, place_on_info_set,
)
from polarstack.reference import crc_long_division, generator_matrix, matrix_encode


def bits(n):
    return st.lists(st.integers(0, 1), min_size=n, max_size=n).map(lambda v: np.array(v, np.uint8))


# --- construction ---------------------------------------------------------

def test_toy_sequence_selects_pc8_info_set():
    seq = ReliabilitySequence((0, 1, 2, 4, 3, 5, 6, 7))
    cfg = build_code_config(8, 4, sequence=seq)
    assert list(cfg.info_set) == [3, 5, 6, 7]
    assert list(cfg.frozen_set) == [0, 1, 2, 4]


def test_full_rate_n2():
    cfg = build_code_config(2, 2)
    assert list(cfg.info_set) == [0, 1]
    assert len(cfg.frozen_set) == 0


def test_nr_sequence_is_permutation_and_partition(pc1024):
    seq = nr_sequence()
    assert sorted(seq.indices) == list(range(1024))
    info, frozen = set(pc1024.info_set), set(pc1024.frozen_set)
    assert len(info) == 512 and not info & frozen and info | frozen == set(range(1024))
    # the K most reliable entries are exactly the tail of the sequence
    assert info == set(seq.indices[-512:])


def test_sub_code_filters_sequence_in_order():
    seq = nr_sequence()
    cfg = build_code_config(64, 20)
    sub = [i for i in seq.indices if i < 64]
    assert set(cfg.info_set) == set(sub[-20:])


def test_selection_is_deterministic():
    assert build_code_config(256, 100, 24, CRC24C_POLY) == build_code_config(256, 100, 24, CRC24C_POLY)


@pytest.mark.parametrize("N,K,crc", [(12, 4, 0), (8, 9, 0), (8, -1, 0), (8, 4, 4), (8, 4, 6)])
def test_invalid_configs_rejected(N, K, crc):
    with pytest.raises(CodeConfigError):
        build_code_config(N, K, crc, 0x3 if crc else 0)


def test_sequence_must_be_permutation():
    with pytest.raises(CodeConfigError):
        ReliabilitySequence((0, 1, 1, 3))


def test_sequence_too_short():
    with pytest.raises(CodeConfigError):
        build_code_config(16, 4, sequence=ReliabilitySequence(tuple(range(8))))


def test_sequence_file_roundtrip(tmp_path):
    p = tmp_path / "seq.txt"
    p.write_text("\n".join(str(i) for i in (0, 1, 2, 4, 3, 5, 6, 7)) + "\n")
    assert list(build_code_config(8, 4, sequence=ReliabilitySequence.from_file(p)).info_set) == [3, 5, 6, 7]


# --- encoding -------------------------------------------------------------

def test_zero_encodes_to_zero():
    assert not encode(np.zeros(1024, np.uint8)).any()


def test_unit_vector_row():
    u = np.zeros(8, np.uint8)
    u[3] = 1
    assert list(encode(u)) == [1, 1, 1, 1, 0, 0, 0, 0]


@pytest.mark.parametrize("N", [1, 2, 4, 8, 16])
def test_butterfly_matches_matrix_exhaustive(N):
    G = generator_matrix(N)
    for word in itertools.product((0, 1), repeat=N):
        u = np.array(word, np.uint8)
        assert np.array_equal(encode(u), (u.astype(np.int64) @ G) % 2)


@pytest.mark.parametrize("N", [1, 2, 4, 8, 16])
def test_involution_exhaustive(N):
    for word in itertools.product((0, 1), repeat=N):
        x = np.array(word, np.uint8)
        assert np.array_equal(encode(encode(x)), x)


def test_encode_rejects_bad_length():
    with pytest.raises(ValueError):
        encode(np.zeros(6, np.uint8))


@pytest.mark.property
@settings(max_examples=1000)
@given(bits(32))
def test_butterfly_matches_matrix_n32(x):
    assert np.array_equal(encode(x), matrix_encode(x))


@pytest.mark.property
@settings(max_examples=1000)
@given(st.integers(0, 2**63 - 1))
def test_involution_n1024(seed):
    x = np.random.default_rng(seed).integers(0, 2, 1024, dtype=np.uint8)
    assert np.array_equal(encode(encode(x)), x)


def test_systematic_exhaustive_pc8(pc8):
    for word in itertools.product((0, 1), repeat=4):
        v = np.array(word, np.uint8)
        c = encode_systematic(v, pc8)
        assert np.array_equal(c[pc8.info_set], v)
        assert not encode(c)[pc8.frozen_set].any()


def test_systematic_zero(pc1024):
    assert not encode_systematic(np.zeros(512, np.uint8), pc1024).any()


@pytest.mark.property
@settings(max_examples=1000)
@given(st.integers(0, 2**63 - 1))
def test_systematic_property_pc1024(pc1024, seed):
    v = np.random.default_rng(seed).integers(0, 2, 512, dtype=np.uint8)
    c = encode_systematic(v, pc1024)
    assert np.array_equal(c[pc1024.info_set], v)
    assert not encode(c)[pc1024.frozen_set].any()


def test_systematic_length_checked(pc8):
    with pytest.raises(ValueError):
        encode_systematic(np.zeros(3, np.uint8), pc8)


# --- CRC ------------------------------------------------------------------

def test_crc_zero_message():
    assert not crc_compute(np.zeros(100, np.uint8), CRC24C_POLY, 24).any()


def test_crc_single_one_matches_long_division():
    got = crc_compute(np.array([1], np.uint8), CRC24C_POLY, 24)
    assert np.array_equal(got, crc_long_division([1], CRC24C_POLY, 24))
    # x^24 mod g(x) is the polynomial's low 24 bits
    assert int("".join(map(str, got)), 2) == CRC24C_POLY


@pytest.mark.property
@settings(max_examples=1000)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=600))
def test_crc_matches_long_division(msg):
    assert np.array_equal(crc_compute(np.array(msg, np.uint8), CRC24C_POLY, 24),
                          crc_long_division(msg, CRC24C_POLY, 24))


@pytest.mark.property
@settings(max_examples=1000)
@given(st.integers(0, 2**63 - 1))
def test_crc_self_check_and_single_flip(seed):
    rng = np.random.default_rng(seed)
    msg = rng.integers(0, 2, 488, dtype=np.uint8)
    word = np.concatenate([msg, crc_compute(msg, CRC24C_POLY, 24)])
    assert crc_check(word, CRC24C_POLY, 24)
    word[rng.integers(len(word))] ^= 1
    assert not crc_check(word, CRC24C_POLY, 24)


def test_crc_random_strings_rarely_pass():
    rng = np.random.default_rng(5)
    passes = sum(crc_check(rng.integers(0, 2, 536, dtype=np.uint8), CRC24C_POLY, 24) for _ in range(5000))
    # expected 5000 * 2^-24 ~ 3e-4
    assert passes == 0


def test_crc_short_code_empirical_rate():
    # with a 4-bit CRC the pass rate of random strings is 1/16
    rng = np.random.default_rng(6)
    hits = sum(crc_check(rng.integers(0, 2, 40, dtype=np.uint8), 0x3, 4) for _ in range(8000))
    assert abs(hits / 8000 - 1 / 16) < 0.01


def test_attach_crc(pc1024):
    payload = np.random.default_rng(1).integers(0, 2, pc1024.payload_len, dtype=np.uint8)
    block = attach_crc(payload, pc1024)
    assert len(block) == 512 and crc_check(block, CRC24C_POLY, CRC24C_LEN)
    assert np.array_equal(place_on_info_set(block, pc1024)[pc1024.info_set], block)


def test_hex_roundtrip():
    b = np.random.default_rng(3).integers(0, 2, 37, dtype=np.uint8)
    assert np.array_equal(hex_to_bits(bits_to_hex(b), 37), b)
    assert bits_to_hex(np.array([1, 0, 0, 1], np.uint8)) == "9"


def test_config_from_info_set_sorts():
    cfg = config_from_info_set(8, [7, 3, 6, 5])
    assert list(cfg.info_set) == [3, 5, 6, 7]
