import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarstack.core import config_from_info_set, encode, encode_systematic
from polarstack.reference import f_vec, g_vec, sc_oracle
from polarstack.sc import (
    FSSCDecoder, MemoryTree, Op, SCDecoder, build_fssc_schedule, decide_node, f, fssc_decode, g,
    hard_decision, recursively_calc_alpha, recursively_update_beta, sc_decode,
)

finite = st.floats(-100, 100, allow_nan=False, width=32)


# --- scalar rules ---------------------------------------------------------

def test_f_examples():
    assert f(2.5, -1.0) == -1.0
    assert f(0.0, 7.0) == 0.0
    assert f(-3.0, -4.0) == 3.0


def test_g_examples():
    assert g(2, 3, 0) == 5
    assert g(2, 3, 1) == -1
    assert g(4.5, 0, 1) == 4.5


def test_hard_decision_examples():
    assert hard_decision(1.7) == 0
    assert hard_decision(-0.1) == 1
    assert hard_decision(0.0) == 0


@pytest.mark.property
@settings(max_examples=1000)
@given(finite, finite, st.integers(0, 1))
def test_f_g_identities(a, b, bit):
    assert f(a, b) == f(b, a)
    assert abs(f(a, b)) <= min(abs(a), abs(b))
    assert np.isclose(float(g(a, b, 0)) + float(g(a, b, 1)), 2 * a, atol=1e-4)
    assert g(a, 0.0, bit) == np.float32(a)


# --- memory tree ----------------------------------------------------------

def test_memory_footprint():
    mem = MemoryTree(1024)
    assert mem.alpha.size == 2 * 1024 - 1 and mem.beta.size == 2 * (2 * 1024 - 1)
    assert [mem.alpha_stage(s).size for s in range(11)] == [1 << s for s in range(11)]
    assert [mem.beta_stage(s).size for s in range(11)] == [2 << s for s in range(11)]


def test_n2_left_child_is_f():
    mem = MemoryTree(2)
    mem.load_channel([2.0, -3.0])
    recursively_calc_alpha(0, 0, mem)
    assert mem.alpha_stage(0)[0] == -2.0


def test_n2_right_child_uses_left_bit():
    # channel (2, -3) favours x = (0, 1); with u0 = 1 that forces u1 = 1, so the
    # right-child LLR must be negative: -3 + (-1)^1 * 2 = -5
    mem = MemoryTree(2)
    mem.load_channel([2.0, -3.0])
    mem.node_beta(0, 0)[:] = 1
    recursively_calc_alpha(0, 1, mem)
    assert mem.alpha_stage(0)[0] == -5.0
    assert mem.alpha_stage(0)[0] == g_vec([-3.0], [2.0], [1])[0]


def test_update_beta_xor_examples():
    for left, right, parent in ((1, 1, (0, 1)), (0, 1, (1, 1))):
        mem = MemoryTree(2)
        mem.node_beta(0, 0)[:] = left
        mem.node_beta(0, 1)[:] = right
        recursively_update_beta(0, 1, mem)
        assert tuple(mem.root_beta()) == parent


def test_update_beta_even_branch_is_noop():
    mem = MemoryTree(4)
    mem.node_beta(0, 0)[:] = 1
    before = mem.beta.copy()
    recursively_update_beta(0, 0, mem)
    assert np.array_equal(mem.beta, before)


# --- SC decoding ----------------------------------------------------------

def test_sc_noiseless(pc1024, rng):
    u = np.zeros(1024, np.uint8)
    u[pc1024.info_set] = rng.integers(0, 2, 512)
    llr = 20.0 * (1 - 2 * encode(u).astype(np.float32))
    u_hat, msg = sc_decode(llr, pc1024)
    assert np.array_equal(u_hat, u) and np.array_equal(msg, u[pc1024.info_set])


def test_sc_all_frozen(rng):
    cfg = config_from_info_set(16, [])
    u_hat, msg = sc_decode(rng.normal(size=16), cfg)
    assert not u_hat.any() and msg.size == 0


@pytest.mark.property
@settings(max_examples=1000)
@given(st.lists(finite, min_size=8, max_size=8))
def test_sc_matches_whole_tree_oracle_pc8(pc8, llr):
    u_hat, _ = sc_decode(np.array(llr, np.float32), pc8)
    assert np.array_equal(u_hat, sc_oracle(llr, pc8.frozen_mask))


def test_sc_matches_oracle_n1024(pc1024, rng):
    dec = SCDecoder(pc1024)
    for _ in range(20):
        llr = rng.normal(1.0, 2.0, 1024).astype(np.float32)
        assert np.array_equal(dec.decode(llr).u_hat, sc_oracle(llr, pc1024.frozen_mask))


def test_root_beta_is_reencoded_estimate(pc1024, rng):
    dec = SCDecoder(pc1024)
    for _ in range(20):
        res = dec.decode(rng.normal(0.5, 2.0, 1024))
        assert np.array_equal(res.codeword, encode(res.u_hat))


def test_llr_length_checked(pc8):
    with pytest.raises(ValueError):
        sc_decode(np.zeros(7), pc8)


# --- FSSC schedule --------------------------------------------------------

def test_pc8_schedule(pc8):
    s = build_fssc_schedule(pc8)
    assert s.entries == [(Op.ALPHA, 2, 0), (Op.REP, 2, 0), (Op.ALPHA, 2, 1), (Op.SPC, 2, 1), (Op.BETA, 2, 1)]
    assert s.dump() == "ALPHA 2 0 0\nREP 2 0 4\nALPHA 2 1 4\nSPC 2 1 8\nBETA 2 1 8\n"


def test_degenerate_schedules():
    assert build_fssc_schedule(config_from_info_set(16, [])).entries == [(Op.R0, 4, 0)]
    assert build_fssc_schedule(config_from_info_set(16, range(16))).entries == [(Op.R1, 4, 0)]


def test_size_two_precedence():
    # (frozen, info) is both REP and SPC; REP wins
    assert build_fssc_schedule(config_from_info_set(2, [1])).entries == [(Op.REP, 1, 0)]


def test_leaf_entries_when_no_node_matches():
    # left half (frozen, info) is REP; right half (info, frozen) matches nothing
    s = build_fssc_schedule(config_from_info_set(4, [1, 2]))
    assert [e for e in s.entries if e[0] >= Op.R0] == [(Op.REP, 1, 0), (Op.LEAF, 0, 2), (Op.LEAF, 0, 3)]


@pytest.mark.property
@settings(max_examples=1000)
@given(st.integers(0, 6).flatmap(lambda n: st.tuples(st.just(1 << n), st.sets(st.integers(0, (1 << n) - 1)))))
def test_schedule_coverage(case):
    N, info = case
    s = build_fssc_schedule(config_from_info_set(N, sorted(info)))
    spans, pos = [], 0
    for k in s.node_indices():
        lam, phi = int(s.lams[k]), int(s.phis[k])
        assert phi << lam == pos
        pos = (phi + 1) << lam
        assert s.ends[k] == pos
        spans.append(1 << lam)
    assert pos == N and sum(spans) == N
    assert np.all(np.diff(s.ends) >= 0) and s.ends[-1] == N


# --- node decisions -------------------------------------------------------

def test_spc_parity_already_even():
    assert list(decide_node(Op.SPC, [1, -2, 3, -4])) == [0, 1, 0, 1]


def test_spc_flip_least_reliable():
    assert list(decide_node(Op.SPC, [1, -2, 3, 4])) == [1, 1, 0, 0]


def test_rep_sign_of_sum():
    assert list(decide_node(Op.REP, [1, -2, -3, 1])) == [1, 1, 1, 1]


def test_r0_r1_leaf():
    assert list(decide_node(Op.R0, [-1, -2])) == [0, 0]
    assert list(decide_node(Op.R1, [-1, 2])) == [1, 0]
    assert list(decide_node(Op.LEAF, [-1], frozen_leaf=True)) == [0]


# --- FSSC vs SC -----------------------------------------------------------

def test_fssc_reads_systematic_message(pc1024, rng):
    v = rng.integers(0, 2, 512, dtype=np.uint8)
    llr = 20.0 * (1 - 2 * encode_systematic(v, pc1024).astype(np.float32))
    _, msg = fssc_decode(llr, pc1024)
    assert np.array_equal(msg, v)


@pytest.mark.property
@settings(max_examples=1000)
@given(st.integers(1, 6), st.integers(0, 2**63 - 1))
def test_fssc_equals_sc_random_codes(n, seed):
    rng = np.random.default_rng(seed)
    N = 1 << n
    info = np.flatnonzero(rng.random(N) < rng.random())
    cfg = config_from_info_set(N, info)
    llr = rng.normal(rng.uniform(-1, 3), rng.uniform(0.2, 3), N).astype(np.float32)
    assert np.array_equal(FSSCDecoder(cfg).decode(llr).u_hat, SCDecoder(cfg).decode(llr).u_hat)


def test_fssc_equals_sc_pc1024(pc1024, rng):
    sc, fssc = SCDecoder(pc1024), FSSCDecoder(pc1024)
    for _ in range(200):
        llr = rng.normal(1.0, 1.5, 1024).astype(np.float32)
        assert np.array_equal(fssc.decode(llr).u_hat, sc.decode(llr).u_hat)


def test_fssc_equals_sc_exhaustive_small():
    # every information set at N = 8 against a fixed batch of LLR vectors
    rng = np.random.default_rng(9)
    batch = rng.normal(0.5, 1.5, (20, 8)).astype(np.float32)
    for mask in range(256):
        cfg = config_from_info_set(8, [i for i in range(8) if mask >> i & 1])
        sc, fssc = SCDecoder(cfg), FSSCDecoder(cfg)
        for llr in batch:
            assert np.array_equal(fssc.decode(llr).u_hat, sc.decode(llr).u_hat)


def test_f_vectors_agree_with_scalar(rng):
    a, b = rng.normal(size=50).astype(np.float32), rng.normal(size=50).astype(np.float32)
    assert np.array_equal(f_vec(a, b), np.array([f(x, y) for x, y in zip(a, b)]))
