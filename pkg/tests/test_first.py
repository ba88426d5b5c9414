import random

import pytest
from hypothesis import given, settings, strategies as st

from kase import backbone as bb
from kase import first
from kase.errors import DocumentIndexError, ParameterError, ScopeError
from kase.scheme import encrypt, extract, keygen, set_product, setup

P = bb.ORDER


def search(params, sk, docs, i, w, c):
    agg = extract(params, sk, docs)
    td = first.trapdoor(params, agg, docs, w)
    return first.test(params, first.adjust(params, i, docs, td), docs, c)


def test_basic_match_and_miss(small):
    params, sk = small
    c = encrypt(params, sk, 3, "apple")
    assert search(params, sk, (1, 3, 5), 3, "apple", c)
    assert not search(params, sk, (1, 3, 5), 3, "pear", c)


def test_n_equals_one():
    r = random.Random(1)
    params = setup(1, r)
    sk = keygen(params, r)
    c = encrypt(params, sk, 1, "solo", r)
    assert search(params, sk, (1,), 1, "solo", c)
    assert not search(params, sk, (1,), 1, "other", c)


@settings(max_examples=30, deadline=None)
@given(data=st.data(), seed=st.integers(0, 2**32))
def test_correctness_property(small, data, seed):
    params, sk = small
    r = random.Random(seed)
    s = tuple(sorted(data.draw(st.sets(st.integers(1, params.n), min_size=1))))
    i = data.draw(st.sampled_from(s))
    w = data.draw(st.text(min_size=1, max_size=12))
    other = w + "x"
    c = encrypt(params, sk, i, w, r)
    assert search(params, sk, s, i, w, c)
    assert not search(params, sk, s, i, other, c)


def test_ciphertext_tested_at_wrong_index_fails(small):
    params, sk = small
    s = (1, 2, 3)
    c = encrypt(params, sk, 2, "apple")
    agg = extract(params, sk, s)
    td = first.trapdoor(params, agg, s, "apple")
    assert not first.test(params, first.adjust(params, 1, s, td), s, c)


def test_trapdoor_oracle(small):
    params, sk = small
    a, n = params.alpha, params.n
    s, i = (2, 4, 6), 4
    td = first.trapdoor(params, extract(params, sk, s), s, "kiwi")
    k_exp = sk.beta * sum(pow(a, n + 1 - j, P) for j in s) % P
    assert td.tr == bb.add(bb.smul(bb.GROUP.g, k_exp), bb.hash_keyword("kiwi"))
    adj_exp = sum(pow(a, n + 1 - j + i, P) for j in s if j != i) % P
    assert first.adjust(params, i, s, td) == bb.add(td.tr, bb.smul(bb.GROUP.g, adj_exp))


def test_test_equation_residual_without_gap(small):
    # e(Tr_i, c1) / e(c2, pub) == e(H(w), h)^t / e(g, h)^(t alpha^(n+1))
    params, sk = small
    a, n = params.alpha, params.n
    s, i, t = (1, 5), 5, 777
    from kase.scheme import encrypt_with
    hw = bb.hash_keyword("plum")
    c = encrypt_with(params, sk, i, hw, t)
    tr_i = first.adjust(params, i, s, first.trapdoor(params, extract(params, sk, s), s, "plum"))
    lhs = bb.gt_div(bb.pair(tr_i, c.c1), bb.pair(c.c2, set_product(params, s)))
    rhs = bb.gt_div(bb.gt_pow(bb.pair(hw, bb.GROUP.h), t), bb.gt_pow(bb.GROUP.gt, t * pow(a, n + 1, P) % P))
    assert lhs == rhs == c.c3


def test_trapdoor_is_deterministic(small):
    params, sk = small
    agg = extract(params, sk, (1, 2))
    assert first.trapdoor(params, agg, (1, 2), "fig") == first.trapdoor(params, agg, (2, 1), "fig")
    assert first.trapdoor(params, agg, (1, 2), "fig") != first.trapdoor(params, agg, (1, 2), "fog")


def test_adjust_outside_set_is_scope_error(small):
    params, sk = small
    td = first.trapdoor(params, extract(params, sk, (1, 2)), (1, 2), "fig")
    with pytest.raises(ScopeError):
        first.adjust(params, 3, (1, 2), td)


def test_bad_sets(small):
    params, sk = small
    agg = extract(params, sk, (1,))
    with pytest.raises(ParameterError):
        first.trapdoor(params, agg, (), "fig")
    with pytest.raises(DocumentIndexError):
        first.trapdoor(params, agg, (params.n + 1,), "fig")


def test_key_for_other_set_does_not_search(small):
    params, sk = small
    c = encrypt(params, sk, 4, "apple")
    agg = extract(params, sk, (1, 2))
    # claiming a set the key does not cover
    td = first.trapdoor(params, agg, (1, 2, 4), "apple")
    assert not first.test(params, first.adjust(params, 4, (1, 2, 4), td), (1, 2, 4), c)


def test_pub_memo_gives_same_answer(small):
    params, sk = small
    s = (1, 3)
    c = encrypt(params, sk, 1, "apple")
    tr_i = first.adjust(params, 1, s, first.trapdoor(params, extract(params, sk, s), s, "apple"))
    assert first.test(params, tr_i, s, c, set_product(params, s)) == first.test(params, tr_i, s, c) is True


@pytest.mark.parametrize("size", [1, 2, 4, 6])
def test_adjust_test_cost(small, size):
    params, sk = small
    s = tuple(range(1, size + 1))
    c = encrypt(params, sk, 1, "apple")
    td = first.trapdoor(params, extract(params, sk, s), s, "apple")
    with bb.counting() as ops:
        first.test(params, first.adjust(params, 1, s, td), s, c)
    assert ops.as_dict() == {"hash": 0, "smul": 0, "add": 2 * size, "pair": 2, "gt_mul": 1, "gt_exp": 0}


def test_trapdoor_cost(small):
    params, sk = small
    agg = extract(params, sk, (1, 2, 3))
    with bb.counting() as ops:
        first.trapdoor(params, agg, (1, 2, 3), "apple")
    assert (ops.hash, ops.add, ops.smul, ops.pair) == (1, 1, 0, 0)
