import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subjpipe.corpus import Label
from subjpipe.errors import DomainError
from subjpipe.pairgen import (
    PairExample,
    PairGenConfig,
    cosine,
    generate_pairs,
    read_pairs,
    similarity_label,
    write_pairs,
)

from .helpers import make_dataset, make_embeddings
from .oracles import eq1_pair_oracle


def cfg(n=2, seed=0, weight=0.5):
    return PairGenConfig(n_per_class=n, similarity_weight=weight, seed=seed)


def test_cosine_identity():
    v = np.array([0.3, -1.2, 4.0])
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)


def test_cosine_orthogonal():
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_cosine_hand_value():
    assert cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_cosine_zero_norm():
    with pytest.raises(DomainError):
        cosine(np.zeros(3), np.ones(3))


def test_cosine_dim_mismatch():
    with pytest.raises(DomainError):
        cosine(np.ones(2), np.ones(3))


def test_similarity_label_table():
    assert similarity_label(1.0, True, cfg()) == 1.0
    assert similarity_label(0.0, False, cfg()) == 0.0
    assert similarity_label(0.4, True, cfg()) == pytest.approx(0.7, abs=1e-12)


def test_pair_count_minimal():
    ds = make_dataset(1, 1)
    m = make_embeddings(ds.ids, dim=4)
    assert len(generate_pairs(ds, m, cfg(n=1))) == 2


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_pair_count_law(n):
    ds = make_dataset(n + 2, n + 2)
    m = make_embeddings(ds.ids, dim=4, seed=n)
    assert len(generate_pairs(ds, m, cfg(n=n))) == 2 * n * (2 * n - 1)


def test_pair_count_n100():
    ds = make_dataset(110, 110)
    m = make_embeddings(ds.ids, dim=8, seed=1)
    assert len(generate_pairs(ds, m, cfg(n=100))) == 39800


def test_targets_match_brute_force_oracle():
    ds = make_dataset(2, 2)
    m = make_embeddings(ds.ids, dim=5, seed=9)
    pairs = generate_pairs(ds, m, cfg(n=2))
    assert len(pairs) == 12
    index = m.row_index()
    labels = {s.id: s.label for s in ds}
    ids = [s.id for s in ds]
    rows = m.rows.astype(np.float64)
    expected = eq1_pair_oracle(ids, [labels[i] for i in ids], [rows[index[i]] for i in ids])
    expected_map = {(a, b): t for a, b, t in expected}
    for p in pairs:
        assert p.target == pytest.approx(expected_map[(p.id_a, p.id_b)], abs=1e-9)


def test_both_directions_with_equal_targets():
    ds = make_dataset(3, 3)
    m = make_embeddings(ds.ids, dim=4, seed=2)
    pairs = generate_pairs(ds, m, cfg(n=2, seed=4))
    targets = {(p.id_a, p.id_b): p.target for p in pairs}
    for (a, b), t in targets.items():
        assert (b, a) in targets
        assert targets[(b, a)] == pytest.approx(t, abs=1e-12)


def test_same_seed_byte_identical_file():
    ds = make_dataset(6, 6)
    m = make_embeddings(ds.ids, dim=4, seed=3)
    first = write_pairs(generate_pairs(ds, m, cfg(n=3, seed=42)))
    second = write_pairs(generate_pairs(ds, m, cfg(n=3, seed=42)))
    assert first == second


@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_pair_count_property(n, seed):
    ds = make_dataset(20, 20)
    m = make_embeddings(ds.ids, dim=3, seed=0)
    assert len(generate_pairs(ds, m, cfg(n=n, seed=seed))) == 2 * n * (2 * n - 1)


def test_write_pairs_empty():
    assert write_pairs([]) == "id_a\tid_b\ttarget\n"


def test_write_pairs_format():
    out = write_pairs([PairExample(id_a="a", id_b="b", target=0.7)])
    assert out == "id_a\tid_b\ttarget\na\tb\t0.700000\n"


def test_pairs_round_trip_precision():
    ds = make_dataset(4, 4)
    m = make_embeddings(ds.ids, dim=6, seed=8)
    pairs = generate_pairs(ds, m, cfg(n=3, seed=5))
    back = read_pairs(write_pairs(pairs))
    assert len(back) == len(pairs)
    for orig, rt in zip(pairs, back):
        assert (rt.id_a, rt.id_b) == (orig.id_a, orig.id_b)
        assert rt.target == pytest.approx(orig.target, abs=1e-6)
