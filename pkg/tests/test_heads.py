import pytest
from hypothesis import given, strategies as st

from headprune import BoundsError, Geometry, HeadIndex, all_heads, canonicalize, column
from headprune.heads import mask_from_pairs, mask_to_pairs


def test_canonicalize_dedups_and_sorts():
    geometry = Geometry(12, 12)
    mask = canonicalize([(1, 0), (0, 2), (1, 0)], geometry)
    assert mask == (HeadIndex(0, 2), HeadIndex(1, 0))


def test_canonicalize_empty_is_identity():
    assert canonicalize([], Geometry(12, 12)) == ()


def test_canonicalize_rejects_out_of_bounds():
    with pytest.raises(BoundsError, match=r"layer=12"):
        canonicalize([(12, 0)], Geometry(12, 12))


def test_all_heads_bert_size():
    assert len(all_heads(Geometry(12, 12))) == 144


def test_all_heads_degenerate():
    assert all_heads(Geometry(1, 1)) == [HeadIndex(0, 0)]


def test_all_heads_enumeration_order():
    heads = all_heads(Geometry(2, 3))
    assert len(heads) == 6
    assert heads[0] == HeadIndex(0, 0)
    assert heads[-1] == HeadIndex(1, 2)
    assert heads == sorted(heads)


def test_geometry_validation():
    with pytest.raises(ValueError):
        Geometry(0, 4)
    with pytest.raises(ValueError):
        Geometry(4, 0)


def test_column():
    assert column(Geometry(3, 2), 1) == [HeadIndex(0, 1), HeadIndex(1, 1), HeadIndex(2, 1)]
    with pytest.raises(BoundsError):
        column(Geometry(3, 2), 2)


def test_mask_pairs_round_trip():
    geometry = Geometry(3, 3)
    mask = canonicalize([(2, 1), (0, 0)], geometry)
    assert mask_to_pairs(mask) == [[0, 0], [2, 1]]
    assert mask_from_pairs(mask_to_pairs(mask), geometry) == mask


def test_mask_from_pairs_rejects_malformed():
    with pytest.raises(BoundsError, match="pair"):
        mask_from_pairs([[0, 1, 2]], Geometry(2, 2))


geometries = st.builds(Geometry, st.integers(1, 12), st.integers(1, 12))


@given(geometry=geometries, data=st.data())
def test_canonicalize_idempotent(geometry, data):
    entries = data.draw(st.lists(st.tuples(
        st.integers(0, geometry.layers - 1),
        st.integers(0, geometry.heads_per_layer - 1),
    )))
    once = canonicalize(entries, geometry)
    assert canonicalize(once, geometry) == once
    assert list(once) == sorted(set(once))


@given(geometry=geometries)
def test_all_heads_count(geometry):
    heads = all_heads(geometry)
    assert len(heads) == geometry.layers * geometry.heads_per_layer
    assert len(set(heads)) == len(heads)
