"""Layered basis construction: dimensions, brackets, embeddings, JSON."""

import json

import numpy as np
import pytest

from nilfourier import (
    BracketTree,
    DegreeMismatch,
    Flavor,
    GroupSpec,
    LayeredBasis,
    NotInLieImage,
    build_layered_basis,
    expand_in_basis,
    left_normed_degree3_words,
    lyndon_words,
    witt_dimension,
)

from oracles import WITT_EXAMPLES, brute_force_lyndon


# ---------------------------------------------------------------------------
# layer dimensions
# ---------------------------------------------------------------------------


def test_witt_examples():
    for (d, k), expected in WITT_EXAMPLES.items():
        assert witt_dimension(d, k) == expected


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_witt_matches_brute_force_lyndon_enumeration(d):
    words = brute_force_lyndon(d, 6)
    for k in range(1, 7):
        assert witt_dimension(d, k) == len(words[k])


@pytest.mark.parametrize("d", [1, 2, 3])
def test_lyndon_generator_matches_brute_force(d):
    expected = brute_force_lyndon(d, 5)
    produced = lyndon_words(d, 5)
    for k in range(1, 6):
        assert [tuple(w) for w in produced[k]] == expected[k]


def test_layer_dims_free_nilpotent():
    assert GroupSpec(2, 3).layer_dims() == [2, 1, 2]
    assert GroupSpec(2, 5).layer_dims() == [2, 1, 2, 3, 6]
    assert GroupSpec(3, 3).layer_dims() == [3, 3, 8]
    assert GroupSpec(5, 1).layer_dims() == [5]


def test_layer_dims_full_tensor():
    spec = GroupSpec(2, 3, Flavor.FULL_TENSOR)
    assert spec.layer_dims() == [2, 4, 8]
    basis = build_layered_basis(spec)
    for k in range(1, 4):
        np.testing.assert_allclose(basis.layers[k - 1].embedding, np.eye(2**k))


# ---------------------------------------------------------------------------
# bracket structure
# ---------------------------------------------------------------------------


def _random_algebra_coords(basis, rng):
    return rng.standard_normal(basis.dim)


@pytest.mark.parametrize("spec", [GroupSpec(2, 4), GroupSpec(3, 3)])
def test_bracket_antisymmetry_and_jacobi(spec):
    basis = build_layered_basis(spec)
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = _random_algebra_coords(basis, rng)
        y = _random_algebra_coords(basis, rng)
        z = _random_algebra_coords(basis, rng)
        xy = basis.bracket_coords(x, y)
        yx = basis.bracket_coords(y, x)
        np.testing.assert_allclose(xy, -yx, atol=1e-12)
        jac = (
            basis.bracket_coords(x, basis.bracket_coords(y, z))
            + basis.bracket_coords(y, basis.bracket_coords(z, x))
            + basis.bracket_coords(z, basis.bracket_coords(x, y))
        )
        np.testing.assert_allclose(jac, 0.0, atol=1e-12)


def test_brackets_respect_grading():
    basis = build_layered_basis(GroupSpec(2, 4))
    n = basis.dim
    for a in range(n):
        ka = basis.layer_of_flat(a)[0]
        for b in range(n):
            kb = basis.layer_of_flat(b)[0]
            ea, eb = np.zeros(n), np.zeros(n)
            ea[a], eb[b] = 1.0, 1.0
            br = basis.bracket_coords(ea, eb)
            for t in range(n):
                if abs(br[t]) > 1e-12:
                    assert basis.layer_of_flat(t)[0] == ka + kb


def test_malcev_order_prefixes_are_ideals():
    basis = build_layered_basis(GroupSpec(2, 4))
    n = basis.dim
    sc = basis.structure_tensor
    # flat index 0 is the top layer; [g, prefix] must stay inside the prefix
    for p in range(1, n):
        block = sc[:, :p, p:]
        assert np.max(np.abs(block)) < 1e-12


def test_heisenberg_structure_table():
    basis = build_layered_basis(GroupSpec(2, 2))
    # Malcev order: bracket, first, second. [X_1, X_2] = bracket element.
    table = basis.structure_table()
    assert table == [[2, 3, 1, 1.0]]


def test_level2_lyndon_bracket_embedding():
    basis = build_layered_basis(GroupSpec(2, 2))
    emb = basis.layers[1].embedding[:, 0]
    # e1 (x) e2 - e2 (x) e1 in row-major level-2 coordinates
    np.testing.assert_allclose(emb, [0.0, 1.0, -1.0, 0.0])


# ---------------------------------------------------------------------------
# user-supplied word bases
# ---------------------------------------------------------------------------


def test_degree3_word_basis_expansion():
    spec = GroupSpec(3, 3)
    basis = build_layered_basis(spec, mode="user", user_words=left_normed_degree3_words())
    words = [tuple(t.foliage()) for t in basis.layers[2].elements]
    target = words.index((3, 1, 2))if (3, 1, 2) in words else None
    assert target is None  # (3,1,2) deliberately not part of the alternative list
    # [X_3, [X_1, X_2]] expands with +1 on (2,1,3) and -1 on (1,2,3)
    x3 = BracketTree(index=3)
    x12 = BracketTree(left=BracketTree(index=1), right=BracketTree(index=2))
    tensor = BracketTree(left=x3, right=x12).embed(3)
    coords = expand_in_basis(basis, 3, tensor)
    got = {tuple(t.foliage()): c for t, c in zip(basis.layers[2].elements, coords)}
    for word, value in got.items():
        if word == (2, 1, 3):
            assert abs(value - 1.0) < 1e-12
        elif word == (1, 2, 3):
            assert abs(value + 1.0) < 1e-12
        else:
            assert abs(value) < 1e-12


def test_wrong_degree_word_raises():
    spec = GroupSpec(2, 2)
    with pytest.raises(DegreeMismatch):
        build_layered_basis(spec, mode="user", user_words={1: [(1,), (2,)], 2: [(1, 2, 2)]})


def test_non_lie_tensor_rejected():
    basis = build_layered_basis(GroupSpec(2, 2))
    bad = np.zeros(4)
    bad[0] = 1.0  # e1 (x) e1 is symmetric, not in the bracket image
    with pytest.raises(NotInLieImage):
        expand_in_basis(basis, 2, bad)


def test_expand_round_trip():
    basis = build_layered_basis(GroupSpec(3, 3))
    rng = np.random.default_rng(3)
    for k in range(1, 4):
        m = basis.layers[k - 1].dim
        coords = rng.standard_normal(m)
        tensor = basis.embed_coords(k, coords)
        back = expand_in_basis(basis, k, tensor)
        np.testing.assert_allclose(back, coords, atol=1e-10)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_basis_json_round_trip():
    basis = build_layered_basis(GroupSpec(2, 3))
    payload = basis.to_json_dict()
    text = json.dumps(payload)
    restored = LayeredBasis.from_json_dict(json.loads(text))
    assert restored.spec == basis.spec
    for la, lb in zip(basis.layers, restored.layers):
        assert la.elements == lb.elements
        np.testing.assert_allclose(la.embedding, lb.embedding)
    assert basis.structure_table() == restored.structure_table()


def test_spec_json_round_trip():
    spec = GroupSpec(3, 2, Flavor.FULL_TENSOR)
    assert GroupSpec.from_json_dict(spec.to_json_dict()) == spec
