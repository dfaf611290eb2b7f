"""Coadjoint action, genericity, orbit dimensions, jump sets."""

import json

import numpy as np
import pytest

from nilfourier import (
    Functional,
    GradedElement,
    GroupSpec,
    build_layered_basis,
    coadjoint_apply,
    dim_km,
    exp_t,
    full_orbit_dim,
    is_generic,
    jump_sets,
    orbit_dim_numeric_all,
    orbit_dim_quotient_generic,
    quotient_prefix_len,
    sample_generic,
)
from nilfourier.errors import IndexOutOfRange

from oracles import FULL_ORBIT_DIMS, JUMP_SET_EXAMPLES


def _basis(d, N):
    return build_layered_basis(GroupSpec(d, N))


def _random_group(basis, rng, scale=1.0):
    return exp_t(basis.algebra_element(scale * rng.standard_normal(basis.dim)))


# ---------------------------------------------------------------------------
# the action itself
# ---------------------------------------------------------------------------


def test_heisenberg_coadjoint_closed_form():
    basis = _basis(2, 2)
    rng = np.random.default_rng(0)
    for _ in range(10):
        lam, alpha, beta = rng.standard_normal(3)
        ell = Functional.from_coords(basis, {(2, 1): lam, (1, 1): alpha, (1, 2): beta})
        x, y, z = rng.standard_normal(3)
        g = exp_t(
            GradedElement.from_level1(basis.spec, np.array([x, y]))
            + _bracket_elt(basis, z)
        )
        moved = coadjoint_apply(g, ell)
        assert abs(moved.coord(2, 1) - lam) < 1e-12
        assert abs(moved.coord(1, 1) - (alpha + y * lam)) < 1e-12
        assert abs(moved.coord(1, 2) - (beta - x * lam)) < 1e-12


def _bracket_elt(basis, z):
    spec = basis.spec
    levels = [np.zeros((s,)) for s in spec.tensor_level_sizes()]
    levels[2] = basis.embed_coords(2, np.array([z]))
    from nilfourier import Role

    return GradedElement(spec, tuple(levels), Role.ALGEBRA)


def test_coadjoint_is_group_action():
    basis = _basis(2, 3)
    rng = np.random.default_rng(1)
    ell = Functional(basis, rng.standard_normal(basis.dim))
    g = _random_group(basis, rng)
    h = _random_group(basis, rng)
    one_step = coadjoint_apply(_mul(g, h), ell)
    two_step = coadjoint_apply(g, coadjoint_apply(h, ell))
    np.testing.assert_allclose(one_step.flat, two_step.flat, atol=1e-10)


def _mul(g, h):
    from nilfourier import mul

    return mul(g, h)


@pytest.mark.parametrize("d,N", [(2, 2), (2, 4), (3, 3)])
def test_top_layer_is_invariant(d, N):
    basis = _basis(d, N)
    rng = np.random.default_rng(2)
    ell = Functional(basis, rng.standard_normal(basis.dim))
    g = _random_group(basis, rng)
    moved = coadjoint_apply(g, ell)
    m_top = basis.spec.layer_dims()[-1]
    for i in range(1, m_top + 1):
        assert abs(moved.coord(N, i) - ell.coord(N, i)) < 1e-10


def test_functional_pairing_and_json():
    basis = _basis(2, 3)
    ell = Functional.from_coords(basis, {(3, 1): 2.0, (1, 2): -1.5})
    x = GradedElement.from_level1(basis.spec, np.array([0.0, 4.0]))
    assert abs(ell.evaluate(x) - (-6.0)) < 1e-12
    payload = json.loads(json.dumps(ell.to_json_dict()))
    back = Functional.from_json_dict(payload, basis=basis)
    np.testing.assert_allclose(back.flat, ell.flat)


# ---------------------------------------------------------------------------
# genericity and orbit dimensions
# ---------------------------------------------------------------------------

GENERICITY_SPECS = [(2, 2), (3, 2), (2, 3), (2, 4), (3, 3), (2, 5)]


@pytest.mark.parametrize("d,N", GENERICITY_SPECS)
def test_generic_formula_matches_numeric_orbit_dims(d, N):
    """Rank test and numeric quotient orbit dimensions agree on random duals."""
    basis = _basis(d, N)
    spec = basis.spec
    rng = np.random.default_rng(100 * d + N)
    dims = spec.layer_dims()
    n_ok = 0
    for _ in range(12):
        ell = Functional(basis, rng.standard_normal(basis.dim))
        flagged = is_generic(ell)
        numeric = orbit_dim_numeric_all(ell, samples=3, seed=7)
        matches = all(
            numeric[(k, m)] == orbit_dim_quotient_generic(spec, k, m)
            for (k, m) in numeric
        )
        assert flagged == matches
        n_ok += int(flagged)
    assert n_ok > 0  # random functionals are generic almost surely


def test_full_orbit_dims_of_generic_functionals():
    for (d, N), expected in FULL_ORBIT_DIMS.items():
        basis = _basis(d, N)
        rng = np.random.default_rng(41)
        ell = sample_generic(basis, rng)
        assert full_orbit_dim(ell) == expected
        assert full_orbit_dim(ell) % 2 == 0


@pytest.mark.parametrize("d,N", [(2, 2), (2, 4), (3, 2), (3, 3)])
def test_zero_top_layer_shrinks_orbit(d, N):
    basis = _basis(d, N)
    rng = np.random.default_rng(5)
    flat = rng.standard_normal(basis.dim)
    m_top = basis.spec.layer_dims()[-1]
    flat[:m_top] = 0.0  # malcev order puts the top layer first
    ell = Functional(basis, flat)
    generic_full = 2 * (len(jump_sets(basis).S) // 2)
    assert full_orbit_dim(ell) < generic_full or generic_full == 0
    assert not is_generic(ell)


def test_genericity_invariant_along_orbit():
    basis = _basis(2, 4)
    rng = np.random.default_rng(6)
    ell = sample_generic(basis, rng)
    for _ in range(5):
        g = _random_group(basis, rng)
        moved = coadjoint_apply(g, ell)
        assert is_generic(moved)
        assert full_orbit_dim(moved) == full_orbit_dim(ell)


def test_degenerate_rule_for_2_3():
    basis = _basis(2, 3)
    assert basis.spec.degenerate
    gen = Functional.from_coords(basis, {(3, 1): 0.8, (3, 2): 3.0, (1, 1): 1.0})
    assert is_generic(gen)
    non = Functional.from_coords(basis, {(3, 2): 3.0, (2, 1): 1.0, (1, 1): 1.0})
    assert not is_generic(non)


def test_zero_functional_not_generic():
    for d, N in [(2, 2), (2, 3), (3, 2)]:
        basis = _basis(d, N)
        assert not is_generic(Functional(basis, np.zeros(basis.dim)))


def test_dim_km_values_and_bounds():
    spec = GroupSpec(2, 4)  # layers [2, 1, 2, 3]
    assert dim_km(spec, 1, 1) == 1
    assert dim_km(spec, 1, 2) == 2
    assert dim_km(spec, 2, 1) == 0  # middle layer has odd dimension 1
    assert dim_km(spec, 3, 2) == 2
    with pytest.raises(IndexOutOfRange):
        dim_km(spec, 0, 1)
    with pytest.raises(IndexOutOfRange):
        dim_km(spec, 1, 4)  # m exceeds the layer-3 dimension


def test_quotient_prefix_lengths():
    basis = _basis(2, 4)
    # (k, m) keeps layers N..N-k+1 fully and the first m of layer N-k;
    # k = 0 keeps the first m coordinates of the top layer itself
    assert quotient_prefix_len(basis, 0, basis.spec.layer_dims()[-1]) == 3
    assert quotient_prefix_len(basis, 1, 1) == 4  # layer 4 (3 elts) + 1 of layer 3
    assert quotient_prefix_len(basis, 3, 2) == 8  # everything


# ---------------------------------------------------------------------------
# jump sets
# ---------------------------------------------------------------------------


def test_jump_set_examples():
    for (d, N), expected in JUMP_SET_EXAMPLES.items():
        basis = _basis(d, N)
        data = jump_sets(basis)
        assert sorted(data.S) == expected["S"]
        assert sorted(data.T) == expected["T"]
        assert data.degenerate == (d == 2 and N == 3)
        assert len(data.S) % 2 == 0
        assert set(data.S) | set(data.T) == set(basis.malcev_order)
        assert not (set(data.S) & set(data.T))


def test_jump_set_odd_truncation_count():
    # the degenerate (2, 3) spec is excluded: its hand-derived sets are smaller
    for d, N in [(2, 5), (3, 3), (2, 7)]:
        basis = _basis(d, N)
        dims = basis.spec.layer_dims()
        expected = 2 * sum(dims[k - 1] for k in range(1, (N + 1) // 2))
        assert len(jump_sets(basis).S) == expected


def test_jump_set_json():
    data = jump_sets(_basis(2, 2))
    payload = json.loads(json.dumps(data.to_json_dict()))
    assert payload["S"] == [[1, 1], [1, 2]]
    assert payload["T"] == [[2, 1]]
    assert payload["degenerate"] is False


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def test_sample_generic_is_generic():
    for d, N in [(2, 2), (2, 3), (3, 3)]:
        basis = _basis(d, N)
        rng = np.random.default_rng(9)
        for _ in range(3):
            assert is_generic(sample_generic(basis, rng))
