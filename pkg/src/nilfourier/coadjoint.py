"""Coadjoint action, genericity tests, orbit dimensions, and jump sets.

A linear functional on the layered Lie algebra is stored by its coordinates
against a layered basis. The coadjoint action of a group element ``g`` sends
``ell`` to ``ell . Ad(g^-1)``; since everything is nilpotent the adjoint
series is an exact polynomial in the structure constants.

Genericity of a functional is decided by the ranks of its pairing blocks
``B^k[i, j] = ell([X_i^(k), X_j^(N-k)])`` between complementary layers: a
functional is generic exactly when every block reaches the maximal rank
possible for its shape (with the skew middle block capped at the nearest even
rank). The same ranks drive closed-form orbit dimensions of the quotient
groups obtained by cutting the Malcev ordering, the numeric cross-check via
finite-difference Jacobians of the dual flow, and the jump/transverse index
sets that parametrize generic orbits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    SamplingExhausted,
    SpecMismatch,
)
from .lie_basis import GroupSpec, LayeredBasis, build_layered_basis
from .tensor_algebra import GradedElement, Role, log_t

__all__ = [
    "Functional",
    "JumpData",
    "coadjoint_apply",
    "b_matrix",
    "dim_km",
    "is_generic",
    "orbit_dim_quotient_generic",
    "orbit_dim_numeric",
    "orbit_dim_numeric_all",
    "full_orbit_dim",
    "jump_sets",
    "sample_generic",
]

#: Relative singular-value threshold for genericity rank decisions.
GENERIC_RANK_RTOL = 1e-8

#: Relative singular-value threshold for finite-difference Jacobian ranks.
NUMERIC_RANK_RTOL = 1e-6

#: Absolute floor below which singular values never count toward rank.
RANK_FLOOR = 1e-30

#: Central-difference step for numeric orbit dimensions.
JACOBIAN_STEP = 1e-5


def _rank(mat: np.ndarray, rtol: float) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    cutoff = max(rtol * float(s[0]), RANK_FLOOR)
    return int(np.sum(s > cutoff))


@dataclass(frozen=True, eq=False)
class Functional:
    """A linear functional in layered-basis coordinates (flat Malcev order)."""

    basis: LayeredBasis
    flat: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.flat, dtype=float)
        if arr.shape != (self.basis.dim,):
            raise DimensionMismatch(
                f"functional needs {self.basis.dim} coordinates, got {arr.shape}"
            )
        object.__setattr__(self, "flat", arr)

    @property
    def spec(self) -> GroupSpec:
        return self.basis.spec

    @staticmethod
    def from_coords(basis: LayeredBasis, coords: dict[tuple[int, int], float]) -> "Functional":
        flat = np.zeros(basis.dim)
        for (k, i), value in coords.items():
            flat[basis.flat_index(k, i)] = float(value)
        return Functional(basis, flat)

    def coords(self) -> dict[tuple[int, int], float]:
        """Nonzero coordinates keyed by 1-based ``(layer, index)``."""
        out = {}
        for a, value in enumerate(self.flat):
            if value != 0.0:
                out[self.basis.layer_of_flat(a)] = float(value)
        return out

    def coord(self, k: int, i: int) -> float:
        return float(self.flat[self.basis.flat_index(k, i)])

    def evaluate(self, y: GradedElement) -> np.ndarray:
        """Pair with an algebra element (batched); expands each layer first."""
        if y.spec != self.spec:
            raise SpecMismatch("functional and element specs differ")
        if y.role is not Role.ALGEBRA:
            raise SpecMismatch("functionals pair with algebra elements")
        total = np.zeros(y.batch_shape)
        for k in range(1, self.spec.N + 1):
            if self.basis.layers[k - 1].dim == 0:
                continue
            coords = self.basis.expand_layer(k, y.levels[k])
            total = total + coords @ self.flat[self.basis.layer_slice(k)]
        return total

    def layer_coords(self, k: int) -> np.ndarray:
        return self.flat[self.basis.layer_slice(k)]

    def to_json_dict(self) -> dict:
        coords = [
            [k, i, float(self.flat[self.basis.flat_index(k, i)])]
            for k in range(1, self.spec.N + 1)
            for i in range(1, self.basis.layers[k - 1].dim + 1)
            if self.flat[self.basis.flat_index(k, i)] != 0.0
        ]
        return {"spec": self.spec.to_json_dict(), "coords": coords}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, **kwargs)

    @staticmethod
    def from_json_dict(obj: dict, basis: LayeredBasis | None = None) -> "Functional":
        spec = GroupSpec.from_json_dict(obj["spec"])
        if basis is None:
            basis = build_layered_basis(spec)
        elif basis.spec != spec:
            raise SpecMismatch("supplied basis does not match the functional's spec")
        coords = {(int(k), int(i)): float(v) for k, i, v in obj["coords"]}
        return Functional.from_coords(basis, coords)


def _log_coords(basis: LayeredBasis, g: GradedElement) -> np.ndarray:
    """Flat Malcev coordinates of ``log g`` (batched)."""
    x = log_t(g)
    flat = np.zeros(x.batch_shape + (basis.dim,))
    for k in range(1, basis.spec.N + 1):
        if basis.layers[k - 1].dim == 0:
            continue
        flat[..., basis.layer_slice(k)] = basis.expand_layer(k, x.levels[k])
    return flat


def _ad_exponential(basis: LayeredBasis, x_flat: np.ndarray) -> np.ndarray:
    """Matrix of ``Ad(exp x) = sum_k ad(x)^k / k!`` on flat coordinates."""
    n = basis.dim
    ad = basis.ad_matrix(x_flat)
    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, basis.spec.N):
        term = (ad @ term) / k
        result = result + term
    return result


def coadjoint_apply(g: GradedElement, ell: Functional) -> Functional:
    """Coadjoint action: ``(g . ell)(Y) = ell(Ad(g^-1) Y)``."""
    basis = ell.basis
    if g.spec != basis.spec:
        raise SpecMismatch("group element and functional specs differ")
    if g.role is not Role.GROUP:
        raise SpecMismatch("coadjoint_apply needs a group element")
    if g.batch_shape != ():
        raise DimensionMismatch("coadjoint_apply expects an unbatched group element")
    x = _log_coords(basis, g)
    mat = _ad_exponential(basis, -x)
    return Functional(basis, mat.T @ ell.flat)


def _layer_dims(spec: GroupSpec) -> list[int]:
    return spec.layer_dims()


def _dim_km_raw(spec: GroupSpec, k: int, m: int) -> int:
    """Generic block rank formula without the quotient-label bound on ``m``."""
    dims = _layer_dims(spec)
    if 2 * k == spec.N:
        cap = dims[k - 1] if dims[k - 1] % 2 == 0 else dims[k - 1] - 1
        return min(cap, m)
    return min(dims[k - 1], dims[spec.N - k - 1], m)


def dim_km(spec: GroupSpec, k: int, m: int) -> int:
    """Generic rank of the pairing block between layers ``k`` and ``N-k``,
    restricted to the first ``m`` columns.

    For complementary distinct layers this is ``min(m_k, m_{N-k}, m)``; the
    middle layer of an even ``N`` pairs skew with itself, so odd full ranks
    are rounded down.
    """
    dims = _layer_dims(spec)
    N = spec.N
    if not 1 <= k <= N - 1:
        raise IndexOutOfRange(f"need 1 <= k <= {N - 1}, got k={k}")
    if not 1 <= m <= dims[N - k - 1]:
        raise IndexOutOfRange(
            f"need 1 <= m <= {dims[N - k - 1]} for layer {N - k}, got m={m}"
        )
    return _dim_km_raw(spec, k, m)


def b_matrix(ell: Functional, k: int, m: int) -> np.ndarray:
    """Pairing block ``B[i, j] = ell([X_i^(k), X_j^(N-k)])``, shape ``(m_k, m)``."""
    basis = ell.basis
    spec = basis.spec
    dims = _layer_dims(spec)
    if not 1 <= k <= spec.N - 1:
        raise IndexOutOfRange(f"need 1 <= k <= {spec.N - 1}, got k={k}")
    if not 1 <= m <= dims[spec.N - k - 1]:
        raise IndexOutOfRange(
            f"need 1 <= m <= {dims[spec.N - k - 1]} for layer {spec.N - k}, got m={m}"
        )
    skew = basis.skew_form(ell.flat)
    rows = basis.layer_slice(k)
    cols = basis.layer_slice(spec.N - k)
    return skew[rows, cols.start : cols.start + m]


def b_matrix_ranks(ell: Functional) -> dict[int, int]:
    """Rank of the full pairing block for each ``k = 1 .. floor(N/2)``."""
    spec = ell.spec
    dims = _layer_dims(spec)
    out = {}
    for k in range(1, spec.N // 2 + 1):
        out[k] = _rank(b_matrix(ell, k, dims[spec.N - k - 1]), GENERIC_RANK_RTOL)
    return out


def is_generic(ell: Functional) -> bool:
    """Whether the functional sits on a maximal-dimension pattern of orbits.

    Generic means every pairing block ``B^k`` (k up to ``floor(N/2)``) attains
    its maximal possible rank. The one degenerate case (d=2, N=3) is decided
    instead by the coordinate on the bracket word ``[1,[1,2]]`` being nonzero,
    which is what the hand analysis of its orbits gives.
    """
    spec = ell.spec
    if spec.degenerate:
        scale = float(np.max(np.abs(ell.flat))) if ell.flat.size else 0.0
        cutoff = max(GENERIC_RANK_RTOL * scale, RANK_FLOOR)
        return abs(ell.coord(3, 1)) > cutoff
    dims = _layer_dims(spec)
    for k in range(1, spec.N // 2 + 1):
        m_full = dims[spec.N - k - 1]
        if m_full == 0 or dims[k - 1] == 0:
            continue
        if _rank(b_matrix(ell, k, m_full), GENERIC_RANK_RTOL) != dim_km(spec, k, m_full):
            return False
    return True


def orbit_dim_quotient_generic(spec: GroupSpec, k: int, m: int) -> int:
    """Generic orbit dimension in the quotient keeping layers ``N..N-k+1``
    plus the first ``m`` dual coordinates of layer ``N-k``.

    ``k = 0`` (cuts inside the top layer) always gives zero; otherwise the
    dimension accumulates one generic block rank per completed layer.
    """
    if k == 0:
        return 0
    dims = _layer_dims(spec)
    if not 1 <= k <= spec.N - 1:
        raise IndexOutOfRange(f"need 0 <= k <= {spec.N - 1}, got k={k}")
    total = 0
    for s in range(1, k):
        total += dim_km(spec, s, dims[spec.N - s - 1])
    return total + dim_km(spec, k, m)


def quotient_prefix_len(basis: LayeredBasis, k: int, m: int) -> int:
    """Flat Malcev prefix length corresponding to the quotient label ``(k, m)``."""
    spec = basis.spec
    dims = _layer_dims(spec)
    if k == 0:
        if not 0 <= m <= dims[spec.N - 1]:
            raise IndexOutOfRange(f"need 0 <= m <= {dims[spec.N - 1]} in the top layer")
        return m
    if not 1 <= k <= spec.N - 1:
        raise IndexOutOfRange(f"need 0 <= k <= {spec.N - 1}, got k={k}")
    if not 1 <= m <= dims[spec.N - k - 1]:
        raise IndexOutOfRange(
            f"need 1 <= m <= {dims[spec.N - k - 1]} for layer {spec.N - k}, got m={m}"
        )
    return basis.flat_index(spec.N - k, m) + 1


def _dual_flow(basis: LayeredBasis, ell_flat: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Image of ``ell`` under the group element ``exp(sum_a t_a X_a)``."""
    mat = _ad_exponential(basis, -t)
    return mat.T @ ell_flat


def _dual_jacobian(basis: LayeredBasis, ell_flat: np.ndarray, t0: np.ndarray, step: float) -> np.ndarray:
    n = basis.dim
    cols = np.empty((n, n))
    for a in range(n):
        tp = t0.copy()
        tm = t0.copy()
        tp[a] += step
        tm[a] -= step
        cols[:, a] = (_dual_flow(basis, ell_flat, tp) - _dual_flow(basis, ell_flat, tm)) / (
            2.0 * step
        )
    return cols


def orbit_dim_numeric_all(
    ell: Functional,
    samples: int = 5,
    step: float = JACOBIAN_STEP,
    seed: int = 0,
) -> dict[tuple[int, int], int]:
    """Numeric orbit dimensions of every Malcev-prefix quotient at once.

    Differentiates the dual flow at ``samples`` random group points and takes,
    per prefix length, the maximum Jacobian row-block rank over the samples.
    Keys are quotient labels ``(k, m)``; the full dual is included under
    ``(N - 1, m_1)``.
    """
    basis = ell.basis
    spec = basis.spec
    dims = _layer_dims(spec)
    rng = np.random.default_rng(seed)
    labels: list[tuple[int, int]] = [(0, dims[spec.N - 1])]
    for k in range(1, spec.N):
        for m in range(1, dims[spec.N - k - 1] + 1):
            labels.append((k, m))
    best = {label: 0 for label in labels}
    for _ in range(samples):
        t0 = rng.standard_normal(basis.dim)
        jac = _dual_jacobian(basis, ell.flat, t0, step)
        for label in labels:
            p = quotient_prefix_len(basis, label[0], label[1])
            r = _rank(jac[:p, :], NUMERIC_RANK_RTOL)
            if r > best[label]:
                best[label] = r
    return best


def orbit_dim_numeric(
    ell: Functional,
    k: int | None = None,
    m: int | None = None,
    *,
    prefix_len: int | None = None,
    samples: int = 5,
    step: float = JACOBIAN_STEP,
    seed: int = 0,
) -> int:
    """Numeric orbit dimension (finite-difference Jacobian rank).

    With no quotient arguments this is the dimension of the full orbit;
    ``(k, m)`` selects a layer quotient and ``prefix_len`` an arbitrary
    Malcev-prefix quotient.
    """
    basis = ell.basis
    if prefix_len is None:
        if k is None:
            prefix_len = basis.dim
        else:
            if m is None:
                raise IndexOutOfRange("orbit_dim_numeric needs m alongside k")
            prefix_len = quotient_prefix_len(basis, k, m)
    if not 0 <= prefix_len <= basis.dim:
        raise IndexOutOfRange(f"prefix length {prefix_len} outside 0..{basis.dim}")
    rng = np.random.default_rng(seed)
    best = 0
    for _ in range(samples):
        t0 = rng.standard_normal(basis.dim)
        jac = _dual_jacobian(basis, ell.flat, t0, step)
        best = max(best, _rank(jac[:prefix_len, :], NUMERIC_RANK_RTOL))
    return best


def full_orbit_dim(ell: Functional) -> int:
    """Dimension of the full coadjoint orbit: the rank of the skew form
    ``M[a, b] = ell([X_a, X_b])`` (always even)."""
    return _rank(ell.basis.skew_form(ell.flat), GENERIC_RANK_RTOL)


@dataclass(frozen=True)
class JumpData:
    """Jump (``S``) and transverse (``T``) index sets of a generic orbit.

    ``S`` holds the 1-based ``(layer, index)`` positions where the generic
    orbit dimension increases as Malcev prefixes grow; ``T`` is its complement
    and parametrizes the orbit space. ``dim_table`` records the generic block
    ranks ``dim_km(k, m)``. ``degenerate`` flags the hand-derived (2, 3) case.
    """

    spec: GroupSpec
    S: tuple[tuple[int, int], ...]
    T: tuple[tuple[int, int], ...]
    dim_table: dict = field(default_factory=dict)
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "S": [list(p) for p in self.S],
            "T": [list(p) for p in self.T],
            "dim_table": [[k, m, v] for (k, m), v in sorted(self.dim_table.items())],
            "degenerate": self.degenerate,
        }


def jump_sets(basis: LayeredBasis) -> JumpData:
    """Compute the jump/transverse splitting of the dual basis indices.

    For the degenerate (2, 3) algebra the sets come from the hand analysis of
    its orbits (flagged via ``degenerate=True``); they happen to coincide with
    the general pattern. Everywhere else ``S`` collects, for each layer
    ``k <= N-1``, the first ``dim_km(k, m_k)`` indices.
    """
    spec = basis.spec
    dims = _layer_dims(spec)
    dim_table = {
        (k, m): dim_km(spec, k, m)
        for k in range(1, spec.N)
        for m in range(1, dims[spec.N - k - 1] + 1)
    }
    if spec.degenerate:
        s_set = ((2, 1), (1, 1))
        t_set = ((3, 1), (3, 2), (1, 2))
        order = {ki: basis.flat_index(*ki) for ki in s_set + t_set}
        s_sorted = tuple(sorted(s_set, key=lambda ki: order[ki]))
        t_sorted = tuple(sorted(t_set, key=lambda ki: order[ki]))
        return JumpData(spec, s_sorted, t_sorted, dim_table, degenerate=True)

    in_S = []
    for k in range(1, spec.N):
        cap = _dim_km_raw(spec, k, dims[k - 1]) if dims[k - 1] >= 1 else 0
        for i in range(1, cap + 1):
            in_S.append((k, i))
    s_flagged = set(in_S)
    s_sorted = tuple(sorted(in_S, key=lambda ki: basis.flat_index(*ki)))
    t_sorted = tuple(
        ki for ki in basis.malcev_order if ki not in s_flagged
    )
    data = JumpData(spec, s_sorted, t_sorted, dim_table, degenerate=False)
    assert len(data.S) % 2 == 0, "jump sets always pair up"
    if spec.N % 2 == 1:
        expected = 2 * sum(dims[k - 1] for k in range(1, (spec.N + 1) // 2))
        assert len(data.S) == expected
    return data


def sample_generic(
    basis: LayeredBasis,
    rng: np.random.Generator | None = None,
    scale: float = 1.0,
    max_attempts: int = 1000,
) -> Functional:
    """Draw functionals with independent normal coordinates until one is generic."""
    if rng is None:
        rng = np.random.default_rng()
    for _ in range(max_attempts):
        ell = Functional(basis, scale * rng.standard_normal(basis.dim))
        if is_generic(ell):
            return ell
    raise SamplingExhausted(
        f"no generic functional found in {max_attempts} attempts"
    )
