"""Polarizing subalgebras for linear functionals.

A polarization at a functional ``ell`` is a subalgebra that is maximal
isotropic for the skew form ``(x, y) -> ell([x, y])``; its codimension is half
the coadjoint orbit dimension, and it is the ingredient that turns a generic
functional into an induced representation.

Two constructions are provided. The generic construction uses the layer
structure directly: for odd depth the top half of the layers already
polarizes every generic functional, and for even depth the middle layer
contributes the kernels of its nested skew blocks. The second construction
builds the canonical polarization from the radicals of the functional
restricted to each Malcev-ordered prefix, which works for every functional
(generic or not) and in the one degenerate low-level case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coadjoint import (
    GENERIC_RANK_RTOL,
    RANK_FLOOR,
    Functional,
    full_orbit_dim,
    is_generic,
)
from .errors import DegenerateSpec, DimensionMismatch, NotGeneric
from .lie_basis import LayeredBasis

__all__ = [
    "Subalgebra",
    "is_subordinate",
    "generic_polarization",
    "vergne_polarization",
    "polarization_check",
]

#: Absolute tolerance (scaled by data size) for closure/subordination residuals.
CLOSURE_TOL = 1e-10


def _orthonormal_rows(vectors: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (as rows) of the row space of ``vectors``."""
    if vectors.size == 0:
        return vectors.reshape(0, vectors.shape[-1])
    u, s, vt = np.linalg.svd(vectors, full_matrices=False)
    keep = s > max(rtol * s[0], RANK_FLOOR) if s.size else np.zeros(0, bool)
    return vt[keep]


@dataclass(frozen=True, eq=False)
class Subalgebra:
    """A subspace of the Lie algebra given by orthonormal rows over the
    flat Malcev coordinates, together with closure helpers."""

    basis: LayeredBasis
    vectors: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.vectors, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != self.basis.dim:
            raise DimensionMismatch(
                f"subalgebra rows must have {self.basis.dim} coordinates"
            )
        object.__setattr__(self, "vectors", arr)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def project_residual(self, w: np.ndarray) -> float:
        """Sup-norm distance from ``w`` to the span of the rows."""
        v = self.vectors
        if v.shape[0] == 0:
            return float(np.max(np.abs(w))) if w.size else 0.0
        proj = v.T @ np.linalg.lstsq(v.T, w, rcond=None)[0]
        return float(np.max(np.abs(w - proj)))

    def contains(self, w: np.ndarray, tol: float = CLOSURE_TOL) -> bool:
        return self.project_residual(w) <= tol * (1.0 + float(np.max(np.abs(w))))

    def is_bracket_closed(self, tol: float = CLOSURE_TOL) -> bool:
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                w = self.basis.bracket_coords(self.vectors[i], self.vectors[j])
                if not self.contains(w, tol):
                    return False
        return True

    def layer_dims(self) -> list[int]:
        """Dimension of the projection of the span onto each layer."""
        out = []
        for k in range(1, self.basis.spec.N + 1):
            block = self.vectors[:, self.basis.layer_slice(k)]
            out.append(int(np.linalg.matrix_rank(block)) if block.size else 0)
        return out

    def is_layer_graded(self) -> bool:
        return sum(self.layer_dims()) == self.dim


def is_subordinate(sub: Subalgebra, ell: Functional, tol: float = CLOSURE_TOL) -> bool:
    """Whether ``ell`` kills all brackets of the subalgebra."""
    if sub.basis is not ell.basis and sub.basis.spec != ell.basis.spec:
        raise DimensionMismatch("subalgebra and functional use different bases")
    skew = ell.basis.skew_form(ell.flat)
    pairing = sub.vectors @ skew @ sub.vectors.T
    scale = 1.0 + (float(np.max(np.abs(ell.flat))) if ell.flat.size else 0.0)
    resid = float(np.max(np.abs(pairing))) if pairing.size else 0.0
    return resid <= tol * scale


def generic_polarization(ell: Functional) -> Subalgebra:
    """Layer-built polarization at a generic functional.

    Odd depth: the span of all layers above the middle. Even depth: those
    layers plus the span of the union of the kernels of the nested leading
    skew blocks of the middle layer. Verifies subordination, closure, and
    the expected dimension a posteriori and raises :class:`NotGeneric` if the
    kernel union fails to polarize (it never does on the tested families).
    """
    basis = ell.basis
    spec = basis.spec
    if spec.degenerate:
        raise DegenerateSpec(
            "the (d=2, N=3) algebra has no layer-built generic polarization; "
            "use vergne_polarization"
        )
    if not is_generic(ell):
        raise NotGeneric("generic_polarization needs a generic functional")
    n = basis.dim
    rows = []
    half = spec.N / 2.0
    for k in range(1, spec.N + 1):
        if k > half:
            sl = basis.layer_slice(k)
            for a in range(sl.start, sl.stop):
                e = np.zeros(n)
                e[a] = 1.0
                rows.append(e)
    if spec.N % 2 == 0:
        mid = spec.N // 2
        m_mid = basis.layers[mid - 1].dim
        skew = basis.skew_form(ell.flat)
        sl = basis.layer_slice(mid)
        block_full = skew[sl, sl]
        for m in range(1, m_mid + 1):
            block = block_full[:m, :m]
            u, s, vt = np.linalg.svd(block)
            cutoff = max(GENERIC_RANK_RTOL * (s[0] if s.size else 0.0), RANK_FLOOR)
            null_rows = vt[s <= cutoff] if s.size else np.eye(m)
            for v in null_rows:
                e = np.zeros(n)
                e[sl.start : sl.start + m] = v
                rows.append(e)
    vectors = _orthonormal_rows(np.asarray(rows).reshape(-1, n))
    sub = Subalgebra(basis, vectors)
    expected = basis.dim - full_orbit_dim(ell) // 2
    if sub.dim != expected or not is_subordinate(sub, ell) or not sub.is_bracket_closed():
        raise NotGeneric(
            "layer-built candidate failed the polarization checks "
            f"(dim {sub.dim}, expected {expected})"
        )
    return sub


def vergne_polarization(ell: Functional) -> Subalgebra:
    """Canonical polarization from radicals of Malcev-prefix restrictions.

    Sums, over every prefix of the Malcev ordering, the null space of the
    skew form of ``ell`` restricted to that prefix. Works for arbitrary
    functionals; for the zero functional it returns the whole algebra.
    """
    basis = ell.basis
    n = basis.dim
    skew = basis.skew_form(ell.flat)
    rows = []
    for j in range(1, n + 1):
        block = skew[:j, :j]
        u, s, vt = np.linalg.svd(block)
        cutoff = max(GENERIC_RANK_RTOL * (s[0] if s.size else 0.0), RANK_FLOOR)
        null_rows = vt[s <= cutoff] if s.size else np.eye(j)
        for v in null_rows:
            e = np.zeros(n)
            e[:j] = v
            rows.append(e)
    vectors = _orthonormal_rows(np.asarray(rows).reshape(-1, n))
    return Subalgebra(basis, vectors)


def polarization_check(sub: Subalgebra, ell: Functional) -> dict:
    """Report on whether a subalgebra polarizes a functional.

    Checks subordination, bracket closure, and that the dimension equals
    ``dim g - (full orbit dim) / 2``.
    """
    subordinate = is_subordinate(sub, ell)
    closed = sub.is_bracket_closed()
    expected = ell.basis.dim - full_orbit_dim(ell) // 2
    return {
        "subordinate": bool(subordinate),
        "bracket_closed": bool(closed),
        "dim": int(sub.dim),
        "expected_dim": int(expected),
        "passed": bool(subordinate and closed and sub.dim == expected),
    }
