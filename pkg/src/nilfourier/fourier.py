"""Group Fourier transform on truncated tensor groups via induced kernels.

For a generic functional the layer-built (or prefix-radical) polarization
``h`` yields a coordinate chart: an orthonormal reordering of the Malcev basis
listing ``h`` first, whose ordered product of one-parameter exponentials
parametrizes the group with Lebesgue measure as Haar measure. The induced
representation then acts on functions of the section coordinates, and the
operator attached to an integrable function ``f`` has integral kernel

``K_f(x, y) = integral over H of f(x u y^-1) exp(i ell(log u)) du``.

This module computes such kernels numerically (with a per-evaluation affine
reframing of the ``H`` integral that keeps sheared integrands inside a fixed
box -- exact by translation invariance), shifted traces, the square-rooted
skew determinant (a Pfaffian) over the jump indices, the inversion integral
over the transverse frequency plane, and both sides of the Plancherel
identity.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .coadjoint import (
    Functional,
    JumpData,
    _log_coords,
    is_generic,
    jump_sets,
)
from .errors import (
    DegenerateSpec,
    DimensionMismatch,
    NegativeDeterminant,
    NonConvergence,
    NotGeneric,
    QuadratureUnderflow,
)
from .lie_basis import LayeredBasis
from .polarization import Subalgebra, generic_polarization, vergne_polarization
from .tensor_algebra import (
    GradedElement,
    Role,
    exp_t,
    group_inverse,
    mul,
    scaled_exponential,
)

__all__ = [
    "QuadratureSpec",
    "SchwartzFunction",
    "MalcevChart",
    "KernelOperator",
    "chart_for",
    "character",
    "kernel_values",
    "build_operator",
    "trace_shifted",
    "d_matrix",
    "sqrt_det_d",
    "c_norm",
    "invert",
    "hs_norm_sq",
    "plancherel",
    "haar_invariance_check",
    "thread_count",
]

#: Elements processed per vectorized chunk in kernel evaluation.
_CHUNK_BUDGET = 400_000

#: Finite-difference step for the per-pair frame Jacobian.
_FRAME_STEP = 1e-3


def thread_count() -> int:
    """Worker count from the NILFOURIER_THREADS environment variable (>= 1)."""
    raw = os.environ.get("NILFOURIER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# quadrature grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and boxes for the three integration stages.

    ``h_*`` controls the polarization-subgroup integral (evaluated in a
    per-pair reframed box), ``section_*`` the section/trace integrals, and
    ``t_*`` the transverse frequency plane. The section box is rescaled per
    functional by ``clamp(1/|ell_T|, 1, section_scale_cap)`` so that traces
    keep uniform coverage and resolution across the frequency plane.
    """

    h_nodes: int = 48
    h_halfwidth: float = 8.0
    section_nodes: int = 48
    section_halfwidth: float = 8.0
    t_nodes: int = 64
    t_halfwidth: float = 8.0
    section_scale_cap: float = 8.0

    def __post_init__(self) -> None:
        for name in ("h_nodes", "section_nodes", "t_nodes"):
            if getattr(self, name) < 8:
                raise DimensionMismatch(f"{name} must be at least 8")
        for name in ("h_halfwidth", "section_halfwidth", "t_halfwidth"):
            if not getattr(self, name) > 0:
                raise DimensionMismatch(f"{name} must be positive")

    @staticmethod
    def reference() -> "QuadratureSpec":
        return QuadratureSpec()

    @staticmethod
    def demo() -> "QuadratureSpec":
        """A light preset for quick structural runs (not accuracy-grade)."""
        return QuadratureSpec(h_nodes=12, section_nodes=12, t_nodes=16)

    def to_json_dict(self) -> dict:
        return {
            "h_nodes": self.h_nodes,
            "h_halfwidth": self.h_halfwidth,
            "section_nodes": self.section_nodes,
            "section_halfwidth": self.section_halfwidth,
            "t_nodes": self.t_nodes,
            "t_halfwidth": self.t_halfwidth,
            "section_scale_cap": self.section_scale_cap,
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "QuadratureSpec":
        known = {
            "h_nodes",
            "h_halfwidth",
            "section_nodes",
            "section_halfwidth",
            "t_nodes",
            "t_halfwidth",
            "section_scale_cap",
        }
        unknown = set(obj) - known
        if unknown:
            raise DimensionMismatch(f"unknown quadrature fields: {sorted(unknown)}")
        defaults = QuadratureSpec()
        kwargs = {}
        for name in known:
            if name in obj:
                cast = int if name.endswith("nodes") else float
                kwargs[name] = cast(obj[name])
        return replace(defaults, **kwargs)


def _axis(nodes: int, halfwidth: float) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid nodes and weights on ``[-halfwidth, halfwidth]``."""
    x = np.linspace(-halfwidth, halfwidth, nodes)
    w = np.full(nodes, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


def _tensor_grid(axes: list[tuple[int, float]]) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product trapezoid grid: points ``(M, dims)`` and weights ``(M,)``."""
    if not axes:
        return np.zeros((1, 0)), np.ones(1)
    xs, ws = zip(*(_axis(n, L) for n, L in axes))
    mesh = np.meshgrid(*xs, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = np.meshgrid(*ws, indexing="ij")
    w = np.ones(pts.shape[0])
    for wm in wmesh:
        w = w * wm.ravel()
    return pts, w


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SchwartzFunction:
    """A rapidly decaying function of the flat exponential coordinates.

    ``evaluator`` maps arrays of shape ``(..., n)`` to (complex) values; the
    ``decay_box`` half-widths promise ``|f| <= 1e-12 * max|f|`` outside the
    box, which integration stages use to size and sanity-check their grids.
    """

    n: int
    evaluator: object
    decay_box: np.ndarray

    def __post_init__(self) -> None:
        box = np.broadcast_to(np.asarray(self.decay_box, dtype=float), (self.n,)).copy()
        if np.any(box <= 0):
            raise DimensionMismatch("decay box half-widths must be positive")
        object.__setattr__(self, "decay_box", box)

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1] != self.n:
            raise DimensionMismatch(f"coordinates must have trailing size {self.n}")
        return np.asarray(self.evaluator(coords))

    @staticmethod
    def gaussian(n: int, scale: float = 1.0) -> "SchwartzFunction":
        """The isotropic Gaussian ``exp(-|c|^2 / (2 scale^2))``.

        Its decay box solves ``exp(-b^2/(2 scale^2)) = 1e-12``.
        """
        halfwidth = scale * math.sqrt(2.0 * 12.0 * math.log(10.0))

        def evaluator(c: np.ndarray) -> np.ndarray:
            return np.exp(-0.5 * np.sum(c * c, axis=-1) / scale**2)

        return SchwartzFunction(n=n, evaluator=evaluator, decay_box=np.full(n, halfwidth))


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------


class MalcevChart:
    """Orthonormal reordering of the Malcev basis adapted to a subalgebra.

    Columns of ``W`` list first a basis of the subalgebra (layer-descending),
    then its orthogonal complement (layer-descending). Every prefix of the
    ordering spans an ideal (checked at construction), so the ordered product
    ``gamma(alpha) = exp(alpha_n W_n) ... exp(alpha_1 W_1)`` is a global chart
    that pushes Lebesgue measure to Haar measure, and leading coordinates can
    be peeled off one exponential at a time.
    """

    def __init__(self, basis: LayeredBasis, sub: Subalgebra | None = None):
        self.basis = basis
        n = basis.dim
        if sub is None:
            sub = Subalgebra(basis, np.zeros((0, n)))
        if not sub.is_layer_graded():
            raise NotGeneric("chart construction needs a layer-graded subalgebra")
        h_cols: list[np.ndarray] = []
        s_cols: list[np.ndarray] = []
        for k in range(basis.spec.N, 0, -1):
            sl = basis.layer_slice(k)
            m_k = basis.layers[k - 1].dim
            if m_k == 0:
                continue
            block = sub.vectors[:, sl]
            if block.size:
                u, s, vt = np.linalg.svd(block, full_matrices=True)
                r = int(np.sum(s > 1e-12 * s[0])) if s.size and s[0] > 0 else 0
            else:
                vt = np.eye(m_k)
                r = 0
            for v in vt[:r]:
                e = np.zeros(n)
                e[sl] = v
                h_cols.append(e)
            for v in vt[r:]:
                e = np.zeros(n)
                e[sl] = v
                s_cols.append(e)
        self.q_h = len(h_cols)
        self.q = len(s_cols)
        self.W = np.stack(h_cols + s_cols, axis=-1) if (h_cols or s_cols) else np.zeros((n, 0))
        if self.q_h != sub.dim or self.q_h + self.q != n:
            raise NotGeneric("subalgebra is not layer-graded enough to chart")
        self._elements = [self._element_of(self.W[:, j]) for j in range(n)]
        self._validate_prefix_ideals()

    def _element_of(self, flat: np.ndarray) -> GradedElement:
        basis = self.basis
        spec = basis.spec
        levels = [np.zeros((s,)) for s in spec.tensor_level_sizes()]
        for k in range(1, spec.N + 1):
            if basis.layers[k - 1].dim:
                levels[k] = basis.embed_coords(k, flat[basis.layer_slice(k)])
        return GradedElement(spec, tuple(levels), Role.ALGEBRA)

    def _validate_prefix_ideals(self, tol: float = 1e-10) -> None:
        basis = self.basis
        n = basis.dim
        sc = basis.structure_tensor
        # brackets[a, j, :] = [X_a, W_j] in flat coordinates
        brackets = np.einsum("abt,bj->ajt", sc, self.W)
        for p in range(1, n + 1):
            wp = self.W[:, :p]
            block = brackets[:, :p, :].reshape(-1, n)
            resid = block - (block @ wp) @ wp.T
            scale = 1.0 + float(np.max(np.abs(block))) if block.size else 1.0
            if block.size and float(np.max(np.abs(resid))) > tol * scale:
                raise NotGeneric(f"chart prefix {p} does not span an ideal")

    # -- chart maps ---------------------------------------------------------

    def chart_element(self, j: int) -> GradedElement:
        return self._elements[j]

    def gamma(self, alpha: np.ndarray) -> GradedElement:
        """Ordered exponential product over all chart coordinates (batched)."""
        alpha = np.asarray(alpha, dtype=float)
        n = self.basis.dim
        if alpha.shape[-1] != n:
            raise DimensionMismatch(f"gamma needs {n} coordinates")
        g = GradedElement.identity(self.basis.spec, alpha.shape[:-1])
        for j in range(n - 1, -1, -1):
            g = mul(g, scaled_exponential(self._elements[j], alpha[..., j]))
        return g

    def gamma_h(self, a: np.ndarray) -> GradedElement:
        """Ordered exponential product over the subalgebra coordinates only."""
        a = np.asarray(a, dtype=float)
        if a.shape[-1] != self.q_h:
            raise DimensionMismatch(f"gamma_h needs {self.q_h} coordinates")
        g = GradedElement.identity(self.basis.spec, a.shape[:-1])
        for j in range(self.q_h - 1, -1, -1):
            g = mul(g, scaled_exponential(self._elements[j], a[..., j]))
        return g

    def section(self, y: np.ndarray) -> GradedElement:
        """Section embedding: chart point with zero subalgebra coordinates."""
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.q:
            raise DimensionMismatch(f"section needs {self.q} coordinates")
        g = GradedElement.identity(self.basis.spec, y.shape[:-1])
        for j in range(self.basis.dim - 1, self.q_h - 1, -1):
            g = mul(g, scaled_exponential(self._elements[j], y[..., j - self.q_h]))
        return g

    def log_chart_coords(self, g: GradedElement) -> np.ndarray:
        """Chart-basis coordinates of ``log g`` (batched)."""
        return _log_coords(self.basis, g) @ self.W

    def decompose(self, g: GradedElement) -> tuple[np.ndarray, GradedElement]:
        """Split ``g = section(y) * h`` with ``h`` in the subalgebra's subgroup.

        Peels the section coordinates top-down: the leading chart coordinate
        of ``log g`` is exact because the remaining chart prefix spans an
        ideal. Returns the section coordinates and the subgroup remainder.
        """
        cur = g
        sec = np.empty(g.batch_shape + (self.q,))
        for j in range(self.basis.dim - 1, self.q_h - 1, -1):
            coeff = self.log_chart_coords(cur)[..., j]
            sec[..., j - self.q_h] = coeff
            cur = mul(scaled_exponential(self._elements[j], -coeff), cur)
        return sec, cur


def chart_for(ell: Functional) -> MalcevChart:
    """Chart from the layer-built polarization, falling back to the
    prefix-radical construction for the degenerate (2, 3) algebra."""
    try:
        sub = generic_polarization(ell)
    except DegenerateSpec:
        sub = vergne_polarization(ell)
    return MalcevChart(ell.basis, sub)


def character(ell: Functional, chart: MalcevChart, a: np.ndarray) -> np.ndarray:
    """Unitary character ``exp(i ell(log gamma_h(a)))`` of the subgroup (batched)."""
    g = chart.gamma_h(a)
    return np.exp(1j * (_log_coords(chart.basis, g) @ ell.flat))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def _section_scale(ell: Functional, jump: JumpData, qspec: QuadratureSpec) -> float:
    """Per-functional scaling of the section box.

    Kernels concentrate on a ridge whose width shrinks like ``1/|ell_T|``,
    so the section box must shrink at the same rate: ``box = halfwidth /
    |ell_T|`` keeps a constant number of integrand widths inside the grid at
    every frequency. The same product ``|ell_T| * box`` also bounds the
    subgroup phase rate at the box edge (conjugating the subgroup probe by a
    section point at distance ``w`` amplifies the character's rate by about
    ``|ell_T| * w``), so when the subgroup grid is coarser than the
    reference resolution the box is tightened further to its resolvable
    rate, trading smooth truncation error for wild aliasing error. At the
    reference resolution the tightening factor is one.
    """
    t_idx = [ell.basis.flat_index(k, i) for (k, i) in jump.T]
    norm = float(np.linalg.norm(ell.flat[t_idx])) if t_idx else 0.0
    tighten = min(1.0, _resolvable_rate(qspec) / qspec.section_halfwidth)
    if norm <= 0:
        return qspec.section_scale_cap * tighten
    return float(min(tighten / norm, qspec.section_scale_cap))


def _resolvable_rate(qspec: QuadratureSpec) -> float:
    """Highest phase rate the subgroup grid can sample (90% of Nyquist)."""
    return 0.9 * math.pi * (qspec.h_nodes - 1) / (2.0 * qspec.h_halfwidth)


def _h_phase_rate(ell: Functional, chart: MalcevChart) -> float:
    """Peak oscillation rate of the subgroup integral for this functional.

    The character contributes ``exp(i a . ell_H)`` inside every subgroup
    integral, an oscillation of rate ``|ell_H|`` that no choice of section
    box can slow down. Frequency nodes whose rate exceeds the subgroup
    grid's resolvable rate produce aliased garbage rather than small values,
    so integrators skip them (coarse grids then integrate a smaller resolved
    frequency box, a smooth truncation instead of a wild error).
    """
    ell_h = (ell.flat @ chart.W)[: chart.q_h]
    return float(np.linalg.norm(ell_h))


def _check_h_box(f: SchwartzFunction, qspec: QuadratureSpec) -> None:
    if qspec.h_halfwidth < float(np.max(f.decay_box)):
        raise QuadratureUnderflow(
            f"H box half-width {qspec.h_halfwidth} is smaller than the "
            f"function's decay box {float(np.max(f.decay_box))}"
        )


def kernel_values(
    f: SchwartzFunction,
    ell: Functional,
    chart: MalcevChart,
    qspec: QuadratureSpec,
    xs: np.ndarray,
    ys: np.ndarray,
) -> np.ndarray:
    """Kernel ``K_f(section(x), section(y))`` for paired section coordinates.

    ``xs`` and ``ys`` have shape ``(P, q)``; returns complex values ``(P,)``.

    The subgroup integral runs over a per-pair affine reframing ``a = a* +
    R^-1 b`` of the chart coordinates, where ``J = QR`` is the Jacobian of
    ``a -> exp-coords(x gamma_h(a) y^-1)`` at ``a = 0`` and ``a*`` recenters
    the integrand. The substitution is exact (the subgroup's Haar measure is
    Lebesgue in its chart), and it keeps the effective integrand inside the
    fixed box even when large section values shear it.
    """
    _check_h_box(f, qspec)
    basis = chart.basis
    n = basis.dim
    q_h = chart.q_h
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 2:
        xs = xs.reshape(-1, chart.q)
    if ys.ndim != 2:
        ys = ys.reshape(-1, chart.q)
    if xs.shape != ys.shape or xs.shape[1] != chart.q:
        raise DimensionMismatch("xs and ys must pair up with the section dimension")
    P = xs.shape[0]

    bpts, bw = _tensor_grid([(qspec.h_nodes, qspec.h_halfwidth)] * q_h)
    M = bpts.shape[0]
    ell_h = (ell.flat @ chart.W)[:q_h]

    # Perturbation subgroup points for the frame Jacobian, shared by all pairs.
    probes = []
    for j in range(q_h):
        e = np.zeros(q_h)
        e[j] = _FRAME_STEP
        probes.append((chart.gamma_h(e), chart.gamma_h(-e)))

    out = np.empty(P, dtype=complex)
    chunk = max(1, _CHUNK_BUDGET // max(M, 1))
    for lo in range(0, P, chunk):
        hi = min(P, lo + chunk)
        gx = chart.section(xs[lo:hi])
        gyi = group_inverse(chart.section(ys[lo:hi]))
        c0 = _log_coords(basis, mul(gx, gyi))
        if q_h:
            cols = []
            for up, um in probes:
                mp = _log_coords(basis, mul(mul(gx, up.broadcast_to((hi - lo,))), gyi))
                mm = _log_coords(basis, mul(mul(gx, um.broadcast_to((hi - lo,))), gyi))
                cols.append((mp - mm) / (2.0 * _FRAME_STEP))
            jac = np.stack(cols, axis=-1)  # (C, n, q_h)
            qmat, rmat = np.linalg.qr(jac)
            diag = np.abs(np.diagonal(rmat, axis1=-2, axis2=-1))
            bad = np.min(diag, axis=-1) <= 1e-12 * np.maximum(np.max(diag, axis=-1), 1.0)
            if np.any(bad):
                rmat = rmat.copy()
                qmat = qmat.copy()
                rmat[bad] = np.eye(q_h)
                qmat[bad] = np.eye(n, q_h)
            rinv = np.linalg.inv(rmat)
            astar = -np.einsum("pij,pj->pi", rinv, np.einsum("pni,pn->pi", qmat, c0))
            det_r = np.abs(np.prod(np.diagonal(rmat, axis1=-2, axis2=-1), axis=-1))
            apts = astar[:, None, :] + np.einsum("pij,mj->pmi", rinv, bpts)
            u = chart.gamma_h(apts)
            inner = mul(mul(gx.expand_batch(1), u), gyi.expand_batch(1))
            coords = _log_coords(basis, inner)
            fvals = f(coords)
            phase = np.exp(1j * (apts @ ell_h))
            out[lo:hi] = (fvals * phase) @ bw / det_r
        else:
            out[lo:hi] = f(c0)
    return out


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """A kernel matrix sampled on a section grid, with its quadrature weights."""

    ell: Functional
    chart: MalcevChart
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray

    def trace_grid(self) -> complex:
        return complex(np.sum(self.weights * np.diagonal(self.matrix)))

    def hs_sq_grid(self) -> float:
        return float(
            np.real(
                np.sum(self.weights[:, None] * self.weights[None, :] * np.abs(self.matrix) ** 2)
            )
        )

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def build_operator(
    f: SchwartzFunction,
    ell: Functional,
    chart: MalcevChart,
    qspec: QuadratureSpec,
    jump: JumpData | None = None,
) -> KernelOperator:
    """Sample the kernel on the (adaptively scaled) section grid."""
    if jump is None:
        jump = jump_sets(ell.basis)
    scale = _section_scale(ell, jump, qspec)
    nodes, weights = _tensor_grid(
        [(qspec.section_nodes, qspec.section_halfwidth * scale)] * chart.q
    )
    mq = nodes.shape[0]
    xi, yi = np.meshgrid(np.arange(mq), np.arange(mq), indexing="ij")
    kv = kernel_values(f, ell, chart, qspec, nodes[xi.ravel()], nodes[yi.ravel()])
    return KernelOperator(ell, chart, nodes, weights, kv.reshape(mq, mq))


def trace_shifted(
    f: SchwartzFunction,
    ell: Functional,
    chart: MalcevChart,
    qspec: QuadratureSpec,
    x: GradedElement,
    jump: JumpData | None = None,
) -> complex:
    """Shifted trace ``integral of K_f(x section(y), section(y)) dy``.

    Decomposes ``x section(y) = section(w) h`` and applies the kernel's
    subgroup equivariance, so only section-to-section kernel values are
    needed: the integrand is ``exp(-i ell(log h)) K_f(section(w), section(y))``.
    """
    if x.role is not Role.GROUP or x.batch_shape != ():
        raise DimensionMismatch("trace_shifted expects one unbatched group element")
    if jump is None:
        jump = jump_sets(ell.basis)
    scale = _section_scale(ell, jump, qspec)
    ys, wy = _tensor_grid([(qspec.section_nodes, qspec.section_halfwidth * scale)] * chart.q)
    gy = chart.section(ys)
    gxy = mul(x.broadcast_to((ys.shape[0],)), gy)
    ws, rem = chart.decompose(gxy)
    twist = np.exp(-1j * (_log_coords(chart.basis, rem) @ ell.flat))
    kv = kernel_values(f, ell, chart, qspec, ws, ys)
    return complex(np.sum(wy * twist * kv))


# ---------------------------------------------------------------------------
# Pfaffian and inversion
# ---------------------------------------------------------------------------


def d_matrix(ell: Functional, jump: JumpData | None = None) -> np.ndarray:
    """Skew pairing matrix over the jump indices, in Malcev order."""
    if jump is None:
        jump = jump_sets(ell.basis)
    idx = [ell.basis.flat_index(k, i) for (k, i) in jump.S]
    skew = ell.basis.skew_form(ell.flat)
    return skew[np.ix_(idx, idx)]


def _skew_tridiagonalize(a: np.ndarray) -> np.ndarray:
    """Reduce a real skew matrix to tridiagonal form by Householder similarity."""
    t = a.copy()
    n = t.shape[0]
    for j in range(n - 2):
        x = t[j + 1 :, j].copy()
        norm = np.linalg.norm(x)
        if norm <= 1e-300:
            continue
        v = x
        v[0] += math.copysign(norm, x[0]) if x[0] != 0 else norm
        vn = np.linalg.norm(v)
        if vn <= 1e-300:
            continue
        v = v / vn
        block = t[j + 1 :, :]
        block -= 2.0 * np.outer(v, v @ block)
        block = t[:, j + 1 :]
        block -= 2.0 * np.outer(block @ v, v)
    return t


def sqrt_det_d(ell: Functional, jump: JumpData | None = None) -> float:
    """``sqrt(det D)`` via the absolute Pfaffian of the jump-index skew matrix.

    Tridiagonalizes the skew matrix orthogonally and multiplies the odd
    superdiagonal entries; the square of that (up to sign) is the
    determinant. Raises :class:`NegativeDeterminant` when the determinant is
    genuinely negative, which a valid skew pairing can never produce.
    """
    dmat = d_matrix(ell, jump)
    m = dmat.shape[0]
    if m == 0:
        return 1.0
    if m % 2 == 1:
        return 0.0
    scale = float(np.max(np.abs(dmat)))
    det = float(np.linalg.det(dmat))
    if det < 0 and abs(det) > 1e-10 * max(scale, 1.0) ** m:
        raise NegativeDeterminant(
            f"jump-index pairing has negative determinant {det:.3e}"
        )
    tri = _skew_tridiagonalize(dmat)
    pf = 1.0
    for i in range(0, m - 1, 2):
        pf *= tri[i, i + 1]
    return abs(pf)


def c_norm(basis: LayeredBasis, jump: JumpData | None = None) -> float:
    """Inversion normalization ``(2 pi)^-(n - |S|/2)``."""
    if jump is None:
        jump = jump_sets(basis)
    return (2.0 * math.pi) ** (-(basis.dim - len(jump.S) / 2.0))


def _t_plane_grid(
    basis: LayeredBasis, jump: JumpData, qspec: QuadratureSpec, t_nodes: int | None = None
) -> tuple[list[Functional], np.ndarray]:
    nodes = t_nodes if t_nodes is not None else qspec.t_nodes
    pts, w = _tensor_grid([(nodes, qspec.t_halfwidth)] * len(jump.T))
    ells = []
    for row in pts:
        flat = np.zeros(basis.dim)
        for (k, i), val in zip(jump.T, row):
            flat[basis.flat_index(k, i)] = val
        ells.append(Functional(basis, flat))
    return ells, w


def _map_nodes(worker, count: int):
    """Run ``worker(i)`` for each node index, honoring NILFOURIER_THREADS.

    Results are reduced in index order either way, so the output does not
    depend on the worker count.
    """
    workers = thread_count()
    if workers == 1:
        return [worker(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(count)))


def invert(
    f: SchwartzFunction,
    x: GradedElement,
    basis: LayeredBasis,
    qspec: QuadratureSpec | None = None,
    convergence_tol: float | None = None,
) -> complex:
    """Reconstruct ``f(x)`` from its operator-valued transform.

    Integrates ``sqrt(det D) * trace_shifted`` over the transverse frequency
    plane and applies the ``(2 pi)`` normalization. Non-generic grid points
    (a null set) contribute zero, as do nodes whose subgroup phase rate the
    grid cannot resolve (see :func:`_h_phase_rate`; at the reference
    resolution no node is dropped). With ``convergence_tol`` set, the
    frequency grid is rerun at doubled node count and a relative change
    beyond the tolerance raises :class:`NonConvergence`.
    """
    if qspec is None:
        qspec = QuadratureSpec.reference()
    jump = jump_sets(basis)
    norm = c_norm(basis, jump)
    rate_limit = _resolvable_rate(qspec)

    def run(t_nodes: int) -> complex:
        ells, wts = _t_plane_grid(basis, jump, qspec, t_nodes)

        def node(i: int) -> complex:
            ell = ells[i]
            if not is_generic(ell):
                return 0.0 + 0.0j
            sd = sqrt_det_d(ell, jump)
            if sd <= 0.0:
                return 0.0 + 0.0j
            chart = chart_for(ell)
            if _h_phase_rate(ell, chart) > rate_limit:
                return 0.0 + 0.0j
            tr = trace_shifted(f, ell, chart, qspec, x, jump)
            return wts[i] * sd * tr

        parts = _map_nodes(node, len(ells))
        return norm * sum(parts)

    value = run(qspec.t_nodes)
    if convergence_tol is not None:
        refined = run(2 * qspec.t_nodes)
        if abs(refined - value) > convergence_tol * (1.0 + abs(refined)):
            raise NonConvergence(
                f"doubling the frequency grid moved the result by "
                f"{abs(refined - value):.3e} (tolerance {convergence_tol})"
            )
    return value


# ---------------------------------------------------------------------------
# Plancherel
# ---------------------------------------------------------------------------


def hs_norm_sq(
    f: SchwartzFunction,
    ell: Functional,
    chart: MalcevChart,
    qspec: QuadratureSpec,
    jump: JumpData | None = None,
) -> float:
    """Squared Hilbert-Schmidt norm of the kernel operator.

    Integrates ``|K(x, y)|^2`` in rotated coordinates ``u = x - y`` (fixed
    box: the kernel decays like the function there) and ``v = x + y``
    (adaptively scaled box), which stays uniformly resolved over the
    frequency plane where a plain product grid would alias the diagonal
    ridge.
    """
    if jump is None:
        jump = jump_sets(ell.basis)
    q = chart.q
    scale = _section_scale(ell, jump, qspec)
    upts, uw = _tensor_grid([(qspec.section_nodes, qspec.section_halfwidth)] * q)
    vpts, vw = _tensor_grid(
        [(qspec.section_nodes, 2.0 * qspec.section_halfwidth * scale)] * q
    )
    mu, mv = upts.shape[0], vpts.shape[0]
    ui, vi = np.meshgrid(np.arange(mu), np.arange(mv), indexing="ij")
    xs = 0.5 * (vpts[vi.ravel()] + upts[ui.ravel()])
    ys = 0.5 * (vpts[vi.ravel()] - upts[ui.ravel()])
    kv = kernel_values(f, ell, chart, qspec, xs, ys)
    dens = (np.abs(kv) ** 2).reshape(mu, mv)
    return float(2.0**-q * (uw @ dens @ vw))


def norm_sq_direct(f: SchwartzFunction, basis: LayeredBasis, qspec: QuadratureSpec) -> float:
    """``|f|_2^2`` by tensor-grid quadrature over the decay box."""
    axes = [(qspec.section_nodes, float(b)) for b in f.decay_box]
    pts, w = _tensor_grid(axes)
    vals = f(pts)
    return float(np.real(np.sum(w * np.abs(vals) ** 2)))


def plancherel(
    f: SchwartzFunction,
    basis: LayeredBasis,
    qspec: QuadratureSpec | None = None,
) -> dict:
    """Both sides of the Plancherel identity and their ratio.

    The left side is the direct squared norm; the right side integrates the
    squared Hilbert-Schmidt norms of the transform over the frequency plane
    with the same ``sqrt(det D)`` density and normalization as inversion.
    """
    if qspec is None:
        qspec = QuadratureSpec.reference()
    jump = jump_sets(basis)
    norm = c_norm(basis, jump)
    rate_limit = _resolvable_rate(qspec)
    lhs = norm_sq_direct(f, basis, qspec)
    ells, wts = _t_plane_grid(basis, jump, qspec)

    def node(i: int) -> float:
        ell = ells[i]
        if not is_generic(ell):
            return 0.0
        sd = sqrt_det_d(ell, jump)
        if sd <= 0.0:
            return 0.0
        chart = chart_for(ell)
        if _h_phase_rate(ell, chart) > rate_limit:
            return 0.0
        return wts[i] * sd * hs_norm_sq(f, ell, chart, qspec, jump)

    parts = _map_nodes(node, len(ells))
    rhs = norm * math.fsum(parts)
    return {"lhs": lhs, "rhs": rhs, "ratio": rhs / lhs if lhs else math.inf}


# ---------------------------------------------------------------------------
# Haar measure check
# ---------------------------------------------------------------------------


def haar_invariance_check(
    basis: LayeredBasis,
    rng: np.random.Generator | None = None,
    n_translates: int = 10,
    n_samples: int = 1_000_000,
    box: float = 12.0,
    translate_scale: float = 0.3,
    chunk: int = 250_000,
) -> dict:
    """Monte Carlo check that the chart pushes Lebesgue measure to Haar measure.

    Integrates a fixed Gaussian observable of the exponential coordinates
    against the chart measure, then against its pullback by random left
    translations (paired samples), and against the one-shot exponential
    parametrization. All estimates must agree within three standard errors.
    """
    if rng is None:
        rng = np.random.default_rng()
    chart = MalcevChart(basis)  # identity chart: plain Malcev ordering
    n = basis.dim

    def observable(g: GradedElement) -> np.ndarray:
        coords = _log_coords(basis, g)
        return np.exp(-0.5 * np.sum(coords * coords, axis=-1))

    translates = [
        scaled_exponential(
            basis.algebra_element(rng.standard_normal(basis.dim)), translate_scale
        )
        for _ in range(n_translates)
    ]
    base_sum = 0.0
    trans_sum = np.zeros(n_translates)
    trans_sq = np.zeros(n_translates)
    exp_sum = 0.0
    exp_sq = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        alpha = rng.uniform(-box, box, size=(m, n))
        g = chart.gamma(alpha)
        phi = observable(g)
        base_sum += float(np.sum(phi))
        # one-shot exponential parametrization of the same coordinates
        phi_exp = observable(exp_t(_flat_algebra(basis, alpha)))
        diff = phi_exp - phi
        exp_sum += float(np.sum(diff))
        exp_sq += float(np.sum(diff * diff))
        for t, g0 in enumerate(translates):
            phi_t = observable(mul(g0.broadcast_to((m,)), g))
            diff = phi_t - phi
            trans_sum[t] += float(np.sum(diff))
            trans_sq[t] += float(np.sum(diff * diff))
        done += m

    vol = (2.0 * box) ** n
    base = vol * base_sum / n_samples
    results = []
    ok = True
    for t in range(n_translates):
        mean = trans_sum[t] / n_samples
        var = max(trans_sq[t] / n_samples - mean**2, 0.0) / n_samples
        se = vol * math.sqrt(var)
        dev = vol * mean
        passed = abs(dev) <= 3.0 * se + 1e-12
        ok = ok and passed
        results.append({"deviation": dev, "se": se, "passed": passed})
    mean = exp_sum / n_samples
    var = max(exp_sq / n_samples - mean**2, 0.0) / n_samples
    exp_dev = vol * mean
    exp_se = vol * math.sqrt(var)
    exp_ok = abs(exp_dev) <= 3.0 * exp_se + 1e-12
    return {
        "base_integral": base,
        "translates": results,
        "exp_chart_deviation": exp_dev,
        "exp_chart_se": exp_se,
        "passed": bool(ok and exp_ok),
    }


def _flat_algebra(basis: LayeredBasis, flat: np.ndarray) -> GradedElement:
    """Algebra element with the given flat Malcev coordinates (batched)."""
    return basis.algebra_element(flat)
