"""Independent oracles and frozen expected values for the test suite.

Everything here is computed by definition-level brute force (enumeration,
fine Riemann sums, closed forms worked out by hand) without touching the
package's own algorithms, so tests compare two genuinely different routes.
"""

from __future__ import annotations

import math

import numpy as np

# ---------------------------------------------------------------------------
# Lyndon words by definition: strictly smaller than all proper rotations.
# ---------------------------------------------------------------------------


def brute_force_lyndon(d: int, max_len: int) -> dict[int, list[tuple[int, ...]]]:
    """Enumerate all words over {1..d} up to ``max_len`` and keep Lyndon ones."""
    out: dict[int, list[tuple[int, ...]]] = {k: [] for k in range(1, max_len + 1)}
    for k in range(1, max_len + 1):
        for code in range(d**k):
            word = []
            c = code
            for _ in range(k):
                word.append(c % d + 1)
                c //= d
            word = tuple(reversed(word))
            rotations = [word[i:] + word[:i] for i in range(1, k)]
            if all(word < r for r in rotations):
                out[k].append(word)
        out[k].sort()
    return out


def brute_force_witt(d: int, k: int) -> int:
    return len(brute_force_lyndon(d, k)[k])


# Hand-checked layer dimension examples.
WITT_EXAMPLES = {
    (3, 2): 3,
    (3, 3): 8,
    (2, 1): 2,
    (2, 2): 1,
    (2, 3): 2,
    (2, 4): 3,
    (2, 5): 6,
    (5, 1): 5,
}


# ---------------------------------------------------------------------------
# Degree-3 Baker-Campbell-Hausdorff closed form.
# ---------------------------------------------------------------------------


def bch_degree3(x, y, commutator):
    """``x + y + [x,y]/2 + [x,[x,y]]/12 - [y,[x,y]]/12`` using caller-supplied ops.

    ``x`` and ``y`` must support ``+`` and scalar ``*``; ``commutator`` is a
    binary bracket. Exact for nilpotency degree <= 3.
    """
    c = commutator(x, y)
    return x + y + 0.5 * c + (1.0 / 12.0) * commutator(x, c) + (-1.0 / 12.0) * commutator(y, c)


# ---------------------------------------------------------------------------
# Iterated integrals of a piecewise linear path by cumulative Riemann sums.
# ---------------------------------------------------------------------------


def refine_polyline(points: np.ndarray, per_segment: int) -> np.ndarray:
    """Sample each segment of a polyline at ``per_segment`` equal steps."""
    points = np.asarray(points, dtype=float)
    rows = [points[0]]
    for a, b in zip(points[:-1], points[1:]):
        for s in range(1, per_segment + 1):
            rows.append(a + (b - a) * (s / per_segment))
    return np.array(rows)


def iterated_integral(points: np.ndarray, word: tuple[int, ...], per_segment: int = 4000) -> float:
    """Coefficient of ``word`` in the signature, via nested cumulative sums.

    Uses the recursion ``F_j(t) = integral of F_{j-1} d(path component w_j)``
    with trapezoid accumulation on a fine refinement; the result converges at
    second order in the step, independent of any group machinery.
    """
    fine = refine_polyline(points, per_segment)
    increments = np.diff(fine, axis=0)
    f = np.ones(fine.shape[0])
    for letter in word:
        dcomp = increments[:, letter - 1]
        mid = 0.5 * (f[:-1] + f[1:])
        f = np.concatenate([[0.0], np.cumsum(mid * dcomp)])
    return float(f[-1])


# ---------------------------------------------------------------------------
# Heisenberg closed forms (flat coordinate order: bracket, first, second).
#
# With the one-dimensional section chart used by the package, the kernel of
# the standard Gaussian at frequency ``lam`` on the bracket coordinate is
# separable in x - y and x + y, and every downstream quantity integrates in
# closed form.
# ---------------------------------------------------------------------------

TWO_PI = 2.0 * math.pi


def heisenberg_kernel(lam: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Closed-form kernel of exp(-|c|^2/2) at frequency ``lam``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (
        TWO_PI
        * np.exp(-0.5 * (x - y) ** 2)
        * math.exp(-0.5 * lam**2)
        * np.exp(-0.125 * lam**2 * (x + y) ** 2)
    )


def heisenberg_trace(lam: float) -> float:
    """Closed-form trace of the Gaussian's kernel operator at ``lam``."""
    return TWO_PI * math.exp(-0.5 * lam**2) * math.sqrt(TWO_PI) / abs(lam)


def heisenberg_hs_sq(lam: float) -> float:
    """Closed-form squared Hilbert-Schmidt norm at ``lam``."""
    return TWO_PI**2 * math.exp(-(lam**2)) * math.pi / abs(lam)


# invert() targets: flat coordinates are (bracket, first, second).
HEISENBERG_INVERT_CASES = [
    # (flat log coordinates, expected value of exp(-|c|^2/2))
    ((0.0, 0.0, 0.0), 1.0),
    ((0.0, 0.3, 0.0), math.exp(-0.045)),
    ((0.1, 0.0, 0.2), math.exp(-0.025)),
]

# ||f||_2^2 for the standard Gaussian on R^3, and the Plancherel right side.
HEISENBERG_NORM_SQ = math.pi**1.5

# The inversion normalization constant for the Heisenberg group.
HEISENBERG_C_NORM = (TWO_PI) ** -2


# ---------------------------------------------------------------------------
# Frozen structural expectations.
# ---------------------------------------------------------------------------

# Jump (S) and transverse (T) index sets, as sorted (layer, position) pairs.
JUMP_SET_EXAMPLES = {
    (3, 3): {
        "S": [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)],
        "T": [(3, 1), (3, 2), (3, 3), (3, 4), (3, 5), (3, 6), (3, 7), (3, 8)],
    },
    (2, 2): {
        "S": [(1, 1), (1, 2)],
        "T": [(2, 1)],
    },
    (3, 2): {
        "S": [(1, 1), (1, 2)],
        "T": [(1, 3), (2, 1), (2, 2), (2, 3)],
    },
    # Hand-derived degenerate case.
    (2, 3): {
        "S": [(1, 1), (2, 1)],
        "T": [(1, 2), (3, 1), (3, 2)],
    },
}

# Expected polarization dimensions: n - (full generic orbit dim) / 2.
POLARIZATION_DIMS = {
    (2, 2): 2,  # n=3, orbit 2
    (2, 3): 4,  # n=5, orbit 2 (degenerate: radical construction)
    (2, 4): 6,  # n=8, orbit 4
    (3, 2): 5,  # n=6, orbit 2 (the skew form lives on layer 1 alone, rank 2)
    (3, 3): 11,  # n=14, orbit 6
}

# Full generic orbit dimensions (twice the number of S pairs).
FULL_ORBIT_DIMS = {
    (2, 2): 2,
    (2, 3): 2,
    (2, 4): 4,
    (3, 2): 2,
    (3, 3): 6,
    (2, 5): 6,
}
