"""Symplectic linear algebra for Gaussian covariance matrices.

All matrices use interleaved quadrature ordering ``(q1, p1, ..., qn, pn)``
and the convention where the vacuum covariance matrix is the identity.
Modes are labelled ``1..n`` in every public function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])

#: Absolute eigenvalue tolerance used by physicality and PPT verdicts.
EIG_TOL = 1e-9


def _check_modes(n: int, modes: Iterable[int]) -> list[int]:
    modes = [int(m) for m in modes]
    for m in modes:
        if not 1 <= m <= n:
            raise ValueError(f"mode {m} out of range 1..{n}")
    return modes


def num_modes(V: np.ndarray) -> int:
    """Return the mode count of a covariance matrix, validating its shape."""
    V = np.asarray(V)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
        raise ValueError(f"expected a square 2n x 2n matrix, got shape {V.shape}")
    return V.shape[0] // 2


def as_covmat(V) -> np.ndarray:
    """Validate and symmetrize a covariance matrix.

    Args:
        V: array-like of shape (2n, 2n).

    Returns:
        A float copy of ``V`` symmetrized as ``(V + V.T) / 2``.

    Raises:
        ValueError: if the shape is wrong, entries are not finite, or the
            asymmetry exceeds 1e-12 relative to the matrix scale.
    """
    V = np.array(V, dtype=float)
    num_modes(V)
    if not np.all(np.isfinite(V)):
        raise ValueError("covariance matrix has non-finite entries")
    scale = max(1.0, np.abs(V).max())
    if np.abs(V - V.T).max() > 1e-12 * scale:
        raise ValueError("covariance matrix is not symmetric")
    return 0.5 * (V + V.T)


def symplectic_form(n: int) -> np.ndarray:
    """Symplectic form ``Omega = omega (+) ... (+) omega`` on ``n`` modes.

    Args:
        n: number of modes, at least 1.

    Returns:
        The (2n, 2n) antisymmetric matrix with ``omega = [[0, 1], [-1, 0]]``
        blocks on the diagonal.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return np.kron(np.eye(int(n)), OMEGA_1)


def real_embed(R: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Real representation ``[[R, -S], [S, R]]`` of the Hermitian matrix ``R + iS``.

    Each eigenvalue of ``R + iS`` appears twice in the spectrum of the result.

    Args:
        R: real symmetric matrix.
        S: real antisymmetric matrix of the same shape.

    Returns:
        Real symmetric matrix of twice the dimension.
    """
    R = np.asarray(R, dtype=float)
    S = np.asarray(S, dtype=float)
    if R.ndim != 2 or R.shape != S.shape or R.shape[0] != R.shape[1]:
        raise ValueError(f"shape mismatch: {R.shape} vs {S.shape}")
    return np.block([[R, -S], [S, R]])


def min_eig(M: np.ndarray) -> float:
    """Smallest eigenvalue of a real symmetric matrix."""
    return float(np.linalg.eigvalsh(M)[0])


def is_physical(V: np.ndarray, tol: float = EIG_TOL) -> tuple[bool, float]:
    """Check the uncertainty relation ``V + i Omega >= 0``.

    Args:
        V: covariance matrix.
        tol: non-negative slack on the minimum eigenvalue.

    Returns:
        ``(physical, m)`` where ``m`` is the minimum eigenvalue of the real
        embedding of ``V + i Omega``.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    V = np.asarray(V, dtype=float)
    n = num_modes(V)
    m = min_eig(real_embed(V, symplectic_form(n)))
    return m >= -tol, m


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Williamson spectrum of a positive definite covariance matrix.

    Args:
        V: positive definite (2n, 2n) matrix.

    Returns:
        Sorted array of the ``n`` symplectic eigenvalues.

    Raises:
        ValueError: if ``V`` is not positive definite.
    """
    V = as_covmat(V)
    n = num_modes(V)
    if min_eig(V) <= 0:
        raise ValueError("covariance matrix is not positive definite")
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ V))
    # eigenvalues come in +/- pairs; keep one of each pair
    return np.sort(ev)[::2]


@dataclass(frozen=True)
class Bipartition:
    """Unordered split of modes ``1..n`` into two non-empty sides.

    ``side_a`` is the smaller side (the one containing mode 1 when both have
    equal size), so ``{A|B}`` and ``{B|A}`` normalize to the same value.
    """

    n: int
    side_a: tuple[int, ...]
    side_b: tuple[int, ...]

    @classmethod
    def from_side(cls, n: int, side: Iterable[int]) -> "Bipartition":
        """Build the cut separating ``side`` from its complement."""
        side = set(_check_modes(n, side))
        rest = set(range(1, n + 1)) - side
        if not side or not rest:
            raise ValueError("both sides of a cut must be non-empty")
        if len(side) > len(rest) or (len(side) == len(rest) and 1 not in side):
            side, rest = rest, side
        return cls(n, tuple(sorted(side)), tuple(sorted(rest)))

    @classmethod
    def parse(cls, text: str, n: int = 4) -> "Bipartition":
        """Parse labels such as ``"12:34"`` or ``"1:234"`` (single-digit modes)."""
        parts = text.replace("|", ":").split(":")
        if len(parts) != 2:
            raise ValueError(f"cannot parse cut {text!r}")
        a = [int(c) for c in parts[0].strip()]
        b = [int(c) for c in parts[1].strip()]
        cut = cls.from_side(n, a)
        if sorted(a + b) != list(range(1, n + 1)):
            raise ValueError(f"cut {text!r} does not cover modes 1..{n}")
        return cut

    @property
    def label(self) -> str:
        sep = "," if self.n > 9 else ""
        return sep.join(map(str, self.side_a)) + ":" + sep.join(map(str, self.side_b))

    @property
    def is_single_mode(self) -> bool:
        """True when one side holds a single mode (PPT is then sufficient)."""
        return min(len(self.side_a), len(self.side_b)) == 1

    def signed_form(self) -> np.ndarray:
        """Partially transposed symplectic form ``-Omega_A (+) Omega_B``."""
        Om = symplectic_form(self.n)
        sign = np.ones(2 * self.n)
        for m in self.side_a:
            sign[2 * m - 2 : 2 * m] = -1.0
        return sign[:, None] * Om

    def __str__(self) -> str:
        return self.label


def enumerate_bipartitions(n: int) -> list[Bipartition]:
    """All distinct unordered bipartitions of ``n`` modes.

    Cuts are ordered by the size of the smaller side, then lexicographically,
    so for four modes the order is ``1:234, 2:134, 3:124, 4:123, 12:34,
    13:24, 14:23``.

    Args:
        n: number of modes, ``2 <= n <= 16``.
    """
    if not 2 <= n <= 16:
        raise ValueError("n must lie in 2..16")
    modes = range(1, n + 1)
    seen = set()
    out = []
    for size in range(1, n // 2 + 1):
        for side in itertools.combinations(modes, size):
            cut = Bipartition.from_side(n, side)
            if cut in seen:
                continue
            seen.add(cut)
            out.append(cut)
    return out


def _sign_vector(cut: Bipartition) -> np.ndarray:
    lam = np.ones(2 * cut.n)
    for m in cut.side_a:
        lam[2 * m - 1] = -1.0
    return lam


def partial_transpose(V: np.ndarray, cut: Bipartition) -> np.ndarray:
    """Partial transpose as a momentum sign flip on side A of ``cut``."""
    V = np.asarray(V, dtype=float)
    if num_modes(V) != cut.n:
        raise ValueError("cut and covariance matrix disagree on the mode count")
    lam = _sign_vector(cut)
    return lam[:, None] * V * lam[None, :]


def ppt_check(V: np.ndarray, cut: Bipartition, tol: float = EIG_TOL) -> tuple[bool, float]:
    """PPT test ``V + i Omega~ >= 0`` across a cut.

    Returns:
        ``(is_ppt, m)`` with ``m`` the minimum eigenvalue of the real
        embedding of ``V + i Omega~``.
    """
    V = np.asarray(V, dtype=float)
    if num_modes(V) != cut.n:
        raise ValueError("cut and covariance matrix disagree on the mode count")
    m = min_eig(real_embed(V, cut.signed_form()))
    return m >= -tol, m


def _embed_pair(n: int, i: int, j: int, block: np.ndarray) -> np.ndarray:
    """Place a 4x4 block acting on ``(q_i, p_i, q_j, p_j)`` into 2n dimensions."""
    i, j = _check_modes(n, (i, j))
    if i == j:
        raise ValueError("modes must be distinct")
    S = np.eye(2 * n)
    idx = [2 * i - 2, 2 * i - 1, 2 * j - 2, 2 * j - 1]
    S[np.ix_(idx, idx)] = block
    return S


def beam_splitter(n: int, i: int, j: int, theta: float) -> np.ndarray:
    """Beam splitter on modes ``i, j`` with transmission ``cos(theta)**2``.

    Args:
        n: total number of modes.
        i, j: distinct mode labels in ``1..n``.
        theta: mixing angle in radians.

    Returns:
        Orthogonal symplectic (2n, 2n) matrix.
    """
    c, s = np.cos(theta), np.sin(theta)
    block = np.array(
        [[c, 0, s, 0], [0, c, 0, s], [-s, 0, c, 0], [0, -s, 0, c]], dtype=float
    )
    return _embed_pair(n, i, j, block)


def two_mode_squeezer(n: int, i: int, j: int, r: float) -> np.ndarray:
    """Two-mode squeezer on modes ``i, j``.

    Acts as ``[[cosh r, sinh r], [sinh r, cosh r]]`` on ``(q_i, q_j)`` and
    ``[[cosh r, -sinh r], [-sinh r, cosh r]]`` on ``(p_i, p_j)``.
    """
    c, s = np.cosh(r), np.sinh(r)
    block = np.array(
        [[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]], dtype=float
    )
    return _embed_pair(n, i, j, block)


def single_mode_squeezer(n: int, i: int, r: float) -> np.ndarray:
    """Single-mode squeezer ``diag(exp(-r), exp(r))`` on mode ``i``."""
    (i,) = _check_modes(n, (i,))
    S = np.eye(2 * n)
    S[2 * i - 2, 2 * i - 2] = np.exp(-r)
    S[2 * i - 1, 2 * i - 1] = np.exp(r)
    return S


def is_symplectic(S: np.ndarray, tol: float = 1e-10) -> bool:
    """Check ``S Omega S^T = Omega`` entrywise to ``tol``."""
    Om = symplectic_form(num_modes(S))
    return bool(np.abs(S @ Om @ S.T - Om).max() <= tol)


def permute_modes(V: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Relabel modes so that old mode ``k`` becomes new mode ``perm[k-1]``.

    Args:
        V: covariance matrix on n modes.
        perm: a permutation of ``1..n`` given as the image of each mode.

    Returns:
        The covariance matrix of the relabelled state.
    """
    V = np.asarray(V, dtype=float)
    n = num_modes(V)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{n}")
    # new mode perm[k-1] takes old mode k
    source = [0] * n
    for old, new in enumerate(perm, start=1):
        source[new - 1] = old
    idx = [2 * m - 2 + k for m in source for k in (0, 1)]
    return V[np.ix_(idx, idx)]


def mode_indices(modes: Iterable[int]) -> list[int]:
    """Row indices of the quadratures of the given 1-based modes."""
    return [2 * m - 2 + k for m in modes for k in (0, 1)]
