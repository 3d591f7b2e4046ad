"""Constructors for the Gaussian states studied in this package.

Every function returns a covariance matrix in interleaved ordering with the
vacuum equal to the identity.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from gaussbound.symplectic import (
    beam_splitter,
    is_physical,
    real_embed,
    symplectic_form,
)

_I2 = np.eye(2)
_Z2 = np.diag([1.0, -1.0])


def fmsv(r: float) -> np.ndarray:
    """Four-mode squeezed vacuum with squeezing ``r`` (closed form).

    Diagonal blocks are ``cosh(r)**2 I``; modes (1,3) and (2,4) are coupled
    by ``sinh(r)**2 I`` and every other pair by ``sinh(2r)/2 sigma_z``.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    a = np.cosh(r) ** 2 * _I2
    b = 0.5 * np.sinh(2 * r) * _Z2
    c = np.sinh(r) ** 2 * _I2
    return np.block([[a, b, c, b], [b, a, b, c], [c, b, a, b], [b, c, b, a]])


def gfmsv(r: float, theta1: float, theta2: float, theta3: float) -> np.ndarray:
    """Generalized four-mode squeezed vacuum from a beam-splitter circuit.

    Modes 1 and 2 are squeezed in opposite quadratures (variances
    ``exp(+-2r)``), modes 3 and 4 start in vacuum. The state then passes
    through beam splitters on (1,2), (2,4) and (1,3) in that order. Each
    beam splitter enters with angle ``-theta`` so that balanced angles
    ``pi/4`` reproduce :func:`fmsv` exactly.

    Args:
        r: squeezing parameter, non-negative.
        theta1, theta2, theta3: angles of the (1,2), (2,4), (1,3) splitters
            in radians.

    Returns:
        The (8, 8) covariance matrix.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if not np.all(np.isfinite([theta1, theta2, theta3])):
        raise ValueError("angles must be finite")
    e = np.exp(2 * r)
    gamma = np.diag([e, 1 / e, 1 / e, e, 1.0, 1.0, 1.0, 1.0])
    S = beam_splitter(4, 1, 3, -theta3) @ beam_splitter(4, 2, 4, -theta2) @ beam_splitter(4, 1, 2, -theta1)
    V = S @ gamma @ S.T
    return 0.5 * (V + V.T)


def tmsv(r: float) -> np.ndarray:
    """Two-mode squeezed vacuum ``[[cosh 2r I, sinh 2r Z], [sinh 2r Z, cosh 2r I]]``."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    return np.block([[c * _I2, s * _Z2], [s * _Z2, c * _I2]])


def tmsv_pair(r: float) -> np.ndarray:
    """Two TMSV states with parameter ``r`` on modes (1,3) and (2,4)."""
    if r < 0:
        raise ValueError("r must be non-negative")
    V = np.eye(8)
    T = tmsv(r)
    for i, j in ((1, 3), (2, 4)):
        idx = [2 * i - 2, 2 * i - 1, 2 * j - 2, 2 * j - 1]
        V[np.ix_(idx, idx)] = T
    return V


def adesso(s: float, a: float) -> np.ndarray:
    """Four-mode state with (1,4)(2,3) exchange symmetry, from its closed-form blocks.

    Args:
        s: squeezing of the central (2,3) two-mode squeezer.
        a: squeezing of the outer (1,2) and (3,4) two-mode squeezers.
    """
    if s < 0 or a < 0:
        raise ValueError("s and a must be non-negative")
    ch, sh = np.cosh, np.sinh
    s1 = (ch(a) ** 2 + ch(2 * s) * sh(a) ** 2) * _I2
    s2 = (ch(2 * s) * ch(a) ** 2 + sh(a) ** 2) * _I2
    e12 = ch(s) ** 2 * sh(2 * a) * _Z2
    e13 = ch(a) * sh(a) * sh(2 * s) * _I2
    e14 = sh(a) ** 2 * sh(2 * s) * _Z2
    e23 = ch(a) ** 2 * sh(2 * s) * _Z2
    return np.block(
        [[s1, e12, e13, e14], [e12, s2, e23, e13], [e13, e23, s2, e12], [e14, e13, e12, s1]]
    )


@dataclass(frozen=True)
class GwwParams:
    """Parameters of the generalized Werner-Wolf family."""

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float


WERNER_WOLF_PARAMS = GwwParams(2.0, 1.0, 2.0, 4.0, 1.0, 1.0)


def _gww_matrix(p: GwwParams) -> np.ndarray:
    A, B, C, D, E, F = astuple(p)
    top = np.diag([A, B, A, B])
    bottom = np.diag([C, D, C, D])
    cross = np.array([[E, 0, 0, 0], [0, 0, 0, -F], [0, 0, -F, 0], [0, -F, 0, 0]], dtype=float)
    return np.block([[top, cross], [cross.T, bottom]])


def generalized_werner_wolf(p: GwwParams) -> np.ndarray:
    """Generalized Werner-Wolf covariance matrix.

    Modes 1,2 carry ``diag(A, B, A, B)``, modes 3,4 carry ``diag(C, D, C, D)``
    and the cross block couples ``q1-q3`` by ``E`` and the remaining
    quadratures by ``-F``.

    Raises:
        ValueError: if the parameters do not describe a physical state.
    """
    V = _gww_matrix(p)
    ok, m = is_physical(V)
    if not ok:
        raise ValueError(f"unphysical parameters (min eigenvalue {m:.3g})")
    return V


def werner_wolf() -> np.ndarray:
    """The canonical four-mode bound entangled Gaussian state."""
    return _gww_matrix(WERNER_WOLF_PARAMS)


def gww_separability_functional(p: GwwParams) -> float:
    """Necessary separability functional of the generalized Werner-Wolf family.

    Returns:
        ``(AC - E^2)(BD - F^2) - 2|EF| - CD - AB + 1``. A negative value
        certifies entanglement; a non-negative value is inconclusive.
    """
    A, B, C, D, E, F = astuple(p)
    return (A * C - E**2) * (B * D - F**2) - 2 * abs(E * F) - C * D - A * B + 1


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary via QR of a complex Ginibre matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def ortho_symplectic_from_unitary(U: np.ndarray) -> np.ndarray:
    """Orthogonal symplectic matrix ``[[Re U, Im U], [-Im U, Re U]]`` in interleaved order."""
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    O = np.block([[U.real, U.imag], [-U.imag, U.real]])
    idx = [k + n * j for k in range(n) for j in (0, 1)]
    return O[np.ix_(idx, idx)]


def haar_ortho_symplectic(n: int, seed=None) -> np.ndarray:
    """Random passive (orthogonal symplectic) transformation on ``n`` modes.

    Args:
        n: number of modes.
        seed: anything accepted by :func:`numpy.random.default_rng`.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    return ortho_symplectic_from_unitary(haar_unitary(n, rng))


def random_pure(n: int, energy: float, seed=None) -> np.ndarray:
    """Random pure state ``O Gamma O^T`` with ``Tr V = energy``.

    The excess trace ``energy - 2n`` is split across modes by a flat Dirichlet
    draw in the coordinate ``t = cosh(2r) - 1``; each mode is then squeezed
    with ``diag(exp(2r), exp(-2r))`` and mixed by a Haar passive unitary.

    Args:
        n: number of modes.
        energy: target trace of the covariance matrix, at least ``2n``.
        seed: seed for :func:`numpy.random.default_rng`.
    """
    if energy < 2 * n - 1e-12:
        raise ValueError(f"energy must be at least 2n = {2 * n}")
    rng = np.random.default_rng(seed)
    excess = max(energy / 2.0 - n, 0.0)
    t = excess * rng.dirichlet(np.ones(n))
    r = 0.5 * np.arccosh(1.0 + t)
    gamma = np.diag(np.ravel(np.column_stack([np.exp(2 * r), np.exp(-2 * r)])))
    O = ortho_symplectic_from_unitary(haar_unitary(n, rng))
    V = O @ gamma @ O.T
    return 0.5 * (V + V.T)


def goe_shift(G: np.ndarray) -> np.ndarray:
    """Shift a symmetric matrix so that ``V - i Omega`` is PSD and singular."""
    n = G.shape[0] // 2
    lam = np.linalg.eigvalsh(real_embed(-G, symplectic_form(n)))[-1]
    return G + lam * np.eye(2 * n)


def random_mixed_goe(n: int, seed=None) -> np.ndarray:
    """Random mixed state from a GOE matrix shifted onto the physical boundary.

    ``G = (M + M^T)/sqrt(2)`` with ``M`` iid standard normal, and the result is
    ``G + lambda I`` with ``lambda`` the largest eigenvalue of ``i Omega - G``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((2 * n, 2 * n))
    return goe_shift((M + M.T) / np.sqrt(2))
