"""Local thermal noise acting on covariance matrices in regularized time."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gaussbound.states import GwwParams, _gww_matrix
from gaussbound.symplectic import num_modes


@dataclass(frozen=True)
class BathSpec:
    """Thermal baths attached to a subset of modes.

    Attributes:
        N: mean photon number of every bath.
        modes: 1-based labels of the noisy modes.
        gamma: optional damping rate, only used for time conversion.
    """

    N: float
    modes: tuple[int, ...]
    gamma: float | None = field(default=None)

    def __post_init__(self):
        modes = tuple(sorted(set(int(m) for m in self.modes)))
        if not modes:
            raise ValueError("at least one noisy mode is required")
        if self.N < 0:
            raise ValueError("N must be non-negative")
        object.__setattr__(self, "modes", modes)

    def validate(self, n: int) -> None:
        if self.modes[0] < 1 or self.modes[-1] > n:
            raise ValueError(f"noisy modes {self.modes} outside 1..{n}")


def tau_from_time(gamma: float, t: float) -> float:
    """Regularized time ``1 - exp(-2 gamma t)``."""
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")
    return float(-np.expm1(-2.0 * gamma * t))


def channel_coefficients(n: int, bath: BathSpec, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-quadrature scaling ``x`` and added noise ``y`` of the channel."""
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must lie in [0, 1)")
    bath.validate(n)
    x = np.ones(2 * n)
    y = np.zeros(2 * n)
    root = np.sqrt(1.0 - tau)
    for m in bath.modes:
        x[2 * m - 2 : 2 * m] = np.sqrt(root)
        y[2 * m - 2 : 2 * m] = (0.5 + bath.N) * (1.0 - root)
    return x, y


def evolve(V0: np.ndarray, bath: BathSpec, tau: float) -> np.ndarray:
    """Apply local thermal noise: ``V -> X V X + Y``.

    Noisy modes are scaled by ``(1 - tau)**(1/4)`` and receive added noise
    ``(1/2 + N)(1 - sqrt(1 - tau))``; quiet modes are untouched.

    Args:
        V0: initial covariance matrix.
        bath: bath specification.
        tau: regularized time in ``[0, 1)``.

    Returns:
        The evolved covariance matrix.
    """
    V0 = np.asarray(V0, dtype=float)
    x, y = channel_coefficients(num_modes(V0), bath, tau)
    return x[:, None] * V0 * x[None, :] + np.diag(y)


def evolved_fmsv_closed_form(r: float, N: float, tau: float) -> np.ndarray:
    """Closed form of the FMSV state after noise on all four modes."""
    root = np.sqrt(1.0 - tau)
    a = (0.5 + N) * (1.0 - root) + np.cosh(r) ** 2 * root
    b = 0.5 * np.sinh(2 * r) * root
    c = np.sinh(r) ** 2 * root
    I, Z = np.eye(2), np.diag([1.0, -1.0])
    A, B, C = a * I, b * Z, c * I
    return np.block([[A, B, C, B], [B, A, B, C], [C, B, A, B], [B, C, B, A]])


def evolved_werner_wolf_closed_form(N: float, tau: float) -> np.ndarray:
    """Closed form of the Werner-Wolf state after noise on all four modes."""
    root = np.sqrt(1.0 - tau)
    base = 0.5 + N
    p = GwwParams(
        A=base + (1.5 - N) * root,
        B=base - (N - 0.5) * root,
        C=base + (1.5 - N) * root,
        D=base + (3.5 - N) * root,
        E=root,
        F=root,
    )
    return _gww_matrix(p)
