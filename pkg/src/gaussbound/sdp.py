"""Semidefinite separability oracles for Gaussian covariance matrices.

The generic layer maximizes a margin ``eta`` subject to affine matrix
inequalities ``C_j + sum_i x_i F_ij - eta I >= 0``. Constraints may declare
directions that every feasible point must annihilate. These are removed by
facial reduction before the conic solve, which keeps problems with pure
(rank deficient) inputs well conditioned.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

import clarabel
import numpy as np
import scipy.sparse as sp
from scipy.linalg import null_space

from gaussbound.symplectic import (
    EIG_TOL,
    Bipartition,
    enumerate_bipartitions,
    mode_indices,
    num_modes,
    ppt_check,
    real_embed,
    symplectic_form,
)

#: Decision threshold on the separability margin.
EPSILON = 1e-8
#: Margins this close to zero are re-solved at tighter accuracy.
NEAR_BOUNDARY = 1e-7
ACCURACY_ENV = "GAUSSBOUND_SDP_ACCURACY"


def default_accuracy() -> float:
    """Solver accuracy, overridable through the ``GAUSSBOUND_SDP_ACCURACY`` variable."""
    value = os.environ.get(ACCURACY_ENV)
    if value is None:
        return 1e-10
    acc = float(value)
    if not 0 < acc < 1:
        raise ValueError(f"{ACCURACY_ENV} must lie in (0, 1)")
    return acc


class SdpStatus(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    NUMERICAL_FAILURE = "NUMERICAL_FAILURE"


class Label(str, enum.Enum):
    NPT = "NPT"
    BOUND = "BOUND"
    SEP = "SEP"


class GlobalLabel(str, enum.Enum):
    FULLY_SEPARABLE = "FULLY_SEPARABLE"
    BOUND_PHASE = "BOUND_PHASE"
    NPT_ENTANGLED = "NPT_ENTANGLED"


class NumericalFailure(RuntimeError):
    """Raised when a solve cannot be turned into a trustworthy verdict."""


def sym_basis(d: int) -> list[np.ndarray]:
    """Basis of ``d x d`` symmetric matrices (unit diagonal, paired off-diagonal)."""
    out = []
    for i in range(d):
        for j in range(i, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1.0
            out.append(E)
    return out


def _svec(M: np.ndarray) -> np.ndarray:
    """Scaled upper triangle, column major, as expected by Clarabel's PSD cone."""
    d = M.shape[-1]
    rows, cols = np.triu_indices(d)
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    scale = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return M[..., rows, cols] * scale


def _orth(M: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Orthonormal basis of the column space using an absolute cutoff."""
    if M.size == 0:
        return M.reshape(M.shape[0], 0)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > tol]


@dataclass(frozen=True)
class PsdConstraint:
    """One affine matrix inequality ``constant + sum_i x_i coeffs[i] (- eta I) >= 0``.

    Attributes:
        constant: symmetric (m, m) matrix.
        coeffs: array of shape (num_vars, m, m), symmetric slices.
        shifted: whether the margin ``eta`` is subtracted from this constraint.
        kernel: optional (m, k) matrix whose columns every feasible point at
            ``eta >= 0`` is known to annihilate.
    """

    constant: np.ndarray
    coeffs: np.ndarray
    shifted: bool = True
    kernel: np.ndarray | None = None


@dataclass(frozen=True)
class PsdFeasibilityProblem:
    """Maximize ``eta`` over a real vector ``x`` subject to PSD constraints."""

    num_vars: int
    constraints: tuple[PsdConstraint, ...]

    def __post_init__(self):
        if not any(c.shifted for c in self.constraints):
            raise ValueError("at least one constraint must carry the margin")
        for c in self.constraints:
            m = c.constant.shape[0]
            if c.constant.shape != (m, m) or c.coeffs.shape != (self.num_vars, m, m):
                raise ValueError("inconsistent constraint dimensions")


@dataclass
class SdpVerdict:
    """Outcome of :func:`solve_feasibility`.

    Attributes:
        status: solver outcome.
        eta: certified margin, the smallest eigenvalue of the shifted
            constraints at the returned point (a lower bound on the optimum).
        eta_upper: dual bound on the optimum when available.
        iterations: interior-point iterations.
        residual: largest violation of the kernel equalities.
        x: the returned point in the original variables.
    """

    status: SdpStatus
    eta: float = float("nan")
    eta_upper: float = float("nan")
    iterations: int = 0
    residual: float = 0.0
    x: np.ndarray | None = field(default=None, repr=False)


def _reduce(problem: PsdFeasibilityProblem):
    """Eliminate known kernel directions. Returns None if they are inconsistent."""
    nv = problem.num_vars
    rows, rhs = [], []
    kernels = []
    for c in problem.constraints:
        K = None if c.kernel is None else _orth(np.asarray(c.kernel, dtype=float))
        if K is not None and K.shape[1] == 0:
            K = None
        kernels.append(K)
        if K is not None:
            rows.append(np.tensordot(c.coeffs, K, axes=([2], [0])).reshape(nv, -1).T)
            rhs.append(-(c.constant @ K).ravel())
    x0 = np.zeros(nv)
    basis = np.eye(nv)
    residual = 0.0
    if rows:
        M = np.vstack(rows)
        b = np.concatenate(rhs)
        x0 = np.linalg.lstsq(M, b, rcond=None)[0]
        residual = float(np.abs(M @ x0 - b).max())
        if residual > 1e-8 * max(1.0, np.abs(b).max()):
            return None, residual
        basis = null_space(M, rcond=1e-10)
    reduced = []
    for c, K in zip(problem.constraints, kernels):
        m = c.constant.shape[0]
        Q = np.eye(m) if K is None else null_space(K.T)
        if Q.shape[1] == 0:
            continue
        C = Q.T @ (c.constant + np.tensordot(x0, c.coeffs, 1)) @ Q
        F = np.tensordot(basis.T, c.coeffs, 1)
        F = np.einsum("ai,kab,bj->kij", Q, F, Q)
        reduced.append((0.5 * (C + C.T), F, c.shifted))
    return (x0, basis, reduced), residual


def _margins(reduced, z: np.ndarray) -> tuple[float, float]:
    """Smallest eigenvalue over shifted and unshifted constraints at ``z``."""
    shifted, plain = np.inf, np.inf
    for C, F, is_shifted in reduced:
        e = float(np.linalg.eigvalsh(C + np.tensordot(z, F, 1))[0])
        if is_shifted:
            shifted = min(shifted, e)
        else:
            plain = min(plain, e)
    return shifted, plain


_FALLBACK_SETTINGS = (
    {},
    {"equilibrate_enable": False},
    {"static_regularization_constant": 1e-6},
)


def _clarabel_solve(A, b, cones, accuracy: float, extra: dict):
    nx = A.shape[1]
    q = np.zeros(nx)
    q[-1] = -1.0
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = accuracy
    settings.tol_gap_rel = accuracy
    settings.tol_feas = accuracy
    settings.max_iter = 200
    for key, value in extra.items():
        setattr(settings, key, value)
    return clarabel.DefaultSolver(sp.csc_matrix((nx, nx)), q, A, b, cones, settings).solve()


def solve_feasibility(problem: PsdFeasibilityProblem, accuracy: float | None = None) -> SdpVerdict:
    """Maximize the margin ``eta`` of a PSD feasibility problem.

    Args:
        problem: the constraints.
        accuracy: absolute and relative tolerance handed to the interior
            point solver. Defaults to :func:`default_accuracy`.

    Returns:
        An :class:`SdpVerdict`. ``INFEASIBLE`` means the declared kernel
        directions cannot be annihilated, so no point with ``eta >= 0``
        exists. ``NUMERICAL_FAILURE`` still reports the certified lower bound
        and the dual upper bound when they are available.
    """
    accuracy = default_accuracy() if accuracy is None else accuracy
    out, residual = _reduce(problem)
    if out is None:
        return SdpVerdict(SdpStatus.INFEASIBLE, eta=-np.inf, eta_upper=-np.inf, residual=residual)
    x0, basis, reduced = out
    nz = basis.shape[1]
    if not reduced:
        return SdpVerdict(SdpStatus.OPTIMAL, eta=np.inf, eta_upper=np.inf, residual=residual, x=x0)

    blocks_F, blocks_eta, blocks_b, cones = [], [], [], []
    for C, F, is_shifted in reduced:
        m = C.shape[0]
        blocks_F.append(_svec(F).T)
        blocks_eta.append(_svec(np.eye(m)) if is_shifted else np.zeros(m * (m + 1) // 2))
        blocks_b.append(_svec(C))
        cones.append(clarabel.PSDTriangleConeT(m))
    # whiten the free variables so the conic solver sees orthonormal columns
    Fz = np.vstack(blocks_F)
    if nz:
        U, sv, Wt = np.linalg.svd(Fz, full_matrices=False)
        keep = sv > 1e-10 * max(1.0, sv.max()) if sv.size else np.zeros(0, bool)
        U, whiten = U[:, keep], Wt[keep].T / sv[keep]
    else:
        U, whiten = Fz, np.zeros((0, 0))
    A = sp.csc_matrix(-np.column_stack([U, -np.concatenate(blocks_eta)]))
    b = np.concatenate(blocks_b)
    sol = None
    for extra in _FALLBACK_SETTINGS:
        sol = _clarabel_solve(A, b, cones, accuracy, extra)
        if str(sol.status) in ("Solved", "AlmostSolved", "DualInfeasible"):
            break
    status = str(sol.status)
    if status == "DualInfeasible":
        # margin is unbounded above
        return SdpVerdict(SdpStatus.OPTIMAL, eta=np.inf, eta_upper=np.inf,
                          iterations=sol.iterations, residual=residual, x=x0)
    w = np.asarray(sol.x)
    if w.size != whiten.shape[1] + 1 or not np.all(np.isfinite(w)):
        return SdpVerdict(SdpStatus.NUMERICAL_FAILURE, iterations=sol.iterations, residual=residual)
    z = np.append(whiten @ w[:-1], w[-1])
    eta, plain = _margins(reduced, z[:-1])
    if plain < -EIG_TOL:
        eta = min(eta, plain)
    upper = -float(sol.obj_val_dual) if np.isfinite(sol.obj_val_dual) else float("nan")
    ok = status in ("Solved", "AlmostSolved")
    return SdpVerdict(
        SdpStatus.OPTIMAL if ok else SdpStatus.NUMERICAL_FAILURE,
        eta=eta,
        eta_upper=upper,
        iterations=sol.iterations,
        residual=residual,
        x=x0 + basis @ z[:-1],
    )


def _block_coeffs(dims: list[int]) -> tuple[int, list[tuple[int, list[np.ndarray]]]]:
    """Variable layout for a list of symmetric unknowns: (total, [(offset, basis)])."""
    layout, offset = [], 0
    for d in dims:
        basis = sym_basis(d)
        layout.append((offset, basis))
        offset += len(basis)
    return offset, layout


def _kernel_vectors(M: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    w, U = np.linalg.eigh(M)
    return U[:, w < rel_tol * max(1.0, np.abs(w).max())]


def _reorder(V: np.ndarray, cut: Bipartition) -> np.ndarray:
    idx = mode_indices(cut.side_a + cut.side_b)
    return V[np.ix_(idx, idx)]


def _check_cut(V: np.ndarray, cut: Bipartition) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if num_modes(V) != cut.n:
        raise ValueError("cut and covariance matrix disagree on the mode count")
    return V


def lmi_problem(V: np.ndarray, cut: Bipartition) -> PsdFeasibilityProblem:
    """Separability LMI: ``V >= V_A (+) V_B`` with ``V_A``, ``V_B`` physical.

    Kernel directions of ``V + i Omega`` are shared by every decomposition,
    so they are passed to the solver for facial reduction.
    """
    V = _check_cut(V, cut)
    na, nb = len(cut.side_a), len(cut.side_b)
    n, d = na + nb, 2 * (na + nb)
    W = _reorder(V, cut)
    nv, layout = _block_coeffs([2 * na, 2 * nb])
    F1 = np.zeros((nv, d, d))
    F2 = np.zeros((nv, 4 * na, 4 * na))
    F3 = np.zeros((nv, 4 * nb, 4 * nb))
    zero_a, zero_b = np.zeros((2 * na, 2 * na)), np.zeros((2 * nb, 2 * nb))
    (off_a, basis_a), (off_b, basis_b) = layout
    for k, E in enumerate(basis_a):
        F1[off_a + k, : 2 * na, : 2 * na] = -E
        F2[off_a + k] = real_embed(E, zero_a)
    for k, E in enumerate(basis_b):
        F1[off_b + k, 2 * na :, 2 * na :] = -E
        F3[off_b + k] = real_embed(E, zero_b)

    ker = _kernel_vectors(real_embed(W, symplectic_form(n)))
    u, v = ker[:d], ker[d:]
    k1 = np.hstack([u, v])
    ka = np.vstack([u[: 2 * na], v[: 2 * na]])
    kb = np.vstack([u[2 * na :], v[2 * na :]])
    return PsdFeasibilityProblem(
        nv,
        (
            PsdConstraint(W, F1, kernel=k1),
            PsdConstraint(real_embed(zero_a, symplectic_form(na)), F2, kernel=ka),
            PsdConstraint(real_embed(zero_b, symplectic_form(nb)), F3, kernel=kb),
        ),
    )


def _solve_with_refinement(problem: PsdFeasibilityProblem, accuracy: float | None) -> SdpVerdict:
    accuracy = default_accuracy() if accuracy is None else accuracy
    verdict = solve_feasibility(problem, accuracy)
    if verdict.status is SdpStatus.INFEASIBLE:
        return verdict
    if verdict.status is SdpStatus.NUMERICAL_FAILURE or abs(verdict.eta) <= NEAR_BOUNDARY:
        tight = solve_feasibility(problem, accuracy * 1e-2)
        if tight.status is SdpStatus.OPTIMAL or tight.eta > verdict.eta:
            verdict = tight
    return verdict


def _decide(verdict: SdpVerdict, eps: float) -> bool:
    """True if the margin certifies feasibility, False if it rules it out."""
    if verdict.status is SdpStatus.INFEASIBLE:
        return False
    if verdict.eta >= -eps:
        return True
    if verdict.status is SdpStatus.OPTIMAL:
        return False
    if np.isfinite(verdict.eta_upper) and verdict.eta_upper < -eps:
        return False
    raise NumericalFailure(f"solver status {verdict.status.value}, margin {verdict.eta:.3g}")


def lmi_separability(
    V: np.ndarray, cut: Bipartition, eps: float = EPSILON, accuracy: float | None = None
) -> tuple[bool, SdpVerdict]:
    """Decide separability across ``cut`` with the LMI oracle.

    Returns:
        ``(separable, verdict)``; separable iff the certified margin is at
        least ``-eps``.

    Raises:
        NumericalFailure: if the solve is inconclusive.
    """
    verdict = _solve_with_refinement(lmi_problem(V, cut), accuracy)
    return _decide(verdict, eps), verdict


def k_extendibility_problem(V: np.ndarray, cut: Bipartition, k: int) -> PsdFeasibilityProblem:
    """Symmetric k-extension of side B: unknown ``Delta_B >= i Omega_B`` with
    ``V >= i Omega_A (+) ((1 - 1/k) Delta_B + (i/k) Omega_B)``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    V = _check_cut(V, cut)
    na, nb = len(cut.side_a), len(cut.side_b)
    n, d = na + nb, 2 * (na + nb)
    W = _reorder(V, cut)
    weight = 1.0 - 1.0 / k
    nv, [(_, basis)] = _block_coeffs([2 * nb])
    zero_b = np.zeros((2 * nb, 2 * nb))
    F1 = np.stack([real_embed(E, zero_b) for E in basis])
    F2 = np.zeros((nv, 2 * d, 2 * d))
    for i, E in enumerate(basis):
        big = np.zeros((d, d))
        big[2 * na :, 2 * na :] = -weight * E
        F2[i] = real_embed(big, np.zeros((d, d)))
    om_a, om_b = symplectic_form(na), symplectic_form(nb)
    mixed = np.zeros((d, d))
    mixed[: 2 * na, : 2 * na] = om_a
    mixed[2 * na :, 2 * na :] = om_b / k
    ker = _kernel_vectors(real_embed(W, -symplectic_form(n)))
    u, v = ker[:d], ker[d:]
    kb = np.vstack([u[2 * na :], v[2 * na :]]) if weight > 0 else None
    return PsdFeasibilityProblem(
        nv,
        (
            PsdConstraint(real_embed(zero_b, -om_b), F1, kernel=kb),
            PsdConstraint(real_embed(W, -mixed), F2, kernel=ker),
        ),
    )


def k_extendibility(
    V: np.ndarray, cut: Bipartition, k: int, eps: float = EPSILON, accuracy: float | None = None
) -> tuple[bool, SdpVerdict]:
    """Test whether the state admits a symmetric k-extension on side B.

    Returns:
        ``(extendible, verdict)``. Not extendible certifies entanglement.
    """
    verdict = _solve_with_refinement(k_extendibility_problem(V, cut, k), accuracy)
    return _decide(verdict, eps), verdict


@dataclass
class CutVerdict:
    """Classification of one bipartition.

    Attributes:
        cut: the bipartition.
        label: NPT, BOUND or SEP; None when the solver failed.
        min_pt_eig: smallest eigenvalue of ``V + i Omega~``.
        sep_margin: certified LMI margin when the LMI was solved.
        status: solver status of the LMI, if run.
        k_ext: optional ``(k, extendible)`` witness for bound cuts.
    """

    cut: Bipartition
    label: Label | None
    min_pt_eig: float
    sep_margin: float | None = None
    status: SdpStatus | None = None
    k_ext: tuple[int, bool] | None = None

    @property
    def near_boundary(self) -> bool:
        return self.sep_margin is not None and abs(self.sep_margin) <= 10 * EPSILON

    def as_dict(self) -> dict:
        return {
            "cut": self.cut.label,
            "label": None if self.label is None else self.label.value,
            "min_pt_eig": self.min_pt_eig,
            "sep_margin": self.sep_margin,
            "status": None if self.status is None else self.status.value,
            "near_boundary": self.near_boundary,
            "k_ext": None if self.k_ext is None else {"k": self.k_ext[0], "extendible": self.k_ext[1]},
        }


def classify_cut(
    V: np.ndarray,
    cut: Bipartition,
    eps: float = EPSILON,
    accuracy: float | None = None,
    witness: bool = False,
) -> CutVerdict:
    """Two-step classification: PPT test, then the LMI for PPT multi-mode cuts.

    A cut with a single mode on one side is separable as soon as it is PPT.
    With ``witness=True`` a bound cut also carries a 2-extendibility check.
    """
    ppt, m = ppt_check(V, cut)
    if not ppt:
        return CutVerdict(cut, Label.NPT, m)
    if cut.is_single_mode:
        return CutVerdict(cut, Label.SEP, m)
    try:
        sep, verdict = lmi_separability(V, cut, eps, accuracy)
    except NumericalFailure:
        return CutVerdict(cut, None, m, status=SdpStatus.NUMERICAL_FAILURE)
    margin = verdict.eta if np.isfinite(verdict.eta) else None
    out = CutVerdict(cut, Label.SEP if sep else Label.BOUND, m, margin, verdict.status)
    if witness and not sep:
        try:
            out.k_ext = (2, k_extendibility(V, cut, 2, eps, accuracy)[0])
        except NumericalFailure:
            pass
    return out


@dataclass
class StateClassification:
    """Per-cut verdicts and the aggregated label.

    The aggregate is FULLY_SEPARABLE when every cut is SEP, BOUND_PHASE when
    at least one cut is bound entangled, and NPT_ENTANGLED otherwise. It is
    None if any cut could not be resolved.
    """

    verdicts: tuple[CutVerdict, ...]

    @property
    def failed(self) -> list[Bipartition]:
        return [v.cut for v in self.verdicts if v.label is None]

    @property
    def label(self) -> GlobalLabel | None:
        return aggregate_label([v.label for v in self.verdicts])

    def __getitem__(self, cut: Bipartition | str) -> CutVerdict:
        key = cut if isinstance(cut, str) else cut.label
        for v in self.verdicts:
            if v.cut.label == key:
                return v
        raise KeyError(key)


def aggregate_label(labels) -> GlobalLabel | None:
    labels = list(labels)
    if any(lab is None for lab in labels):
        return None
    if all(lab is Label.SEP for lab in labels):
        return GlobalLabel.FULLY_SEPARABLE
    if any(lab is Label.BOUND for lab in labels):
        return GlobalLabel.BOUND_PHASE
    return GlobalLabel.NPT_ENTANGLED


def classify_state(
    V: np.ndarray,
    cuts: list[Bipartition] | None = None,
    eps: float = EPSILON,
    accuracy: float | None = None,
    witness: bool = False,
) -> StateClassification:
    """Classify every bipartition (or the given subset) of a state."""
    V = np.asarray(V, dtype=float)
    cuts = enumerate_bipartitions(num_modes(V)) if cuts is None else cuts
    return StateClassification(
        tuple(classify_cut(V, c, eps, accuracy, witness) for c in cuts)
    )
