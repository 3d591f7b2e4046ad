"""Phase timelines and robustness-time searches under thermal noise.

For every cut the label can only move forward along ``NPT -> BOUND -> SEP``
as noise increases, because local channels preserve both PPT and
separability. Each cut is therefore scanned on a coarse grid and its two
transition points are refined by bisection. The state-level times follow:

* ``tau_star``: first time every selected cut is separable, i.e. the largest
  per-cut separability time.
* ``tau_be``: first time some selected cut is bound entangled, i.e. the
  smallest per-cut PPT onset among cuts that pass through a bound phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gaussbound.channel import BathSpec, evolve
from gaussbound.sdp import (
    EPSILON,
    GlobalLabel,
    Label,
    NumericalFailure,
    StateClassification,
    classify_cut,
    classify_state,
)
from gaussbound.symplectic import Bipartition, enumerate_bipartitions, num_modes, ppt_check

TAU_MAX = 0.9999
GRID_STEP = 0.01
_RANK = {Label.NPT: 0, Label.BOUND: 1, Label.SEP: 2}


class ReentrantPhaseError(RuntimeError):
    """A cut's label moved backwards along NPT -> BOUND -> SEP on the grid.

    Attributes:
        cut: the offending bipartition label.
        points: list of ``(tau, label)`` pairs around the violation.
    """

    def __init__(self, cut: str, points: list[tuple[float, str]]):
        self.cut = cut
        self.points = points
        desc = ", ".join(f"{t:.4f}:{lab}" for t, lab in points)
        super().__init__(f"non-monotone labels on cut {cut}: {desc}")


@dataclass
class Timeline:
    """Classification of an evolving state on a grid of regularized times."""

    grid: np.ndarray
    states: list[StateClassification]

    @property
    def labels(self) -> list[GlobalLabel | None]:
        return [s.label for s in self.states]

    def cut_labels(self, cut: Bipartition | str) -> list[Label | None]:
        return [s[cut].label for s in self.states]

    @property
    def cuts(self) -> list[Bipartition]:
        return [v.cut for v in self.states[0].verdicts] if self.states else []


def make_grid(tau_max: float = TAU_MAX, step: float = GRID_STEP) -> np.ndarray:
    """Coarse grid ``0, step, 2 step, ...`` below ``tau_max`` with ``tau_max`` appended."""
    if not 0 < tau_max < 1:
        raise ValueError("tau_max must lie in (0, 1)")
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(np.floor(tau_max / step + 1e-9))
    grid = np.round(np.arange(count + 1) * step, 12)
    grid = grid[grid < tau_max - 1e-12]
    return np.append(grid, tau_max)


def timeline(
    V0: np.ndarray,
    bath: BathSpec,
    grid,
    cuts: list[Bipartition] | None = None,
    eps: float = EPSILON,
    accuracy: float | None = None,
) -> Timeline:
    """Classify ``evolve(V0, bath, tau)`` at every grid point.

    Args:
        V0: initial covariance matrix.
        bath: noise specification.
        grid: ascending regularized times in ``[0, 1)``.
        cuts: optional subset of bipartitions (default: all).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly ascending")
    if grid.size and (grid[0] < 0 or grid[-1] >= 1):
        raise ValueError("grid must lie in [0, 1)")
    states = [classify_state(evolve(V0, bath, t), cuts, eps, accuracy) for t in grid]
    return Timeline(grid, states)


@dataclass
class CutRobustness:
    """Transition times of a single cut.

    ``tau_be`` is the PPT onset of a cut that is bound entangled before it
    becomes separable (0 if it starts bound). ``tau_star`` is the onset of
    separability. Each bracket ``(lo, hi)`` holds the transition, with the
    reported value equal to ``hi``.
    """

    cut: Bipartition
    tau_be: float | None
    tau_star: float | None
    be_bracket: tuple[float, float] | None = None
    star_bracket: tuple[float, float] | None = None

    def as_dict(self) -> dict:
        return {
            "cut": self.cut.label,
            "tau_be": self.tau_be,
            "tau_star": self.tau_star,
            "be_bracket": self.be_bracket,
            "star_bracket": self.star_bracket,
        }


@dataclass
class RobustnessResult:
    """State-level robustness times with per-cut detail and the scan evidence."""

    tau_star: float | None
    tau_be: float | None
    star_bracket: tuple[float, float] | None
    be_bracket: tuple[float, float] | None
    per_cut: dict[str, CutRobustness]
    timeline: Timeline | None = field(repr=False)
    tol: float = 1e-3
    tau_max: float = TAU_MAX

    def rounded(self, digits: int = 2) -> tuple[float | None, float | None]:
        """``(tau_be, tau_star)`` rounded for table comparison."""
        r = lambda x: None if x is None else round(x, digits)
        return r(self.tau_be), r(self.tau_star)

    def as_dict(self) -> dict:
        return {
            "tau_be": self.tau_be,
            "tau_star": self.tau_star,
            "be_bracket": self.be_bracket,
            "star_bracket": self.star_bracket,
            "tol": self.tol,
            "tau_max": self.tau_max,
            "per_cut": [c.as_dict() for c in self.per_cut.values()],
        }


def _bisect(pred, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Shrink ``(lo, hi)`` with ``pred(lo)`` false and ``pred(hi)`` true to width ``tol``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return float(lo), float(hi)


def _check_monotone(cut: Bipartition, grid: np.ndarray, labels: list[Label]) -> None:
    ranks = [_RANK[lab] for lab in labels]
    for i in range(1, len(ranks)):
        if ranks[i] < ranks[i - 1]:
            lo, hi = max(0, i - 2), min(len(ranks), i + 2)
            pts = [(float(grid[j]), labels[j].value) for j in range(lo, hi)]
            raise ReentrantPhaseError(cut.label, pts)


def _cut_robustness(
    V0, bath, cut, grid, labels, tol, eps, accuracy
) -> CutRobustness:
    _check_monotone(cut, grid, labels)

    def is_sep(t: float) -> bool:
        lab = classify_cut(evolve(V0, bath, t), cut, eps, accuracy).label
        if lab is None:
            raise NumericalFailure(f"cut {cut.label} unresolved at tau={t:.6f}")
        return lab is Label.SEP

    def is_ppt(t: float) -> bool:
        return ppt_check(evolve(V0, bath, t), cut)[0]

    tau_star = star_bracket = tau_be = be_bracket = None
    if Label.SEP in labels:
        i = labels.index(Label.SEP)
        if i == 0:
            tau_star, star_bracket = 0.0, (0.0, 0.0)
        else:
            star_bracket = _bisect(is_sep, grid[i - 1], grid[i], tol)
            tau_star = star_bracket[1]
    if Label.BOUND in labels:
        i = labels.index(Label.BOUND)
        if i == 0:
            tau_be, be_bracket = 0.0, (0.0, 0.0)
        else:
            be_bracket = _bisect(is_ppt, grid[i - 1], grid[i], tol)
            tau_be = be_bracket[1]
    return CutRobustness(cut, tau_be, tau_star, be_bracket, star_bracket)


def _cut_robustness_fast(V0, bath, cut, grid, tol, eps, accuracy) -> CutRobustness:
    """Per-cut search that relies on label monotonicity instead of a full scan.

    Only the PPT test is evaluated on the whole grid; the LMI is solved at
    the PPT onset and inside a binary search for the separability onset.
    """
    ppt = [ppt_check(evolve(V0, bath, t), cut)[0] for t in grid]
    if True in ppt:
        i = ppt.index(True)
        if not all(ppt[i:]):
            j = i + ppt[i:].index(False)
            raise ReentrantPhaseError(cut.label, [(float(grid[i]), "PPT"), (float(grid[j]), "NPT")])
    else:
        return CutRobustness(cut, None, None)

    def label_at(t: float) -> Label:
        lab = classify_cut(evolve(V0, bath, t), cut, eps, accuracy).label
        if lab is None:
            raise NumericalFailure(f"cut {cut.label} unresolved at tau={t:.6f}")
        return lab

    def is_sep(t: float) -> bool:
        return label_at(t) is Label.SEP

    def is_ppt(t: float) -> bool:
        return ppt_check(evolve(V0, bath, t), cut)[0]

    if i == 0:
        onset = (0.0, 0.0)
    else:
        onset = (grid[i - 1], grid[i])
    if label_at(grid[i]) is Label.SEP:
        star = onset if i == 0 else _bisect(is_sep, *onset, tol)
        return CutRobustness(cut, None, star[1], None, star)
    be = onset if i == 0 else _bisect(is_ppt, *onset, tol)
    lo, hi = i, len(grid) - 1
    if not is_sep(grid[hi]):
        return CutRobustness(cut, be[1], None, be, None)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if is_sep(grid[mid]):
            hi = mid
        else:
            lo = mid
    star = _bisect(is_sep, grid[lo], grid[hi], tol)
    return CutRobustness(cut, be[1], star[1], be, star)


def robustness(
    V0: np.ndarray,
    bath: BathSpec,
    tol: float = 1e-3,
    tau_max: float = TAU_MAX,
    cuts: list[Bipartition] | None = None,
    grid_step: float = GRID_STEP,
    eps: float = EPSILON,
    accuracy: float | None = None,
    method: str = "grid",
) -> RobustnessResult:
    """Locate the separability time and the bound-entanglement onset.

    Args:
        V0: initial covariance matrix.
        bath: noise specification.
        tol: bisection tolerance on each transition.
        tau_max: largest time scanned; a state still entangled there has no
            separability time.
        cuts: bipartitions to track (default: all).
        grid_step: spacing of the coarse scan.
        method: ``"grid"`` classifies every cut at every grid point and checks
            monotonicity; ``"bisect"`` only scans the PPT test and locates
            the separability onset by binary search, which is much cheaper
            and returns no timeline.

    Returns:
        A :class:`RobustnessResult`.

    Raises:
        ReentrantPhaseError: if some cut's label moves backwards on the grid.
        NumericalFailure: if a classification cannot be resolved.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    V0 = np.asarray(V0, dtype=float)
    bath.validate(num_modes(V0))
    cuts = enumerate_bipartitions(num_modes(V0)) if cuts is None else list(cuts)
    if method == "bisect":
        grid = make_grid(tau_max, grid_step)
        per_cut = {
            c.label: _cut_robustness_fast(V0, bath, c, grid, tol, eps, accuracy) for c in cuts
        }
        return _combine(per_cut, None, tol, tau_max)
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")
    tl = timeline(V0, bath, make_grid(tau_max, grid_step), cuts, eps, accuracy)
    for t, s in zip(tl.grid, tl.states):
        if s.failed:
            bad = ", ".join(c.label for c in s.failed)
            raise NumericalFailure(f"unresolved cuts {bad} at tau={t:.4f}")
    per_cut = {}
    for cut in cuts:
        per_cut[cut.label] = _cut_robustness(
            V0, bath, cut, tl.grid, tl.cut_labels(cut), tol, eps, accuracy
        )
    return _combine(per_cut, tl, tol, tau_max)


def _combine(per_cut, tl, tol, tau_max) -> RobustnessResult:
    stars = [c.tau_star for c in per_cut.values()]
    if any(s is None for s in stars):
        tau_star, star_bracket = None, None
    else:
        worst = max(per_cut.values(), key=lambda c: c.tau_star)
        tau_star, star_bracket = worst.tau_star, worst.star_bracket
    bound = [c for c in per_cut.values() if c.tau_be is not None]
    if bound:
        first = min(bound, key=lambda c: c.tau_be)
        tau_be, be_bracket = first.tau_be, first.be_bracket
    else:
        tau_be, be_bracket = None, None
    return RobustnessResult(tau_star, tau_be, star_bracket, be_bracket, per_cut, tl, tol, tau_max)


def robustness_per_cut(
    V0: np.ndarray, bath: BathSpec, cut: Bipartition, tol: float = 1e-3, **kwargs
) -> CutRobustness:
    """Transition times of a single cut."""
    return robustness(V0, bath, tol, cuts=[cut], **kwargs).per_cut[cut.label]


