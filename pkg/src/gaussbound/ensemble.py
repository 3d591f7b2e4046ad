"""Seeded scans over random pure and random mixed four-mode states."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from gaussbound.analysis import robustness
from gaussbound.channel import BathSpec
from gaussbound.sdp import NumericalFailure
from gaussbound.states import random_mixed_goe, random_pure
from gaussbound.symplectic import (
    Bipartition,
    enumerate_bipartitions,
    ppt_check,
    real_embed,
)

#: Representative bath sets; both ensembles are invariant under mode relabelling.
PURE_BATH_SETS = ((1,), (1, 2), (1, 2, 3), (1, 2, 3, 4))


def pt_spectrum_signature(V: np.ndarray, cut: Bipartition, tol: float = 1e-8) -> list[tuple[float, int]]:
    """Clustered spectrum of ``V + i Omega~`` as ``(eigenvalue, multiplicity)`` pairs.

    Eigenvalues closer than ``tol`` are merged; each cluster reports the mean
    value and the multiplicity in the complex matrix (half the count in the
    real embedding).
    """
    w = np.linalg.eigvalsh(real_embed(np.asarray(V, dtype=float), cut.signed_form()))
    clusters: list[list[float]] = [[w[0]]]
    for x in w[1:]:
        if x - clusters[-1][-1] <= tol:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return [(float(np.mean(c)), len(c) // 2) for c in clusters]


def _two_two_cuts(n: int = 4) -> list[Bipartition]:
    return [c for c in enumerate_bipartitions(n) if len(c.side_a) == len(c.side_b)]


@dataclass
class BathStats:
    """Robustness statistics of one bath set over the ensemble."""

    modes: tuple[int, ...]
    finite: int
    mean_tau_star: float | None
    stderr: float | None
    bound_incidents: int


@dataclass
class EnsembleReport:
    """Aggregated outcome of an ensemble scan.

    Attributes:
        kind: ``"pure-haar"`` or ``"mixed-goe"``.
        count: number of states analysed.
        seed: base seed; state ``i`` uses the sub-seed ``(seed, i)``.
        N: bath photon number.
        params: ensemble parameters (energy for pure states, GOE scale note).
        cuts: labels of the tracked bipartitions.
        stats: per bath set statistics, in input order.
        bound_phase_incidents: states with a bound phase under any bath set.
        failures: states excluded because a solve failed.
        rejected: draws discarded by the NPT filter (mixed ensemble only).
        states: per-state ``tau_star`` values keyed by bath set label.
    """

    kind: str
    count: int
    seed: int
    N: float
    params: dict
    cuts: list[str]
    stats: list[BathStats]
    bound_phase_incidents: int
    failures: int = 0
    rejected: int = 0
    states: list[dict] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return asdict(self)


def bath_label(modes) -> str:
    return "{" + ",".join(map(str, modes)) + "}"


def _analyse(V: np.ndarray, bath_sets, N: float, cuts, tol: float) -> dict:
    """Robustness of one state under every bath set; failures are reported, not raised."""
    out = {"tau_star": {}, "tau_be": {}, "failed": False}
    for modes in bath_sets:
        key = bath_label(modes)
        try:
            res = robustness(V, BathSpec(N, modes), tol=tol, cuts=cuts, method="bisect")
        except NumericalFailure:
            out["failed"] = True
            continue
        out["tau_star"][key] = res.tau_star
        out["tau_be"][key] = res.tau_be
    return out


def _pure_task(i: int, seed: int, energy: float, bath_sets, N, tol) -> dict:
    V = random_pure(4, energy, np.random.SeedSequence([seed, i]))
    return _analyse(V, bath_sets, N, _two_two_cuts(), tol)


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _aggregate(kind, count, seed, N, params, cuts, bath_sets, records) -> EnsembleReport:
    stats = []
    good = [r for r in records if not r["failed"]]
    for modes in bath_sets:
        key = bath_label(modes)
        vals = [r["tau_star"][key] for r in good if r["tau_star"].get(key) is not None]
        incidents = sum(1 for r in good if r["tau_be"].get(key) is not None)
        if vals:
            mean = float(np.mean(vals))
            se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        else:
            mean = se = None
        stats.append(BathStats(tuple(modes), len(vals), mean, se, incidents))
    bound = sum(1 for r in good if any(v is not None for v in r["tau_be"].values()))
    return EnsembleReport(
        kind=kind,
        count=count,
        seed=seed,
        N=N,
        params=params,
        cuts=[c.label for c in cuts],
        stats=stats,
        bound_phase_incidents=bound,
        failures=len(records) - len(good),
        states=[{"tau_star": r["tau_star"], "tau_be": r["tau_be"]} for r in records],
    )


def scan_pure(
    count: int,
    energy: float,
    bath_sets=PURE_BATH_SETS,
    N: float = 4.0,
    seed: int = 0,
    tol: float = 5e-3,
    jobs: int = 1,
) -> EnsembleReport:
    """Robustness of Haar-random pure four-mode states across the 2:2 cuts.

    Args:
        count: number of states.
        energy: trace of every covariance matrix.
        bath_sets: noisy-mode sets to evolve each state under.
        N: bath photon number.
        seed: base seed.
        tol: bisection tolerance on the transition times.
        jobs: worker processes.
    """
    if count < 1:
        raise ValueError("count must be positive")
    bath_sets = [tuple(m) for m in bath_sets]
    task = partial(_pure_task, seed=seed, energy=energy, bath_sets=bath_sets, N=N, tol=tol)
    records = _map(task, list(range(count)), jobs)
    return _aggregate(
        "pure-haar", count, seed, N, {"energy": energy}, _two_two_cuts(), bath_sets, records
    )


def is_npt_somewhere(V: np.ndarray) -> bool:
    return any(not ppt_check(V, c)[0] for c in enumerate_bipartitions(4))


def sample_npt_goe(count: int, seed: int, max_draws: int | None = None) -> tuple[list[np.ndarray], int]:
    """Draw GOE-shift states until ``count`` are NPT across at least one cut.

    Returns:
        The accepted states and the number of rejected draws.
    """
    max_draws = 1000 * count if max_draws is None else max_draws
    states, draws = [], 0
    while len(states) < count:
        if draws >= max_draws:
            raise RuntimeError(f"only {len(states)} NPT states in {draws} draws")
        V = random_mixed_goe(4, np.random.SeedSequence([seed, draws]))
        draws += 1
        if is_npt_somewhere(V):
            states.append(V)
    return states, draws - count


def scan_mixed_goe(
    count: int,
    bath_sets,
    N: float = 4.0,
    seed: int = 0,
    tol: float = 5e-3,
    jobs: int = 1,
) -> EnsembleReport:
    """Robustness of random GOE-shift mixed states that start NPT somewhere.

    All seven cuts are tracked, so ``tau_star`` is the time of full
    separability.
    """
    if count < 1:
        raise ValueError("count must be positive")
    bath_sets = [tuple(m) for m in bath_sets]
    states, rejected = sample_npt_goe(count, seed)
    cuts = enumerate_bipartitions(4)
    task = partial(_analyse, bath_sets=bath_sets, N=N, cuts=cuts, tol=tol)
    records = _map(task, states, jobs)
    report = _aggregate(
        "mixed-goe", count, seed, N, {"goe_scale": "offdiag var 1, diag var 2"}, cuts, bath_sets, records
    )
    report.rejected = rejected
    return report
