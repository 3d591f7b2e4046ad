import numpy as np
import pytest

from gaussbound import analysis
from gaussbound.analysis import (
    ReentrantPhaseError,
    make_grid,
    robustness,
    robustness_per_cut,
    timeline,
)
from gaussbound.channel import BathSpec
from gaussbound.sdp import GlobalLabel, Label
from gaussbound.states import fmsv, werner_wolf
from gaussbound.symplectic import Bipartition

CUT = Bipartition.parse("12:34")
TENTHS = np.round(np.arange(0.1, 1.0, 0.1), 1)


class TestMakeGrid:
    def test_default(self):
        g = make_grid()
        assert g[0] == 0.0 and g[-1] == 0.9999
        assert len(g) == 101
        np.testing.assert_allclose(np.diff(g[:-1]), 0.01)

    def test_endpoint_not_duplicated(self):
        np.testing.assert_allclose(make_grid(0.5, 0.1), [0, 0.1, 0.2, 0.3, 0.4, 0.5])

    @pytest.mark.parametrize("tau_max, step", [(1.0, 0.1), (0.0, 0.1), (0.5, 0.0)])
    def test_invalid(self, tau_max, step):
        with pytest.raises(ValueError):
            make_grid(tau_max, step)


class TestTimeline:
    def test_fmsv_transitions(self):
        tl = timeline(fmsv(0.6), BathSpec(4, (1, 3)), TENTHS)
        labels = tl.labels
        assert labels[:4] == [GlobalLabel.NPT_ENTANGLED] * 4
        assert labels[4] is GlobalLabel.BOUND_PHASE
        assert labels[5:] == [GlobalLabel.FULLY_SEPARABLE] * 4

    def test_vacuum(self):
        tl = timeline(np.eye(8), BathSpec(4, (2,)), TENTHS)
        assert all(lab is GlobalLabel.FULLY_SEPARABLE for lab in tl.labels)
        assert len(tl.cuts) == 7

    @pytest.mark.parametrize("N, modes, last_bound", [(4, (1, 2, 3, 4), 0.04), (2, (1, 2), 0.14)])
    def test_werner_wolf_bound_then_sep(self, N, modes, last_bound):
        grid = np.round(np.arange(0, 0.5, 0.02), 2)
        tl = timeline(werner_wolf(), BathSpec(N, modes), grid, [CUT])
        labels = tl.cut_labels(CUT)
        assert Label.NPT not in labels
        k = int(round(last_bound / 0.02))
        assert labels[: k + 1] == [Label.BOUND] * (k + 1)
        assert labels[k + 1 :] == [Label.SEP] * (len(grid) - k - 1)

    @pytest.mark.parametrize("grid", [[0.2, 0.1], [0.1, 1.0], [-0.1, 0.2]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            timeline(np.eye(8), BathSpec(4, (1,)), grid)


class TestRobustness:
    def test_pair_bath(self):
        res = robustness(fmsv(0.6), BathSpec(4, (1, 2)), cuts=[CUT])
        assert res.tau_be is None
        assert res.tau_star == pytest.approx(0.60, abs=0.01)

    def test_single_mode_never_separable(self):
        res = robustness(fmsv(0.6), BathSpec(10, (1,)), cuts=[CUT])
        assert res.tau_star is None and res.star_bracket is None

    def test_transient_bound_phase(self):
        res = robustness(fmsv(0.6), BathSpec(2, (1, 3)))
        assert res.rounded() == (0.70, 0.82)
        assert res.tau_be == pytest.approx(0.71, abs=0.01)
        assert res.tau_star == pytest.approx(0.82, abs=0.01)

    @pytest.mark.parametrize("cut, be, star", [("12:34", 0.48, 0.60), ("14:23", 0.48, 0.60),
                                               ("13:24", None, 0.60)])
    def test_per_cut(self, cut, be, star):
        res = robustness_per_cut(fmsv(0.6), BathSpec(4, (1, 3)), Bipartition.parse(cut))
        if be is None:
            assert res.tau_be is None
        else:
            assert res.tau_be == pytest.approx(be, abs=0.01)
        assert res.tau_star == pytest.approx(star, abs=0.01)

    def test_per_cut_frozen(self):
        # frozen from an independent solver
        res = robustness(fmsv(0.6), BathSpec(4, (1, 3)), cuts=[CUT])
        assert res.tau_be == pytest.approx(0.47375, abs=1e-3)
        assert res.tau_star == pytest.approx(0.595, abs=1e-3)

    @pytest.mark.parametrize("tol", [1e-2, 1e-3, 1e-4])
    def test_bracket_width(self, tol):
        res = robustness(fmsv(0.6), BathSpec(4, (1, 3)), tol=tol, cuts=[CUT])
        for lo, hi in (res.be_bracket, res.star_bracket):
            assert 0 < hi - lo <= tol
        assert res.tau_star == res.star_bracket[1]

    @pytest.mark.parametrize("modes, N", [((1, 3), 4), ((1, 2, 3), 2), ((1, 2, 3, 4), 10)])
    def test_methods_agree(self, modes, N):
        a = robustness(fmsv(0.6), BathSpec(N, modes), cuts=[CUT])
        b = robustness(fmsv(0.6), BathSpec(N, modes), cuts=[CUT], method="bisect")
        assert b.timeline is None
        for x, y in ((a.tau_be, b.tau_be), (a.tau_star, b.tau_star)):
            assert (x is None) == (y is None)
            if x is not None:
                assert x == pytest.approx(y, abs=1e-3)

    def test_bound_from_start(self):
        res = robustness(werner_wolf(), BathSpec(2, (1, 2)), cuts=[CUT])
        assert res.tau_be == 0.0
        assert res.tau_star == pytest.approx(0.15, abs=0.01)

    def test_as_dict(self):
        d = robustness(fmsv(0.6), BathSpec(4, (1, 3)), cuts=[CUT]).as_dict()
        assert d["per_cut"][0]["cut"] == "12:34"
        assert d["tol"] == 1e-3

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            robustness(np.eye(8), BathSpec(4, (1,)), tol=0)
        with pytest.raises(ValueError):
            robustness(np.eye(8), BathSpec(4, (1,)), method="newton")
        with pytest.raises(ValueError):
            robustness(np.eye(8), BathSpec(4, (6,)))


class TestMonotonicity:
    def test_backwards_sequence_raises(self):
        grid = np.array([0.0, 0.1, 0.2, 0.3])
        labels = [Label.NPT, Label.SEP, Label.BOUND, Label.SEP]
        with pytest.raises(ReentrantPhaseError) as info:
            analysis._check_monotone(CUT, grid, labels)
        assert info.value.cut == "12:34"
        assert (0.2, "BOUND") in [(round(t, 3), lab) for t, lab in info.value.points]

    def test_forward_sequence_passes(self):
        grid = np.array([0.0, 0.1, 0.2])
        analysis._check_monotone(CUT, grid, [Label.NPT, Label.BOUND, Label.SEP])

    def test_robustness_surfaces_reentrance(self, monkeypatch):
        real = analysis.classify_state
        calls = {"n": 0}

        def flaky(V, cuts=None, *args, **kwargs):
            out = real(V, cuts, *args, **kwargs)
            calls["n"] += 1
            if calls["n"] == 50:
                v = out.verdicts[0]
                v.label = Label.NPT
            return out

        monkeypatch.setattr(analysis, "classify_state", flaky)
        with pytest.raises(ReentrantPhaseError):
            robustness(fmsv(0.6), BathSpec(4, (1, 3)), cuts=[CUT])
