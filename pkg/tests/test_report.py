import json

import numpy as np
import pytest

from gaussbound import report as rp
from gaussbound.analysis import timeline
from gaussbound.channel import BathSpec
from gaussbound.ensemble import scan_pure
from gaussbound.report import (
    CellResult,
    ExtraCheck,
    ReferenceCell,
    TableReport,
    atomic_write,
    csv_text,
    diff_report,
    ensemble_csv,
    fmt,
    reference_table,
    reproduce,
    reproduce_csv,
    timeline_csv,
    write_json,
)
from gaussbound.sdp import Label
from gaussbound.states import werner_wolf
from gaussbound.symplectic import Bipartition

FMSV = ("fmsv", (("r", 0.6),))


def cell(tau_be, tau_star, tol=0.01):
    return ReferenceCell("II", "{1,3}", FMSV, ((1, 3),), 4.0, ("12:34",), tau_be, tau_star, tol)


@pytest.mark.parametrize("table, count", [
    ("I", 39), ("II", 6), ("III", 6), ("IV", 34), ("V", 45), ("VI", 45), ("VII", 8), ("VIII", 45),
])
def test_reference_sizes(table, count):
    assert len(reference_table(table)) == count


def test_unknown_table():
    with pytest.raises(ValueError):
        reference_table("IX")


def test_reference_states_build():
    for table in rp.TABLE_IDS:
        if table == "VII":
            continue
        for c in reference_table(table):
            assert rp.make_state(c.state).shape == (8, 8)


class TestMatching:
    def test_value(self):
        r = CellResult(cell(0.48, 0.60), 0.4737, 0.5950)
        assert r.be_ok is True and r.star_ok is True and r.passed
        assert r.max_delta == pytest.approx(0.0063)

    def test_boundary_is_inclusive(self):
        assert CellResult(cell(None, 0.60), None, 0.61).passed

    def test_outside(self):
        r = CellResult(cell(0.77, 0.78), 0.6056, 0.6463)
        assert r.be_ok is False and not r.passed

    def test_absent_values(self):
        assert CellResult(cell(None, None), None, None).passed
        assert not CellResult(cell(None, None), None, 0.9).passed
        assert not CellResult(cell(None, 0.6), 0.2, 0.6).passed

    def test_unchecked(self):
        r = CellResult(cell(rp.UNCHECKED, 0.6), 0.3, 0.6)
        assert r.be_ok is None and r.passed

    def test_interval(self):
        c = cell(rp.UNCHECKED, (0.82, 0.85), tol=0.03)
        assert CellResult(c, None, 0.83).max_delta == 0.0
        assert CellResult(c, None, 0.80).passed
        assert not CellResult(c, None, 0.78).passed

    def test_report_verdict(self):
        good = CellResult(cell(None, 0.6), None, 0.6)
        bad = CellResult(cell(None, 0.6), None, 0.7)
        assert TableReport("II", [good]).passed
        assert not TableReport("II", [good, bad]).passed
        assert not TableReport("II", [good], [ExtraCheck("x", False, "")]).passed
        assert TableReport("II", [good, bad]).failures == [bad]


class TestFormatting:
    @pytest.mark.parametrize("value, text", [
        (None, ""), (True, "true"), (False, "false"), (0.1 + 0.2, "0.3"), (np.float64(1 / 3), "0.333333"),
        (4, "4"), ("x", "x"), (1e-12, "1e-12"),
    ])
    def test_fmt(self, value, text):
        assert fmt(value) == text

    def test_csv_text(self):
        assert csv_text(["a", "b"], [[1.5, None], ["x,y", 2]]) == 'a,b\r\n1.5,\r\n"x,y",2\r\n'

    def test_reproduce_csv_golden(self):
        rep = TableReport("II", [
            CellResult(cell(0.48, 0.60), 0.47375, 0.595),
            CellResult(cell(None, None), None, None),
            CellResult(cell(rp.UNCHECKED, (0.82, 0.85), tol=0.03), None, 0.8169),
        ])
        assert reproduce_csv(rep).split("\r\n") == [
            "table,row,noisy_modes,N,cut,ref_tau_be,tau_be,ref_tau_star,tau_star,abs_delta,tol,pass",
            'II,"{1,3}","{1,3}",4,12:34,0.48,0.47375,0.6,0.595,0.00625,0.01,true',
            'II,"{1,3}","{1,3}",4,12:34,-,-,-,-,,0.01,true',
            'II,"{1,3}","{1,3}",4,12:34,,,0.82..0.85,0.8169,0.0031,0.03,true',
            "",
        ]

    def test_diff_report(self):
        rep = TableReport("IV", [
            CellResult(cell(0.48, 0.60), 0.47375, 0.595),
            CellResult(cell(0.77, 0.78), 0.6056, 0.6463),
        ])
        lines = diff_report(rep).splitlines()
        assert lines[0] == "table IV"
        assert lines[1].startswith("  ok   {1,3}")
        assert lines[2].startswith("  FAIL {1,3}") and "|d|=0.1644" in lines[2]
        assert lines[-1] == "table IV: FAIL (1 mismatches)"

    def test_timeline_csv_golden(self):
        cut = Bipartition.parse("12:34")
        tl = timeline(werner_wolf(), BathSpec(2, (1, 2)), [0.0, 0.5], [cut])
        lines = timeline_csv(tl).split("\r\n")
        assert lines[0] == "tau,global_label,cut,label,min_pt_eig,sep_margin"
        assert lines[1].startswith("0,BOUND_PHASE,12:34,BOUND,")
        assert lines[2].startswith("0.5,FULLY_SEPARABLE,12:34,SEP,")
        assert len(lines) == 4 and lines[-1] == ""
        assert tl.cut_labels(cut) == [Label.BOUND, Label.SEP]

    def test_ensemble_csv_golden(self):
        rep = scan_pure(1, 8.0, bath_sets=[(1,), (1, 2)])
        assert ensemble_csv(rep).split("\r\n")[:3] == [
            "kind,seed,count,N,noisy_modes,finite,mean_tau_star,stderr,bound_incidents",
            "pure-haar,0,1,4,{1},1,0,0,0",
            'pure-haar,0,1,4,"{1,2}",1,0,0,0',
        ]


class TestFiles:
    def test_atomic_write(self, tmp_path):
        path = tmp_path / "sub" / "out.csv"
        atomic_write(path, "a\n")
        atomic_write(path, "b\n")
        assert path.read_text() == "b\n"
        assert [p.name for p in path.parent.iterdir()] == ["out.csv"]

    def test_no_partial_file_on_failure(self, tmp_path, monkeypatch):
        path = tmp_path / "out.csv"
        atomic_write(path, "old\n")

        def fail(src, dst):
            raise OSError("disk full")

        monkeypatch.setattr(rp.os, "replace", fail)
        with pytest.raises(OSError):
            atomic_write(path, "new\n")
        assert path.read_text() == "old\n"
        assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]

    def test_write_json(self, tmp_path):
        path = tmp_path / "r.json"
        write_json(path, {"x": np.float64(0.5), "a": np.arange(2), "lab": Label.SEP})
        assert json.loads(path.read_text()) == {"a": [0, 1], "lab": "SEP", "x": 0.5}

    def test_plots(self, tmp_path):
        rep = reproduce("III")
        rp.plot_reproduce(rep, tmp_path / "r.png")
        tl = timeline(werner_wolf(), BathSpec(2, (1, 2)), [0.0, 0.1, 0.2])
        rp.plot_timeline(tl, tmp_path / "t.png")
        rp.plot_ensemble(scan_pure(2, 12.0), tmp_path / "e.png")
        for name in ("r.png", "t.png", "e.png"):
            assert (tmp_path / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_reproduce_table_ii():
    rep = reproduce("ii")
    assert rep.table == "II" and rep.passed
    assert all(r.max_delta <= 0.01 for r in rep.cells)
