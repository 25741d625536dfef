import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gdw.certify import Verdict, certify, certify_estimate, estimate_asp, ingest_click_log
from gdw.errors import ClickLogError, DomainError, NoClicksError
from gdw.simulate import ClickTally, SimConfig, simulate
from gdw.solver import BoundResult, Status
from gdw.structures import parse_structure


def _bound(text, asp):
    return BoundResult(parse_structure(text), asp, (), 0, Status.CONVERGED)


def _write_log(path, rows):
    path.write_text("round,x1,x2,y,j,click\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))
    return path


class TestEstimate:
    def test_balanced(self):
        assert estimate_asp(ClickTally(50, 50, 50, 50)) == (0.5, 0.05)

    @pytest.mark.parametrize("tally,p", [(ClickTally(5, 9, 0, 9), 0.0), (ClickTally(9, 5, 9, 0), 1.0)])
    def test_degenerate(self, tally, p):
        assert estimate_asp(tally) == (p, 0.0)

    def test_no_clicks(self):
        with pytest.raises(NoClicksError):
            estimate_asp(ClickTally(10, 30, 0, 0))

    @given(st.integers(1, 10**6), st.integers(1, 10**6), st.integers(2, 1000))
    def test_scale_invariance(self, d1, d2, c):
        p, s = estimate_asp(ClickTally(d1, d2, d1, d2))
        pc, sc = estimate_asp(ClickTally(c * d1, c * d2, c * d1, c * d2))
        assert pc == pytest.approx(p, rel=1e-12)
        assert sc == pytest.approx(s / math.sqrt(c), rel=1e-10)


class TestVerdicts:
    def test_estimate_against_1024_table(self, quantum_table_1024):
        report = certify_estimate(0.515, 0.008, 1024, quantum_table_1024, 1.0, complete=False)
        top = report.bounds[0]
        assert top.structure.render() == "Q512*Q2"
        assert top.z_score == pytest.approx(1.75, abs=5e-3)
        assert report.verdict is Verdict.IRREDUCIBLE_QUANTUM
        assert report.verdict_label() == "IrreducibleQuantum(1024)"
        assert len(report.bounds) == 41 and not report.complete

    def test_exact_bound_not_violated(self):
        bounds = [_bound("Q1024", 0.515625), _bound("Q512*Q2", 0.500980), _bound("Q32*Q32", 0.500521)]
        report = certify_estimate(0.500980, 1e-4, 1024, bounds, 1.0)
        assert report.bounds[0].z_score == 0.0 and not report.bounds[0].violated
        assert report.verdict is Verdict.VIOLATES_ONLY
        assert report.verdict_label() == "ViolatesOnly(Q32*Q32)"
        assert not report.certified

    def test_dim4(self, table_4):
        report = certify_estimate(0.75, 1e-4, 4, table_4, 3.0)
        assert [b.structure.render() for b in report.bounds] == ["Q2*Q2", "Q2*C2", "C4", "C2*C2"]
        assert report.certified

    def test_inconclusive(self, table_4):
        report = certify_estimate(0.6, 0.01, 4, table_4, 3.0)
        assert report.verdict is Verdict.INCONCLUSIVE and report.violated == ()

    @given(st.floats(0.5, 0.8), st.floats(1e-4, 0.05), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
    def test_threshold_monotone(self, p, sigma, t1, t2):
        bounds = [_bound(s, v) for s, v in [("Q2*Q2", 0.7285533905932737), ("Q2*C2", 0.6545084971874737), ("C4", 0.625), ("C2*C2", 0.625)]]
        lo, hi = sorted((t1, t2))
        a = certify_estimate(p, sigma, 4, bounds, lo)
        b = certify_estimate(p, sigma, 4, bounds, hi)
        assert set(b.violated) <= set(a.violated)

    def test_zero_sigma(self):
        bounds = [_bound("C4", 0.625)]
        assert certify_estimate(0.7, 0.0, 4, bounds).certified
        assert not certify_estimate(0.6, 0.0, 4, bounds).certified

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            certify_estimate(0.7, 0.01, 4, [], 3.0)
        with pytest.raises(DomainError):
            certify_estimate(0.7, 0.01, 4, [_bound("Q4", 0.75)], 3.0)
        with pytest.raises(DomainError):
            certify_estimate(0.7, 0.01, 4, [_bound("Q3*Q3", 0.6)], 3.0)
        with pytest.raises(DomainError):
            certify_estimate(0.7, -1.0, 4, [_bound("C4", 0.625)], 3.0)


class TestClickLog:
    def test_four_rows(self, tmp_path):
        log = _write_log(tmp_path / "l.csv", [(1, 2, 3, 1, 2, 1), (2, 1, 1, 1, 3, 0), (3, 4, 2, 2, 1, 0), (4, 1, 3, 2, 4, 0)])
        assert ingest_click_log(log, dim=4) == ClickTally(1, 3, 1, 0)

    def test_empty_body(self, tmp_path):
        tally = ingest_click_log(_write_log(tmp_path / "l.csv", []))
        assert tally == ClickTally(0, 0, 0, 0)
        with pytest.raises(NoClicksError):
            estimate_asp(tally)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("k", [1, 2])
    def test_round_trip(self, tmp_path, seed, k):
        log = tmp_path / "sim.csv"
        tally = simulate(SimConfig(k=k, mu=2.0, rounds=150_000, seed=seed), log_path=log)
        assert ingest_click_log(log, dim=4**k) == tally

    @pytest.mark.parametrize(
        "body,line",
        [
            ("1,1,1,1,1\n", 2),
            ("1,1,1,1,1,1\n2,1,1,3,1,0\n", 3),
            ("1,1,1,1,1,2\n", 2),
            ("1,a,1,1,1,1\n", 2),
            ("1,5,1,1,1,1\n", 2),
            ("1,1,1,1,0,1\n", 2),
        ],
    )
    def test_malformed(self, tmp_path, body, line):
        path = tmp_path / "bad.csv"
        path.write_text("round,x1,x2,y,j,click\n" + body)
        with pytest.raises(ClickLogError) as err:
            ingest_click_log(path, dim=4)
        assert err.value.line == line

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(ClickLogError):
            ingest_click_log(path)


def test_certify_from_tally(table_4):
    report = certify(ClickTally(10_000, 30_000, 7_500, 2_500), 4, table_4, 3.0)
    assert report.p_hat == 0.75
    assert report.certified
    assert "Poisson" in report.to_dict()["error_model"]
