import pytest

from tencrofton.identities import SUITES, Check, SuiteReport, coefficient_suite, gamma_suite, measure_suite, run_suite
from tencrofton.polytope import catalog


def test_small_gamma_grid_passes():
    report = gamma_suite(max_ab=3, max_q=3, max_a62=5, max_zt=2)
    assert report.passed
    assert set(report.groups()) == {"lemma61", "lemma62", "lemma63", "lemma64"}


def test_coefficient_groups_and_known_psi_failures():
    report = coefficient_suite(max_n=4, max_s=3, max_s_formal=3, max_n_psi=4, max_s_psi=3)
    groups = report.groups()
    for name in ("global_i0", "s3_binomial", "formal_k1"):
        passed, total = groups[name]
        assert passed == total > 0
    # the closed-form psi constant disagrees with the extrinsic tables only at s = 1
    assert {c.params["s"] for c in report.failures()} == {1}


def test_measure_suite_on_two_bodies():
    report = measure_suite(bodies=[("cube", 2), ("simplex", 3)], max_s=2, max_r=1)
    assert report.passed
    assert set(report.groups()) == {"facet_relation", "mcmullen"}


def test_report_serialization():
    report = SuiteReport("demo", [Check("g", {"a": 1}, True), Check("g", {"a": 2}, False, "off by one")])
    assert not report.passed
    assert report.groups() == {"g": (1, 2)}
    data = report.to_json()
    assert data["pass"] is False
    assert data["checks"] == [{"group": "g", "params": {"a": 2}, "pass": False, "detail": "off by one"}]
    assert len(report.to_json(include_passing=True)["checks"]) == 2
    assert "seconds" not in data


def test_unknown_suite():
    assert set(SUITES) == {"gamma", "coefficients", "measures"}
    with pytest.raises(ValueError):
        run_suite("nope")
