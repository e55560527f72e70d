import math

import pytest

from solitonlab import SolitonParams
from solitonlab.asymptotics import (
    ball_volume,
    blowdown_profile,
    blowdown_table,
    collapse_k0,
    collapse_records,
    collapse_suite,
    decay_suite,
    decay_target,
    laplacian_report,
    limit_suite,
    volume_suite,
)
from solitonlab.claims import DEFAULT_TOLERANCES, Tolerances, UnknownTolerance, compare
from solitonlab.errors import DomainError


def by_name(results):
    return {r.name: r for r in results}


def test_compare_modes():
    assert compare(1.0, 1.05, 0.1, "two_sided")
    assert not compare(1.0, 1.2, 0.1, "two_sided")
    assert compare(1.01, 1.0, 0.02, "limit")
    assert not compare(1.03, 1.0, 0.02, "limit")
    assert compare(0.5, 1.0, 0.0, "upper") and not compare(1.5, 1.0, 0.0, "upper")
    assert compare(1.5, 1.0, 0.0, "lower") and not compare(0.5, 1.0, 0.0, "lower")
    assert not compare(float("nan"), 0.0, 1.0, "two_sided")


def test_tolerance_registry_rejects_unknown_names():
    with pytest.raises(UnknownTolerance):
        Tolerances({"no_such_key": 1.0})
    assert Tolerances({"R_rho": 0.5})["R_rho"] == 0.5
    assert Tolerances()["R_rho"] == DEFAULT_TOLERANCES["R_rho"]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_limit_suite_passes(n):
    assert all(r.status == "pass" for r in limit_suite(SolitonParams(n)))


def test_limit_suite_n2_phi1_window():
    r = by_name(limit_suite(SolitonParams(2)))["limit.phi1.s=1e4"]
    assert 2 - 0.001 <= r.computed <= 2


def test_limit_suite_n5_coarse_level_exceeds_stated_tolerance():
    # the (n-1) ln(ns)/(ns) correction is 5.2% at s = 1e2 for n = 5
    res = by_name(limit_suite(SolitonParams(5)))
    assert res["limit.phi_over_s.s=1e2"].status == "fail"
    assert res["limit.phi_over_s.s=1e3"].status == "pass"
    assert res["limit.phi_over_s.s=1e4"].status == "pass"


def test_decay_targets():
    assert decay_target(2) == pytest.approx(math.sqrt(2) / 2)
    assert decay_target(3) == pytest.approx(math.sqrt(3))


@pytest.mark.parametrize("n", [2, 3])
def test_decay_suite_passes(n):
    res = decay_suite(SolitonParams(n))
    assert all(r.status in ("pass", "info") for r in res)
    assert by_name(res)["decay.R_rho.s=1e4"].computed == pytest.approx(decay_target(n), rel=0.02)


def test_decay_n2_flow_time():
    r = by_name(decay_suite(SolitonParams(2)))["decay.R_t.t=1e4"]
    assert r.computed == pytest.approx(1.0, rel=0.02)


def test_decay_cigar_degrades_to_zero_targets():
    res = by_name(decay_suite(SolitonParams(1)))
    assert res["decay.R_rho.s=1e4"].target == 0.0
    assert res["decay.R_rho.s=1e4"].status == "pass"
    assert res["decay.C1"].status == "info"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_volume_slope(n):
    res = by_name(volume_suite(SolitonParams(n)))
    assert res["volume.slope"].computed == pytest.approx(n, abs=0.05)
    assert res["volume.ratio_decreasing"].status == "pass"


def test_volume_ratio_drop_per_decade_n2():
    p = SolitonParams(2)
    r2, r3 = (ball_volume(p, r) / r**4 for r in (1e2, 1e3))
    assert r3 <= r2 / 10


def test_volume_cigar_drop_is_informational():
    r = by_name(volume_suite(SolitonParams(1)))["volume.ratio_drop"]
    assert r.status == "info"
    assert 0.01 < r.computed < 0.02


@pytest.mark.parametrize("n", [2, 3])
def test_collapse_sequence(n):
    recs = {r.k: r for r in collapse_records(SolitonParams(n), 40)}
    assert recs[40].sup_R_on_ball <= recs[40].r_k ** -2
    assert recs[40].ratio < recs[20].ratio < recs[10].ratio
    assert recs[40].ratio / recs[10].ratio <= 0.35
    ck = [recs[k].ratio * k for k in range(10, 41)]
    assert max(ck) / min(ck) < 1.1
    assert collapse_k0(list(recs.values())) == 3
    assert all(r.status in ("pass", "info") for r in collapse_suite(SolitonParams(n)))


def test_collapse_records_fields():
    r = collapse_records(SolitonParams(2), 12)[0]
    assert r.k == 3 and r.s_k == 9.0 and r.r_k == pytest.approx(1.5)
    assert r.ratio == pytest.approx(r.vol_upper / r.r_k**4)
    assert r.gate


def test_collapse_cigar_is_skipped():
    with pytest.raises(DomainError):
        collapse_records(SolitonParams(1))
    res = collapse_suite(SolitonParams(1))
    assert res and all(r.status == "skip" and "n >= 2" in r.reason for r in res)


def test_collapse_needs_k_max_10():
    with pytest.raises(ValueError):
        collapse_records(SolitonParams(2), 9)


def test_blowdown_n2():
    rows = blowdown_table(SolitonParams(2))
    assert rows[-1]["fiber"] == pytest.approx(math.sqrt(2), rel=0.02)
    assert rows[-1]["orbit"] <= 0.1
    assert all(r.status == "pass" for r in blowdown_profile(SolitonParams(2)))


def test_blowdown_n3_ricci_ratio_decreasing():
    ratios = [r["ricci_ratio"] for r in blowdown_table(SolitonParams(3))]
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[-1] < 0.05


def test_blowdown_cigar_skipped():
    assert all(r.status == "skip" for r in blowdown_profile(SolitonParams(1)))


def test_laplacian_report_is_info_only():
    (r,) = laplacian_report(SolitonParams(2))
    assert r.status == "info" and math.isfinite(r.computed)


def test_suites_are_bitwise_reproducible():
    p = SolitonParams(3)
    a = [r.computed for r in decay_suite(p) + volume_suite(p)]
    b = [r.computed for r in decay_suite(p) + volume_suite(p)]
    assert a == b
