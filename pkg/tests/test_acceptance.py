"""Acceptance criteria 1-14.

Each criterion prints one line "ACCEPTANCE <k> PASS|FAIL: <summary>" and the
test asserts it.  Run directly with `python tests/test_acceptance.py` for the
lines alone.
"""

import math
import re
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

from solitonlab import SolitonParams, cigar_closed_form
from solitonlab.asymptotics import ball_volume, collapse_k0, collapse_records, decay_target
from solitonlab.flow import (
    advect,
    circle_orbit,
    distance_time_ratio,
    f_time_bounds,
    harnack_quadratic_min,
    harnack_sampled,
    holomorphic_field_check,
)
from solitonlab.geometry import (
    RayPoint,
    curvature_components,
    curvature_tensor,
    distance_from_origin,
    grad_f_norm_sq,
    log_det_potential,
    s_at_distance,
    scalar_curvature,
    stable_R,
    sublevel_volume,
)
from solitonlab.oracles import fd_curvature_tensor
from solitonlab.potential import jet_at, solve_phi

SAMPLES = np.linspace(-20.0, 200.0, 200)
NS = (1, 2, 3, 4, 5)


def R(p, s):
    return stable_R(RayPoint.at(p, s))


def crit1():
    p = SolitonParams(1)
    phi_err = jet_err = 0.0
    for s in np.linspace(-30.0, 30.0, 601):
        j, ref = jet_at(p, s), cigar_closed_form(s)
        phi_err = max(phi_err, abs(j.phi - math.log1p(math.exp(s))))
        jet_err = max(jet_err, *(abs(a - b) for a, b in zip(j.as_tuple()[2:], ref.as_tuple()[2:])))
    return phi_err <= 1e-10 and jet_err <= 1e-10, f"cigar max|phi err|={phi_err:.2e}, max|jet err|={jet_err:.2e}"


def crit2():
    worst = 0.0
    for n in NS:
        p = SolitonParams(n)
        for s in SAMPLES:
            pt = RayPoint.at(p, s)
            worst = max(worst, abs(scalar_curvature(pt)[0] + grad_f_norm_sq(pt) - n))
    return worst <= 1e-8, f"max|R + |grad f|^2 - n| = {worst:.2e} over n=1..5"


def crit3():
    worst = 0.0
    for n in NS:
        p = SolitonParams(n)
        for s in SAMPLES:
            pt = RayPoint.at(p, s)
            worst = max(worst, abs(log_det_potential(pt)[1] - pt.jet.phi1))
    return worst <= 1e-10, f"max|f' - u''| = {worst:.2e}"


def crit4():
    worst = 0.0
    for n in NS:
        p = SolitonParams(n)
        for s in SAMPLES:
            a, b = scalar_curvature(RayPoint.at(p, s))
            worst = max(worst, abs(a - b))
    return worst <= 1e-6, f"max|R_short - R_long| = {worst:.2e}"


def crit5():
    s, ok, parts = 1e4, True, []
    for n in NS:
        j = jet_at(SolitonParams(n), s)
        d1, d0 = abs(j.phi1 - n), abs(j.phi / s - n)
        ok &= d1 <= 10 * (n - 1) / s + 1e-15 and d0 <= 0.01 * n
        parts.append(f"n={n}: {d1:.1e},{d0:.1e}")
    return ok, "|phi'-n|, |phi/s-n| at s=1e4: " + "; ".join(parts)


def crit6():
    ok, parts = True, []
    for n in (2, 3):
        p = SolitonParams(n)
        s = 1e4
        r_rho = R(p, s) * distance_from_origin(p, s)
        r_s = R(p, s) * s
        ok &= abs(r_rho / decay_target(n) - 1) <= 0.02 and abs(r_s / (n - 1) - 1) <= 0.02
        parts.append(f"n={n}: R*rho={r_rho:.5f} (target {decay_target(n):.5f}), R*s={r_s:.5f}")
    p = SolitonParams(2)
    sample = advect(p, 0.0, -1e4)
    r_t = sample.R_t * 1e4
    ok &= abs(r_t - 1) <= 0.02
    parts.append(f"n=2: R(p,t)|t|={r_t:.5f}")
    return ok, "; ".join(parts)


def crit7():
    ok, parts = True, []
    for n in (2, 3):
        p = SolitonParams(n)
        vals = [R(p, s) * distance_from_origin(p, s) for s in np.geomspace(1e2, 1e4, 30)]
        lo, hi = min(vals), max(vals)
        ok &= math.isfinite(lo) and math.isfinite(hi) and lo > 0
        if n == 2:
            ok &= hi / lo <= 1.5
        parts.append(f"n={n}: C1={lo:.4f}, C2={hi:.4f}, C2/C1={hi / lo:.4f}")
    return ok, "; ".join(parts)


def crit8():
    ok, parts = True, []
    for n in (1, 2, 3):
        p = SolitonParams(n)
        rho = np.geomspace(1e2, 1e4, 21)
        vol = [sublevel_volume(p, s_at_distance(p, r)) for r in rho]
        slope = float(np.polyfit(np.log(rho), np.log(vol), 1)[0])
        drop = (ball_volume(p, 1e3) / 1e3 ** (2 * n)) / (ball_volume(p, 10.0) / 10.0 ** (2 * n))
        ok &= abs(slope - n) <= 0.05
        if n >= 2:
            ok &= drop <= 1e-2
            parts.append(f"n={n}: slope={slope:.4f}, drop={drop:.2e}")
        else:
            # area grows like r for the cigar, so the ratio drops only ~1/r
            parts.append(f"n=1: slope={slope:.4f}, drop={drop:.4f} (reported; area ~ r)")
    return ok, "; ".join(parts)


def crit9():
    ok, parts = True, []
    for n in (2, 3):
        recs = collapse_records(SolitonParams(n), 40)
        by_k = {r.k: r for r in recs}
        gate = all(r.sup_R_on_ball <= r.r_k ** -2 for r in recs if r.k >= 10)
        window = [by_k[k].ratio for k in range(10, 41)]
        decreasing = all(b < a for a, b in zip(window, window[1:]))
        drop = by_k[40].ratio / by_k[10].ratio
        k0 = collapse_k0(recs)
        ok &= gate and decreasing and drop <= 0.35 and k0 is not None
        parts.append(f"n={n}: gate={gate}, decreasing={decreasing}, drop={drop:.3f}, k0={k0}")
    return ok, "; ".join(parts)


def crit10():
    trace = math.inf
    qmin = 0.0
    sampled = math.inf
    for n in NS:
        p = SolitonParams(n)
        for s in SAMPLES:
            trace = min(trace, RayPoint.at(p, s).jet.phi2)
            qmin = max(qmin, abs(harnack_quadratic_min(p, s)))
            sampled = min(sampled, harnack_sampled(p, s, seed=0))
    ok = trace > 0 and qmin <= 1e-8 and sampled >= -1e-10
    return ok, f"min phi''={trace:.2e}, max|Q_min|={qmin:.2e}, min sampled Q={sampled:.2e}"


def crit11():
    ok, parts = True, []
    adv = 0.0
    for n in NS:
        p = SolitonParams(n)
        for t in (-1e3, -300.0, -30.0, -1.0, 1.0, 10.0, 20.0):
            adv = max(adv, abs(advect(p, 1.0, t, mode="integrate").s_t - (1.0 - t)))
        ratio, _, _ = distance_time_ratio(p, 1.0, -1e4)
        ok &= abs(ratio / (math.sqrt(n) / 2) - 1) <= 0.01
        bad = sum(not f_time_bounds(p, 0.0, float(t)).holds for t in -np.geomspace(1e-2, 1e4, 50))
        ok &= bad == 0
        parts.append(f"n={n}: rho/|t|={ratio:.5f}")
    ok &= adv <= 1e-6
    return ok, f"max advection gap={adv:.1e}; " + "; ".join(parts) + "; f-time holds at 50 t"


def crit12():
    ok, parts = True, []
    hdev = 0.0
    for n in NS:
        p = SolitonParams(n)
        cap = 2 * math.pi * math.sqrt(n)
        lengths = [circle_orbit(p, s).length for s in np.concatenate([SAMPLES, [1e3, 1e4]])]
        ok &= max(lengths) <= cap and abs(lengths[-1] / cap - 1) <= 1e-3
        if n >= 2:
            for s in (1e3, 1e4):
                ok &= circle_orbit(p, s).rescaled_length <= 1.1 * 2 * math.pi * math.sqrt(n * (n - 1) / s)
        hdev = max(hdev, holomorphic_field_check(p, SAMPLES))
        parts.append(f"n={n}: l(1e4)/cap={lengths[-1] / cap:.6f}")
    ok &= hdev <= 1e-10
    return ok, "; ".join(parts) + f"; max|f'/u''-1|={hdev:.1e}"


def crit13():
    sec = bis = math.inf
    for n in (2, 3):
        p = SolitonParams(n)
        for s in (-5.0, 0.0, 5.0, 20.0, 100.0):
            rep = curvature_components(RayPoint.at(p, s), seed=0)
            sec, bis = min(sec, rep.sec_min), min(bis, rep.bisec_min)
    fd = 0.0
    points = [(n, s) for n in (2, 3) for s in (-4.0, -1.0, 1.0, 3.0, 6.0)]
    for n, s in points:
        p = SolitonParams(n)
        T_fd = fd_curvature_tensor(p, s)
        T = curvature_tensor(p, solve_phi(p, s))
        idx = [(0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 1, 1)] + ([(1, 1, 2, 2)] if n >= 3 else [])
        fd = max(fd, *(abs(T_fd[i].real / T[i].real - 1) for i in idx))
    ok = sec > 0 and bis > 0 and fd <= 1e-5
    return ok, f"sec_min={sec:.3e}, bisec_min={bis:.3e}, FD oracle rel err={fd:.1e} at {len(points)} points"


def crit14():
    runs = []
    with tempfile.TemporaryDirectory() as tmp:
        for tag in ("a", "b"):
            out = Path(tmp) / tag
            proc = subprocess.run([sys.executable, "-m", "solitonlab", "verify", "--out", str(out)],
                                  capture_output=True, text=True)
            text = (out / "verify.json").read_text() if (out / "verify.json").exists() else ""
            runs.append((proc.returncode, re.sub(r'"timestamp": "[^"]*"', '"timestamp": ""', text)))
    same = runs[0][1] == runs[1][1] and runs[0][1] != ""
    ok = same and runs[0][0] == 0 and runs[1][0] == 0
    return ok, f"exit codes {runs[0][0]},{runs[1][0]}; identical apart from timestamp: {same}"


CRITERIA = {
    1: ("cigar oracle", crit1),
    2: ("soliton identity", crit2),
    3: ("soliton condition", crit3),
    4: ("scalar curvature cross-check", crit4),
    5: ("limits", crit5),
    6: ("decay law", crit6),
    7: ("two-sided bounds", crit7),
    8: ("volume growth", crit8),
    9: ("collapse sequence", crit9),
    10: ("Harnack", crit10),
    11: ("flow geometry", crit11),
    12: ("orbits", crit12),
    13: ("curvature positivity", crit13),
    14: ("determinism", crit14),
}


def _line(k, title, ok, detail):
    return f"ACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'}: {title} | {detail}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k, capsys):
    title, fn = CRITERIA[k]
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(k, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for k in sorted(CRITERIA):
        title, fn = CRITERIA[k]
        ok, detail = fn()
        failures += not ok
        print(_line(k, title, ok, detail))
    sys.exit(1 if failures else 0)
