"""Asymptotic and collapse suites.

Every suite returns a list of SuiteResult records.  Suites that make no sense
for the cigar (n = 1) return skip records carrying the DomainError text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .claims import SuiteResult, Tolerances, bound, check, info, positive, skipped
from .errors import DomainError
from .geometry import (
    RayPoint,
    box_ball_lower_bound,
    collapse_radius,
    distance_from_origin,
    laplacian_R,
    s_at_distance,
    slab_ball_upper_bound,
    stable_R,
    sublevel_volume,
)
from .potential import SolitonParams, jet_at, solve_phi

LIMIT_LEVELS = (1e2, 1e3, 1e4)
DECAY_LEVELS = (1e3, 1e4)
BLOWDOWN_LEVELS = (1e2, 1e3, 1e4)


@dataclass(frozen=True)
class CollapseRecord:
    k: int
    s_k: float
    r_k: float
    sup_R_on_ball: float
    vol_upper: float
    ratio: float
    const_bound: float
    vol_lower: float
    lower_ratio: float

    @property
    def gate(self) -> bool:
        return self.sup_R_on_ball <= self.r_k ** -2


def _R(params: SolitonParams, s: float) -> float:
    return stable_R(RayPoint.at(params, s))


def _tag(level: float) -> str:
    return f"1e{round(math.log10(level))}"


def decay_target(n: int) -> float:
    """Limit of R * rho: R ~ (n-1)/s and rho ~ sqrt(n) s / 2."""
    return 0.5 * math.sqrt(n) * (n - 1)


def limit_suite(params: SolitonParams, tols: Tolerances | None = None) -> list[SuiteResult]:
    tols = tols or Tolerances()
    n = params.n
    out = []
    for s in LIMIT_LEVELS:
        tag = _tag(s)
        phi = solve_phi(params, s)
        key = f"phi_over_s_{tag}"
        out.append(check(f"limit.phi_over_s.s={tag}", phi / s, n, tols[key], "limit",
                         "lim phi(s)/s = n", key))
    for s in LIMIT_LEVELS:
        tag = _tag(s)
        key = f"phi1_{tag}"
        out.append(check(f"limit.phi1.s={tag}", jet_at(params, s).phi1, n, tols[key], "limit",
                         "lim phi'(s) = n", key))
    return out


def decay_suite(params: SolitonParams, tols: Tolerances | None = None) -> list[SuiteResult]:
    tols = tols or Tolerances()
    n = params.n
    out = []
    anchor_rho = "R(x) rho(x) -> (1/2) sqrt(n) (n-1)"
    for s in DECAY_LEVELS:
        tag = _tag(s)
        r_rho = _R(params, s) * distance_from_origin(params, s)
        r_s = _R(params, s) * s
        if n == 1:
            out.append(check(f"decay.R_rho.s={tag}", r_rho, 0.0, tols["R_rho"], "two_sided", anchor_rho, "R_rho"))
            out.append(check(f"decay.R_s.s={tag}", r_s, 0.0, tols["R_s"], "two_sided", "R s -> n - 1", "R_s"))
        else:
            out.append(check(f"decay.R_rho.s={tag}", r_rho, decay_target(n), tols["R_rho"], "limit", anchor_rho, "R_rho"))
            out.append(check(f"decay.R_s.s={tag}", r_s, n - 1, tols["R_s"], "limit", "R s -> n - 1", "R_s"))

    grid = np.geomspace(1e2, 1e4, 30)
    vals = np.array([_R(params, s) * distance_from_origin(params, s) for s in grid])
    anchor_two = "C1/rho(x) <= R(x) <= C2/rho(x)"
    if n == 1:
        out.append(info("decay.C1", float(vals.min()), anchor_two,
                        "cigar curvature decays exponentially; no linear two-sided constants"))
    else:
        c1, c2 = float(vals.min()), float(vals.max())
        out.append(positive("decay.C1_positive", c1, anchor_two))
        out.append(info("decay.C2", c2, anchor_two))
        out.append(bound("decay.C2_over_C1", c2 / c1, tols, "R_rho_spread", "upper", anchor_two))

        rs = np.array([_R(params, s) * s for s in np.geomspace(10, 1e4, 40)])
        steps = np.diff(rs)
        out.append(check("decay.R_s_monotone", float(steps.max()), 0.0, 0.0, "upper",
                         "R s approaches n - 1 monotonically (from above on this family)"))

        def rrho2(s):
            return _R(params, s) * distance_from_origin(params, s) ** 2
        out.append(bound("decay.R_rho2_growth", rrho2(1e4) / rrho2(1e3), tols, "R_rho2_growth", "lower",
                         "asymptotic scalar curvature is infinite"))

        # R(p, t)|t| with p at s0 = 0 and t = -1e4
        tau = 1e4
        out.append(check("decay.R_t.t=1e4", _R(params, tau) * tau, n - 1, tols["R_t"], "limit",
                         "R(p,t)|t| -> 1 (n - 1 in general)", "R_t"))
    return out


def ball_volume(params: SolitonParams, r: float) -> float:
    """vol B(o, r)."""
    return sublevel_volume(params, s_at_distance(params, r))


def volume_suite(params: SolitonParams, tols: Tolerances | None = None) -> list[SuiteResult]:
    tols = tols or Tolerances()
    n = params.n
    rho = np.geomspace(1e2, 1e4, 21)
    vol = [ball_volume(params, r) for r in rho]
    slope = float(np.polyfit(np.log(rho), np.log(vol), 1)[0])
    out = [check("volume.slope", slope, n, tols["vol_slope"], "two_sided", "vol(B(p,r)) = O(r^n)", "vol_slope")]

    ratios = [ball_volume(params, r) / r ** (2 * n) for r in (10.0, 1e2, 1e3)]
    anchor = "asymptotic volume ratio vanishes"
    out.append(check("volume.ratio_decreasing", max(ratios[1] / ratios[0], ratios[2] / ratios[1]),
                     1.0, 0.0, "upper", anchor))
    drop = ratios[2] / ratios[0]
    if n == 1:
        out.append(info("volume.ratio_drop", drop, anchor,
                        "cigar area grows like r, so the ratio falls only ~r^-1"))
    else:
        out.append(bound("volume.ratio_drop", drop, tols, "vol_ratio_drop", "upper", anchor))
    return out


def collapse_records(params: SolitonParams, k_max: int = 40, k_min: int = 3) -> list[CollapseRecord]:
    n = params.n
    if n < 2:
        raise DomainError("collapse sequence needs n >= 2")
    if k_max < 10:
        raise ValueError("k_max must be >= 10")
    records = []
    for k in range(k_min, k_max + 1):
        r_k = collapse_radius(n, k)
        s_k = float(k * k)
        # R decreases in s, so the sup over the ball sits at the slab's lower end
        s_low = s_k - max(k, 2.0 * r_k)
        sup_R = _R(params, s_low)
        upper, const = slab_ball_upper_bound(params, k)
        try:
            lower = box_ball_lower_bound(params, s_k, r_k)
        except DomainError:
            lower = float("nan")
        scale = r_k ** (2 * n)
        records.append(CollapseRecord(k, s_k, r_k, sup_R, upper, upper / scale, const, lower, lower / scale))
    return records


def collapse_k0(records: list[CollapseRecord]) -> int | None:
    """Smallest k such that the slab bound sits below the constant bound from k on."""
    k0 = None
    for rec in reversed(records):
        if rec.vol_upper <= rec.const_bound:
            k0 = rec.k
        else:
            break
    return k0


def collapse_suite(params: SolitonParams, tols: Tolerances | None = None, k_max: int = 40) -> list[SuiteResult]:
    tols = tols or Tolerances()
    try:
        records = collapse_records(params, k_max)
    except DomainError as exc:
        return [skipped(name, "collapsing sequence p_k, r_k", str(exc))
                for name in ("collapse.gate", "collapse.decreasing", "collapse.drop",
                             "collapse.k0", "collapse.ck_spread")]
    anchor_gate = "R(x) <= 1/r_k^2 on B(p_k, r_k)"
    tail = [r for r in records if r.k >= 10]
    window = [r for r in records if 10 <= r.k <= 40]
    gate = max(r.sup_R_on_ball * r.r_k**2 for r in tail)
    out = [check("collapse.gate", gate, 1.0, 0.0, "upper", anchor_gate)]
    steps = max(b.ratio / a.ratio for a, b in zip(window, window[1:]))
    out.append(check("collapse.decreasing", steps, 1.0, 0.0, "upper", "lim vol(B(p_k,r_k))/r_k^(2n) = 0"))
    by_k = {r.k: r for r in records}
    if 40 in by_k:
        out.append(bound("collapse.drop", by_k[40].ratio / by_k[10].ratio, tols, "collapse_drop", "upper",
                         "lim vol(B(p_k,r_k))/r_k^(2n) = 0"))
    k0 = collapse_k0(records)
    anchor_k0 = "32^(n+1) n (n-1)^(n-1) pi omega_(2n-2) r_k^(2n-1)"
    out.append(check("collapse.k0", float("inf") if k0 is None else k0, k_max, 0.0, "upper", anchor_k0))
    ck = [r.ratio * r.k for r in window]
    out.append(bound("collapse.ck_spread", max(ck) / min(ck), tols, "collapse_ck_spread", "upper",
                     "ratio <= C/k"))
    out.append(info("collapse.C_fit", float(np.mean(ck)), "ratio <= C/k"))
    return out


def blowdown_table(params: SolitonParams, levels=BLOWDOWN_LEVELS) -> list[dict]:
    if params.n < 2:
        raise DomainError("blow-down profile needs n >= 2")
    rows = []
    for s in levels:
        p = RayPoint.at(params, s)
        j, R = p.jet, stable_R(p)
        rows.append({
            "s": s,
            "orbit": 2 * math.pi * math.sqrt(R * j.phi1),
            "fiber": math.sqrt(R * j.phi),
            "ricci_ratio": (j.phi2 / j.phi1) / (j.phi1 / j.phi),
        })
    return rows


def blowdown_profile(params: SolitonParams, tols: Tolerances | None = None, levels=BLOWDOWN_LEVELS) -> list[SuiteResult]:
    tols = tols or Tolerances()
    n = params.n
    anchor = "rescaled limit: shrinking circle times fixed CP^(n-1)"
    try:
        rows = blowdown_table(params, levels)
    except DomainError as exc:
        return [skipped(name, anchor, str(exc))
                for name in ("blowdown.fiber", "blowdown.orbit", "blowdown.ricci_ratio")]
    last = rows[-1]
    tag = _tag(last["s"])
    out = [check(f"blowdown.fiber.s={tag}", last["fiber"], math.sqrt(n * (n - 1)), tols["blowdown_fiber"],
                 "limit", anchor, "blowdown_fiber")]
    orbit_bound = tols["rescaled_orbit"] * 2 * math.pi * math.sqrt(n * (n - 1) / last["s"])
    out.append(check(f"blowdown.orbit.s={tag}", last["orbit"], orbit_bound, 0.0, "upper", anchor, "rescaled_orbit"))
    orbits = [r["orbit"] for r in rows]
    ratios = [r["ricci_ratio"] for r in rows]
    out.append(check("blowdown.orbit_decreasing", max(b / a for a, b in zip(orbits, orbits[1:])), 1.0, 0.0,
                     "upper", anchor))
    out.append(check("blowdown.ricci_decreasing", max(b / a for a, b in zip(ratios, ratios[1:])), 1.0, 0.0,
                     "upper", anchor))
    out.append(bound(f"blowdown.ricci_ratio.s={tag}", last["ricci_ratio"], tols, "blowdown_ricci", "upper", anchor))
    return out


def laplacian_ratio_sup(params: SolitonParams, s_values) -> float:
    """sup |Delta R| / R^2 over the samples."""
    best = 0.0
    for s in s_values:
        p = RayPoint.at(params, s)
        best = max(best, abs(laplacian_R(p)) / stable_R(p) ** 2)
    return best


def laplacian_report(params: SolitonParams, s_values=None) -> list[SuiteResult]:
    if s_values is None:
        s_values = np.linspace(-20.0, 200.0, 111)
    if params.n == 1:
        # R decays exponentially, so |Delta R|/R^2 grows without bound
        s_values = [s for s in s_values if s <= 30.0]
    return [info("laplacian.sup_dR_over_R2", laplacian_ratio_sup(params, s_values),
                 "|Delta R|/R^2 <= C (stated for kappa-solutions)",
                 "measured on the ray; the family is collapsed so no bound is asserted")]
