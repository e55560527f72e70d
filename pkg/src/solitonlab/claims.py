"""Claim records and the tolerance registry shared by all suites."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

MODES = ("two_sided", "upper", "lower", "limit")

# Comparison modes:
#   two_sided  |computed - target| <= tolerance
#   limit      |computed - target| <= tolerance * |target|
#   upper      computed <= target + tolerance
#   lower      computed >= target - tolerance
# For pure bounds the bound itself is the tunable value and tolerance is 0.

DEFAULT_TOLERANCES: dict[str, float] = {
    "cigar": 1e-10,
    "residual": 1e-10,
    "hamilton": 1e-8,
    "soliton_condition": 1e-10,
    "scalar_lines": 1e-6,
    "fd_curvature": 1e-5,
    "fd_jet": 1e-6,
    "distance": 1e-8,
    "phi_over_s_1e2": 0.05,
    "phi_over_s_1e3": 0.01,
    "phi_over_s_1e4": 0.003,
    "phi1_1e2": 0.02,
    "phi1_1e3": 0.003,
    "phi1_1e4": 0.0005,
    "R_rho": 0.02,
    "R_s": 0.02,
    "R_t": 0.02,
    "R_rho_spread": 1.5,
    "R_rho2_growth": 9.0,
    "vol_slope": 0.05,
    "vol_ratio_drop": 0.01,
    "collapse_drop": 0.35,
    "collapse_ck_spread": 2.0,
    "harnack_min": 1e-8,
    "harnack_sampled": 1e-10,
    "advect": 1e-6,
    "distance_time": 0.01,
    "rescaled_orbit": 1.1,
    "h_multiplier": 1e-10,
    "blowdown_fiber": 0.02,
    "blowdown_ricci": 0.05,
}


class UnknownTolerance(KeyError):
    pass


@dataclass(frozen=True)
class Tolerances:
    overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        bad = sorted(set(self.overrides) - set(DEFAULT_TOLERANCES))
        if bad:
            raise UnknownTolerance(f"unknown tolerance name(s): {', '.join(bad)}")

    def __getitem__(self, key: str) -> float:
        if key in self.overrides:
            return float(self.overrides[key])
        return DEFAULT_TOLERANCES[key]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    computed: float
    target: float
    tolerance: float
    mode: str
    status: str  # pass | fail | skip | info
    anchor: str
    tol_key: str | None = None
    reason: str = ""

    @property
    def passed(self) -> bool | None:
        if self.status in ("pass", "fail"):
            return self.status == "pass"
        return None

    def as_record(self) -> dict:
        return {
            "claim_id": self.name,
            "anchor": self.anchor,
            "computed": self.computed,
            "target": self.target,
            "tolerance": self.tolerance,
            "mode": self.mode,
            "pass": self.passed,
            "status": self.status,
            "tol_key": self.tol_key,
            "reason": self.reason,
        }


def compare(computed: float, target: float, tolerance: float, mode: str) -> bool:
    if not math.isfinite(computed):
        return False
    if mode == "two_sided":
        return abs(computed - target) <= tolerance
    if mode == "limit":
        return abs(computed - target) <= tolerance * abs(target)
    if mode == "upper":
        return computed <= target + tolerance
    if mode == "lower":
        return computed >= target - tolerance
    raise ValueError(f"unknown mode {mode!r}")


def check(name: str, computed: float, target: float, tolerance: float, mode: str,
          anchor: str, tol_key: str | None = None) -> SuiteResult:
    ok = compare(float(computed), float(target), float(tolerance), mode)
    return SuiteResult(name, float(computed), float(target), float(tolerance), mode,
                       "pass" if ok else "fail", anchor, tol_key)


def bound(name: str, computed: float, tols: Tolerances, key: str, mode: str, anchor: str) -> SuiteResult:
    """One-sided claim whose bound is the registry value."""
    return check(name, computed, tols[key], 0.0, mode, anchor, key)


def skipped(name: str, anchor: str, reason: str) -> SuiteResult:
    nan = float("nan")
    return SuiteResult(name, nan, nan, nan, "two_sided", "skip", anchor, None, reason)


def info(name: str, computed: float, anchor: str, reason: str = "reported only") -> SuiteResult:
    nan = float("nan")
    return SuiteResult(name, float(computed), nan, nan, "two_sided", "info", anchor, None, reason)


def positive(name: str, computed: float, anchor: str) -> SuiteResult:
    """Strict positivity, recorded as a lower bound of 0."""
    ok = math.isfinite(computed) and computed > 0.0
    return SuiteResult(name, float(computed), 0.0, 0.0, "lower", "pass" if ok else "fail", anchor)
