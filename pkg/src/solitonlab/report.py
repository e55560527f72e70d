"""Run configuration, per-module claim runs, tables and deterministic writers."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy

from . import __version__
from .asymptotics import (
    blowdown_profile,
    collapse_k0,
    collapse_records,
    collapse_suite,
    decay_suite,
    laplacian_report,
    limit_suite,
    volume_suite,
)
from .claims import SuiteResult, Tolerances, check, info, positive
from .flow import (
    advect,
    circle_orbit,
    distance_time_ratio,
    f_time_bounds,
    harnack_quadratic_min,
    harnack_sampled,
    holomorphic_field_check,
)
from .geometry import (
    RayPoint,
    curvature_components,
    curvature_tensor,
    distance_from_origin,
    grad_f_norm_sq,
    hamilton_defect,
    log_det_potential,
    scalar_curvature,
)
from .oracles import cigar_gauss_curvature_fd, fd_curvature_tensor, fd_jet
from .potential import N_MAX, SolitonParams, build_grid, cigar_closed_form, implicit_residual, jet_at

MODULES = ("potential_core", "geometry_engine", "flow_engine", "asymptotics_probe")
CURVATURE_LEVELS = (-5.0, 0.0, 5.0, 20.0, 100.0)
FD_LEVELS = tuple(np.linspace(-4.0, 6.0, 10))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    s_range: tuple[float, float] = (-20.0, 200.0)
    grid_count: int = 200
    tolerance_overrides: Mapping[str, float] = field(default_factory=dict)
    output_dir: str = "solitonlab_out"
    format: str = "both"
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or not 1 <= self.n <= N_MAX:
            raise ConfigError(f"n must be an integer in [1, {N_MAX}], got {self.n!r}")
        lo, hi = self.s_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigError(f"invalid s range {self.s_range!r}")
        if self.grid_count < 2:
            raise ConfigError("grid_count must be >= 2")
        if self.format not in ("csv", "json", "both"):
            raise ConfigError(f"format must be csv, json or both, got {self.format!r}")
        try:
            Tolerances(dict(self.tolerance_overrides))
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from exc

    @property
    def params(self) -> SolitonParams:
        return SolitonParams(self.n)

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(dict(self.tolerance_overrides))

    def samples(self) -> np.ndarray:
        return np.linspace(self.s_range[0], self.s_range[1], self.grid_count)

    def echo(self) -> dict:
        return {
            "n": self.n,
            "s_range": list(self.s_range),
            "grid_count": self.grid_count,
            "tolerance_overrides": dict(sorted(self.tolerance_overrides.items())),
            "format": self.format,
            "seed": self.seed,
        }


# ---------------------------------------------------------------- claim runs

def potential_claims(cfg: RunConfig) -> list[SuiteResult]:
    tols, p = cfg.tolerances, cfg.params
    cigar = SolitonParams(1)
    nodes = np.linspace(-30.0, 30.0, 601)
    phi_err = jet_err = 0.0
    for s in nodes:
        ref = cigar_closed_form(s)
        got = jet_at(cigar, s)
        phi_err = max(phi_err, abs(got.phi - ref.phi))
        jet_err = max(jet_err, abs(got.phi1 - ref.phi1), abs(got.phi2 - ref.phi2), abs(got.phi3 - ref.phi3))
    anchor_cigar = "n = 1: phi = ln(1 + e^s)"
    out = [
        check("potential.cigar_phi", phi_err, 0.0, tols["cigar"], "two_sided", anchor_cigar, "cigar"),
        check("potential.cigar_jet", jet_err, 0.0, tols["cigar"], "two_sided", anchor_cigar, "cigar"),
    ]
    grid = build_grid(p, *cfg.s_range, cfg.grid_count)
    resid = max(abs(implicit_residual(p, j.s, j.phi)) for j in grid.jets)
    anchor = "P_n(phi) e^phi = e^(ns) + (-1)^(n-1) n!"
    out.append(check("potential.residual", resid, 0.0, tols["residual"], "two_sided", anchor, "residual"))
    phis = grid.column("phi")
    out.append(positive("potential.monotone", float(np.min(np.diff(phis))), "phi' > 0"))
    fd_err = 0.0
    for s in np.linspace(max(cfg.s_range[0], -10.0), min(cfg.s_range[1], 50.0), 12):
        j = jet_at(p, s)
        d = fd_jet(p, s)
        fd_err = max(fd_err, *(abs(a - b) / max(1.0, abs(b)) for a, b in zip(d, (j.phi1, j.phi2, j.phi3))))
    out.append(check("potential.fd_jet", fd_err, 0.0, tols["fd_jet"], "two_sided", "jet of the implicit solution", "fd_jet"))
    return out


def _fd_relative_error(p: SolitonParams, s: float) -> float:
    n = p.n
    T = fd_curvature_tensor(p, s)
    ref = curvature_tensor(p, RayPoint.at(p, s).jet.phi)
    idx = [(0, 0, 0, 0)]
    if n >= 2:
        idx += [(0, 0, 1, 1), (1, 1, 1, 1)]
    if n >= 3:
        idx.append((1, 1, 2, 2))
    return max(abs(T[i].real - ref[i].real) / abs(ref[i].real) for i in idx)


def geometry_claims(cfg: RunConfig) -> list[SuiteResult]:
    tols, p, n = cfg.tolerances, cfg.params, cfg.n
    ham = cond = lines = 0.0
    for s in cfg.samples():
        pt = RayPoint.at(p, s)
        ham = max(ham, abs(hamilton_defect(pt)))
        cond = max(cond, abs(log_det_potential(pt)[1] - pt.jet.phi1))
        r_short, r_long = scalar_curvature(pt)
        lines = max(lines, abs(r_short - r_long))
    out = [
        check("geometry.hamilton", ham, 0.0, tols["hamilton"], "two_sided", "R + |grad f|^2 = A_0", "hamilton"),
        check("geometry.soliton_condition", cond, 0.0, tols["soliton_condition"], "two_sided",
              "f' = lambda u''", "soliton_condition"),
        check("geometry.scalar_lines", lines, 0.0, tols["scalar_lines"], "two_sided", "= n - phi'", "scalar_lines"),
    ]
    sec = bis = math.inf
    for s in CURVATURE_LEVELS:
        rep = curvature_components(RayPoint.at(p, s), seed=cfg.seed)
        sec, bis = min(sec, rep.sec_min), min(bis, rep.bisec_min)
    anchor = "positive sectional curvature"
    out.append(positive("geometry.sec_min", sec, anchor))
    out.append(positive("geometry.bisec_min", bis, anchor))
    fd = max(_fd_relative_error(p, s) for s in FD_LEVELS)
    out.append(check("geometry.fd_curvature", fd, 0.0, tols["fd_curvature"], "two_sided",
                     "curvature of the Kahler metric from its potential", "fd_curvature"))
    if n == 1:
        gauss = 0.0
        for s in (-2.0, -1.0, 0.0, 1.0, 2.0):
            ref = 2 * curvature_components(RayPoint.at(p, s)).comp_A
            gauss = max(gauss, abs(cigar_gauss_curvature_fd(s) - ref) / ref)
        out.append(check("geometry.cigar_gauss", gauss, 0.0, tols["fd_curvature"], "two_sided",
                         "cigar g = |dz|^2/(1+|z|^2)", "fd_curvature"))
        dist = max(abs(distance_from_origin(p, s) - math.asinh(math.exp(s / 2))) for s in (-10, 0, 10, 30))
        out.append(check("geometry.cigar_distance", dist, 0.0, tols["distance"], "two_sided",
                         "cigar rho = asinh(e^(s/2))", "distance"))
    return out


def flow_claims(cfg: RunConfig) -> list[SuiteResult]:
    tols, p, n = cfg.tolerances, cfg.params, cfg.n
    samples = cfg.samples()
    anchor_h = "dR/dt + grad_i R V^i + grad_ibar R V^ibar + R_ijbar V^i V^jbar >= 0"
    trace = min(RayPoint.at(p, s).jet.phi2 for s in samples)
    qmin = max(abs(harnack_quadratic_min(p, s)) for s in samples)
    sampled = min(harnack_sampled(p, s, seed=cfg.seed) for s in samples)
    out = [
        positive("flow.harnack_trace", trace, "d/dt R(phi_t p) = Ric(grad f, grad fbar) >= 0"),
        check("flow.harnack_min", qmin, 0.0, tols["harnack_min"], "two_sided", anchor_h, "harnack_min"),
        check("flow.harnack_sampled", sampled, 0.0, tols["harnack_sampled"], "lower", anchor_h, "harnack_sampled"),
    ]

    adv = max(abs(advect(p, 1.0, t, mode="integrate").s_t - (1.0 - t)) for t in (-1e3, -1e2, -10.0, 10.0, 20.0))
    out.append(check("flow.advect", adv, 0.0, tols["advect"], "two_sided", "d/dt f(phi_t p) = -|grad f|^2", "advect"))
    ratio, c1, c2 = distance_time_ratio(p, 1.0, -1e4)
    anchor_d = "C1|t| <= rho(o, phi_t p) <= C2|t|"
    out.append(check("flow.distance_time.t=1e4", ratio, math.sqrt(n) / 2, tols["distance_time"], "limit",
                     anchor_d, "distance_time"))
    out.append(positive("flow.distance_time.C1", c1, anchor_d))
    out.append(info("flow.distance_time.C2", c2, anchor_d))
    ft_fail = 0
    for t in -np.geomspace(1e-2, 1e4, 50):
        for s0 in (-5.0, 0.0, 5.0):
            ft_fail += not f_time_bounds(p, s0, float(t)).holds
    out.append(check("flow.f_time_violations", ft_fail, 0.0, 0.0, "two_sided",
                     "(R(o)-R(p))|t| <= f change along the flow <= R(o)|t|"))

    cap = 2 * math.pi * math.sqrt(n)
    lengths = [circle_orbit(p, s).length for s in samples]
    anchor_o = "l_k <= A_0^(1/2) 2 pi / h_1"
    out.append(check("flow.orbit_bound", max(lengths) / cap, 1.0, 0.0, "upper", anchor_o))
    far = circle_orbit(p, 1e4).length
    out.append(check("flow.orbit_limit.s=1e4", far, cap, 1e-3, "limit", anchor_o))
    if n >= 2:
        for s in (1e3, 1e4):
            lim = tols["rescaled_orbit"] * 2 * math.pi * math.sqrt(n * (n - 1) / s)
            out.append(check(f"flow.rescaled_orbit.s=1e{round(math.log10(s))}", circle_orbit(p, s).rescaled_length,
                             lim, 0.0, "upper", "Length(gamma_k, g_k(0)) -> 0", "rescaled_orbit"))
    out.append(check("flow.h_multiplier", holomorphic_field_check(p, samples), 0.0, tols["h_multiplier"],
                     "two_sided", "Z = sum h_i z_i d/dz_i", "h_multiplier"))
    return out


def asymptotic_claims(cfg: RunConfig) -> list[SuiteResult]:
    p, tols = cfg.params, cfg.tolerances
    return (limit_suite(p, tols) + decay_suite(p, tols) + volume_suite(p, tols)
            + collapse_suite(p, tols) + blowdown_profile(p, tols) + laplacian_report(p))


RUNNERS = {
    "potential_core": potential_claims,
    "geometry_engine": geometry_claims,
    "flow_engine": flow_claims,
    "asymptotics_probe": asymptotic_claims,
}


@dataclass
class VerificationReport:
    config: RunConfig
    modules: dict[str, list[SuiteResult]]
    timestamp: str

    @property
    def results(self) -> list[SuiteResult]:
        return [r for m in MODULES for r in self.modules.get(m, [])]

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.results)

    def counts(self) -> dict:
        c = {"pass": 0, "fail": 0, "skip": 0, "info": 0}
        for r in self.results:
            c[r.status] += 1
        return c

    def to_json_obj(self) -> dict:
        return {
            "tool": "solitonlab",
            "version": __version__,
            "build": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "timestamp": self.timestamp,
            "config": self.config.echo(),
            "pass": self.passed,
            "counts": self.counts(),
            "modules": {m: [r.as_record() for r in self.modules[m]] for m in MODULES if m in self.modules},
        }


def run_verification(cfg: RunConfig) -> VerificationReport:
    modules = {name: RUNNERS[name](cfg) for name in MODULES}
    names = [r.name for m in modules.values() for r in m]
    assert len(names) == len(set(names)), "claim ids must be unique"
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return VerificationReport(cfg, modules, stamp)


# -------------------------------------------------------------------- tables

SOLVE_COLUMNS = ("s", "phi", "phi1", "phi2", "phi3", "residual")
CURVATURE_COLUMNS = ("s", "R", "ric_rad", "ric_fib", "A", "B", "C", "D", "sec_min", "bisec_min", "rho", "R_rho", "R_s")
FLOW_COLUMNS = ("s", "R", "dR_dt", "harnack_min", "harnack_sampled", "grad_f_sq", "h_deviation",
                "orbit_period", "orbit_length", "rescaled_orbit_length")
COLLAPSE_COLUMNS = ("k", "s_k", "r_k", "sup_R_on_ball", "gate", "vol_upper", "ratio", "const_bound",
                    "vol_lower", "lower_ratio")
CLAIM_COLUMNS = ("claim_id", "anchor", "computed", "target", "tolerance", "mode", "pass", "status", "reason")


def solve_table(cfg: RunConfig) -> list[tuple]:
    p = cfg.params
    grid = build_grid(p, *cfg.s_range, cfg.grid_count)
    return [(j.s, j.phi, j.phi1, j.phi2, j.phi3, implicit_residual(p, j.s, j.phi)) for j in grid.jets]


def curvature_table(cfg: RunConfig) -> list[tuple]:
    p, n = cfg.params, cfg.n
    rows = []
    for s in cfg.samples():
        rep = curvature_components(RayPoint.at(p, s), seed=cfg.seed)
        rho = distance_from_origin(p, s)
        rows.append((float(s), rep.R, rep.ric_rad, rep.ric_fib, rep.comp_A, rep.comp_B, rep.comp_C,
                     rep.comp_D, rep.sec_min, rep.bisec_min, rho, rep.R * rho, rep.R * s))
    return rows


def flow_table(cfg: RunConfig) -> list[tuple]:
    p, n = cfg.params, cfg.n
    rows = []
    for s in cfg.samples():
        pt = RayPoint.at(p, s)
        orb = circle_orbit(p, s)
        f1 = log_det_potential(pt)[1]
        rows.append((float(s), n - pt.jet.phi1, pt.jet.phi2, harnack_quadratic_min(p, s),
                     harnack_sampled(p, s, seed=cfg.seed), grad_f_norm_sq(pt), abs(f1 / pt.jet.phi1 - 1.0),
                     orb.period, orb.length, orb.rescaled_length))
    return rows


def collapse_table(cfg: RunConfig, k_max: int = 40) -> list[tuple]:
    recs = collapse_records(cfg.params, k_max)
    return [(r.k, r.s_k, r.r_k, r.sup_R_on_ball, int(r.gate), r.vol_upper, r.ratio, r.const_bound,
             r.vol_lower, r.lower_ratio) for r in recs]


def collapse_summary(cfg: RunConfig, k_max: int = 40) -> list[SuiteResult]:
    out = collapse_suite(cfg.params, cfg.tolerances, k_max)
    k0 = collapse_k0(collapse_records(cfg.params, k_max))
    return out + [info("collapse.k0_value", float("nan") if k0 is None else k0, "k0 for the constant bound")]


def claim_rows(results: list[SuiteResult]) -> list[tuple]:
    return [(r.name, r.anchor, r.computed, r.target, r.tolerance, r.mode,
             "" if r.passed is None else ("true" if r.passed else "false"), r.status, r.reason)
            for r in results]


# ------------------------------------------------------------------- writers

def fmt_float(x) -> str:
    """Fixed 17-significant-digit scientific form; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.16e" % x


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written as %.16e; NaN and infinities become null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return "%.16e" % obj if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def table_json(columns, rows) -> dict:
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


def write_outputs(out_dir: str | os.PathLike, stem: str, fmt: str, csv_text: str | None, json_obj) -> list[Path]:
    """Write <stem>.csv and/or <stem>.json, replacing existing files."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both") and csv_text is not None:
        path = d / f"{stem}.csv"
        path.write_text(csv_text, encoding="utf-8", newline="")
        written.append(path)
    if fmt in ("json", "both") and json_obj is not None:
        path = d / f"{stem}.json"
        path.write_text(to_json(json_obj) + "\n", encoding="utf-8")
        written.append(path)
    return written
