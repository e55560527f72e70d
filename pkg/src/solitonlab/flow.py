"""Soliton flow g(t) = phi_t^* g on the ray.

The flow is generated by -grad f with the complex-trace norm, so the tracked
coordinate moves as s_t = s0 - t.  Negative t pushes points outward.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceFailure, DegenerateRicci
from .geometry import RayPoint, distance_from_origin, grad_f_norm_sq, log_det_potential, stable_R
from .potential import SolitonParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FlowSample:
    s0: float
    t: float
    s_t: float
    R_t: float
    rho_t: float


@dataclass(frozen=True)
class OrbitSample:
    s: float
    period: float
    length: float
    rescaled_length: float


class FTimeBounds(NamedTuple):
    lhs: float
    mid: float
    rhs: float

    @property
    def holds(self) -> bool:
        # near o or far out the three terms agree to rounding; allow a few ulp
        slack = 8 * sys.float_info.epsilon * abs(self.rhs)
        return self.lhs - slack <= self.mid <= self.rhs + slack


def _integrated_s(params: SolitonParams, s0: float, t: float) -> float:
    # ds/dt = -|grad f|^2 / f'
    def rhs(_, y):
        p = RayPoint.at(params, float(y[0]))
        return [-grad_f_norm_sq(p) / log_det_potential(p)[1]]

    sol = solve_ivp(rhs, (0.0, t), [s0], method="RK45", rtol=1e-11, atol=1e-11)
    if not sol.success:
        raise ConvergenceFailure(f"flow integration failed: {sol.message}")
    return float(sol.y[0, -1])


def advect(params: SolitonParams, s0: float, t: float, mode: str = "closed") -> FlowSample:
    """Track the point at level s0 for flow time t.

    mode="integrate" solves the ODE numerically instead of using s0 - t; it
    exists only to cross-check the closed form.
    """
    if not (math.isfinite(s0) and math.isfinite(t)):
        raise ValueError("s0 and t must be finite")
    if mode == "closed":
        s_t = s0 - t
    elif mode == "integrate":
        s_t = _integrated_s(params, s0, t)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    p = RayPoint.at(params, s_t)
    return FlowSample(s0, t, s_t, params.n - p.jet.phi1, distance_from_origin(params, s_t))


def harnack_trace(params: SolitonParams, s: float) -> float:
    """dR/dt at the tracked point, which is phi''(s)."""
    return RayPoint.at(params, s).jet.phi2


def _harnack_terms(params: SolitonParams, s: float):
    j = RayPoint.at(params, s).jet
    ric_rad = j.phi2 / j.phi1
    ric_fib = j.phi1 / j.phi
    grad_R = -j.phi2 / math.sqrt(j.phi1)  # radial unitary component of grad R
    return j.phi2, grad_R, ric_rad, ric_fib


def harnack_quadratic(params: SolitonParams, s: float, V) -> float:
    """dR/dt + 2 Re(grad_1 R V^1) + Ric(V, Vbar) in the unitary frame at (e^(s/2), 0, ...)."""
    V = np.asarray(V, dtype=complex)
    dRdt, grad_R, ric_rad, ric_fib = _harnack_terms(params, s)
    fiber = float(np.sum(np.abs(V[1:]) ** 2))
    return dRdt + 2.0 * grad_R * V[0].real + ric_rad * abs(V[0]) ** 2 + ric_fib * fiber


def harnack_quadratic_min(params: SolitonParams, s: float) -> float:
    """Closed-form minimum over V; vanishes for a steady soliton."""
    dRdt, grad_R, ric_rad, _ = _harnack_terms(params, s)
    if not ric_rad > 0:
        raise DegenerateRicci(f"radial Ricci eigenvalue {ric_rad} at s={s}")
    return dRdt - grad_R**2 / ric_rad


def harnack_sampled(params: SolitonParams, s: float, seed: int = 0, count: int = 20) -> float:
    """Smallest quadratic value over `count` Gaussian V drawn from a fixed seed.

    The minimizer V = (-grad_1 R / ric_rad, 0, ...) is included so the
    sample probes the equality case as well.
    """
    rng = np.random.default_rng(seed)
    n = params.n
    Vs = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    _, grad_R, ric_rad, _ = _harnack_terms(params, s)
    v_star = np.zeros(n, dtype=complex)
    v_star[0] = -grad_R / ric_rad
    return min(harnack_quadratic(params, s, V) for V in [*Vs, v_star])


def harnack_grid_min(params: SolitonParams, s: float, half_width: float = 4.0, count: int = 401) -> float:
    """Brute-force minimum over a real grid for V^1, fiber part zero."""
    _, grad_R, ric_rad, _ = _harnack_terms(params, s)
    centre = -grad_R / ric_rad
    xs = centre + np.linspace(-half_width, half_width, count) * max(1.0, abs(centre))
    return min(harnack_quadratic(params, s, [x] + [0] * (params.n - 1)) for x in xs)


def distance_time_ratio(params: SolitonParams, s0: float, t: float, samples: int = 40) -> tuple[float, float, float]:
    """rho(o, phi_t p)/|t| plus running min and max over |t'| in [1, |t|]."""
    if not t <= -1.0:
        raise ValueError("need t <= -1")
    taus = np.geomspace(1.0, -t, samples)
    ratios = [distance_from_origin(params, s0 + tau) / tau for tau in taus]
    return ratios[-1], min(ratios), max(ratios)


def f_potential(params: SolitonParams, s: float) -> float:
    return log_det_potential(RayPoint.at(params, s))[0]


def f_time_bounds(params: SolitonParams, s0: float, t: float) -> FTimeBounds:
    """(R(o) - R(p))|t| <= f(phi_t p) - f(p) <= R(o)|t| for t <= 0.

    f increases along the outward motion, so the middle term is taken as the
    increase of f between s0 and s0 - t.
    """
    if t > 0:
        raise ValueError("t must be <= 0")
    if t == 0:
        return FTimeBounds(0.0, 0.0, 0.0)
    n = params.n
    tau = -t
    pa, pb = RayPoint.at(params, s0), RayPoint.at(params, s0 + tau)
    a, b = pa.jet, pb.jet
    Ra, Rb = stable_R(pa), stable_R(pb)
    # f(b) - f(a) from f = ns - (n-1) ln phi - ln phi', as log-ratios;
    # phi'_b - phi'_a = R_a - R_b keeps digits when phi' rounds to n
    mid = n * tau - (n - 1) * math.log1p((b.phi - a.phi) / a.phi) - math.log1p((Ra - Rb) / a.phi1)
    return FTimeBounds(n * tau - Ra * tau, mid, n * tau)


def circle_orbit(params: SolitonParams, s: float) -> OrbitSample:
    p = RayPoint.at(params, s)
    length = TWO_PI * math.sqrt(p.jet.phi1)
    return OrbitSample(s, TWO_PI, length, TWO_PI * math.sqrt(stable_R(p) * p.jet.phi1))


def rescaled_circle_length(params: SolitonParams, s: float) -> float:
    return circle_orbit(params, s).rescaled_length


def orbit_length_from_metric(params: SolitonParams, s: float, nodes: int = 64) -> float:
    """Integrate |gamma'| along z(tau) = (e^(i tau) e^(s/2), 0, ...) with the explicit metric."""
    from .oracles import explicit_metric

    x = math.exp(s / 2)
    taus = np.linspace(0.0, TWO_PI, nodes, endpoint=False)
    speeds = []
    for tau in taus:
        z = np.zeros(params.n, dtype=complex)
        z[0] = x * np.exp(1j * tau)
        dz = 1j * z
        g = explicit_metric(params, z)
        speeds.append(math.sqrt(max(np.real(dz @ g @ dz.conj()), 0.0)))
    return float(np.mean(speeds) * TWO_PI)  # periodic trapezoid


def holomorphic_field_check(params: SolitonParams, s_samples) -> float:
    """Max |f'/u'' - 1| over the samples; the multipliers h_i are 1 when this vanishes."""
    s_samples = list(s_samples)
    if len(s_samples) < 2:
        raise ValueError("need at least two samples")
    worst = 0.0
    for s in s_samples:
        p = RayPoint.at(params, s)
        worst = max(worst, abs(log_det_potential(p)[1] / p.jet.phi1 - 1.0))
    return worst
