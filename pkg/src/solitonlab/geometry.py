"""Riemannian data at ray points p = (e^(s/2), 0, ..., 0).

Conventions.  Hermitian quantities use the complex trace: R = g^{i jbar} R_{i jbar}
and |grad f|^2 = g^{i jbar} d_i f d_jbar f, under which R = n - phi',
R + |grad f|^2 = n and R(o) = n all hold exactly.  Distances and volumes use
the real form

    g = phi'/4 ds^2 + phi' dtheta^2 + phi pi^* g_FS

with vol(CP^m, g_FS) = pi^m / m!, so the volume density is phi' phi^(n-1) / 2.
Curvature components are reported in the unitary frame at p; index 0 is the
radial (z_1) direction and indices >= 1 are fiber directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.stats import qmc

from .errors import DomainError, QuadratureFailure
from .potential import (
    PhiJet,
    SolitonParams,
    _phi1_from_phi,
    curvature_coefficients,
    extended_jet,
    jet_at,
    scalar_gap,
    solve_phi,
)

S_CUT = -40.0
TRACE_TOL = 1e-8
N_PLANES = 256

# Fixed breakpoints for the cumulative distance integral; cached per n.
_KNOTS = (
    -40.0, -20.0, -10.0, -5.0, 0.0, 2.5, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0,
    500.0, 1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5, 2e5, 5e5, 1e6,
)


@dataclass(frozen=True)
class RayPoint:
    params: SolitonParams
    jet: PhiJet

    @classmethod
    def at(cls, params: SolitonParams, s: float) -> "RayPoint":
        return cls(params, jet_at(params, s))

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def s(self) -> float:
        return self.jet.s


@dataclass(frozen=True)
class MetricAtRay:
    g_rad: float
    g_fib: float


@dataclass(frozen=True)
class CurvatureReport:
    R: float
    ric_rad: float
    ric_fib: float
    comp_A: float
    comp_B: float | None
    comp_C: float | None
    comp_D: float | None
    sec_min: float
    bisec_min: float
    trace_error: float


@dataclass(frozen=True)
class DistanceProfile:
    s: np.ndarray
    rho: np.ndarray
    error: float


def fs_volume(m: int) -> float:
    """Volume of CP^m under the Fubini-Study normalization used here."""
    return math.pi**m / math.factorial(m)


def fs_ball_volume(m: int, radius: float) -> float:
    """Volume of a geodesic ball in CP^m (holomorphic sectional curvature 4)."""
    if m == 0:
        return 1.0
    return fs_volume(m) * math.sin(min(radius, math.pi / 2)) ** (2 * m)


def euclidean_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


def metric_at_ray(point: RayPoint) -> MetricAtRay:
    j = point.jet
    e = math.exp(-j.s)
    return MetricAtRay(g_rad=e * j.phi1, g_fib=e * j.phi)


def log_det_potential(point: RayPoint) -> tuple[float, float]:
    """f = -ln det g = ns - (n-1) ln phi - ln phi' and its s-derivative.

    f' cancels down to a value of size phi' near the origin, so it is formed
    on the long-double jet.
    """
    n, j = point.n, point.jet
    f = n * j.s - (n - 1) * math.log(j.phi) - math.log(j.phi1)
    phi, p1, p2, _ = extended_jet(point.params, j.phi)
    f1 = n - (n - 1) * p1 / phi - p2 / p1
    return f, float(f1)


def _first_line(n: int, phi, p1, p2, p3):
    # -(1/phi')((n-1)(phi'/phi)' + (phi''/phi')') + (n-1)/phi (n - (n-1)phi'/phi - phi''/phi')
    d_ratio = p2 / phi - (p1 / phi) ** 2
    d_log1 = p3 / p1 - (p2 / p1) ** 2
    f1 = n - (n - 1) * p1 / phi - p2 / p1
    return -((n - 1) * d_ratio + d_log1) / p1 + (n - 1) * f1 / phi


def scalar_curvature(point: RayPoint) -> tuple[float, float]:
    """Scalar curvature twice: n - phi' and the expanded trace of the Ricci form.

    The expanded form loses about |s| / ln 10 digits as s -> -inf, so it is
    evaluated on a long-double jet rebuilt from phi.
    """
    n, j = point.n, point.jet
    r_long = _first_line(n, *extended_jet(point.params, j.phi))
    return n - j.phi1, float(r_long)


def grad_f_norm_sq(point: RayPoint) -> float:
    """|grad f|^2 = g^{1 1bar} |d_1 f|^2 = f'^2 / phi' on the ray."""
    _, f1 = log_det_potential(point)
    return f1 * f1 / point.jet.phi1


def hamilton_defect(point: RayPoint) -> float:
    """R + |grad f|^2 - A0; zero for a steady soliton."""
    r_short, _ = scalar_curvature(point)
    return r_short + grad_f_norm_sq(point) - point.params.A0


def component_formulas_jet(n: int, jet: PhiJet) -> tuple[float, float, float, float]:
    """Unitary-frame components (A, B, C, D) of R_{i jbar k lbar} from a jet.

    A = R_{0 0 0 0}, B = R_{0 0 a a}, C = R_{a a a a}, D = R_{a a b b} (a != b).
    Valid for any U(n)-invariant potential (the soliton equation is not used),
    but ill-conditioned for s << 0 where the metric is nearly flat.
    """
    p, p1, p2, p3 = jet.phi, jet.phi1, jet.phi2, jet.phi3
    A = -(p3 / p1 - (p2 / p1) ** 2) / p1
    B = -(p2 / p - (p1 / p) ** 2) / p1
    D = (p - p1) / (p * p)
    C = 2.0 * D
    return A, B, C, D


def curvature_tensor(params: SolitonParams, phi: float) -> np.ndarray:
    """Full tensor T[i, j, k, l] = R_{i jbar k lbar} in the unitary frame at the ray point."""
    n = params.n
    A, B, C, D = curvature_coefficients(params, phi)
    T = np.zeros((n, n, n, n))
    T[0, 0, 0, 0] = A
    for a in range(1, n):
        T[0, 0, a, a] = T[a, a, 0, 0] = T[0, a, a, 0] = T[a, 0, 0, a] = B
        for b in range(1, n):
            if a == b:
                T[a, a, a, a] = C
            else:
                T[a, a, b, b] = D
                T[a, b, b, a] = D
    return T


def _contract(T, a, b, c, d):
    return np.einsum("ijkl,...i,...j,...k,...l->...", T, a, b.conj(), c, d.conj())


def sectional_curvatures(T: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Real sectional curvature of the planes spanned by the real vectors xi, eta.

    A real tangent vector is identified with its (1,0)-part; with g(X, X) = |xi|^2
    this yields the Gauss curvature of the real metric for n = 1.
    """
    num = np.real(_contract(T, xi, eta, eta, xi) - _contract(T, xi, eta, xi, eta))
    nx = np.sum(np.abs(xi) ** 2, axis=-1)
    ny = np.sum(np.abs(eta) ** 2, axis=-1)
    cross = np.real(np.sum(xi * eta.conj(), axis=-1))
    return num / (nx * ny - cross**2)


def bisectional_curvatures(T: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    num = np.real(_contract(T, xi, xi, eta, eta))
    return num / (np.sum(np.abs(xi) ** 2, axis=-1) * np.sum(np.abs(eta) ** 2, axis=-1))


@lru_cache(maxsize=32)
def _plane_sample(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    u = qmc.Sobol(d=4 * n, scramble=True, seed=seed).random_base2(8)
    v = 2.0 * u - 1.0
    xi = v[:, :n] + 1j * v[:, n : 2 * n]
    eta = v[:, 2 * n : 3 * n] + 1j * v[:, 3 * n :]
    # real Gram-Schmidt so every sampled plane is well conditioned
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    eta -= np.real(np.sum(eta * xi.conj(), axis=1, keepdims=True)) * xi
    keep = np.linalg.norm(eta, axis=1) > 1e-3
    xi, eta = xi[keep], eta[keep]
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    # coordinate planes: holomorphic lines and real/imaginary mixed pairs
    basis = np.eye(n, dtype=complex)
    cx, ce = [], []
    for a in range(n):
        cx.append(basis[a])
        ce.append(1j * basis[a])
        for b in range(a + 1, n):
            cx += [basis[a], basis[a]]
            ce += [basis[b], 1j * basis[b]]
    return np.vstack([np.array(cx), xi]), np.vstack([np.array(ce), eta])


def curvature_components(point: RayPoint, seed: int = 0) -> CurvatureReport:
    n, j = point.n, point.jet
    T = curvature_tensor(point.params, j.phi)
    A, B, C, D = curvature_coefficients(point.params, j.phi)
    r_short, _ = scalar_curvature(point)
    ric_rad = j.phi2 / j.phi1
    ric_fib = j.phi1 / j.phi

    ric = np.einsum("ijkk->ij", T)
    err = abs(ric[0, 0] - ric_rad)
    if n > 1:
        err = max(err, float(np.max(np.abs(np.diag(ric)[1:] - ric_fib))))
    err = max(err, abs(float(np.trace(ric)) - r_short))
    if err > TRACE_TOL * max(1.0, abs(r_short)):
        raise ArithmeticError(f"curvature trace check failed at s={j.s}: {err:.3e}")

    xi, eta = _plane_sample(n, seed)
    sec = sectional_curvatures(T, xi, eta)
    bis = bisectional_curvatures(T, xi, eta)
    return CurvatureReport(
        R=r_short,
        ric_rad=ric_rad,
        ric_fib=ric_fib,
        comp_A=A,
        comp_B=B if n >= 2 else None,
        comp_C=C if n >= 2 else None,
        comp_D=D if n >= 3 else None,
        sec_min=float(np.min(sec)),
        bisec_min=float(np.min(bis)),
        trace_error=float(err),
    )


def _half_sqrt_phi1(n: int, s: float) -> float:
    return 0.5 * math.sqrt(_phi1_from_phi(n, solve_phi(SolitonParams(n), s)))


def _quad(n: int, a: float, b: float) -> tuple[float, float]:
    val, err = integrate.quad(
        lambda t: _half_sqrt_phi1(n, t), a, b, epsabs=1e-11, epsrel=1e-13, limit=200
    )
    return val, err


@lru_cache(maxsize=None)
def _knot_segment(n: int, i: int) -> tuple[float, float]:
    return _quad(n, _KNOTS[i], _KNOTS[i + 1])


def distance_with_error(params: SolitonParams, s: float) -> tuple[float, float]:
    """rho(s) = int_{-inf}^s sqrt(phi')/2 and an absolute error estimate.

    Below s_cut the integrand is replaced by e^(tau/2)/2 (phi' ~ e^tau), whose
    tail integral is e^(s_cut/2).
    """
    n = params.n
    s = float(s)
    if not math.isfinite(s):
        raise ValueError("s must be finite")
    if s > _KNOTS[-1]:
        raise ValueError(f"s above supported range {_KNOTS[-1]}")
    if s <= S_CUT:
        cut = s - 40.0
        val, err = _quad(n, cut, s)
        total, total_err = val + math.exp(cut / 2.0), err
    else:
        total, total_err = math.exp(S_CUT / 2.0), 0.0
        i = 0
        while _KNOTS[i + 1] <= s:
            v, e = _knot_segment(n, i)
            total += v
            total_err += e
            i += 1
        if s > _KNOTS[i]:
            v, e = _quad(n, _KNOTS[i], s)
            total += v
            total_err += e
    if total_err > 1e-8:
        raise QuadratureFailure(f"distance error estimate {total_err:.2e} at s={s}")
    return total, total_err


def distance_from_origin(params: SolitonParams, s: float) -> float:
    return distance_with_error(params, s)[0]


def distance_profile(params: SolitonParams, s_values) -> DistanceProfile:
    s_arr = np.asarray(s_values, dtype=float)
    rho = np.empty_like(s_arr)
    err = 0.0
    for i, s in enumerate(s_arr):
        rho[i], e = distance_with_error(params, s)
        err = max(err, e)
    return DistanceProfile(s_arr, rho, err)


def s_at_distance(params: SolitonParams, r: float) -> float:
    """Inverse of rho(s)."""
    if r <= 0:
        raise ValueError("r must be positive")
    n = params.n
    # rho ~ e^(s/2) near o and ~ sqrt(n) s / 2 far out
    lo = 2.0 * math.log(r) - 5.0 if r < 1 else -5.0
    hi = max(4.0 * r / math.sqrt(n) + 10.0, 1.0)
    return optimize.brentq(lambda s: distance_from_origin(params, s) - r, lo, hi, xtol=1e-12, rtol=1e-14)


def sublevel_volume(params: SolitonParams, S: float) -> float:
    """Volume of {s <= S} = B(o, rho(S)): pi V_FS(n-1) phi(S)^n / n."""
    n = params.n
    phi = solve_phi(params, S)
    return math.pi * fs_volume(n - 1) * phi**n / n


def sublevel_volume_quad(params: SolitonParams, S: float) -> float:
    """Quadrature of 2 pi V_FS(n-1) int phi' phi^(n-1) / 2 ds, for cross-checking."""
    n = params.n

    def density(t):
        phi = solve_phi(params, t)
        return 0.5 * _phi1_from_phi(n, phi) * phi ** (n - 1)

    lo = min(S - 60.0, -60.0)
    val, _ = integrate.quad(density, lo, S, epsabs=0.0, epsrel=1e-12, limit=400)
    tail = math.exp(n * lo) / (2 * n)
    return 2 * math.pi * fs_volume(n - 1) * (val + tail)


def collapse_radius(n: int, k: int) -> float:
    if n < 2:
        raise DomainError("r_k = k / (2 sqrt(n-1)) is undefined for n = 1")
    return k / (2.0 * math.sqrt(n - 1))


def constant_volume_bound(n: int, k: int) -> float:
    """32^(n+1) n (n-1)^(n-1) pi omega_{2n-2} r_k^(2n-1)."""
    r_k = collapse_radius(n, k)
    omega = euclidean_ball_volume(2 * n - 2)
    return 32.0 ** (n + 1) * n * (n - 1) ** (n - 1) * math.pi * omega * r_k ** (2 * n - 1)


def slab_ball_upper_bound(params: SolitonParams, k: int) -> tuple[float, float]:
    """Upper bound for vol B(p_k, r_k), s(p_k) = k^2, and the closed-form constant bound.

    The ball lies in {k^2 - 2r_k <= s <= k^2 + 2r_k} x S^1 x B_FS(2 phi(p_k)^(-1/2) r_k);
    the volume of that set is returned.
    """
    n = params.n
    if n < 2:
        raise DomainError("slab bound requires n >= 2")
    if k < 2:
        raise ValueError("k must be >= 2")
    r_k = collapse_radius(n, k)
    s_k = float(k * k)
    phi_k = solve_phi(params, s_k)
    phi_lo = solve_phi(params, s_k - 2 * r_k)
    phi_hi = solve_phi(params, s_k + 2 * r_k)
    # int dtheta int phi' phi^(n-1)/2 ds = pi (phi_hi^n - phi_lo^n) / n
    radial = math.pi * (phi_hi**n - phi_lo**n) / n
    fs = fs_ball_volume(n - 1, 2.0 * r_k / math.sqrt(phi_k))
    return radial * fs, constant_volume_bound(n, k)


def box_ball_lower_bound(params: SolitonParams, s0: float, r: float) -> float:
    """Volume of a coordinate box inscribed in B(p(s0), r).

    The box is {|rho(s) - rho(s0)| <= r/3} x {theta-arc <= r/3} x {FS ball of
    g-radius r/3}; every point is joined to p(s0) by three legs of length
    <= r/3 each.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    n = params.n
    rho0 = distance_from_origin(params, s0)
    leg = r / 3.0
    if rho0 - leg <= 0:
        raise DomainError("box reaches the origin; slab variation unbounded")
    s_a = s_at_distance(params, rho0 - leg)
    s_b = s_at_distance(params, rho0 + leg)
    ja, jb = jet_at(params, s_a), jet_at(params, s_b)
    if jb.phi / ja.phi > 2.0 or jb.phi1 / ja.phi1 > 2.0:
        raise DomainError("phi or phi' varies by more than 2x across the slab")
    # the theta-circle is closed and CP^(n-1) has diameter pi/2, so cap both
    arc = min(2.0 * leg / math.sqrt(jb.phi1), 2.0 * math.pi)
    fs_radius = min(leg / math.sqrt(jb.phi), 0.5 * math.pi)
    radial = (jb.phi**n - ja.phi**n) / (2 * n)
    return radial * arc * fs_ball_volume(n - 1, fs_radius)


def laplacian_R(point: RayPoint) -> float:
    """Complex-trace Laplacian of R(s): h''/phi' + (n-1) h'/phi with h = n - phi'."""
    n, j = point.n, point.jet
    return -j.phi3 / j.phi1 - (n - 1) * j.phi2 / j.phi


def stable_R(point: RayPoint) -> float:
    """n - phi' evaluated without subtractive cancellation (for decay rates)."""
    return scalar_gap(point.params, point.jet.phi)
