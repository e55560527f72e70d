"""Potential derivative phi(s) = u'(s) for Cao's steady solitons on C^n.

With s = ln|z|^2 and the normalization alpha = beta = 1, phi solves

    phi^(n-1) phi' e^phi = e^(ns),

whose integral is  P_n(phi) e^phi = e^(ns) + (-1)^(n-1) n!  with

    P_n(phi) = sum_{k=0}^{n-1} (-1)^(n-k-1) n!/k! phi^k.

The left side minus the constant equals F(phi) = n * int_0^phi t^(n-1) e^t dt,
a positive increasing function of phi.  All evaluation goes through ln F,
which is free of the catastrophic cancellation the alternating sum suffers
for small phi and of overflow for large phi:

* phi <= _SERIES_MAX:  F = n phi^n sum_j phi^j / (j! (n + j))   (positive terms)
* phi >  _SERIES_MAX:  F = phi^(n-1) e^phi (Q(phi) - (-1)^(n-1) n! e^-phi phi^(1-n))
  with Q(phi) = P_n(phi) / phi^(n-1), evaluated by Horner in 1/phi.

At the root phi' = F(phi) / (phi^(n-1) e^phi), so the jet is a closed form
in phi alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConvergenceFailure

N_MAX = 12
_SERIES_MAX = 30.0
_MAX_ITER = 200


@dataclass(frozen=True)
class SolitonParams:
    """Constants fixing one member of the family.

    Only ``n`` is free; ``alpha = beta = 1`` after rescaling and ``lam`` is the
    soliton constant in f' = lam u'' (checked numerically downstream).
    """

    n: int
    alpha: float = 1.0
    beta: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise TypeError(f"n must be an integer, got {self.n!r}")
        if not 1 <= self.n <= N_MAX:
            raise ValueError(f"n must lie in [1, {N_MAX}], got {self.n}")
        if self.alpha != 1.0 or self.beta != 1.0:
            raise ValueError("only the normalization alpha = beta = 1 is supported")

    @property
    def A0(self) -> float:
        """Hamilton constant R + |grad f|^2, equal to R(o) = n."""
        return float(self.n)


@dataclass(frozen=True)
class PhiJet:
    s: float
    phi: float
    phi1: float
    phi2: float
    phi3: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.s, self.phi, self.phi1, self.phi2, self.phi3)


@dataclass(frozen=True)
class PhiGrid:
    params: SolitonParams
    nodes: tuple[float, ...]
    jets: tuple[PhiJet, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.nodes)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(j, name) for j in self.jets])


def _coefficients(n: int) -> list[float]:
    # c_k = (-1)^(n-k-1) n!/k!, built from c_{n-1} = n via c_{k-1} = -k c_k
    c = [0.0] * n
    c[n - 1] = float(n)
    for k in range(n - 1, 0, -1):
        c[k - 1] = -k * c[k]
    return c


def poly_P(params: SolitonParams, phi: float) -> float:
    """Polynomial factor P_n(phi) of the implicit solution (Horner scheme)."""
    n = params.n
    c = _coefficients(n)
    acc = c[n - 1]
    for k in range(n - 2, -1, -1):
        acc = acc * phi + c[k]
    return acc


def _q_ratio(n: int, phi: float) -> float:
    """P_n(phi) / phi^(n-1), Horner in 1/phi."""
    c = _coefficients(n)
    w = 1.0 / phi
    acc = c[0]
    for k in range(1, n):
        acc = acc * w + c[k]
    return acc


def _series(n: int, phi: float, shifts: tuple[int, ...] = (0,)) -> float:
    """sum_j phi^j / (j! prod_d (n + j + d)); all terms positive."""

    def weight(j):
        w = 1.0
        for d in shifts:
            w *= n + j + d
        return w

    tol = 1e-21 if isinstance(phi, np.longdouble) else 1e-17
    term = phi * 0 + 1  # keeps the input precision
    total = term / weight(0)
    j = 0
    while True:
        j += 1
        term *= phi / j
        add = term / weight(j)
        total += add
        if add <= tol * total and j > phi:
            return total


def _exp(x):
    return np.exp(x) if isinstance(x, np.longdouble) else math.exp(x)


def _log(x):
    return np.log(x) if isinstance(x, np.longdouble) else math.log(x)


def _sign_const(n: int) -> float:
    # (-1)^(n-1) n!
    return (-1.0) ** (n - 1) * math.factorial(n)


def _log_F(n: int, x: float) -> float:
    """ln F(phi) with phi = e^x."""
    phi = math.exp(x)
    if phi <= _SERIES_MAX:
        return math.log(n) + n * x + math.log(_series(n, phi))
    return _log_F_large(n, phi, x)


def _log_F_large(n: int, phi: float, x: float) -> float:
    tail = _sign_const(n) * math.exp(-phi - (n - 1) * x)
    return phi + (n - 1) * x + math.log(_q_ratio(n, phi) - tail)


def _phi1_from_phi(n: int, phi: float) -> float:
    """phi' at the root, as a function of phi alone."""
    if phi <= _SERIES_MAX:
        return n * phi * _series(n, phi) * _exp(-phi)
    return _q_ratio(n, phi) - _sign_const(n) * _exp(-phi - (n - 1) * _log(phi))


def _gap_from_phi(n: int, phi: float) -> float:
    """n - phi' without the cancellation of the naive difference at large phi."""
    if n == 1:
        return _exp(-phi)
    if phi <= _SERIES_MAX:
        return n - _phi1_from_phi(n, phi)
    c = _coefficients(n)
    w = 1.0 / phi
    # -sum_{k=0}^{n-2} c_k phi^(k-n+1)
    acc = c[0]
    for k in range(1, n - 1):
        acc = acc * w + c[k]
    acc *= w
    return -acc + _sign_const(n) * _exp(-phi - (n - 1) * _log(phi))


def implicit_residual(params: SolitonParams, s: float, phi: float) -> float:
    """Scaled residual of P_n(phi) e^phi = e^(ns) + (-1)^(n-1) n!.

    Linear form: (P_n e^phi - e^(ns) - (-1)^(n-1) n!) / max(e^(ns), n!, |P_n e^phi|).
    For ns > 500 the log form ln F(phi) - ns is returned instead.
    """
    if phi <= 0:
        raise ValueError("phi must be positive")
    n = params.n
    g = _log_F(n, math.log(phi)) - n * s
    if n * s > 500:
        return g
    rhs = math.exp(n * s)
    # numerator F(phi) - e^(ns) written as e^(ns) expm1(g)
    num = rhs * math.expm1(g)
    lhs = abs(num + rhs + _sign_const(n))
    return num / max(rhs, float(math.factorial(n)), lhs)


def solve_phi(params: SolitonParams, s: float) -> float:
    """Unique positive root phi(s) of the implicit equation.

    Safeguarded Newton on x = ln phi with a maintained sign bracket; any step
    leaving the bracket is replaced by bisection.
    """
    n = params.n
    phi = math.exp(_solve_log_phi(n, float(s)))
    if phi <= _SERIES_MAX:
        return phi
    # x = ln phi only resolves phi to ~eps ln(phi) relative; polish in phi itself
    target = n * float(s)
    for _ in range(3):
        g = _log_F_large(n, phi, math.log(phi)) - target
        if g == 0.0:
            break
        phi -= g * _phi1_from_phi(n, phi) / n
    return phi


def _solve_log_phi(n: int, s: float) -> float:
    if not math.isfinite(s):
        raise ValueError(f"s must be finite, got {s}")
    target = n * s

    def G(x):
        return _log_F(n, x) - target

    if s <= 0.0:
        x = s
    else:
        guess = n * s - (n - 1) * math.log(max(n * s, 1.0)) - math.log(n)
        x = math.log(max(guess, 1.0))

    lo, hi = x - 1.0, x + 1.0
    step = 1.0
    while G(lo) > 0:
        step *= 2.0
        lo = x - step
    step = 1.0
    while G(hi) < 0:
        step *= 2.0
        hi = x + step

    tol_g = 4e-16 * max(1.0, abs(target))
    for _ in range(_MAX_ITER):
        g = G(x)
        if abs(g) <= tol_g:
            return x
        if g < 0:
            lo = x
        else:
            hi = x
        phi = math.exp(x)
        slope = n * phi / _phi1_from_phi(n, phi)
        x_new = x - g / slope
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 2e-16 * max(1.0, abs(x)):
            return x_new
        x = x_new
    raise ConvergenceFailure(f"solve_phi did not converge for n={n}, s={s}")


def phi_derivatives(params: SolitonParams, s: float, phi: float) -> PhiJet:
    """Closed-form jet (phi, phi', phi'', phi''') at a root of the implicit equation.

    phi'' = phi' q with q = n - (n-1) phi'/phi - phi', and
    phi''' = phi'' q + phi' q' with q' = -(n-1)(phi''/phi - (phi'/phi)^2) - phi''.
    The bracket equals -phi' times the fiber shear below; that form is used to
    avoid cancellation near the origin.
    """
    p1, p2, p3 = _jet_values(params.n, phi)
    return PhiJet(float(s), phi, p1, p2, p3)


def _jet_values(n: int, phi):
    p1 = _phi1_from_phi(n, phi)
    q = _gap_from_phi(n, phi) - (n - 1) * p1 / phi
    p2 = p1 * q
    dq = (n - 1) * _fiber_shear(n, phi) * p1 - p2
    p3 = p2 * q + p1 * dq
    return p1, p2, p3


def extended_jet(params: SolitonParams, phi: float) -> tuple[np.longdouble, ...]:
    """Jet (phi, phi', phi'', phi''') from the same closed forms in long double.

    Used where a formula in the jet is ill-conditioned in double precision
    (the expanded scalar curvature near the origin).
    """
    x = np.longdouble(phi)
    return (x, *_jet_values(params.n, x))


def _fiber_shear(n: int, phi: float) -> float:
    """-d/dphi (phi'/phi), equal to -(phi'/phi)'(s) / phi'(s)."""
    if phi <= _SERIES_MAX:
        return n * _exp(-phi) * _series(n, phi, (0, 1))
    # phi'/phi = sum_k c_k phi^(k-n) - C e^-phi phi^-n, C = (-1)^(n-1) n!
    c = _coefficients(n)
    acc = 0.0
    for k in range(n):
        acc += c[k] * (k - n) * phi ** (k - n - 1)
    acc += _sign_const(n) * _exp(-phi - n * _log(phi)) * (1.0 + n / phi)
    return -acc


def _radial_curvature(n: int, phi: float) -> float:
    """-d^2 phi' / dphi^2."""
    if phi <= _SERIES_MAX:
        if n == 1:
            return _exp(-phi)
        return 2.0 * n * (n - 1) * _exp(-phi) * _series(n, phi, (-1, 0, 1))
    c = _coefficients(n)
    m = n - 1
    acc = 0.0
    for k in range(n - 1):
        acc += c[k] * (k - m) * (k - n) * phi ** (k - n - 1)
    y = _exp(-phi - m * _log(phi))
    acc -= _sign_const(n) * y * ((1.0 + m / phi) ** 2 + m / phi**2)
    return -acc


def _fiber_bisectional(n: int, phi: float) -> float:
    """(phi - phi') / phi^2."""
    if phi <= _SERIES_MAX:
        return _exp(-phi) * _series(n, phi, (1,))
    return (1.0 - _phi1_from_phi(n, phi) / phi) / phi


def curvature_coefficients(params: SolitonParams, phi: float) -> tuple[float, float, float, float]:
    """Unitary-frame curvature components (A, B, C, D) on the ray as functions of phi.

    A radial holomorphic sectional, B radial-fiber bisectional, C fiber
    holomorphic sectional, D fiber-fiber bisectional; C = 2 D.
    """
    n = params.n
    D = _fiber_bisectional(n, phi)
    return _radial_curvature(n, phi), _fiber_shear(n, phi), 2.0 * D, D


def jet_at(params: SolitonParams, s: float) -> PhiJet:
    """Solve for phi(s) and return its jet."""
    return phi_derivatives(params, s, solve_phi(params, s))


def scalar_gap(params: SolitonParams, phi: float) -> float:
    """n - phi'(s) evaluated from phi without subtractive cancellation."""
    return _gap_from_phi(params.n, phi)


def build_grid(params: SolitonParams, s_min: float, s_max: float, count: int) -> PhiGrid:
    if not s_min < s_max:
        raise ValueError("need s_min < s_max")
    if count < 2:
        raise ValueError("need count >= 2")
    nodes = np.linspace(s_min, s_max, count)
    nodes[0], nodes[-1] = s_min, s_max
    jets = tuple(jet_at(params, float(s)) for s in nodes)
    phis = [j.phi for j in jets]
    if any(b <= a for a, b in zip(phis, phis[1:])):
        raise ConvergenceFailure("phi is not strictly increasing across grid nodes")
    return PhiGrid(params, tuple(float(s) for s in nodes), jets)


def cigar_closed_form(s: float) -> PhiJet:
    """Exact jet of the n = 1 member, phi = ln(1 + e^s)."""
    s = float(s)
    phi = float(np.logaddexp(0.0, s))
    p1 = float(expit(s))
    p2 = float(expit(s) * expit(-s))
    p3 = p2 * -math.tanh(s / 2.0)
    return PhiJet(s, phi, p1, p2, p3)
