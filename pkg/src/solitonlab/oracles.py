"""Independent numerical oracles.

None of these use the closed-form jets or curvature formulas they are meant
to check: the metric is rebuilt from phi and the ODE value of phi' only, and
all derivatives are taken by finite differences.
"""

from __future__ import annotations

import math

import numpy as np

from .potential import SolitonParams, solve_phi


def bisect_phi(params: SolitonParams, s: float, lo: float, hi: float, steps: int = 60) -> float:
    """Plain bisection on the alternating-sum form P_n(phi) e^phi - e^(ns) - (-1)^(n-1) n!."""
    n = params.n

    def resid(phi):
        p = sum((-1) ** (n - k - 1) * math.factorial(n) / math.factorial(k) * phi**k for k in range(n))
        return p * math.exp(phi) - math.exp(n * s) - (-1) ** (n - 1) * math.factorial(n)

    f_lo = resid(lo)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        f_mid = resid(mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ode_phi1(params: SolitonParams, s: float, phi: float) -> float:
    """phi' straight from phi^(n-1) phi' e^phi = e^(ns)."""
    n = params.n
    return math.exp(n * s - (n - 1) * math.log(phi) - phi)


def explicit_metric(params: SolitonParams, z: np.ndarray) -> np.ndarray:
    """g_{i jbar}(z) = e^-s phi delta_ij + e^-2s zbar_i z_j (phi' - phi)."""
    z = np.asarray(z, dtype=complex)
    r2 = float(np.sum(np.abs(z) ** 2))
    s = math.log(r2)
    phi = solve_phi(params, s)
    phi1 = ode_phi1(params, s, phi)
    n = params.n
    return np.eye(n) * (phi / r2) + np.outer(z.conj(), z) * ((phi1 - phi) / r2**2)


def _real_derivatives(fun, v0: np.ndarray, h: float):
    """Central first derivatives and Hessian of a matrix-valued function of real coordinates."""
    m = v0.size
    f0 = fun(v0)
    grad = np.empty((m,) + f0.shape, dtype=f0.dtype)
    hess = np.empty((m, m) + f0.shape, dtype=f0.dtype)
    e = np.eye(m) * h
    for a in range(m):
        fp, fm = fun(v0 + e[a]), fun(v0 - e[a])
        grad[a] = (fp - fm) / (2 * h)
        hess[a, a] = (fp - 2 * f0 + fm) / h**2
        for b in range(a + 1, m):
            hab = (
                fun(v0 + e[a] + e[b]) - fun(v0 + e[a] - e[b])
                - fun(v0 - e[a] + e[b]) + fun(v0 - e[a] - e[b])
            ) / (4 * h * h)
            hess[a, b] = hess[b, a] = hab
    return f0, grad, hess


def fd_curvature_tensor(params: SolitonParams, s: float, rel_step: float = 2e-3) -> np.ndarray:
    """R_{i jbar k lbar} at (e^(s/2), 0, ..., 0) in the unitary frame, by finite differences.

    Uses R_{i jbar k lbar} = -d_k d_lbar g_{i jbar} + g^{p qbar} d_k g_{i qbar} d_lbar g_{p jbar}
    with one Richardson step on the difference quotients.
    """
    n = params.n
    x1 = math.exp(s / 2)
    v0 = np.zeros(2 * n)
    v0[0] = x1

    def fun(v):
        return explicit_metric(params, v[:n] + 1j * v[n:])

    h = rel_step * max(1.0, x1)
    g0, g1, H1 = _real_derivatives(fun, v0, h)
    _, g2, H2 = _real_derivatives(fun, v0, h / 2)
    grad = g2 + (g2 - g1) / 3
    hess = H2 + (H2 - H1) / 3

    dx, dy = grad[:n], grad[n:]
    d_hol = 0.5 * (dx - 1j * dy)       # d_k g
    d_anti = 0.5 * (dx + 1j * dy)      # d_lbar g
    hxx, hyy = hess[:n, :n], hess[n:, n:]
    hxy, hyx = hess[:n, n:], hess[n:, :n]
    dd = 0.25 * (hxx + hyy + 1j * (hxy - hyx))  # dd[k, l] = d_k d_lbar g

    ginv = np.linalg.inv(g0).T  # ginv[p, q] = g^{p qbar}
    R = np.empty((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    quad = np.einsum("pq,q,p->", ginv, d_hol[k][i, :], d_anti[l][:, j])
                    R[i, j, k, l] = -dd[k, l][i, j] + quad
    scale = np.sqrt(np.real(np.diag(g0)))
    return R / np.einsum("i,j,k,l->ijkl", scale, scale, scale, scale)


def cigar_gauss_curvature_fd(s: float, h: float = 1e-3) -> float:
    """Gauss curvature of |dz|^2 / (1 + |z|^2) at |z|^2 = e^s via K = -e^(-2w) Lap w."""
    x0 = math.exp(s / 2)

    def w(x, y):
        return -0.5 * math.log1p(x * x + y * y)

    lap = (w(x0 + h, 0) + w(x0 - h, 0) + w(x0, h) + w(x0, -h) - 4 * w(x0, 0)) / (h * h)
    return -math.exp(-2 * w(x0, 0)) * lap


def fd_jet(params: SolitonParams, s: float, h: float = 1e-4) -> tuple[float, float, float]:
    """Central differences of phi, phi', phi'' built from the solver and the ODE only."""
    from .potential import jet_at

    jp, jm = jet_at(params, s + h), jet_at(params, s - h)
    return (
        (jp.phi - jm.phi) / (2 * h),
        (jp.phi1 - jm.phi1) / (2 * h),
        (jp.phi2 - jm.phi2) / (2 * h),
    )
