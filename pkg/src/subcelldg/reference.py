"""1D reference solutions for the Euler benchmarks.

``riemann_exact`` is the classical exact solver for a planar ideal-gas
Riemann problem.  ``radial_euler`` integrates the Euler equations in
planar (alpha=0), cylindrical (alpha=1) or spherical (alpha=2) symmetry with
a fine second-order finite-volume scheme; it is used as the reference for the
cylindrical shock tube, which has no closed-form solution.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq


def _pressure_function(p, rho, pk, gamma):
    c = np.sqrt(gamma * pk / rho)
    if p > pk:
        a = 2.0 / ((gamma + 1.0) * rho)
        b = (gamma - 1.0) / (gamma + 1.0) * pk
        return (p - pk) * np.sqrt(a / (p + b))
    return 2.0 * c / (gamma - 1.0) * ((p / pk) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)


def riemann_exact(left, right, xi, gamma: float = 1.4):
    """Self-similar solution (rho, u, p) at xi = (x - x0)/t.

    ``left`` and ``right`` are primitive triples (rho, u, p).
    """
    rl, ul, pl = left
    rr, ur, pr = right
    cl, cr = np.sqrt(gamma * pl / rl), np.sqrt(gamma * pr / rr)
    if 2.0 * (cl + cr) / (gamma - 1.0) <= ur - ul:
        raise ValueError("initial data generate vacuum")

    def f(p):
        return _pressure_function(p, rl, pl, gamma) + _pressure_function(p, rr, pr, gamma) + ur - ul

    hi = max(pl, pr)
    while f(hi) < 0:
        hi *= 2.0
    ps = brentq(f, 1e-14 * hi, hi, xtol=1e-15, rtol=1e-14)
    us = 0.5 * (ul + ur) + 0.5 * (_pressure_function(ps, rr, pr, gamma) - _pressure_function(ps, rl, pl, gamma))

    xi = np.asarray(xi, dtype=float)
    rho, u, p = np.empty_like(xi), np.empty_like(xi), np.empty_like(xi)
    g1 = (gamma - 1.0) / (gamma + 1.0)
    for side, (rk, uk, pk, ck), sgn in (("L", (rl, ul, pl, cl), -1.0), ("R", (rr, ur, pr, cr), 1.0)):
        mask = xi <= us if side == "L" else xi > us
        s = xi[mask]
        if ps > pk:  # shock
            rstar = rk * (ps / pk + g1) / (g1 * ps / pk + 1.0)
            speed = uk + sgn * ck * np.sqrt((gamma + 1.0) / (2.0 * gamma) * ps / pk + (gamma - 1.0) / (2.0 * gamma))
            outside = sgn * (s - speed) > 0
            rho[mask] = np.where(outside, rk, rstar)
            u[mask] = np.where(outside, uk, us)
            p[mask] = np.where(outside, pk, ps)
        else:  # rarefaction
            rstar = rk * (ps / pk) ** (1.0 / gamma)
            cstar = ck * (ps / pk) ** ((gamma - 1.0) / (2.0 * gamma))
            head, tail = uk + sgn * ck, us + sgn * cstar
            outside = sgn * (s - head) > 0
            inside_star = sgn * (s - tail) < 0
            fan_u = 2.0 / (gamma + 1.0) * (-sgn * ck + (gamma - 1.0) / 2.0 * uk + s)
            fan_c = -sgn * (fan_u - s)
            fan_c = np.maximum(fan_c, 0.0)
            fan_rho = rk * (fan_c / ck) ** (2.0 / (gamma - 1.0))
            fan_p = pk * (fan_c / ck) ** (2.0 * gamma / (gamma - 1.0))
            rho[mask] = np.where(outside, rk, np.where(inside_star, rstar, fan_rho))
            u[mask] = np.where(outside, uk, np.where(inside_star, us, fan_u))
            p[mask] = np.where(outside, pk, np.where(inside_star, ps, fan_p))
    return rho, u, p


def _hll(ql, qr, gamma):
    def parts(q):
        rho, m, e = q
        u = m / rho
        p = (gamma - 1.0) * (e - 0.5 * rho * u * u)
        c = np.sqrt(gamma * p / rho)
        return np.stack([m, m * u + p, (e + p) * u]), u, c

    fl, ul, cl = parts(ql)
    fr, ur, cr = parts(qr)
    sl = np.minimum(ul - cl, ur - cr)
    sr = np.maximum(ul + cl, ur + cr)
    fhll = (sr * fl - sl * fr + sl * sr * (qr - ql)) / (sr - sl)
    return np.where(sl >= 0, fl, np.where(sr <= 0, fr, fhll))


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def radial_euler(
    left,
    right,
    r_interface: float,
    t_end: float,
    r_max: float = 1.0,
    n: int = 4000,
    alpha: int = 1,
    gamma: float = 1.4,
    cfl: float = 0.4,
):
    """Second-order finite-volume solution of a symmetric shock tube.

    Returns cell centres and primitive arrays (rho, u, p).  The axis r = 0 is
    a reflecting wall and r = r_max is a zero-gradient outflow.
    """
    edges = np.linspace(0.0, r_max, n + 1)
    r = 0.5 * (edges[1:] + edges[:-1])
    dr = r_max / n
    area = edges ** alpha
    vol = (edges[1:] ** (alpha + 1) - edges[:-1] ** (alpha + 1)) / (alpha + 1)

    rho = np.where(r < r_interface, left[0], right[0])
    u = np.where(r < r_interface, left[1], right[1])
    p = np.where(r < r_interface, left[2], right[2])
    q = np.stack([rho, rho * u, p / (gamma - 1.0) + 0.5 * rho * u * u])

    def rhs(q):
        rho, m, e = q
        u = m / rho
        p = (gamma - 1.0) * (e - 0.5 * rho * u * u)
        w = np.stack([rho, u, p])
        # ghosts: reflecting at the axis, copy at the outer edge
        wg = np.concatenate([w[:, 1::-1] * np.array([1, -1, 1])[:, None], w, w[:, -1:], w[:, -1:]], axis=1)
        slope = _minmod(wg[:, 1:-1] - wg[:, :-2], wg[:, 2:] - wg[:, 1:-1])
        wl = wg[:, 1:-2] + 0.5 * slope[:, :-1]
        wr = wg[:, 2:-1] - 0.5 * slope[:, 1:]

        def cons(w):
            return np.stack([w[0], w[0] * w[1], w[2] / (gamma - 1.0) + 0.5 * w[0] * w[1] ** 2])

        flux = _hll(cons(wl), cons(wr), gamma)
        out = -(area[1:] * flux[:, 1:] - area[:-1] * flux[:, :-1]) / vol
        # pressure source from the geometric divergence
        out[1] += p * (area[1:] - area[:-1]) / vol
        return out, u, p

    t = 0.0
    while t < t_end:
        _, u, p = rhs(q)
        c = np.sqrt(gamma * p / q[0])
        dt = min(cfl * dr / np.max(np.abs(u) + c), t_end - t)
        k1, _, _ = rhs(q)
        q1 = q + dt * k1
        k2, _, _ = rhs(q1)
        q = 0.5 * (q + q1 + dt * k2)
        t += dt
    rho, m, e = q
    u = m / rho
    return r, rho, u, (gamma - 1.0) * (e - 0.5 * rho * u * u)
