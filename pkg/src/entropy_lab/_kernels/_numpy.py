"""Pure-numpy implementations of the stencil inner loops.

These mirror the compiled kernels operation for operation so that both
backends produce the same floating-point results (the extension is built
with FP contraction disabled).
"""
import numpy as np


def _interp_uniform(table, x0, inv_dl, u):
    """Linear interpolation on a uniform table: table[i] at x0 + i/inv_dl."""
    p = (u - x0) * inv_dl
    i = np.floor(p).astype(np.int64)
    np.clip(i, 0, len(table) - 2, out=i)
    th = p - i
    lo = table[i]
    return lo + (table[i + 1] - lo) * th


def viscous_step(w, lam, mu, tab_f, tab_a, x0, inv_dl):
    """One explicit step of the regularized conservation law.

    Local Lax-Friedrichs flux from the tabulated (mollified) flux plus a
    centered second difference scaled by mu = dt/(n*dx^2).
    """
    fw = _interp_uniform(tab_f, x0, inv_dl, w)
    aw = _interp_uniform(tab_a, x0, inv_dl, w)
    wp = np.roll(w, -1)
    a_face = np.maximum(aw, np.roll(aw, -1))
    flux = 0.5 * (fw + np.roll(fw, -1)) - 0.5 * a_face * (wp - w)
    diff = wp - 2.0 * w + np.roll(w, 1)
    return w - lam * (flux - np.roll(flux, 1)) + mu * diff


def eo_step(w, lam, tab_fp, tab_fm, x0, inv_dl):
    """One step of the monotone Engquist-Osher scheme (split flux tables)."""
    fp = _interp_uniform(tab_fp, x0, inv_dl, w)
    fm = _interp_uniform(tab_fm, x0, inv_dl, w)
    flux = fp + np.roll(fm, -1)
    return w - lam * (flux - np.roll(flux, 1))


def euler_step(rho, m, lam, gamma):
    """One local Lax-Friedrichs (Rusanov) step for 1D isentropic flow."""
    u = m / rho
    pg1 = rho ** (gamma - 1.0)
    p = pg1 * rho
    c = np.sqrt(gamma * pg1)
    s = np.abs(u) + c
    a_face = np.maximum(s, np.roll(s, -1))
    f1 = m
    f2 = m * u + p
    g1 = 0.5 * (f1 + np.roll(f1, -1)) - 0.5 * a_face * (np.roll(rho, -1) - rho)
    g2 = 0.5 * (f2 + np.roll(f2, -1)) - 0.5 * a_face * (np.roll(m, -1) - m)
    rho_new = rho - lam * (g1 - np.roll(g1, 1))
    m_new = m - lam * (g2 - np.roll(g2, 1))
    return rho_new, m_new
