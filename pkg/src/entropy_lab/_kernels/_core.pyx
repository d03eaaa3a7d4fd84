# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels: same arithmetic as the numpy fallback."""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, sqrt

cnp.import_array()


cdef inline double _interp(double[::1] table, double x0, double inv_dl,
                           double u, Py_ssize_t n) nogil:
    cdef double p = (u - x0) * inv_dl
    cdef Py_ssize_t i = <Py_ssize_t>floor(p)
    if i < 0:
        i = 0
    elif i > n - 2:
        i = n - 2
    cdef double th = p - i
    cdef double lo = table[i]
    return lo + (table[i + 1] - lo) * th


def viscous_step(double[::1] w, double lam, double mu,
                 double[::1] tab_f, double[::1] tab_a,
                 double x0, double inv_dl):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t nt = tab_f.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double[::1] res = out
    cdef cnp.ndarray[double, ndim=1] fw_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] aw_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] flux_arr = np.empty(n)
    cdef double[::1] fw = fw_arr
    cdef double[::1] aw = aw_arr
    cdef double[::1] flux = flux_arr
    cdef Py_ssize_t i, ip, im
    cdef double a_face
    with nogil:
        for i in range(n):
            fw[i] = _interp(tab_f, x0, inv_dl, w[i], nt)
            aw[i] = _interp(tab_a, x0, inv_dl, w[i], nt)
        for i in range(n):
            ip = i + 1 if i + 1 < n else 0
            a_face = aw[i] if aw[i] > aw[ip] else aw[ip]
            flux[i] = 0.5 * (fw[i] + fw[ip]) - 0.5 * a_face * (w[ip] - w[i])
        for i in range(n):
            ip = i + 1 if i + 1 < n else 0
            im = i - 1 if i > 0 else n - 1
            res[i] = w[i] - lam * (flux[i] - flux[im]) \
                + mu * (w[ip] - 2.0 * w[i] + w[im])
    return out


def eo_step(double[::1] w, double lam,
            double[::1] tab_fp, double[::1] tab_fm,
            double x0, double inv_dl):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t nt = tab_fp.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double[::1] res = out
    cdef cnp.ndarray[double, ndim=1] fp_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] fm_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] flux_arr = np.empty(n)
    cdef double[::1] fp = fp_arr
    cdef double[::1] fm = fm_arr
    cdef double[::1] flux = flux_arr
    cdef Py_ssize_t i, ip, im
    with nogil:
        for i in range(n):
            fp[i] = _interp(tab_fp, x0, inv_dl, w[i], nt)
            fm[i] = _interp(tab_fm, x0, inv_dl, w[i], nt)
        for i in range(n):
            ip = i + 1 if i + 1 < n else 0
            flux[i] = fp[i] + fm[ip]
        for i in range(n):
            im = i - 1 if i > 0 else n - 1
            res[i] = w[i] - lam * (flux[i] - flux[im])
    return out


def euler_step(double[::1] rho, double[::1] m, double lam, double gamma):
    cdef Py_ssize_t n = rho.shape[0]
    cdef cnp.ndarray[double, ndim=1] rho_out = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] m_out = np.empty(n)
    cdef double[::1] rr = rho_out
    cdef double[::1] mr = m_out
    cdef cnp.ndarray[double, ndim=1] s_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] f2_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] g1_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] g2_arr = np.empty(n)
    cdef double[::1] s = s_arr
    cdef double[::1] f2 = f2_arr
    cdef double[::1] g1 = g1_arr
    cdef double[::1] g2 = g2_arr
    cdef Py_ssize_t i, ip, im
    cdef double u, a_face, pg1
    with nogil:
        for i in range(n):
            u = m[i] / rho[i]
            pg1 = rho[i] ** (gamma - 1.0)
            s[i] = fabs(u) + sqrt(gamma * pg1)
            f2[i] = m[i] * u + pg1 * rho[i]
        for i in range(n):
            ip = i + 1 if i + 1 < n else 0
            a_face = s[i] if s[i] > s[ip] else s[ip]
            g1[i] = 0.5 * (m[i] + m[ip]) - 0.5 * a_face * (rho[ip] - rho[i])
            g2[i] = 0.5 * (f2[i] + f2[ip]) - 0.5 * a_face * (m[ip] - m[i])
        for i in range(n):
            im = i - 1 if i > 0 else n - 1
            rr[i] = rho[i] - lam * (g1[i] - g1[im])
            mr[i] = m[i] - lam * (g2[i] - g2[im])
    return rho_out, m_out
