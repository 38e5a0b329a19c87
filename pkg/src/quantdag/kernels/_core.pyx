# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels; see _fallback.py for the reference semantics."""

from libc.math cimport fabs


def checkloss_sum(double[::1] u, double tau):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double s = 0.0, x
    for i in range(n):
        x = u[i]
        if x >= 0.0:
            s += tau * x
        else:
            s += (tau - 1.0) * x
    return s


def apply_threshold(double[::1] theta, double t, double[::1] beta_out):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef Py_ssize_t nnz = 0
    cdef double th
    for i in range(n):
        th = theta[i]
        if fabs(th) > t:
            beta_out[i] = th
            if th != 0.0:
                nnz += 1
        else:
            beta_out[i] = 0.0
    return nnz


def axpy(double[::1] base, double[::1] v, double s, double[::1] out):
    cdef Py_ssize_t i, n = base.shape[0]
    for i in range(n):
        out[i] = base[i] + s * v[i]


def propose_eval(double[::1] theta_new, double t, double[::1] w,
                 double[::1] resid, double[::1] beta_old, double tau,
                 double[::1] beta_out, double[::1] resid_out):
    cdef Py_ssize_t i, n = theta_new.shape[0]
    cdef Py_ssize_t nnz = 0
    cdef double th, b, r, s = 0.0
    for i in range(n):
        th = theta_new[i]
        if fabs(th) > t:
            b = th
            if b != 0.0:
                nnz += 1
        else:
            b = 0.0
        beta_out[i] = b
        r = resid[i] - (b - beta_old[i]) * w[i]
        resid_out[i] = r
        if r >= 0.0:
            s += tau * r
        else:
            s += (tau - 1.0) * r
    return s, nnz
