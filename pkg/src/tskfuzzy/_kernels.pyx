# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled TSK forward/backward kernels.

Same contract as ``tskfuzzy._kernels_py``; samples are reduced in index order
so results do not depend on scheduling.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, INFINITY

cnp.import_array()


cdef void _sample_weights(const double[:] a, const double[:, :] centers,
                          const double[:, :] inv_var, const unsigned char[:] mask_row,
                          bint masked, double[:] phi) noexcept nogil:
    cdef Py_ssize_t R = centers.shape[0], Ma = centers.shape[1]
    cdef Py_ssize_t r, m
    cdef double s, d, top = -INFINITY, total = 0.0
    for r in range(R):
        if masked and not mask_row[r]:
            phi[r] = -INFINITY
            continue
        s = 0.0
        for m in range(Ma):
            d = a[m] - centers[r, m]
            s += d * d * inv_var[r, m]
        phi[r] = -0.5 * s
        if phi[r] > top:
            top = phi[r]
    for r in range(R):
        if phi[r] == -INFINITY:
            phi[r] = 0.0
        else:
            phi[r] = exp(phi[r] - top)
            total += phi[r]
    for r in range(R):
        phi[r] /= total


cdef double _rule_outputs(const double[:] z, const double[:, :] weights,
                          const double[:] phi, double[:] out) noexcept nogil:
    cdef Py_ssize_t R = weights.shape[0], Mc = weights.shape[1] - 1
    cdef Py_ssize_t r, m
    cdef double s, pred = 0.0
    for r in range(R):
        s = weights[r, 0]
        for m in range(Mc):
            s += weights[r, m + 1] * z[m]
        out[r] = s
        pred += phi[r] * s
    return pred


def _mask_view(mask, Py_ssize_t N, Py_ssize_t R):
    if mask is None:
        return np.ones((1, R), dtype=np.uint8), False
    return np.ascontiguousarray(mask, dtype=np.uint8).reshape(N, R), True


def _inv_var(sigmas):
    s = np.asarray(sigmas, dtype=np.float64)
    return np.ascontiguousarray(1.0 / (s * s))


def forward(A, Z, centers, sigmas, weights, mask=None):
    cdef const double[:, :] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[:, :] z = np.ascontiguousarray(Z, dtype=np.float64)
    cdef const double[:, :] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[:, :] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, :] iv = _inv_var(sigmas)
    cdef Py_ssize_t N = a.shape[0], R = c.shape[0], n
    mask_arr, masked_flag = _mask_view(mask, N, R)
    cdef const unsigned char[:, :] mk = mask_arr
    cdef bint masked = masked_flag
    cdef double[:] phi = np.empty(R)
    cdef double[:] rule_out = np.empty(R)
    pred_arr = np.empty(N)
    cdef double[:] pred = pred_arr
    with nogil:
        for n in range(N):
            _sample_weights(a[n], c, iv, mk[n if masked else 0], masked, phi)
            pred[n] = _rule_outputs(z[n], w, phi, rule_out)
    return pred_arr


def value_and_grad(A, Z, y, centers, sigmas, weights, mask=None, input_grads=False):
    cdef const double[:, :] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[:, :] z = np.ascontiguousarray(Z, dtype=np.float64)
    cdef const double[:] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[:, :] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[:, :] s = np.ascontiguousarray(sigmas, dtype=np.float64)
    cdef const double[:, :] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, :] iv = _inv_var(sigmas)
    cdef Py_ssize_t N = a.shape[0], R = c.shape[0], Ma = c.shape[1], Mc = w.shape[1] - 1
    cdef Py_ssize_t n, r, m
    cdef bint want_inputs = input_grads
    mask_arr, masked_flag = _mask_view(mask, N, R)
    cdef const unsigned char[:, :] mk = mask_arr
    cdef bint masked = masked_flag

    pred_arr = np.empty(N)
    gc_arr = np.zeros((R, Ma))
    gs_arr = np.zeros((R, Ma))
    gw_arr = np.zeros((R, Mc + 1))
    ga_arr = np.zeros((N, Ma)) if want_inputs else np.zeros((1, Ma))
    gz_arr = np.zeros((N, Mc)) if want_inputs else np.zeros((1, Mc))
    cdef double[:] pred = pred_arr
    cdef double[:, :] gc = gc_arr
    cdef double[:, :] gs = gs_arr
    cdef double[:, :] gw = gw_arr
    cdef double[:, :] ga = ga_arr
    cdef double[:, :] gz = gz_arr
    cdef double[:] phi = np.empty(R)
    cdef double[:] rule_out = np.empty(R)
    cdef double err, p, dlog, ephi, d, sc

    with nogil:
        for n in range(N):
            _sample_weights(a[n], c, iv, mk[n if masked else 0], masked, phi)
            p = _rule_outputs(z[n], w, phi, rule_out)
            pred[n] = p
            err = p - yv[n]
            for r in range(R):
                if phi[r] == 0.0:
                    continue
                ephi = err * phi[r]
                dlog = ephi * (rule_out[r] - p)
                gw[r, 0] += ephi
                for m in range(Mc):
                    gw[r, m + 1] += ephi * z[n, m]
                    if want_inputs:
                        gz[n, m] += ephi * w[r, m + 1]
                for m in range(Ma):
                    d = a[n, m] - c[r, m]
                    sc = d * iv[r, m]
                    gc[r, m] += dlog * sc
                    gs[r, m] += dlog * sc * d / s[r, m]
                    if want_inputs:
                        ga[n, m] -= dlog * sc

    if not want_inputs:
        return pred_arr, gc_arr, gs_arr, gw_arr, None, None
    return pred_arr, gc_arr, gs_arr, gw_arr, ga_arr, gz_arr
