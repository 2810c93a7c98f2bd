# Compiled grouped non-overlapping conv kernels.
#
# Loop nests keep the (tap, in-channel) summation order identical to the
# numpy backend's per-(group, tap) GEMM accumulation: tap outer, channel
# inner, a single accumulator per output element.  No -ffast-math: the
# dense-equals-grouped bitwise guarantee relies on IEEE addition order.

import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def conv_forward(cnp.ndarray x_arr, cnp.ndarray w_arr):
    cdef double[:, :, :, :, ::1] x = np.ascontiguousarray(x_arr)
    cdef double[:, :, :, ::1] w = np.ascontiguousarray(w_arr)
    cdef Py_ssize_t B = x.shape[0], S = x.shape[1], T = x.shape[2]
    cdef Py_ssize_t G = x.shape[3], ci = x.shape[4], co = w.shape[3]
    out_arr = np.zeros((B, S, G, co))
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, s, t, g, i, o
    cdef double xv
    for b in range(B):
        for s in range(S):
            for g in range(G):
                for t in range(T):
                    for i in range(ci):
                        xv = x[b, s, t, g, i]
                        for o in range(co):
                            out[b, s, g, o] += xv * w[g, t, i, o]
    return out_arr


def conv_backward_input(cnp.ndarray grad_arr, cnp.ndarray w_arr, x_shape):
    cdef double[:, :, :, ::1] grad = np.ascontiguousarray(grad_arr)
    cdef double[:, :, :, ::1] w = np.ascontiguousarray(w_arr)
    cdef Py_ssize_t B = x_shape[0], S = x_shape[1], T = x_shape[2]
    cdef Py_ssize_t G = x_shape[3], ci = x_shape[4], co = w.shape[3]
    dx_arr = np.zeros((B, S, T, G, ci))
    cdef double[:, :, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t b, s, t, g, i, o
    cdef double gv
    for b in range(B):
        for s in range(S):
            for g in range(G):
                for o in range(co):
                    gv = grad[b, s, g, o]
                    for t in range(T):
                        for i in range(ci):
                            dx[b, s, t, g, i] += gv * w[g, t, i, o]
    return dx_arr


def conv_backward_weights(cnp.ndarray x_arr, cnp.ndarray grad_arr):
    cdef double[:, :, :, :, ::1] x = np.ascontiguousarray(x_arr)
    cdef double[:, :, :, ::1] grad = np.ascontiguousarray(grad_arr)
    cdef Py_ssize_t B = x.shape[0], S = x.shape[1], T = x.shape[2]
    cdef Py_ssize_t G = x.shape[3], ci = x.shape[4], co = grad.shape[3]
    dw_arr = np.zeros((G, T, ci, co))
    cdef double[:, :, :, ::1] dw = dw_arr
    cdef Py_ssize_t b, s, t, g, i, o
    cdef double xv
    for b in range(B):
        for s in range(S):
            for g in range(G):
                for t in range(T):
                    for i in range(ci):
                        xv = x[b, s, t, g, i]
                        for o in range(co):
                            dw[g, t, i, o] += xv * grad[b, s, g, o]
    return dw_arr
