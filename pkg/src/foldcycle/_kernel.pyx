# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel: DOPRI5 on the prototypical field up to the exit section.

Same algorithm and return contract as ``_kernel_py.proto_integrate``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, floor, pow, sqrt, log, fabs, INFINITY

cnp.import_array()

BACKEND = "cython"

cdef enum:
    MAXK = 64
    MAXF = 64
    MAXN = 6

cdef double TWO_PI = 6.283185307179586

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784, A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40
cdef double D1 = -12715105075.0 / 11282082432
cdef double D3 = 87487479700.0 / 32700410799
cdef double D4 = -10690763975.0 / 1880347072
cdef double D5 = 701980252875.0 / 199316789632
cdef double D6 = -1453857185.0 / 822651844
cdef double D7 = 69997945.0 / 29380423

cdef double SAFETY = 0.9, FAC_MIN = 0.2, FAC_MAX = 5.0, BETA = 0.04

EXITED, MAX_STEPS, UNDERFLOW, TIME_LIMIT = 0, 1, 2, 3


cdef struct Params:
    int nf
    int K
    int nm
    double* means
    double* cos_c
    double* sin_c
    cnp.int32_t* mrow
    double* mp
    double* mq
    double* mfac
    cnp.int32_t* mtgt
    double eps1
    double eps2
    int with_var


cdef void field(const double* z, double* out, Params* P) noexcept nogil:
    cdef double r = z[0], th = z[1], y = z[2]
    cdef double u = th - floor(th)
    cdef double c1 = cos(TWO_PI * u), s1 = sin(TWO_PI * u)
    cdef double cs[MAXK]
    cdef double sn[MAXK]
    cdef double fv[MAXF]
    cdef double dv[MAXF]
    cdef int K = P.K, i, k, row
    cdef double v, d, p, q, fac, rp, yq, term, val
    cdef double d_r = 0.0, d_y = 0.0, d_t = 0.0
    if K > 0:
        cs[0] = c1
        sn[0] = s1
        for k in range(1, K):
            cs[k] = cs[k - 1] * c1 - sn[k - 1] * s1
            sn[k] = sn[k - 1] * c1 + cs[k - 1] * s1
    for i in range(P.nf):
        v = P.means[i]
        d = 0.0
        for k in range(K):
            v += P.cos_c[i * K + k] * cs[k] + P.sin_c[i * K + k] * sn[k]
            if P.with_var:
                d += TWO_PI * (k + 1) * (P.sin_c[i * K + k] * cs[k] - P.cos_c[i * K + k] * sn[k])
        fv[i] = v
        dv[i] = d
    cdef double dr = -fv[0] * y + fv[1] * r * r
    cdef double gy = -fv[2]
    cdef double jrr = 2.0 * fv[1] * r
    cdef double jrt = -dv[0] * y + dv[1] * r * r
    cdef double jry = -fv[0]
    cdef double jyr = 0.0, jyt = -dv[2], jyy = 0.0
    for i in range(P.nm):
        row = P.mrow[i]
        p = P.mp[i]
        q = P.mq[i]
        fac = P.mfac[i]
        rp = pow(r, p)
        yq = pow(y, q)
        term = fv[row] * fac
        val = term * rp * yq
        if P.with_var:
            d_r = term * p * pow(r, p - 1.0) * yq if p > 0 else 0.0
            d_y = term * q * rp * pow(y, q - 1.0) if q > 0 else 0.0
            d_t = dv[row] * fac * rp * yq
        if P.mtgt[i] == 0:
            dr += val
            if P.with_var:
                jrr += d_r
                jrt += d_t
                jry += d_y
        else:
            gy += val
            if P.with_var:
                jyr += d_r
                jyt += d_t
                jyy += d_y
    out[0] = dr
    out[1] = P.eps1
    out[2] = P.eps2 * gy
    if P.with_var:
        out[3] = jrr * z[3] + jrt * z[4] + jry * z[5]
        out[4] = 0.0
        out[5] = P.eps2 * (jyr * z[3] + jyt * z[4] + jyy * z[5])


cdef double initial_step(double* z, double* k1, int n, double rtol, double atol,
                         double h_max, Params* P) noexcept nogil:
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc, h0, h1
    cdef double z1[MAXN]
    cdef double f1[MAXN]
    cdef int i
    for i in range(n):
        sc = atol + rtol * fabs(z[i])
        d0 = max(d0, fabs(z[i]) / sc)
        d1 = max(d1, fabs(k1[i]) / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    for i in range(n):
        z1[i] = z[i] + h0 * k1[i]
    field(z1, f1, P)
    for i in range(n):
        d2 = max(d2, fabs(f1[i] - k1[i]) / (atol + rtol * fabs(z[i])))
    d2 /= h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / max(d1, d2), 0.2)
    return min(min(100 * h0, h1), h_max)


def proto_integrate(means, cos_c, sin_c, mono_row, mono_p, mono_q, mono_fac, mono_tgt,
                    double eps1, double eps2, x0, v0, double r_exit, double theta_ref,
                    double rtol, double atol, double h_init, double h_min, double h_max,
                    long max_steps, double t_max):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_means = np.ascontiguousarray(means, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_cos = np.ascontiguousarray(cos_c, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_sin = np.ascontiguousarray(sin_c, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] a_row = np.ascontiguousarray(mono_row, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_p = np.ascontiguousarray(mono_p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_q = np.ascontiguousarray(mono_q, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_fac = np.ascontiguousarray(mono_fac, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] a_tgt = np.ascontiguousarray(mono_tgt, dtype=np.int32)
    # dummies keep the data pointers valid for empty monomial tables
    if a_row.shape[0] == 0:
        a_row = np.zeros(1, dtype=np.int32)
        a_p = np.zeros(1)
        a_q = np.zeros(1)
        a_fac = np.zeros(1)
        a_tgt = np.zeros(1, dtype=np.int32)
    if a_cos.shape[1] == 0:
        a_cos = np.zeros((a_means.shape[0], 1))
        a_sin = np.zeros((a_means.shape[0], 1))
    cdef Params P
    P.nf = a_means.shape[0]
    P.K = a_cos.shape[1]
    P.nm = len(mono_row)
    if P.K > MAXK or P.nf > MAXF:
        raise ValueError("too many harmonics or coefficient functions for the compiled kernel")
    P.means = &a_means[0]
    P.cos_c = &a_cos[0, 0]
    P.sin_c = &a_sin[0, 0]
    P.mrow = &a_row[0]
    P.mp = &a_p[0]
    P.mq = &a_q[0]
    P.mfac = &a_fac[0]
    P.mtgt = &a_tgt[0]
    P.eps1 = eps1
    P.eps2 = eps2
    P.with_var = 0 if v0 is None else 1

    cdef int n = 6 if P.with_var else 3
    cdef double z[MAXN]
    cdef double zn[MAXN]
    cdef double tmp[MAXN]
    cdef double k1[MAXN]
    cdef double k2[MAXN]
    cdef double k3[MAXN]
    cdef double k4[MAXN]
    cdef double k5[MAXN]
    cdef double k6[MAXN]
    cdef double k7[MAXN]
    cdef double logmag = 0.0, nv, nw
    cdef int i
    z[0] = x0[0]
    z[1] = x0[1]
    z[2] = x0[2]
    if P.with_var:
        nv = sqrt(v0[0] * v0[0] + v0[1] * v0[1] + v0[2] * v0[2])
        logmag = log(nv)
        z[3] = v0[0] / nv
        z[4] = v0[1] / nv
        z[5] = v0[2] / nv
    if eps1 > 0:
        h_max = min(h_max, 0.25 / eps1)

    cdef double t = 0.0, h, err, e, sc, q, fac, err_old = 1e-4, g_prev, g_new, dx, r2
    cdef long n_acc = 0, n_rej = 0, n_cross = 0
    cdef int status = -1
    field(z, k1, &P)
    h = h_init if h_init > 0 else initial_step(z, k1, n, rtol, atol, h_max, &P)
    g_prev = sin(TWO_PI * (z[1] - theta_ref))

    with nogil:
        while True:
            if n_acc + n_rej >= max_steps:
                status = 1
                break
            if h < h_min:
                status = 2
                break
            if t >= t_max:
                status = 3
                break
            for i in range(n):
                tmp[i] = z[i] + h * (A21 * k1[i])
            field(tmp, k2, &P)
            for i in range(n):
                tmp[i] = z[i] + h * (A31 * k1[i] + A32 * k2[i])
            field(tmp, k3, &P)
            for i in range(n):
                tmp[i] = z[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            field(tmp, k4, &P)
            for i in range(n):
                tmp[i] = z[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            field(tmp, k5, &P)
            for i in range(n):
                tmp[i] = z[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            field(tmp, k6, &P)
            for i in range(n):
                zn[i] = z[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
            field(zn, k7, &P)
            err = 0.0
            for i in range(n):
                e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                sc = atol + rtol * max(fabs(z[i]), fabs(zn[i]))
                q = fabs(e) / sc
                if q > err or q != q:
                    err = q
            if err != err or err == INFINITY:
                n_rej += 1
                h *= FAC_MIN
                continue
            if err <= 1.0:
                n_acc += 1
                if zn[0] >= r_exit and r_exit > z[0]:
                    status = 0
                    break
                g_new = sin(TWO_PI * (zn[1] - theta_ref))
                if g_prev < 0.0 and 0.0 <= g_new:
                    n_cross += 1
                g_prev = g_new
                if P.with_var:
                    nw = sqrt(zn[3] * zn[3] + zn[4] * zn[4] + zn[5] * zn[5])
                    if nw > 0.0 and nw != INFINITY:
                        logmag += log(nw)
                        for i in range(3, 6):
                            zn[i] /= nw
                            k7[i] /= nw
                t += h
                for i in range(n):
                    z[i] = zn[i]
                    k1[i] = k7[i]
                fac = SAFETY * pow(max(err, 1e-10), -0.2 + 0.75 * BETA) * pow(err_old, BETA)
                err_old = max(err, 1e-4)
                h = min(h * min(FAC_MAX, max(FAC_MIN, fac)), h_max)
            else:
                n_rej += 1
                h *= max(FAC_MIN, SAFETY * pow(err, -0.2))

    zl = [z[i] for i in range(n)]
    if status != 0:
        return status, t, zl, h, None, n_acc, n_rej, n_cross, logmag
    rc = [list(zl), [0.0] * n, [0.0] * n, [0.0] * n, [0.0] * n]
    for i in range(n):
        dx = zn[i] - z[i]
        r2 = h * k1[i] - dx
        rc[1][i] = dx
        rc[2][i] = r2
        rc[3][i] = dx - h * k7[i] - r2
        rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
    return 0, t, zl, h, rc, n_acc, n_rej, n_cross, logmag
