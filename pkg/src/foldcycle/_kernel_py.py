"""Pure-Python kernel: DOPRI5 on the prototypical field up to the exit section.

Mirrors ``_kernel.pyx`` statement for statement; selected when the compiled
extension is unavailable or FOLDCYCLE_BACKEND=python.
"""

import math

TWO_PI = 2.0 * math.pi

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

SAFETY, FAC_MIN, FAC_MAX, BETA = 0.9, 0.2, 5.0, 0.04

EXITED, MAX_STEPS, UNDERFLOW, TIME_LIMIT = 0, 1, 2, 3

BACKEND = "python"


class _Field:
    def __init__(self, means, cos_c, sin_c, mono_row, mono_p, mono_q, mono_fac, mono_tgt,
                 eps1, eps2, with_var):
        self.means = [float(v) for v in means]
        self.cos_c = [[float(v) for v in row] for row in cos_c]
        self.sin_c = [[float(v) for v in row] for row in sin_c]
        self.nf = len(self.means)
        self.K = len(self.cos_c[0]) if self.nf else 0
        self.mono = [(int(mono_row[i]), float(mono_p[i]), float(mono_q[i]),
                      float(mono_fac[i]), int(mono_tgt[i])) for i in range(len(mono_row))]
        self.eps1 = eps1
        self.eps2 = eps2
        self.with_var = with_var
        self.need_deriv = with_var

    def __call__(self, z):
        r, th, y = z[0], z[1], z[2]
        u = th - math.floor(th)
        c1 = math.cos(TWO_PI * u)
        s1 = math.sin(TWO_PI * u)
        K = self.K
        cs = [0.0] * K
        sn = [0.0] * K
        if K:
            cs[0] = c1
            sn[0] = s1
            for k in range(1, K):
                cs[k] = cs[k - 1] * c1 - sn[k - 1] * s1
                sn[k] = sn[k - 1] * c1 + cs[k - 1] * s1
        fv = [0.0] * self.nf
        dv = [0.0] * self.nf
        for i in range(self.nf):
            v = self.means[i]
            d = 0.0
            cc = self.cos_c[i]
            ss = self.sin_c[i]
            for k in range(K):
                v += cc[k] * cs[k] + ss[k] * sn[k]
                if self.need_deriv:
                    d += TWO_PI * (k + 1) * (ss[k] * cs[k] - cc[k] * sn[k])
            fv[i] = v
            dv[i] = d
        dr = -fv[0] * y + fv[1] * r * r
        gy = -fv[2]
        jrr = 2.0 * fv[1] * r
        jrt = -dv[0] * y + dv[1] * r * r
        jry = -fv[0]
        jyr = 0.0
        jyt = -dv[2]
        jyy = 0.0
        for row, p, q, fac, tgt in self.mono:
            rp = r ** p
            yq = y ** q
            term = fv[row] * fac
            val = term * rp * yq
            if self.with_var:
                d_r = term * p * r ** (p - 1.0) * yq if p > 0 else 0.0
                d_y = term * q * rp * y ** (q - 1.0) if q > 0 else 0.0
                d_t = dv[row] * fac * rp * yq
            if tgt == 0:
                dr += val
                if self.with_var:
                    jrr += d_r
                    jrt += d_t
                    jry += d_y
            else:
                gy += val
                if self.with_var:
                    jyr += d_r
                    jyt += d_t
                    jyy += d_y
        out = [dr, self.eps1, self.eps2 * gy]
        if self.with_var:
            v0, v1, v2 = z[3], z[4], z[5]
            e2 = self.eps2
            out.append(jrr * v0 + jrt * v1 + jry * v2)
            out.append(0.0)
            out.append(e2 * (jyr * v0 + jyt * v1 + jyy * v2))
        return out


def _initial_step(f, z, k1, rtol, atol, h_max):
    n = len(z)
    d0 = max(abs(z[i]) / (atol + rtol * abs(z[i])) for i in range(n))
    d1 = max(abs(k1[i]) / (atol + rtol * abs(z[i])) for i in range(n))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    z1 = [z[i] + h0 * k1[i] for i in range(n)]
    f1 = f(z1)
    d2 = max(abs(f1[i] - k1[i]) / (atol + rtol * abs(z[i])) for i in range(n)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, h_max)


def proto_integrate(means, cos_c, sin_c, mono_row, mono_p, mono_q, mono_fac, mono_tgt,
                    eps1, eps2, x0, v0, r_exit, theta_ref, rtol, atol, h_init, h_min,
                    h_max, max_steps, t_max):
    """Integrate until r crosses r_exit from below.

    Returns (status, t0, z0, h, rcont, n_acc, n_rej, n_cross, logmag); the last
    accepted step [t0, t0+h] with its dense coefficients brackets the exit when
    status == EXITED. n_cross counts rising zeros of sin(2π(θ − theta_ref)) over
    the completed steps before that bracket.
    """
    with_var = v0 is not None
    f = _Field(means, cos_c, sin_c, mono_row, mono_p, mono_q, mono_fac, mono_tgt,
               eps1, eps2, with_var)
    z = [float(x0[0]), float(x0[1]), float(x0[2])]
    logmag = 0.0
    if with_var:
        nv = math.sqrt(v0[0] ** 2 + v0[1] ** 2 + v0[2] ** 2)
        logmag = math.log(nv)
        z += [v0[0] / nv, v0[1] / nv, v0[2] / nv]
    n = len(z)
    if eps1 > 0:
        h_max = min(h_max, 0.25 / eps1)
    t = 0.0
    k1 = f(z)
    h = h_init if h_init > 0 else _initial_step(f, z, k1, rtol, atol, h_max)
    n_acc = n_rej = n_cross = 0
    err_old = 1e-4
    g_prev = math.sin(TWO_PI * (z[1] - theta_ref))
    rng = range(n)
    while True:
        if n_acc + n_rej >= max_steps:
            return MAX_STEPS, t, z, h, None, n_acc, n_rej, n_cross, logmag
        if h < h_min:
            return UNDERFLOW, t, z, h, None, n_acc, n_rej, n_cross, logmag
        if t >= t_max:
            return TIME_LIMIT, t, z, h, None, n_acc, n_rej, n_cross, logmag
        k2 = f([z[i] + h * (A21 * k1[i]) for i in rng])
        k3 = f([z[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in rng])
        k4 = f([z[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in rng])
        k5 = f([z[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]) for i in rng])
        k6 = f([z[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
                for i in rng])
        zn = [z[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
              for i in rng]
        k7 = f(zn)
        err = 0.0
        for i in rng:
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            sc = atol + rtol * max(abs(z[i]), abs(zn[i]))
            q = abs(e) / sc
            if q > err or q != q:
                err = q
        if err != err or err == math.inf:
            n_rej += 1
            h *= FAC_MIN
            continue
        if err <= 1.0:
            n_acc += 1
            if zn[0] >= r_exit > z[0]:
                rc = [list(z), [0.0] * n, [0.0] * n, [0.0] * n, [0.0] * n]
                for i in rng:
                    dx = zn[i] - z[i]
                    r2 = h * k1[i] - dx
                    rc[1][i] = dx
                    rc[2][i] = r2
                    rc[3][i] = dx - h * k7[i] - r2
                    rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i]
                                    + D6 * k6[i] + D7 * k7[i])
                return EXITED, t, z, h, rc, n_acc, n_rej, n_cross, logmag
            g_new = math.sin(TWO_PI * (zn[1] - theta_ref))
            if g_prev < 0.0 <= g_new:
                n_cross += 1
            g_prev = g_new
            if with_var:
                nw = math.sqrt(zn[3] ** 2 + zn[4] ** 2 + zn[5] ** 2)
                if nw > 0.0 and nw != math.inf:
                    logmag += math.log(nw)
                    for i in (3, 4, 5):
                        zn[i] /= nw
                        k7[i] /= nw
            t += h
            z = zn
            k1 = k7
            fac = SAFETY * max(err, 1e-10) ** (-0.2 + 0.75 * BETA) * err_old ** BETA
            err_old = max(err, 1e-4)
            h = min(h * min(FAC_MAX, max(FAC_MIN, fac)), h_max)
        else:
            n_rej += 1
            h *= max(FAC_MIN, SAFETY * err ** -0.2)
