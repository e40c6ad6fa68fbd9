"""Compiled inner loops: scaled Taylor jets, escape orbits, Aberth sweeps.

A *scaled jet* is a short complex array ``t`` plus an integer exponent ``e``
standing for the Taylor coefficients ``t[i] * 2**e`` of a function at a point.
Keeping the exponent separate lets the sequence families be evaluated far
outside the double range (``q_12`` of the Mandelbrot family reaches 1e600 on
the probe circle |c| = 2).
"""

import math

import numpy as np
from numba import njit

DENSE = 0
ITERATE = 1
MANDELBROT = 2
CHEBYSHEV = 3

LN2 = math.log(2.0)
_HI = 2.0 ** 32
_LO = 2.0 ** -32


@njit(cache=True, nogil=True)
def _scale(a, n, L):
    while n != 0:
        step = max(-1000, min(1000, n))
        f = math.ldexp(1.0, step)
        for i in range(L):
            a[i] = complex(a[i].real * f, a[i].imag * f)
        n -= step


@njit(cache=True, nogil=True)
def _renorm(a, L):
    mx = 0.0
    for i in range(L):
        x = abs(a[i].real)
        y = abs(a[i].imag)
        if x > mx:
            mx = x
        if y > mx:
            mx = y
    if mx == 0.0 or (mx > _LO and mx < _HI) or not math.isfinite(mx):
        return 0
    ex = math.frexp(mx)[1]
    _scale(a, -ex, L)
    return ex


@njit(cache=True, nogil=True)
def _mul(a, b, out, L):
    for i in range(L):
        s = 0j
        for j in range(i + 1):
            s += a[j] * b[i - j]
        out[i] = s


@njit(cache=True, nogil=True)
def _add_vec(acc, ea, b, nb, L):
    """acc*2**ea + b (b unscaled, first nb entries); returns the exponent."""
    if ea < 0:
        _scale(acc, ea, L)
        ea = 0
    for i in range(min(nb, L)):
        bi = b[i]
        if bi != 0:
            acc[i] += complex(math.ldexp(bi.real, -ea), math.ldexp(bi.imag, -ea))
    return ea


@njit(cache=True, nogil=True)
def _horner(coeffs, absolute, x, ex, acc, tmp, cbuf, L):
    n = coeffs.size - 1
    for i in range(L):
        acc[i] = 0j
    c = coeffs[n]
    acc[0] = abs(c) if absolute else c
    ea = _renorm(acc, L)
    for j in range(n - 1, -1, -1):
        _mul(acc, x, tmp, L)
        for i in range(L):
            acc[i] = tmp[i]
        ea += ex
        c = coeffs[j]
        cbuf[0] = abs(c) if absolute else c
        ea = _add_vec(acc, ea, cbuf, 1, L)
        ea += _renorm(acc, L)
    return ea


@njit(cache=True, nogil=True)
def jet_point(fam, coeffs, k, s, shift, z, L, absolute, out, work):
    """Fill ``out[:L]`` with scaled Taylor coefficients; return the exponent.

    ``work`` must have shape (5, L).
    """
    x = work[0]
    tmp = work[1]
    acc = work[2]
    prev = work[3]
    cbuf = work[4]
    for i in range(L):
        x[i] = 0j
        out[i] = 0j
    if absolute:
        z = complex(abs(z), 0.0)

    if fam == DENSE:
        x[0] = z
        if L > 1:
            x[1] = 1.0
        ex = _renorm(x, L)
        e = _horner(coeffs, absolute, x, ex, acc, tmp, cbuf, L)
        for i in range(L):
            out[i] = acc[i]
        return e

    if fam == ITERATE:
        x[0] = z
        if L > 1:
            x[1] = 1.0
        ex = _renorm(x, L)
        for _ in range(k):
            ex = _horner(coeffs, absolute, x, ex, acc, tmp, cbuf, L)
            for i in range(L):
                x[i] = acc[i]
        for i in range(L):
            out[i] = x[i]
        return ex

    if fam == MANDELBROT:
        # q_1 = c, q_{j+1} = q_j**2 + c
        cbuf[0] = z
        nb = 1
        if L > 1:
            cbuf[1] = 1.0
            nb = 2
        x[0] = z
        if L > 1:
            x[1] = 1.0
        ex = _renorm(x, L)
        for _ in range(k - 1):
            _mul(x, x, tmp, L)
            for i in range(L):
                x[i] = tmp[i]
            ex = _add_vec(x, 2 * ex, cbuf, nb, L)
            ex += _renorm(x, L)
        for i in range(L):
            out[i] = x[i]
        return ex

    # CHEBYSHEV: T_0 = 1, T_1 = X, T_{j+1} = 2 X T_j - T_{j-1}, X = s z + shift
    if absolute:
        cbuf[0] = abs(s) * z.real + abs(shift)
        sgn = 1.0
        sl = abs(s)
    else:
        cbuf[0] = s * z + shift
        sgn = -1.0
        sl = s
    if L > 1:
        cbuf[1] = sl
    for i in range(2, L):
        cbuf[i] = 0j
    if k == 0:
        out[0] = 1.0
        return 0
    for i in range(L):
        prev[i] = 0j
        acc[i] = cbuf[i]
    prev[0] = 1.0
    e = 0
    for _ in range(k - 1):
        _mul(cbuf, acc, tmp, L)
        for i in range(L):
            tmp[i] = 2.0 * tmp[i] + sgn * prev[i]
            prev[i] = acc[i]
            acc[i] = tmp[i]
        sh = _renorm(acc, L)
        if sh != 0:
            _scale(prev, -sh, L)
            e += sh
    for i in range(L):
        out[i] = acc[i]
    return e


@njit(cache=True, nogil=True)
def jet_many(fam, coeffs, k, s, shift, zs, L, absolute):
    n = zs.size
    T = np.empty((n, L), dtype=np.complex128)
    E = np.empty(n, dtype=np.int64)
    work = np.empty((5, L), dtype=np.complex128)
    out = np.empty(L, dtype=np.complex128)
    for p in range(n):
        E[p] = jet_point(fam, coeffs, k, s, shift, zs[p], L, absolute, out, work)
        for i in range(L):
            T[p, i] = out[i]
    return T, E


# --- running error bounds ----------------------------------------------------
# The same recursions with a real array bounding the accumulated rounding
# error of each Taylor coefficient (same scale exponent as the value).

_U = 2.0 ** -52


@njit(cache=True, nogil=True)
def _renorm_err(a, ea, L):
    ex = _renorm(a, L)
    if ex != 0:
        for i in range(L):
            ea[i] = math.ldexp(ea[i], -ex)
    return ex


@njit(cache=True, nogil=True)
def _mul_err(a, ea, b, eb, out, eout, L):
    for i in range(L):
        s = 0j
        e = 0.0
        m = 0.0
        for j in range(i + 1):
            s += a[j] * b[i - j]
            m += abs(a[j]) * abs(b[i - j])
            e += abs(a[j]) * eb[i - j] + ea[j] * abs(b[i - j]) + ea[j] * eb[i - j]
        out[i] = s
        eout[i] = e + 4.0 * (i + 2) * _U * m


@njit(cache=True, nogil=True)
def _add_err(acc, eacc, ea, b, nb, L):
    """acc*2**ea + b with b exact; returns the exponent."""
    if ea < 0:
        _scale(acc, ea, L)
        for i in range(L):
            eacc[i] = math.ldexp(eacc[i], ea)
        ea = 0
    for i in range(min(nb, L)):
        bi = b[i]
        if bi != 0:
            acc[i] += complex(math.ldexp(bi.real, -ea), math.ldexp(bi.imag, -ea))
            eacc[i] += 2.0 * _U * abs(acc[i])
    return ea


@njit(cache=True, nogil=True)
def jet_err_point(fam, coeffs, k, s, shift, z, L, out, eout, work, ework, cwork):
    """``jet_point`` (non-absolute) plus running error bounds in ``eout``.

    ``work`` and ``cwork`` have shape (5, L), ``ework`` shape (4, L).
    """
    x = work[0]
    tmp = work[1]
    acc = work[2]
    prev = work[3]
    cbuf = work[4]
    ex_ = ework[0]
    etmp = ework[1]
    eacc = ework[2]
    eprev = ework[3]
    for i in range(L):
        x[i] = 0j
        ex_[i] = 0.0
        eacc[i] = 0.0
        eprev[i] = 0.0
    x[0] = z
    if L > 1:
        x[1] = 1.0

    if fam == DENSE or fam == ITERATE:
        ex = _renorm_err(x, ex_, L)
        reps = 1 if fam == DENSE else k
        n = coeffs.size - 1
        for _ in range(reps):
            for i in range(L):
                acc[i] = 0j
                eacc[i] = 0.0
            acc[0] = coeffs[n]
            ea = _renorm_err(acc, eacc, L)
            for j in range(n - 1, -1, -1):
                _mul_err(acc, eacc, x, ex_, tmp, etmp, L)
                for i in range(L):
                    acc[i] = tmp[i]
                    eacc[i] = etmp[i]
                ea += ex
                cbuf[0] = coeffs[j]
                ea = _add_err(acc, eacc, ea, cbuf, 1, L)
                ea += _renorm_err(acc, eacc, L)
            for i in range(L):
                x[i] = acc[i]
                ex_[i] = eacc[i]
            ex = ea
        for i in range(L):
            out[i] = x[i]
            eout[i] = ex_[i]
        return ex

    if fam == MANDELBROT:
        cbuf[0] = z
        nb = 1
        if L > 1:
            cbuf[1] = 1.0
            nb = 2
        ex = _renorm_err(x, ex_, L)
        for _ in range(k - 1):
            _mul_err(x, ex_, x, ex_, tmp, etmp, L)
            for i in range(L):
                x[i] = tmp[i]
                ex_[i] = etmp[i]
            ex = _add_err(x, ex_, 2 * ex, cbuf, nb, L)
            ex += _renorm_err(x, ex_, L)
        for i in range(L):
            out[i] = x[i]
            eout[i] = ex_[i]
        return ex

    # CHEBYSHEV: an absolute bound would grow like (1 + sqrt 2)^k through the
    # three-term recurrence, so the error is propagated with its sign (first
    # order) and each local rounding is added in phase with it.
    ce = cwork[0]
    cp = cwork[1]
    ct = cwork[2]
    cx = cwork[3]
    cu = cwork[4]
    cbuf[0] = s * z + shift
    for i in range(L):
        cx[i] = 0j
        ce[i] = 0j
        cp[i] = 0j
    cx[0] = 4.0 * _U * (abs(s) * abs(z) + abs(shift))
    if L > 1:
        cbuf[1] = s
    for i in range(2, L):
        cbuf[i] = 0j
    if k == 0:
        out[0] = 1.0
        for i in range(L):
            eout[i] = 0.0
        return 0
    for i in range(L):
        prev[i] = 0j
        acc[i] = cbuf[i]
        ce[i] = cx[i]
    prev[0] = 1.0
    e = 0
    for _ in range(k - 1):
        _mul(cbuf, acc, tmp, L)
        _mul(cbuf, ce, ct, L)
        _mul(cx, acc, cu, L)
        for i in range(L):
            t = 2.0 * tmp[i] - prev[i]
            et = 2.0 * (ct[i] + cu[i]) - cp[i]
            loc = 4.0 * (i + 2) * _U * abs(t)
            a = abs(et)
            et = et * (1.0 + loc / a) if a > 0.0 else complex(loc, 0.0)
            prev[i] = acc[i]
            cp[i] = ce[i]
            acc[i] = t
            ce[i] = et
        sh = _renorm(acc, L)
        if sh != 0:
            _scale(prev, -sh, L)
            _scale(ce, -sh, L)
            _scale(cp, -sh, L)
            e += sh
    for i in range(L):
        out[i] = acc[i]
        eout[i] = abs(ce[i])
    return e


@njit(cache=True, nogil=True)
def jet_err_many(fam, coeffs, k, s, shift, zs, L):
    n = zs.size
    T = np.empty((n, L), dtype=np.complex128)
    R = np.empty((n, L), dtype=np.float64)
    E = np.empty(n, dtype=np.int64)
    work = np.empty((5, L), dtype=np.complex128)
    ework = np.empty((4, L), dtype=np.float64)
    cwork = np.empty((5, L), dtype=np.complex128)
    out = np.empty(L, dtype=np.complex128)
    eout = np.empty(L, dtype=np.float64)
    for p in range(n):
        E[p] = jet_err_point(fam, coeffs, k, s, shift, zs[p], L, out, eout, work, ework, cwork)
        for i in range(L):
            T[p, i] = out[i]
            R[p, i] = eout[i]
    return T, R, E


@njit(cache=True, nogil=True)
def _log_abs(v, e):
    a = abs(v)
    if a == 0.0:
        return -np.inf
    return math.log(a) + e * LN2


@njit(cache=True, nogil=True)
def escape_many(fam, coeffs, k, s, shift, m, fact_m, zs, max_iter, log_r0, log_bail):
    """Forward orbits of w -> q^(m)(w).

    Returns (escape step, final step, log|w_final|) per start point.  The
    escape step is the first j with |w_j| > r0 (-1 if the orbit stays
    within r0 for ``max_iter`` steps); the orbit is then followed further
    until |w| > bail so the caller's asymptotic Green formula is accurate.
    A value leaving the double range stops the orbit, its modulus known in
    log form.
    """
    n = zs.size
    L = m + 1
    esc = np.full(n, -1, dtype=np.int64)
    fin = np.full(n, -1, dtype=np.int64)
    logs = np.zeros(n, dtype=np.float64)
    work = np.empty((5, L), dtype=np.complex128)
    out = np.empty(L, dtype=np.complex128)
    cap = 700.0
    for p in range(n):
        w = zs[p]
        lw = _log_abs(w, 0)
        j = 0
        while True:
            if esc[p] < 0 and lw > log_r0:
                esc[p] = j
            if esc[p] >= 0 and (lw > log_bail or lw > cap):
                break
            if j >= max_iter and esc[p] < 0:
                break
            j += 1
            e = jet_point(fam, coeffs, k, s, shift, w, L, False, out, work)
            v = out[m] * fact_m
            lw = _log_abs(v, e)
            if lw > cap:
                if esc[p] < 0:
                    esc[p] = j
                break
            w = complex(math.ldexp(v.real, e), math.ldexp(v.imag, e))
        if esc[p] >= 0:
            fin[p] = j
            logs[p] = lw
    return esc, fin, logs


@njit(cache=True, nogil=True)
def aberth_deltas(z, active, ld):
    """Aberth corrections 1 / (ld_i - sum_j 1/(z_i - z_j)) for active roots.

    ``ld`` holds the log-derivatives p'/(p - w); an infinite entry marks an
    exact root (zero correction).
    """
    n = z.size
    na = active.size
    out = np.empty(na, dtype=np.complex128)
    for a in range(na):
        i = active[a]
        la = ld[a]
        if not (math.isfinite(la.real) and math.isfinite(la.imag)):
            out[a] = 0j
            continue
        zi = z[i]
        sr = 0.0
        si = 0.0
        zr = zi.real
        zim = zi.imag
        for j in range(n):
            if j == i:
                continue
            dr = zr - z[j].real
            di = zim - z[j].imag
            q = dr * dr + di * di
            if q > 0.0:
                sr += dr / q
                si -= di / q
        den = la - complex(sr, si)
        if den == 0:
            out[a] = 1e-7 * (1.0 + abs(zi))
        else:
            out[a] = 1.0 / den
    return out


@njit(cache=True, nogil=True)
def pair_log_sum(z, w):
    """Neumaier-compensated sum over i != j of w_i w_j log|z_i - z_j|.

    Returns -inf when two distinct atoms coincide.
    """
    n = z.size
    total = 0.0
    comp = 0.0
    for i in range(n):
        row = 0.0
        rc = 0.0
        for j in range(i + 1, n):
            d = abs(z[i] - z[j])
            if d == 0.0:
                return -np.inf
            v = w[j] * math.log(d)
            t = row + v
            if abs(row) >= abs(v):
                rc += (row - t) + v
            else:
                rc += (v - t) + row
            row = t
        v = 2.0 * w[i] * (row + rc)
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


@njit(cache=True, nogil=True)
def potential_many(zs, pts, w):
    """Neumaier-compensated sum_j w_j log|z - pts_j| for each z (-inf at atoms)."""
    out = np.empty(zs.size, dtype=np.float64)
    for p in range(zs.size):
        z = zs[p]
        s = 0.0
        c = 0.0
        hit = False
        for j in range(pts.size):
            d = abs(z - pts[j])
            if d == 0.0:
                if w[j] > 0.0:
                    hit = True
                    break
                continue
            v = w[j] * math.log(d)
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
        out[p] = -np.inf if hit else s + c
    return out
