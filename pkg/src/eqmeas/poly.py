"""Polynomial core: dense polynomials and the sequence families q_k^(m).

Two concrete types share one evaluation protocol (``degree``,
``log_abs_gamma``, ``jet``, ``derivative``, ``root_hint``):

* :class:`Polynomial` stores dense ascending coefficients.
* :class:`SequencePolynomial` is the k-th member of a named family, or one of
  its derivatives, evaluated through the family recursion.  Dense
  coefficients of these members leave the double range quickly (the sum of
  the Mandelbrot coefficients q_12(1) is about 1e362) while the recursion
  stays accurate, so root finding and escape iterations use the recursion.
"""

import logging
import math
import re
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import _kernels as K

log = logging.getLogger(__name__)

STRIP_TOL = 1e-300
MAX_MANDELBROT_K = 16
FAMILIES = ("iterate", "mandelbrot_center", "chebyshev_interval")
_FAMILY_ALIASES = {
    "iterate": "iterate",
    "mandelbrot": "mandelbrot_center",
    "mandelbrot_center": "mandelbrot_center",
    "chebyshev": "chebyshev_interval",
    "chebyshev_interval": "chebyshev_interval",
}


class CoefficientOverflowError(OverflowError):
    """Dense coefficients of a sequence member do not fit in a double."""

    def __init__(self, family, k):
        self.family = family
        self.k = k
        super().__init__(
            f"{family}: dense coefficients overflow the floating range "
            f"from k = {k} on"
        )


def _as_points(z):
    z = np.asarray(z, dtype=np.complex128)
    return z.reshape(-1), z.shape


class _JetMixin:
    """Evaluation helpers built on ``jet``."""

    def __call__(self, z):
        zs, shape = _as_points(z)
        T, E = self.jet(zs, 0)
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.ldexp(T[:, 0].real, E) + 1j * np.ldexp(T[:, 0].imag, E)
        return v.reshape(shape) if shape else complex(v[0])

    def log_abs(self, z):
        """log|p(z)|, finite even where p(z) itself overflows."""
        zs, shape = _as_points(z)
        T, E = self.jet(zs, 0)
        with np.errstate(divide="ignore"):
            out = np.log(np.abs(T[:, 0])) + E * K.LN2
        return out.reshape(shape) if shape else float(out[0])

    def log_abs_scale(self, z):
        """log of sum_j |a_j| |z|^j, the backward-error scale at z."""
        zs, shape = _as_points(z)
        T, E = self.jet(zs, 0, absolute=True)
        with np.errstate(divide="ignore"):
            out = np.log(np.abs(T[:, 0])) + E * K.LN2
        return out.reshape(shape) if shape else float(out[0])

    def log_derivative(self, z):
        """p'(z) / p(z) (the scale exponents cancel)."""
        zs, shape = _as_points(z)
        T, _ = self.jet(zs, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = T[:, 1] / T[:, 0]
        return out.reshape(shape) if shape else complex(out[0])

    @property
    def gamma(self):
        """Leading coefficient (inf when it leaves the double range)."""
        with np.errstate(over="ignore"):
            return complex(np.exp(self.log_abs_gamma) * np.exp(1j * self.arg_gamma))


class Polynomial(_JetMixin):
    """Dense polynomial, coefficients in ascending degree order.

    Coefficients of magnitude <= 1e-300 at the top are stripped with a
    warning; the zero polynomial keeps a single zero coefficient.
    """

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128).reshape(-1)
        if c.size == 0:
            raise ValueError("empty coefficient vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        nz = np.flatnonzero(np.abs(c) > STRIP_TOL)
        top = int(nz[-1]) if nz.size else 0
        if top < c.size - 1:
            if np.any(c[top + 1:] != 0):
                log.warning("stripped %d negligible leading coefficient(s)",
                            c.size - 1 - top)
            c = c[:top + 1]
        c = c.copy()
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self):
        return self.coeffs.size - 1

    @property
    def log_abs_gamma(self):
        a = abs(self.coeffs[-1])
        return math.log(a) if a > 0 else -math.inf

    @property
    def arg_gamma(self):
        return float(np.angle(self.coeffs[-1]))

    @property
    def gamma(self):
        return complex(self.coeffs[-1])

    @property
    def scale(self):
        return float(np.max(np.abs(self.coeffs)))

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"Polynomial({format_poly_literal(self)!r})"

    def dense(self):
        return self

    def jet(self, z, order=1, absolute=False):
        zs = np.ascontiguousarray(np.asarray(z, dtype=np.complex128).reshape(-1))
        return K.jet_many(K.DENSE, self.coeffs, 0, 0.0, 0.0, zs, order + 1, absolute)

    def kernel_args(self):
        return (K.DENSE, self.coeffs, 0, 0.0, 0.0, 0, 1.0)

    def derivative(self):
        return poly_derivative(self)

    def shifted(self, w):
        """p - w."""
        c = np.array(self.coeffs)
        c[0] -= w
        return Polynomial(c)

    def monomial_order(self):
        """Multiplicity of the root at 0 (exact zero low-order coefficients)."""
        nz = np.flatnonzero(self.coeffs != 0)
        return int(nz[0]) if nz.size else self.degree

    def centroid(self):
        n = self.degree
        return complex(-self.coeffs[n - 1] / (n * self.coeffs[n]))

    def root_hint(self, w=0.0):
        """(center, radius) of a circle enclosing the roots of p - w."""
        c = np.array(self.coeffs)
        c[0] -= w
        return 0j, _cauchy_radius(np.abs(c))

    def start_points(self, w, n):
        theta = (2 * np.pi * np.arange(n) + 0.7) / n
        return _circle(*self.root_hint(w), theta)


def _cauchy_radius(a):
    """Positive root of |a_n| x^n = sum_{j<n} |a_j| x^j (all roots lie inside)."""
    n = a.size - 1
    lower = np.flatnonzero(a[:n] > 0)
    if lower.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        la = np.log(a)
    lan = la[n]
    j = lower

    def excess(t):
        # log(sum_{j<n} |a_j/a_n| x^(j-n)) at x = e^t
        v = la[j] - lan + (j - n) * t
        mx = v.max()
        return mx + math.log(np.exp(v - mx).sum())

    lo, hi = -50.0, 1.0 + float(np.max(la[j] - lan))
    hi = max(hi, 1.0)
    while excess(hi) > 0:
        hi *= 2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


# --- sequences -------------------------------------------------------------

@dataclass(frozen=True)
class PolySequenceSpec:
    """Descriptor of q_k^(m) in one of the supported families."""

    family: str
    k: int
    m: int = 0
    base: Polynomial | None = None
    interval: tuple = (-1.0, 1.0)

    def __post_init__(self):
        fam = _FAMILY_ALIASES.get(self.family)
        if fam is None:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "interval", tuple(float(x) for x in self.interval))
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError("m must be a nonnegative integer")
        if fam == "iterate":
            if self.base is None or self.base.degree < 2:
                raise ValueError("iterate family needs a base of degree >= 2")
        if fam == "mandelbrot_center" and self.k > MAX_MANDELBROT_K:
            raise ValueError(
                f"mandelbrot_center generation is refused beyond k = {MAX_MANDELBROT_K}")
        if fam == "chebyshev_interval":
            a, b = self.interval
            if not b > a:
                raise ValueError("chebyshev interval needs a < b")
        if self.base_degree - self.m < 1:
            raise ValueError("realized polynomial q_k^(m) would be constant")

    @property
    def base_degree(self):
        """n_k, the degree of q_k."""
        if self.family == "iterate":
            return self.base.degree ** self.k
        if self.family == "mandelbrot_center":
            return 2 ** (self.k - 1)
        return self.k

    def with_k(self, k):
        return replace(self, k=k)

    def with_m(self, m):
        return replace(self, m=m)


class SequencePolynomial(_JetMixin):
    """q_k^(m) realized through the family recursion."""

    def __init__(self, spec):
        self.spec = spec
        n = spec.base_degree
        m = spec.m
        self.degree = n - m
        self._n = n
        self._fact_m = float(math.factorial(m)) if m < 171 else math.inf
        fam = spec.family
        if fam == "iterate":
            b = spec.base
            d = b.degree
            # gamma_k = gamma^(1 + d + ... + d^(k-1))
            e = (d ** spec.k - 1) // (d - 1)
            lg = e * b.log_abs_gamma
            ag = e * b.arg_gamma
            self._kargs = (K.ITERATE, b.coeffs, spec.k, 0.0, 0.0)
        elif fam == "mandelbrot_center":
            lg, ag = 0.0, 0.0
            self._kargs = (K.MANDELBROT, np.zeros(1, np.complex128), spec.k, 0.0, 0.0)
        else:
            a, b = spec.interval
            s = 2.0 / (b - a)
            shift = -(a + b) / (b - a)
            # T_k(x) = 2^(k-1) x^k + ..., x = s z + shift
            lg = (spec.k - 1) * math.log(2.0) + spec.k * math.log(s)
            ag = 0.0
            self._kargs = (K.CHEBYSHEV, np.zeros(1, np.complex128), spec.k, s, shift)
        # m-th derivative multiplies the leading coefficient by n!/(n-m)!
        self.log_abs_gamma = lg + math.lgamma(n + 1) - math.lgamma(n - m + 1)
        self.arg_gamma = ag

    def __repr__(self):
        s = self.spec
        return f"SequencePolynomial({s.family}, k={s.k}, m={s.m}, degree={self.degree})"

    def jet(self, z, order=1, absolute=False):
        zs = np.ascontiguousarray(np.asarray(z, dtype=np.complex128).reshape(-1))
        m = self.spec.m
        L = m + order + 1
        T, E = K.jet_many(*self._kargs, zs, L, absolute)
        if m == 0:
            return T, E
        # Taylor coefficients of q^(m): (m+i)!/i! * t_{m+i}
        f = np.array([math.factorial(m + i) / math.factorial(i) for i in range(order + 1)])
        return T[:, m:] * f, E

    def jet_error(self, z, order=1):
        """``jet`` plus running bounds on the rounding error of each entry."""
        zs = np.ascontiguousarray(np.asarray(z, dtype=np.complex128).reshape(-1))
        m = self.spec.m
        T, R, E = K.jet_err_many(*self._kargs, zs, m + order + 1)
        if m == 0:
            return T, R, E
        f = np.array([math.factorial(m + i) / math.factorial(i) for i in range(order + 1)])
        return T[:, m:] * f, R[:, m:] * f, E

    def kernel_args(self):
        return (*self._kargs, self.spec.m, self._fact_m)

    def derivative(self):
        return SequencePolynomial(self.spec.with_m(self.spec.m + 1))

    @cached_property
    def _dense(self):
        try:
            return seq_generate(self.spec)
        except CoefficientOverflowError as exc:
            return exc

    def dense(self):
        """Dense form; raises CoefficientOverflowError when unrepresentable."""
        d = self._dense
        if isinstance(d, Exception):
            raise d
        return d

    def monomial_order(self):
        try:
            return self.dense().monomial_order()
        except CoefficientOverflowError:
            L = min(self.degree, 64) + 1
            T, _ = self.jet(np.zeros(1), L - 1)
            nz = np.flatnonzero(T[0] != 0)
            return int(nz[0]) if nz.size else L - 1

    def centroid(self):
        fam = self.spec.family
        if fam == "mandelbrot_center":
            return -0.5 + 0j
        if fam == "chebyshev_interval":
            a, b = self.spec.interval
            return complex(0.5 * (a + b))
        return self.spec.base.centroid()

    @cached_property
    def _set_radius(self):
        fam = self.spec.family
        if fam == "mandelbrot_center":
            return 1.6
        if fam == "chebyshev_interval":
            a, b = self.spec.interval
            return 0.5 * (b - a)
        return julia_radius_hint(self.spec.base)

    def root_hint(self, w=0.0):
        """(center, radius) for initial guesses of the roots of p - w.

        A family-based estimate, not a bound: coefficient bounds are useless
        here (the tight Cauchy radius of q_11 is about 740 while its roots lie
        in the closed disk of radius 2).
        """
        rho = self._set_radius
        grow = math.exp((math.log(abs(w)) - self.log_abs_gamma) / self.degree) if w != 0 else 0.0
        return self.centroid(), 1.05 * max(rho, 1.1 * grow)

    def start_points(self, w, n):
        """Deterministic initial guesses for the n roots of p - w (w = 0 deflated).

        The Mandelbrot family starts on the image of a circle under a
        truncated exterior map of M, Chebyshev on a Joukowski ellipse; both
        follow the roots far better than a circle and cut the sweep count
        several-fold at degree 2048.
        """
        fam = self.spec.family
        theta = (2 * np.pi * np.arange(n) + 0.7) / n
        if fam == "iterate":
            return _circle(*self.root_hint(w), theta)
        grow = 0.0
        if w != 0:
            grow = math.exp((math.log(abs(w)) - self.log_abs_gamma) / self.degree)
        if fam == "mandelbrot_center":
            rho = 1.05 * max(1.0, 1.1 * grow)
            return _psi_mandelbrot(rho * np.exp(1j * theta))
        a, b = self.spec.interval
        half = 0.25 * (b - a)
        rho = 1.05 * max(1.0, 1.1 * grow / half)
        u = rho * np.exp(1j * theta)
        return 0.5 * (a + b) + half * (u + 1 / u)


# Laurent coefficients of the exterior map of the Mandelbrot set,
# psi(u) = u + sum_j b_j u^-j.
_PSI = (-0.5, 1 / 8, -1 / 4, 15 / 128, 0.0, -47 / 1024, -1 / 16, 987 / 32768,
        0.0, -3673 / 262144)


def _psi_mandelbrot(u):
    out = np.array(u, dtype=np.complex128)
    inv = 1 / out
    pw = np.ones_like(out)
    for b in _PSI:
        out = out + b * pw
        pw = pw * inv
    return out


def _circle(center, radius, theta):
    if not radius > 0:
        radius = 1.0
    return center + radius * np.exp(1j * theta)


def julia_radius_hint(base, n_probe=720):
    """Numerical radius, about the root centroid, of the filled Julia set of base.

    Shrinks from the doubling escape radius while |base(z) - c| > |z - c| on
    the circle |z - c| = R.
    """
    c = base.centroid()
    ang = np.exp(2j * np.pi * np.arange(n_probe) / n_probe)
    n = base.degree
    s = float(np.sum(np.abs(base.coeffs[:n])))
    R = max(2.0, 2.0 * (1.0 + s) / abs(base.coeffs[n])) + abs(c)
    best = R
    while R > 1e-3:
        z = c + R * ang
        if np.min(np.abs(base(z) - c)) > 1.001 * R:
            best = R
            R *= 0.98
        else:
            break
    return best


# --- operations ------------------------------------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLIT = 134217729.0


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    a1, a2 = _split(a)
    b1, b2 = _split(b)
    return p, a2 * b2 - (((p - a1 * b1) - a2 * b1) - a1 * b2)


def _comp_horner(coeffs, z):
    """Compensated Horner for complex data (error-free transformations)."""
    zr, zi = z.real, z.imag
    sr, si = coeffs[-1].real, coeffs[-1].imag
    er, ei = 0.0, 0.0
    for a in coeffs[-2::-1]:
        p1, e1 = _two_prod(sr, zr)
        p2, e2 = _two_prod(si, zi)
        p3, e3 = _two_prod(sr, zi)
        p4, e4 = _two_prod(si, zr)
        pr, f1 = _two_sum(p1, -p2)
        pi, f2 = _two_sum(p3, p4)
        nr, g1 = _two_sum(pr, a.real)
        ni, g2 = _two_sum(pi, a.imag)
        # error polynomial, evaluated in plain arithmetic
        er, ei = (er * zr - ei * zi + (e1 - e2 + f1 + g1),
                  er * zi + ei * zr + (e3 + e4 + f2 + g2))
        sr, si = nr, ni
    return complex(sr + er, si + ei)


def poly_eval(p, z):
    """Value p(z).

    Dense polynomials use compensated Horner; sequence members go through
    their recursion and return inf when the value leaves the double range.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"cannot evaluate at non-finite point {z!r}")
    if isinstance(p, Polynomial):
        if p.coeffs.size == 1:
            return complex(p.coeffs[0])
        with np.errstate(all="ignore"):
            v = _comp_horner(p.coeffs.tolist(), z)
        if math.isfinite(v.real) and math.isfinite(v.imag):
            return v
        return complex(p(z))
    return complex(p(z))


def poly_derivative(p):
    """Coefficient-wise derivative; the degree drops by one."""
    if isinstance(p, SequencePolynomial):
        return p.derivative()
    if p.degree < 1:
        raise ValueError("derivative of a constant polynomial is the zero polynomial")
    n = p.degree
    return Polynomial(p.coeffs[1:] * np.arange(1, n + 1))


def _leja_order(z):
    """Leja ordering: each next point maximizes the product of distances to
    those already taken, which keeps sequential expansion well conditioned."""
    n = z.size
    if n <= 2:
        return z
    order = [int(np.argmax(np.abs(z)))]
    with np.errstate(divide="ignore"):
        score = np.log(np.abs(z - z[order[0]]))
        taken = np.zeros(n, dtype=bool)
        taken[order[0]] = True
        for _ in range(n - 1):
            s = np.where(taken, -np.inf, score)
            j = int(np.argmax(s))
            if s[j] == -np.inf:  # only repeats of taken points remain
                j = int(np.flatnonzero(~taken)[0])
            order.append(j)
            taken[j] = True
            score += np.log(np.abs(z - z[j]))
    return z[order]


def poly_from_roots(roots, gamma=1.0):
    """gamma * prod (z - root), expanded with the roots in Leja order."""
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    z = np.asarray(roots, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(z)):
        raise ValueError("roots must be finite")
    c = np.array([complex(gamma)])
    for r in _leja_order(z):
        nc = np.zeros(c.size + 1, dtype=np.complex128)
        nc[1:] = c
        nc[:-1] -= r * c
        c = nc
    return Polynomial(c)


def _compose_coeffs(outer, inner):
    acc = np.array([outer.coeffs[-1]])
    ic = inner.coeffs
    for a in outer.coeffs[-2::-1]:
        acc = np.convolve(acc, ic)
        acc[0] += a
    return acc


def poly_compose(outer, inner):
    """outer(inner(z)) by Horner over polynomials."""
    return Polynomial(_compose_coeffs(outer, inner))


def _check_finite(c, family, k):
    if not np.all(np.isfinite(c)):
        raise CoefficientOverflowError(family, k)


def seq_generate(spec):
    """Dense coefficients of q_k^(m).

    Raises CoefficientOverflowError naming the smallest k whose dense
    coefficients overflow.
    """
    fam = spec.family
    with np.errstate(over="ignore", invalid="ignore"):
        if fam == "iterate":
            base = spec.base
            c = np.array(base.coeffs)
            for j in range(2, spec.k + 1):
                c = _compose_coeffs(base, Polynomial(c))
                _check_finite(c, fam, j)
        elif fam == "mandelbrot_center":
            c = np.array([0, 1], dtype=np.complex128)
            for j in range(2, spec.k + 1):
                c = np.convolve(c, c)
                c[1] += 1
                _check_finite(c, fam, j)
        else:
            a, b = spec.interval
            s = 2.0 / (b - a)
            shift = -(a + b) / (b - a)
            x = np.array([shift, s], dtype=np.complex128)
            prev = np.array([1.0 + 0j])
            c = x.copy()
            for j in range(2, spec.k + 1):
                nxt = 2.0 * np.convolve(x, c)
                nxt[:prev.size] -= prev
                prev, c = c, nxt
                _check_finite(c, fam, j)
        p = Polynomial(c)
        for _ in range(spec.m):
            p = poly_derivative(p)
            _check_finite(p.coeffs, fam, spec.k)
    return p


def seq_realize(spec):
    """q_k^(m) as a recursion-backed polynomial (works for every valid spec)."""
    return SequencePolynomial(spec)


# --- textual literals ------------------------------------------------------

_TOKEN = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_coefficient(tok):
    t = tok.strip().replace("−", "-").replace(" ", "").replace("j", "i")
    if not t:
        raise ValueError("empty coefficient in literal")
    if t.endswith("i"):
        body = t[:-1]
        # split real and imaginary parts at the last sign not following an exponent
        cut = None
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                cut = pos
                break
        re_part, im_part = (body[:cut], body[cut:]) if cut is not None else ("", body)
        if im_part in ("", "+", "-"):
            im_part += "1"
        if (re_part and not _TOKEN.match(re_part)) or not _TOKEN.match(im_part):
            raise ValueError(f"malformed complex coefficient {tok!r}")
        return complex(float(re_part) if re_part else 0.0, float(im_part))
    if not _TOKEN.match(t):
        raise ValueError(f"malformed coefficient {tok!r}")
    return complex(float(t), 0.0)


def parse_poly_literal(text):
    """Parse "a0,a1,..." (ascending) into a Polynomial; "-1,0,1" is z^2 - 1."""
    return Polynomial([_parse_coefficient(t) for t in text.split(",")])


def _fmt_real(x):
    return repr(float(x)) if x != int(x) or abs(x) >= 1e16 else str(int(x))


def format_poly_literal(p):
    out = []
    for c in p.coeffs:
        if c.imag == 0:
            out.append(_fmt_real(c.real))
        elif c.real == 0:
            out.append(f"{_fmt_real(c.imag)}i")
        else:
            sign = "+" if c.imag >= 0 else "-"
            out.append(f"{_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}i")
    return ",".join(out)


# --- multiprecision evaluation (diagnostics below double resolution) --------

def _mp_horner(coeffs, z, mp):
    acc = mp.mpc(0)
    for c in coeffs[::-1]:
        acc = acc * z + mp.mpc(complex(c))
    return acc


def _mp_sequence_jet(spec, z, mp):
    """(q_k(z), q_k'(z)) in the current mpmath precision."""
    fam = spec.family
    if fam == "iterate":
        base = spec.base.coeffs
        dbase = poly_derivative(spec.base).coeffs
        w, dw = z, mp.mpc(1)
        for _ in range(spec.k):
            w, dw = _mp_horner(base, w, mp), dw * _mp_horner(dbase, w, mp)
        return w, dw
    if fam == "mandelbrot_center":
        q, dq = z, mp.mpc(1)
        for _ in range(spec.k - 1):
            q, dq = q * q + z, 2 * q * dq + 1
        return q, dq
    a, b = spec.interval
    s = mp.mpf(2) / (mp.mpf(b) - mp.mpf(a))
    x = s * z - (mp.mpf(a) + mp.mpf(b)) / (mp.mpf(b) - mp.mpf(a))
    if spec.k == 0:
        return mp.mpc(1), mp.mpc(0)
    t0, t1, d0, d1 = mp.mpc(1), x, mp.mpc(0), s
    for _ in range(spec.k - 1):
        t0, t1, d0, d1 = t1, 2 * x * t1 - t0, d1, 2 * s * t1 + 2 * x * d1 - d0
    return t1, d1


def mp_value(p, z, mp):
    """p(z) for a Polynomial or a SequencePolynomial, in mpmath arithmetic.

    Sequence members of derivative order m <= 1 use the recursion; higher
    orders need representable dense coefficients.
    """
    z = mp.mpc(z)
    if isinstance(p, Polynomial):
        return _mp_horner(p.coeffs, z, mp)
    m = p.spec.m
    if m <= 1:
        return _mp_sequence_jet(p.spec.with_m(0), z, mp)[m]
    return _mp_horner(p.dense().coeffs, z, mp)
