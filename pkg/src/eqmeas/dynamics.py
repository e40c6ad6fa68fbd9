"""Escape-time Green's functions, filled Julia sets, Brolin sampling, capacities."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .measure import DiscreteMeasure
from .poly import CoefficientOverflowError, Polynomial, mp_value
from .roots import _quadratic_roots, solve_level

MEMBER_ITER = 256
GREEN_ITER = 1024
BURN_IN = 50
_LOG_CAP = 700.0


# --- escape radius ----------------------------------------------------------

def log_escape_radius(p):
    """log R0 with R0 = max(2, 2 (1 + sum_{j<n} |a_j|) / |a_n|).

    Kept in log form: for sequence members the coefficient sum leaves the
    double range (about 1e362 for the Mandelbrot q_12).
    """
    n = p.degree
    if n < 2:
        raise ValueError("escape radius needs degree >= 2")
    try:
        c = p.dense().coeffs
        s = math.fsum(np.abs(c[:n]))
        lsum = math.log1p(s)
    except CoefficientOverflowError:
        # log(1 + sum_all - |a_n|), the full sum dwarfs both 1 and |a_n|
        ltot = float(p.log_abs_scale(1.0))
        lsum = ltot + math.log1p(-math.exp(p.log_abs_gamma - ltot))
    return max(math.log(2.0), math.log(2.0) + lsum - p.log_abs_gamma)


def escape_radius(p):
    """Radius R0 beyond which |p(z)| >= 2|z|; checked on the circle |z| = R0.

    Returns inf when R0 itself exceeds the double range.
    """
    lr = log_escape_radius(p)
    if lr < _LOG_CAP:
        R = math.exp(lr)
        z = R * np.exp(2j * np.pi * (np.arange(64) + 0.5) / 64)
        lp = p.log_abs(z)
        if np.any(lp < math.log(2.0) + lr - 1e-9):
            raise ArithmeticError(f"escape radius {R!r} fails |p(z)| >= 2|z|")
        return R
    return math.inf


def _log_bail(p, log_r0):
    # Boettcher's asymptotics log|w| + log|gamma|/(d-1) is off by about
    # d rho / |w| for roots within rho; bail out once that is far below eps
    return max(log_r0, 40.0 + math.log(p.degree))


def _escape(p, z, max_iter):
    zs = np.ascontiguousarray(np.asarray(z, dtype=np.complex128).reshape(-1))
    lr = log_escape_radius(p)
    return K.escape_many(*p.kernel_args(), zs, int(max_iter), lr, _log_bail(p, lr))


def _green_from_orbit(p, esc, fin, logs):
    d = p.degree
    g = np.zeros(esc.size)
    out = esc >= 0
    if np.any(out):
        tail = p.log_abs_gamma / (d - 1)
        with np.errstate(under="ignore"):
            val = (logs[out] + tail) * np.power(float(d), -fin[out].astype(float))
        # keep escaping points strictly positive even after underflow
        g[out] = np.maximum(val, np.nextafter(0.0, 1.0))
    return g


def escape_green(p, z, max_iter=GREEN_ITER):
    """Green's function of the basin of infinity of p at z (0 on K(p)).

    The orbit is followed past the escape radius to a bailout where
    d^-j (log|w_j| + log|gamma| / (d - 1)) is accurate to rounding.
    """
    zs = np.asarray(z, dtype=np.complex128)
    esc, fin, logs = _escape(p, zs, max_iter)
    g = _green_from_orbit(p, esc, fin, logs)
    return float(g[0]) if zs.ndim == 0 else g.reshape(zs.shape)


def filled_julia_member(p, z, max_iter=MEMBER_ITER):
    """True where the orbit stays within the escape radius for max_iter steps."""
    zs = np.asarray(z, dtype=np.complex128)
    esc, _, _ = _escape(p, zs, max_iter)
    inside = esc < 0
    return bool(inside[0]) if zs.ndim == 0 else inside.reshape(zs.shape)


def mp_escape_green(p, z, mp, max_iter=GREEN_ITER):
    """escape_green in the current mpmath precision (bailout |w| > 10^(dps/2))."""
    d = p.degree
    lr = log_escape_radius(p)
    lbail = max(lr, 0.5 * mp.mp.dps * math.log(10.0) + math.log(d))
    w = mp.mpc(z)
    tail = mp.mpf(p.log_abs_gamma) / (d - 1)
    escaped = False
    for j in range(max_iter + 1):
        lw = mp.log(abs(w)) if w != 0 else -mp.inf
        if lw > lr:
            escaped = True
        if escaped and lw > lbail:
            return (lw + tail) / mp.mpf(d) ** j
        if j == max_iter:
            break
        w = mp_value(p, w, mp)
    if escaped:
        raise ArithmeticError("orbit escaped but did not reach the bailout")
    return mp.mpf(0)


# --- reference domains -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReferenceDomain:
    """A compact K with its Green's function g on the unbounded complement.

    Build with :meth:`disk`, :meth:`interval`, :meth:`filled_julia` or
    :meth:`mandelbrot`.
    """

    kind: str
    radius: float = 1.0
    center: complex = 0j
    bounds: tuple = (-1.0, 1.0)
    base: object = None
    k_ref: int = 16
    max_iter: int = GREEN_ITER

    @classmethod
    def disk(cls, r=1.0, center=0j):
        if not r > 0:
            raise ValueError("radius must be positive")
        return cls("disk", radius=float(r), center=complex(center))

    @classmethod
    def interval(cls, a=-1.0, b=1.0):
        if not b > a:
            raise ValueError("need a < b")
        return cls("interval", bounds=(float(a), float(b)))

    @classmethod
    def filled_julia(cls, base, max_iter=GREEN_ITER):
        if base.degree < 2:
            raise ValueError("filled Julia set needs degree >= 2")
        return cls("filled_julia", base=base, max_iter=int(max_iter))

    @classmethod
    def mandelbrot(cls, k_ref=16):
        """M with g approximated by (1/n) log|q_{k_ref}|, n = 2^(k_ref - 1)."""
        from .poly import PolySequenceSpec, SequencePolynomial

        q = SequencePolynomial(PolySequenceSpec("mandelbrot_center", int(k_ref)))
        return cls("mandelbrot", base=q, k_ref=int(k_ref))

    @property
    def capacity(self):
        if self.kind == "disk":
            return self.radius
        if self.kind == "interval":
            a, b = self.bounds
            return 0.25 * (b - a)
        if self.kind == "filled_julia":
            return cap_filled_julia(self.base)
        return 1.0

    @property
    def outer_radius(self):
        """Radius of a closed disk about 0 containing K."""
        if self.kind == "disk":
            return abs(self.center) + self.radius
        if self.kind == "interval":
            return max(abs(self.bounds[0]), abs(self.bounds[1]))
        if self.kind == "mandelbrot":
            return 2.0
        from .poly import julia_radius_hint

        return abs(self.base.centroid()) + julia_radius_hint(self.base)

    @property
    def has_closed_form(self):
        return self.kind in ("disk", "interval")

    def _u(self, z):
        a, b = self.bounds
        return (2 * z - (a + b)) / (b - a)

    def green(self, z, dps=None):
        """g at z (scalar or array); with ``dps`` a list/scalar of mpmath values."""
        if dps is not None:
            return self._green_mp(z, dps)
        zs = np.asarray(z, dtype=np.complex128)
        if self.kind == "disk":
            with np.errstate(divide="ignore"):
                g = np.maximum(0.0, np.log(np.abs(zs - self.center) / self.radius))
        elif self.kind == "interval":
            u = self._u(zs)
            g = np.maximum(0.0, np.log(np.abs(u + np.sqrt(u - 1) * np.sqrt(u + 1))))
        elif self.kind == "filled_julia":
            g = escape_green(self.base, zs, self.max_iter)
        else:
            n = self.base.degree
            g = np.maximum(0.0, self.base.log_abs(zs) / n)
        return float(g) if np.ndim(g) == 0 else g

    def _green_mp(self, z, dps):
        import mpmath

        with mpmath.workdps(dps):
            zs = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
            out = []
            for zz in zs:
                c = mpmath.mpc(zz)
                if self.kind == "disk":
                    g = mpmath.log(abs(c - mpmath.mpc(self.center)) / self.radius)
                elif self.kind == "interval":
                    a, b = self.bounds
                    u = (2 * c - (mpmath.mpf(a) + b)) / (mpmath.mpf(b) - a)
                    g = mpmath.log(abs(u + mpmath.sqrt(u - 1) * mpmath.sqrt(u + 1)))
                elif self.kind == "filled_julia":
                    g = mp_escape_green(self.base, c, mpmath, self.max_iter)
                else:
                    g = mpmath.log(abs(mp_value(self.base, c, mpmath))) / self.base.degree
                out.append(max(mpmath.mpf(0), g))
            return out if np.ndim(z) else out[0]

    def green_cderiv(self, z):
        """2 dg/dz where a closed form exists (disk, interval); else None."""
        zs = np.asarray(z, dtype=np.complex128)
        if self.kind == "disk":
            return 1 / (zs - self.center)
        if self.kind == "interval":
            a, b = self.bounds
            u = self._u(zs)
            return (2 / (b - a)) / (np.sqrt(u - 1) * np.sqrt(u + 1))
        return None

    def boundary_sample(self, n):
        """n boundary points: circle for a disk, Chebyshev-Lobatto for an interval."""
        n = int(n)
        if self.kind == "disk":
            return self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)
        if self.kind == "interval":
            a, b = self.bounds
            x = np.cos(np.pi * np.arange(n) / (n - 1)) if n > 1 else np.zeros(1)
            return 0.5 * (a + b) + 0.5 * (b - a) * x + 0j
        raise ValueError(f"no closed-form boundary sampler for a {self.kind} domain")


# --- Brolin sampling ---------------------------------------------------------

def brolin_sample(p, n_samples, burn_in=BURN_IN, seed=0):
    """Random backward orbit of p: equal-weight atoms approximating the Brolin measure.

    Starts at escape_radius + 1 and at each step jumps to a uniformly
    chosen root (with multiplicity) of p(z) = current point.
    """
    n_samples = int(n_samples)
    if p.degree < 2:
        raise ValueError("Brolin sampling needs degree >= 2")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    R = escape_radius(p)
    z = complex(min(R, 1e8) + 1.0)
    quad = isinstance(p, Polynomial) and p.degree == 2
    out = np.empty(n_samples, dtype=np.complex128)
    for step in range(burn_in + n_samples):
        if quad:
            roots = _quadratic_roots(p.coeffs, z)
        else:
            rs = solve_level(p, z)
            if not rs.complete:
                raise ArithmeticError(f"root solver failed at Brolin step {step}")
            roots = rs.roots
        z = complex(roots[rng.integers(roots.size)])
        if step >= burn_in:
            out[step - burn_in] = z
    return DiscreteMeasure(out)


# --- capacities --------------------------------------------------------------

def log_cap_filled_julia(p):
    n = p.degree
    if n < 2:
        raise ValueError("needs degree >= 2")
    return -p.log_abs_gamma / (n - 1)


def cap_filled_julia(p):
    """Cap K(p) = |gamma|^(-1/(n-1))."""
    lc = log_cap_filled_julia(p)
    g = abs(p.gamma)
    if 0 < g < math.inf:
        return g ** (-1.0 / (p.degree - 1))
    return math.exp(lc)


def cap_preimage(p, cap_L):
    """Cap p^-1(L) = (Cap L / |gamma|)^(1/n)."""
    if not cap_L > 0:
        raise ValueError("cap_L must be positive")
    g = abs(p.gamma)
    if 0 < g < math.inf and 0 < cap_L / g < math.inf:
        return (cap_L / g) ** (1.0 / p.degree)
    return math.exp((math.log(cap_L) - p.log_abs_gamma) / p.degree)


# --- Green field -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GreenField:
    bbox: tuple  # (x0, y0, x1, y1)
    resolution: tuple  # (width, height)
    values: np.ndarray  # (height, width), top row first
    inside_mask: np.ndarray


def pixel_centers(bbox, resolution):
    """Complex pixel centers, shape (height, width), top row first."""
    x0, y0, x1, y1 = map(float, bbox)
    W, H = map(int, resolution)
    xs = x0 + (np.arange(W) + 0.5) * (x1 - x0) / W
    ys = y1 - (np.arange(H) + 0.5) * (y1 - y0) / H
    return xs[None, :] + 1j * ys[:, None]


def green_field(p, bbox, resolution, max_iter=MEMBER_ITER, threads=None):
    """Escape-time Green values and membership at pixel centers (row-parallel)."""
    W, H = map(int, resolution)
    if W < 1 or H < 1:
        raise ValueError("resolution must be positive")
    grid = pixel_centers(bbox, (W, H))
    lr = log_escape_radius(p)
    lb = _log_bail(p, lr)
    args = p.kernel_args()

    def run(rows):
        zs = np.ascontiguousarray(grid[rows].ravel())
        return K.escape_many(*args, zs, int(max_iter), lr, lb)

    chunks = [slice(i, min(i + 16, H)) for i in range(0, H, 16)]
    with ThreadPoolExecutor(max_workers=threads or 1) as ex:
        parts = list(ex.map(run, chunks))
    esc = np.concatenate([q[0] for q in parts])
    fin = np.concatenate([q[1] for q in parts])
    logs = np.concatenate([q[2] for q in parts])
    g = _green_from_orbit(p, esc, fin, logs).reshape(H, W)
    inside = (esc < 0).reshape(H, W)
    return GreenField(tuple(map(float, bbox)), (W, H), g, inside)
