"""Simultaneous root finding, level sets q(z) = w, and zero clusters."""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels as K
from .poly import Polynomial

log = logging.getLogger(__name__)

MAX_SWEEPS = 200
STEP_TOL = 1e-13
RESIDUAL_TOL = 1e-8
MULTIPLICITY_RADIUS = 1e-8


@dataclass(frozen=True, eq=False)
class RootSet:
    """Roots of p - w: distinct points with multiplicities.

    ``residuals`` are backward errors |p(z) - w| / (sum |a_j| |z|^j + |w|);
    a root whose residual exceeds 1e-8 is flagged in ``converged``.
    """

    points: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    degree: int

    @property
    def roots(self):
        """Roots repeated according to multiplicity."""
        return np.repeat(self.points, self.multiplicities)

    @property
    def total_multiplicity(self):
        return int(self.multiplicities.sum())

    @property
    def complete(self):
        return self.total_multiplicity == self.degree and bool(np.all(self.converged))

    def __len__(self):
        return self.total_multiplicity


@dataclass(frozen=True)
class ZeroClusterReport:
    clusters: list  # [(center, multiplicity)]
    epsilon: float

    @property
    def centers(self):
        return np.array([c for c, _ in self.clusters], dtype=np.complex128)

    @property
    def multiplicities(self):
        return np.array([m for _, m in self.clusters], dtype=np.int64)


# Scale floor: the coefficient sum is taken at |z| >= this radius, so a root
# at 0 of a polynomial with a_0 = 0 gets a meaningful backward error.
_SCALE_FLOOR = 1e-8


def _backward_errors(p, z, w, zero_mult=0):
    if z.size == 0:
        return np.zeros(0)
    T, E = p.jet(z, 0)
    lf = _log_abs_shifted(T[:, 0], E, w)
    r = np.maximum(np.abs(z), _SCALE_FLOOR)
    ls = p.log_abs_scale(r)
    if zero_mult:
        # residual of the deflated polynomial p / z^m
        lr = np.log(np.abs(z))
        lf = lf - zero_mult * lr
        ls = ls - zero_mult * np.log(r)
    if w != 0:
        ls = np.logaddexp(ls, math.log(abs(w)))
    with np.errstate(invalid="ignore", over="ignore"):
        return np.exp(lf - ls)


def _log_abs_shifted(t0, e, w):
    """log|t0 * 2**e - w| without leaving the double range."""
    ws = np.ldexp(complex(w).real, -e) + 1j * np.ldexp(complex(w).imag, -e)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.log(np.abs(t0 - ws)) + e * K.LN2
    big = ~np.isfinite(ws)  # w dominates where 2**-e overflows
    if np.any(big):
        out[big] = math.log(abs(w))
    return out


def _log_derivatives(p, w, z, zero_mult):
    """p'/(p - w) at z, minus zero_mult/z for roots at 0 deflated implicitly.

    Also returns |p - w| / |p'| (the Newton step length).
    """
    T, E = p.jet(z, 1)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ws = np.ldexp(w.real, -E) + 1j * np.ldexp(w.imag, -E)
        f = T[:, 0] - ws
        fp = T[:, 1]
        big = ~np.isfinite(f)
        # |w| dwarfs p(z) there: the log-derivative of p - w is ~ -p'/w
        ld = np.where(big, 0j, fp / f)
        if np.any(big):
            ld[big] = -(fp[big] * np.exp2(E[big].astype(float))) / w
        ld = np.where(f == 0, np.inf + 0j, ld)
        if zero_mult:
            ld = ld - zero_mult / z
    return ld


def _aberth(p, w, z, max_sweeps, zero_mult=0):
    z = np.array(z, dtype=np.complex128)
    active = np.arange(z.size)
    w = complex(w)
    for sweep in range(max_sweeps):
        ld = _log_derivatives(p, w, z[active], zero_mult)
        delta = K.aberth_deltas(z, active, ld)
        z[active] -= delta
        done = np.abs(delta) <= STEP_TOL * (1.0 + np.abs(z[active]))
        active = active[~done]
        if active.size == 0:
            return z, sweep + 1
    return z, max_sweeps


def _inclusion_radii(p, w, z, zero_mult):
    """Newton inclusion radii nt (|p - w| + noise) / |p'|.

    For dense polynomials ``noise`` is the Horner rounding level
    4 eps sum |a_j| |z|^j, so the disc also covers the pseudo-zeros a root of
    multiplicity > 1 smears into.  The sequence families are evaluated by
    their recursions, far more accurately than their coefficient sums
    suggest, so they use a running error bound of the recursion instead.
    """
    if z.size == 0:
        return np.zeros(0)
    w = complex(w)
    T, E = p.jet(z, 1)
    lf = _log_abs_shifted(T[:, 0], E, w)
    if isinstance(p, Polynomial):
        lnoise = p.log_abs_scale(z) + math.log(4 * np.finfo(float).eps)
        if w != 0:
            lnoise = np.logaddexp(lnoise, math.log(4 * np.finfo(float).eps * abs(w)))
    else:
        _, R, Er = p.jet_error(z, 0)
        with np.errstate(divide="ignore"):
            lnoise = np.log(R[:, 0]) + Er * K.LN2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # log|f'/f| of the (implicitly deflated) polynomial
        ld = np.abs(_log_derivatives(p, w, z, zero_mult))
        ltot = np.logaddexp(lf, lnoise)
        r = (p.degree - zero_mult) * np.exp(ltot - lf) / ld
    return np.where(np.isfinite(r), r, 0.0)


def _separate(z):
    """Nudge coincident starting points apart (deterministic)."""
    z = np.array(z, dtype=np.complex128)
    order = np.lexsort((z.imag, z.real))
    zs = z[order]
    dup = np.flatnonzero(zs[1:] == zs[:-1]) + 1
    for n, i in enumerate(dup):
        zs[i] += 1e-7 * (1 + abs(zs[i])) * cmath.exp(1j * (0.7 + 2.1 * n))
    z[order] = zs
    return z


def _quadratic_roots(c, w):
    a0, a1 = complex(c[0]) - w, complex(c[1])
    if c.size == 2:
        return np.array([-a0 / a1])
    a2 = complex(c[2])
    disc = cmath.sqrt(a1 * a1 - 4 * a2 * a0)
    s = a1 + disc if abs(a1 + disc) >= abs(a1 - disc) else a1 - disc
    if s == 0:
        return np.array([0j, 0j])
    q = -0.5 * s
    return np.array([q / a2, a0 / q])


def solve_level(p, w=0.0, *, initial=None, max_sweeps=MAX_SWEEPS,
                multiplicity_radius=MULTIPLICITY_RADIUS):
    """Roots of p(z) = w counted with multiplicity.

    Aberth-Ehrlich iteration from ``initial`` (a warm start) or from
    equispaced points on a circle around the roots.  Near-coincident roots
    are merged afterwards and reported as one root with multiplicity.
    """
    n = p.degree
    if n < 1:
        raise ValueError("need a polynomial of degree >= 1")
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValueError("level must be finite")

    zero_mult = p.monomial_order() if w == 0 else 0
    target = p
    if zero_mult and isinstance(p, Polynomial):
        target = Polynomial(p.coeffs[zero_mult:])
        zero_mult_implicit = 0
    else:
        # deflate the roots at 0 inside the Aberth correction, keeping the
        # recursion-based evaluation of the sequence families
        zero_mult_implicit = zero_mult

    nt = n - zero_mult
    if nt == 0:
        z = np.zeros(0, dtype=np.complex128)
    elif isinstance(target, Polynomial) and nt <= 2:
        z = _quadratic_roots(target.coeffs, w)
    else:
        if initial is not None and len(initial) == nt:
            z0 = _separate(initial)
        else:
            z0 = target.start_points(w, nt)
        z, _ = _aberth(target, w, z0, max_sweeps, zero_mult_implicit)

    base = multiplicity_radius * (1 + (np.max(np.abs(z)) if z.size else 0))
    radii = _inclusion_radii(target, w, z, zero_mult_implicit)
    pts, mult = _merge_close(z, base, radii)
    res = _backward_errors(target, pts, w, zero_mult_implicit)
    conv = res <= RESIDUAL_TOL
    if zero_mult:
        pts = np.append(pts, 0j)
        mult = np.append(mult, zero_mult)
        res = np.append(res, 0.0)
        conv = np.append(conv, True)
    rs = RootSet(pts, mult.astype(np.int64), res, conv, n)
    if not np.all(conv):
        log.info("%d of %d roots unconverged (max residual %.3g)",
                 int(np.sum(~conv)), pts.size, float(np.max(res)))
    return rs


def find_roots(p, **kw):
    """All roots of p with multiplicity."""
    return solve_level(p, 0.0, **kw)


def _union_find_groups(n, pairs):
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj
    roots = np.array([find(i) for i in range(n)])
    return roots


def _merge_close(z, radius, radii=None):
    """Merge points closer than ``radius`` or with overlapping inclusion discs.

    Centers are means and sizes are counts.  A multiple root splits its
    approximations over a distance ~ eps**(1/m), far beyond ``radius``, but
    their Newton inclusion discs overlap.
    """
    if z.size == 0:
        return z, np.zeros(0, dtype=np.int64)
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if radii is not None and radii.size:
        # cap the search so one badly conditioned point cannot swallow all
        rr = np.minimum(radii, 1e-3 * (1 + np.abs(z)))
        cand = tree.query_pairs(max(radius, 2 * float(rr.max())), output_type="ndarray")
        if cand.size:
            d = np.abs(z[cand[:, 0]] - z[cand[:, 1]])
            keep = d <= np.maximum(radius, rr[cand[:, 0]] + rr[cand[:, 1]])
            pairs = np.unique(np.vstack([pairs.reshape(-1, 2), cand[keep]]), axis=0)
    if pairs.size == 0:
        return z.copy(), np.ones(z.size, dtype=np.int64)
    labels = _union_find_groups(z.size, pairs)
    uniq, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    g = remap[inv]
    counts = np.bincount(g)
    sums = np.bincount(g, weights=z.real) + 1j * np.bincount(g, weights=z.imag)
    return sums / counts, counts


def _sort_key(z):
    return np.lexsort((np.angle(z), np.abs(z)))


def cluster_roots(rs, epsilon):
    """Group roots within ``epsilon`` into clusters with multiplicities.

    Roots are processed sorted by modulus then argument; clusters are the
    connected components at distance ``epsilon``, merged further until
    their centers are more than 2*epsilon apart.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    z = rs.points
    m = rs.multiplicities
    order = _sort_key(z)
    z, m = z[order], m[order]
    if z.size == 0:
        return ZeroClusterReport([], float(epsilon))
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    labels = _union_find_groups(z.size, tree.query_pairs(epsilon, output_type="ndarray"))
    centers, mults = _weighted_groups(z, m, labels)
    while centers.size > 1:
        tree = cKDTree(np.column_stack([centers.real, centers.imag]))
        pairs = tree.query_pairs(2 * epsilon, output_type="ndarray")
        if pairs.size == 0:
            break
        labels = _union_find_groups(centers.size, pairs)
        centers, mults = _weighted_groups(centers, mults, labels)
    clusters = [(complex(c), int(k)) for c, k in zip(centers, mults)]
    return ZeroClusterReport(clusters, float(epsilon))


def _weighted_groups(z, m, labels):
    uniq, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    g = remap[inv]
    mults = np.bincount(g, weights=m).astype(np.int64)
    sums = np.bincount(g, weights=m * z.real) + 1j * np.bincount(g, weights=m * z.imag)
    return sums / mults, mults


def root_measure(rs):
    """Root distribution: atoms at the roots, weight multiplicity / degree."""
    from .measure import DiscreteMeasure

    if rs.total_multiplicity != rs.degree:
        raise ValueError("root set is incomplete: multiplicities do not sum to the degree")
    return DiscreteMeasure(rs.points, rs.multiplicities / rs.degree)


def format_roots_csv(rs):
    lines = ["re,im,multiplicity,residual"]
    for z, m, r in zip(rs.points, rs.multiplicities, rs.residuals):
        lines.append(f"{float(z.real)!r},{float(z.imag)!r},{int(m)},{float(r)!r}")
    return "\n".join(lines) + "\n"
