"""Regularity diagnostics, balanced pullbacks and convergence experiments."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import measure as ms
from .dynamics import (ReferenceDomain, brolin_sample, cap_filled_julia, cap_preimage,
                       log_cap_filled_julia)
from .poly import SequencePolynomial, mp_value
from .roots import cluster_roots, find_roots, solve_level

log = logging.getLogger(__name__)

N_ANGLES = 64
N_PROBE = 256
PROBE_R = 2.0
EPS_LIST = (0.05, 0.1, 0.2, 0.5)
CLUSTER_EPS = 1e-6
ENERGY_ATOMS = 4096


# --- balanced pullback -------------------------------------------------------

def _fiber_levels(r, n_angles):
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    return theta, r * np.exp(1j * theta)


def pullback_fibers(p, r, n_angles=N_ANGLES, threads=None):
    """Root sets of p(z) = r e^(i theta_j), theta_j = 2 pi j / n_angles.

    Fiber 0 starts cold; every other fiber is warm-started from the roots
    of fiber 0, so each solve is independent of the others and results do
    not depend on the thread count.
    """
    if p.degree < 1:
        raise ValueError("pullback needs degree >= 1")
    if not r > 0:
        raise ValueError("r must be positive")
    n_angles = int(n_angles)
    if n_angles < 1:
        raise ValueError("n_angles must be positive")
    theta, ws = _fiber_levels(r, n_angles)

    def check(j, rs):
        # fundamental theorem of algebra, as a runtime assertion
        if rs.total_multiplicity != p.degree:
            raise ArithmeticError(f"fiber theta={theta[j]!r}: {rs.total_multiplicity} roots for degree {p.degree}")
        if not rs.complete:
            raise ArithmeticError(f"fiber theta={theta[j]!r}: root solver did not converge")
        return rs

    first = check(0, solve_level(p, ws[0]))
    seed = first.roots

    def solve(j):
        rs = solve_level(p, ws[j], initial=seed)
        if not rs.complete:
            rs = solve_level(p, ws[j])
        return check(j, rs)

    with ThreadPoolExecutor(max_workers=threads or 1) as ex:
        rest = list(ex.map(solve, range(1, n_angles)))
    return [first] + rest


def pullback_equilibrium(p, r, n_angles=N_ANGLES, threads=None):
    """Balanced pullback of the uniform measure on |w| = r.

    Each root of each fiber, with multiplicity mult, gets weight
    mult / (n * n_angles).
    """
    fibers = pullback_fibers(p, r, n_angles, threads)
    n, N = p.degree, len(fibers)
    total = sum(Fraction(int(m), n * N) for rs in fibers for m in rs.multiplicities)
    if total != 1:
        raise ArithmeticError(f"pullback mass is {total}, not 1")
    pts = np.concatenate([rs.points for rs in fibers])
    w = np.concatenate([rs.multiplicities for rs in fibers]) / (n * N)
    return ms.DiscreteMeasure(pts, w)


# --- regularity reports ------------------------------------------------------

@dataclass(frozen=True)
class RegularityReport:
    k: int
    m: int
    R: float
    degree: int
    sup_error: float
    logderiv_error: object  # float, or None without a closed-form g'
    centering_counts: dict = field(default_factory=dict)
    cluster_report: object = None

    def to_dict(self):
        cr = self.cluster_report
        return {
            "k": self.k, "m": self.m, "R": self.R, "degree": self.degree,
            "sup_error": self.sup_error,
            "logderiv_error": self.logderiv_error,
            "centering_counts": {repr(float(e)): int(c) for e, c in self.centering_counts.items()},
            "cluster_report": None if cr is None else {
                "epsilon": cr.epsilon,
                "clusters": [{"re": c.real, "im": c.imag, "multiplicity": m} for c, m in cr.clusters],
            },
        }


def probe_points(R, n_probe, rotation=0.0):
    return R * np.exp(1j * (2 * np.pi * np.arange(n_probe) / n_probe + rotation))


def _check_radius(domain, R):
    # R = outer radius is allowed: M touches |c| = 2 only at c = -2
    if not R >= domain.outer_radius:
        raise ValueError(f"R = {R} is inside the domain's outer radius {domain.outer_radius:.6g}")


def _mp_sup_error(q, domain, z, dps):
    import mpmath

    with mpmath.workdps(dps):
        g = domain.green(z, dps=dps)
        errs = [abs(mpmath.log(abs(mp_value(q, zz, mpmath))) / q.degree - gg)
                for zz, gg in zip(z, g)]
        return float(max(errs))


def centering_counts(points, multiplicities, domain, eps_list):
    g = np.asarray(domain.green(points), dtype=float)
    return {float(e): int(np.sum(multiplicities[g >= e])) for e in sorted(eps_list)}


def kreg_error(spec, domain, R=PROBE_R, n_probe=N_PROBE, *, eps_list=EPS_LIST,
               cluster_eps=CLUSTER_EPS, with_roots=True, dps=None, rotation=0.0):
    """Sup over |z| = R of |(1/deg) log|q(z)| - g(z)| for q = q_k^(m).

    With ``dps`` the comparison runs in mpmath at that many digits, which
    resolves errors far below double precision.  Root-based fields
    (centering counts, clusters) are filled when ``with_roots``.
    """
    _check_radius(domain, R)
    q = SequencePolynomial(spec)
    z = probe_points(R, int(n_probe), rotation)
    if dps is None:
        err = float(np.max(np.abs(q.log_abs(z) / q.degree - domain.green(z))))
    else:
        err = _mp_sup_error(q, domain, z, dps)
    gd = domain.green_cderiv(z)
    lderr = None
    if gd is not None:
        lderr = float(np.max(np.abs(q.log_derivative(z) / q.degree - gd)))
    counts, clusters = {}, None
    if with_roots:
        rs = find_roots(q)
        counts = centering_counts(rs.points, rs.multiplicities, domain, eps_list)
        clusters = cluster_roots(rs, cluster_eps)
    return RegularityReport(spec.k, spec.m, float(R), q.degree, err, lderr, counts, clusters)


@dataclass(frozen=True)
class HereditySteps:
    k: int
    lower: RegularityReport  # order m
    upper: RegularityReport  # order m + 1
    difference: float

    def to_dict(self):
        return {"k": self.k, "difference": self.difference,
                "m": self.lower.to_dict(), "m_plus_1": self.upper.to_dict()}


def heredity_check(spec, domain, R=PROBE_R, k_list=(), n_probe=N_PROBE, **kw):
    """Reports for orders m and m+1 at each k, plus
    sup_{|z|=R} |(1/(n-m-1)) log|q^(m+1)| - (1/(n-m)) log|q^(m)||.
    """
    kw.setdefault("with_roots", False)
    out = []
    z = probe_points(R, int(n_probe))
    for k in k_list:
        s0 = spec.with_k(k)
        s1 = s0.with_m(s0.m + 1)
        q0, q1 = SequencePolynomial(s0), SequencePolynomial(s1)
        d = float(np.max(np.abs(q1.log_abs(z) / q1.degree - q0.log_abs(z) / q0.degree)))
        out.append(HereditySteps(k, kreg_error(s0, domain, R, n_probe, **kw),
                                 kreg_error(s1, domain, R, n_probe, **kw), d))
    return out


def centering_check(p, domain, eps_list=EPS_LIST):
    """Number of roots (with multiplicity) with g(root) >= eps, per eps."""
    rs = find_roots(p)
    return centering_counts(rs.points, rs.multiplicities, domain, eps_list)


# --- convergence experiments --------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRecord:
    k: int
    degree: int
    gamma_abs: object  # float, or None when |gamma| overflows
    log_gamma_abs: float
    capacity: float
    energy: float
    moments: ms.MomentVector
    n_atoms: int

    def to_dict(self):
        return {"k": self.k, "degree": self.degree, "gamma_abs": self.gamma_abs,
                "log_gamma_abs": self.log_gamma_abs, "capacity": self.capacity,
                "energy": self.energy, "moments": self.moments.to_dict(),
                "n_atoms": self.n_atoms}


@dataclass(frozen=True)
class ConvergenceReport:
    family: str
    m: int
    source: str
    r: object
    moment_scale: float
    records: list
    consecutive_distances: list  # [{"k0", "k1", "distance"}]
    reference_distances: object  # [{"k", "distance"}] or None

    def to_dict(self):
        return {"family": self.family, "m": self.m, "source": self.source, "r": self.r,
                "moment_scale": self.moment_scale,
                "records": [rec.to_dict() for rec in self.records],
                "consecutive_distances": self.consecutive_distances,
                "reference_distances": self.reference_distances}


def _is_monomial(p):
    c = p.coeffs
    return bool(np.all(c[:-1] == 0))


def reference_domain_for(spec):
    """Closed-form limit domain K of the family, or None."""
    fam = spec.family
    if fam == "chebyshev_interval":
        return ReferenceDomain.interval(*spec.interval)
    if fam == "iterate":
        b = spec.base
        if _is_monomial(b):
            return ReferenceDomain.disk(cap_filled_julia(b))
        if b.degree == 2 and np.allclose(b.coeffs, [-2, 0, 1], rtol=0, atol=0):
            return ReferenceDomain.interval(-2.0, 2.0)
    return None


def _reference_measure(spec, q, source, r):
    """Closed-form equilibrium measure the k-th sample is compared against."""
    if spec.family == "iterate" and _is_monomial(spec.base) and spec.m == 0:
        # the sampled set itself is a disk, known exactly
        rad = cap_preimage(q, r) if source == "pullback" else cap_filled_julia(q)
        return ms.reference_equilibrium(ReferenceDomain.disk(rad), 64)
    dom = reference_domain_for(spec)
    if dom is None:
        return None
    return ms.reference_equilibrium(dom, 4096)


def _brolin(spec, q, n_samples, burn_in, seed):
    if spec.family == "iterate" and spec.m == 0:
        # backward orbits of q^k are backward orbits of the base, k steps at a time
        return brolin_sample(spec.base, n_samples, burn_in, seed)
    return brolin_sample(q, n_samples, burn_in, seed)


def converge_experiment(spec, k_list, source="pullback", r=1.0, M=ms.MOMENT_ORDER,
                        n_angles=N_ANGLES, n_samples=4096, burn_in=50, seed=0,
                        energy_atoms=ENERGY_ATOMS, threads=None):
    """Sample the measure of q_k^(m) for each k and compare across k.

    ``source`` is "pullback" (balanced pullback of |w| = r) or "brolin".
    Energies use at most ``energy_atoms`` atoms (a strided subsample);
    moments are taken after rescaling all supports by a common 2^-j into
    |z| <= 4.
    """
    if source not in ("pullback", "brolin"):
        raise ValueError("source must be 'pullback' or 'brolin'")
    ks = sorted(int(k) for k in k_list)
    if not ks:
        raise ValueError("empty k list")
    polys, measures, refs = [], [], []
    for k in ks:
        q = SequencePolynomial(spec.with_k(k))
        if source == "pullback":
            mu = pullback_equilibrium(q, r, n_angles, threads)
        else:
            mu = _brolin(spec, q, n_samples, burn_in, seed)
        log.info("k=%d: %d atoms", k, len(mu))
        polys.append(q)
        measures.append(mu)
        refs.append(_reference_measure(spec, q, source, r))
    scale = ms.support_scale(measures + [x for x in refs if x is not None])

    records, mvs = [], []
    for k, q, mu in zip(ks, polys, measures):
        mv = ms.moments(mu.scaled(scale), M)
        mvs.append(mv)
        if source == "pullback":
            cap = cap_preimage(q, r)
        else:
            cap = math.exp(log_cap_filled_julia(q))
        lg = q.log_abs_gamma
        ga = math.exp(lg) if lg < 709 else None
        e = ms.energy(mu.subsample(energy_atoms)) if len(mu) > 1 else float("nan")
        records.append(ConvergenceRecord(k, q.degree, ga, lg, cap, e, mv, len(mu)))
    cons = [{"k0": ks[i], "k1": ks[i + 1],
             "distance": ms.moment_vector_distance(mvs[i], mvs[i + 1])}
            for i in range(len(ks) - 1)]
    refd = None
    if all(x is not None for x in refs):
        refd = [{"k": k, "distance": ms.moment_vector_distance(mv, ms.moments(ref.scaled(scale), M))}
                for k, mv, ref in zip(ks, mvs, refs)]
    return ConvergenceReport(spec.family, spec.m, source, r if source == "pullback" else None,
                             scale, records, cons, refd)
