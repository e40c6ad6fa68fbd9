"""Acceptance criteria 1-8.

Each criterion is measured once (module fixture) as a set of named checks.
Its verdict is printed as one line, both immediately and in the terminal
summary.  Checks that are known not to hold at the stated tolerance are
asserted in separate strict-xfail tests, so they are neither hidden nor
weakened; the analysis is in the decisions ledger.

Run with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from conftest import ACCEPTANCE_LINES
from eqmeas.dynamics import (ReferenceDomain, brolin_sample, cap_filled_julia, cap_preimage,
                             escape_radius, filled_julia_member)
from eqmeas.measure import (DiscreteMeasure, MomentVector, energy, moment_vector_distance, moments,
                            potential_at, potential_cderiv)
from eqmeas.poly import Polynomial, PolySequenceSpec, SequencePolynomial
from eqmeas.regularity import (converge_experiment, heredity_check, kreg_error, pullback_equilibrium,
                               pullback_fibers)
from eqmeas.render import GREEN, MANDELBROT_BBOX, encode_ppm, pixel_index, render
from eqmeas.roots import solve_level

P = Polynomial
Z2 = P([0, 0, 1])
DISK1 = ReferenceDomain.disk(1)
# arcsine law on [-1, 1], by quadrature with the (1 - x)^-1/2 (1 + x)^-1/2 weight built in
ARCSINE = {j: integrate.quad(lambda x, j=j: x ** j / math.pi, -1, 1, weight="alg",
                             wvar=(-0.5, -0.5))[0]
           for j in (2, 4)}


class Criterion:
    def __init__(self, n, limit):
        self.n, self.limit = n, limit
        self.checks = {}
        self.info = {}
        self.t0 = time.perf_counter()

    def check(self, name, ok):
        self.checks[name] = bool(ok)

    def finish(self, timed=None):
        self.elapsed = time.perf_counter() - self.t0
        timed = self.elapsed if timed is None else timed
        self.check(f"runtime < {self.limit:g} s", timed < self.limit)
        failed = [k for k, ok in self.checks.items() if not ok]
        verdict = "PASS" if not failed else "FAIL"
        line = f"criterion {self.n}: {verdict} ({len(self.checks) - len(failed)}/{len(self.checks)} checks, {self.elapsed:.1f} s)"
        if failed:
            line += " failed: " + "; ".join(failed)
        ACCEPTANCE_LINES[self.n] = line
        print(line)
        return self

    def assert_all_except(self, *known):
        bad = [k for k, ok in self.checks.items() if not ok and k not in known]
        assert not bad, f"criterion {self.n} failed: {bad}; {self.info}"


# --- 1: exact disk tower -----------------------------------------------------------------

@pytest.fixture(scope="module")
def c1():
    c = Criterion(1, 10)
    worst_mod, worst_mom = 0.0, 0.0
    for k in range(1, 11):
        q = SequencePolynomial(PolySequenceSpec("iterate", k, base=Z2))
        mu = pullback_equilibrium(q, 4.0, 64)
        rho = 4.0 ** (2.0 ** -k)
        worst_mod = max(worst_mod, float(np.max(np.abs(np.abs(mu.points) - rho))))
        # uniform measure on |z| = rho: m[a, b] = rho^(2a) if a == b else 0
        e = np.diag([rho ** (2 * a) for a in range(9)]).astype(complex)
        worst_mom = max(worst_mom, moment_vector_distance(moments(mu, 8), MomentVector(8, e)))
    c.info.update(modulus_error=worst_mod, moment_distance=worst_mom)
    c.check("moduli within 1e-9", worst_mod <= 1e-9)
    c.check("moment distance <= 1e-8", worst_mom <= 1e-8)
    return c.finish()


def test_criterion_1_disk_tower(c1):
    c1.assert_all_except()


# --- 2: derivative heredity closed form -----------------------------------------------------

@pytest.fixture(scope="module")
def c2():
    c = Criterion(2, 5)
    steps = heredity_check(PolySequenceSpec("iterate", 1, base=Z2), DISK1, 2.0, range(1, 13))
    d = [s.difference for s in steps]
    exact = [k * math.log(2) / (2 ** k - 1) for k in range(1, 13)]
    c.info.update(differences=d)
    c.check("closed form within 1e-9", all(abs(a - b) <= 1e-9 for a, b in zip(d, exact)))
    c.check("monotonically decreasing", all(b < a for a, b in zip(d, d[1:])))
    c.check("difference < 1e-3 at k = 12", d[-1] < 1e-3)
    return c.finish()


def test_criterion_2_heredity(c2):
    c2.assert_all_except("difference < 1e-3 at k = 12")


@pytest.mark.xfail(strict=True, reason="12 log2 / 4095 = 2.03e-3 exceeds 1e-3; see ledger")
def test_criterion_2_threshold_at_k12(c2):
    assert c2.checks["difference < 1e-3 at k = 12"], c2.info["differences"][-1]


# --- 3: Chebyshev / arcsine convergence ------------------------------------------------------

@pytest.fixture(scope="module")
def c3():
    c = Criterion(3, 120)
    tol = {32: 0.05, 128: 0.02, 512: 0.01}
    hol, mixed = {}, {}
    for n in (32, 128, 512):
        t0 = time.perf_counter()
        mu = pullback_equilibrium(SequencePolynomial(PolySequenceSpec("chebyshev", n)), 0.5, 64)
        c.info[f"t{n}"] = time.perf_counter() - t0
        mv = moments(mu, 4)
        # holomorphic moments z^2, z^4 and mixed |z|^2, |z|^4 against the arcsine oracle
        hol[n] = max(abs(mv[2, 0] - ARCSINE[2]), abs(mv[4, 0] - ARCSINE[4]))
        mixed[n] = max(abs(mv[1, 1] - ARCSINE[2]), abs(mv[2, 2] - ARCSINE[4]))
    c.info.update(holomorphic=hol, mixed=mixed)
    c.check("moments within {0.05, 0.02, 0.01}",
            all(hol[n] <= tol[n] and mixed[n] <= tol[n] for n in tol))
    c.check("mixed-moment errors decrease with n", mixed[32] > mixed[128] > mixed[512])
    # holomorphic moments of the pullback are exact (power sums of the roots), so
    # "decreasing" is only meaningful above rounding level
    c.check("holomorphic-moment errors at rounding level", max(hol.values()) <= 1e-15)
    c.check("n = 512 within 2 min", c.info["t512"] < 120)
    return c.finish()


def test_criterion_3_arcsine(c3):
    c3.assert_all_except()


# --- 4: capacity identities -------------------------------------------------------------------

@pytest.fixture(scope="module")
def c4():
    c = Criterion(4, 180)
    rel = {}
    for name, p in (("z^2-1", P([-1, 0, 1])), ("z^2-2", P([-2, 0, 1])), ("2z^2", P([0, 0, 2]))):
        mu = brolin_sample(p, 4096, seed=1)
        rel[name + " brolin"] = math.exp(energy(mu)) / cap_filled_julia(p) - 1
        r = 1.0
        mu = pullback_equilibrium(p, r, 2048)
        assert len(mu) == 4096
        rel[name + " pullback"] = math.exp(energy(mu)) / cap_preimage(p, r) - 1
    c.info["relative"] = rel
    c.check("brute-force capacities within 5%", all(abs(v) <= 0.05 for v in rel.values()))
    caps, lgs = [], []
    for k in range(1, 13):
        q = SequencePolynomial(PolySequenceSpec("mandelbrot_center", k))
        lgs.append(q.log_abs_gamma / q.degree)
        if q.degree >= 2:  # q_1 = c has degree 1 and no filled Julia set
            caps.append(cap_filled_julia(q))
    c.info.update(mandelbrot_caps=caps, mandelbrot_log_gamma=lgs)
    c.check("mandelbrot cap = 1 exactly", all(x == 1.0 for x in caps))
    c.check("mandelbrot (1/n) log|gamma| = 0 exactly", all(x == 0.0 for x in lgs))
    return c.finish()


def test_criterion_4_capacities(c4):
    c4.assert_all_except()


# --- 5: Mandelbrot convergence -----------------------------------------------------------------

@pytest.fixture(scope="module")
def c5():
    c = Criterion(5, 600)
    reps = {m: converge_experiment(PolySequenceSpec("mandelbrot_center", 6, m=m), range(6, 13),
                                   "pullback", r=1.0, M=8)
            for m in (0, 1)}
    for m, rep in reps.items():
        d = [x["distance"] for x in rep.consecutive_distances]
        c.info[f"consecutive m={m}"] = d
        c.check(f"m={m}: d(6,7) >= 1.3 d(11,12)", d[0] >= 1.3 * d[-1])
    assert reps[0].moment_scale == reps[1].moment_scale
    d01 = moment_vector_distance(reps[0].records[-1].moments, reps[1].records[-1].moments)
    c.info["m0 vs m1 at k=12"] = d01
    c.check("m=0 vs m=1 distance <= 0.05 at k = 12", d01 <= 0.05)
    return c.finish()


def test_criterion_5_mandelbrot_convergence(c5):
    c5.assert_all_except("m=0 vs m=1 distance <= 0.05 at k = 12")


@pytest.mark.xfail(strict=True, reason="distance 0.075 at k = 12, halving per step; see ledger")
def test_criterion_5_m0_m1_distance_at_k12(c5):
    assert c5.checks["m=0 vs m=1 distance <= 0.05 at k = 12"], c5.info["m0 vs m1 at k=12"]


# --- 6: regularity sup-error decay ---------------------------------------------------------------

@pytest.fixture(scope="module")
def c6():
    c = Criterion(6, 60)
    base = P([-1, 0, 1])
    dom = ReferenceDomain.filled_julia(base)
    # double precision bottoms out at ~1e-16 from k = 5, so compare at 400 digits
    err = {k: kreg_error(PolySequenceSpec("iterate", k, base=base), dom, 2.0, 64,
                         with_roots=False, dps=400).sup_error
           for k in range(3, 10)}
    c.info["errors"] = err
    c.check("err_{k+1} < err_k for k = 3..8", all(err[k + 1] < err[k] for k in range(3, 9)))
    c.check("err_8 < 1e-3", err[8] < 1e-3)
    return c.finish()


def test_criterion_6_kreg_decay(c6):
    c6.assert_all_except()


# --- 7: invariant suites over 200 seeded instances --------------------------------------------------

def _random_poly(rng, lo=2, hi=6):
    n = int(rng.integers(lo, hi + 1))
    a = rng.uniform(-2, 2, n + 1) + 1j * rng.uniform(-2, 2, n + 1)
    a[-1] = rng.uniform(0.5, 2) * np.exp(2j * np.pi * rng.uniform())
    return P(a)


def _instance(seed):
    rng = np.random.default_rng(seed)
    ok = {}
    # potential of a measure on D(R) is at most log(2R) on D(R)
    R = rng.uniform(0.5, 5)
    k = int(rng.integers(1, 13))
    pts = R * np.sqrt(rng.uniform(0, 1, k)) * np.exp(2j * np.pi * rng.uniform(0, 1, k))
    mu = DiscreteMeasure(pts, rng.dirichlet(np.ones(k)))
    z = R * np.sqrt(rng.uniform(0, 1, 16)) * np.exp(2j * np.pi * rng.uniform(0, 1, 16))
    ok["log(2R) bound"] = bool(np.all(potential_at(mu, z) <= math.log(2 * R)))
    # atoms in Re < 0: 2 d/dz of the potential has positive real part on Re > 0
    eps = rng.uniform(0.1, 1)
    atoms = -rng.uniform(eps, 3, k) + 1j * rng.uniform(-3, 3, k)
    nu = DiscreteMeasure(atoms, rng.dirichlet(np.ones(k)))
    x = rng.uniform(0.05, 4) + 1j * rng.uniform(-3, 3)
    d = potential_cderiv(nu, x)
    h = 1e-5
    gx = (potential_at(nu, x + h) - potential_at(nu, x - h)) / (2 * h)
    gy = (potential_at(nu, x + 1j * h) - potential_at(nu, x - 1j * h)) / (2 * h)
    ok["gradient positivity and finite differences"] = (
        d.real > 0 and abs(gx - d.real) <= 1e-6 and abs(gy + d.imag) <= 1e-6)
    # fiber cardinality and exact pullback mass
    p = _random_poly(rng)
    n = p.degree
    rs = solve_level(p, complex(*rng.uniform(-3, 3, 2)))
    ok["fiber cardinality"] = rs.complete and rs.total_multiplicity == n
    n_angles = int(rng.integers(1, 9))
    fibers = pullback_fibers(p, rng.uniform(0.1, 5), n_angles)
    mass = sum(Fraction(int(m), n * n_angles) for f in fibers for m in f.multiplicities)
    ok["pullback mass exactness"] = mass == 1 and all(f.total_multiplicity == n for f in fibers)
    # containment: K(p) inside the pullback of D(R) inside D(R), and |p| >= 2|z| off D(R)
    q = _random_poly(rng, 2, 5)
    Rq = escape_radius(q)
    pre = np.concatenate([f.points for f in pullback_fibers(q, Rq, 8)])
    zz = pre * rng.uniform(0, 1)
    inside = zz[filled_julia_member(q, zz)]
    far = Rq * rng.uniform(1, 3) * np.exp(2j * np.pi * rng.uniform(0, 1, 8))
    ok["containment"] = bool(np.all(np.abs(pre) < Rq) and np.all(np.abs(q(inside)) <= Rq)
                             and np.all(np.abs(q(far)) >= 2 * np.abs(far) * (1 - 1e-12)))
    return ok


@pytest.fixture(scope="module")
def c7():
    c = Criterion(7, 60)
    fails = {}
    for seed in range(200):
        for name, ok in _instance(seed).items():
            if not ok:
                fails.setdefault(name, []).append(seed)
    c.info["failing seeds"] = fails
    for name in ("log(2R) bound", "gradient positivity and finite differences", "fiber cardinality",
                 "pullback mass exactness", "containment"):
        c.check(f"{name} on 200 instances", name not in fails)
    return c.finish()


def test_criterion_7_invariants(c7):
    c7.assert_all_except()


# --- 8: rendered images ------------------------------------------------------------------------------

def _is_red(px):
    r, g, b = px
    return r > 0 and g == 0 and b == 0


@pytest.fixture(scope="module")
def c8():
    c = Criterion(8, 120)
    res = (800, 600)
    i0, i1 = pixel_index(MANDELBROT_BBOX, res, 0j), pixel_index(MANDELBROT_BBOX, res, 1 + 0j)
    images = {}
    for m in (0, 1):
        for k in (3, 6, 10):
            q = SequencePolynomial(PolySequenceSpec("mandelbrot_center", k, m=m))
            img = render(q, MANDELBROT_BBOX, res)
            images[k, m] = (encode_ppm(img), img.pixel(*i0), img.pixel(*i1))
    c.elapsed_render = time.perf_counter() - c.t0
    # determinism: a second render with another thread count is byte-identical
    same = all(encode_ppm(render(SequencePolynomial(PolySequenceSpec("mandelbrot_center", k, m=m)),
                                 MANDELBROT_BBOX, res, threads=3)) == images[k, m][0]
               for k, m in images)
    c.info.update(render_seconds=c.elapsed_render,
                  c0=({km: v[1] for km, v in images.items()}), c1={km: v[2] for km, v in images.items()})
    c.check("six images, byte-deterministic", len(images) == 6 and same)
    c.check("m=0: c=0 green", all(images[k, 0][1] == GREEN for k in (3, 6, 10)))
    c.check("c=1 red", all(_is_red(v[2]) for v in images.values()))
    c.check("m=1: c=0 green", all(images[k, 1][1] == GREEN for k in (3, 6, 10)))
    # the limit applies to producing the six images; the determinism re-render is extra
    return c.finish(timed=c.elapsed_render)


def test_criterion_8_render(c8):
    c8.assert_all_except("m=1: c=0 green")


@pytest.mark.xfail(strict=True, reason="q_k' maps 0 to 1, which escapes, so 0 is not in K(q_k'); see ledger")
def test_criterion_8_c0_green_for_m1(c8):
    assert c8.checks["m=1: c=0 green"], c8.info["c0"]
