"""Discrete probability measures: potentials, energy, capacity, moments."""

import csv
import io
import json
import math

import numpy as np

from . import _kernels as K

WEIGHT_SUM_TOL = 1e-12
MOMENT_ORDER = 8
MOMENT_SUPPORT = 4.0


class DiscreteMeasure:
    """Finitely many atoms ``points[j]`` with nonnegative ``weights[j]`` summing to 1.

    Both arrays are stored read-only.  Zero-weight atoms are kept (a
    pullback may produce them only through an explicit caller choice).
    """

    def __init__(self, points, weights=None):
        z = np.array(points, dtype=np.complex128).ravel()
        if z.size == 0:
            raise ValueError("a probability measure needs at least one atom")
        if not np.all(np.isfinite(z)):
            raise ValueError("atoms must be finite")
        if weights is None:
            w = np.full(z.size, 1.0 / z.size)
        else:
            w = np.array(weights, dtype=np.float64).ravel()
            if w.shape != z.shape:
                raise ValueError("points and weights differ in length")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and nonnegative")
            total = math.fsum(w)
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                raise ValueError(f"weights sum to {total!r}, not 1")
        z.flags.writeable = False
        w.flags.writeable = False
        self.points = z
        self.weights = w

    def __len__(self):
        return self.points.size

    def __repr__(self):
        return f"DiscreteMeasure({self.points.size} atoms, support radius {self.support_radius:.4g})"

    @property
    def support_radius(self):
        return float(np.max(np.abs(self.points)))

    def scaled(self, factor):
        """Push-forward under z -> factor * z."""
        return DiscreteMeasure(self.points * factor, self.weights)

    def subsample(self, n_max):
        """Every s-th atom (s = ceil(len / n_max)), weights renormalised."""
        s = -(-self.points.size // n_max)
        if s <= 1:
            return self
        w = self.weights[::s]
        return DiscreteMeasure(self.points[::s], w / math.fsum(w))


def format_measure_csv(mu):
    buf = io.StringIO()
    buf.write("re,im,weight\n")
    for z, w in zip(mu.points, mu.weights):
        buf.write(f"{float(z.real)!r},{float(z.imag)!r},{float(w)!r}\n")
    return buf.getvalue()


def write_measure_csv(mu, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_measure_csv(mu))


def read_measure_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["re", "im", "weight"]:
        raise ValueError(f"{path}: expected header re,im,weight")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=np.float64)
    if data.size == 0:
        raise ValueError(f"{path}: no atoms")
    return DiscreteMeasure(data[:, 0] + 1j * data[:, 1], data[:, 2])


def potential_at(mu, z):
    """Logarithmic potential sum_j w_j log|z - zeta_j|; -inf at an atom.

    Accepts a scalar or an array of points.
    """
    zs = np.asarray(z, dtype=np.complex128)
    out = K.potential_many(zs.ravel(), mu.points, mu.weights)
    if zs.ndim == 0:
        return float(out[0])
    return out.reshape(zs.shape)


def potential_cderiv(mu, z):
    """2 d/dz of the potential: sum_j w_j / (z - zeta_j)."""
    zs = np.asarray(z, dtype=np.complex128)
    flat = zs.ravel()
    diff = flat[:, None] - mu.points[None, :]
    hit = (diff == 0) & (mu.weights[None, :] > 0)
    if np.any(hit):
        raise ValueError("potential derivative undefined at an atom")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(diff == 0, 0, mu.weights[None, :] / diff)
    out = terms.sum(axis=1)
    if zs.ndim == 0:
        return complex(out[0])
    return out.reshape(zs.shape)


def energy(mu):
    """Discrete energy sum_{i != j} w_i w_j log|zeta_i - zeta_j| (no diagonal).

    For n equal atoms this sits (log n)/n above the continuum energy of
    the measure they discretize.
    """
    if mu.points.size < 2:
        raise ValueError("energy needs at least two atoms")
    return float(K.pair_log_sum(mu.points, mu.weights))


def capacity_from_energy(I):
    if not math.isfinite(I):
        raise ValueError("energy must be finite")
    return math.exp(I)


def transfinite_diameter(points):
    """(prod_{i<j} |z_i - z_j|)^(2/(n(n-1))), computed from summed logs."""
    z = np.asarray(points, dtype=np.complex128).ravel()
    n = z.size
    if n < 2:
        raise ValueError("need at least two points")
    s = K.pair_log_sum(z, np.ones(n))
    if s == -np.inf:
        return 0.0
    return math.exp(s / (n * (n - 1)))


def _log_dist_sums(cand, chosen):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(cand[:, None] - chosen[None, :])).sum(axis=1)


def fekete_points(domain, n, boundary_resolution=1024):
    """Approximate Fekete points of ``domain`` among its boundary samples.

    Greedy insertion (starting from the sample of largest modulus) followed
    by single-point exchange passes until no exchange increases the
    Vandermonde product.  Not a global optimizer.
    """
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    if boundary_resolution < n:
        raise ValueError("boundary resolution must be at least n")
    cand = np.asarray(domain.boundary_sample(boundary_resolution), dtype=np.complex128)
    idx = [int(np.argmax(np.abs(cand)))]
    score = _log_dist_sums(cand, cand[idx])
    for _ in range(n - 1):
        s = score.copy()
        s[idx] = -np.inf
        j = int(np.argmax(s))
        idx.append(j)
        with np.errstate(divide="ignore"):
            score += np.log(np.abs(cand - cand[j]))

    idx = np.array(idx)
    for _ in range(100):
        improved = False
        for i in range(n):
            others = np.delete(cand[idx], i)
            s = _log_dist_sums(cand, others)
            s[np.delete(idx, i)] = -np.inf
            j = int(np.argmax(s))
            if s[j] > s[idx[i]] + 1e-13 * (1 + abs(s[idx[i]])):
                idx[i] = j
                improved = True
        if not improved:
            break
    return cand[idx]


class MomentVector:
    """Mixed moments m[a, b] = integral of z^a conj(z)^b for a + b <= M."""

    def __init__(self, max_order, entries):
        self.max_order = int(max_order)
        e = np.array(entries, dtype=np.complex128)
        if e.shape != (self.max_order + 1, self.max_order + 1):
            raise ValueError("entries must be an (M+1, M+1) array")
        e.flags.writeable = False
        self.entries = e

    def __getitem__(self, ab):
        a, b = ab
        if a < 0 or b < 0 or a + b > self.max_order:
            raise KeyError(ab)
        return complex(self.entries[a, b])

    def indices(self):
        M = self.max_order
        return [(a, b) for a in range(M + 1) for b in range(M + 1 - a)]

    def values(self):
        return np.array([self.entries[a, b] for a, b in self.indices()])

    def to_dict(self):
        return {
            "M": self.max_order,
            "moments": [{"a": a, "b": b, "re": float(self.entries[a, b].real),
                         "im": float(self.entries[a, b].imag)} for a, b in self.indices()],
        }

    @classmethod
    def from_dict(cls, d):
        M = int(d["M"])
        e = np.zeros((M + 1, M + 1), dtype=np.complex128)
        for item in d["moments"]:
            e[item["a"], item["b"]] = complex(item["re"], item["im"])
        return cls(M, e)

    def to_json(self):
        return json.dumps(self.to_dict())


def moments(mu, M=MOMENT_ORDER):
    """Weighted power sums, each component summed with math.fsum.

    The (b, a) entry is stored as the conjugate of (a, b), so the symmetry
    holds exactly.
    """
    M = int(M)
    if M < 1:
        raise ValueError("M must be at least 1")
    z = mu.points
    pw = [np.ones_like(z)]
    for _ in range(M):
        pw.append(pw[-1] * z)
    e = np.zeros((M + 1, M + 1), dtype=np.complex128)
    for a in range(M + 1):
        for b in range(min(a, M - a) + 1):
            v = mu.weights * pw[a] * np.conj(pw[b])
            if a == b:
                val = complex(math.fsum(v.real), 0.0)
            else:
                val = complex(math.fsum(v.real), math.fsum(v.imag))
            e[a, b] = val
            e[b, a] = val.conjugate()
    e[0, 0] = 1.0
    return MomentVector(M, e)


def moment_vector_distance(u, v):
    """max |u[a,b] - v[a,b]| over the common index set."""
    M = min(u.max_order, v.max_order)
    d = u.entries[:M + 1, :M + 1] - v.entries[:M + 1, :M + 1]
    mask = np.add.outer(np.arange(M + 1), np.arange(M + 1)) <= M
    return float(np.max(np.abs(d[mask])))


def moment_distance(mu, nu, M=MOMENT_ORDER):
    """Max moment difference up to total order M; supports must lie in |z| <= 4."""
    for m in (mu, nu):
        if m.support_radius > MOMENT_SUPPORT:
            raise ValueError(f"support radius {m.support_radius:.6g} exceeds {MOMENT_SUPPORT}; rescale first")
    return moment_vector_distance(moments(mu, M), moments(nu, M))


def support_scale(measures, bound=MOMENT_SUPPORT):
    """Largest factor 2^-j (j >= 0) bringing every support into |z| <= bound."""
    r = max(m.support_radius for m in measures)
    s = 1.0
    while r * s > bound:
        s *= 0.5
    return s


def reference_equilibrium(domain, n):
    """Closed-form discretization of the equilibrium measure.

    A disk gets n equispaced atoms on its circle; an interval gets the n
    Chebyshev nodes, whose equal-weight rule integrates polynomials of
    degree < 2n exactly against the arcsine law.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if domain.kind == "disk":
        r, c = domain.radius, domain.center
        return DiscreteMeasure(c + r * np.exp(2j * np.pi * np.arange(n) / n))
    if domain.kind == "interval":
        a, b = domain.bounds
        x = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))
        return DiscreteMeasure(0.5 * (a + b) + 0.5 * (b - a) * x + 0j)
    raise ValueError(f"no closed-form equilibrium measure for a {domain.kind} domain; "
                     "use brolin_sample or pullback_equilibrium")
