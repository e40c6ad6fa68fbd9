"""Command-line interface: ``eqmeas <subcommand> [flags]``.

Exit status is 0 on success, 1 on a domain error (bad polynomial, solver
failure, overflow, I/O) and 2 on a usage error.  Data goes to ``--out`` or
standard output, diagnostics to standard error.
"""

import argparse
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dy
from . import measure as ms
from . import regularity as rg
from . import render as rd
from .poly import (PolySequenceSpec, SequencePolynomial, format_poly_literal,
                   parse_poly_literal)
from .roots import format_roots_csv, solve_level

log = logging.getLogger("eqmeas")

COMMANDS = ("gen", "roots", "pullback", "brolin", "capacity", "green",
            "regularity", "converge", "render")


class UsageError(Exception):
    pass


# --- JSON with 17 significant digits ------------------------------------------

def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps17(obj, indent=2):
    """JSON text with every float written as %.17g (non-finite as null)."""
    return _encode(obj, indent, 0) + "\n"


# --- configuration -------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    seed: int = 0
    thread_count: object = None
    output: object = None


def load_config(path):
    """Options from a JSON object file (keys mirror the long flag names)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    if not text.strip():
        raise UsageError(f"config {path} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: {exc.msg} at line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _env_defaults():
    out = {}
    for var, key in (("EQMEAS_SEED", "seed"), ("EQMEAS_THREADS", "threads")):
        v = os.environ.get(var)
        if v not in (None, ""):
            try:
                out[key] = int(v)
            except ValueError as exc:
                raise UsageError(f"{var} must be an integer, got {v!r}") from exc
    return out


# --- parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _poly_flags(sp, family=True):
    sp.add_argument("--poly", help="dense coefficients a0,a1,...,an (ascending); base of an iterate family")
    if family:
        sp.add_argument("--family", choices=["iterate", "mandelbrot", "mandelbrot_center",
                                             "chebyshev", "chebyshev_interval"])
        sp.add_argument("--k", type=int, help="sequence index")
        sp.add_argument("--deriv", type=int, help="derivative order m")
        sp.add_argument("--base", help="base polynomial of the iterate family")
        sp.add_argument("--interval", help="a,b for the chebyshev family / interval domain")


def build_parser():
    p = _Parser(prog="eqmeas", description="Equilibrium measures of polynomial sequences.",
                argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON file of option values")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out")
        return sp

    sp = add("gen", "dense coefficients of q_k^(m)")
    _poly_flags(sp)
    sp = add("roots", "roots of p - w as CSV")
    _poly_flags(sp)
    sp.add_argument("--level", help="complex level w (default 0)")
    sp = add("pullback", "balanced pullback measure as CSV")
    _poly_flags(sp)
    sp.add_argument("--r", type=float)
    sp.add_argument("--angles", type=int)
    sp = add("brolin", "Brolin backward-orbit sample as CSV")
    _poly_flags(sp)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--burn", type=int)
    sp = add("capacity", "leading coefficient and capacity formulas as JSON")
    _poly_flags(sp)
    sp = add("green", "escape-time Green's function at points as JSON")
    _poly_flags(sp)
    sp.add_argument("--z", action="append", help="point (complex literal); repeatable")
    sp.add_argument("--iters", type=int)
    sp = add("regularity", "regularity reports as JSON")
    _poly_flags(sp)
    sp.add_argument("--kmin", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--R", type=float)
    sp.add_argument("--domain", choices=["disk", "interval", "mandelbrot", "julia"])
    sp.add_argument("--probes", type=int)
    sp.add_argument("--dps", type=int)
    sp = add("converge", "convergence experiment as JSON")
    _poly_flags(sp)
    sp.add_argument("--kmin", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--source", choices=["pullback", "brolin"])
    sp.add_argument("--r", type=float)
    sp.add_argument("--orders", type=int)
    sp.add_argument("--angles", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--burn", type=int)
    sp = add("render", "PPM image of the filled Julia set and Green's function")
    _poly_flags(sp)
    sp.add_argument("--bbox")
    sp.add_argument("--px")
    sp.add_argument("--iters", type=int)
    return p


DEFAULTS = {
    "seed": 0, "threads": None, "out": None, "verbose": False,
    "poly": None, "family": None, "k": None, "deriv": 0, "base": None, "interval": "-1,1",
    "level": "0", "r": None, "angles": rg.N_ANGLES, "samples": 4096, "burn": dy.BURN_IN,
    "z": None, "iters": None, "kmin": 1, "kmax": None, "R": rg.PROBE_R, "domain": None,
    "probes": rg.N_PROBE, "dps": None, "source": "pullback", "orders": ms.MOMENT_ORDER,
    "bbox": None, "px": "800,600",
}


def resolve(argv):
    """Parse argv into a RunConfig: flags > config file > environment > defaults."""
    ns = vars(build_parser().parse_args(argv))
    cmd = ns.pop("command", None)
    if cmd is None:
        raise UsageError("eqmeas: a subcommand is required: " + ", ".join(COMMANDS))
    opts = dict(DEFAULTS)
    opts.update(_env_defaults())
    if "config" in ns:
        cfg = load_config(ns.pop("config"))
        unknown = sorted(set(cfg) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"config: unknown option {unknown[0]!r}")
        opts.update(cfg)
    opts.update(ns)
    return RunConfig(cmd, opts, int(opts["seed"]), opts["threads"], opts["out"])


# --- polynomial selection -----------------------------------------------------------

def _pair(text, name):
    try:
        a, b = (float(x) for x in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"--{name} expects two numbers a,b, got {text!r}") from exc
    return a, b


def _complex(text, name):
    try:
        return complex(parse_poly_literal(str(text)).coeffs[0]) if str(text).strip() else 0j
    except ValueError as exc:
        raise UsageError(f"--{name}: cannot parse {text!r} as a complex number") from exc


def _poly_literal(text, name="poly"):
    try:
        return parse_poly_literal(str(text))
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from exc


def family_spec(o, k=None):
    fam = o["family"]
    if fam is None:
        raise UsageError("--family is required")
    k = o["k"] if k is None else k
    if k is None:
        raise UsageError("--k is required")
    base = None
    if fam == "iterate":
        src = o["base"] if o["base"] is not None else o["poly"]
        if src is None:
            raise UsageError("the iterate family needs --base (or --poly)")
        base = _poly_literal(src, "base")
    return PolySequenceSpec(fam, int(k), m=int(o["deriv"]), base=base,
                            interval=_pair(o["interval"], "interval"))


def select_poly(o):
    """A SequencePolynomial when --family is given, else the dense --poly."""
    if o["family"] is not None:
        return SequencePolynomial(family_spec(o))
    if o["poly"] is None:
        raise UsageError("give --poly or --family")
    return _poly_literal(o["poly"])


def _cx(z):
    return {"re": float(z.real), "im": float(z.imag)}


# --- subcommands -------------------------------------------------------------------

def cmd_gen(cfg):
    o = cfg.options
    p = select_poly(o)
    d = p.dense()
    return "json", {
        "family": o["family"] or "dense", "k": o["k"], "m": int(o["deriv"]) if o["family"] else 0,
        "degree": d.degree, "literal": format_poly_literal(d),
        "coefficients": [_cx(c) for c in d.coeffs],
    }


def cmd_roots(cfg):
    o = cfg.options
    rs = solve_level(select_poly(o), _complex(o["level"], "level"))
    if not rs.complete:
        log.warning("%d roots flagged unconverged", int(np.sum(~rs.converged)))
    return "text", format_roots_csv(rs)


def cmd_pullback(cfg):
    o = cfg.options
    if o["r"] is None:
        raise UsageError("--r is required")
    mu = rg.pullback_equilibrium(select_poly(o), o["r"], int(o["angles"]), cfg.thread_count)
    return "text", ms.format_measure_csv(mu)


def cmd_brolin(cfg):
    o = cfg.options
    mu = dy.brolin_sample(select_poly(o), int(o["samples"]), int(o["burn"]), cfg.seed)
    return "text", ms.format_measure_csv(mu)


def cmd_capacity(cfg):
    p = select_poly(cfg.options)
    n = p.degree
    lg = p.log_abs_gamma
    return "json", {
        "gamma_abs": math.exp(lg) if lg < 709 else None,
        "log_gamma_abs": lg,
        "degree": n,
        "cap_filled_julia": dy.cap_filled_julia(p) if n >= 2 else None,
        # (1/n) log|gamma|, which tends to -log Cap(K) along a regular sequence
        "cap_limit_check": lg / n,
    }


def cmd_green(cfg):
    o = cfg.options
    p = select_poly(o)
    if not o["z"]:
        raise UsageError("--z is required")
    zs = np.array([_complex(z, "z") for z in o["z"]])
    it = int(o["iters"] or dy.GREEN_ITER)
    g = dy.escape_green(p, zs, it)
    inside = dy.filled_julia_member(p, zs, it)
    return "json", [{"re": float(z.real), "im": float(z.imag), "green": float(v), "inside": bool(b)}
                    for z, v, b in zip(zs, g, inside)]


def _domain(o, spec, kmax):
    name = o["domain"]
    if name is None:
        dom = rg.reference_domain_for(spec)
        if dom is not None:
            return dom
        name = "mandelbrot" if spec.family == "mandelbrot_center" else "julia"
    if name == "disk":
        if spec.family == "iterate":
            return dy.ReferenceDomain.disk(dy.cap_filled_julia(spec.base))
        return dy.ReferenceDomain.disk(1.0)
    if name == "interval":
        if spec.family == "iterate" and spec.base is not None:
            dom = rg.reference_domain_for(spec)
            if dom is not None and dom.kind == "interval":
                return dom
        return dy.ReferenceDomain.interval(*_pair(o["interval"], "interval"))
    if name == "mandelbrot":
        return dy.ReferenceDomain.mandelbrot(kmax + 4)
    if spec.family != "iterate":
        raise UsageError("--domain julia needs the iterate family")
    return dy.ReferenceDomain.filled_julia(spec.base)


def cmd_regularity(cfg):
    o = cfg.options
    if o["kmax"] is None:
        raise UsageError("--kmax is required")
    kmax = int(o["kmax"])
    spec0 = family_spec(o, k=kmax)
    dom = _domain(o, spec0, kmax)
    out = []
    for k in range(int(o["kmin"]), kmax + 1):
        try:
            spec = spec0.with_k(k)
        except ValueError as exc:
            log.info("skipping k=%d: %s", k, exc)
            continue
        out.append(rg.kreg_error(spec, dom, float(o["R"]), int(o["probes"]), dps=o["dps"]).to_dict())
    return "json", out


def cmd_converge(cfg):
    o = cfg.options
    if o["kmax"] is None:
        raise UsageError("--kmax is required")
    kmax = int(o["kmax"])
    spec = family_spec(o, k=kmax)
    ks = []
    for k in range(int(o["kmin"]), kmax + 1):
        try:
            spec.with_k(k)
            ks.append(k)
        except ValueError:
            log.info("skipping k=%d (below the family's minimal index)", k)
    r = 1.0 if o["r"] is None else float(o["r"])
    rep = rg.converge_experiment(spec, ks, o["source"], r, int(o["orders"]), int(o["angles"]),
                                 int(o["samples"]), int(o["burn"]), cfg.seed,
                                 threads=cfg.thread_count)
    return "json", rep.to_dict()


def cmd_render(cfg):
    o = cfg.options
    p = select_poly(o)
    if o["bbox"] is None:
        bbox = rd.MANDELBROT_BBOX
    else:
        try:
            bbox = tuple(float(x) for x in str(o["bbox"]).split(","))
        except ValueError as exc:
            raise UsageError(f"--bbox: cannot parse {o['bbox']!r}") from exc
        if len(bbox) != 4 or not (bbox[2] > bbox[0] and bbox[3] > bbox[1]):
            raise UsageError("--bbox expects x0,y0,x1,y1 with x1 > x0 and y1 > y0")
    try:
        px = [int(x) for x in str(o["px"]).split(",")]
    except ValueError as exc:
        raise UsageError(f"--px: cannot parse {o['px']!r}") from exc
    if len(px) == 1:
        px.append(max(1, round(px[0] * (bbox[3] - bbox[1]) / (bbox[2] - bbox[0]))))
    if len(px) != 2 or min(px) < 1:
        raise UsageError("--px expects W or W,H with positive integers")
    img = rd.render(p, bbox, tuple(px), int(o["iters"] or dy.MEMBER_ITER), cfg.thread_count)
    if cfg.output is None:
        raise UsageError("render needs --out")
    rd.write_image(img, cfg.output)
    return None, None


HANDLERS = {
    "gen": cmd_gen, "roots": cmd_roots, "pullback": cmd_pullback, "brolin": cmd_brolin,
    "capacity": cmd_capacity, "green": cmd_green, "regularity": cmd_regularity,
    "converge": cmd_converge, "render": cmd_render,
}


def _emit(kind, payload, out):
    if kind is None:
        return
    text = dumps17(payload) if kind == "json" else payload
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc.strerror}") from exc


_NUMERIC = re.compile(r"^-[\d.]")


def _glue_negative_values(argv):
    """Rewrite ``--flag -2,0,1`` as ``--flag=-2,0,1``.

    argparse would otherwise read a negative coefficient list as an option.
    """
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and tok not in _SWITCHES
                and i + 1 < len(argv) and _NUMERIC.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


_SWITCHES = {"--verbose", "--help"}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = resolve(_glue_negative_values(argv))
        logging.basicConfig(level=logging.INFO if cfg.options["verbose"] else logging.WARNING,
                            format="eqmeas: %(message)s", stream=sys.stderr)
        kind, payload = HANDLERS[cfg.command](cfg)
        _emit(kind, payload, cfg.output)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError, NotImplementedError) as exc:
        print(f"eqmeas: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
