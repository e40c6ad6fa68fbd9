"""Equilibrium measures, Green's functions and zero distributions of polynomial sequences."""

from .dynamics import (GreenField, ReferenceDomain, brolin_sample, cap_filled_julia,
                       cap_preimage, escape_green, escape_radius, filled_julia_member,
                       green_field)
from .measure import (DiscreteMeasure, MomentVector, capacity_from_energy, energy,
                      fekete_points, moment_distance, moments, potential_at,
                      potential_cderiv, reference_equilibrium, transfinite_diameter)
from .poly import (CoefficientOverflowError, Polynomial, PolySequenceSpec, SequencePolynomial,
                   format_poly_literal, parse_poly_literal, poly_compose, poly_derivative,
                   poly_eval, poly_from_roots, seq_generate, seq_realize)
from .regularity import (ConvergenceReport, RegularityReport, centering_check,
                         converge_experiment, heredity_check, kreg_error,
                         pullback_equilibrium)
from .render import RasterImage, colorize, read_image, write_image
from .roots import RootSet, ZeroClusterReport, cluster_roots, find_roots, root_measure, solve_level

__version__ = "0.1.0"
