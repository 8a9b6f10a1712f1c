"""Instrumented sphere decoding and Pareto tails of its complexity on random lattices."""

__version__ = "0.1.0"

from .decoder import DecodeResult, decode, gaussian_integers_in_disk, solve
from .errors import EmptySamples, InvalidLayer, InvalidRadius, RankDeficient, TooLarge
from .lattice import (SphereSpec, clp_brute, count_points_brute, covering_radius_ub,
                      sandwich_bounds, sphere_spec, sphere_surface, sphere_volume)
from .linalg import QRFactors, qrd, sub_gram_det
from .montecarlo import (CCDF, SampleSet, TailFit, TrialConfig, empirical_ccdf, fit_tail,
                         radius_for_coverage, run_trials, sample_instance,
                         verify_theorem_conditions)
from .preproc import (Method, PreprocOutput, lr_identity_check, preprocess,
                      scaling_invariance_check)
