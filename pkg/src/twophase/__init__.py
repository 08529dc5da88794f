"""Numerical laboratory for two-phase heat conductors.

Radial basis functions of ``f'' + (N-1)/r f' = f/sigma`` (:mod:`.kernel`),
exact layered solutions (:mod:`.layered`), a finite-difference solver for
general disks-with-inclusions (:mod:`.grid`), defect detectors
(:mod:`.detectors`), radius reconstruction (:mod:`.inversion`) and an
experiment runner (:mod:`.experiments`, :mod:`.cli`).
"""
from .errors import *  # noqa: F401,F403
from .kernel import (OdeParams, RadialProfile, SeriesControl, eval_decaying, eval_f_reg, eval_f_sing,
                     extract_coefficients, shoot_interface, wronskian_defect)
from .layered import (AnnularConductor, LayeredConductor, OverdeterminedSpec, RadialField, classify_case,
                      poisson_reference, solve_auxiliary_annulus, solve_auxiliary_concentric,
                      solve_overdetermined_radial)
from .grid import (Disk, Geometry2D, Grid2D, laplace_transform_field, simulate_cauchy, simulate_ibvp,
                   solve_stationary_transmission)
from .inversion import CauchyPair, forward_dirichlet, reconstruct_radius
from .experiments import RunReport, run

__version__ = "0.1.0"
