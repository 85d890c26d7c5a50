"""Deterministic simulator for the 1.5D relativistic Vlasov-Maxwell-Fokker-Planck system."""
from .config import ConfigError, SimConfig, load, loads, save, dumps, validate
from .diffusion import (
    BoundaryWarning, CFLError, FokkerPlanckOperator, apply_fokker_planck,
    diffusion_matrix, moment_identity_residual, stability_dt,
)
from .fields import FieldState, charge_current, e1_from_gauss, update_riemann
from .grid import Distribution, PhaseGrid, gamma, momentum_quadrature, vhat
from .solver import PicardTrace, SolverState, Stepper, picard_solve, run
from .transport import advect_v, advect_x

__version__ = "0.1.0"
