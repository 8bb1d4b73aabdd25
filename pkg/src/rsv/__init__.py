"""Numerical laboratory for the regularized Saint-Venant (rSV) system.

Simulates the nonlocal shallow-water equations on a periodic grid, monitors
the conserved relative energy and depth positivity, detects finite-time
derivative blow-up through Riemann-invariant/Riccati diagnostics, and fits
the blow-up profile exponent.
"""

from . import cli, criteria, dynamics, elliptic, profile_fit, riemann, statespace
from .criteria import (
    BlowupVerdict,
    ConstantsLedger,
    constants_ledger,
    depth_floor,
    detect_blowup,
    generate_blowup_data,
)
from .dynamics import cfl_dt, energy_report, rhs, step
from .elliptic import assemble, nonlocal_f, riccati_Q, solve
from .errors import RsvError
from .profile_fit import ProfileFit, fit_exponent, heuristic_blowup_time
from .riemann import RunRecord, invariants, sup_tracker, trace_characteristic
from .statespace import Grid, Params, State

__version__ = "0.1.0"
