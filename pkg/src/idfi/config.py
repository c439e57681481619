"""Shared numeric conventions and guard constants.

Single authority for the tolerances and conventions that several modules must
agree on; keeping them here avoids factor-2 and clipping drift between
modules.
"""

from __future__ import annotations

# Discrete derivative on a two-point factor: d_i f(x) = DISCRETE_DERIVATIVE_FACTOR * (f(x) - f(x flipped at i)).
# The tensorization calibration uses the same constant, so certified
# inequalities do not depend on its value.
DISCRETE_DERIVATIVE_FACTOR = 0.5

# Eigenvalue clipping for PSD tests (shared by every matrix comparison).
PSD_EIG_CLIP = 1e-12

# Exponent guard: exp() arguments beyond this overflow double precision.
EXP_OVERFLOW_LIMIT = 700.0

# Matrix ODE blow-up guard.
ODE_BLOWUP_NORM = 1e12

# |lambda| below this routes scalar Riccati solutions to the parabolic branch.
LAMBDA_BRANCH_TOL = 1e-12

# Finite differences on density evaluators.
FD_STEP_FIRST = 1e-4
FD_STEP_SECOND = 1e-3

# Enumeration cap for discrete product spaces (refuse beyond, never subsample).
ENUMERATION_STATE_CAP = 2**24

# Quadrature defaults.
DEFAULT_POINTS_PER_AXIS = 40
MAX_TENSOR_GRID_DIM = 4
