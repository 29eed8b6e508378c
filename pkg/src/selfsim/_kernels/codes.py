"""Termination status codes shared by both kernel backends."""

REACHED_RMAX = 0
AXIS_HIT = 1
ESCAPE_UP = 2
ESCAPE_DOWN = 3
STEP_LIMIT = 4
OVERFLOW = 5

PROFILE_MINIMAL = 0
PROFILE_EXPANDER = 1
PROFILE_SHRINKER = 2

PHASE_MINIMAL = 0
PHASE_EXPANDER = 1

LINEAR_EXPANDER = 0
LINEAR_SHRINKER = 1

BC_AXIS_U = 0  # endpoint pinned on the u-axis (r = 0)
BC_AXIS_R = 1  # endpoint pinned on the r-axis (u = 0)
BC_MIRROR = 2  # flat mirror continuation in r
BC_FIXED = 3   # frozen endpoint (outflow Dirichlet)
