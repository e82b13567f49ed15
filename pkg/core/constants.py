"""Numerical defaults and tolerances."""

import numpy as np

# Order s
ORDER_MARGIN = 1e-6  # s within this distance of 0 or 1 is rejected

# Bessel evaluation
BESSEL_T_MIN = 1e-8
BESSEL_T_MAX = 50.0
FD_RELATIVE_STEP = 1e-3  # relative step of the 5-point identity checks

# Constant quadrature
QUAD_TOL_DEFAULT = 1e-10
QUAD_TOL_MAX = 1e-4
QUAD_SPLIT = 2.0  # [0, 2] and [2, 60]
QUAD_CUTOFF = 60.0

# Radial profile grid
PROFILE_T_MIN = 1e-6
PROFILE_T_SWITCH = 2.0  # geometric below, uniform above
PROFILE_T_MAX = 40.0  # tail cut T
PROFILE_RATIO = 1.05  # geometric grading ratio
PROFILE_UNIFORM_STEP = 0.1
PROFILE_GAUSS_POINTS = 8  # per-interval Gauss-Legendre nodes

# Cutoff / probe data
CUTOFF_EPSILON_DEFAULT = 0.1
CUTOFF_GRID_STEP = 1.0 / 64.0  # rescaled tangential spacing of stored samples
CUTOFF_SUPPORT_TOL = 1e-14
NORMALIZATION_TOL = 1e-8
CUTOFF_MASS_TOL = 1e-3  # analytic vs sampled L2 mass before the sample grid is rejected
MIN_POINTS_PER_WAVELENGTH = 8
MEAN_ZERO_TOL = 1e-10
ADMISSIBLE_ZERO_TOL = 1e-12
FREQUENCY_CEILING = 1.0e5  # largest N searched for admissible zeros

# Ansatz
TAYLOR_STEP = 1e-4
ANSATZ_GRID_HALF_WIDTH = 1.25  # rescaled tangential box for hierarchy factors
DEFAULT_DEPTH_DIRICHLET = 1
DEFAULT_DEPTH_NEUMANN = 2

# Extension solver
POINTS_PER_WAVELENGTH_DEFAULT = 16
NORMAL_NODES_DEFAULT = 96
MIN_NORMAL_NODES = 48
GRADING_DEFAULT = 2.0
BOX_FACTOR_DEFAULT = 3.0  # lateral half-width in support radii at N_min
DEPTH_FACTOR_DEFAULT = 6.0  # L_z = DEPTH_FACTOR / (sqrt(C1) * N_min)
MIN_DEPTH_FACTOR = 4.0
MEMORY_CAP_MB = 4096.0
SOLVER_RTOL = 1e-9
SOLVER_MAX_ITER = 20000
DIRECT_SOLVE_LIMIT = 300_000  # unknowns
TANGENTIAL_CELL_MULTIPLE = 16

# Fourier fast path
FAST_PATH_BOX = 4.0  # half-width of the periodic box, in rescaled units
FAST_PATH_POINTS_PER_UNIT = 64  # minimum K, rescaled spacing is 1/K

# Reconstruction
DEFAULT_SCHEDULE = (16.0, 32.0, 64.0)
DEFAULT_FIT_POWERS = (1.0,)
HALF_FIT_POWERS = (0.5,)  # a + b N^{-1/2}, always reported alongside the configured fit
MONOTONE_TOL = 1e-3

# Reports
SIGNIFICANT_DIGITS = 12

SQRT_PI_HALF = float(np.sqrt(np.pi / 2.0))
