""" All constants used in multiple files of tnrd app."""

EPS = 1e-12  # min norm of a filter coefficient vector

# boundary rules of the convolution
BOUNDARY_SYMMETRIC = 'symmetric'
BOUNDARY_ZERO = 'zero'
BOUNDARIES = (BOUNDARY_SYMMETRIC, BOUNDARY_ZERO)

# filter bank
KERNEL_MIN_SIZE = 3
KERNEL_MAX_SIZE = 15

# influence functions
RBF_GAUSSIAN = 'gaussian'
RBF_TRIANGULAR = 'triangular'
RBF_KINDS = (RBF_GAUSSIAN, RBF_TRIANGULAR)
RBF_DEFAULT_MIN = -310.0
RBF_DEFAULT_STEP = 10.0
RBF_DEFAULT_COUNT = 63
RBF_DEFAULT_GAMMA = 10.0
# samples per center step used to fit the plain influence function
RBF_FIT_DENSITY = 8

# problem kinds
PROBLEM_DENOISE = 'denoise'
PROBLEM_SISR = 'sisr'
PROBLEM_DEBLOCK = 'deblock'
PROBLEMS = (PROBLEM_DENOISE, PROBLEM_SISR, PROBLEM_DEBLOCK)
DENOISE_SIGMAS = (15, 25, 50)
SISR_FACTORS = (2, 3, 4)
DEBLOCK_QUALITIES = (10, 20, 30)
# parameter used when none is given
DEFAULT_PARAMS = {PROBLEM_DENOISE: 25.0, PROBLEM_SISR: 2.0, PROBLEM_DEBLOCK: 10.0}

# bicubic kernel parameter
BICUBIC_A = -0.5

# JPEG
JPEG_BLOCK = 8
JPEG_LUMINANCE_TABLE = (
    (16, 11, 10, 16, 24, 40, 51, 61),
    (12, 12, 14, 19, 26, 58, 60, 55),
    (14, 13, 16, 24, 40, 57, 69, 56),
    (14, 17, 22, 29, 51, 87, 80, 62),
    (18, 22, 37, 56, 68, 109, 103, 77),
    (24, 35, 55, 64, 81, 104, 113, 92),
    (49, 64, 78, 87, 103, 121, 120, 101),
    (72, 92, 95, 98, 112, 100, 103, 99),
)

# quality measure
PSNR_PEAK = 255.0
PSNR_CAP = 99.0  # reported for identical images

# intensity range of the synthesized patterns
INTENSITY_MIN = 0.0
INTENSITY_MAX = 255.0

# training
INITIAL_LAMBDA = 0.1
# plain influence function phi(z) = 2 s z / (1 + s^2 z^2), peak 1 at z = 1 / s
PLAIN_INFLUENCE_SCALE = 0.05
SCHEME_GREEDY = 'greedy'
SCHEME_JOINT = 'joint'
SCHEME_GREEDY_JOINT = 'greedy+joint'
SCHEMES = (SCHEME_GREEDY, SCHEME_JOINT, SCHEME_GREEDY_JOINT)
INIT_PLAIN = 'plain'
INIT_RANDOM = 'random'
INITS = (INIT_PLAIN, INIT_RANDOM)
RANDOM_INIT_RANGE = 0.5  # random init draws every parameter from [-0.5, 0.5]
GROUP_LAMBDA = 'lambda'
GROUP_FILTERS = 'filters'
GROUP_INFLUENCES = 'influences'
GROUPS = (GROUP_LAMBDA, GROUP_FILTERS, GROUP_INFLUENCES)
LBFGS_ITERS = 200
LBFGS_MEMORY = 10
WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
FD_STEP = 1e-5
GRADCHECK_RTOL = 1e-5
GRADCHECK_ATOL = 1e-7
# a coordinate whose difference points straddle a kink is retried with the step divided by
# GRADCHECK_STEP_SHRINK, at most GRADCHECK_RESAMPLES times
GRADCHECK_RESAMPLES = 3
GRADCHECK_STEP_SHRINK = 8.0

# model file
MODEL_FILE_MAGIC = 'TNRD-MODEL'
MODEL_FILE_VERSION = 1

# pattern synthesis / export
PENALTY_EXPORT_STEP = 1.0
FILTER_GRID_GAP = 1
