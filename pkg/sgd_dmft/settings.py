# numerics_core
PSD_FLOOR = 0.0
JITTER_START = 1e-12
JITTER_STOP = 1e-6
QUADRATURE_ORDER = 40
PATH_BLOCK = 256

# effective_process
DIVERGENCE_BOUND = 1e8
C0 = 1.0
M0 = 0.0
LOSS = 'logistic'
GRAD_NORM_MODE = 'per-batch'

# dmft_solver
N_PATHS = 2500
THETA_PATHS = 2500
DAMPING = 0.7
MAX_SWEEPS = 100
TOL = 1e-3
SEED = 0
RESAMPLE_EACH_SWEEP = True
NOISE_MULTIPLIER = 5.0
NOISE_PATIENCE = 3
RELATIVE_EPS = 1e-8
ABSOLUTE_TOL = 1e-6
THETA_EPOCH = 0x7fffffff
COSINE_SLACK = 1e-6

# finite_sim
SIM_DIVERGENCE_BOUND = 1e8
N_SEEDS = 10

# cli
OUTPUT_DIR = 'out'
OUTPUT_DIR_ENV = 'SGD_DMFT_OUTPUT_DIR'
FLOAT_FORMAT = '.17g'
COMPARE_TOLERANCE = 0.03
