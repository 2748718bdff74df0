CONFIG_INVALID = 2
SHAPE_MISMATCH = 3
NON_FINITE = 4
DIVERGENCE = 5
FACTORIZATION_FAILED = 6
EMPTY_ENSEMBLE = 7
VALIDATION_FAILED = 8
IO_FAILED = 9

ERROR_CODES = {
    1: 'Unknown error',
    CONFIG_INVALID: 'Invalid configuration',
    SHAPE_MISMATCH: 'Horizon or shape mismatch',
    NON_FINITE: 'Non-finite values encountered',
    DIVERGENCE: 'Dynamics diverged',
    FACTORIZATION_FAILED: 'Cholesky factorization failed',
    EMPTY_ENSEMBLE: 'Empty ensemble',
    VALIDATION_FAILED: 'Invalid parameters',
    IO_FAILED: 'Cannot read or write artifact',
}

# RNG purpose tags, part of the Philox key
PURPOSE_NOISE = 1
PURPOSE_TEACHER = 2
PURPOSE_MASK = 3
PURPOSE_INIT = 4
PURPOSE_DATA = 5

PURPOSES = {
    'noise': PURPOSE_NOISE,
    'teacher': PURPOSE_TEACHER,
    'batch-mask': PURPOSE_MASK,
    'init': PURPOSE_INIT,
    'data': PURPOSE_DATA,
}

GRAD_NORM_PER_BATCH = 'per-batch'
GRAD_NORM_RAW = 'raw'
GRAD_NORM_MODES = (GRAD_NORM_PER_BATCH, GRAD_NORM_RAW)

VARIANTS = ('sgd', 'langevin', 'polyak', 'nesterov', 'sample_split_gd', 'generic')

THEORY_COLUMNS = ('t', 'm', 'C_theta', 'cosine')
SIM_COLUMNS = (
    't', 'm_mean', 'm_sd', 'C_mean', 'C_sd', 'cosine_mean', 'cosine_sd', 'loss_mean',
)
SEED_COLUMNS = ('t', 'm', 'C', 'cosine', 'loss')
SPLIT_THEORY_COLUMNS = ('t', 'rho', 'abs_moment')
SPLIT_SIM_COLUMNS = ('t', 'rho_hat', 'abs_moment_hat')

# theory column -> simulation column, for cmd_compare
COMPARE_PAIRS = {
    'm': 'm_mean',
    'C_theta': 'C_mean',
    'cosine': 'cosine_mean',
    'rho': 'rho_hat',
    'abs_moment': 'abs_moment_hat',
}
