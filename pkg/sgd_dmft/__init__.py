from .effective_process import (
    ModelParams, PathEnsemble, draw_paths, finite_difference_response, integrate_paths,
    propagate_jacobian, simulate_paths,
)
from .exceptions import DmftError
from .finite_sim import (
    AlgorithmSpec, Dataset, SimObservables, generate_dataset, run_generic_dynamics,
    run_langevin, run_nesterov, run_polyak, run_sample_split_gd, run_sgd,
)
from .kernels import KernelSet
from .numerics import (
    RngStream, cholesky_factor, gauss_hermite_expectation, psd_project,
    sample_correlated_paths,
)
from .sample_splitting import scalar_dmft
from .solver import (
    CurveTable, SolverConfig, SolveResult, estimate_kernels, sample_weight_process,
    solve_fixed_point, theory_curves,
)

__all__ = [
    'ModelParams', 'PathEnsemble', 'draw_paths', 'finite_difference_response',
    'integrate_paths', 'propagate_jacobian', 'simulate_paths', 'DmftError', 'AlgorithmSpec',
    'Dataset', 'SimObservables', 'generate_dataset', 'run_generic_dynamics', 'run_langevin',
    'run_nesterov', 'run_polyak', 'run_sample_split_gd', 'run_sgd', 'KernelSet', 'RngStream',
    'cholesky_factor', 'gauss_hermite_expectation', 'psd_project', 'sample_correlated_paths',
    'scalar_dmft', 'CurveTable', 'SolverConfig', 'SolveResult', 'estimate_kernels',
    'sample_weight_process', 'solve_fixed_point', 'theory_curves',
]

__version__ = '0.1.0'
