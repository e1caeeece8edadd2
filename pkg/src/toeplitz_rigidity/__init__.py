"""
toeplitz-rigidity - theta functions, Witten bundles, odd Chern character and
equivariant index checks behind rigidity theorems for Toeplitz operators.
"""

__version__ = "0.1.0"

from .config import RunConfig, build_run_config, get_config, initialize_config
from .datasets import load_dataset
from .equivariant import EquivariantData, f_function, index_series, rigidity_scan
from .exceptions import DatasetError, DomainError, ToeplitzError
from .genera import ModelManifold, genus_pair
from .series import GradedElement, QSeries

__all__ = [
    'RunConfig',
    'build_run_config',
    'get_config',
    'initialize_config',
    'load_dataset',
    'EquivariantData',
    'f_function',
    'index_series',
    'rigidity_scan',
    'ModelManifold',
    'genus_pair',
    'GradedElement',
    'QSeries',
    'ToeplitzError',
    'DomainError',
    'DatasetError',
]
