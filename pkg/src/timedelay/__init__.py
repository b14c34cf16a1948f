"""Sojourn times and time delay for dispersive and Friedrichs-type Hamiltonians."""
from . import (config, dispersion, grid, localization, model, propagation, sojourn,
               stationary)
from .dispersion import DispersionRelation, EnergyWindow, admissible, builtin
from .exceptions import (BoxOverflowError, ConfigError, ContractError, ConvergenceError,
                         NearEigenvalueError, SingularSymbolError)
from .grid import (Grid, Representation, WaveFunction, gaussian, inner,
                   mixed_expectation, to_momentum, to_position)
from .localization import (F_f, LocalizationFunction, R_f, R_f_grad,
                           make_characteristic, make_plateau_bump,
                           make_plateau_power)
from .model import FriedrichsModel, RankOnePotential, hermite, lorentzian
from .propagation import (free_evolve, friedrichs_evolve, scatter,
                          wave_operator)
from .sojourn import (SojournConfig, SweepReport, a_f_expectation,
                      free_sojourn, full_sojourn, integral_formula_lhs, sweep,
                      tau_free, time_delays)
from .stationary import (boundary_matrix, detect_eigenvalues, ew_kernel,
                         ew_time_delay, restriction_regularity_test, s_matrix,
                         s_matrix_product)

__version__ = "0.1.0"
