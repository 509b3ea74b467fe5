from .exceptions import TwinBeamError
from .bosonic_algebra import EpsJet, Mode, OperatorPoly, normal_order, vacuum_expectation
from .channel_model import ProbeConfig, Scenario, build_port_operators, number_moment_monomial
from .moment_engine import MomentTable, compute_moments
from .estimators import ErrorBudget, Observable, budget, nrf_budget, g11_budget, small_g11_budget
from .probe_optimizer import optimize, fit_scaling, solve_constraint
from .fock_oracle import FockConfig, oracle_moments
from .config import RunSpec
from .twinbeam import TwinBeam

__title__ = "TwinBeam"
__package_name__ = "twinbeam"
__version__ = "0.3.0"
__description__ = "Estimation errors of two-photon absorbance measured with two-mode squeezed light."
__license__ = "GPL-3.0"
