"""Two-stage stochastic scheduling of coupled gas-electric systems under
wind uncertainty: transient gas dynamics, DC power flow recourse,
stochastic hybrid approximation solvers, and benchmark algorithms."""

__version__ = "0.1.0"

from .network import (Bus, Compressor, CouplingMap, DataError,
                      DiscretizedGasNetwork, ElectricNetwork, GasNetwork,
                      GasNode, Generator, Instance, Line, Pipe, Subpipe,
                      Supply, TimeGrid, WindFarm, discretize_gas_network,
                      pipe_constants, validate)
from .scenarios import ScenarioSet, extrema, iteration_order, load_scenarios
from .linsys import ConstraintSystem
from .lp import LpSolution, SolverError, solve_lp
from .builders import (RecourseSolution, XIndex, build_first_stage,
                       build_second_stage_electric, build_second_stage_gas,
                       build_subproblem, build_two_stage, first_stage_cost)
from .slp import (SlpConfig, SlpResult, linearize_compressor,
                  linearize_friction, solve_slp)
from .subproblem import (SubproblemResult, SubproblemSolver,
                         steady_state_warm_start)
from .sha import (ShaConfig, ShaResult, calibrate_b, run, sha_update,
                  solution_update_metric, step_size, weighted_average)
from .benchmarks import (BendersResult, run_benders, solve_one_shot,
                         solve_opf_only)
from .evaluate import EvaluationReport, compare, evaluate
from .io import instance_from_dict, load_instance
