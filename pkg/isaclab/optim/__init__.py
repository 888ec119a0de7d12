from .problem import (BlpProblem, DesignSolution, SlpProblem, evaluate_scnr, random_problem,
                      random_slp_problem)
from .blp import blp_optimize, blp_rx_update, blp_tx_update
from .slp import slp_min_power, slp_stap_optimize
from .baselines import baseline_designs, comm_only, heuristic, max_min_sinr, radar_only
