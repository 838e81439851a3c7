"""Node-differentially-private edge-density estimation."""

__version__ = "0.1.0"

from .errors import (ConfigError, ConstructionError, ContractError, EdgeListParseError,
                     InvalidGraphError, NodeDPError, ParameterError)
from .noise import RandomStream, sample_laplace, sample_student_t3
from .graph import (DegreeSummary, Graph, concentration_parameter, degree_summary,
                    edge_density, rewire_node, sample_er)
from .witnesses import WitnessPair, witness_large_k, witness_small_k
from .estimators import (CdParams, ErParams, PrivateEstimate, WeightProfile,
                         compute_weight_profile, estimate_concentrated, estimate_er,
                         estimator_f, local_sensitivity_probe, naive_estimate, smooth_bound)
from .edgelist import parse_edge_list, read_edge_list, write_edge_list
