"""Cross-sections of flows on tori from combinatorial outer approximations."""

from .alpha import (AlphaAnalysis, Existence, NotQuasiLyapunovError, SupportValue, alpha_recurrent, analyze,
                    direction_support, existence, fried_positive, is_quasi_lyapunov_neg, negative_cycle_through)
from .config import ConfigError, RunConfig
from .examples import CATALOG, list_examples
from .flows import BUILTINS, CohomologyClass, FlowError, FlowSpec, evaluate, integrate_T
from .graph import Grid, GraphError, ResourceLimitError, TransitionGraph, build, export_text, import_text, refine
from .recurrence import chain_decomposition, is_chain_recurrent, lyapunov_potential, recurrent_set
from .report import run
from .sections import (AlphaChainGraph, CrossSection, Labeling, SectionError, build_chain_graph,
                       chain_graph_from_shifts, classify_cardinality, enumerate_labelings, extract_section,
                       fried_sum, fried_sum_map, labelings_equal, section_to_labeling, synthesize_potential)

__version__ = "0.1.0"
