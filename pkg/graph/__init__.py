from .dual_graph import DualGraph
from .partition import (
    Partition,
    apply_flip,
    boundary_node_fraction,
    canonicalize,
    cut_edge_count,
    is_contiguous,
    population_deviation,
)
from .grid import make_grid
from .state import ChainState
