"""Spectral coloring and independent-set algorithms for one-sided expanders."""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AlgorithmFailure,
    CompletionFailure,
    ImproperColoringError,
    InputError,
    NotIndependentError,
    ParseError,
    PreconditionError,
    RecoveryFailure,
)
from .graph_core import (  # noqa: E402
    ColoringQuality,
    Graph,
    ModelMatrix,
    Partition,
    coloring_quality,
    load_graph,
    load_partition,
    model_matrix,
    normalized_adjacency,
    permutation_match,
    save_graph,
    save_partition,
)
from .spectral import (  # noqa: E402
    SpectralDecomposition,
    eig_sym,
    threshold_rank,
    verify_rank_inequality,
    witness_matrix,
)
from .recovery import RecoveryParams, recover_partitions, spectral_cluster  # noqa: E402
from .coloring import (  # noqa: E402
    ColoringResult,
    alpha_uncovered_bound,
    color_3_expander,
    color_expander,
    find_independent_set,
    model_3_from_pi,
    round_independent_set,
    stationary_distribution,
)
from .planting import PartialColoring, PlantedInstance, plant_k_coloring, recover_full  # noqa: E402
from .instances import (  # noqa: E402
    GeneratorSpec,
    biregular_random,
    blowup_instance,
    lambda3_instance,
    random_regular,
    sbm_from_model,
)
from .kernels import BACKEND  # noqa: E402
