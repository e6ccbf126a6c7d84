"""Train a small binary-weight neural network by quadratic binary optimization.

The training loss is compiled into a QUBO whose ground states decode to the
best discrete weight settings; solvers include exact enumeration, simulated
annealing, and a remote-sampler client.
"""

__version__ = "0.1.0"

from .polynomial import Basis, MultilinearPoly, PolyParseError
from .quadratize import (
    QuadratizedModel,
    ReductionEntry,
    ReductionMap,
    ReductionReport,
    constraint_gadget,
    lift_assignment,
    quadratize,
    verify_reduction,
)
from .qubo import QuboModel
from .solvers import (
    AnnealSchedule,
    Sample,
    SamplerConfig,
    best_of,
    exact_solve,
    remote_sample,
    sa_sample,
)
from .network import (
    ActivationPoly,
    Encoding,
    FeatureScaler,
    LayoutEntry,
    NetworkShape,
    ParamLayout,
    TrainedNetwork,
    activation_preset,
    build_layout,
    decode_param,
)
from .compiler import (
    CompiledModel,
    compile_generic,
    compile_model,
    compile_structured,
    count_spins,
    decode_solution,
    loss_poly,
    network_output_poly,
)
from .data import (
    Dataset,
    gen_bands,
    gen_circles,
    gen_dataset,
    gen_quadrants,
    load_csv,
    loads_csv,
    save_csv,
)
from .evaluate import (
    ClassicalRun,
    EvalReport,
    classical_loss_and_grad,
    classical_train,
    compare,
    decision_grid,
    roc_auc,
)
from .errors import AuthError, ConfigError, RemoteSamplerError, SolverError

__all__ = [
    "__version__",
    "Basis",
    "MultilinearPoly",
    "PolyParseError",
    "QuadratizedModel",
    "ReductionEntry",
    "ReductionMap",
    "ReductionReport",
    "constraint_gadget",
    "lift_assignment",
    "quadratize",
    "verify_reduction",
    "QuboModel",
    "AnnealSchedule",
    "Sample",
    "SamplerConfig",
    "best_of",
    "exact_solve",
    "remote_sample",
    "sa_sample",
    "ActivationPoly",
    "Encoding",
    "FeatureScaler",
    "LayoutEntry",
    "NetworkShape",
    "ParamLayout",
    "TrainedNetwork",
    "activation_preset",
    "build_layout",
    "decode_param",
    "CompiledModel",
    "compile_generic",
    "compile_model",
    "compile_structured",
    "count_spins",
    "decode_solution",
    "loss_poly",
    "network_output_poly",
    "Dataset",
    "gen_bands",
    "gen_circles",
    "gen_dataset",
    "gen_quadrants",
    "load_csv",
    "loads_csv",
    "save_csv",
    "ClassicalRun",
    "EvalReport",
    "classical_loss_and_grad",
    "classical_train",
    "compare",
    "decision_grid",
    "roc_auc",
    "AuthError",
    "ConfigError",
    "RemoteSamplerError",
    "SolverError",
]
