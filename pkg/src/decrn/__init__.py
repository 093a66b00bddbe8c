"""Delayed mass-action reaction networks: structure, persistence, dynamics.

The package certifies persistence of delayed complex-balanced mass-action
systems through boundary-face classification, computes their equilibria,
and integrates the delayed dynamics with conservation and entropy
monitoring.  See the ``decrn`` command-line tool for file-based runs.
"""

from .certify import (
    LemmaReport,
    PersistenceCertificate,
    StabilityStatement,
    certify,
    lemma_checks,
    stability_statement,
)
from .dynamics import (
    DescentReport,
    SolverConfig,
    Trajectory,
    chain_approximation,
    check_descent,
    compute_monitors,
    conservation_drift,
    integrate_dde,
    lyapunov_value,
    min_profile,
)
from .equilibrium import (
    EquilibriumResult,
    KineticLaplacian,
    equilibrium_in_class,
    kinetic_laplacian,
    positive_kernel,
    solve_complex_balanced,
)
from .errors import (
    CapabilityError,
    CrnError,
    CrnParseError,
    IntegrationError,
    NumericError,
    PreconditionError,
)
from .geometry import (
    ClassSpec,
    ConservedBasis,
    FaceClass,
    FaceTag,
    class_values,
    classify_face,
    conserved_basis,
    face_nonempty,
    g_functional,
    zw_dimension,
)
from .history import (
    ConstantHistory,
    ExpressionHistory,
    HistoryFunction,
    SampledHistory,
    history_from_json,
    load_history,
)
from .model import (
    Complex,
    Reaction,
    ReactionNetwork,
    delayed_drift,
    mass_action_rate,
    reaction_rates,
    undelayed_drift,
)
from .netparse import format_network, parse_network
from .structure import (
    ReactionGraph,
    SemilockingCatalog,
    StructureReport,
    analyze_structure,
    build_reaction_graph,
    deficiency,
    enumerate_semilocking,
    is_locking,
    is_reversible,
    is_semilocking,
    is_weakly_reversible,
    linkage_classes,
    stoich_subspace_basis,
)

__version__ = "0.1.0"
