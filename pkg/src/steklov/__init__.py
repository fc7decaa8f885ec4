"""Steklov spectra of surfaces glued from regular graphs.

Pipeline: sample a gap-certified k-regular graph, sew one copy of a flat
fundamental piece per vertex along the graph edges, and solve the
Steklov eigenvalue problem on the glued intrinsic mesh with a cotangent
finite-element Dirichlet-to-Neumann reduction. The experiments module
measures the linear growth of sigma_1 * L with graph size and verifies
the two-sided comparison between sigma_1 and the graph gap.
"""

from .build import (
    FundamentalPiece,
    GluedSurface,
    MeshAssembly,
    build_disk,
    build_flat_cylinder,
    build_flat_sheet,
    build_fundamental_piece,
    double_piece,
    genus_formula,
    glue_from_pairing,
    glue_surface,
    pairing_from_edges,
)
from .errors import (
    ArtifactIOError,
    SolverError,
    SteklovError,
    ValidationError,
)
from .experiments import (
    GrowthRecord,
    GrowthRunConfig,
    RatioReport,
    boundary_means,
    check_kokarev,
    collar_sloshing_mu,
    comparison_ratio_report,
    doubled_piece_lambda1,
    growth_slope,
    run_growth,
    trial_function,
    trial_function_quotient,
    verify_global_estimate,
    verify_local_estimate,
)
from .fem import (
    assemble_boundary_mass,
    assemble_lumped_mass,
    assemble_stiffness,
    dtn_schur,
    harmonic_extension,
    rayleigh_quotient,
    triangle_energies,
)
from .graphs import (
    GraphSpectrum,
    RegularGraph,
    adjacency_matrix,
    build_regular_graph,
    circulant_graph,
    complete_graph,
    cycle_graph,
    generate_expander_family,
    graph_from_text,
    graph_to_text,
    is_connected,
    laplacian_matrix,
    laplacian_spectrum,
    load_graph,
    quadratic_form,
    sample_expander,
    save_graph,
)
from .mesh import (
    BoundaryLoop,
    IntrinsicMesh,
    euler_genus,
    load_mesh,
    mesh_from_text,
    mesh_to_text,
    save_mesh,
    validate_mesh,
)
from .report import export_report
from .seeding import derive_rng, derive_seed
from .spectra import (
    BoundaryCondition,
    EigenOptions,
    SteklovSpectrum,
    neumann_lambda1,
    sloshing_mu1,
    sloshing_oracle,
    steklov_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "ArtifactIOError",
    "BoundaryCondition",
    "BoundaryLoop",
    "EigenOptions",
    "FundamentalPiece",
    "GluedSurface",
    "GraphSpectrum",
    "GrowthRecord",
    "GrowthRunConfig",
    "IntrinsicMesh",
    "MeshAssembly",
    "RatioReport",
    "RegularGraph",
    "SolverError",
    "SteklovError",
    "SteklovSpectrum",
    "ValidationError",
    "adjacency_matrix",
    "assemble_boundary_mass",
    "assemble_lumped_mass",
    "assemble_stiffness",
    "boundary_means",
    "build_disk",
    "build_flat_cylinder",
    "build_flat_sheet",
    "build_fundamental_piece",
    "build_regular_graph",
    "check_kokarev",
    "circulant_graph",
    "collar_sloshing_mu",
    "comparison_ratio_report",
    "complete_graph",
    "cycle_graph",
    "derive_rng",
    "derive_seed",
    "double_piece",
    "doubled_piece_lambda1",
    "dtn_schur",
    "euler_genus",
    "export_report",
    "generate_expander_family",
    "genus_formula",
    "glue_from_pairing",
    "glue_surface",
    "graph_from_text",
    "graph_to_text",
    "growth_slope",
    "harmonic_extension",
    "is_connected",
    "laplacian_matrix",
    "laplacian_spectrum",
    "load_graph",
    "load_mesh",
    "mesh_from_text",
    "mesh_to_text",
    "neumann_lambda1",
    "pairing_from_edges",
    "quadratic_form",
    "rayleigh_quotient",
    "run_growth",
    "sample_expander",
    "save_graph",
    "save_mesh",
    "sloshing_mu1",
    "sloshing_oracle",
    "steklov_spectrum",
    "trial_function",
    "trial_function_quotient",
    "triangle_energies",
    "validate_mesh",
    "verify_global_estimate",
    "verify_local_estimate",
]
