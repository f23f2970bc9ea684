"""torinv: exact lattice-level computations behind cohomological invariants
of algebraic tori.

Layers, bottom up: intlin (exact integer linear algebra), glattice (finite
groups and G-lattices), gcohom (finite group cohomology with an independent
brute-force oracle), koszul (the weight-q complexes of a short exact
sequence and their certification), tori (flasque/coflasque machinery),
assembler (symbolic exact-sequence reports over a field profile), corpus
(executable worked examples), cli (the torinv command).
"""

from .intlin import (
    AbelianGroupStructure,
    IntMatrix,
    SmithDecomposition,
    cokernel_structure,
    hermite_decompose,
    homology_structure,
    invariant_factors,
    kernel_basis,
    matrix_rank,
    smith_decompose,
)
from .glattice import (
    ClosureCapExceeded,
    FiniteGroup,
    GLattice,
    InvalidSpec,
    LatticeMorphism,
    NotInjective,
    NotInvertible,
    NotSaturated,
    RankOverflow,
    ShortExactSequenceZ,
    build_group,
    builtin_group,
    direct_sum,
    dual_lattice,
    enumerate_subgroups,
    explicit_lattice,
    invariants_sublattice,
    perm_lattice,
    quotient_lattice,
    regular_lattice,
    sym_power,
    tensor_lattice,
    trivial_lattice,
    verify_equivariant_map,
    wedge_power,
)
from .gcohom import (
    CohomologyResult,
    DegreeCapExceeded,
    SizeExceeded,
    brute_force_cohomology,
    cohomology,
    cohomology_qz,
    shapiro_compare,
)
from .koszul import (
    ChainComplexZ,
    build_koszul,
    complex_homology,
    verify_koszul_quasi_iso,
)
from .tori import (
    FlasqueResolutionResult,
    TorusLattice,
    coflasque_resolution,
    flasque_resolution,
    flasqueness,
    is_permutation_in_basis,
    norm_one_lattice,
)
from .assembler import (
    ExactSequenceReport,
    FamilyDatumMissing,
    FieldProfile,
    Term,
    assemble_inv4,
    assemble_inv5,
    assemble_unramified,
    e2_page,
    hs_weight3_sequence,
    matches_golden,
    motivic_table,
    q8_conclusion,
    same_shape,
    simplify_term,
    special_family_reports,
)
from .exprs import parse_lattice_expr, parse_torus_expr

__version__ = "0.1.0"
