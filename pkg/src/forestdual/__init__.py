"""Regular families of relational forests as finite algebras, their finite
homomorphism duals, and exact duality/antichain verification at small scale."""

from .structures import (
    Component,
    Homomorphism,
    IncidenceGraph,
    NotAForest,
    RootedStructure,
    Signature,
    SignatureMismatch,
    Structure,
    combine_rooted,
    components,
    concatenate,
    concatenate_rooted,
    direct_product,
    disjoint_union,
    incidence,
    is_forest,
    is_tree,
    stable_json,
    substructure_on,
    t0,
    unroot,
)
from .canon import (
    canonical_form,
    enumerate_structures,
    forest_encoding,
    is_isomorphic,
    rooted_encoding,
)
from .hom import (
    all_homs,
    core,
    exists_non_retraction,
    find_hom,
    hom_exists,
    is_core,
    is_hom_equivalent,
    is_retraction,
    is_retraction_componentwise,
)
from .algebra import (
    CoherenceReport,
    FamilyHandle,
    ForestAlgebra,
    IncoherentAlgebra,
    build_finite_family,
    build_hom_family,
    build_obstruction_family,
    build_trees_family,
    check_coherence,
    check_table_axioms,
    distinguishing_combine_context,
    enumerate_members,
    eval_rooted,
    family_complement,
    family_intersection,
    family_union,
    find_witness,
    intersection_is_empty,
    intersection_witness,
    is_empty,
    member,
    minimize,
    random_forest,
    reachable_states,
    validate_algebra,
)
from .duality import (
    AdmissibleFamily,
    DualVertex,
    EmptyStructureInFamily,
    ForestClass,
    NotATreeFamily,
    TreeDual,
    VerificationReport,
    admissibility_witness,
    check_tinimage,
    forest_dual_family,
    forest_state,
    is_admissible,
    tree_classes,
    tree_dual,
    up_closure,
    verify_duality,
    verify_duality_explicit,
)
from .antichain import (
    MinimalCoresReport,
    MinimalsForestReport,
    OrderReport,
    check_minimals_are_forests,
    check_splitting,
    cores_of_minimals_bounded,
    ex_member_bounded,
    is_antichain,
    minimal_members,
    order_report,
)
from .fixtures import (
    DIGRAPH,
    directed_path,
    finite_family_fixtures,
    parse_path_literal,
    path_fixture,
    path_fixture_core_word,
    path_fixture_word,
    single_loop,
    transitive_tournament,
)
