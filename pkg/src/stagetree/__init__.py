"""Staged tree representations of discrete DAG models and their balance."""

from .balance import BalanceReport, is_balanced, is_balanced_pair, is_simple, lemma_balance_bruteforce, witness_bijection
from .graph_core import (
    Dag,
    UndirectedGraph,
    ancestors,
    descendants,
    enumerate_dags,
    enumerate_linear_extensions,
    find_collider,
    is_chordal,
    is_linear_extension,
    is_perfect,
    parents,
    random_dag,
    skeleton,
)
from .model import (
    LeafDistribution,
    ParameterAssignment,
    check_dag_factorization,
    check_invariances,
    conditional,
    leaf_distribution,
    sample_parameters,
)
from .polynomial import Poly, evaluate, interpolating_poly
from .staged_tree import (
    StagedTree,
    StateSpace,
    build_tree,
    export_dot,
    is_compatibly_labeled,
    is_stratified,
    is_uniform,
    recognize_dag_staging,
    validate,
)
from .toric import check_vanishing, exponent_matrix_cliques, exponent_matrix_psi_toric, quadratic_relations

__version__ = "0.1.0"
