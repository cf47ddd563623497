import json
from fractions import Fraction

import pytest

from stagetree.graph_core import Dag, complete_dag, enumerate_dags, enumerate_linear_extensions
from stagetree.model import (
    LeafDistribution,
    ModelError,
    ParameterAssignment,
    check_dag_factorization,
    check_invariances,
    conditional,
    dag_distribution,
    induced_parameters,
    leaf_distribution,
    random_cpds,
    sample_parameters,
)
from stagetree.polynomial import evaluate, interpolating_poly
from stagetree.staged_tree import StagedTree, StateSpace, build_tree

ONE_LEVEL = StagedTree.from_label_keys({(): ["a", "b"]})


def test_sampling_is_deterministic(t_g1):
    assert sample_parameters(t_g1, 5).values == sample_parameters(t_g1, 5).values
    assert sample_parameters(t_g1, 5).values != sample_parameters(t_g1, 6).values


def test_sampled_rows_sum_to_one(t_g1, figure2_t1):
    for t in (t_g1, figure2_t1):
        alpha = sample_parameters(t, 0)
        alpha.check(t)
        assert set(alpha.values) == {lab.id for lab in t.labels}
        for block in t.stages:
            assert sum(alpha[lab] for lab in t.theta[block[0]]) == 1


def test_one_level_sample():
    alpha = sample_parameters(ONE_LEVEL, 3)
    a, b = alpha[0], alpha[1]
    assert 0 < a < 1 and b == 1 - a


def test_one_level_distribution():
    alpha = ParameterAssignment({0: Fraction(1, 3), 1: Fraction(2, 3)})
    f = leaf_distribution(ONE_LEVEL, alpha)
    assert f[(0,)] == Fraction(1, 3) and f[(1,)] == Fraction(2, 3)
    # base case: conditional on the empty prefix is the marginal itself
    assert conditional(f, ONE_LEVEL, (), 1) == Fraction(2, 3)


def test_assignment_check_errors():
    with pytest.raises(ModelError):
        ParameterAssignment({0: Fraction(1, 2)}).check(ONE_LEVEL)
    with pytest.raises(ModelError):
        ParameterAssignment({0: Fraction(1, 2), 1: Fraction(1, 3)}).check(ONE_LEVEL)
    with pytest.raises(ModelError):
        ParameterAssignment({0: Fraction(0), 1: Fraction(1)}).check(ONE_LEVEL)
    with pytest.raises(ModelError):
        leaf_distribution(ONE_LEVEL, ParameterAssignment({0: Fraction(1, 2)}))


@pytest.mark.parametrize("seed", range(5))
def test_distribution_in_open_simplex(seed, t_g1, figure2_t2):
    for t in (t_g1, figure2_t2):
        alpha = sample_parameters(t, seed)
        f = leaf_distribution(t, alpha)
        assert len(f) == len(t.leaves)
        assert all(pr > 0 for pr in f.probabilities.values())
        assert f.total() == 1 == evaluate(interpolating_poly(t, ()), alpha.values)


def test_conditionals_recover_parameters(t_g2, figure2_t1):
    for t in (t_g2, figure2_t1):
        alpha = sample_parameters(t, 11)
        f = leaf_distribution(t, alpha)
        for v in t.internal_vertices:
            for x, lab in enumerate(t.theta[v]):
                assert conditional(f, t, v, x) == alpha[lab]


def test_uniform_conditional():
    t = build_tree(Dag(2, frozenset()), (1, 2), StateSpace((3, 2)))
    f = LeafDistribution({leaf: Fraction(1, 6) for leaf in t.leaves}, (1, 2))
    assert conditional(f, t, (), 2) == Fraction(1, 3)
    assert conditional(f, t, (1,), 0) == Fraction(1, 2)


def test_conditional_errors():
    t = build_tree(Dag(2, frozenset()), (1, 2), StateSpace.binary(2))
    f = LeafDistribution({(0, 0): Fraction(0), (0, 1): Fraction(0), (1, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)})
    with pytest.raises(ModelError, match="probability zero"):
        conditional(f, t, (0,), 1)
    with pytest.raises(ModelError):
        conditional(f, t, (0, 0), 0)
    with pytest.raises(ModelError):
        conditional(f, t, (1,), 2)


def test_factorization_from_tree_model(g1, g2, t_g1, t_g2, binary4):
    for g, t in ((g1, t_g1), (g2, t_g2)):
        f = leaf_distribution(t, sample_parameters(t, 2))
        assert check_dag_factorization(f, g, binary4)


def test_factorization_independence():
    s = StateSpace((2, 3, 2))
    g = Dag(3, frozenset())
    f = dag_distribution(random_cpds(g, s, 4))
    assert check_dag_factorization(f, g, s)


def test_random_positive_f_fails_g1(g1, binary4):
    # a generic point of the full simplex: the complete DAG's model
    f = dag_distribution(random_cpds(complete_dag((1, 2, 3, 4)), binary4, 0))
    assert not check_dag_factorization(f, g1, binary4)
    assert check_dag_factorization(f, complete_dag((1, 2, 3, 4)), binary4)


def test_factorization_respects_extension_keying(g1, binary4):
    t = build_tree(g1, (2, 1, 3, 4), binary4)
    f = leaf_distribution(t, sample_parameters(t, 8))
    assert f.order == (2, 1, 3, 4)
    assert check_dag_factorization(f, g1, binary4)


def test_factorization_rejects_nonpositive(binary4, g2):
    f = LeafDistribution({x: Fraction(0) for x in binary4.outcomes((1, 2, 3, 4))})
    with pytest.raises(ModelError):
        check_dag_factorization(f, g2, binary4)


def test_invariances_hold_for_model_points(t_g1, figure2_t1, figure2_t2):
    for t in (t_g1, figure2_t1, figure2_t2):
        assert check_invariances(leaf_distribution(t, sample_parameters(t, 1)), t)


def test_invariances_singleton_staging():
    t = build_tree(complete_dag((1, 2, 3)), (1, 2, 3), StateSpace.binary(3))
    f = dag_distribution(random_cpds(complete_dag((1, 2, 3)), StateSpace.binary(3), 9), (1, 2, 3))
    assert check_invariances(f, t)


def test_invariances_fail_after_perturbing_one_row(g2, t_g2, binary4):
    cpds = random_cpds(g2, binary4, 3)
    f = dag_distribution(cpds, (1, 2, 3, 4))
    assert check_invariances(f, t_g2)
    # re-express the G2 model on the complete DAG, then let x3 | x2=0 also
    # depend on x1, breaking the stage {00, 10}
    full = complete_dag((1, 2, 3, 4))
    pa = {1: (), 2: (0,), 3: (1,), 4: (1, 2)}  # positions of G2 parents in the full context
    tables = {
        (var, ctx): [cpds.prob(var, x, tuple(ctx[n] for n in pa[var])) for x in range(2)]
        for var, ctx in random_cpds(full, binary4, 0).tables
    }
    tables[(3, (0, 0))] = [Fraction(1, 7), Fraction(6, 7)]
    assert tables[(3, (0, 0))] != tables[(3, (1, 0))]
    bent = dag_distribution(type(cpds)(tables, full, binary4), (1, 2, 3, 4))
    assert bent.total() == 1
    assert not check_invariances(bent, t_g2)
    assert not check_dag_factorization(bent, g2, binary4)


@pytest.mark.parametrize("cards", [(2, 2, 2, 2), (2, 3, 3, 2)])
def test_cpd_parameters_match_tree_model(cards):
    s = StateSpace(cards)
    for g in enumerate_dags(4)[::17]:
        cpds = random_cpds(g, s, len(g.edges))
        for order in enumerate_linear_extensions(g)[:2]:
            t = build_tree(g, order, s)
            alpha = induced_parameters(t, cpds)
            alpha.check(t)
            assert leaf_distribution(t, alpha).probabilities == dag_distribution(cpds, order).probabilities


def test_distribution_json_round_trip(t_g1):
    f = leaf_distribution(t_g1, sample_parameters(t_g1, 0))
    text = json.dumps(f.to_json())
    back = LeafDistribution.from_json(text)
    assert back.probabilities == f.probabilities and back.order == f.order
    rec = json.loads(text)["probabilities"][0]
    assert rec["outcome"] == [0, 0, 0, 0] and "/" in rec["p"]
