"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""
import itertools
import json
import random
import time

from stagetree.balance import is_balanced, is_balanced_pair, lemma_balance_bruteforce
from stagetree.cli import check_report, main, verify_theorem
from stagetree.graph_core import (
    Dag,
    enumerate_dags,
    enumerate_linear_extensions,
    find_collider,
    is_perfect,
    parents,
    random_dag,
)
from stagetree.model import conditional, leaf_distribution, sample_parameters
from stagetree.polynomial import evaluate, interpolating_poly
from stagetree.staged_tree import StateSpace, build_tree, recognize_dag_staging
from stagetree.toric import check_vanishing, exponent_matrix_cliques, exponent_matrix_psi_toric, quadratic_relations

FIXTURE_SEED = 2024


def report(n, ok, detail):
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _all_cases(p):
    s = StateSpace.binary(p)
    for g in enumerate_dags(p):
        for order in enumerate_linear_extensions(g):
            yield g, order, build_tree(g, order, s)


def _lemma_fixtures():
    rng = random.Random(FIXTURE_SEED)
    out = []
    for n in range(50):
        p = rng.randint(1, 5)
        g = random_dag(p, rng.choice((0.3, 0.5, 0.8)), seed=rng.randrange(2**32))
        s = StateSpace(tuple(rng.choice((2, 3)) for _ in range(p)))
        if s.size() > 120:
            s = StateSpace.binary(p)
        order = rng.choice(enumerate_linear_extensions(g))
        t = build_tree(g, order, s)
        out.append((t, sample_parameters(t, n)))
    return out


def test_criterion_1_reference_examples(data_dir):
    t0 = time.perf_counter()
    reps = {}
    for name in ("g1", "g2"):
        g = Dag.from_json((data_dir / f"{name}.json").read_text())
        reps[name] = check_report(g, build_tree(g, (1, 2, 3, 4), StateSpace.binary(4)))
    elapsed = time.perf_counter() - t0
    g1, g2 = reps["g1"], reps["g2"]
    ok = (g2["perfect"] and g2["balanced"] and g2["simple"]
          and g1["perfect"] is False and g1["balanced"] is False and elapsed < 1.0)
    report(1, ok, f"G2 perfect/balanced/simple={g2['perfect']}/{g2['balanced']}/{g2['simple']}, "
                  f"G1 perfect/balanced={g1['perfect']}/{g1['balanced']}, {elapsed:.3f}s < 1s")


def test_criterion_2_theorem_sweep():
    t0 = time.perf_counter()
    r3 = verify_theorem(3, [2])
    r4 = verify_theorem(4, [2])
    elapsed = time.perf_counter() - t0
    s3, s4 = r3["summary"], r4["summary"]
    ok = (s3["dags"] == 25 and s4["dags"] == 543
          and s3["disagreements"] == s4["disagreements"] == 0 and elapsed < 300)
    report(2, ok, f"{s3['dags']}+{s4['dags']} DAGs, {s3['cases']}+{s4['cases']} cases, "
                  f"{s3['disagreements'] + s4['disagreements']} disagreements, {elapsed:.1f}s < 300s")


def test_criterion_3_mixed_sweep(capsys):
    argv = ["verify-theorem", "--p-max", "5", "--cards", "2,3", "--mode", "random", "--n", "200", "--seed", "7"]
    code = main(argv)
    first = capsys.readouterr().out
    main(argv)
    second = capsys.readouterr().out
    summ = json.loads(first)["summary"]
    ok = code == 0 and summ["cases"] == 200 and summ["disagreements"] == 0 and first == second
    with capsys.disabled():
        report(3, ok, f"{summ['cases']} random 5-node DAGs with cards in {{2,3}}, "
                      f"{summ['disagreements']} disagreements, reproducible={first == second}")


def test_criterion_4_conditionals_exact():
    bad = edges = 0
    for t, alpha in _lemma_fixtures():
        f = leaf_distribution(t, alpha)
        for v in t.internal_vertices:
            for x, lab in enumerate(t.theta[v]):
                edges += 1
                bad += conditional(f, t, v, x) != alpha[lab]
    report(4, bad == 0, f"50 fixtures, {edges} internal edges, {bad} exact mismatches")


def test_criterion_5_normalization():
    bad = 0
    for t, alpha in _lemma_fixtures():
        root = evaluate(interpolating_poly(t, ()), alpha.values)
        bad += not (root == 1 == leaf_distribution(t, alpha).total())
    report(5, bad == 0, f"50 fixtures, t(root)(alpha) == sum of leaves == 1 exactly, {bad} failures")


def test_criterion_6_oracle_agreement():
    pairs = bad = 0
    for _, _, t in _all_cases(4):
        for block in t.stages:
            for v, w in itertools.combinations(block, 2):
                pairs += 1
                bad += lemma_balance_bruteforce(t, v, w) != is_balanced_pair(t, v, w)
    report(6, bad == 0 and pairs > 0, f"{pairs} same-stage pairs over all 4-node binary trees, {bad} disagreements")


def test_criterion_7_round_trip():
    cases = bad = 0
    for p in (3, 4):
        for g, order, t in _all_cases(p):
            cases += 1
            rec = recognize_dag_staging(t)
            bad += rec is None or rec[1] != order or any(
                parents(rec[0], v) != parents(g, v) for v in g.nodes)
    report(7, bad == 0, f"{cases} (DAG, extension) cases, {bad} parent-set mismatches")


def test_criterion_8_toric_implication():
    dags = checks = float_bad = exact_bad = 0
    worst = 0.0
    for p in range(1, 5):
        s = StateSpace.binary(p)
        for g in enumerate_dags(p):
            if not is_perfect(g):
                continue
            dags += 1
            t = build_tree(g, enumerate_linear_extensions(g)[0], s)
            mats = [exponent_matrix_psi_toric(t), exponent_matrix_cliques(g, s)]
            rels = [quadratic_relations(m) for m in mats]
            for seed in range(20):
                f = leaf_distribution(t, sample_parameters(t, seed))
                for m, rs in zip(mats, rels):
                    fl = check_vanishing(rs, m, f, tol=1e-9)
                    ex = check_vanishing(rs, m, f, exact=True)
                    checks += len(rs)
                    float_bad += len(fl.failing)
                    exact_bad += len(ex.failing)
                    worst = max([worst] + [abs(r) for r in fl.residuals])
    ok = float_bad == 0 and exact_bad == 0
    report(8, ok, f"{dags} perfect DAGs on <= 4 binary nodes, {checks} relation evaluations, "
                  f"float failures {float_bad} (max |residual| {worst:.2e} <= 1e-9), exact failures {exact_bad}")


def test_criterion_9_collider_obstruction():
    cases = bad = 0
    for p in (3, 4):
        for g, order, t in _all_cases(p):
            col = find_collider(g)
            if col is None:
                continue
            cases += 1
            i, _, j = col
            pos = {u: n for n, u in enumerate(order)}
            # failing level is where the later parent is decided; prefixes differ at the earlier one
            later, earlier = max(pos[i], pos[j]), min(pos[i], pos[j])
            fails = is_balanced(t).failures
            bad += not any(f.level == later and f.v[earlier] != f.w[earlier] for f in fails)
    report(9, bad == 0 and cases > 0, f"{cases} non-perfect (DAG, extension) cases, {bad} without the collider failure")
