"""Command-line interface: ``stk build|check|verify-theorem|toric-check|render``.

Exit codes: 0 success, 1 disagreement or failed check, 2 parse error,
3 precondition violated, 4 size bound exceeded.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from .balance import is_balanced, is_simple
from .graph_core import (
    Dag,
    GraphError,
    enumerate_dags,
    enumerate_linear_extensions,
    find_collider,
    is_chordal,
    is_linear_extension,
    is_perfect,
    random_dag,
    skeleton,
)
from .model import leaf_distribution, sample_parameters
from .staged_tree import (
    SizeBoundError,
    StagedTree,
    StagedTreeError,
    StateSpace,
    build_tree,
    export_dot,
    max_leaves_default,
    recognize_dag_staging,
)
from .toric import check_vanishing, exponent_matrix_cliques, exponent_matrix_psi_toric, quadratic_relations

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_PRECONDITION, EXIT_BOUNDS = 0, 1, 2, 3, 4
DEFAULT_MAX_NODES = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_ints(text: str, what: str) -> list:
    try:
        vals = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise CliError(EXIT_PARSE, f"--{what}: expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise CliError(EXIT_PARSE, f"--{what}: empty list")
    return vals


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _load_dag(path: str) -> Dag:
    data = _load_json(path)
    try:
        return Dag.from_json(data)
    except GraphError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def _load_any(path: str):
    """A DAG or a staged tree, told apart by their keys."""
    data = _load_json(path)
    if isinstance(data, dict) and "stages" in data:
        try:
            return StagedTree.from_json(data)
        except (StagedTreeError, GraphError) as exc:
            raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    try:
        return Dag.from_json(data)
    except GraphError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def _state_space(args, p: int) -> StateSpace:
    cards = _parse_ints(args.cards, "cards")
    if len(cards) == 1:
        cards = cards * p
    if len(cards) != p:
        raise CliError(EXIT_PARSE, f"--cards: expected 1 or {p} values, got {len(cards)}")
    try:
        return StateSpace(tuple(cards))
    except StagedTreeError as exc:
        raise CliError(EXIT_PARSE, f"--cards: {exc}") from None


def _ordering(args, g: Dag) -> tuple:
    if args.order:
        order = tuple(_parse_ints(args.order, "order"))
        try:
            ok = is_linear_extension(g, order)
        except GraphError as exc:
            raise CliError(EXIT_PARSE, f"--order: {exc}") from None
        if not ok:
            raise CliError(EXIT_PRECONDITION, f"order {list(order)} is not a linear extension of {g}")
        return order
    ident = tuple(g.nodes)
    if is_linear_extension(g, ident):
        return ident
    return enumerate_linear_extensions(g, max_nodes=max(g.p, 8))[0]


def _max_leaves(args) -> int:
    return args.max_leaves if args.max_leaves is not None else max_leaves_default()


def _build(args, g: Dag) -> StagedTree:
    order = _ordering(args, g)
    s = _state_space(args, g.p)
    try:
        return build_tree(g, order, s, max_leaves=_max_leaves(args))
    except SizeBoundError as exc:
        raise CliError(EXIT_BOUNDS, str(exc)) from None


def _tree_from(args, obj) -> StagedTree:
    return obj if isinstance(obj, StagedTree) else _build(args, obj)


# -- subcommands ---------------------------------------------------------


def cmd_build(args) -> int:
    t = _build(args, _load_dag(args.dag_file))
    _emit(_dump(t.to_json()), args.out)
    if args.dot:
        Path(args.dot).write_text(export_dot(t))
    return EXIT_OK


def check_report(obj, tree: StagedTree) -> dict:
    """Predicates for a DAG (via its tree) or a user-supplied staged tree."""
    bal = is_balanced(tree)
    rec = recognize_dag_staging(tree)
    if isinstance(obj, Dag):
        g = obj
    else:
        g = rec[0] if rec is not None else None
    report = {
        "input": "dag" if isinstance(obj, Dag) else "staged_tree",
        "order": list(tree.order),
        "cardinalities": [tree.state_space.card(v) for v in tree.order],
        "balanced": bal.balanced,
        "n_balance_failures": len(bal.failures),
        "simple": is_simple(tree),
        "dag_representable": rec is not None,
        "perfect": is_perfect(g) if g is not None else None,
        "chordal_skeleton": is_chordal(skeleton(g)) if g is not None else None,
    }
    if g is not None:
        report["dag"] = g.to_json()
        col = find_collider(g)
        report["collider"] = list(col) if col else None
    return report


def cmd_check(args) -> int:
    obj = _load_any(args.file)
    tree = _tree_from(args, obj)
    _emit(_dump(check_report(obj, tree)), args.out)
    return EXIT_OK


def _sweep_cards(cards: list, p: int) -> tuple:
    # exhaustive mode cycles through the given cardinalities variable by variable
    return tuple(cards[i % len(cards)] for i in range(p))


def _case(case_id, g: Dag, order, s: StateSpace) -> dict:
    t = build_tree(g, order, s)
    perfect = is_perfect(g)
    balanced = is_balanced(t).balanced
    return {
        "id": case_id,
        "dag": g.to_json()["edges"],
        "order": list(order),
        "cardinalities": list(s.cardinalities),
        "perfect": perfect,
        "balanced": balanced,
        "agree": perfect == balanced,
    }


def verify_theorem(p_max: int, cards: list, mode: str = "exhaustive", n: int = 0, seed: int = 0,
                   edge_prob: float = 0.5, max_nodes: int = DEFAULT_MAX_NODES) -> dict:
    """Compare perfectness of ``G`` with balance of its staged tree, case by case."""
    cases = []
    if mode == "exhaustive":
        if p_max > max_nodes:
            raise CliError(EXIT_BOUNDS, f"exhaustive sweep limited to p <= {max_nodes}; raise --max-nodes")
        s = StateSpace(_sweep_cards(cards, p_max))
        dags = enumerate_dags(p_max)
        for d, g in enumerate(dags):
            for e, order in enumerate(enumerate_linear_extensions(g)):
                cases.append(_case([d, e], g, order, s))
        n_dags = len(dags)
    elif mode == "random":
        rng = random.Random(seed)
        for r in range(n):
            g = random_dag(p_max, edge_prob, seed=rng.randrange(2**32))
            s = StateSpace(tuple(rng.choice(cards) for _ in range(p_max)))
            order = rng.choice(enumerate_linear_extensions(g))
            cases.append(_case([r, 0], g, order, s))
        n_dags = n
    else:
        raise CliError(EXIT_PARSE, f"--mode must be 'exhaustive' or 'random', got {mode!r}")
    cases.sort(key=lambda c: c["id"])
    disagree = sum(not c["agree"] for c in cases)
    return {
        "mode": mode,
        "p_max": p_max,
        "cards": list(cards),
        "seed": seed,
        "bounds": {"max_nodes": max_nodes, "edge_prob": edge_prob, "n": n},
        "summary": {
            "dags": n_dags,
            "cases": len(cases),
            "perfect": sum(c["perfect"] for c in cases),
            "balanced": sum(c["balanced"] for c in cases),
            "disagreements": disagree,
            "passed": disagree == 0,
        },
        "cases": cases,
    }


def cmd_verify_theorem(args) -> int:
    cards = _parse_ints(args.cards, "cards")
    if any(c < 2 for c in cards):
        raise CliError(EXIT_PARSE, "--cards: cardinalities must be >= 2")
    t0 = time.perf_counter()
    report = verify_theorem(args.p_max, cards, args.mode, args.n, args.seed, args.edge_prob, args.max_nodes)
    elapsed = time.perf_counter() - t0
    _emit(_dump(report), args.out)
    summ = report["summary"]
    print(
        f"{summ['cases']} cases over {summ['dags']} DAGs, {summ['disagreements']} disagreements "
        f"({elapsed:.1f}s)",
        file=sys.stderr,
    )
    return EXIT_OK if summ["passed"] else EXIT_FAIL


def toric_report(g: Dag, tree: StagedTree, samples: int, seed: int, tol: float, exact: bool = False) -> dict:
    """Residuals of both maps' quadratic relations over sampled model points.

    Per relation the worst residual over all samples is kept.
    """
    rng = random.Random(seed)
    seeds = [rng.randrange(2**32) for _ in range(samples)]
    points = [leaf_distribution(tree, sample_parameters(tree, sd)) for sd in seeds]
    out = {"samples": samples, "seed": seed, "tol": tol, "exact": exact, "order": list(tree.order)}
    passed = True
    for name, m in (("psi_toric", exponent_matrix_psi_toric(tree)),
                    ("cliques", exponent_matrix_cliques(g, tree.state_space))):
        rels = quadratic_relations(m)
        worst = [0] * len(rels)
        for f in points:
            rep = check_vanishing(rels, m, f, tol=tol, exact=exact)
            worst = [max(a, abs(b)) for a, b in zip(worst, rep.residuals)]
        failing = [k for k, r in enumerate(worst) if (r != 0 if exact else r > tol)]
        passed = passed and not failing
        out[name] = {
            "n_relations": len(rels),
            "n_failing": len(failing),
            "failing": [dict(rels[k].to_json(m), residual=str(worst[k]) if exact else float(worst[k]))
                        for k in failing],
            "max_residual": (str(max(worst)) if exact else float(max(worst))) if rels and points else None,
        }
    out["passed"] = passed
    return out


def cmd_toric_check(args) -> int:
    g = _load_dag(args.dag_file)
    tree = _build(args, g)
    report = toric_report(g, tree, args.samples, args.seed, args.tol, args.exact)
    _emit(_dump(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_render(args) -> int:
    tree = _tree_from(args, _load_any(args.file))
    try:
        _emit(export_dot(tree), args.out)
    except SizeBoundError as exc:
        raise CliError(EXIT_BOUNDS, str(exc)) from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stk", description="Staged trees of discrete DAG models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def tree_opts(sp):
        sp.add_argument("--order", help="causal ordering, e.g. 1,2,3,4 (default: identity or first extension)")
        sp.add_argument("--cards", default="2", help="cardinalities: one value or one per variable")
        sp.add_argument("--max-leaves", type=int, default=None, help="leaf bound (env STK_MAX_LEAVES)")
        sp.add_argument("--out", help="output file (default stdout)")

    sp = sub.add_parser("build", help="build the staged tree of a DAG")
    sp.add_argument("dag_file")
    tree_opts(sp)
    sp.add_argument("--dot", help="also write a DOT rendering here")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("check", help="report perfectness, balance, simplicity, DAG recognition")
    sp.add_argument("file", help="DAG JSON or staged-tree JSON")
    tree_opts(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("verify-theorem", help="sweep DAGs comparing perfectness with balance")
    sp.add_argument("--p-max", type=int, default=3, help="number of nodes")
    sp.add_argument("--cards", default="2", help="cardinalities to use, e.g. 2 or 2,3")
    sp.add_argument("--mode", default="exhaustive", choices=["exhaustive", "random"])
    sp.add_argument("--n", type=int, default=100, help="random mode: number of DAGs")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--edge-prob", type=float, default=0.5)
    sp.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES, help="exhaustive-mode node bound")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify_theorem)

    sp = sub.add_parser("toric-check", help="evaluate quadratic toric relations on sampled model points")
    sp.add_argument("dag_file")
    tree_opts(sp)
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--exact", action="store_true", help="exact rational residuals")
    sp.set_defaults(func=cmd_toric_check)

    sp = sub.add_parser("render", help="DOT rendering of a DAG's staged tree or a staged-tree file")
    sp.add_argument("file")
    tree_opts(sp)
    sp.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"stk: error: {exc}", file=sys.stderr)
        return exc.code
    except SizeBoundError as exc:
        print(f"stk: error: {exc}", file=sys.stderr)
        return EXIT_BOUNDS
    except (StagedTreeError, GraphError) as exc:
        print(f"stk: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
