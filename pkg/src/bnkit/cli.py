"""Batch command-line interface.

Every command prints exactly one JSON document on standard output::

    {"command": ..., "status": "ok" | "error", "payload": {...}, "diagnostics": [...]}

Exit codes: 0 on success, 1 for data, model or algorithm errors, 2 for usage
errors (bad flags, unknown variables or states named on the command line).
Bulk results (models, datasets) go to ``--out`` files. When ``--seed`` is
not given, the ``BN_ENGINE_SEED`` environment variable is used, then 0.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from contextlib import contextmanager

import numpy as np

from bnkit.causal import CausalQuery, instrumental_variables, minimal_adjustment_sets
from bnkit.core.graph import Dag, Pdag, pdag_to_dag
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd
from bnkit.exceptions import BnError, ParseError
from bnkit.fit.em import EmConfig, em_fit
from bnkit.fit.parameters import bayes_fit, mle_fit
from bnkit.infer.elimination import HEURISTICS, ve_query
from bnkit.infer.evidence import Evidence
from bnkit.infer.junction import bp_query, build_junction_tree, calibrate
from bnkit.io import dump_model, load_csv, load_model, parse_edgelist, serialize_edgelist, write_csv
from bnkit.learn.citests import get_ci_test
from bnkit.learn.hillclimb import hill_climb
from bnkit.learn.mmhc import mmhc
from bnkit.learn.pc import IndependenceTester, orient_skeleton, stable_skeleton
from bnkit.learn.scores import get_score
from bnkit.learn.trees import chow_liu, tan
from bnkit.metrics import correlation_score, log_likelihood, row_log_likelihoods, structure_score
from bnkit.simulate import SimulationSpec, approx_query, effective_sample_size, simulate

SEED_ENV = "BN_ENGINE_SEED"
MODEL_EXTS = (".bif", ".uai")
ALGORITHMS = ("pc", "hc", "mmhc", "chowliu", "tan")
SCORES = ("bic", "aic", "k2", "bdeu", "bds")
CI_TESTS = ("chi_square", "g_test", "cressie_read")
TREE_WEIGHTS = ("mutual_info", "normalized_mutual_info", "adjusted_mutual_info")


class UsageError(Exception):
    """Bad flags or names; exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- report ------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in obj]
        return sorted(items, key=json.dumps) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no infinities; report them as strings
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _diagnostic(exc) -> dict:
    d = {"kind": type(exc).__name__, "message": str(exc), "severity": "error"}
    if isinstance(exc, ParseError):
        d.update(line=exc.line, column=exc.column, message=exc.diagnostic.message)
    elif getattr(exc, "line", None) is not None:
        d["line"] = exc.line
    return d


def _warning(w) -> dict:
    d = {"kind": type(w).__name__ if not isinstance(w, warnings.WarningMessage) else w.category.__name__}
    if isinstance(w, warnings.WarningMessage):
        d["message"] = str(w.message)
    else:
        d.update(line=w.line, column=w.column, message=w.message, kind="ParseWarning")
    d["severity"] = "warning"
    return d


@contextmanager
def _captured(diagnostics):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        yield
    diagnostics += [_warning(w) for w in caught]


# -- argument helpers --------------------------------------------------------


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def _pos_int(text):
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _pos_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _alpha(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return v


def _split(values):
    """Flatten repeated and comma-separated flag values."""
    out = []
    for v in values or ():
        out += [p.strip() for p in v.split(",") if p.strip()]
    return out


def _assignments(values, flag) -> dict:
    out = {}
    for item in _split(values):
        name, sep, state = item.partition("=")
        if not sep or not name or not state:
            raise UsageError(f"{flag} expects VAR=STATE, got {item!r}")
        if name in out:
            raise UsageError(f"{flag} names {name!r} twice")
        out[name] = state
    return out


def _vectors(values, flag) -> dict:
    """``VAR:p1,p2,...`` (``/`` separates rows) into ``{VAR: 2-D array}``."""
    out = {}
    for item in values or ():
        name, sep, body = item.partition(":")
        if not sep or not name or not body:
            raise UsageError(f"{flag} expects VAR:p1,p2,..., got {item!r}")
        try:
            rows = [[float(x) for x in row.split(",")] for row in body.split("/")]
        except ValueError:
            raise UsageError(f"{flag} has a non-numeric entry in {item!r}") from None
        if len({len(r) for r in rows}) != 1:
            raise UsageError(f"{flag} rows for {name!r} have different lengths")
        arr = np.array(rows)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise UsageError(f"{flag} entries for {name!r} must be finite and nonnegative")
        if name in out:
            raise UsageError(f"{flag} names {name!r} twice")
        out[name] = arr
    return out


def _check_names(names, known, flag):
    for n in names:
        if n not in known:
            raise UsageError(f"{flag} names unknown variable {n!r}")


def _check_state(bn, var, label, flag):
    if label not in bn.states(var):
        raise UsageError(f"{flag}: {label!r} is not a state of {var!r} (states: {list(bn.states(var))})")


def _model_ext(path, flag):
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in MODEL_EXTS:
        raise UsageError(f"{flag} must end in .bif or .uai, got {path!r}")
    return ext


def _is_model(path) -> bool:
    return os.path.splitext(str(path))[1].lower() in MODEL_EXTS


def _load_model(path, diagnostics):
    found = []
    bn = load_model(path, found)
    diagnostics += [_warning(w) for w in found]
    return bn


def _load_graph(path, diagnostics):
    """A Dag plus the model it came from (None for an edge list)."""
    if _is_model(path):
        bn = _load_model(path, diagnostics)
        return bn.dag, bn
    with open(path, "rb") as fh:
        graph = parse_edgelist(fh.read())
    if isinstance(graph, Pdag):
        graph = pdag_to_dag(graph)
    return graph, None


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _edges(graph):
    if isinstance(graph, Pdag):
        return [list(e) for e in sorted(graph.directed)], [list(e) for e in graph.sorted_undirected()]
    return [list(e) for e in graph.sorted_edges()], []


def _model_json(bn: DiscreteBayesianNetwork) -> dict:
    return {
        v: {
            "states": list(bn.states(v)),
            "parents": list(bn.parents(v)),
            "cpd": bn.cpd(v).table().tolist(),
        }
        for v in bn.nodes
    }


def _factor_json(bn, factor) -> dict:
    f = factor.sorted()
    rows = []
    for idx in np.ndindex(*f.cards):
        rows.append(
            {
                "assignment": {v: bn.states(v)[i] for v, i in zip(f.scope, idx)},
                "probability": float(f.values[idx]),
            }
        )
    return {"variables": list(f.scope), "table": rows}


def _uniform_model(dag: Dag, metas) -> DiscreteBayesianNetwork:
    cpds = []
    for v in dag.sorted_nodes():
        parents = dag.parents(v)
        r = metas[v].card
        q = int(np.prod([metas[p].card for p in parents])) if parents else 1
        cpds.append(TabularCpd(v, r, np.full((q, r), 1.0 / r), parents, [metas[p].card for p in parents]))
    return DiscreteBayesianNetwork(cpds, metas=[metas[v] for v in dag.sorted_nodes()])


# -- commands ----------------------------------------------------------------

_LEARN_FLAGS = {
    "score": ("hc", "mmhc"),
    "ess": ("hc", "mmhc"),
    "max_indegree": ("hc", "mmhc"),
    "ci_test": ("pc", "mmhc"),
    "alpha": ("pc", "mmhc"),
    "max_cond_size": ("pc", "mmhc"),
    "weight": ("chowliu", "tan"),
    "root": ("chowliu", "tan"),
    "class_var": ("tan",),
}


def cmd_learn(args, diagnostics):
    algo = args.algorithm
    for flag, allowed in _LEARN_FLAGS.items():
        if getattr(args, flag) is not None and algo not in allowed:
            raise UsageError(f"--{flag.replace('_', '-')} does not apply to --algorithm {algo}")
    if algo == "tan" and args.class_var is None:
        raise UsageError("--algorithm tan requires --class-var")
    if args.ess is not None and args.score not in ("bdeu", "bds"):
        raise UsageError("--ess applies only to --score bdeu or bds")
    fmt = args.format or ("bif" if args.out and args.out.lower().endswith(".bif") else "edgelist")
    if fmt == "bif" and not args.out:
        raise UsageError("--format bif needs --out")
    data = load_csv(args.data)
    for flag in ("class_var", "root"):
        v = getattr(args, flag)
        if v is not None and v not in data.columns:
            raise UsageError(f"--{flag.replace('_', '-')} names unknown column {v!r}")
    seed = _seed(args)
    score_name = args.score or "bic"
    score = get_score(score_name, args.ess)
    alpha = 0.05 if args.alpha is None else args.alpha
    ci = get_ci_test(args.ci_test or "chi_square")
    payload = {"algorithm": algo, "nodes": list(data.columns)}
    if algo == "pc":
        tester = IndependenceTester(data, alpha, ci)
        graph = orient_skeleton(stable_skeleton(tester, max_cond_size=args.max_cond_size))
        payload["tests"] = tester.n_tests
    elif algo == "hc":
        graph = hill_climb(data, score, max_indegree=args.max_indegree, seed=seed)
    elif algo == "mmhc":
        graph = mmhc(data, alpha, ci, score, args.max_cond_size, max_indegree=args.max_indegree, seed=seed)
    elif algo == "chowliu":
        graph = chow_liu(data, args.weight, args.root)
    else:
        graph = tan(data, args.class_var, args.weight, args.root)
    directed, undirected = _edges(graph)
    payload.update(edges=directed, undirected=undirected)
    if isinstance(graph, Dag):
        payload["score"] = structure_score(graph, data, score)
        payload["score_method"] = score_name
    if args.out:
        if fmt == "bif":
            dag = pdag_to_dag(graph) if isinstance(graph, Pdag) else graph
            _write(args.out, dump_model(_uniform_model(dag, {m.name: m for m in data.metas}), args.out))
        else:
            _write(args.out, serialize_edgelist(graph))
        payload.update(out=args.out, format=fmt)
    return payload


def _latent_spec(items):
    """``H`` or ``H:3`` into names and cardinalities."""
    names, cards = [], {}
    for item in _split(items):
        name, sep, card = item.partition(":")
        if sep:
            if not (card.isascii() and card.isdigit()) or int(card) < 2:
                raise UsageError(f"--latent cardinality must be an integer >= 2, got {item!r}")
            cards[name] = int(card)
        names.append(name)
    return names, cards


def cmd_fit(args, diagnostics):
    method = args.method
    if args.prior is not None and method != "bayes":
        raise UsageError("--prior applies only to --method bayes")
    if args.ess is not None and method != "bayes":
        raise UsageError("--ess applies only to --method bayes")
    if args.ess is not None and (args.prior or "k2") != "bdeu":
        raise UsageError("--ess applies only to --prior bdeu")
    if method != "em" and (args.latent or args.max_iter is not None or args.tol is not None):
        raise UsageError("--latent, --max-iter and --tol apply only to --method em")
    if args.out:
        _model_ext(args.out, "--out")
    dag, source = _load_graph(args.dag, diagnostics)
    latents, latent_cards = _latent_spec(args.latent)
    _check_names(latents, dag.nodes, "--latent")
    schema = dict(source.metas) if source is not None else None
    data = load_csv(args.data, schema)
    payload = {"method": method, "nodes": dag.sorted_nodes(), "edges": [list(e) for e in dag.sorted_edges()]}
    if method == "mle":
        model = mle_fit(dag, data)
    elif method == "bayes":
        model = bayes_fit(dag, data, args.prior or "k2", args.ess)
    else:
        latent_states = {}
        for h in latents:
            if h in latent_cards:
                latent_states[h] = latent_cards[h]
            elif source is not None:
                latent_states[h] = source.states(h)
        config = EmConfig(
            args.max_iter if args.max_iter is not None else 100,
            args.tol if args.tol is not None else 1e-4,
            _seed(args),
        )
        result = em_fit(dag, data, latents, config, latent_states)
        model = result.model
        payload.update(
            trace=result.log_likelihoods,
            converged=result.converged,
            n_iter=result.n_iter,
            log_likelihood=result.log_likelihoods[-1],
        )
    if method != "em":
        payload["log_likelihood"] = log_likelihood(model, data)
    if source is not None:
        model = DiscreteBayesianNetwork(model.cpds.values(), model.metas, model.latents, source.metadata)
    if args.out:
        _write(args.out, dump_model(model, args.out))
        payload["out"] = args.out
    else:
        payload["model"] = _model_json(model)
    return payload


def _evidence(bn, args) -> Evidence:
    hard = _assignments(args.evidence, "--evidence")
    _check_names(hard, bn.cpds, "--evidence")
    for v, s in hard.items():
        _check_state(bn, v, s, "--evidence")
    virtual = _vectors(args.virtual, "--virtual")
    _check_names(virtual, bn.cpds, "--virtual")
    for v, arr in virtual.items():
        if arr.shape != (1, bn.card(v)):
            raise UsageError(f"--virtual for {v!r} needs {bn.card(v)} entries")
        if not arr.sum() > 0:
            raise UsageError(f"--virtual for {v!r} is all zero")
    both = set(hard) & set(virtual)
    if both:
        raise UsageError(f"variables with both --evidence and --virtual: {sorted(both)}")
    return Evidence(hard, {v: a[0] for v, a in virtual.items()}).resolve(bn)


def cmd_query(args, diagnostics):
    if args.samples is not None and args.engine != "approx":
        raise UsageError("--samples applies only to --engine approx")
    if args.heuristic is not None and args.engine != "ve":
        raise UsageError("--heuristic applies only to --engine ve")
    bn = _load_model(args.model, diagnostics)
    query = _split(args.query)
    if not query:
        raise UsageError("--query needs at least one variable")
    if len(set(query)) != len(query):
        raise UsageError("--query repeats a variable")
    _check_names(query, bn.cpds, "--query")
    ev = _evidence(bn, args)
    clash = set(query) & set(ev.hard)
    if clash:
        raise UsageError(f"query variables also carry --evidence: {sorted(clash)}")
    payload = {"engine": args.engine}
    if args.engine == "ve":
        factor = ve_query(bn, query, ev, args.heuristic or "MinFill")
    elif args.engine == "bp":
        factor = bp_query(calibrate(build_junction_tree(bn), ev), query)
    else:
        n = args.samples if args.samples is not None else 10_000
        factor, ess = approx_query(bn, query, ev, n=n, seed=_seed(args))
        payload.update(samples=n, ess=ess, seed=_seed(args))
    payload.update(_factor_json(bn, factor))
    return payload


def cmd_simulate(args, diagnostics):
    bn = _load_model(args.model, diagnostics)
    ev = _evidence(bn, args)
    do = _assignments(args.do, "--do")
    _check_names(do, bn.cpds, "--do")
    for v, s in do.items():
        _check_state(bn, v, s, "--do")
    virtual_do = {}
    for v, arr in _vectors(args.virtual_do, "--virtual-do").items():
        _check_names([v], bn.cpds, "--virtual-do")
        cpd = bn.cpd(v)
        q = int(np.prod(cpd.parent_cards)) if cpd.parents else 1
        if arr.shape[1] != bn.card(v) or arr.shape[0] not in (1, q):
            raise UsageError(f"--virtual-do for {v!r} needs 1 or {q} rows of {bn.card(v)} entries")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-6):
            raise UsageError(f"--virtual-do rows for {v!r} must sum to 1")
        table = np.broadcast_to(arr / sums[:, None], (q, bn.card(v)))
        virtual_do[v] = TabularCpd(v, bn.card(v), table, cpd.parents, cpd.parent_cards)
    spec = SimulationSpec(
        n=args.n,
        seed=_seed(args),
        hard_evidence=ev.hard,
        virtual_evidence=ev.virtual,
        hard_intervention=do,
        virtual_intervention=virtual_do,
        method=args.method,
    )
    data = simulate(bn, spec)
    weighted = spec.has_evidence
    if not weighted:
        data = data.with_weights(None)
    text = write_csv(data)
    payload = {"n_rows": data.n_rows, "columns": list(data.columns), "weighted": weighted, "seed": spec.seed}
    if weighted:
        payload["ess"] = effective_sample_size(data.weights)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        payload["out"] = args.out
    else:
        payload["csv"] = text
    return payload


def cmd_identify(args, diagnostics):
    dag, _ = _load_graph(args.dag, diagnostics)
    latents = _split(args.latent)
    _check_names([args.exposure, args.outcome, *latents], dag.nodes, "--exposure/--outcome/--latent")
    if args.exposure == args.outcome:
        raise UsageError("--exposure and --outcome must differ")
    if {args.exposure, args.outcome} & set(latents):
        raise UsageError("--exposure and --outcome must be observed")
    q = CausalQuery(args.exposure, args.outcome, dag, frozenset(latents))
    payload = {"what": args.what, "exposure": args.exposure, "outcome": args.outcome, "latents": sorted(latents)}
    if args.what == "adjustment":
        sets = [sorted(s) for s in minimal_adjustment_sets(q)]
        payload.update(sets=sets, identified=bool(sets))
    else:
        ivs = [iv.to_dict() for iv in instrumental_variables(q)]
        payload.update(instruments=ivs, identified=bool(ivs))
    return payload


def cmd_score(args, diagnostics):
    metric = args.metric
    kind, _, score_name = metric.partition(":")
    if kind == "structure":
        if score_name not in SCORES:
            raise UsageError(f"--metric structure:<score> needs one of {list(SCORES)}, got {metric!r}")
    elif kind not in ("loglik", "correlation") or score_name:
        raise UsageError(f"unknown --metric {metric!r}")
    if args.ess is not None and score_name not in ("bdeu", "bds"):
        raise UsageError("--ess applies only to structure:bdeu or structure:bds")
    if kind != "correlation" and (args.ci_test is not None or args.alpha is not None):
        raise UsageError("--ci-test and --alpha apply only to --metric correlation")
    if args.per_row and kind != "loglik":
        raise UsageError("--per-row applies only to --metric loglik")
    if kind == "loglik" and not _is_model(args.model):
        raise UsageError("--metric loglik needs a parameterized model (.bif or .uai), not a bare DAG")
    dag, bn = _load_graph(args.model, diagnostics)
    data = load_csv(args.data, dict(bn.metas) if bn is not None else None)
    payload = {"metric": metric, "n_rows": data.n_rows}
    if kind == "loglik":
        rows = row_log_likelihoods(bn, data)
        w = data.row_weights()
        payload["value"] = log_likelihood(bn, data)
        payload["mean"] = payload["value"] / float(w.sum()) if w.sum() > 0 else 0.0
        if args.per_row:
            payload["rows"] = rows.tolist()
    elif kind == "structure":
        payload["value"] = structure_score(dag, data, get_score(score_name, args.ess))
    else:
        alpha = 0.05 if args.alpha is None else args.alpha
        result = correlation_score(bn if bn is not None else dag, data, args.ci_test or "chi_square", alpha)
        payload["value"] = result.f1
        payload.update(result.to_dict())
    return payload


def cmd_convert(args, diagnostics):
    _model_ext(args.input, "input")
    _model_ext(args.output, "output")
    bn = _load_model(args.input, diagnostics)
    _write(args.output, dump_model(bn, args.output))
    return {
        "input": args.input,
        "output": args.output,
        "variables": len(bn.nodes),
        "edges": len(bn.dag.edges),
    }


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bnkit", description="Discrete Bayesian network toolkit. Prints one JSON report.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def seed_flag(sp):
        sp.add_argument("--seed", type=int, help=f"random seed (default: ${SEED_ENV}, else 0)")

    def evidence_flags(sp):
        sp.add_argument("--evidence", action="append", metavar="VAR=STATE", help="hard evidence; repeatable or comma-separated")
        sp.add_argument("--virtual", action="append", metavar="VAR:P1,P2,...", help="virtual evidence likelihood vector; repeatable")

    s = sub.add_parser("learn", help="learn a graph from data", description="Learn a DAG (or CPDAG for pc) from a CSV dataset.")
    s.add_argument("data", help="CSV dataset")
    s.add_argument("--algorithm", choices=ALGORITHMS, default="hc", help="structure learner (default: hc)")
    s.add_argument("--score", choices=SCORES, help="score for hc and mmhc (default: bic)")
    s.add_argument("--ess", type=_pos_float, help="equivalent sample size for bdeu and bds")
    s.add_argument("--ci-test", choices=CI_TESTS, help="CI test for pc and mmhc (default: chi_square)")
    s.add_argument("--alpha", type=_alpha, help="significance level in (0, 1) for pc and mmhc (default: 0.05)")
    s.add_argument("--max-cond-size", type=_nonneg_int, help="largest conditioning set for pc and mmhc")
    s.add_argument("--max-indegree", type=_nonneg_int, help="parent limit for hc and mmhc")
    s.add_argument("--weight", choices=TREE_WEIGHTS, help="edge weight for chowliu and tan (default: mutual_info)")
    s.add_argument("--root", help="tree root for chowliu and tan")
    s.add_argument("--class-var", help="class column for tan (required there)")
    seed_flag(s)
    s.add_argument("--out", help="write the graph here")
    s.add_argument("--format", choices=("edgelist", "bif"), help="--out format (default: bif for *.bif, else edgelist)")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("fit", help="fit CPDs to data", description="Estimate CPDs for a DAG given as BIF/UAI or an edge list.")
    s.add_argument("dag", help="graph: .bif/.uai model (its states become the data schema) or edge list")
    s.add_argument("data", help="CSV dataset")
    s.add_argument("--method", choices=("mle", "bayes", "em"), default="mle", help="estimator (default: mle)")
    s.add_argument("--prior", choices=("k2", "bdeu"), help="prior for bayes (default: k2)")
    s.add_argument("--ess", type=_pos_float, help="equivalent sample size for --prior bdeu (default: 1)")
    s.add_argument("--latent", action="append", metavar="VAR[:CARD]", help="latent node for em, optional cardinality (default 2)")
    s.add_argument("--max-iter", type=_pos_int, help="em iteration limit (default: 100)")
    s.add_argument("--tol", type=_pos_float, help="em log-likelihood tolerance (default: 1e-4)")
    seed_flag(s)
    s.add_argument("--out", help="write the model here (.bif or .uai); without it the model goes in the JSON payload")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("query", help="posterior distribution", description="Compute P(query | evidence).")
    s.add_argument("model", help=".bif or .uai model")
    s.add_argument("--query", action="append", required=True, metavar="X,Y", help="query variables")
    evidence_flags(s)
    s.add_argument("--engine", choices=("ve", "bp", "approx"), default="ve", help="inference engine (default: ve)")
    s.add_argument("--heuristic", choices=HEURISTICS, help="elimination ordering for ve (default: MinFill)")
    s.add_argument("--samples", type=_pos_int, help="samples for approx (default: 10000)")
    seed_flag(s)
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("simulate", help="sample data", description="Sample a CSV dataset under evidence and interventions.")
    s.add_argument("model", help=".bif or .uai model")
    s.add_argument("--n", type=_pos_int, default=1000, help="number of samples (default: 1000)")
    seed_flag(s)
    s.add_argument("--do", action="append", metavar="VAR=STATE", help="hard intervention; repeatable or comma-separated")
    evidence_flags(s)
    s.add_argument(
        "--virtual-do",
        action="append",
        metavar="VAR:P1,P2/P1,P2",
        help="replacement CPD rows ('/' between parent configurations; one row applies to all); repeatable",
    )
    s.add_argument("--method", choices=("weighting", "rejection"), default="weighting", help="evidence handling (default: weighting)")
    s.add_argument("--out", help="write the CSV here; without it the CSV goes in the JSON payload")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("identify", help="adjustment sets or instruments", description="Causal identification on a DAG.")
    s.add_argument("dag", help="graph: .bif/.uai model or edge list")
    s.add_argument("--exposure", required=True, help="treatment variable")
    s.add_argument("--outcome", required=True, help="outcome variable")
    s.add_argument("--what", choices=("adjustment", "iv"), default="adjustment", help="what to find (default: adjustment)")
    s.add_argument("--latent", action="append", metavar="VAR", help="unobserved node; repeatable or comma-separated")
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("score", help="model testing", description="Score a model or DAG against data.")
    s.add_argument("model", help=".bif/.uai model or edge-list DAG")
    s.add_argument("data", help="CSV dataset")
    s.add_argument("--metric", default="loglik", metavar="METRIC", help="loglik | structure:<bic|aic|k2|bdeu|bds> | correlation (default: loglik)")
    s.add_argument("--ess", type=_pos_float, help="equivalent sample size for structure:bdeu and structure:bds")
    s.add_argument("--ci-test", choices=CI_TESTS, help="CI test for correlation (default: chi_square)")
    s.add_argument("--alpha", type=_alpha, help="significance level for correlation (default: 0.05)")
    s.add_argument("--per-row", action="store_true", help="also report per-row log-likelihoods")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("convert", help="convert between BIF and UAI", description="Convert or canonicalize a model file.")
    s.add_argument("input", help="input .bif or .uai")
    s.add_argument("output", help="output .bif or .uai")
    s.set_defaults(func=cmd_convert)
    return p


def run(argv=None):
    """Execute a command; returns ``(exit_code, report)``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    diagnostics = []
    report = {"command": command, "status": "error", "payload": {}, "diagnostics": diagnostics}
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("bnkit: a command is required")
        report["command"] = args.command
        with _captured(diagnostics):
            payload = args.func(args, diagnostics)
        report.update(status="ok", payload=payload)
        code = 0
    except UsageError as exc:
        diagnostics.append({"kind": "UsageError", "message": str(exc), "severity": "error"})
        code = 2
    except (BnError, ValueError, OSError) as exc:
        diagnostics.append(_diagnostic(exc))
        code = 1
    except Exception as exc:  # noqa: BLE001 - stdout must stay one JSON document
        diagnostics.append({"kind": "InternalError", "message": f"{type(exc).__name__}: {exc}", "severity": "error"})
        code = 1
    return code, _jsonable(report)


def main(argv=None) -> int:
    code, report = run(argv)
    sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")
    sys.stdout.flush()
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
