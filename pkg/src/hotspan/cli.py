"""Command line entry point: ``hotspan <subcommand> ...``.

Every command writes a JSON document to ``--out`` (or stdout). Failures exit
with status 1 and a JSON error record on stderr; bad usage exits with 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields

from . import io
from .detect import detect_naive, detect_proposed, prob_error, span_error
from .em import EMConfig, fit_piecewise, fit_span, fit_uniform
from .experiment import ExperimentConfig, run_experiment
from .graph import generate_random_graph, load_edge_list, mean_out_degree, save_edge_list
from .likelihood import build_cache, dump_scores, link_gradient
from .multispan import detect_multispan
from .simulate import PiecewiseSchedule, simulate_dataset


class UsageError(Exception):
    pass


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _emit(doc, out):
    text = io.dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_gen_graph(args):
    if not args.out:
        raise UsageError("gen-graph requires --out")
    g = generate_random_graph(args.nodes, args.mean_out_degree, seed=args.seed)
    save_edge_list(g, args.out)
    return None, {"nodes": g.node_count, "edges": g.edge_count, "mean_out_degree": mean_out_degree(g)}


def cmd_simulate(args):
    if not args.out:
        raise UsageError("simulate requires --out")
    g = load_edge_list(args.graph)
    sched = PiecewiseSchedule.hot_span(args.p1, args.p2, args.t1, args.t2, args.r)
    horizon = args.horizon if args.horizon is not None else 3.0 * args.t2
    data = simulate_dataset(g, sched, args.episodes, horizon, seed=args.seed,
                            min_activations=args.min_activations)
    io.save_dataset(data, args.out)
    return None, {"episodes": data.M, "activations": [len(ep) for ep in data.episodes],
                  "resimulations": data.resimulations, "Phi": horizon}


def _em(args):
    return EMConfig(tol=args.tol, max_iter=args.max_iter)


def cmd_fit(args):
    data = io.load_dataset(args.data)
    if args.span:
        fit = fit_span(data, tuple(args.span), _em(args))
        model = {"span": list(args.span)}
    elif args.boundaries:
        fit = fit_piecewise(data, _floats(args.boundaries), _em(args))
        model = {"boundaries": list(fit.boundaries)}
    else:
        fit = fit_uniform(data, _em(args))
        model = {}
    return {
        **model,
        "probs": list(fit.probs), "r": fit.r, "loglik": fit.loglik,
        "iterations": fit.n_iter, "converged": fit.converged, "em_runs": 1,
    }, None


def cmd_detect(args):
    data = io.load_dataset(args.data)
    em = _em(args)
    if args.method == "proposed":
        rep = detect_proposed(data, em, weak_threshold=args.weak_threshold)
    else:
        rep = detect_naive(data, args.k, seed=args.seed, config=em)
    doc = rep.to_dict()
    if args.truth:
        t1, t2, p1, p2 = _floats(args.truth)
        doc["E_s"] = span_error(rep.span, (t1, t2))
        doc["E_p"] = prob_error((rep.p1, rep.p2), (p1, p2))
    if args.dump_scores:
        cache = build_cache(data)
        uni = fit_uniform(cache, em)
        with open(args.dump_scores, "w", encoding="utf-8") as fh:
            fh.write(io.dumps(dump_scores(cache, link_gradient(cache, uni.p, uni.r))))
    return doc, None


def cmd_detect_multi(args):
    data = io.load_dataset(args.data)
    st = detect_multispan(data, args.max_segments, _em(args), criterion=args.criterion,
                          scoring=args.scoring)
    return st.to_dict(), None


def cmd_experiment(args):
    kw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            kw.update(json.load(fh))
    names = {f.name for f in fields(ExperimentConfig)}
    for name in names:
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    cfg = ExperimentConfig(**kw)
    return run_experiment(cfg).to_dict(), None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master RNG seed")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--workers", type=int, default=None, help="parallel trial workers")
    common.add_argument("-v", "--verbose", action="store_true")

    em = argparse.ArgumentParser(add_help=False)
    em.add_argument("--tol", type=float, default=1e-8)
    em.add_argument("--max-iter", type=int, default=1000)

    p = argparse.ArgumentParser(prog="hotspan", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-graph", parents=[common], help="directed Erdos-Renyi edge list")
    s.add_argument("--nodes", type=int, required=True)
    s.add_argument("--mean-out-degree", type=float, required=True)
    s.set_defaults(func=cmd_gen_graph)

    s = sub.add_parser("simulate", parents=[common], help="simulate episodes with a hot span")
    s.add_argument("--graph", required=True)
    s.add_argument("--p1", type=float, required=True)
    s.add_argument("--p2", type=float, required=True)
    s.add_argument("--t1", type=float, required=True)
    s.add_argument("--t2", type=float, required=True)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--episodes", type=int, default=1)
    s.add_argument("--horizon", type=float, default=None, help="default: 3 * t2")
    s.add_argument("--min-activations", type=int, default=10)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", parents=[common, em], help="EM fit for a fixed model")
    s.add_argument("--data", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--span", type=float, nargs=2, metavar=("T1", "T2"))
    g.add_argument("--boundaries", help="comma separated interior boundaries")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("detect", parents=[common, em], help="detect a single hot span")
    s.add_argument("--data", required=True)
    s.add_argument("--method", choices=("proposed", "naive"), default="proposed")
    s.add_argument("--k", type=int, default=20)
    s.add_argument("--truth", help="T1,T2,P1,P2 to add E_s and E_p")
    s.add_argument("--weak-threshold", type=float, default=0.1)
    s.add_argument("--dump-scores", metavar="FILE", help="write per-node derivative scores")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("detect-multi", parents=[common, em], help="greedy multi-span segmentation")
    s.add_argument("--data", required=True)
    s.add_argument("--max-segments", type=int, default=7)
    s.add_argument("--criterion", choices=("mdl", "aic"), default="mdl")
    s.add_argument("--scoring", choices=("score-test", "abs-gradient"), default="score-test")
    s.set_defaults(func=cmd_detect_multi)

    s = sub.add_parser("experiment", parents=[common], help="proposed vs naive comparison")
    s.add_argument("--config", help="JSON file with ExperimentConfig fields")
    for name, typ in (("p1", float), ("p2", float), ("t1", float), ("t2", float), ("r", float),
                      ("M", int), ("horizon", float), ("trials", int), ("nodes", int),
                      ("mean_out_degree", float), ("min_activations", int)):
        s.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    s.add_argument("--graph", dest="graph_file", default=None)
    s.add_argument("--naive-k", dest="naive_k", type=lambda t: [int(x) for x in t.split(",")],
                   default=None, help="comma separated K values")
    s.add_argument("--methods", type=lambda t: t.split(","), default=None)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command != "experiment" and args.seed is None:
        args.seed = 0
    try:
        doc, summary = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except Exception as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc), "command": args.command},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1
    if doc is not None:
        _emit(doc, args.out)
    elif summary is not None:
        sys.stdout.write(io.dumps(summary) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
