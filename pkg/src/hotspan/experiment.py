"""End-to-end comparison runs: simulate, detect with each method, score against truth.

Seed lineage: ``SeedSequence(seed)`` spawns a graph stream and a trial
stream; the trial stream spawns one child per trial, and each trial child
spawns a data stream (episodes, via :func:`simulate_dataset`) and a stream
for the naive method's candidate sampling. Any trial can therefore be re-run
alone from ``(seed, trial index)``.
"""

from __future__ import annotations

import concurrent.futures
import logging
import statistics
from dataclasses import asdict, dataclass, field

import numpy as np

from .detect import detect_naive, detect_proposed, prob_error, span_error
from .em import EMConfig
from .graph import generate_random_graph, load_edge_list
from .multispan import detect_multispan
from .simulate import PiecewiseSchedule, simulate_dataset

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    p1: float = 0.1
    p2: float = 0.3
    t1: float = 10.0
    t2: float = 20.0
    r: float = 1.0
    M: int = 1
    horizon: float | None = None
    trials: int = 5
    seed: int = 0
    graph_file: str | None = None
    nodes: int = 2000
    mean_out_degree: float = 10.0
    methods: tuple[str, ...] = ("proposed", "naive")
    naive_k: tuple[int, ...] = (5, 10, 20)
    min_activations: int = 100
    tol: float = 1e-8
    max_iter: int = 1000
    bin_width: float = 1.0
    workers: int = 1

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.naive_k = tuple(int(k) for k in self.naive_k)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        unknown = set(self.methods) - {"proposed", "naive", "multispan"}
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError("horizon must be positive")
        self.schedule()

    def schedule(self):
        return PiecewiseSchedule.hot_span(self.p1, self.p2, self.t1, self.t2, self.r)

    @property
    def Phi(self):
        """Observation end; defaults to three times the hot span's end."""
        return self.horizon if self.horizon is not None else 3.0 * self.t2

    def em_config(self):
        return EMConfig(tol=self.tol, max_iter=self.max_iter)


@dataclass
class ExperimentReport:
    config: dict
    rows: list[dict]
    aggregates: dict
    activity: list[dict] = field(default_factory=list)
    graph: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def method_mean(self, method, key):
        return self.aggregates[method][key]["mean"]


def activity_series(data, bin_width=1.0):
    """Per-episode share of activations falling in each time bin.

    Bins are ``[k w, (k+1) w)`` from 0 to past the last activation of the
    dataset; each episode's row sums to one.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    t_max = max(float(ep.times[-1]) for ep in data.episodes)
    n_bins = int(np.floor(t_max / bin_width)) + 1
    edges = bin_width * np.arange(n_bins + 1)
    ratios = []
    for ep in data.episodes:
        counts = np.bincount(np.minimum((ep.times // bin_width).astype(np.int64), n_bins - 1),
                             minlength=n_bins)
        ratios.append((counts / counts.sum()).tolist())
    return {"bin_edges": edges.tolist(), "ratios": ratios}


def _method_runs(cfg):
    runs = []
    for m in cfg.methods:
        if m == "naive":
            runs.extend(f"naive-K{k}" for k in cfg.naive_k)
        else:
            runs.append(m)
    return runs


def run_trial(cfg, graph, trial, trial_seq):
    """One trial: simulate a dataset and run every configured method on it."""
    data_seq, naive_seq = trial_seq.spawn(2)
    naive_seed = int(naive_seq.generate_state(1)[0])
    data = simulate_dataset(graph, cfg.schedule(), cfg.M, cfg.Phi, seed=data_seq,
                            min_activations=cfg.min_activations)
    truth_span = (cfg.t1, cfg.t2)
    truth_p = (cfg.p1, cfg.p2)
    em = cfg.em_config()
    rows = []
    for method in _method_runs(cfg):
        row = {"trial": trial, "method": method, "seed": cfg.seed, "naive_seed": None,
               "n_active": int(sum(len(ep) for ep in data.episodes)),
               "resimulations": data.resimulations, "ok": True, "error": None}
        try:
            if method == "proposed":
                rep = detect_proposed(data, em)
            elif method.startswith("naive-K"):
                row["naive_seed"] = naive_seed
                rep = detect_naive(data, int(method[7:]), seed=naive_seed, config=em)
            else:
                rep = _multispan_as_report(data, em)
            row.update(
                span=[rep.span.t_start, rep.span.t_end],
                p1=rep.p1, p2=rep.p2, r=rep.r,
                E_s=span_error(rep.span, truth_span),
                E_p=prob_error((rep.p1, rep.p2), truth_p),
                em_runs=rep.em_runs, duration=rep.duration,
            )
        except Exception as exc:  # recorded per trial, excluded from aggregates
            log.warning("trial %d method %s failed: %s", trial, method, exc)
            row.update(ok=False, error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows, {"trial": trial, **activity_series(data, cfg.bin_width)}


def _multispan_as_report(data, em):
    """Summarise a segmentation as a hot span: outermost boundaries of the top segment."""
    import time

    from .detect import DetectionReport, Span

    start = time.perf_counter()
    st = detect_multispan(data, max_segments=3, config=em)
    if st.J < 3:
        raise RuntimeError(f"segmentation stopped at J={st.J}; no hot span bracketed")
    probs = st.probs
    return DetectionReport(
        method="multispan", span=Span(*st.boundaries[:2]), p1=(probs[0] + probs[2]) / 2,
        p2=probs[1], r=st.r, objective=-st.dl, em_runs=st.em_runs,
        duration=time.perf_counter() - start,
    )


def _aggregate(rows, methods):
    out = {}
    for m in methods:
        ok = [r for r in rows if r["method"] == m and r["ok"]]
        agg = {"n_ok": len(ok), "n_failed": sum(1 for r in rows if r["method"] == m and not r["ok"])}
        for key in ("E_s", "E_p", "em_runs", "duration"):
            vals = [float(r[key]) for r in ok]
            agg[key] = {
                "mean": statistics.fmean(vals) if vals else None,
                "std": statistics.pstdev(vals) if vals else None,
            }
        out[m] = agg
    return out


def run_experiment(cfg):
    """Run every trial of ``cfg`` and aggregate per-method means and spreads."""
    root = np.random.SeedSequence(cfg.seed)
    graph_seq, trials_seq = root.spawn(2)
    if cfg.graph_file:
        graph = load_edge_list(cfg.graph_file)
    else:
        graph = generate_random_graph(cfg.nodes, cfg.mean_out_degree, seed=graph_seq)
    trial_seqs = trials_seq.spawn(cfg.trials)
    if cfg.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(cfg.workers) as pool:
            futures = [pool.submit(run_trial, cfg, graph, k, s) for k, s in enumerate(trial_seqs)]
            results = [f.result() for f in futures]
    else:
        results = [run_trial(cfg, graph, k, s) for k, s in enumerate(trial_seqs)]
    rows = [row for trial_rows, _ in results for row in trial_rows]
    activity = [act for _, act in results]
    return ExperimentReport(
        config={**asdict(cfg), "Phi": cfg.Phi},
        rows=rows,
        aggregates=_aggregate(rows, _method_runs(cfg)),
        activity=activity,
        graph={"node_count": graph.node_count, "edge_count": graph.edge_count,
               "mean_out_degree": graph.edge_count / graph.node_count},
    )


_NUM = {"type": ["number", "null"]}
_STAT = {"type": "object", "required": ["mean", "std"],
         "properties": {"mean": _NUM, "std": _NUM}}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["config", "rows", "aggregates", "activity", "graph"],
    "properties": {
        "config": {"type": "object", "required": ["seed", "trials", "M", "Phi"]},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["trial", "method", "seed", "ok"],
                "properties": {
                    "trial": {"type": "integer"},
                    "method": {"type": "string"},
                    "seed": {"type": "integer"},
                    "ok": {"type": "boolean"},
                    "span": {"type": "array", "items": {"type": "number"}, "minItems": 2,
                             "maxItems": 2},
                    "E_s": {"type": "number"},
                    "E_p": {"type": "number"},
                    "em_runs": {"type": "integer"},
                    "duration": {"type": "number"},
                },
            },
        },
        "aggregates": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["n_ok", "n_failed", "E_s", "E_p", "em_runs", "duration"],
                "properties": {"E_s": _STAT, "E_p": _STAT, "em_runs": _STAT, "duration": _STAT},
            },
        },
        "activity": {"type": "array"},
        "graph": {"type": "object"},
    },
}
