import numpy as np
import pytest

from hotspan import (
    CandidateSet,
    Dataset,
    DetectionError,
    Episode,
    Graph,
    Span,
    collect_time_points,
    detect_naive,
    detect_proposed,
    fit_span,
    fit_uniform,
    gradient_prefix,
    link_gradient,
    max_interval,
    prob_error,
    span_error,
)
from hotspan.detect import max_interval_bruteforce, span_score
from oracles import small_instance


def test_time_points_single_episode():
    g = Graph.from_edges(3, [0, 1], [1, 2])
    data = Dataset(g, [Episode([0, 1, 2], [0.0, 3.0, 7.0], 0, 9.0)])
    c = collect_time_points(data)
    assert c.times.tolist() == [0.0, 3.0, 7.0]
    assert c.n_spans == 3
    assert [tuple(s) for s in c.spans()] == [(0, 3), (0, 7), (3, 7)]


def test_time_points_deduplicated():
    g = Graph.from_edges(3, [0, 1, 2, 1], [1, 2, 0, 0])
    data = Dataset(g, [Episode([0, 1], [0.0, 3.0], 0, 9.0), Episode([1, 0], [0.0, 3.0], 1, 9.0)])
    assert collect_time_points(data).times.tolist() == [0.0, 3.0]


def test_time_points_count(medium_data):
    c = collect_time_points(medium_data)
    raw = np.concatenate([ep.times for ep in medium_data.episodes])
    assert c.N == np.unique(raw).size
    assert np.all(np.diff(c.times) > 0)
    assert c.n_spans == c.N * (c.N - 1) // 2


def test_too_few_time_points():
    g = Graph.from_edges(2, [0], [1])
    with pytest.raises(DetectionError):
        collect_time_points(Dataset(g, [Episode([0], [0.0], 0, 1.0)]))


def test_span_validation():
    with pytest.raises(ValueError):
        Span(2.0, 2.0)
    assert str(Span(1.0, 2.5)) == "[1, 2.5]"


def test_prefix_matches_explicit_sets(medium_data):
    uni = fit_uniform(medium_data)
    gamma = link_gradient(medium_data, uni.p, uni.r)
    times = collect_time_points(medium_data).times[:150]
    P = gradient_prefix(medium_data, gamma, times)
    rng = np.random.default_rng(0)
    for _ in range(300):
        i, j = sorted(rng.choice(times.size, 2, replace=False))
        direct = span_score(medium_data, gamma, (times[i], times[j]))
        assert P[j] - P[i] == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_total_gradient_near_zero_at_mle(medium_data):
    from hotspan import EMConfig

    uni = fit_uniform(medium_data, EMConfig(tol=1e-13, max_iter=20000))
    gamma = link_gradient(medium_data, uni.p, uni.r)
    times = collect_time_points(medium_data).times
    P = gradient_prefix(medium_data, gamma, times)
    assert abs(P[-1]) < 1e-6 * np.abs(gamma).sum()


def test_empty_span_scores_zero(medium_data):
    gamma = np.ones(sum(len(ep) for ep in medium_data.episodes))
    t = collect_time_points(medium_data).times
    assert span_score(medium_data, gamma, (t[3] + 1e-12, t[4])) == 0.0


@pytest.mark.parametrize("prefix,expect", [
    ([0.0, 1.0], (0, 1)),
    ([0.0, -1.0, 2.0, 0.0, 3.0], (1, 4)),
    ([0.0, 1.0, 0.0, 1.0], (0, 1)),   # tie: earliest start, then shortest
    ([3.0, 2.0, 1.0], (0, 1)),          # all negative: least-bad adjacent pair
])
def test_max_interval_cases(prefix, expect):
    assert max_interval(prefix)[:2] == expect
    assert max_interval_bruteforce(prefix)[:2] == expect


def test_max_interval_matches_bruteforce_random():
    rng = np.random.default_rng(1)
    for k in range(200):
        n = int(rng.integers(2, 60))
        if k % 2:
            prefix = rng.integers(-3, 4, size=n).astype(float)  # many ties
        else:
            prefix = np.cumsum(rng.normal(size=n))
        assert max_interval(prefix) == max_interval_bruteforce(prefix)


def test_max_interval_too_short():
    with pytest.raises(DetectionError):
        max_interval([1.0])


def test_proposed_report(medium_data):
    rep = detect_proposed(medium_data)
    assert rep.em_runs == 2
    assert rep.method == "proposed"
    assert rep.p2 > rep.p1
    times = collect_time_points(medium_data).times
    assert rep.span.t_start in times and rep.span.t_end in times
    d = rep.to_dict()
    assert d["span"] == [rep.span.t_start, rep.span.t_end] and d["em_runs"] == 2


@pytest.mark.parametrize("K,runs", [(5, 10), (10, 45), (20, 190)])
def test_naive_em_count(medium_data, K, runs):
    rep = detect_naive(medium_data, K, seed=3)
    assert rep.em_runs == runs
    assert len(rep.details["sampled_times"]) == K


def test_naive_deterministic(medium_data):
    a = detect_naive(medium_data, 5, seed=9)
    b = detect_naive(medium_data, 5, seed=9)
    assert a.span == b.span and a.p1 == b.p1


def test_naive_rejects_bad_k(medium_data):
    with pytest.raises(ValueError):
        detect_naive(medium_data, 1, seed=0)


@pytest.mark.parametrize("seed", range(6))
def test_exhaustive_naive_dominates_proposed(seed):
    # With every time point sampled, the naive search maximises the span likelihood.
    for extra in range(50):
        data = small_instance(1000 * seed + extra, n_max=20, m_max=1)
        N = collect_time_points(data).N
        if 4 <= N <= 8:
            break
    else:
        pytest.skip("no instance with 4..8 time points")
    naive = detect_naive(data, N, seed=0)
    prop = detect_proposed(data)
    assert naive.objective >= fit_span(data, prop.span).loglik - 1e-9


def test_error_metrics():
    assert span_error(Span(11, 19), (10, 20)) == 2
    assert prob_error((0.12, 0.27), (0.1, 0.3)) == pytest.approx(0.2 + 0.1)
    with pytest.raises(ValueError):
        prob_error((0.1, 0.1), (0.0, 0.3))


def test_candidate_set_sampled():
    c = CandidateSet(np.arange(10.0), np.array([1.0, 4.0, 6.0]))
    assert c.N == 10 and c.n_spans == 3


def test_error_metric_examples():
    assert span_error(Span(10, 20), (10, 20)) == 0
    assert span_error(Span(9, 22), (10, 20)) == 3.0
    # Rescaling time by c scales the span error by c.
    assert span_error(Span(2 * 9, 2 * 22), (2 * 10, 2 * 20)) == 2 * 3.0
    assert prob_error((0.1, 0.3), (0.1, 0.3)) == 0
    assert prob_error((0.11, 0.27), (0.1, 0.3)) == pytest.approx(0.2)


def test_null_jump_smaller_than_hot_jump():
    from hotspan import PiecewiseSchedule, generate_random_graph, simulate_dataset

    g = generate_random_graph(2000, 10.0, seed=1)
    null, hot = [], []
    for s in range(4):
        for sched, out in ((PiecewiseSchedule.uniform(0.15, 1.0), null),
                           (PiecewiseSchedule.hot_span(0.1, 0.3, 10, 20, 1.0), hot)):
            data = simulate_dataset(g, sched, 5, 60.0, seed=s, min_activations=100)
            out.append(detect_proposed(data).relative_jump())
    assert max(null) < min(hot)
