"""What the detectors say when there is nothing to find, and how bursts look in the activity series."""

import numpy as np

from hotspan import (
    PiecewiseSchedule,
    activity_series,
    detect_multispan,
    detect_proposed,
    generate_random_graph,
    simulate_dataset,
)

g = generate_random_graph(2000, 10.0, seed=1)

flat = PiecewiseSchedule.uniform(0.15, 1.0)
for seed in range(3):
    data = simulate_dataset(g, flat, 5, 60.0, seed=seed, min_activations=100)
    rep = detect_proposed(data)
    st = detect_multispan(data)
    print(f"seed {seed}: span {rep.span} jump {rep.relative_jump():.3f} "
          f"weak={rep.weak_evidence}  segmentation J={st.J}")

# Same seeds with and without [10, 20) hot: share of activations per unit time bin.
hot = PiecewiseSchedule.hot_span(0.1, 0.3, 10.0, 20.0, 1.0)
base = PiecewiseSchedule.uniform(0.1, 1.0)
for name, sched in (("hot span", hot), ("control", base)):
    data = simulate_dataset(g, sched, 5, 60.0, seed=7, min_activations=30)
    act = activity_series(data, 1.0)
    share = np.mean([sum(r[10:20]) for r in act["ratios"]])
    print(f"{name:>8}: mean share of activations in [10, 20) = {share:.2f}")
