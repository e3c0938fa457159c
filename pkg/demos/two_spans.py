"""Greedy segmentation of a pattern with two hot spans.

Each step adds the boundary whose refit lowers the description length most
readily; the history shows what was tried and why the search stopped.
"""

import sys

from hotspan import PiecewiseSchedule, detect_multispan, generate_random_graph, simulate_dataset

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
truth_b = (8.0, 13.0, 23.0, 28.0)
truth_p = (0.1, 0.2, 0.1, 0.2, 0.1)

g = generate_random_graph(10000, 10.0, seed=1)
data = simulate_dataset(g, PiecewiseSchedule(truth_b, truth_p, 1.0), 5, 40.0, seed=seed,
                        min_activations=100)
st = detect_multispan(data)

for h in st.history:
    b = "-" if h["boundary"] is None else f"{h['boundary']:.2f}"
    print(f"J={h['J']}  boundary {b:>6}  DL {h['dl']:.1f}  {'kept' if h['accepted'] else 'rejected'}")
print("stopped:", st.stop_reason)
print("boundaries", [round(b, 2) for b in st.boundaries], "truth", list(truth_b))
print("probs     ", [round(p, 3) for p in st.probs], "truth", list(truth_p))
