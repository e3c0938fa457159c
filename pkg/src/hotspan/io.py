"""JSON documents for datasets and reports.

Floats are written with ``repr`` precision by the json module, so every
activation time round-trips exactly. An unbounded observation window is
written as ``Infinity``.

Dataset document::

    {"format": "hotspan-dataset", "version": 1,
     "graph": {"node_count": int, "edges": [[u, v], ...]},
     "resimulations": int,
     "episodes": [{"source": int, "Phi": float,
                   "activations": [[node, time], ...]}, ...]}
"""

from __future__ import annotations

import json

import numpy as np

from .graph import Graph
from .simulate import Dataset, Episode

DATASET_FORMAT = "hotspan-dataset"


class DatasetFormatError(ValueError):
    pass


def dataset_to_dict(data):
    g = data.graph
    return {
        "format": DATASET_FORMAT,
        "version": 1,
        "graph": {
            "node_count": g.node_count,
            "edges": np.column_stack((g.src, g.dst)).tolist(),
        },
        "resimulations": data.resimulations,
        "episodes": [
            {"source": ep.source, "Phi": ep.Phi, "activations": [list(a) for a in ep.activations()]}
            for ep in data.episodes
        ],
    }


def dataset_from_dict(doc):
    if doc.get("format") != DATASET_FORMAT:
        raise DatasetFormatError(f"not a {DATASET_FORMAT} document")
    try:
        gd = doc["graph"]
        edges = np.asarray(gd["edges"], dtype=np.int64).reshape(-1, 2)
        g = Graph.from_edges(int(gd["node_count"]), edges[:, 0], edges[:, 1])
        episodes = []
        for k, e in enumerate(doc["episodes"]):
            acts = e["activations"]
            episodes.append(Episode(
                np.array([a[0] for a in acts], dtype=np.int64),
                np.array([a[1] for a in acts], dtype=np.float64),
                int(e["source"]),
                float(e["Phi"]),
            ))
    except (KeyError, TypeError, IndexError) as exc:
        raise DatasetFormatError(f"malformed dataset document: {exc!r}") from exc
    except ValueError as exc:
        raise DatasetFormatError(f"invalid dataset content: {exc}") from exc
    return Dataset(g, episodes, resimulations=int(doc.get("resimulations", 0)))


def save_dataset(data, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataset_to_dict(data), fh)


def load_dataset(path):
    with open(path, encoding="utf-8") as fh:
        return dataset_from_dict(json.load(fh))


def dumps(doc):
    return json.dumps(doc, indent=2, default=_default)


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")
