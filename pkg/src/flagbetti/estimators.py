"""scikit-learn style transformers that turn graphs into Betti features.

Inputs are sequences of ``Graph`` objects (or their JSON text / dict form);
outputs are dense numpy arrays, so the transformers slot into pipelines.
"""

from __future__ import annotations

import json
from typing import List

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ParameterError, check_prime
from .betti import betti_table, first_row_profile, rho_k, ring_invariants
from .graph import Graph, graph_from_json


def check_graphs(X) -> List[Graph]:
    """Coerce ``X`` to a list of graphs, accepting JSON strings and dicts."""
    if isinstance(X, (Graph, str, dict)):
        raise ParameterError("expected a sequence of graphs, got a single item")
    out = []
    for item in X:
        if isinstance(item, Graph):
            out.append(item)
        elif isinstance(item, str):
            out.append(graph_from_json(item))
        elif isinstance(item, dict):
            out.append(graph_from_json(json.dumps(item)))
        else:
            raise ParameterError(f"cannot interpret {type(item).__name__} as a graph")
    if not out:
        raise ParameterError("need at least one graph")
    return out


class BettiTableTransformer(TransformerMixin, BaseEstimator):
    """Flattened Betti grid ``beta_{i,i+k}`` for ``k <= max_row`` and ``i <= max_index``.

    ``max_index`` defaults to the largest vertex count seen in ``fit``.
    """

    def __init__(self, field_char=2, max_row=2, max_index=None, n_jobs=1):
        self.field_char = field_char
        self.max_row = max_row
        self.max_index = max_index
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        graphs = check_graphs(X)
        check_prime(self.field_char)
        self.max_index_ = self.max_index if self.max_index is not None else max(g.n for g in graphs)
        self.n_features_out_ = (self.max_row + 1) * (self.max_index_ + 1)
        return self

    def transform(self, X):
        check_is_fitted(self, "max_index_")
        graphs = check_graphs(X)
        out = np.zeros((len(graphs), self.n_features_out_), dtype=np.int64)
        for r, g in enumerate(graphs):
            t = betti_table(g, self.field_char, n_jobs=self.n_jobs)
            for (i, j), v in t.entries.items():
                k = j - i
                if k <= self.max_row and i <= self.max_index_:
                    out[r, k * (self.max_index_ + 1) + i] = v
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "max_index_")
        return np.array(
            [f"beta_{i}_{i + k}" for k in range(self.max_row + 1) for i in range(self.max_index_ + 1)],
            dtype=object,
        )


class RingInvariantsTransformer(TransformerMixin, BaseEstimator):
    """Columns ``pdim, reg, depth, krull_dim, codim, is_cm`` plus ``rho_1..rho_{k_max}``."""

    def __init__(self, field_char=2, k_max=2, check_reisner=True):
        self.field_char = field_char
        self.k_max = k_max
        self.check_reisner = check_reisner

    def fit(self, X, y=None):
        check_graphs(X)
        check_prime(self.field_char)
        self.n_features_out_ = 6 + self.k_max
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        graphs = check_graphs(X)
        out = np.zeros((len(graphs), self.n_features_out_), dtype=float)
        for r, g in enumerate(graphs):
            t = betti_table(g, self.field_char)
            inv = ring_invariants(g, t, check_reisner=self.check_reisner)
            out[r, :6] = [inv.pdim, inv.reg, inv.depth, inv.krull_dim, inv.codim, inv.is_cm]
            for k in range(1, self.k_max + 1):
                out[r, 5 + k] = float(rho_k(t, k))
        return out

    def get_feature_names_out(self, input_features=None):
        names = ["pdim", "reg", "depth", "krull_dim", "codim", "is_cm"]
        return np.array(names + [f"rho_{k}" for k in range(1, self.k_max + 1)], dtype=object)


class FirstRowTransformer(TransformerMixin, BaseEstimator):
    """First-row profile ``beta_{i,i+1}`` for ``i = 1..width``, zero padded.

    With ``normalize`` each row is divided by its sum.
    """

    def __init__(self, method="auto", normalize=False, width=None):
        self.method = method
        self.normalize = normalize
        self.width = width

    def fit(self, X, y=None):
        graphs = check_graphs(X)
        self.width_ = self.width if self.width is not None else max(max(g.n - 1, 0) for g in graphs)
        return self

    def transform(self, X):
        check_is_fitted(self, "width_")
        graphs = check_graphs(X)
        out = np.zeros((len(graphs), self.width_), dtype=float)
        for r, g in enumerate(graphs):
            prof = first_row_profile(g, self.method)[: self.width_]
            row = np.array([float(v) for v in prof])
            if self.normalize and row.sum() > 0:
                row = row / row.sum()
            out[r, : len(row)] = row
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "width_")
        return np.array([f"beta_{i}_{i + 1}" for i in range(1, self.width_ + 1)], dtype=object)
