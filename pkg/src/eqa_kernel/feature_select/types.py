from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class FeatureSelection:
    indices: list
    scores: list
    method: str
    feature_ids: list | None = None
    params: dict = field(default_factory=dict)
    warning: str | None = None

    def __post_init__(self):
        self.indices = [int(i) for i in self.indices]
        self.scores = [float(s) for s in self.scores]
        if len(self.indices) != len(self.scores):
            raise ValueError("indices and scores differ in length")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("selected indices must be unique")
        if any(b > a for a, b in zip(self.scores, self.scores[1:])):
            raise ValueError("scores must be non-increasing")

    @classmethod
    def from_scores(cls, idx, score_vector, method, feature_ids=None) -> "FeatureSelection":
        """Order ``idx`` by descending score (ties by index) and attach ids."""
        idx = np.asarray(idx, dtype=np.int64)
        sv = np.asarray(score_vector, dtype=float)[idx]
        order = np.lexsort((idx, -sv))
        idx, sv = idx[order], sv[order]
        ids = None if feature_ids is None else [str(feature_ids[i]) for i in idx]
        return cls(idx.tolist(), sv.tolist(), method, ids)

    def top(self, f: int) -> list:
        return self.indices[:f]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "indices": self.indices,
            "feature_ids": self.feature_ids,
            "scores": self.scores,
            "parameters": self.params,
            "warning": self.warning,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSelection":
        return cls(d["indices"], d["scores"], d["method"], d.get("feature_ids"),
                   d.get("parameters", {}), d.get("warning"))
