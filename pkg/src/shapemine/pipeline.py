"""End-to-end mining: segment, abstract, learn, translate."""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from shapemine import kernels
from shapemine.abstraction import (
    FeatureSet, KMeansResult, Letter, Word, build_alphabet, elbow, featurize, wcss_curve,
)
from shapemine.learner import Dfa, build_pta, rpni_merge
from shapemine.regexgen import (
    Empty, Epsilon, Lse, Regex, Star, Symbol, Union, attach_constraints,
    eliminate_states, render_lse,
)
from shapemine.segmentation import Segmentation, segment_min_count
from shapemine.signal import Signal, load_traces

log = logging.getLogger(__name__)

SCHEMA = 1


@dataclass
class MineConfig:
    input: Optional[str] = None
    format: str = "ucr-tsv"
    period: float = 1.0
    labels: Optional[list[str]] = None
    eps_max: float = 0.05
    wcss_threshold: float = 10.0
    k_max: Optional[int] = None
    seed: int = 0
    output: Optional[str] = None

    def validate(self):
        if not self.eps_max > 0:
            raise ValueError("eps_max must be positive")
        if not self.wcss_threshold > 0:
            raise ValueError("wcss_threshold must be positive")
        if self.k_max is not None and self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if not self.period > 0:
            raise ValueError("period must be positive")


@dataclass
class MineReport:
    config: MineConfig
    signals: list[Signal]
    segmentations: list[Segmentation]
    features: FeatureSet
    curve: list[KMeansResult]
    k: int
    alphabet: list[Letter]
    words: list[Word]
    pta: Dfa
    dfa: Dfa
    regex: Regex
    lse: Lse
    timings: dict = field(default_factory=dict)

    @property
    def lse_text(self) -> str:
        return render_lse(self.lse)

    def to_json(self) -> dict:
        """Deterministic report body; timings are kept out so reruns are byte-identical."""
        c = self.config
        return {
            "schema": SCHEMA,
            "config": {
                "input": c.input, "format": c.format, "period": c.period,
                "labels": c.labels, "eps_max": c.eps_max,
                "wcss_threshold": c.wcss_threshold, "k_max": len(self.curve), "seed": c.seed,
            },
            "traces": len(self.signals),
            "lse": self.lse_text,
            "regex": regex_to_json(self.regex),
            "dfa": self.dfa.to_json(),
            "pta_states": self.pta.n_states,
            "k": self.k,
            "wcss": [{"k": k, "wcss": r.wcss} for k, r in enumerate(self.curve, start=1)],
            "normalization": {
                "mean": self.features.mean.tolist(), "std": self.features.std.tolist(),
            },
            "alphabet": [
                {"letter": L.name, "a": list(L.cube[0]), "b": list(L.cube[1]),
                 "d": list(L.cube[2]), "count": L.count}
                for L in self.alphabet
            ],
            "words": [{"trace": w.trace_id, "word": list(w.letters)} for w in self.words],
            "segmentations": [
                {"trace": s.id, "cuts": list(seg.cuts)}
                for s, seg in zip(self.signals, self.segmentations)
            ],
        }

    def write(self, path, plot_data=None, lse_path=None, timings_path=None):
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), indent=2) + "\n")
        if timings_path is not None:
            Path(timings_path).write_text(json.dumps(self.timings, indent=2) + "\n")
        if lse_path is not None:
            Path(lse_path).write_text(self.lse_text + "\n")
        if plot_data is not None:
            write_plot_data(plot_data, self.signals, self.segmentations)


def regex_to_json(r: Regex):
    if isinstance(r, Symbol):
        return r.name
    if isinstance(r, Epsilon):
        return {"op": "eps"}
    if isinstance(r, Empty):
        return {"op": "empty"}
    if isinstance(r, Star):
        return {"op": "star", "args": [regex_to_json(r.inner)]}
    op = "union" if isinstance(r, Union) else "concat"
    return {"op": op, "args": [regex_to_json(r.left), regex_to_json(r.right)]}


def write_plot_data(path, signals, segmentations):
    """One row per sample: trace, index, t, original v, fitted v, segment number."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trace", "index", "t", "v", "fitted", "segment"])
        for sig, seg in zip(signals, segmentations):
            fitted = seg.fitted_values(sig)
            k = 0
            for idx in range(len(sig)):
                while k < len(seg) - 1 and idx >= seg.cuts[k + 1]:
                    k += 1
                w.writerow([sig.id, idx, repr(float(sig.times[idx])),
                            repr(float(sig.values[idx])), repr(float(fitted[idx])), k])


def mine(signals: Sequence[Signal], config: MineConfig) -> MineReport:
    config.validate()
    signals = list(signals)
    if not signals:
        raise ValueError("no signals to mine")
    ids = [s.id or str(k) for k, s in enumerate(signals)]
    if len(set(ids)) != len(ids):
        raise ValueError("trace ids must be unique")

    t0 = time.perf_counter()
    segmentations = [segment_min_count(s, config.eps_max) for s in signals]
    features = featurize(segmentations, ids)
    t1 = time.perf_counter()
    k_max = config.k_max if config.k_max is not None else 10
    k_max = min(k_max, len(features))
    curve = wcss_curve(features.normalized, k_max, config.seed)
    k = elbow([r.wcss for r in curve], config.wcss_threshold)
    alphabet, words = build_alphabet(features, curve[k - 1].labels)
    t2 = time.perf_counter()
    pta = build_pta(words)
    dfa = rpni_merge(pta)
    regex = eliminate_states(dfa)
    lse = attach_constraints(regex, alphabet)
    t3 = time.perf_counter()
    for w in words:
        assert dfa.accepts(w.letters), f"learned automaton rejects training word of {w.trace_id}"
    log.info("mined %d traces: %d segments, k=%d, %d DFA states",
             len(signals), len(features), k, dfa.n_states)
    timings = {"t_s": t1 - t0, "t_c": t2 - t1, "t_l": t3 - t2, "t_total": t3 - t0,
               "backend": kernels.BACKEND}
    return MineReport(config, signals, segmentations, features, curve, k,
                      alphabet, words, pta, dfa, regex, lse, timings)


def mine_file(config: MineConfig) -> MineReport:
    start = time.perf_counter()
    signals = load_traces(config.input, config.format, config.period, config.labels)
    report = mine(signals, config)
    report.timings["t_total"] = time.perf_counter() - start
    return report
