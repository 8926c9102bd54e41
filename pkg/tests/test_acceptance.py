"""Acceptance criteria 1 to 8.

Run with ``pytest tests/test_acceptance.py -v``; a per-criterion PASS/FAIL
summary is printed at the end of the session.  UCR Wine is looked up in
``$SHAPEMINE_UCR_DIR`` and then in ``tests/fixtures/ucr``.
"""
import os
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from instances import random_instance, verify_witness
from oracles import brute_min_count, brute_min_max, compare_dfa_regex, grid_fit, mse_table, random_dfa
from shapemine import kernels
from shapemine.learner import Dfa, learn_dfa
from shapemine.matcher import constrained_linefit, noisy_match, parse_lse
from shapemine.pipeline import MineConfig, mine
from shapemine.regexgen import Concat, Symbol, Union, eliminate_states, format_regex, simplify
from shapemine.segmentation import segment_fixed_count, segment_min_count
from shapemine.signal import Signal, load_traces

pytestmark = pytest.mark.acceptance

FIXTURES = Path(__file__).parent / "fixtures" / "ucr"


def ucr_train(name):
    for d in (os.environ.get("SHAPEMINE_UCR_DIR"), FIXTURES):
        if d and (Path(d) / f"{name}_TRAIN.tsv").exists():
            return Path(d) / f"{name}_TRAIN.tsv"
    return None


def wine_class1():
    path = ucr_train("Wine")
    if path is None:
        pytest.fail("UCR Wine_TRAIN.tsv not found (set SHAPEMINE_UCR_DIR); criterion cannot be evaluated")
    return load_traces(path, labels=["1"])


def fish_class1():
    return load_traces(FIXTURES / "Fish_TRAIN.tsv", labels=["1"])


def concat_symbols(r):
    """Symbol names of a pure concatenation, or None for any other shape."""
    if isinstance(r, Symbol):
        return [r.name]
    if isinstance(r, Concat):
        left, right = concat_symbols(r.left), concat_symbols(r.right)
        return left + right if left is not None and right is not None else None
    return None


def pattern(names):
    """Rename letters by first appearance so structures compare up to renaming."""
    ids = {}
    return "".join(ids.setdefault(x, "pqrstuvwxyz"[len(ids)]) for x in names)


def wcss_table(report):
    return ", ".join(f"k={k}:{r.wcss:.3g}" for k, r in enumerate(report.curve, 1))


# -- 1 ----------------------------------------------------------------------------------

C1 = "Wine class-1 sensitivity to the segmentation error cap"


@pytest.mark.criterion(1, C1)
def test_wine_eps_005_gives_seven_symbol_chain(record_property):
    report = mine(wine_class1(), MineConfig(eps_max=0.05, wcss_threshold=10, seed=0))
    record_property("detail", f"eps=0.05: k={report.k}, {format_regex(report.regex)}; {wcss_table(report)}")
    names = concat_symbols(report.regex)
    assert report.k == 4
    assert names is not None and pattern(names) == "pqrsqrp"


@pytest.mark.criterion(1, C1)
def test_wine_eps_01_gives_six_symbol_chain(record_property):
    report = mine(wine_class1(), MineConfig(eps_max=0.1, wcss_threshold=10, seed=0))
    record_property("detail", f"eps=0.1: k={report.k}, {format_regex(report.regex)}; {wcss_table(report)}")
    names = concat_symbols(report.regex)
    assert abs(report.k - 5) <= 1
    assert names is not None and len(names) == 6 and names[0] == names[-1]


@pytest.mark.criterion(1, C1)
def test_wine_eps_05_gives_choice_after_prefix(record_property):
    report = mine(wine_class1(), MineConfig(eps_max=0.5, wcss_threshold=10, seed=0))
    record_property("detail", f"eps=0.5: k={report.k}, {format_regex(report.regex)}; {wcss_table(report)}")
    r = report.regex
    assert abs(report.k - 3) <= 1
    assert isinstance(r, Concat) and isinstance(r.left, Symbol) and isinstance(r.right, Union)
    alts = [r.right.left, r.right.right]
    assert all(isinstance(x, Symbol) for x in alts)
    assert len({r.left.name, alts[0].name, alts[1].name}) == 3


# -- 2 ----------------------------------------------------------------------------------

def cost_profile_traces():
    path = ucr_train("Wine")
    if path is not None:
        return load_traces(path, labels=["1"]), "Wine class 1"
    # Same shape as Wine class 1 (57 x 234): first 57 Fish traces, truncated.
    fish = load_traces(FIXTURES / "Fish_TRAIN.tsv")[:57]
    return [Signal.uniform(s.values[:234], id=s.id) for s in fish], "Fish surrogate 57x234"


def profile(signals, repeats=3):
    runs = [mine(signals, MineConfig(eps_max=0.05, wcss_threshold=10, seed=0)).timings
            for _ in range(repeats)]
    return {k: statistics.median(r[k] for r in runs) for k in ("t_s", "t_c", "t_l", "t_total")}


@pytest.mark.criterion(2, "segmentation dominates the cost profile on 57 traces x 234 samples")
def test_cost_profile(record_property, monkeypatch):
    signals, source = cost_profile_traces()
    assert len(signals) == 57 and {len(s) for s in signals} == {234}
    t = profile(signals)
    fmt = lambda p: ", ".join(f"{k}={v:.4f}s" for k, v in p.items())  # noqa: E731
    record_property("detail", f"{source}, {kernels.BACKEND} backend: {fmt(t)}")
    if kernels.compiled is not None:
        monkeypatch.setattr(kernels, "active", kernels.python)
        record_property("detail", f"python fallback for reference: {fmt(profile(signals, 1))}")
        monkeypatch.undo()
    assert t["t_total"] <= 60
    assert t["t_s"] > 10 * t["t_c"], "segmentation does not dominate clustering"
    assert t["t_s"] > 10 * t["t_l"], "segmentation does not dominate learning"


# -- 3 ----------------------------------------------------------------------------------

@pytest.mark.criterion(3, "segmentation time grows quadratically (ratios in [2.5, 6])")
def test_quadratic_scaling(record_property):
    rng = np.random.default_rng(0)
    times = []
    for n in (250, 500, 1000):
        v = np.cumsum(rng.normal(size=n)) * 0.1 + np.sin(np.arange(n) / 20)
        best = np.inf
        for _ in range(7):
            sig = Signal.uniform(v)
            start = time.perf_counter()
            segment_min_count(sig, 0.05)
            best = min(best, time.perf_counter() - start)
        times.append(best)
    ratios = [times[1] / times[0], times[2] / times[1]]
    record_property("detail", f"{kernels.BACKEND}: times {[f'{x:.2e}' for x in times]}, "
                              f"ratios {[round(r, 2) for r in ratios]}")
    assert all(2.5 <= r <= 6 for r in ratios)


# -- 4 ----------------------------------------------------------------------------------

def random_small_signal(rng):
    n = int(rng.integers(2, 13))
    if rng.random() < 0.5:
        return Signal.uniform(rng.normal(scale=2, size=n))
    knots = np.cumsum(rng.normal(scale=3, size=4))
    v = np.interp(np.linspace(0, 3, n), np.arange(4), knots) + rng.normal(scale=0.05, size=n)
    return Signal.uniform(v)


@pytest.mark.criterion(4, "segmentation optimality against exhaustive enumeration (500 signals)")
def test_segmentation_optimality():
    rng = np.random.default_rng(4)
    for _ in range(500):
        sig = random_small_signal(rng)
        n = len(sig)
        table = mse_table(sig.times, sig.values)
        errs = [x for row in table for x in row if x is not None]
        eps = max(1e-6, float(np.quantile(errs, rng.uniform(0.2, 0.9))))
        assert len(segment_min_count(sig, eps)) == brute_min_count(sig.times, sig.values, eps, table)
        m = int(rng.integers(1, n))
        got = segment_fixed_count(sig, m).max_mse
        assert abs(got - brute_min_max(sig.times, sig.values, m, table)) <= 1e-9


# -- 5 ----------------------------------------------------------------------------------

@pytest.mark.criterion(5, "generated regex agrees with its DFA on all words up to length 8 (200 DFAs)")
def test_dfa_regex_equivalence():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n, acc, trans, alpha = random_dfa(rng, max_states=5, letters="ABC")
        r = simplify(eliminate_states(Dfa(n, 0, acc, trans)))
        bad = compare_dfa_regex(trans, acc, r, alpha, 8)
        assert bad is None, f"disagreement on {''.join(bad)!r} for {format_regex(r)}"


# -- 6 ----------------------------------------------------------------------------------

C6 = "learner accepts its training words and generalizes repetition"


def has_cycle(dfa):
    state = {}

    def visit(q):
        state[q] = 1
        for _, t in dfa.out_edges(q):
            if state.get(t) == 1 or (t not in state and visit(t)):
                return True
        state[q] = 2
        return False

    return visit(dfa.initial)


@pytest.mark.criterion(6, C6)
def test_learner_soundness_on_random_word_sets():
    rng = np.random.default_rng(6)
    for _ in range(200):
        words = ["".join(rng.choice(list("ABC"), size=int(rng.integers(1, 8))))
                 for _ in range(int(rng.integers(1, 10)))]
        dfa = learn_dfa(words)
        assert all(dfa.accepts(w) for w in words), words


@pytest.mark.criterion(6, C6)
def test_learner_soundness_on_mining_runs():
    for signals in (fish_class1(),):
        report = mine(signals, MineConfig(eps_max=0.05))
        assert all(report.dfa.accepts(w.letters) for w in report.words)


@pytest.mark.criterion(6, C6)
def test_repetition_generalizes_to_loop(record_property):
    dfa = learn_dfa(["A", "AA", "AAA"])
    text = format_regex(simplify(eliminate_states(dfa)))
    record_property("detail", f"{{A, AA, AAA}} -> {text}")
    assert has_cycle(dfa)
    assert text in ("A . (A)*", "(A)*")


# -- 7 ----------------------------------------------------------------------------------

C7 = "mined expressions match their own training traces at nu = eps"


def round_trip(signals, eps):
    report = mine(signals, MineConfig(eps_max=eps, wcss_threshold=10, seed=0))
    lse = parse_lse(report.lse_text)
    matched = sum(bool(noisy_match(s, lse, eps)) for s in signals)
    zero = Signal.uniform(np.zeros(len(signals[0])))
    return matched, bool(noisy_match(zero, lse, 0.0))


@pytest.mark.criterion(7, C7)
def test_fish_round_trip(record_property):
    signals = fish_class1()
    assert len(signals) == 26 and len(signals[0]) == 463
    matched, zero = round_trip(signals, 0.05)
    record_property("detail", f"Fish: {matched}/26 matched, zero trace matched={zero}")
    assert matched == len(signals) and not zero


@pytest.mark.criterion(7, C7)
def test_wine_round_trip(record_property):
    signals = wine_class1()
    matched, zero = round_trip(signals, 0.05)
    record_property("detail", f"Wine: {matched}/{len(signals)} matched, zero trace matched={zero}")
    assert matched == len(signals) and not zero


# -- 8 ----------------------------------------------------------------------------------

C8 = "matcher monotone in nu with verifiable witnesses; constrained fit equals grid search"


@pytest.mark.criterion(8, C8)
def test_matcher_monotonicity_and_witnesses(record_property):
    rng = np.random.default_rng(8)
    matches = 0
    for _ in range(200):
        sig, lse, nu = random_instance(rng, n_max=30)
        lo, hi = sorted((nu, float(rng.uniform(0, 1.5))))
        r_lo, r_hi = noisy_match(sig, lse, lo), noisy_match(sig, lse, hi)
        assert not (r_lo and not r_hi)
        for res, tol in ((r_lo, lo), (r_hi, hi)):
            if res:
                verify_witness(sig, lse, tol, res)
        matches += bool(r_hi)
    record_property("detail", f"{matches}/200 instances matched at the larger nu")


@pytest.mark.criterion(8, C8)
def test_constrained_fit_against_grid():
    rng = np.random.default_rng(88)
    for _ in range(100):
        sig = Signal.uniform(rng.normal(scale=2, size=int(rng.integers(2, 16))))
        a0, b0 = rng.normal(size=2) * (0.5, 2)
        box = (a0, a0 + rng.uniform(0.01, 1), b0, b0 + rng.uniform(0.01, 3))
        fit = constrained_linefit(sig, 0, len(sig) - 1, box)
        ref = grid_fit(sig.times, sig.values, box)
        assert box[0] <= fit.a <= box[1] and box[2] <= fit.b <= box[3]
        assert abs(fit.mse - ref[2]) <= 1e-4
