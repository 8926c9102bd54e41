import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import random_instance, verify_witness
from oracles import box_fit, brute_noisy_match, grid_fit
from shapemine.matcher import (
    LseSemanticError, LseSyntaxError, constrained_linefit, glushkov, noisy_match, parse_lse,
)
from shapemine.regexgen import Concat, Star, Symbol, Union, render_lse
from shapemine.signal import Signal, linefit

UP_DOWN = parse_lse(
    "line(a_U, b_U, d_U) . line(a_D, b_D, d_D) : "
    "a_U in [0.5, 2] and d_U in [1, 10] and a_D in [-2, -0.5] and d_D in [1, 10]")


def test_up_down_shape():
    tri = Signal.uniform([0, 1, 2, 3, 2, 1, 0])
    res = noisy_match(tri, UP_DOWN, 0.0)
    assert res.matched and res.cuts == [0, 3, 6]
    assert [s.symbol for s in res.segments] == ["U", "D"]
    assert res.segments[0].a == pytest.approx(1.0)
    assert not noisy_match(Signal.uniform([0, 1, 2, 3, 4, 5, 6]), UP_DOWN, 0.01)
    assert not noisy_match(Signal.uniform(np.zeros(5)), UP_DOWN, 0.0)


def test_noise_tolerance_admits_jitter():
    jitter = Signal.uniform([0, 1.1, 1.9, 3, 2.1, 0.9, 0])
    assert not noisy_match(jitter, UP_DOWN, 0.0)
    assert noisy_match(jitter, UP_DOWN, 0.01)


def test_match_json_shape():
    out = noisy_match(Signal.uniform([0, 1, 2, 1]), UP_DOWN, 0.0).to_json()
    assert out["match"] is True and out["cuts"] == [0, 2, 3]
    assert set(out["segments"][0]) == {"start", "end", "letter", "a", "b", "d", "mse"}


@pytest.mark.parametrize("seed", range(100))
def test_matcher_agrees_with_exhaustive_search(seed, backend):
    sig, lse, nu = random_instance(np.random.default_rng(seed), n_max=6)
    boxes = {s: lse.box(s) for s in lse.atoms}
    res = noisy_match(sig, lse, nu, backend=backend)
    assert res.matched == brute_noisy_match(sig.times, sig.values, lse.shape, boxes, nu)
    if res.matched:
        verify_witness(sig, lse, nu, res)


@pytest.mark.parametrize("seed", range(40))
def test_nu_monotonicity(seed):
    rng = np.random.default_rng(1000 + seed)
    sig, lse, nu = random_instance(rng, n_max=12)
    if noisy_match(sig, lse, nu):
        assert noisy_match(sig, lse, nu * 1.5 + 0.1)
    else:
        assert not noisy_match(sig, lse, nu / 2)


def test_backends_return_identical_witnesses():
    from shapemine import kernels
    if kernels.compiled is None:
        pytest.skip("compiled kernels not built")
    for seed in range(30):
        sig, lse, nu = random_instance(np.random.default_rng(seed), n_max=20)
        assert noisy_match(sig, lse, nu, "python") == noisy_match(sig, lse, nu, "cython")


def test_constrained_fit_inside_box_equals_least_squares():
    sig = Signal.uniform([0.0, 1.2, 1.9, 3.1, 4.0])
    free = linefit(sig, 0, 4)
    fit = constrained_linefit(sig, 0, 4, (-10, 10, -10, 10))
    assert (fit.a, fit.b, fit.mse) == (free.a, free.b, free.mse)
    unbounded = constrained_linefit(sig, 0, 4, (-math.inf, math.inf, -math.inf, math.inf))
    assert unbounded.mse == free.mse


def test_constrained_fit_frozen_value():
    sig = Signal(np.array([0.0, 0.5, 1.5, 2.0, 3.0]), np.array([1.0, 2.0, 2.5, 4.0, 3.0]))
    fit = constrained_linefit(sig, 0, 4, (0, 0.5, 1, 1.5))
    assert (fit.a, fit.b, fit.mse) == pytest.approx((0.5, 1.5, 0.525))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=10),
       st.floats(-3, 3), st.floats(0, 3), st.floats(-5, 5), st.floats(0, 5),
       st.sampled_from([0, 1, 2, 3]))
def test_constrained_fit_is_exact_box_minimum(vals, a0, wa, b0, wb, open_side):
    box = [a0, a0 + wa, b0, b0 + wb]
    if open_side:
        box[open_side - 1 if open_side < 3 else 3] = (-math.inf if open_side == 1 else math.inf)
    sig = Signal.uniform(vals)
    fit = constrained_linefit(sig, 0, len(vals) - 1, box)
    ref = box_fit(sig.times, sig.values, box)
    assert box[0] <= fit.a <= box[1] and box[2] <= fit.b <= box[3]
    assert fit.mse == pytest.approx(ref[2], abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=10),
       st.floats(-3, 3), st.floats(0.01, 3), st.floats(-5, 5), st.floats(0.01, 5))
def test_constrained_fit_against_grid_search(vals, a0, wa, b0, wb):
    box = (a0, a0 + wa, b0, b0 + wb)
    sig = Signal.uniform(vals)
    fit = constrained_linefit(sig, 0, len(vals) - 1, box)
    assert fit.mse == pytest.approx(grid_fit(sig.times, sig.values, box)[2], abs=1e-4)


def test_constrained_fit_rejects_inverted_box():
    with pytest.raises(ValueError):
        constrained_linefit(Signal.uniform([1.0, 2.0]), 0, 1, (1, 0, 0, 1))


# -- parser ----------------------------------------------------------------------------

def test_parse_structure_and_constraints():
    lse = parse_lse("line(a_A, b_A, d_A) . (line(a_B, b_B, d_B))* + eps : a_A in [-1, 2e-3] "
                    "and d_B in [0, inf] and a_A in [0, 5]")
    A, B = Symbol("A"), Symbol("B")
    assert lse.shape.left == Concat(A, Star(B))
    assert lse.constraints == {"a_A": (0.0, 2e-3), "d_B": (0.0, math.inf)}
    assert lse.box("A") == (0.0, 2e-3, -math.inf, math.inf, -math.inf, math.inf)
    assert parse_lse(render_lse(lse)) == lse


def test_parse_generic_atom_names():
    lse = parse_lse("line(a, b, d) : a in [0, 1]")
    assert list(lse.atoms) == ["a,b,d"]
    assert lse.box("a,b,d")[:2] == (0.0, 1.0)


@pytest.mark.parametrize("text,line,col", [
    ("line(a_A, b_A, d_A) .", 1, 22),
    ("line(a_A, b_A)", 1, 14),
    ("line(a_A, b_A, d_A) :\n a_A in [1 2]", 2, 12),
    ("line(a_A, b_A, d_A) $", 1, 21),
    ("(line(a_A, b_A, d_A)", 1, 21),
])
def test_syntax_errors_have_positions(text, line, col):
    with pytest.raises(LseSyntaxError) as exc:
        parse_lse(text)
    assert (exc.value.line, exc.value.column) == (line, col)


@pytest.mark.parametrize("text", [
    "line(a_A, b_A, d_A) : a_A in [2, 1]",
    "line(a_A, b_A, d_A) : a_Z in [0, 1]",
    "line(a_A, b_A, d_A) : a_A in [0, 1] and a_A in [2, 3]",
])
def test_semantic_errors(text):
    with pytest.raises(LseSemanticError):
        parse_lse(text)


def test_glushkov_language():
    r = Concat(Symbol("A"), Star(Union(Symbol("B"), Symbol("A"))))
    g = glushkov(r)
    assert g.symbols == ("A", "B", "A")
    for w, ok in [("A", True), ("ABAB", True), ("B", False), ("", False)]:
        assert g.accepts(w) == ok
