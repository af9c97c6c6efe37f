"""KAM engine: worked examples, structural invariants and oracle checks.

Closed form for the two-DMU sample A(2; 7), B(10; 7.1) evaluating B with
r = 0.1 and reciprocal weights (w- = 1/10, w+ = 1/7.1): write
lam_A = 1 - t, lam_B = t. The equality rows give s- = 9 - 8t and
s+ = 0.61 + 0.1t, so the objective 0.9 - 0.8t + (0.61 + 0.1t)/7.1 is
decreasing in t and the optimum is t = 0: s- = 9, s+ = 0.61. Targets are
highest (1; 7.71), best (2; 7.0), lowest (3; 6.29). B's own ratio is
(7.1/7.1)/(10/10) = 1, so each score is the reciprocal of the target's
weighted ratio: KA-hat = 0.1/(7.71/7.1), KA* = 0.2/(7/7.1),
KA-tilde = 0.3/(6.29/7.1).

Evaluating A the same way: s- = 0.2 - 8t, s+ = 0.7 + 0.1t, objective
0.2 - 4t + t/70, optimum t = 0. Targets (1.8; 7.7), (2; 7), (2.2; 6.3).
"""

import numpy as np
import pytest

from kamdea.errors import ConfigurationError, DegenerateScoreError
from kamdea.kam import (
    KamSolution,
    classify_efficiency,
    compute_scores,
    compute_targets,
    evaluate_dmu,
    solve_linear_kam,
    solve_nonlinear_kam,
)
from kamdea.types import EpsilonScheme, KamConfig, Sample, WeightScheme

from conftest import random_sample
from oracles import linear_kam_oracle, nonlinear_kam_oracle

R01 = KamConfig(EpsilonScheme.proportional(0.1))
ZERO = KamConfig(EpsilonScheme.zero())

B_HAT = 0.1 / (7.71 / 7.1)
B_STAR = 0.2 / (7.0 / 7.1)
B_TILDE = 0.3 / (6.29 / 7.1)
A_HAT = (1.8 / 2) / (7.7 / 7)
A_TILDE = (2.2 / 2) / (6.3 / 7)


def test_closed_form_constants_match_rounded_values():
    assert B_STAR == pytest.approx(0.20286, abs=1e-5)
    assert B_HAT == pytest.approx(0.09208, abs=1e-5)
    assert B_TILDE == pytest.approx(0.33863, abs=1e-5)
    # 0.27192 is the ratio of the rounded scores; the exact value is 0.271941
    assert B_HAT / B_TILDE == pytest.approx(0.27192, abs=1e-4)
    assert A_HAT == pytest.approx(0.81818, abs=1e-5)
    assert A_TILDE == pytest.approx(1.22222, abs=1e-5)
    assert A_HAT / A_TILDE == pytest.approx(0.66942, abs=1e-5)


def test_single_dmu_zero_eps():
    s = Sample.from_arrays([[2.0]], [[7.0]])
    sol = solve_linear_kam(s, 0, ZERO)
    assert sol.lam.tolist() == [1.0]
    assert sol.s_minus.tolist() == [0.0] and sol.s_plus.tolist() == [0.0]


def test_b_is_a_vertex_at_zero_df(ab_sample):
    sol = solve_linear_kam(ab_sample, 1, ZERO)
    assert sol.lam == pytest.approx([0.0, 1.0])
    assert sol.s_minus == pytest.approx([0.0]) and sol.s_plus == pytest.approx([0.0])


def test_b_projects_onto_a(ab_sample):
    sol = solve_linear_kam(ab_sample, 1, R01)
    assert sol.lam == pytest.approx([1.0, 0.0])
    assert sol.s_minus == pytest.approx([9.0])
    assert sol.s_plus == pytest.approx([0.61])


def test_targets_b(ab_sample):
    t = compute_targets(solve_linear_kam(ab_sample, 1, R01), ab_sample)
    assert np.concatenate(t.highest) == pytest.approx([1.0, 7.71])
    assert np.concatenate(t.best) == pytest.approx([2.0, 7.0])
    assert np.concatenate(t.lowest) == pytest.approx([3.0, 6.29])


def test_targets_a_self_benchmarks(ab_sample):
    sol = solve_linear_kam(ab_sample, 0, R01)
    assert sol.s_minus == pytest.approx([0.2]) and sol.s_plus == pytest.approx([0.7])
    t = compute_targets(sol, ab_sample)
    assert np.concatenate(t.best) == pytest.approx([2.0, 7.0])


def test_targets_collapse_with_zero_slack():
    s = Sample.from_arrays([[2.0]], [[7.0]])
    t = compute_targets(solve_linear_kam(s, 0, ZERO), s)
    for pair in (t.highest, t.best, t.lowest):
        assert np.concatenate(pair).tolist() == [2.0, 7.0]
    sc = compute_scores(solve_linear_kam(s, 0, ZERO), t, s)
    assert (sc.ka_hat, sc.ka_star, sc.ka_tilde, sc.sensitivity) == (1.0, 1.0, 1.0, 1.0)


def test_scores_b(ab_sample):
    sol = solve_linear_kam(ab_sample, 1, R01)
    sc = compute_scores(sol, compute_targets(sol, ab_sample), ab_sample)
    assert sc.ka_star == pytest.approx(B_STAR, abs=1e-12)
    assert sc.ka_hat == pytest.approx(B_HAT, abs=1e-12)
    assert sc.ka_tilde == pytest.approx(B_TILDE, abs=1e-12)
    assert sc.sensitivity == pytest.approx(B_HAT / B_TILDE, abs=1e-12)


def test_scores_a(ab_sample):
    sol = solve_linear_kam(ab_sample, 0, R01)
    sc = compute_scores(sol, compute_targets(sol, ab_sample), ab_sample)
    assert sc.ka_star == pytest.approx(1.0, abs=1e-12)
    assert sc.ka_hat == pytest.approx(A_HAT, abs=1e-12)
    assert sc.ka_tilde == pytest.approx(A_TILDE, abs=1e-12)
    assert sc.sensitivity == pytest.approx(A_HAT / A_TILDE, abs=1e-12)


def test_classification_examples():
    assert classify_efficiency(1.0, 1.0, R01, 1, 1).efficient
    b = classify_efficiency(1.0, 0.20286, R01, 1, 1)
    assert not b.efficient and b.gap == pytest.approx(0.79714)
    assert b.delta_used == pytest.approx(0.01)
    assert not classify_efficiency(0.6, 0.6, R01, 1, 1).efficient


@pytest.mark.parametrize("rule, delta", [("tenth", 0.01), ("overfactors", 0.05)])
def test_classification_straddles_delta(rule, delta):
    cfg = KamConfig(EpsilonScheme.proportional(0.1), delta_rule=rule)
    assert classify_efficiency(1.0, 1.0 - 0.9 * delta, cfg, 1, 1).efficient
    assert not classify_efficiency(1.0, 1.0 - 1.1 * delta, cfg, 1, 1).efficient


def test_hostile_fixed_epsilon_is_reported(ab_sample):
    # y + s+ - 2 eps+ >= 0 and Y lam - s+ = y - eps+ cannot both hold
    cfg = KamConfig(EpsilonScheme.fixed([0.0], [100.0]), delta_rule=0.0)
    with pytest.raises(ConfigurationError, match="'A'"):
        solve_linear_kam(ab_sample, 0, cfg)


def test_degenerate_score_raises():
    # eps- reaches the smallest input, so the highest target's input can be zero
    s = Sample.from_arrays([[1.0], [10.0]], [[5.0], [5.0]])
    cfg = KamConfig(EpsilonScheme.fixed([1.0], [0.0]), delta_rule=0.0)
    sol = solve_linear_kam(s, 1, cfg)
    assert sol.s_minus == pytest.approx([10.0])
    with pytest.raises(DegenerateScoreError):
        compute_scores(sol, compute_targets(sol, s), s)


def test_degenerate_detection_ignores_pivot_noise():
    # a binding guard can leave x - s- at 1e-16 instead of 0
    import dataclasses

    s = Sample.from_arrays([[1.0], [10.0]], [[5.0], [5.0]])
    cfg = KamConfig(EpsilonScheme.fixed([1.0], [0.0]), delta_rule=0.0)
    sol = solve_linear_kam(s, 1, cfg)
    noisy = dataclasses.replace(sol, s_minus=np.array([10.0 - 1e-14]))
    with pytest.raises(DegenerateScoreError):
        compute_scores(noisy, compute_targets(noisy, s), s)
    # a genuinely small positive aggregate is still scored
    small = dataclasses.replace(sol, s_minus=np.array([10.0 - 1e-6]))
    sc = compute_scores(small, compute_targets(small, s), s)
    assert sc.ka_hat == pytest.approx(1e-7, rel=1e-6)


def test_nonlinear_examples(ab_sample):
    s1 = Sample.from_arrays([[2.0]], [[7.0]])
    assert solve_nonlinear_kam(s1, 0, ZERO) == pytest.approx(1.0)
    assert solve_nonlinear_kam(ab_sample, 1, R01) <= B_STAR + 1e-6
    assert solve_nonlinear_kam(ab_sample, 0, ZERO) == pytest.approx(1.0)
    assert solve_nonlinear_kam(ab_sample, 1, ZERO) == pytest.approx(1.0)


def test_nonlinear_b_against_oracle(ab_sample):
    x, y = ab_sample.X[:, 0], ab_sample.Y[:, 0]
    ref = nonlinear_kam_oracle(x, y, 1, 1.0, 0.71, 0.1, 1 / 7.1)
    assert solve_nonlinear_kam(ab_sample, 1, R01) == pytest.approx(ref, abs=1e-9)


def test_evaluate_dmu_populates_everything(ab_sample):
    ev = evaluate_dmu(ab_sample, 1, R01, nonlinear=True)
    assert ev.scores.ka_zero == pytest.approx(1.0)
    assert ev.scores.ka_nonlinear <= ev.scores.ka_star + 1e-9
    assert ev.classification.kind == "inefficient"


# ---------------------------------------------------------------- properties

def _check_solution(sol: KamSolution, s: Sample, tol=1e-8):
    l = sol.evaluated
    x, y = s.X[l], s.Y[l]
    assert abs(sol.lam.sum() - 1) <= tol
    assert sol.lam.min() >= -tol and sol.s_minus.min() >= -tol and sol.s_plus.min() >= -tol
    scale = 1 + max(x.max(), y.max())
    assert np.allclose(s.X.T @ sol.lam + sol.s_minus, x + sol.eps_minus, atol=tol * scale)
    assert np.allclose(s.Y.T @ sol.lam - sol.s_plus, y - sol.eps_plus, atol=tol * scale)
    assert np.all(x - sol.s_minus >= -tol * scale)
    assert np.all(y + sol.s_plus - 2 * sol.eps_plus >= -tol * scale)


def _check_targets(t, tol=1e-9):
    assert np.all(t.highest[0] <= t.best[0] + tol) and np.all(t.best[0] <= t.lowest[0] + tol)
    assert np.all(t.highest[1] >= t.best[1] - tol) and np.all(t.best[1] >= t.lowest[1] - tol)


def test_feasibility_and_ordering_random():
    rng = np.random.default_rng(11)
    schemes = [lambda: EpsilonScheme.proportional(rng.uniform(0, 0.49)),
               EpsilonScheme.half_min, EpsilonScheme.zero]
    checked = 0
    for k in range(150):
        s = random_sample(rng, int(rng.integers(1, 10)), int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        cfg = KamConfig(schemes[k % 3]())
        l = int(rng.integers(s.n))
        sol = solve_linear_kam(s, l, cfg)
        _check_solution(sol, s)
        t = compute_targets(sol, s)
        _check_targets(t)
        try:
            sc = compute_scores(sol, t, s)
        except DegenerateScoreError:
            continue
        assert sc.ka_hat <= sc.ka_star + 1e-9 <= sc.ka_tilde + 2e-9
        assert 0 < sc.sensitivity <= 1 + 1e-12
        checked += 1
    assert checked > 100


def test_zero_df_score_one_iff_no_slack():
    rng = np.random.default_rng(12)
    for _ in range(60):
        s = random_sample(rng, int(rng.integers(1, 12)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        for l in range(s.n):
            sol = solve_linear_kam(s, l, ZERO)
            ka0 = compute_scores(sol, compute_targets(sol, s), s).ka_star
            no_slack = max(sol.s_minus.max(), sol.s_plus.max()) <= 1e-9
            assert (ka0 >= 1 - 1e-7) == no_slack


def test_unit_invariance_of_inputs():
    rng = np.random.default_rng(13)
    for _ in range(60):
        s = random_sample(rng, int(rng.integers(2, 10)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        j, c = int(rng.integers(s.m)), float(rng.uniform(0.1, 10))
        X = s.X.copy()
        X[:, j] *= c
        scaled = Sample.from_arrays(X, s.Y)
        cfg = KamConfig(EpsilonScheme.proportional(float(rng.uniform(0.01, 0.4))))
        l = int(rng.integers(s.n))
        try:
            a = evaluate_dmu(s, l, cfg).scores
        except DegenerateScoreError:
            continue
        b = evaluate_dmu(scaled, l, cfg).scores
        for name in ("ka_hat", "ka_star", "ka_tilde", "sensitivity", "ka_zero"):
            assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-9)


def test_matches_vertex_oracle():
    rng = np.random.default_rng(14)
    for _ in range(80):
        s = random_sample(rng, int(rng.integers(1, 7)))
        x, y = s.X[:, 0], s.Y[:, 0]
        r = float(rng.uniform(0.01, 0.4))
        cfg = KamConfig(EpsilonScheme.proportional(r))
        l = int(rng.integers(s.n))
        sol = solve_linear_kam(s, l, cfg)
        obj, sm, sp, ref = linear_kam_oracle(x, y, l, r * x[l], r * y[l], 1 / x[l], 1 / y[l])
        assert sol.objective == pytest.approx(obj, abs=1e-9)
        if not np.all(np.isfinite(ref)) or min(ref) <= 0:
            continue
        sc = compute_scores(sol, compute_targets(sol, s), s)
        assert [sc.ka_hat, sc.ka_star, sc.ka_tilde, sc.sensitivity] == pytest.approx(list(ref), abs=1e-6)
        nl = solve_nonlinear_kam(s, l, cfg)
        assert nl == pytest.approx(nonlinear_kam_oracle(x, y, l, r * x[l], r * y[l], 1 / x[l], 1 / y[l]),
                                   abs=1e-6)
        assert nl <= sc.ka_star + 1e-9


def test_fixed_weights_used_for_scores(ab_sample):
    cfg = KamConfig(EpsilonScheme.proportional(0.1), WeightScheme.fixed([1.0], [1.0]))
    sol = solve_linear_kam(ab_sample, 1, cfg)
    assert sol.w_minus.tolist() == [1.0]
    # unit weights prefer input slack (range 8) over output slack (range 0.1)
    assert sol.lam == pytest.approx([1.0, 0.0])
