"""KAM efficiency scores under variable returns to scale.

For the evaluated DMU ``l`` the linear model maximises the weighted slacks
``w- @ s- + w+ @ s+`` over

    X.T @ lam + s- == x_l + eps-
    Y.T @ lam - s+ == y_l - eps+
    x_l - s- >= 0,   y_l + s+ - 2 eps+ >= 0
    sum(lam) == 1,   lam, s-, s+ >= 0

and the three targets and four scores are read off the optimal slacks.

Every function here is pure over an immutable :class:`~kamdea.types.Sample`,
so different DMUs can be evaluated concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateScoreError, SolverError
from .lp import LinearProgram, LpStatus, solve_lp
from .types import (
    EpsilonScheme,
    KamConfig,
    Sample,
    resolve_delta,
    resolve_epsilon,
    resolve_weights,
)

DINKELBACH_TOL = 1e-8
DINKELBACH_MAX_ITER = 100
ZERO_AGGREGATE_RTOL = 1e-9


@dataclass(frozen=True)
class KamSolution:
    """Optimum of the linear KAM for one DMU.

    ``lam`` is whatever vertex the deterministic pivot rule lands on; when the
    LP has alternate optima it is not unique.
    """

    evaluated: int
    eps_minus: np.ndarray
    eps_plus: np.ndarray
    w_minus: np.ndarray
    w_plus: np.ndarray
    s_minus: np.ndarray
    s_plus: np.ndarray
    lam: np.ndarray
    objective: float


@dataclass(frozen=True)
class KamTargets:
    highest: tuple
    best: tuple
    lowest: tuple


@dataclass(frozen=True)
class KamScores:
    ka_hat: float
    ka_star: float
    ka_tilde: float
    sensitivity: float
    ka_zero: float | None = None
    ka_nonlinear: float | None = None


@dataclass(frozen=True)
class EfficiencyClass:
    kind: str  # "kam_efficient" | "inefficient"
    delta_used: float
    gap: float

    @property
    def efficient(self) -> bool:
        return self.kind == "kam_efficient"


@dataclass(frozen=True)
class KamEvaluation:
    """Everything computed for one DMU: 0-DF and eps-DF solves, targets, scores."""

    index: int
    dmu_id: str
    zero: KamSolution
    solution: KamSolution
    targets: KamTargets
    scores: KamScores
    classification: EfficiencyClass = field(default=None)


def build_linear_kam(sample: Sample, evaluated: int, eps_minus, eps_plus, w_minus, w_plus):
    """Variables are ``[lam (n), s- (m), s+ (p)]``."""
    n, m, p = sample.n, sample.m, sample.p
    x, y = sample.X[evaluated], sample.Y[evaluated]
    nv = n + m + p
    c = np.concatenate([np.zeros(n), w_minus, w_plus])

    A = np.zeros((m + p + 1, nv))
    A[:m, :n] = sample.X.T
    A[:m, n:n + m] = np.eye(m)
    A[m:m + p, :n] = sample.Y.T
    A[m:m + p, n + m:] = -np.eye(p)
    A[m + p, :n] = 1.0
    b = np.concatenate([x + eps_minus, y - eps_plus, [1.0]])

    G = np.zeros((m + p, nv))
    G[:m, n:n + m] = -np.eye(m)
    G[m:, n + m:] = np.eye(p)
    h = np.concatenate([-x, 2.0 * eps_plus - y])
    return LinearProgram(c, "max", A, b, G, h)


def solve_linear_kam(sample: Sample, evaluated: int, config: KamConfig) -> KamSolution:
    if not 0 <= evaluated < sample.n:
        raise IndexError(f"evaluated index {evaluated} out of range for {sample.n} DMUs")
    em, ep = resolve_epsilon(config.epsilon, sample, evaluated)
    wm, wp = resolve_weights(config.weights, sample, evaluated)
    lp = build_linear_kam(sample, evaluated, em, ep, wm, wp)
    sol = solve_lp(lp, config.lp_tolerance)
    dmu_id = sample.dmus[evaluated].id
    if sol.status is LpStatus.INFEASIBLE:
        raise ConfigurationError(
            f"KAM is infeasible for DMU {dmu_id!r} under epsilon {config.epsilon.describe()}"
        )
    if sol.status is LpStatus.UNBOUNDED:
        # slacks are boxed by x - s- >= 0 and the hull; cannot happen for valid data
        raise SolverError(f"KAM reported unbounded for DMU {dmu_id!r}")
    n, m = sample.n, sample.m
    z = sol.x
    return KamSolution(
        evaluated=evaluated,
        eps_minus=em,
        eps_plus=ep,
        w_minus=wm,
        w_plus=wp,
        s_minus=z[n:n + m],
        s_plus=z[n + m:],
        lam=z[:n],
        objective=sol.objective,
    )


def compute_targets(solution: KamSolution, sample: Sample) -> KamTargets:
    x = sample.X[solution.evaluated]
    y = sample.Y[solution.evaluated]
    em, ep = solution.eps_minus, solution.eps_plus
    x_hat = x - solution.s_minus
    y_hat = y + solution.s_plus
    return KamTargets(
        highest=(x_hat, y_hat),
        best=(x_hat + em, y_hat - ep),
        lowest=(x_hat + 2.0 * em, y_hat - 2.0 * ep),
    )


def _ratio_score(x, y, tx, ty, wm, wp, label):
    own_in, own_out = wm @ x, wp @ y
    own = own_out / own_in
    tin, tout = wm @ tx, wp @ ty
    # a binding guard leaves pivot noise where the aggregate is really zero
    zero_in = tin <= ZERO_AGGREGATE_RTOL * own_in
    if zero_in or tout <= ZERO_AGGREGATE_RTOL * own_out:
        raise DegenerateScoreError(
            f"{label} target has a zero weighted {'input' if zero_in else 'output'} aggregate"
        )
    return float(own / (tout / tin))


def compute_scores(solution: KamSolution, targets: KamTargets, sample: Sample,
                   ka_zero: float | None = None, ka_nonlinear: float | None = None) -> KamScores:
    x = sample.X[solution.evaluated]
    y = sample.Y[solution.evaluated]
    wm, wp = solution.w_minus, solution.w_plus
    ka_hat = _ratio_score(x, y, *targets.highest, wm, wp, "highest")
    ka_star = _ratio_score(x, y, *targets.best, wm, wp, "best technical")
    ka_tilde = _ratio_score(x, y, *targets.lowest, wm, wp, "lowest")
    return KamScores(ka_hat, ka_star, ka_tilde, ka_hat / ka_tilde, ka_zero, ka_nonlinear)


def classify_efficiency(ka_zero: float, ka_eps: float, config: KamConfig, m: int, p: int,
                        sample: Sample | None = None) -> EfficiencyClass:
    """Apply the delta rule. Only technically efficient DMUs can be KAM efficient."""
    delta = resolve_delta(config, m, p, sample)
    gap = ka_zero - ka_eps
    tech = ka_zero >= 1.0 - config.score_tolerance
    kind = "kam_efficient" if tech and gap <= delta + config.score_tolerance else "inefficient"
    return EfficiencyClass(kind, delta, gap)


def solve_nonlinear_kam(sample: Sample, evaluated: int, config: KamConfig,
                        start: float | None = None) -> float:
    """Fractional KAM score by Dinkelbach iteration.

    Minimises ``(1 + W- @ (E- - s-)) / (1 + W+ @ (s+ - E+))`` over the
    equality system of the linear model without its two guard rows, where
    ``W = w / (w @ own data)`` and ``E`` is the absolute perturbation the
    linear model uses for this DMU.
    """
    tol = config.lp_tolerance
    n, m, p = sample.n, sample.m, sample.p
    x, y = sample.X[evaluated], sample.Y[evaluated]
    em, ep = resolve_epsilon(config.epsilon, sample, evaluated)
    wm, wp = resolve_weights(config.weights, sample, evaluated)
    Wm = wm / (wm @ x)
    Wp = wp / (wp @ y)

    nv = n + m + p
    A = np.zeros((m + p + 1, nv))
    A[:m, :n] = sample.X.T
    A[:m, n:n + m] = np.eye(m)
    A[m:m + p, :n] = sample.Y.T
    A[m:m + p, n + m:] = -np.eye(p)
    A[m + p, :n] = 1.0
    b = np.concatenate([x + em, y - ep, [1.0]])

    # N(z) = n0 + a @ z,  D(z) = d0 + d @ z
    n0 = 1.0 + Wm @ em
    a = np.concatenate([np.zeros(n), -Wm, np.zeros(p)])
    d0 = 1.0 - Wp @ ep
    d = np.concatenate([np.zeros(n + m), Wp])

    if start is None:
        lin = solve_linear_kam(sample, evaluated, config)
        start = compute_scores(lin, compute_targets(lin, sample), sample).ka_star
    q = float(start)
    gap = np.inf
    dmu_id = sample.dmus[evaluated].id
    for _ in range(DINKELBACH_MAX_ITER):
        lp = LinearProgram(-(a - q * d), "max", A, b)
        sol = solve_lp(lp, tol)
        if sol.status is LpStatus.INFEASIBLE:
            raise ConfigurationError(f"fractional KAM is infeasible for DMU {dmu_id!r}")
        if sol.status is LpStatus.UNBOUNDED:
            raise DegenerateScoreError(
                f"fractional KAM objective is unbounded for DMU {dmu_id!r}"
            )
        z = sol.x
        num = n0 + a @ z
        den = d0 + d @ z
        if den <= 0:
            raise DegenerateScoreError(
                f"fractional KAM denominator is {den:.3g} <= 0 for DMU {dmu_id!r}"
            )
        gap = num - q * den
        if abs(gap) <= DINKELBACH_TOL:
            return float(min(q, num / den))
        q = num / den
    raise SolverError(
        f"Dinkelbach did not converge for DMU {dmu_id!r} in {DINKELBACH_MAX_ITER} iterations",
        iterations=DINKELBACH_MAX_ITER,
        last_gap=float(gap),
    )


def evaluate_dmu(sample: Sample, evaluated: int, config: KamConfig,
                 nonlinear: bool = False) -> KamEvaluation:
    """0-DF and eps-DF solves for one DMU with the same weight scheme."""
    zero_cfg = config.with_epsilon(EpsilonScheme.zero())
    zero = solve_linear_kam(sample, evaluated, zero_cfg)
    ka_zero = compute_scores(zero, compute_targets(zero, sample), sample).ka_star
    sol = solve_linear_kam(sample, evaluated, config)
    targets = compute_targets(sol, sample)
    scores = compute_scores(sol, targets, sample, ka_zero=ka_zero)
    if nonlinear:
        ka_nl = solve_nonlinear_kam(sample, evaluated, config, start=scores.ka_star)
        scores = KamScores(scores.ka_hat, scores.ka_star, scores.ka_tilde, scores.sensitivity,
                           ka_zero, ka_nl)
    cls = classify_efficiency(ka_zero, scores.ka_star, config, sample.m, sample.p, sample)
    return KamEvaluation(evaluated, sample.dmus[evaluated].id, zero, sol, targets, scores, cls)
