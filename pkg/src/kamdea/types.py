"""Domain model: DMUs, samples, and run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ConfigurationError


def _frozen(values, name) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DMU:
    """One decision making unit with nonnegative inputs and outputs."""

    id: str
    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = _frozen(self.inputs, f"DMU {self.id!r} inputs")
        y = _frozen(self.outputs, f"DMU {self.id!r} outputs")
        if x.size == 0 or y.size == 0:
            raise ConfigurationError(f"DMU {self.id!r} needs at least one input and one output")
        if np.any(x < 0) or np.any(y < 0):
            raise ConfigurationError(f"DMU {self.id!r} has a negative factor")
        if not np.any(x > 0) or not np.any(y > 0):
            raise ConfigurationError(
                f"DMU {self.id!r} needs a positive input and a positive output"
            )
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)

    def __eq__(self, other):
        if not isinstance(other, DMU):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.inputs, other.inputs)
            and np.array_equal(self.outputs, other.outputs)
        )

    def __repr__(self):
        xs = "; ".join([", ".join(f"{v:g}" for v in self.inputs),
                        ", ".join(f"{v:g}" for v in self.outputs)])
        return f"DMU({self.id!r}: {xs})"


@dataclass(frozen=True, eq=False)
class Sample:
    """An ordered, dimension-consistent reference set of DMUs.

    ``X`` is the n x m input matrix and ``Y`` the n x p output matrix, rows in
    DMU order.
    """

    dmus: tuple
    input_names: tuple = ()
    output_names: tuple = ()
    X: np.ndarray = field(init=False, repr=False)
    Y: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dmus = tuple(self.dmus)
        if not dmus:
            raise ConfigurationError("a sample needs at least one DMU")
        m, p = dmus[0].inputs.size, dmus[0].outputs.size
        seen = set()
        for d in dmus:
            if d.inputs.size != m or d.outputs.size != p:
                raise ConfigurationError(
                    f"DMU {d.id!r} has {d.inputs.size} inputs/{d.outputs.size} outputs, "
                    f"expected {m}/{p}"
                )
            if d.id in seen:
                raise ConfigurationError(f"duplicate DMU id {d.id!r}")
            seen.add(d.id)
        in_names = tuple(self.input_names) or tuple(f"x{j + 1}" for j in range(m))
        out_names = tuple(self.output_names) or tuple(f"y{k + 1}" for k in range(p))
        if len(in_names) != m or len(out_names) != p:
            raise ConfigurationError("factor names do not match factor counts")
        X = np.vstack([d.inputs for d in dmus])
        Y = np.vstack([d.outputs for d in dmus])
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "dmus", dmus)
        object.__setattr__(self, "input_names", in_names)
        object.__setattr__(self, "output_names", out_names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @classmethod
    def from_arrays(cls, X, Y, ids: Sequence[str] | None = None, input_names=(), output_names=()):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if X.shape[0] != Y.shape[0]:
            raise ConfigurationError("input and output matrices disagree on row count")
        if ids is None:
            ids = [f"DMU{i + 1}" for i in range(X.shape[0])]
        dmus = tuple(DMU(str(i), x, y) for i, x, y in zip(ids, X, Y))
        return cls(dmus, input_names, output_names)

    @property
    def n(self) -> int:
        return len(self.dmus)

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def p(self) -> int:
        return self.Y.shape[1]

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.dmus]

    def index_of(self, dmu_id: str) -> int:
        for i, d in enumerate(self.dmus):
            if d.id == dmu_id:
                return i
        raise KeyError(dmu_id)

    def subset(self, indices) -> "Sample":
        return Sample(tuple(self.dmus[i] for i in indices), self.input_names, self.output_names)

    def without(self, ids) -> "Sample":
        drop = set(ids)
        return Sample(tuple(d for d in self.dmus if d.id not in drop),
                      self.input_names, self.output_names)

    def __len__(self):
        return len(self.dmus)

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.dmus == other.dmus
            and self.input_names == other.input_names
            and self.output_names == other.output_names
        )


@dataclass(frozen=True)
class EpsilonScheme:
    """How the perturbation vectors are chosen for each evaluated DMU.

    ``mode`` is one of ``"proportional"``, ``"halfmin"``, ``"fixed"``, ``"zero"``.
    """

    mode: str
    rate: float = 0.0
    minus: tuple = ()
    plus: tuple = ()

    MAX_RATE = 0.5

    def __post_init__(self):
        if self.mode not in ("proportional", "halfmin", "fixed", "zero"):
            raise ConfigurationError(f"unknown epsilon mode {self.mode!r}")
        if self.mode == "proportional":
            r = float(self.rate)
            # r >= 0.5 breaks feasibility of the self-point under y + s+ - 2e+ >= 0
            if not (0.0 <= r < self.MAX_RATE):
                raise ConfigurationError(f"proportional epsilon rate must lie in [0, 0.5), got {r}")
            object.__setattr__(self, "rate", r)
        if self.mode == "fixed":
            minus = tuple(float(v) for v in self.minus)
            plus = tuple(float(v) for v in self.plus)
            if any(not np.isfinite(v) or v < 0 for v in minus + plus):
                raise ConfigurationError("fixed epsilon vectors must be finite and nonnegative")
            object.__setattr__(self, "minus", minus)
            object.__setattr__(self, "plus", plus)

    @classmethod
    def proportional(cls, rate: float) -> "EpsilonScheme":
        return cls("proportional", rate=rate)

    @classmethod
    def half_min(cls) -> "EpsilonScheme":
        return cls("halfmin")

    @classmethod
    def fixed(cls, minus, plus) -> "EpsilonScheme":
        return cls("fixed", minus=tuple(minus), plus=tuple(plus))

    @classmethod
    def zero(cls) -> "EpsilonScheme":
        return cls("zero")

    def describe(self) -> dict:
        if self.mode == "proportional":
            return {"mode": "proportional", "rate": self.rate}
        if self.mode == "fixed":
            return {"mode": "fixed", "minus": list(self.minus), "plus": list(self.plus)}
        return {"mode": self.mode}


@dataclass(frozen=True)
class WeightScheme:
    """Factor weights: reciprocal of the evaluated DMU's data, or fixed vectors."""

    mode: str
    minus: tuple = ()
    plus: tuple = ()

    def __post_init__(self):
        if self.mode not in ("reciprocal", "fixed"):
            raise ConfigurationError(f"unknown weight mode {self.mode!r}")
        if self.mode == "fixed":
            minus = tuple(float(v) for v in self.minus)
            plus = tuple(float(v) for v in self.plus)
            if not minus or not plus:
                raise ConfigurationError("fixed weights need both input and output vectors")
            if any(not np.isfinite(v) or v <= 0 for v in minus + plus):
                raise ConfigurationError("fixed weights must be finite and strictly positive")
            object.__setattr__(self, "minus", minus)
            object.__setattr__(self, "plus", plus)

    @classmethod
    def reciprocal(cls) -> "WeightScheme":
        return cls("reciprocal")

    @classmethod
    def fixed(cls, minus, plus) -> "WeightScheme":
        return cls("fixed", tuple(minus), tuple(plus))

    def describe(self) -> dict:
        if self.mode == "fixed":
            return {"mode": "fixed", "minus": list(self.minus), "plus": list(self.plus)}
        return {"mode": "reciprocal"}


DeltaRule = Union[str, float]


@dataclass(frozen=True)
class KamConfig:
    """Run configuration. ``delta_rule`` is ``"tenth"``, ``"overfactors"`` or a number."""

    epsilon: EpsilonScheme = field(default_factory=lambda: EpsilonScheme.proportional(0.1))
    weights: WeightScheme = field(default_factory=WeightScheme.reciprocal)
    delta_rule: DeltaRule = "tenth"
    lp_tolerance: float = 1e-9
    score_tolerance: float = 1e-7

    def __post_init__(self):
        rule = self.delta_rule
        if isinstance(rule, str):
            if rule not in ("tenth", "overfactors"):
                raise ConfigurationError(f"unknown delta rule {rule!r}")
        else:
            rule = float(rule)
            if not np.isfinite(rule) or rule < 0:
                raise ConfigurationError("a fixed delta must be finite and >= 0")
            object.__setattr__(self, "delta_rule", rule)
        if not (self.lp_tolerance > 0 and self.score_tolerance > 0):
            raise ConfigurationError("tolerances must be positive")

    def with_epsilon(self, scheme: EpsilonScheme) -> "KamConfig":
        return KamConfig(scheme, self.weights, self.delta_rule, self.lp_tolerance, self.score_tolerance)

    def describe(self) -> dict:
        return {
            "epsilon": self.epsilon.describe(),
            "weights": self.weights.describe(),
            "delta_rule": self.delta_rule,
            "lp_tolerance": self.lp_tolerance,
            "score_tolerance": self.score_tolerance,
        }


def resolve_epsilon(scheme: EpsilonScheme, sample: Sample, evaluated: int):
    """Return the absolute perturbation vectors ``(eps_minus, eps_plus)`` for one DMU."""
    if not 0 <= evaluated < sample.n:
        raise IndexError(f"evaluated index {evaluated} out of range for {sample.n} DMUs")
    m, p = sample.m, sample.p
    if scheme.mode == "zero":
        return np.zeros(m), np.zeros(p)
    if scheme.mode == "proportional":
        return scheme.rate * sample.X[evaluated], scheme.rate * sample.Y[evaluated]
    if scheme.mode == "halfmin":
        return (_half_min(sample.X, sample.input_names, "input"),
                _half_min(sample.Y, sample.output_names, "output"))
    minus = np.array(scheme.minus, dtype=float)
    plus = np.array(scheme.plus, dtype=float)
    if minus.size != m or plus.size != p:
        raise ConfigurationError(
            f"fixed epsilon has {minus.size}/{plus.size} entries, sample has {m} inputs/{p} outputs"
        )
    return minus, plus


def _half_min(M, names, kind):
    out = np.empty(M.shape[1])
    for j in range(M.shape[1]):
        col = M[:, j]
        pos = col[col > 0]
        if pos.size == 0:
            raise ConfigurationError(f"{kind} factor {names[j]!r} is zero for every DMU; "
                                     "half-min epsilon is undefined")
        out[j] = 0.5 * pos.min()
    return out


def _reciprocal(values, column_min):
    w = np.empty_like(values)
    for j, v in enumerate(values):
        w[j] = 1.0 / v if v > 0 else 1.0 / column_min[j]
    return w


def _positive_column_min(M):
    out = np.empty(M.shape[1])
    for j in range(M.shape[1]):
        pos = M[:, j][M[:, j] > 0]
        out[j] = pos.min() if pos.size else 1.0
    return out


def resolve_weights(scheme: WeightScheme, sample: Sample, evaluated: int):
    """Return ``(w_minus, w_plus)`` for the evaluated DMU.

    Reciprocal weights fall back to ``1 / (smallest positive value of the
    factor in the sample)`` where the evaluated DMU has a zero entry.
    """
    if scheme.mode == "fixed":
        w_minus = np.array(scheme.minus, dtype=float)
        w_plus = np.array(scheme.plus, dtype=float)
        if w_minus.size != sample.m or w_plus.size != sample.p:
            raise ConfigurationError(
                f"fixed weights have {w_minus.size}/{w_plus.size} entries, "
                f"sample has {sample.m} inputs/{sample.p} outputs"
            )
        return w_minus, w_plus
    x, y = sample.X[evaluated], sample.Y[evaluated]
    w_minus = _reciprocal(x, _positive_column_min(sample.X) if np.any(x == 0) else None)
    w_plus = _reciprocal(y, _positive_column_min(sample.Y) if np.any(y == 0) else None)
    return w_minus, w_plus


def epsilon_scalar(config: KamConfig, sample: Sample | None = None) -> float:
    """The single epsilon magnitude behind the delta rules.

    Only schemes that boil down to one number qualify; anything else needs an
    explicit numeric delta.
    """
    scheme = config.epsilon
    if scheme.mode == "zero":
        return 0.0
    if scheme.mode == "proportional":
        return scheme.rate
    if scheme.mode == "fixed":
        values = set(scheme.minus + scheme.plus)
    else:
        if sample is None:
            raise ConfigurationError("half-min epsilon needs the sample to resolve delta")
        em, ep = resolve_epsilon(scheme, sample, 0)
        values = set(np.concatenate([em, ep]).tolist())
    if len(values) != 1:
        raise ConfigurationError(
            f"delta rule {config.delta_rule!r} needs a single scalar epsilon, but the "
            f"{scheme.mode} scheme resolves to {sorted(values)}; pass a numeric delta"
        )
    return values.pop()


def resolve_delta(config: KamConfig, m: int, p: int, sample: Sample | None = None) -> float:
    rule = config.delta_rule
    if not isinstance(rule, str):
        return float(rule)
    eps = epsilon_scalar(config, sample)
    if rule == "tenth":
        return 0.1 * eps
    return eps / (m + p)
