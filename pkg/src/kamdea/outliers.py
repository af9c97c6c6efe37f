"""Outlier detection from 0-DF and eps-DF KAM scores.

A DMU is flagged when any of four cases hold:

i.   its 0-DF technical score stands far above the sample (z-score cut),
ii.  its eps-DF best technical score stands far above the sample,
iii. its eps-DF score drops by a large fraction of its 0-DF score,
iv.  it is technically efficient and its sensitivity ``S`` is small, i.e.
     ``1/S`` is large. ``S <= 1`` always, so "great sensitivity" is read as a
     wide spread between the highest and lowest scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, KamError
from .kam import evaluate_dmu
from .types import KamConfig, Sample


@dataclass(frozen=True)
class DetectorThresholds:
    z_much_greater: float = 2.0
    drop_moderate: float = 0.5
    sensitivity_cut: float = 2.0

    def __post_init__(self):
        if not self.z_much_greater > 0:
            raise ConfigurationError("z threshold must be positive")
        if not 0 < self.drop_moderate < 1:
            raise ConfigurationError("drop threshold must lie in (0, 1)")
        if not self.sensitivity_cut >= 1:
            raise ConfigurationError("sensitivity cut (applied to 1/S) must be >= 1")

    def describe(self) -> dict:
        return {
            "z_much_greater": self.z_much_greater,
            "drop_moderate": self.drop_moderate,
            "sensitivity_cut": self.sensitivity_cut,
        }


@dataclass(frozen=True)
class DiagnosticSeries:
    """Per-DMU scores in sample order, plus the presentation order.

    ``order`` sorts by descending 0-DF score, ties by id ascending.
    """

    sample: Sample
    evaluations: tuple
    order: tuple

    @property
    def ids(self) -> list[str]:
        return self.sample.ids

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(e.scores, name) for e in self.evaluations], dtype=float)

    @property
    def ka_zero(self):
        return self.column("ka_zero")

    @property
    def ka_star(self):
        return self.column("ka_star")

    @property
    def ka_tilde(self):
        return self.column("ka_tilde")

    @property
    def sensitivity(self):
        return self.column("sensitivity")

    def rows(self):
        """``(id, ka_zero, ka_star, ka_tilde, sensitivity)`` in sorted order."""
        for i in self.order:
            s = self.evaluations[i].scores
            yield self.sample.dmus[i].id, s.ka_zero, s.ka_star, s.ka_tilde, s.sensitivity


@dataclass(frozen=True)
class OutlierFlags:
    case_i: bool
    case_ii: bool
    case_iii: bool
    case_iv: bool
    zscore_ka0: float | None
    zscore_kastar: float | None
    relative_drop: float
    sensitivity_magnitude: float

    @property
    def any(self) -> bool:
        return self.case_i or self.case_ii or self.case_iii or self.case_iv


@dataclass(frozen=True)
class OutlierReport:
    config: KamConfig
    thresholds: DetectorThresholds
    diagnostics: DiagnosticSeries
    flags: tuple
    outliers: tuple
    second_pass: "OutlierReport | None" = None
    note: str | None = None
    nonlinear: bool = False
    extra: dict = field(default_factory=dict)


def evaluate_sample(sample: Sample, config: KamConfig, nonlinear: bool = False) -> DiagnosticSeries:
    evals = []
    for i, dmu in enumerate(sample.dmus):
        try:
            evals.append(evaluate_dmu(sample, i, config, nonlinear=nonlinear))
        except KamError as exc:
            raise type(exc)(f"DMU {dmu.id!r}: {exc}") from exc
    # rounding keeps pivot-level noise from reordering ties
    order = sorted(range(sample.n),
                   key=lambda i: (-round(evals[i].scores.ka_zero, 10), sample.dmus[i].id))
    return DiagnosticSeries(sample, tuple(evals), tuple(order))


def _zscores(values, floor):
    sd = values.std()
    if sd <= floor:
        return None
    return (values - values.mean()) / sd


def flag_outliers(diag: DiagnosticSeries, thresholds: DetectorThresholds,
                  config: KamConfig) -> tuple:
    ka0 = diag.ka_zero
    kas = diag.ka_star
    sens = diag.sensitivity
    tol = config.score_tolerance
    z0 = _zscores(ka0, tol)
    zs = _zscores(kas, tol)
    flags = []
    for i in range(len(ka0)):
        drop = (ka0[i] - kas[i]) / ka0[i]
        mag = 1.0 / sens[i]
        tech = ka0[i] >= 1.0 - tol
        flags.append(OutlierFlags(
            case_i=bool(z0 is not None and z0[i] >= thresholds.z_much_greater),
            case_ii=bool(zs is not None and zs[i] >= thresholds.z_much_greater),
            case_iii=bool(drop >= thresholds.drop_moderate),
            case_iv=bool(tech and mag >= thresholds.sensitivity_cut),
            zscore_ka0=None if z0 is None else float(z0[i]),
            zscore_kastar=None if zs is None else float(zs[i]),
            relative_drop=float(drop),
            sensitivity_magnitude=float(mag),
        ))
    return tuple(flags)


def detect(sample: Sample, config: KamConfig | None = None,
           thresholds: DetectorThresholds | None = None, second_pass: bool = False,
           depth: int = 1, nonlinear: bool = False) -> OutlierReport:
    """Flag outliers; with ``second_pass`` rerun on the sample minus them.

    ``depth`` bounds how many exclusion rounds follow the first pass.
    """
    config = config or KamConfig()
    thresholds = thresholds or DetectorThresholds()
    diag = evaluate_sample(sample, config, nonlinear=nonlinear)
    flags = flag_outliers(diag, thresholds, config)
    outliers = tuple(diag.order[k] for k in range(sample.n) if flags[diag.order[k]].any)
    outlier_ids = tuple(sample.dmus[i].id for i in outliers)

    nested, note = None, None
    if second_pass and depth > 0 and outlier_ids:
        if len(outlier_ids) == sample.n:
            note = "second pass skipped: every DMU was flagged"
        else:
            reduced = sample.without(outlier_ids)
            nested = detect(reduced, config, thresholds, second_pass=depth > 1,
                            depth=depth - 1, nonlinear=nonlinear)
    return OutlierReport(config, thresholds, diag, flags, outlier_ids, nested, note, nonlinear)
