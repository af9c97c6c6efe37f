"""Seeded one-input/one-output scenarios with labelled outliers.

Clean DMUs sit on or below a power frontier ``y = a * x**b`` with
exponential inefficiency. Spikes are lifted above the frontier, mimicking
recording errors. NFD ("near and far data") units use an input near the top
of the range while producing barely more than the best clean DMU.

RNG contract: draws come from Python's :class:`random.Random` (MT19937)
seeded with ``seed``, consumed only through ``random()`` in a fixed order
(clean units, then spikes, then NFDs). Exponential variates use the inverse
CDF. Changing any of this changes every frozen fixture.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass

from .errors import GenerationError
from .types import DMU, Sample

CLEAN, SPIKE, NFD = "clean", "spike", "nfd"


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 42
    n_clean: int = 82
    frontier_a: float = 1.0
    frontier_b: float = 0.4
    x_low: float = 1.0
    x_high: float = 10.0
    inefficiency_rate: float = 6.0
    n_outlier_spikes: int = 10
    n_nfd: int = 8
    spike_lift: float = 1.7
    # spikes are placed on the lower share of the input range
    spike_x_share: float = 0.15
    nfd_x_floor: float = 0.8
    nfd_output_margin: float = 0.03

    def validate(self):
        if min(self.n_clean, self.n_outlier_spikes, self.n_nfd) < 0:
            raise GenerationError("counts must be nonnegative")
        if self.n_clean + self.n_outlier_spikes + self.n_nfd == 0:
            raise GenerationError("scenario has no DMUs")
        if self.n_nfd and not self.n_clean:
            raise GenerationError("NFD units need at least one clean reference unit")
        if not (0 < self.x_low < self.x_high):
            raise GenerationError("need 0 < x_low < x_high")
        if not (self.frontier_a > 0 and 0 < self.frontier_b <= 1):
            raise GenerationError("frontier needs a > 0 and 0 < b <= 1")
        if not self.inefficiency_rate > 0:
            raise GenerationError("inefficiency rate must be positive")
        if not self.spike_lift > 1:
            raise GenerationError("spike_lift must exceed 1")
        if not 0 < self.spike_x_share <= 1:
            raise GenerationError("spike_x_share must lie in (0, 1]")
        # NFDs must stay far in input (top fifth) and near in output (within 5%)
        if not 0.8 <= self.nfd_x_floor < 1:
            raise GenerationError("nfd_x_floor must lie in [0.8, 1)")
        if not 0 < self.nfd_output_margin <= 0.05:
            raise GenerationError("nfd_output_margin must lie in (0, 0.05]")

    def frontier(self, x: float) -> float:
        return self.frontier_a * x ** self.frontier_b

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise GenerationError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ScenarioSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LabeledSample:
    sample: Sample
    labels: tuple

    def ids_with(self, label: str) -> list[str]:
        return [d.id for d, lab in zip(self.sample.dmus, self.labels) if lab == label]


def generate(spec: ScenarioSpec | None = None) -> LabeledSample:
    spec = spec or ScenarioSpec()
    spec.validate()
    rng = random.Random(spec.seed)
    lo, hi = spec.x_low, spec.x_high

    rows = []
    for i in range(spec.n_clean):
        x = lo + (hi - lo) * rng.random()
        u = -math.log(1.0 - rng.random()) / spec.inefficiency_rate
        rows.append((f"C{i + 1:03d}", x, spec.frontier(x) * math.exp(-u), CLEAN))

    spike_hi = lo + (hi - lo) * spec.spike_x_share
    for i in range(spec.n_outlier_spikes):
        x = lo + (spike_hi - lo) * rng.random()
        rows.append((f"S{i + 1:03d}", x, spec.frontier(x) * spec.spike_lift, SPIKE))

    if spec.n_nfd:
        ref_y = max(r[2] for r in rows if r[3] == CLEAN)
        x_floor = spec.nfd_x_floor * hi
        for i in range(spec.n_nfd):
            x = x_floor + (hi - x_floor) * rng.random()
            # strictly above the reference, within the margin
            y = ref_y * (1.0 + spec.nfd_output_margin * (1.0 - rng.random()))
            rows.append((f"N{i + 1:03d}", x, y, NFD))

    for rid, x, y, _ in rows:
        if not (x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)):
            raise GenerationError(f"generated DMU {rid} has a nonpositive coordinate")

    sample = Sample(tuple(DMU(r[0], [r[1]], [r[2]]) for r in rows), ("input",), ("output",))
    return LabeledSample(sample, tuple(r[3] for r in rows))
