"""Command line entry point: read or generate a sample, detect outliers, export.

Exit codes: 0 ok, 2 parse, 3 config, 4 solver, 5 io.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .datagen import ScenarioSpec, generate
from .errors import ConfigurationError, KamError, ParseError
from .io import (_write_text, export_polygon_chart, read_sample_csv, write_report_json,
                 write_sample_csv)
from .outliers import DetectorThresholds, detect
from .types import EpsilonScheme, KamConfig, WeightScheme

log = logging.getLogger("kamdea")

EXIT_OK = 0


@dataclass(frozen=True)
class RunManifest:
    out_dir: Path
    input_path: Path | None = None
    scenario: ScenarioSpec | None = None
    config: KamConfig = field(default_factory=KamConfig)
    thresholds: DetectorThresholds = field(default_factory=DetectorThresholds)
    chart: str = "svg"
    second_pass: bool = False
    nonlinear: bool = False
    write_report: bool = True

    def __post_init__(self):
        if (self.input_path is None) == (self.scenario is None):
            raise ConfigurationError("give exactly one of an input CSV or a generator spec")
        if self.chart not in ("svg", "csv", "none"):
            raise ConfigurationError(f"unsupported chart format {self.chart!r}")


def run(manifest: RunManifest) -> int:
    """Orchestrate read-or-generate, detection and exports; return an exit code."""
    try:
        out = Path(manifest.out_dir)
        if manifest.scenario is not None:
            labeled = generate(manifest.scenario)
            sample = labeled.sample
            write_sample_csv(sample, out / "sample.csv")
            _write_labels(labeled, out / "labels.csv")
        else:
            sample = read_sample_csv(manifest.input_path)
        report = detect(sample, manifest.config, manifest.thresholds,
                        second_pass=manifest.second_pass, nonlinear=manifest.nonlinear)
        if manifest.write_report:
            write_report_json(report, out / "report.json")
        if manifest.chart != "none":
            export_polygon_chart(report.diagnostics, out / f"chart.{manifest.chart}", manifest.chart)
            if report.second_pass is not None:
                export_polygon_chart(report.second_pass.diagnostics,
                                     out / f"chart_pass2.{manifest.chart}", manifest.chart)
    except KamError as exc:
        print(f"kamdea: {exc.category} error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"{sample.n} DMUs evaluated; outliers: {', '.join(report.outliers) or 'none'}")
    if report.second_pass is not None:
        print(f"second pass on {report.second_pass.diagnostics.sample.n} DMUs; "
              f"outliers: {', '.join(report.second_pass.outliers) or 'none'}")
    elif report.note:
        print(report.note)
    return EXIT_OK


def _write_labels(labeled, path):
    lines = ["id,label"] + [f"{d.id},{lab}" for d, lab in zip(labeled.sample.dmus, labeled.labels)]
    _write_text(path, "\n".join(lines) + "\n")


def _load_vectors(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return data["minus"], data["plus"]
    except FileNotFoundError:
        raise ParseError(f"{what} file not found", path=path) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"{what} file must be JSON with 'minus' and 'plus' arrays ({exc})",
                         path=path) from None


def parse_epsilon(token: str) -> EpsilonScheme:
    if token == "halfmin":
        return EpsilonScheme.half_min()
    if token == "zero":
        return EpsilonScheme.zero()
    try:
        return EpsilonScheme.proportional(float(token))
    except ValueError:
        pass
    return EpsilonScheme.fixed(*_load_vectors(token, "epsilon"))


def parse_weights(token: str) -> WeightScheme:
    if token == "reciprocal":
        return WeightScheme.reciprocal()
    return WeightScheme.fixed(*_load_vectors(token, "weights"))


def parse_delta(token: str):
    if token in ("tenth", "overfactors"):
        return token
    try:
        return float(token)
    except ValueError:
        raise ConfigurationError(f"--delta must be 'tenth', 'overfactors' or a number, got {token!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kamdea", description="KAM efficiency scoring and outlier detection")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="sample CSV (id, x:<name>..., y:<name>...)")
    src.add_argument("--generate", metavar="SPEC",
                     help="scenario spec JSON file, or 'default' for the built-in scenario")
    p.add_argument("--epsilon", default="0.1", help="proportional rate r, 'halfmin', 'zero', or a JSON file")
    p.add_argument("--weights", default="reciprocal", help="'reciprocal' or a JSON file")
    p.add_argument("--delta", default="tenth", help="'tenth', 'overfactors' or a number")
    p.add_argument("--z", type=float, default=2.0, help="z-score cut for cases i and ii")
    p.add_argument("--drop", type=float, default=0.5, help="relative drop cut for case iii")
    p.add_argument("--sens", type=float, default=2.0, help="cut on 1/S for case iv")
    p.add_argument("--pass2", action="store_true", help="rerun on the sample minus first-pass outliers")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--chart", choices=("svg", "csv", "none"), default="svg")
    p.add_argument("--nonlinear", action="store_true", help="also compute the fractional KAM score")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def manifest_from_args(args) -> RunManifest:
    scenario = None
    if args.generate is not None:
        if args.generate == "default":
            scenario = ScenarioSpec()
        else:
            try:
                scenario = ScenarioSpec.from_file(args.generate)
            except FileNotFoundError:
                raise ParseError("scenario spec not found", path=args.generate) from None
            except (ValueError, TypeError) as exc:
                raise ParseError(f"bad scenario spec: {exc}", path=args.generate) from None
    config = KamConfig(parse_epsilon(args.epsilon), parse_weights(args.weights), parse_delta(args.delta))
    thresholds = DetectorThresholds(args.z, args.drop, args.sens)
    return RunManifest(args.out, args.input, scenario, config, thresholds, args.chart,
                       args.pass2, args.nonlinear)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        manifest = manifest_from_args(args)
    except KamError as exc:
        print(f"kamdea: {exc.category} error: {exc}", file=sys.stderr)
        return exc.exit_code
    return run(manifest)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
