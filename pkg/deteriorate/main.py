"""
Command-line entry point.

Sub-commands synthesize cohorts, validate them, report data-collection
quality, export features and run the early-warning and risk-prediction
experiments. Every command writes ``run_manifest.json`` next to its
outputs.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone

from deteriorate import __version__
from deteriorate.errors import EXIT_INTERNAL, EXIT_OK, ConfigError, DeteriorateError
from deteriorate.Evaluation.ablations import modality_ablation, monitoring_length_ablation
from deteriorate.Evaluation.datasets import patient_dataset
from deteriorate.Evaluation.experiments import early_warning_grid, risk_table
from deteriorate.Features.catalog import build_catalog, write_catalog_manifest
from deteriorate.Ingest.cohort import load_cohort, write_cohort
from deteriorate.Ingest.synthetic import generate_synthetic_cohort
from deteriorate.Models.registry import spec_from_config
from deteriorate.Pipeline.report import write_pipeline_report
from deteriorate.settings import ExperimentConfig, PipelineConfig, SynthConfig

logger = logging.getLogger(__name__)

MANIFEST_FILE = "run_manifest.json"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
FLOAT_FORMAT = "%.10g"


def file_digest(path):
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for block in iter(lambda: file.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class RunManifest:
    """
    Provenance record of one command run.

    Attributes:
        command (str): sub-command name
        config (dict): configuration snapshot
        seed (int | None): master seed
        inputs (dict): input paths by role
        outputs (list[str]): files produced
    """

    def __init__(self, command, config=None, seed=None, inputs=None):
        self.command = command
        self.config = config or {}
        self.seed = seed
        self.inputs = inputs or {}
        self.outputs = []

    def add(self, paths):
        self.outputs.extend(paths)

    def write(self, out_dir):
        """Hash every output and write the manifest into ``out_dir``."""
        hashes = {os.path.relpath(path, out_dir).replace(os.sep, "/"): file_digest(path)
                  for path in sorted(set(self.outputs))}
        data = {
            "command": self.command,
            "version": __version__,
            "config": self.config,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": hashes,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        path = os.path.join(out_dir, MANIFEST_FILE)
        with open(path, "w", encoding="utf-8") as file:
            json.dump(data, file, indent=2, sort_keys=True)
            file.write("\n")
        logger.info("Wrote %s (%d outputs)", path, len(hashes))
        return path


def write_table(frame, out_dir, stem, index=False):
    """Write a result table as CSV and JSON records; return both paths."""
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    json_path = os.path.join(out_dir, f"{stem}.json")
    frame.to_csv(csv_path, index=index, float_format=FLOAT_FORMAT)
    records = frame.reset_index() if index else frame
    with open(json_path, "w", encoding="utf-8") as file:
        file.write(records.to_json(orient="records", indent=2, double_precision=10))
        file.write("\n")
    return [csv_path, json_path]


def _cohort(args, reports=None):
    if not os.path.isdir(args.cohort):
        raise ConfigError(f"cohort directory not found: {args.cohort}")
    return load_cohort(args.cohort, reports)


def _experiment_config(args):
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    return replace(config, **overrides) if overrides else config


def cmd_synth(args):
    config = SynthConfig.load(args.config)
    if args.seed is not None:
        config = replace(config, rng_seed=args.seed)
    cohort = generate_synthetic_cohort(config)
    manifest = RunManifest("synth", config.to_dict(), config.rng_seed)
    manifest.add(write_cohort(cohort, args.out))
    return manifest


def cmd_ingest(args):
    reports = {}
    cohort = _cohort(args, reports)
    summary = {
        "patients": [
            {
                "patient_id": record.patient_id,
                "days": record.n_days,
                "deteriorated": record.outcome.deteriorated,
                "samples": {series.modality.value: len(series) for series in record.all_series()},
                "sleep_summaries": len(record.sleep_summaries),
                "sync_events": len(record.sync_events),
                "lace": record.lace_inputs is not None,
            }
            for record in cohort
        ],
        "parse_reports": {name: report.to_dict() for name, report in sorted(reports.items())},
    }
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "ingest_summary.json")
    with open(path, "w", encoding="utf-8") as file:
        json.dump(summary, file, indent=2, sort_keys=True)
        file.write("\n")
    manifest = RunManifest("ingest", inputs={"cohort": args.cohort})
    manifest.add([path])
    return manifest


def cmd_pipeline_report(args):
    config = PipelineConfig.load(args.config)
    cohort = _cohort(args)
    manifest = RunManifest("pipeline-report", config.to_dict(), inputs={"cohort": args.cohort})
    manifest.add(write_pipeline_report(cohort, args.out, config))
    return manifest


def cmd_features(args):
    config = _experiment_config(args)
    cohort = _cohort(args)
    dataset = patient_dataset(cohort, config.k_days, config.features)
    os.makedirs(args.out, exist_ok=True)
    paths = [os.path.join(args.out, name)
             for name in ("features.csv", "features_missing.json", "catalog.json")]
    dataset.matrix.export(paths[0], paths[1])
    write_catalog_manifest(paths[2], build_catalog(config.features))
    manifest = RunManifest("features", config.to_dict(), config.seed, {"cohort": args.cohort})
    manifest.add(paths)
    return manifest


def cmd_early_warn(args):
    config = _experiment_config(args)
    cohort = _cohort(args)
    table = early_warning_grid(cohort, config)
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest("early-warn", config.to_dict(), config.seed, {"cohort": args.cohort})
    manifest.add(write_table(table, args.out, "early_warning"))
    return manifest


def cmd_risk(args):
    config = _experiment_config(args)
    cohort = _cohort(args)
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest("risk", config.to_dict(), config.seed, {"cohort": args.cohort})
    if args.ablation is None:
        manifest.add(write_table(risk_table(cohort, config), args.out, "risk"))
        return manifest
    spec = spec_from_config("knn", config)
    if args.ablation == "modality":
        table = modality_ablation(cohort, spec, config=config)
    else:
        table = monitoring_length_ablation(cohort, spec, config=config)
    manifest.add(write_table(table, args.out, f"ablation_{args.ablation}"))
    return manifest


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "pipeline-report": cmd_pipeline_report,
    "features": cmd_features,
    "early-warn": cmd_early_warn,
    "risk": cmd_risk,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="deteriorate",
        description="Clinical-deterioration prediction from wearable data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, cohort=True, seeded=True):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", help="JSON configuration file")
        sub.add_argument("--out", required=True, help="output directory")
        if cohort:
            sub.add_argument("--cohort", required=True, help="cohort directory")
        if seeded:
            sub.add_argument("--seed", type=int, help="override the configured seed")
            sub.add_argument("--workers", type=int, help="parallel workers (default: all cores)")
        return sub

    add("synth", "generate a synthetic cohort", cohort=False)
    add("ingest", "validate a cohort directory", seeded=False)
    add("pipeline-report", "yield, reliability, latency and alert reports", seeded=False)
    add("features", "export the risk-prediction feature matrix")
    add("early-warn", "early-warning (window x horizon x model) grid")
    risk = add("risk", "risk-prediction cross-validation with the LACE baseline")
    risk.add_argument("--ablation", choices=("modality", "days"),
                      help="run a modality or monitoring-length ablation instead")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        logger.error("--workers must be at least 1")
        return ConfigError.exit_code
    try:
        manifest = COMMANDS[args.command](args)
        manifest.write(args.out)
    except DeteriorateError as error:
        logger.error("%s", error)
        return error.exit_code
    except Exception:  # pylint: disable=broad-except
        logger.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
