"""
Cohort directory loading and writing.

A cohort directory holds ``cohort.json`` (the manifest) and, per patient,
``<pid>.heart_rate.csv``, ``<pid>.steps.csv``, ``<pid>.sleep_status.csv``,
``<pid>.sleep_summary.csv`` and ``<pid>.sync.csv``. Any of the per-patient
files may be absent; a patient with none of them is an error.
"""

import logging
import os

from deteriorate.errors import CohortError, DataError
from deteriorate.Ingest.parsing import (
    ManifestEntry,
    ParseReport,
    parse_intraday,
    parse_manifest,
    parse_sleep_summaries,
    parse_sync_log,
    serialize_intraday,
    serialize_sleep_summaries,
    serialize_sync_log,
    write_manifest,
)
from deteriorate.Ingest.records import Modality, OutcomeLabel, PatientRecord, SampleSeries

logger = logging.getLogger(__name__)

MANIFEST_NAME = "cohort.json"
SLEEP_SUMMARY_TAG = "sleep_summary"
SYNC_TAG = "sync"
FILE_TAGS = tuple(m.value for m in Modality) + (SLEEP_SUMMARY_TAG, SYNC_TAG)


def patient_file(dirname, patient_id, tag):
    return os.path.join(dirname, f"{patient_id}.{tag}.csv")


def _split_name(filename):
    """Return (patient_id, tag) for a cohort CSV name, else None."""
    if not filename.endswith(".csv"):
        return None
    stem = filename[:-len(".csv")]
    for tag in FILE_TAGS:
        suffix = "." + tag
        if stem.endswith(suffix) and len(stem) > len(suffix):
            return stem[:-len(suffix)], tag
    return None


def _parse_file(path, parser, *args):
    with open(path, "r", encoding="utf-8", newline="") as file:
        try:
            return parser(file, *args)
        except DataError as error:
            logger.error("%s: %s", os.path.basename(path), error)
            raise


def load_patient(dirname, entry, reports=None):
    """
    Load one patient described by a manifest entry.

    Args:
        dirname (str): cohort directory
        entry (ManifestEntry): the patient's manifest entry
        reports (dict, optional): filled with {file name: ParseReport}

    Returns:
        PatientRecord
    """
    present = {tag: os.path.exists(patient_file(dirname, entry.patient_id, tag))
               for tag in FILE_TAGS}
    if not any(present.values()):
        raise CohortError("listed in the manifest but has no data files", entry.patient_id)

    series = {}
    for modality in Modality:
        path = patient_file(dirname, entry.patient_id, modality.value)
        if not present[modality.value]:
            logger.info("patient %s: no %s file", entry.patient_id, modality.value)
            series[modality] = SampleSeries.empty(modality)
            continue
        report = ParseReport()
        series[modality] = _parse_file(path, parse_intraday, modality, report)
        if reports is not None:
            reports[os.path.basename(path)] = report

    summaries = ()
    if present[SLEEP_SUMMARY_TAG]:
        summaries = _parse_file(patient_file(dirname, entry.patient_id, SLEEP_SUMMARY_TAG),
                                parse_sleep_summaries)
    events = ()
    if present[SYNC_TAG]:
        events = _parse_file(patient_file(dirname, entry.patient_id, SYNC_TAG), parse_sync_log)

    return PatientRecord(
        patient_id=entry.patient_id,
        monitoring_start=entry.monitoring_start,
        monitoring_end=entry.monitoring_end,
        heart_rate=series[Modality.HEART_RATE],
        steps=series[Modality.STEP],
        sleep_status=series[Modality.SLEEP_STATUS],
        sleep_summaries=tuple(summaries),
        sync_events=tuple(events),
        outcome=OutcomeLabel(entry.deterioration_dates),
        lace_inputs=entry.lace,
    )


def load_cohort(dirname, reports=None):
    """
    Load every patient of a cohort directory.

    Args:
        dirname (str): directory containing the manifest and per-patient files
        reports (dict, optional): filled with {file name: ParseReport}

    Returns:
        list[PatientRecord]: in manifest order

    Raises:
        CohortError: manifest missing, duplicate ids, orphan files or a
            listed patient without files
    """
    manifest_path = os.path.join(dirname, MANIFEST_NAME)
    if not os.path.isfile(manifest_path):
        raise CohortError(f"no {MANIFEST_NAME} in {dirname}")
    entries = parse_manifest(manifest_path)

    ids = [entry.patient_id for entry in entries]
    duplicates = sorted({pid for pid in ids if ids.count(pid) > 1})
    if duplicates:
        raise CohortError(f"duplicate manifest entries: {', '.join(duplicates)}")

    known = set(ids)
    for filename in sorted(os.listdir(dirname)):
        parts = _split_name(filename)
        if parts is not None and parts[0] not in known:
            raise CohortError(f"file {filename} has no manifest entry", parts[0])

    records = [load_patient(dirname, entry, reports) for entry in entries]
    logger.info("loaded %d patients from %s", len(records), dirname)
    return records


def write_patient(record, dirname):
    """Write the per-patient files of one record."""
    for modality in Modality:
        path = patient_file(dirname, record.patient_id, modality.value)
        with open(path, "w", encoding="utf-8", newline="") as file:
            serialize_intraday(record.series(modality), file)
    with open(patient_file(dirname, record.patient_id, SLEEP_SUMMARY_TAG), "w",
              encoding="utf-8", newline="") as file:
        serialize_sleep_summaries(record.sleep_summaries, file)
    with open(patient_file(dirname, record.patient_id, SYNC_TAG), "w",
              encoding="utf-8", newline="") as file:
        serialize_sync_log(record.sync_events, file)


def write_cohort(records, dirname):
    """
    Write a cohort directory readable by :func:`load_cohort`.

    Returns:
        list[str]: paths of the files written, sorted
    """
    os.makedirs(dirname, exist_ok=True)
    entries = []
    for record in records:
        write_patient(record, dirname)
        entries.append(ManifestEntry(
            patient_id=record.patient_id,
            monitoring_start=record.monitoring_start,
            monitoring_end=record.monitoring_end,
            deterioration_dates=record.outcome.deterioration_dates,
            lace=record.lace_inputs,
        ))
    write_manifest(entries, os.path.join(dirname, MANIFEST_NAME))
    written = [os.path.join(dirname, MANIFEST_NAME)]
    for record in records:
        written.extend(patient_file(dirname, record.patient_id, tag) for tag in FILE_TAGS)
    return sorted(written)
