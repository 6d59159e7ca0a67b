"""
Synthetic cohort generator.

Produces per-minute heart rate, step counts and sleep status for a cohort of
monitored patients, together with sleep summaries, sync logs, outcomes and
LACE inputs, so that every workflow can run without clinical data.

Deteriorated patients carry a pre-event signal scaled by
``SynthConfig.anomaly_signal_strength`` over the three days before each
deterioration date: elevated heart rate, fewer steps and fragmented sleep.
On every other day they follow the same distribution as the other patients,
unless the ``chronic_signal_ratio`` ablation is switched on. LACE inputs are
drawn independently of the outcome.
"""

import logging
from datetime import timedelta

import numpy as np
from scipy.signal import lfilter

from deteriorate.errors import ConfigError
from deteriorate.Ingest.records import (
    MINUTES_PER_DAY,
    BatteryLevel,
    Modality,
    OutcomeLabel,
    PatientRecord,
    SampleSeries,
    SleepEpisodeSummary,
    SyncEvent,
    day_start_minute,
    from_epoch_minutes,
)
from deteriorate.Models.lace import LaceInputs
from deteriorate.settings import SynthConfig

logger = logging.getLogger(__name__)

PRE_EVENT_DAYS = 3
CONTAMINATION_INTENSITY = 2.0
EARLIEST_EVENT_DAY = 8

# schedule, minutes after midnight
WAKE_EARLIEST = 7 * 60
BED_EARLIEST = 21 * 60 + 30
SCHEDULE_JITTER = 90

# per unit of signal intensity
HR_SHIFT = 8.0
STEP_RATE_DECAY = 0.5
FRAGMENTATION_GAIN = 2.0

BATTERY_LEVELS = ((0.6, BatteryLevel.HIGH), (0.3, BatteryLevel.MEDIUM), (0.1, BatteryLevel.LOW))


def _count_runs(mask):
    """Number of maximal True runs in a boolean array."""
    padded = np.concatenate(([False], mask))
    return int(np.count_nonzero(~padded[:-1] & padded[1:]))


class PatientSimulator:
    """
    Simulates one patient. All draws come from one generator seeded from
    the cohort seed sequence, in a fixed order.
    """

    def __init__(self, config, index, seed, deteriorated, has_sleep):
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.patient_id = f"P{index + 1:03d}"
        self.n_days = config.days_per_patient
        self.n_minutes = self.n_days * MINUTES_PER_DAY
        self.first_day = config.first_day
        self.origin = day_start_minute(self.first_day)
        self.deteriorated = deteriorated
        self.has_sleep = has_sleep

        self.event_days = self._event_days() if deteriorated else []
        self.intensity = self._daily_intensity()
        self.wake = WAKE_EARLIEST + self.rng.integers(0, SCHEDULE_JITTER + 1, self.n_days)
        self.bed = BED_EARLIEST + self.rng.integers(0, SCHEDULE_JITTER + 1, self.n_days)

    def _event_days(self):
        low = min(EARLIEST_EVENT_DAY, self.n_days - 1)
        days = [int(self.rng.integers(low, self.n_days))]
        if self.rng.random() < 0.5:
            second = int(self.rng.integers(low, self.n_days))
            if abs(second - days[0]) > PRE_EVENT_DAYS:
                days.append(second)
        return sorted(days)

    def _daily_intensity(self):
        strength = self.config.anomaly_signal_strength
        pre_event = np.zeros(self.n_days)
        for event in self.event_days:
            for offset in range(1, PRE_EVENT_DAYS + 1):
                if event - offset >= 0:
                    ramp = strength * (PRE_EVENT_DAYS + 1 - offset) / PRE_EVENT_DAYS
                    pre_event[event - offset] = max(pre_event[event - offset], ramp)
        intensity = pre_event.copy()
        if self.deteriorated:
            intensity += strength * self.config.chronic_signal_ratio
        # outlier days that keep a normal label
        contaminated = (self.rng.random(self.n_days) < self.config.contamination_rate) & (pre_event == 0)
        intensity[contaminated] += CONTAMINATION_INTENSITY
        return intensity

    def _effect(self, modality):
        if modality.value in self.config.signal_modalities:
            return self.intensity
        return np.zeros(self.n_days)

    def _keep_mask(self, modality):
        rate = self.config.missingness.get(modality.value, 0.0)
        return self.rng.random(self.n_minutes) >= rate

    def _awake_mask(self):
        minute = np.arange(self.n_minutes) % MINUTES_PER_DAY
        day = np.arange(self.n_minutes) // MINUTES_PER_DAY
        return (minute >= self.wake[day]) & (minute < self.bed[day])

    def steps(self):
        """Alternating active and sedentary bouts between wake and bed time."""
        steps = np.zeros(self.n_minutes)
        effect = self._effect(Modality.STEP)
        activity = self.rng.uniform(0.7, 1.3)
        for day in range(self.n_days):
            decay = np.exp(-STEP_RATE_DECAY * effect[day])
            active_mean = max(1.0, 6.0 * decay)
            sedentary_mean = 20.0 * (1.0 + STEP_RATE_DECAY * effect[day])
            offset = day * MINUTES_PER_DAY
            minute, active = int(self.wake[day]), True
            while minute < self.bed[day]:
                mean = active_mean if active else sedentary_mean
                end = min(minute + int(self.rng.geometric(1.0 / mean)), int(self.bed[day]))
                if active:
                    counts = self.rng.poisson(60.0 * activity * decay, end - minute)
                    steps[offset + minute:offset + end] = np.maximum(counts, 1)
                minute, active = end, not active
        return steps

    def heart_rate(self, steps):
        """Resting level plus activity coupling, sleep dip and AR(1) noise."""
        rest = self.rng.uniform(58.0, 78.0)
        minute = np.arange(self.n_minutes) % MINUTES_PER_DAY
        diurnal = 4.0 * np.sin(2.0 * np.pi * (minute - 8 * 60) / MINUTES_PER_DAY)
        noise = lfilter([1.0], [1.0, -0.9], self.rng.normal(0.0, 2.0, self.n_minutes))
        shift = HR_SHIFT * np.repeat(self._effect(Modality.HEART_RATE), MINUTES_PER_DAY)
        asleep = ~self._awake_mask()
        rate = rest + diurnal + 0.25 * np.minimum(steps, 100) - 6.0 * asleep + shift + noise
        return np.clip(np.rint(rate), 35, 220)

    def _episode(self, length, intensity):
        """Sleep-status levels of one episode and its summary counts."""
        lead = int(min(self.rng.integers(5, 31), length // 4))
        trail = int(min(self.rng.integers(0, 16), length // 4))
        middle = np.ones(length - lead - trail)
        scale = 1.0 + FRAGMENTATION_GAIN * intensity
        for level, rate, mean in ((2, 6.0, 3.0), (3, 2.0, 5.0)):
            count = self.rng.poisson(rate * scale)
            starts = self.rng.integers(1, max(2, middle.size - 1), count)
            lengths = self.rng.geometric(1.0 / mean, count)
            for start, run in zip(starts, lengths):
                middle[start:min(start + run, middle.size - 1)] = level
        if middle.size:
            middle[0] = middle[-1] = 1
        levels = np.concatenate((np.full(lead, 3.0), middle, np.full(trail, 3.0)))
        counts = {
            "time_in_bed": int(length),
            "minutes_to_fall_asleep": lead,
            "minutes_asleep": int(np.count_nonzero(middle != 3)),
            "minutes_awake": int(np.count_nonzero(middle == 3)),
            "minutes_after_wakeup": trail,
            "awake_count": _count_runs(middle == 3),
            "restless_count": _count_runs(middle == 2),
            "restless_duration": int(np.count_nonzero(middle == 2)),
        }
        return levels, counts

    def sleep(self):
        """
        Sleep status for every minute (0 outside episodes) and one summary per
        complete night, dated on the wake-up day. Dropped nights are missing.
        """
        if not self.has_sleep:
            return np.full(self.n_minutes, np.nan), []
        status = np.zeros(self.n_minutes)
        status[:self.wake[0]] = 1
        effect = self._effect(Modality.SLEEP_STATUS)
        dropped = self.rng.random(self.n_days) < self.config.missingness.get("sleep_status", 0.0)
        summaries = []
        for day in range(self.n_days):
            start = day * MINUTES_PER_DAY + int(self.bed[day])
            if day + 1 < self.n_days:
                end = (day + 1) * MINUTES_PER_DAY + int(self.wake[day + 1])
            else:
                end = self.n_minutes
            levels, counts = self._episode(end - start, effect[day])
            if dropped[day]:
                status[start:end] = np.nan
                continue
            status[start:end] = levels
            if day + 1 < self.n_days:
                summaries.append(SleepEpisodeSummary(
                    episode_date=self.first_day + timedelta(days=day + 1), **counts))
        return status, summaries

    def sync_events(self):
        """One sync per cadence tick with heavy-tailed delivery delay."""
        cadence = self.config.sync_cadence
        ticks = self.origin + np.arange(cadence, self.n_minutes + 1, cadence)
        captures = ticks - self.rng.integers(0, cadence, ticks.size)
        delays = np.zeros(ticks.size)
        if self.config.delay_noise_scale > 0:
            delays = np.rint(self.rng.pareto(2.5, ticks.size) * self.config.delay_noise_scale)
        arrivals = ticks + delays.astype(np.int64)

        drain = cadence / (MINUTES_PER_DAY * self.rng.uniform(3.0, 5.0))
        recharge_at = self.rng.uniform(0.02, 0.35)
        charge = self.rng.uniform(0.5, 1.0)
        events = []
        for capture, arrival in zip(captures, arrivals):
            charge -= drain
            if charge <= recharge_at:
                charge = 1.0
            level = next((lvl for bound, lvl in BATTERY_LEVELS if charge > bound), BatteryLevel.EMPTY)
            events.append(SyncEvent(from_epoch_minutes(capture), from_epoch_minutes(arrival), level))
        return events

    def lace_inputs(self):
        return LaceInputs(
            length_of_stay_days=float(self.rng.integers(1, 15)),
            acute_admission=bool(self.rng.random() < 0.7),
            charlson_index=int(self.rng.integers(0, 6)),
            ed_visits_6mo=int(self.rng.integers(0, 5)),
        )

    def _series(self, modality, values):
        keep = ~np.isnan(values)
        # sleep data drops out per night, the other streams per minute
        if modality is not Modality.SLEEP_STATUS:
            keep &= self._keep_mask(modality)
        minutes = self.origin + np.arange(self.n_minutes, dtype=np.int64)
        return SampleSeries(modality, minutes[keep], values[keep])

    def build(self):
        steps = self.steps()
        heart_rate = self.heart_rate(steps)
        status, summaries = self.sleep()
        return PatientRecord(
            patient_id=self.patient_id,
            monitoring_start=self.first_day,
            monitoring_end=self.first_day + timedelta(days=self.n_days - 1),
            heart_rate=self._series(Modality.HEART_RATE, heart_rate),
            steps=self._series(Modality.STEP, steps),
            sleep_status=self._series(Modality.SLEEP_STATUS, status),
            sleep_summaries=tuple(summaries),
            sync_events=tuple(self.sync_events()),
            outcome=OutcomeLabel(tuple(self.first_day + timedelta(days=d)
                                       for d in self.event_days)),
            lace_inputs=self.lace_inputs(),
        )


def generate_synthetic_cohort(config=None):
    """
    Generate a synthetic cohort.

    Args:
        config (SynthConfig, optional): generator parameters; defaults if None

    Returns:
        list[PatientRecord]: deterministic given ``config.rng_seed``
    """
    config = config if config is not None else SynthConfig()
    if not isinstance(config, SynthConfig):
        raise ConfigError("generate_synthetic_cohort expects a SynthConfig")
    cohort_seed, *patient_seeds = np.random.SeedSequence(config.rng_seed).spawn(
        config.n_patients + 1)
    rng = np.random.default_rng(cohort_seed)
    deteriorated = set(rng.permutation(config.n_patients)[:config.n_deteriorated].tolist())
    without_sleep = set(rng.permutation(config.n_patients)[:config.n_without_sleep].tolist())

    cohort = [
        PatientSimulator(config, index, seed, index in deteriorated,
                         index not in without_sleep).build()
        for index, seed in enumerate(patient_seeds)
    ]
    logger.info("generated %d synthetic patients, %d deteriorated, seed %d",
                len(cohort), len(deteriorated), config.rng_seed)
    return cohort
