"""
Batch analysis: preprocess, bin, assemble, factorize, tune, match, measure sway and compare groups.

Every stage runs in memory. Artifacts are rendered only after the last stage succeeds and are written
together, so a failed run leaves no partial output behind.
"""
import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from django_postural_synergies import balance, binning
from django_postural_synergies.core.ingest import load_cohort
from django_postural_synergies.core.resample import resample_to_grid
from django_postural_synergies.core.types import MUSCLE_CHANNELS
from django_postural_synergies.core.utils import Group, Phase
from django_postural_synergies.dsp import FilterSpec, preprocess
from django_postural_synergies.encoders import BaseEncoder
from django_postural_synergies.exceptions import BinningError, PipelineError, StatsError, SynergyException
from django_postural_synergies.mixins import DataArtifact, TableArtifact
from django_postural_synergies.plots import CopTracePlot, SynergyBarsPlot, TuningPlot, VafScanPlot
from django_postural_synergies.settings import synergy_settings
from django_postural_synergies.stats import COP_METRICS, MOTOR_METRICS, compare_groups, describe, motor_performance
from django_postural_synergies.synergy.factorization import nmf_factorize
from django_postural_synergies.synergy.matching import involved_muscles, match_synergies
from django_postural_synergies.synergy.selection import per_synergy_vaf, select_n_syn
from django_postural_synergies.synergy.tuning import tuning_curves
from django_postural_synergies.synergy.utils import N_AUTO, Pooling

logger = logging.getLogger(__name__)

PHASE_BOTH = "both"
COP_TRACES_PER_GROUP = 3


def _default(name, cast=None):
    def factory():
        value = getattr(synergy_settings, name)
        return cast(value) if cast else value
    return field(default_factory=factory)


@dataclass(frozen=True)
class PipelineConfig:
    manifest: str = None
    output: str = None
    band_low: float = _default("BAND_LOW", float)
    band_high: float = _default("BAND_HIGH", float)
    envelope_cutoff: float = _default("ENVELOPE_CUTOFF", float)
    filter_order: int = _default("FILTER_ORDER", int)
    include_bk: bool = _default("INCLUDE_BK", bool)
    normalize_per_session: bool = _default("NORMALIZE_PER_SESSION", bool)
    vpr_threshold: float = _default("VPR_THRESHOLD", float)
    criterion: float = _default("VAF_CRITERION", float)
    restarts: int = _default("NMF_RESTARTS", int)
    max_iter: int = _default("NMF_MAX_ITER", int)
    tol: float = _default("NMF_TOL", float)
    workers: int = _default("NMF_WORKERS", int)
    seed: int = _default("SEED", int)
    n: str = N_AUTO
    phase: str = PHASE_BOTH
    pooling: str = _default("POOLING", str)
    per_synergy_vaf: str = _default("PER_SYNERGY_VAF", str)
    cop_reference: str = _default("COP_REFERENCE", str)
    load_threshold: float = _default("LOAD_THRESHOLD", float)

    def __post_init__(self):
        if self.phase != PHASE_BOTH:
            object.__setattr__(self, "phase", Phase(self.phase).value)
        object.__setattr__(self, "pooling", Pooling(self.pooling).value)
        if self.n != N_AUTO:
            object.__setattr__(self, "n", int(self.n))
            if self.n < 1:
                raise PipelineError("config", f"number of synergies must be positive, got {self.n}")
        self.filter_spec  # raises FilterError on an invalid band

    @property
    def filter_spec(self) -> FilterSpec:
        return FilterSpec(self.band_low, self.band_high, self.envelope_cutoff, self.filter_order)

    @property
    def phases(self) -> Tuple[Phase, ...]:
        return tuple(Phase) if self.phase == PHASE_BOTH else (Phase(self.phase),)

    @classmethod
    def field_names(cls):
        return [item.name for item in dataclasses.fields(cls)]

    @classmethod
    def from_file(cls, path, **overrides):
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise PipelineError("config", f"cannot read config file {path}: {exc}")
        unknown = set(data) - set(cls.field_names())
        if unknown:
            raise PipelineError("config", f"unknown config keys: {', '.join(sorted(unknown))}")
        data.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**data)

    def as_data(self):
        data = {name: getattr(self, name) for name in self.field_names() if name != "output"}
        data["manifest"] = str(self.manifest) if self.manifest is not None else None
        return data

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.as_data(), cls=BaseEncoder, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def provenance(self) -> dict:
        return {"config_hash": self.config_hash, "seed": self.seed}


@dataclass
class ReportBundle:
    config: PipelineConfig
    summary: dict
    artifacts: list = field(default_factory=list)
    selections: Dict[Tuple[Group, Phase], object] = field(default_factory=dict)
    synergy_sets: Dict[Tuple[Group, Phase], object] = field(default_factory=dict)
    matrices: Dict[Tuple[Group, Phase], object] = field(default_factory=dict)
    cop_metrics: Optional[pd.DataFrame] = None
    performance: Optional[pd.DataFrame] = None

    def render(self) -> Dict[str, str]:
        rendered = {}
        for artifact in self.artifacts:
            try:
                rendered[artifact.filename] = artifact.render()
            except SynergyException:
                raise
            except Exception as exc:
                raise PipelineError("report", f"cannot render {artifact.filename}: {exc}")
        return rendered

    def write(self, directory=None) -> List[Path]:
        directory = directory or self.config.output
        if directory is None:
            raise PipelineError("report", "no output directory given")
        directory = Path(directory)
        rendered = self.render()
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for filename in sorted(rendered):
            path = directory / filename
            path.write_text(rendered[filename], encoding="utf-8")
            paths.append(path)
        logger.info("Wrote %d artifacts to %s", len(paths), directory)
        return paths


def trial_envelopes(trial, spec: FilterSpec):
    """Resample a trial's EMG onto its nominal grid and run the filter chain."""
    stream = resample_to_grid(trial.emg_t, trial.emg.T, trial.rate_emg)
    return stream.t, preprocess(stream.values.T, trial.rate_emg, spec)


def preprocess_and_bin(cohort, config: PipelineConfig) -> List[binning.TrialBins]:
    spec = config.filter_spec
    trial_bins = []
    for trial in cohort.trials():
        try:
            t, envelopes = trial_envelopes(trial, spec)
        except SynergyException as exc:
            raise PipelineError("preprocess", exc, trial.trial_id)
        try:
            trial_bins.append(binning.bin_trial(t, envelopes, trial.t_robust_onset, trial.t_end, trial=trial,
                                                threshold=config.vpr_threshold))
        except SynergyException as exc:
            raise PipelineError("bin", exc, trial.trial_id)
    return trial_bins


def _factorize(matrix, config: PipelineConfig):
    kwargs = {"restarts": config.restarts, "max_iter": config.max_iter, "tol": config.tol,
              "workers": config.workers}
    selection = select_n_syn(matrix, criterion=config.criterion, seed=config.seed, **kwargs)
    if config.n == N_AUTO:
        return selection, selection.selected
    if config.n in selection.sets:
        return selection, selection.sets[config.n]
    chosen = nmf_factorize(matrix, config.n, seed=config.seed, **kwargs)
    return selection, dataclasses.replace(chosen, vaf_scan=selection.vaf_scan, criterion_met=selection.criterion_met)


def _synergy_tables(synergy_set):
    W = pd.DataFrame(synergy_set.W, columns=[f"W{index + 1}" for index in range(synergy_set.n_syn)])
    W.insert(0, "side", [channel.side.value for channel in MUSCLE_CHANNELS])
    W.insert(0, "muscle", [channel.muscle.value for channel in MUSCLE_CHANNELS])
    columns = [f"{name.value}_{direction.value}" for name, direction in synergy_set.column_labels]
    C = pd.DataFrame(synergy_set.C, columns=columns)
    C.insert(0, "synergy", [f"W{index + 1}" for index in range(synergy_set.n_syn)])
    return W, C


def _per_subject_selection(trial_bins, group, phase, config):
    n_values = {}
    for subject_id in sorted({item.subject_id for item in trial_bins if item.group == group}):
        items = [item for item in trial_bins if item.subject_id == subject_id]
        matrix = binning.assemble_matrix(items, phase, config.include_bk, group)
        selection = select_n_syn(matrix, criterion=config.criterion, seed=config.seed, restarts=config.restarts,
                                 max_iter=config.max_iter, tol=config.tol, workers=config.workers)
        n_values[subject_id] = selection.n_syn
    values = list(n_values.values())
    return {
        "n_syn": n_values,
        "median": float(np.median(values)),
        "min": int(min(values)),
        "max": int(max(values))
    }


def _cop_tables(cohort, config: PipelineConfig):
    trial_rows, session_rows, traces = [], [], {}
    for subject in cohort.subjects:
        for session in sorted(subject.sessions):
            session_metrics = []
            for trial in subject.sessions[session]:
                if not trial.valid:
                    continue
                try:
                    trace = balance.trial_cop(trial, cohort.plate_origins, config.load_threshold)
                    metrics = balance.cop_metrics(trace, config.cop_reference)
                except SynergyException as exc:
                    raise PipelineError("cop", exc, trial.trial_id)
                session_metrics.append(metrics)
                trial_rows.append(metrics.as_row(subject.subject_id, subject.group,
                                                 f"s{session}t{trial.trial_id:03d}"))
                group_traces = traces.setdefault(subject.group, [])
                if len(group_traces) < COP_TRACES_PER_GROUP:
                    group_traces.append((f"{subject.subject_id} s{session} t{trial.trial_id}", trace))
            if session_metrics:
                aggregate = balance.session_metrics(session_metrics)
                session_rows.append(dict(aggregate.as_row(subject.subject_id, subject.group, None),
                                         session=session, trials=len(session_metrics)))
    trial_table = pd.DataFrame(trial_rows, columns=list(balance.METRICS_COLUMNS))
    session_columns = ["subject", "group", "session", "trials"] + list(balance.METRICS_COLUMNS[3:])
    session_table = pd.DataFrame(session_rows, columns=session_columns)
    return trial_table, session_table, traces


def _subject_cop_table(session_table: pd.DataFrame) -> pd.DataFrame:
    """One row per subject: excursion summed over sessions, everything else averaged."""
    if session_table.empty:
        return session_table
    aggregations = {metric: ("sum" if metric == "total_excursion_mm" else "mean") for metric in COP_METRICS}
    return session_table.groupby(["subject", "group"], sort=True).agg(aggregations).reset_index()


def _group_statistics(performance: pd.DataFrame, subject_cop: pd.DataFrame, groups) -> dict:
    results = {}
    if len(groups) != 2:
        logger.warning("Group statistics need exactly two groups, found %d; skipped", len(groups))
        return results
    for table, metrics in ((performance, MOTOR_METRICS), (subject_cop, COP_METRICS)):
        for metric in metrics:
            try:
                results[metric] = compare_groups(table, metric, groups).as_data()
            except StatsError as exc:
                logger.warning("Skipped group statistics for '%s': %s", metric, exc)
    return results


def load(config: PipelineConfig):
    if config.manifest is None:
        raise PipelineError("ingest", "no manifest given")
    try:
        cohort = load_cohort(config.manifest)
    except SynergyException as exc:
        raise PipelineError("ingest", exc)
    return cohort


def analysed_groups(cohort) -> List[Group]:
    groups = [group for group in cohort.groups() if any(True for _ in cohort.trials(group))]
    if not groups:
        raise PipelineError("ingest", "cohort has no valid trials")
    return groups


def binned_stage(bundle: ReportBundle, cohort) -> List[binning.TrialBins]:
    config = bundle.config
    trial_bins = preprocess_and_bin(cohort, config)
    try:
        trial_bins = binning.normalize_trials(trial_bins, per_session=config.normalize_per_session)
        rows = [row for group in analysed_groups(cohort) for phase in config.phases
                for row in binning.binned_rows([item for item in trial_bins if item.group == group], phase,
                                               config.include_bk)]
    except BinningError as exc:
        raise PipelineError("normalize", exc)
    frame = pd.DataFrame(rows, columns=list(binning.BINNED_COLUMNS))
    bundle.artifacts.append(TableArtifact("binned", frame, bundle.config.provenance))
    return trial_bins


def synergy_stage(bundle: ReportBundle, trial_bins, groups) -> None:
    config = bundle.config
    provenance = config.provenance
    artifacts = bundle.artifacts
    scan_rows, synergy_summary, per_subject = [], {}, {}
    for group in groups:
        group_bins = [item for item in trial_bins if item.group == group]
        for phase in config.phases:
            key = f"{group.value}_{phase.value}"
            try:
                matrix = binning.assemble_matrix(group_bins, phase, config.include_bk, group)
            except SynergyException as exc:
                raise PipelineError("assemble", f"{key}: {exc}")
            try:
                selection, synergy_set = _factorize(matrix, config)
                contributions = per_synergy_vaf(matrix, synergy_set, config.per_synergy_vaf)
                tuning = tuning_curves(synergy_set)
                involved = involved_muscles(synergy_set)
                if config.pooling == Pooling.PER_SUBJECT.value:
                    per_subject[key] = _per_subject_selection(group_bins, group, phase, config)
            except SynergyException as exc:
                raise PipelineError("factorize", f"{key}: {exc}")
            bundle.matrices[(group, phase)] = matrix
            bundle.selections[(group, phase)] = selection
            bundle.synergy_sets[(group, phase)] = synergy_set
            scan_rows.extend({"group": group.value, "phase": phase.value, "n": n, "vaf": value}
                             for n, value in sorted(selection.vaf_scan.items()))
            data = synergy_set.as_data()
            data.update({
                "group": group,
                "phase": phase,
                "per_synergy_vaf": contributions,
                "per_synergy_vaf_mode": config.per_synergy_vaf,
                "involved_muscles": [[channel.label for channel in muscles] for muscles in involved],
                "synergy_complexity": [len(muscles) for muscles in involved],
                "tuning": tuning.as_data(),
                "trial_counts": matrix.trial_counts,
            })
            artifacts.append(DataArtifact(f"synergies_{key}", data, provenance))
            W, C = _synergy_tables(synergy_set)
            artifacts.append(TableArtifact(f"W_{key}", W, provenance))
            artifacts.append(TableArtifact(f"C_{key}", C, provenance))
            artifacts.append(SynergyBarsPlot(f"synergies_{key}", synergy_set, contributions, provenance))
            artifacts.append(TuningPlot(f"tuning_{key}", tuning, provenance))
            artifacts.append(VafScanPlot(f"vaf_scan_{key}", selection.vaf_scan, config.criterion, provenance))
            synergy_summary[key] = {
                "n_syn": synergy_set.n_syn,
                "selected_n_syn": selection.n_syn,
                "criterion_met": selection.criterion_met,
                "vaf_total": synergy_set.vaf_total,
            }

    matching = {}
    for phase in config.phases:
        if (Group.FF, phase) in bundle.synergy_sets and (Group.NOFF, phase) in bundle.synergy_sets:
            pairing = match_synergies(bundle.synergy_sets[(Group.FF, phase)], bundle.synergy_sets[(Group.NOFF, phase)])
            matching[f"FF_vs_NoFF_{phase.value}"] = pairing.as_data()
    if len(config.phases) == 2:
        for group in groups:
            pairing = match_synergies(bundle.synergy_sets[(group, Phase.APR)], bundle.synergy_sets[(group, Phase.VPR)])
            matching[f"APR_vs_VPR_{group.value}"] = pairing.as_data()

    artifacts.append(TableArtifact("vaf_scan", pd.DataFrame(scan_rows, columns=["group", "phase", "n", "vaf"]),
                                   provenance))
    artifacts.append(DataArtifact("matching", matching, provenance))
    bundle.summary["synergies"] = synergy_summary
    bundle.summary["per_subject"] = per_subject


def cop_stage(bundle: ReportBundle, cohort) -> pd.DataFrame:
    """Per-trial and per-session sway tables plus trace plots; returns the per-subject table."""
    provenance = bundle.config.provenance
    trial_cop, session_cop, traces = _cop_tables(cohort, bundle.config)
    bundle.cop_metrics = trial_cop
    bundle.artifacts.append(TableArtifact("cop_metrics", trial_cop, provenance))
    bundle.artifacts.append(TableArtifact("cop_sessions", session_cop, provenance))
    for group, group_traces in sorted(traces.items()):
        bundle.artifacts.append(CopTracePlot(f"cop_traces_{group.value}", group_traces, provenance))
    return _subject_cop_table(session_cop)


def stats_stage(bundle: ReportBundle, cohort, subject_cop: pd.DataFrame, groups) -> None:
    provenance = bundle.config.provenance
    performance = motor_performance(cohort)
    bundle.performance = performance
    bundle.artifacts.append(TableArtifact("performance", performance, provenance))
    bundle.artifacts.append(DataArtifact("stats", _group_statistics(performance, subject_cop, groups), provenance))
    bundle.summary["motor_summary"] = {
        group.value: {metric: describe(performance.loc[performance["group"] == group.value, metric])
                      for metric in ("catches", "throws", "score_total")}
        for group in groups
    }


def run_pipeline(config: PipelineConfig, cohort=None) -> ReportBundle:
    """Run every stage and return the report bundle; artifacts are written when the config names an output."""
    cohort = load(config) if cohort is None else cohort
    groups = analysed_groups(cohort)
    bundle = ReportBundle(config=config, summary={
        "config": config.as_data(),
        "groups": [group.value for group in groups],
        "trials": {group.value: sum(1 for _ in cohort.trials(group)) for group in groups},
    })
    trial_bins = binned_stage(bundle, cohort)
    synergy_stage(bundle, trial_bins, groups)
    subject_cop = cop_stage(bundle, cohort)
    stats_stage(bundle, cohort, subject_cop, groups)
    bundle.summary["artifacts"] = sorted(artifact.filename for artifact in bundle.artifacts) + ["report.json"]
    bundle.artifacts.append(DataArtifact("report", bundle.summary, config.provenance))
    if config.output:
        bundle.write()
    return bundle
