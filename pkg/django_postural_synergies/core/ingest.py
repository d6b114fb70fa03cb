import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pandas as pd

from django_postural_synergies.core.types import Cohort, Outcome, PlateStream, Subject, TrialRecording
from django_postural_synergies.core.utils import (
    CHANNEL_COUNT, EMG_COLUMNS, PLATE_COLUMNS, Group, Handedness, canonical_direction
)
from django_postural_synergies.exceptions import IngestError
from django_postural_synergies.mixins import FLOAT_FORMAT
from django_postural_synergies.settings import synergy_settings

logger = logging.getLogger(__name__)

RATE_FIELDS = ("rate_emg", "rate_plate", "rate_marker")


def _require_columns(frame: pd.DataFrame, path: Path, columns) -> None:
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise IngestError(f"{path}: missing column(s) {', '.join(missing)}")


def _read_csv(path: Path, columns=()) -> pd.DataFrame:
    if not path.is_file():
        raise IngestError(f"Missing file: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    _require_columns(frame, path, columns)
    return frame


def _read_emg(path: Path):
    frame = _read_csv(path, ("t_s",))
    channels = [column for column in frame.columns if column.startswith("ch")]
    if len(channels) != CHANNEL_COUNT:
        raise IngestError(f"{path}: expected {CHANNEL_COUNT} EMG channels, got {len(channels)}")
    _require_columns(frame, path, EMG_COLUMNS)
    return frame["t_s"].to_numpy(dtype=float), frame[list(EMG_COLUMNS)].to_numpy(dtype=float).T


def _read_plates(path: Path):
    frame = _read_csv(path, ("t_s", "plate_id") + tuple(PLATE_COLUMNS))
    plates = []
    for plate_id, rows in frame.groupby("plate_id", sort=True):
        rows = rows.sort_values("t_s", kind="mergesort")
        plates.append(PlateStream(
            plate_id=int(plate_id),
            t=rows["t_s"].to_numpy(dtype=float),
            wrench=rows[list(PLATE_COLUMNS)].to_numpy(dtype=float)
        ))
    return tuple(plates)


def _read_pelvis(path: Path):
    frame = _read_csv(path, ("t_s", "x_mm", "y_mm"))
    return frame["t_s"].to_numpy(dtype=float), frame[["x_mm", "y_mm"]].to_numpy(dtype=float)


def _load_trial(root: Path, entry: dict, subject: dict, session: int) -> TrialRecording:
    trial_id = entry.get("trial_id")
    for name in RATE_FIELDS:
        if entry.get(name) is None:
            raise IngestError(f"Trial {trial_id}: sampling-rate field '{name}' is absent")
    valid = bool(entry.get("valid", True))
    files = entry.get("files", {})
    streams = {}
    paths = {name: root / files[name] for name in ("emg", "plates", "pelvis") if name in files}
    if valid or all(path.is_file() for path in paths.values()) and len(paths) == 3:
        if len(paths) != 3:
            raise IngestError(f"Trial {trial_id}: manifest must list emg, plates and pelvis files")
        streams["emg_t"], streams["emg"] = _read_emg(paths["emg"])
        streams["plates"] = _read_plates(paths["plates"])
        streams["pelvic_t"], streams["pelvic_xy"] = _read_pelvis(paths["pelvis"])
    outcome = entry.get("outcome", {})
    trial = TrialRecording(
        trial_id=int(trial_id),
        subject_id=subject["subject_id"],
        group=Group(subject["group"]),
        direction=canonical_direction(entry["direction"], Handedness(subject["handedness"])),
        session=session,
        rate_emg=float(entry["rate_emg"]),
        rate_plate=float(entry["rate_plate"]),
        rate_marker=float(entry["rate_marker"]),
        t_vr_onset=float(entry["t_vr_onset"]),
        t_robust_onset=float(entry["t_robust_onset"]),
        t_end=float(entry["t_end"]),
        outcome=Outcome(
            caught=bool(outcome.get("caught", False)),
            thrown=bool(outcome.get("thrown", False)),
            score=int(outcome.get("score", 0))
        ),
        valid=valid,
        **streams
    )
    if trial.valid:
        trial.validate()
    return trial


def load_cohort(manifest_path, workers: int = 1) -> Cohort:
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise IngestError(f"Missing file: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise IngestError(f"{manifest_path}: invalid JSON ({e})")
    try:
        cohort = _parse_manifest(manifest, manifest_path.parent, workers)
    except KeyError as e:
        raise IngestError(f"{manifest_path}: missing manifest key {e}") from e
    logger.info("Loaded %d trials for %d subjects from %s", len(cohort), len(cohort.subjects), manifest_path)
    return cohort


def _parse_manifest(manifest: dict, root: Path, workers: int) -> Cohort:
    expected = int(manifest.get("trials_per_session", synergy_settings.TRIALS_PER_SESSION))

    jobs = []
    for subject in manifest.get("subjects", []):
        for session in subject.get("sessions", []):
            for entry in session.get("trials", []):
                jobs.append((subject, int(session["session"]), entry))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        trials = list(executor.map(lambda job: _load_trial(root, job[2], job[0], job[1]), jobs))

    loaded = iter(trials)
    subjects = []
    for subject in manifest.get("subjects", []):
        handedness = Handedness(subject["handedness"])
        thresholds = {
            canonical_direction(label, handedness): float(value)
            for label, value in subject.get("thresholds_N", {}).items()
        }
        sessions, dropped = {}, {}
        for session in subject.get("sessions", []):
            number = int(session["session"])
            sessions[number] = [next(loaded) for _ in session.get("trials", [])]
            dropped[number] = [int(trial_id) for trial_id in session.get("dropped", [])]
            count = len(sessions[number]) + len(dropped[number])
            if count != expected:
                raise IngestError(
                    f"Subject {subject['subject_id']} session {number}: {count} trials, expected {expected}"
                )
        subjects.append(Subject(
            subject_id=str(subject["subject_id"]),
            group=Group(subject["group"]),
            handedness=handedness,
            body_weight_n=float(subject.get("body_weight_N", 0.0)),
            thresholds_n=thresholds,
            sessions=sessions,
            dropped=dropped
        ))
    origins = manifest.get("plate_origins_mm", synergy_settings.PLATE_ORIGINS)
    return Cohort(
        subjects=subjects,
        trials_per_session=expected,
        plate_origins=tuple(tuple(float(value) for value in origin) for origin in origins)
    )


def _trial_paths(subject_id: str, session: int, trial_id: int):
    stem = f"{subject_id}/s{session}/t{trial_id:03d}"
    return {
        "emg": f"{stem}_emg.csv",
        "plates": f"{stem}_plates.csv",
        "pelvis": f"{stem}_pelvis.csv"
    }


def _write_trial(root: Path, trial: TrialRecording, files: dict) -> None:
    (root / files["emg"]).parent.mkdir(parents=True, exist_ok=True)
    emg = pd.DataFrame(trial.emg.T, columns=list(EMG_COLUMNS))
    emg.insert(0, "t_s", trial.emg_t)
    emg.to_csv(root / files["emg"], index=False, float_format=FLOAT_FORMAT)
    frames = []
    for plate in trial.plates:
        frame = pd.DataFrame(plate.wrench, columns=list(PLATE_COLUMNS))
        frame.insert(0, "t_s", plate.t)
        frame["plate_id"] = plate.plate_id
        frames.append(frame)
    pd.concat(frames, ignore_index=True).to_csv(root / files["plates"], index=False, float_format=FLOAT_FORMAT)
    pelvis = pd.DataFrame({"t_s": trial.pelvic_t, "x_mm": trial.pelvic_xy[:, 0], "y_mm": trial.pelvic_xy[:, 1]})
    pelvis.to_csv(root / files["pelvis"], index=False, float_format=FLOAT_FORMAT)


def save_cohort(cohort: Cohort, directory) -> Path:
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    subjects = []
    for subject in cohort.subjects:
        data = subject.as_data()
        data["sessions"] = []
        for number in sorted(subject.sessions):
            entries = []
            for trial in subject.sessions[number]:
                entry = trial.as_data()
                if trial.has_streams:
                    entry["files"] = _trial_paths(subject.subject_id, number, trial.trial_id)
                    _write_trial(root, trial, entry["files"])
                entries.append(entry)
            data["sessions"].append({
                "session": number,
                "dropped": subject.dropped.get(number, []),
                "trials": entries
            })
        subjects.append(data)
    manifest = {
        "trials_per_session": cohort.trials_per_session,
        "plate_origins_mm": [list(origin) for origin in cohort.plate_origins],
        "subjects": subjects
    }
    path = root / "manifest.json"
    path.write_text(
        json.dumps(manifest, cls=synergy_settings.JSON_ENCODER, indent=2, sort_keys=True) + "\n",
        encoding="utf-8"
    )
    return path


