"""CSV/JSON serialization of experiment logs and comparison reports.

Floats are written with ``repr`` (shortest round-trippable decimal), so the
same log always produces byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any

from .errors import GResilienceError
from .fsm import EpisodeTimeline
from .harness import ComparisonReport, EpisodeSummary, ExperimentLog, IterationRecord, SummaryDelta
from .simulator import Disruption, DisruptionKind

CSV_COLUMNS = (
    "technique",
    "iteration",
    "state_before",
    "state_after",
    "action_id",
    "action_kind",
    "perf_start",
    "perf_end",
    "e_t_est",
    "e_co2_est",
    "h_est",
    "epsilon",
    "p",
    "q",
    "rounds",
    "w_t",
    "w_h",
    "w_co2",
    "score_selected",
    "clock_start_s",
    "clock_end_s",
    "co2_cum_g",
    "human_cum",
)

REPORT_CSV_COLUMNS = (
    "row",
    "label",
    "other",
    "iterations",
    "elapsed_s",
    "co2_g",
    "human_interactions",
    "recovered",
    "agreement",
)


class EmitError(GResilienceError, OSError):
    pass


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def log_to_csv(lg: ExperimentLog) -> str:
    return _csv_text(CSV_COLUMNS, (asdict(r) for r in lg.records))


def report_to_csv(rep: ComparisonReport) -> str:
    rows = []
    for label, s in zip(rep.labels, rep.summaries):
        rows.append(
            dict(
                row="summary",
                label=label,
                iterations=s.iterations_to_recover,
                elapsed_s=s.total_elapsed_s,
                co2_g=s.total_co2_g,
                human_interactions=s.total_human,
                recovered=s.recovered,
            )
        )
    for d in rep.deltas:
        rows.append(
            dict(
                row="delta",
                label=d.first,
                other=d.second,
                iterations=d.iterations,
                elapsed_s=d.elapsed_s,
                co2_g=d.co2_g,
                human_interactions=d.human_interactions,
                agreement=d.agreement,
            )
        )
    return _csv_text(REPORT_CSV_COLUMNS, rows)


def _disruption_dict(d: Disruption) -> dict:
    return {"time": d.time, "kind": d.kind.value, "perf_drop": d.perf_drop, "epsilon_drop": d.epsilon_drop}


def log_to_dict(lg: ExperimentLog) -> dict:
    return {
        "scenario": lg.scenario,
        "seed": lg.seed,
        "technique": lg.technique,
        "records": [asdict(r) for r in lg.records],
        "summary": asdict(lg.summary),
        "final_state": lg.final_state,
        "deferred_disruptions": [_disruption_dict(d) for d in lg.deferred_disruptions],
    }


def _summary_from_dict(d: dict) -> EpisodeSummary:
    return EpisodeSummary(**{**d, "timeline": EpisodeTimeline(**d["timeline"])})


def log_from_dict(d: dict) -> ExperimentLog:
    known = {f.name for f in fields(IterationRecord)}
    records = []
    for raw in d["records"]:
        unknown = set(raw) - known
        if unknown:
            raise GResilienceError(f"unknown record fields: {sorted(unknown)}")
        records.append(IterationRecord(**raw))
    return ExperimentLog(
        scenario=d["scenario"],
        seed=d["seed"],
        technique=d["technique"],
        records=tuple(records),
        summary=_summary_from_dict(d["summary"]),
        final_state=d["final_state"],
        deferred_disruptions=tuple(
            Disruption(x["time"], DisruptionKind(x["kind"]), x["perf_drop"], x["epsilon_drop"])
            for x in d.get("deferred_disruptions", [])
        ),
    )


def report_to_dict(rep: ComparisonReport) -> dict:
    return {
        "scenario": rep.scenario,
        "seed": rep.seed,
        "summaries": {label: asdict(s) for label, s in zip(rep.labels, rep.summaries)},
        "deltas": [asdict(d) for d in rep.deltas],
    }


def report_from_dict(d: dict) -> ComparisonReport:
    labels = tuple(d["summaries"])
    return ComparisonReport(
        scenario=d["scenario"],
        seed=d["seed"],
        labels=labels,
        summaries=tuple(_summary_from_dict(d["summaries"][k]) for k in labels),
        deltas=tuple(SummaryDelta(**x) for x in d["deltas"]),
    )


def to_json(obj: ExperimentLog | ComparisonReport) -> str:
    data = log_to_dict(obj) if isinstance(obj, ExperimentLog) else report_to_dict(obj)
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def to_csv(obj: ExperimentLog | ComparisonReport) -> str:
    return log_to_csv(obj) if isinstance(obj, ExperimentLog) else report_to_csv(obj)


def emit(obj: ExperimentLog | ComparisonReport, format: str, destination: str | Path) -> Path:
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    text = to_csv(obj) if format == "csv" else to_json(obj)
    path = Path(destination)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc}") from exc
    return path


def load_log(path: str | Path) -> ExperimentLog:
    path = Path(path)
    try:
        return log_from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise GResilienceError(f"cannot load experiment log {path}: {exc}") from exc
