"""Report serialization: JSON documents, CSV tables, atomic file writes."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

from . import __version__
from .bench import ExperimentResult
from .ikf import IkfReport
from .kings import KingReport, rank_variables


def write_atomic(path, text) -> None:
    """Write text via a temp file and rename, so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _record_dict(rec, names):
    return {
        "vars": [names[v] for v in rec.vars],
        "count": int(rec.reproduction_count),
        "pvim_sum": float(rec.pvim_sum),
        "avg_pvim": float(rec.avg_pvim),
    }


def king_report_dict(rep: KingReport, names) -> dict:
    return {
        "king": names[rep.king],
        "weights": [float(v) for v in rep.w],
        "pvim_profile": [float(v) for v in rep.pvim_profile],
        "pvim_profile_sum": [float(v) for v in rep.pvim_profile_sum],
        "pool": [names[v] for v in rep.pool],
        "shortlists": {
            str(d): {
                metric: [_record_dict(r, names) for r in records]
                for metric, records in metrics.items()
            }
            for d, metrics in sorted(rep.shortlists.items())
        },
    }


def ikf_report_dict(report: IkfReport, names, seed=None, params=None) -> dict:
    """The full run as one JSON-ready document."""
    ranking = rank_variables(report.W)
    doc = {
        "version": __version__,
        "seed": seed,
        "params": params or {},
        "final_weights": {names[i]: float(w) for i, w in enumerate(report.W)},
        "ranking": [names[int(v)] for v in ranking],
        "kings": [king_report_dict(rep, names) for rep in report.kings],
        "inferred_orders": {
            names[k]: list(v) for k, v in sorted(report.inferred_orders.items())
        },
        "survived": [[names[int(v)] for v in s] for s in report.survived_trace],
        "shortlists": {
            str(d): {
                metric: [_record_dict(r, names) for r in records]
                for metric, records in metrics.items()
            }
            for d, metrics in sorted(report.shortlists.items())
        },
        "typed_interactions": [
            {
                "vars": [names[v] for v in t.vars],
                "order": t.order,
                "kind": t.kind,
                "dominant": [names[v] for v in t.dominant] if t.dominant else None,
                "low_confidence": t.low_confidence,
                "evidence": {
                    "forward": t.evidence.get("forward"),
                    "backward": t.evidence.get("backward"),
                    "main_pvims": {
                        names[v]: x
                        for v, x in sorted(t.evidence.get("main_pvims", {}).items())
                    },
                    "tau_main": t.evidence.get("tau_main"),
                    "tau_dir": t.evidence.get("tau_dir"),
                },
            }
            for t in report.typed_interactions
        ],
    }
    return doc


def to_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def ranking_csv(doc) -> str:
    rows = [("rank", "variable", "weight")]
    for i, name in enumerate(doc["ranking"], start=1):
        rows.append((i, name, _fmt(doc["final_weights"][name])))
    return _csv_text(rows)


def pvim_table_csv(doc) -> str:
    depth = max((len(k["pvim_profile"]) for k in doc["kings"]), default=0)
    header = ["king"]
    header += [f"pvim_d{d}" for d in range(1, depth + 1)]
    header += [f"pvim_sum_d{d}" for d in range(1, depth + 1)]
    rows = [tuple(header)]
    for k in doc["kings"]:
        rows.append(
            (k["king"],)
            + tuple(_fmt(v) for v in k["pvim_profile"])
            + tuple(_fmt(v) for v in k["pvim_profile_sum"])
        )
    return _csv_text(rows)


def paths_csv(doc) -> str:
    rows = [("king", "depth", "metric", "rank", "path", "count", "pvim_sum", "avg_pvim")]
    for k in doc["kings"]:
        for d, metrics in sorted(k["shortlists"].items(), key=lambda kv: int(kv[0])):
            for metric, records in sorted(metrics.items()):
                for i, rec in enumerate(records, start=1):
                    rows.append(
                        (
                            k["king"], d, metric, i, ">".join(rec["vars"]),
                            rec["count"], _fmt(rec["pvim_sum"]), _fmt(rec["avg_pvim"]),
                        )
                    )
    return _csv_text(rows)


def interactions_csv(doc) -> str:
    rows = [
        (
            "pattern", "order", "kind", "dominant", "low_confidence",
            "avg_pvim_forward", "avg_pvim_backward",
        )
    ]
    for t in doc["typed_interactions"]:
        rows.append(
            (
                "*".join(t["vars"]),
                t["order"],
                t["kind"],
                ">".join(t["dominant"]) if t["dominant"] else "",
                int(t["low_confidence"]),
                _fmt(t["evidence"]["forward"]),
                _fmt(t["evidence"]["backward"]),
            )
        )
    return _csv_text(rows)


REPORT_TABLES = {
    "ranking.csv": ranking_csv,
    "pvim_by_depth.csv": pvim_table_csv,
    "paths.csv": paths_csv,
    "interactions.csv": interactions_csv,
}


def write_run_outputs(doc, out_dir) -> list:
    """Write report.json plus its CSV renderings; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    path = os.path.join(out_dir, "report.json")
    write_atomic(path, to_json(doc))
    written.append(path)
    for fname, render in REPORT_TABLES.items():
        path = os.path.join(out_dir, fname)
        write_atomic(path, render(doc))
        written.append(path)
    return written


def mrs_quantiles_csv(result: ExperimentResult) -> str:
    rows = [("scenario", "method", "replications", "q5", "q25", "q50", "q75", "q95")]
    q = result.mrs_quantiles
    rows.append(
        (
            result.scenario.id, result.method, result.replications,
            q[5], q[25], q[50], q[75], q[95],
        )
    )
    return _csv_text(rows)


def recovery_csv(result: ExperimentResult, names=None) -> str:
    rows = [("scenario", "method", "target", "rate")]
    if result.irr_rates is not None:
        for target, rate in sorted(result.irr_rates.items()):
            label = "*".join(
                names[v] if names else f"x{v + 1}" for v in target
            )
            rows.append((result.scenario.id, result.method, label, _fmt(rate)))
        rows.append((result.scenario.id, result.method, "overall", _fmt(result.orr_rate)))
    return _csv_text(rows)


def proportions_csv(result: ExperimentResult, names=None) -> str:
    rows = [("scenario", "method", "size_label", "size", "variable", "proportion")]
    for label, size in zip(("d1", "d2"), result.sizes):
        for v, rate in sorted(result.ps_rates[label].items()):
            name = names[v] if names else f"x{v + 1}"
            rows.append((result.scenario.id, result.method, label, size, name, _fmt(rate)))
        rows.append(
            (result.scenario.id, result.method, label, size, "all", _fmt(result.pa_rates[label]))
        )
    return _csv_text(rows)


def bench_manifest(result: ExperimentResult, params_doc) -> dict:
    return {
        "version": __version__,
        "scenario": {
            "id": result.scenario.id,
            "n": result.scenario.n,
            "p": result.scenario.p,
            "s": result.scenario.s,
        },
        "method": result.method,
        "replications": result.replications,
        "master_seed": result.master_seed,
        "params": params_doc,
        "sizes": {"d1": result.sizes[0], "d2": result.sizes[1]},
    }


def write_bench_outputs(result: ExperimentResult, params_doc, out_dir) -> list:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for fname, text in (
        ("mrs_quantiles.csv", mrs_quantiles_csv(result)),
        ("recovery_rates.csv", recovery_csv(result)),
        ("selection_proportions.csv", proportions_csv(result)),
        ("manifest.json", to_json(bench_manifest(result, params_doc))),
    ):
        path = os.path.join(out_dir, fname)
        write_atomic(path, text)
        written.append(path)
    return written
