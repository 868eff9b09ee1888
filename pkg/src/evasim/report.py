"""CSV and SVG output for attack reports and sweeps."""
from __future__ import annotations

import csv
from pathlib import Path

from .errors import EvasimError
from .metrics import RECORD_COLUMNS, AttackReport, RunRecord

AGGREGATE_COLUMNS = ("dataset", "defender", "method", "runs", "initial_accuracy", "anchor_yield",
                     "surrogate_fidelity", "ear_mean", "ear_std")
ACCURACY_COLUMNS = ("dataset", "defender", "cv_accuracy")
ERROR_COLUMNS = ("dataset", "defender", "method", "run", "error")
SWEEP_COLUMNS = ("parameter", "value", "dataset", "defender", "method", "runs", "ear_mean", "ear_std")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path: Path, header, rows):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise EvasimError(f"cannot write {path}: {exc}") from exc
    return path


def _read(path: Path):
    try:
        with path.open(newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise EvasimError(f"cannot read {path}: {exc}") from exc


def write_records(records, path) -> Path:
    return _write(Path(path), RECORD_COLUMNS,
                  ([getattr(r, c) for c in RECORD_COLUMNS] for r in records))


def read_records(path) -> list[RunRecord]:
    out = []
    for row in _read(Path(path)):
        fid = row["surrogate_fidelity"]
        out.append(RunRecord(
            dataset=row["dataset"], defender=row["defender"], method=row["method"],
            run=int(row["run"]), ear=float(row["ear"]), anchor_yield=float(row["anchor_yield"]),
            surrogate_fidelity=float(fid) if fid else None,
            probes_used=int(row["probes_used"]), seed=int(row["seed"]),
        ))
    return out


def read_report(out_dir) -> AttackReport:
    out_dir = Path(out_dir)
    report = AttackReport(read_records(out_dir / "records.csv"))
    acc_path = out_dir / "accuracy.csv"
    if acc_path.exists():
        for row in _read(acc_path):
            report.initial_accuracy[(row["dataset"], row["defender"])] = float(row["cv_accuracy"])
    return report


def emit_report(report: AttackReport, out_dir, charts: bool = False) -> list[Path]:
    """Write records.csv, aggregates.csv and accuracy.csv (plus errors.csv when cells failed).

    With ``charts``, a per-run EAR line chart is drawn when there are records.
    """
    out_dir = Path(out_dir)
    paths = [
        write_records(report.records, out_dir / "records.csv"),
        _write(out_dir / "aggregates.csv", AGGREGATE_COLUMNS,
               ([getattr(a, c) for c in AGGREGATE_COLUMNS] for a in report.aggregates)),
        _write(out_dir / "accuracy.csv", ACCURACY_COLUMNS,
               ((ds, dfn, acc) for (ds, dfn), acc in sorted(report.initial_accuracy.items()))),
    ]
    if report.errors:
        paths.append(_write(out_dir / "errors.csv", ERROR_COLUMNS, report.errors))
    if charts and report.records:
        paths.append(_runs_chart(report, out_dir / "ear_runs.svg"))
    return paths


def sweep_rows(parameter, results):
    for value, report in results:
        for a in report.aggregates:
            yield (parameter, value, a.dataset, a.defender, a.method, a.runs, a.ear_mean, a.ear_std)


def emit_sweep(parameter: str, results, out_dir, charts: bool = False) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    for value, report in results:
        paths += emit_report(report, out_dir / f"{parameter}={value}")
    paths.append(_write(out_dir / "sweep.csv", SWEEP_COLUMNS, sweep_rows(parameter, results)))
    if charts and any(r.records for _, r in results):
        paths.append(sweep_chart(out_dir / "sweep.csv", out_dir / f"sweep_{parameter}.svg"))
    return paths


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "evasim"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def sweep_chart(sweep_csv, path=None) -> Path | None:
    """EAR against the swept parameter, one line per (dataset, defender, method).

    Defaults to ``sweep_<parameter>.svg`` next to the CSV; returns None for an empty sweep.
    """
    sweep_csv = Path(sweep_csv)
    rows = _read(sweep_csv)
    if not rows:
        return None
    if path is None:
        path = sweep_csv.parent / f"sweep_{rows[0]['parameter']}.svg"
    plt = _pyplot()
    series = {}
    for row in rows:
        key = f"{row['dataset']} / {row['defender']} / {row['method']}"
        series.setdefault(key, []).append((float(row["value"]), float(row["ear_mean"]), float(row["ear_std"])))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key, pts in sorted(series.items()):
        pts.sort()
        xs, ys, es = zip(*pts)
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=key)
    ax.set_xlabel(rows[0]["parameter"])
    ax.set_ylabel("EAR")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize="small")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
    return Path(path)


def _runs_chart(report, path):
    plt = _pyplot()
    groups = {}
    for r in report.records:
        groups.setdefault(" / ".join(r.key), []).append((r.run, r.ear))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key, pts in sorted(groups.items()):
        pts.sort()
        ax.plot(*zip(*pts), marker=".", label=key)
    ax.set_xlabel("run")
    ax.set_ylabel("EAR")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize="small")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
    return Path(path)
