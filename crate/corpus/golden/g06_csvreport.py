import csv
from pathlib import Path
from statistics import mean


def read_rows(path):
    p = Path(path)
    with p.open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    return rows


def group_by(rows, column):
    groups = {}
    for row in rows:
        k = row[column]
        groups.setdefault(k, []).append(row)
    return groups


def summarize(groups, metric):
    summary = {}
    for name, members in sorted(groups.items()):
        values = [float(r[metric]) for r in members]
        summary[name] = {"n": len(values), "mean": mean(values)}
    return summary


def write_report(summary, out_path):
    target = Path(out_path)
    lines = [f"{k}\t{v['n']}\t{v['mean']:.2f}" for k, v in summary.items()]
    target.write_text("\n".join(lines))
    return target
