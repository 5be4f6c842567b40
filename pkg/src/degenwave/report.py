"""Report serialization: delimited tables plus one key=value summary per run.

Everything written here is deterministic for a fixed config: floats are
rendered with repr (shortest round-trip form), rows follow grid/snapshot
order, and nothing time- or host-dependent enters the main report.  Wall
times go to a separate timing sidecar that is excluded from the
byte-identity guarantee.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def run_id(config_text: str) -> str:
    return hashlib.sha256(config_text.encode()).hexdigest()[:12]


def kv_text(sections: dict) -> str:
    """Sections of key = value pairs; insertion order is preserved."""
    lines = []
    for section, pairs in sections.items():
        lines.append(f"[{section}]")
        for key, value in pairs.items():
            lines.append(f"{key} = {fmt(value)}")
        lines.append("")
    return "\n".join(lines)


def write_kv(path, sections: dict) -> None:
    Path(path).write_text(kv_text(sections))


def read_kv(path) -> dict:
    sections: dict = {}
    current = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = {}
            continue
        key, _, value = line.partition("=")
        if current is None:
            raise ValueError(f"{path}: key outside any section: {line!r}")
        sections[current][key.strip()] = value.strip()
    return sections


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_snapshots(path, traj, p) -> None:
    """Long-format trajectory dump, one row per (snapshot, node)."""
    x = traj.grid.x

    def rows():
        for i, t in enumerate(traj.times):
            f = traj.snapshots[i]
            c = traj.conserved(i, p)
            for j in range(x.size):
                yield (t, x[j], f.w[j], f.z[j], c.v[j], c.u[j])

    write_csv(path, ["t", "x", "w", "z", "v", "u"], rows())


def write_monitors(path, verdicts) -> None:
    write_csv(
        path,
        ["monitor", "passed", "hard", "max_violation", "tolerance", "t", "x", "detail"],
        [(v.name, v.passed, v.hard, v.max_violation, v.tolerance, v.t, v.x, v.detail)
         for v in verdicts],
    )


def write_f_series(path, rep) -> None:
    write_csv(
        path,
        ["t", "f", "predicted", "f1", "f2", "f3", "margin"],
        [(rep.times[i], rep.f[i], rep.predicted_slope * rep.times[i],
          rep.f1[i], rep.f2[i], rep.f3[i], rep.margin[i])
         for i in range(rep.times.size)],
    )


def write_residuals(path, rows) -> None:
    write_csv(path, ["test_fn", "r1", "r2"], rows)


def monitor_summary(verdicts) -> dict:
    out = {}
    for v in verdicts:
        out[v.name] = f"{'pass' if v.passed else 'FAIL'} "
        out[v.name] += f"(worst {fmt(v.max_violation)}, tol {fmt(v.tolerance)})"
    out["all_passed"] = all(v.passed for v in verdicts)
    return out
