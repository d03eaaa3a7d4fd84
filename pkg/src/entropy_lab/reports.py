"""CSV writers with a manifest line and deterministic formatting.

Every artifact starts with `# manifest: experiment=<name> config_sha=<hex>
tool_version=<semver>`; bodies are %.17g-formatted so identical runs are
byte-identical.
"""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from . import __version__

FMT = "%.17g"


def config_sha(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def manifest_line(experiment: str, sha: str) -> str:
    return f"# manifest: experiment={experiment} config_sha={sha} tool_version={__version__}"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FMT % float(v)


def write_csv(path, header, rows, experiment: str, sha: str,
              extra_comments=()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [manifest_line(experiment, sha)]
    lines.extend(extra_comments)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def trajectory_rows(traj):
    """Row-major (snapshot, then cell) t,x,value rows."""
    x = traj.grid.cell_centers
    for snap in traj.snapshots:
        for xi, vi in zip(x, snap.values):
            yield (snap.time, xi, vi)


def euler_trajectory_rows(states):
    for st in states:
        u = st.velocity
        for xi, ri, ui in zip(st.grid.cell_centers, st.rho, u):
            yield (st.time, xi, ri, ui)


def residual_rows(k_values, residual_table, tolerance):
    """(k, phi_index, residual, tolerance, pass) rows; pass means the
    residual clears -tolerance."""
    for k, residuals in zip(k_values, residual_table):
        for idx, r in enumerate(residuals):
            yield (k, idx, r, tolerance, r >= -tolerance)


def measure_rows(measure):
    edges = measure.bin_edges
    for it in range(measure.n_t_coarse):
        for ix in range(measure.n_x_coarse):
            for b in range(len(edges) - 1):
                yield (ix, it, edges[b], edges[b + 1], measure.weights[it, ix, b])


def measure_sidecar_rows(measure):
    for it in range(measure.n_t_coarse):
        for ix in range(measure.n_x_coarse):
            wp = measure.angle_plus[it, ix]
            wm = measure.angle_minus[it, ix]
            yield (ix, it, measure.m1[it, ix],
                   0.0 if np.isnan(wp) else wp,
                   0.0 if np.isnan(wm) else wm)
