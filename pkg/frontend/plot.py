#!/usr/bin/env python3
"""Render standard figures from the laboratory's CSV artifacts.

    plot.py <kind> --in <csv...> --out <img> [--deterministic]

Kinds and the column contracts they validate against:
    ladder          h,error                 log-log with fitted order
    residual-bar    k,phi_index,residual,tolerance,pass
    decay-semilog   t,H[,m,sigma_hat_running]   semilog with fitted slope
    field-snapshot  t,x,value               final-time profile

The scripts never recompute physics; everything plotted comes from the
CSVs. Exit codes: 2 schema mismatch, 3 empty data.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

EXIT_SCHEMA = 2
EXIT_EMPTY = 3

SCHEMAS = {
    "ladder": ("h", "error"),
    "residual-bar": ("k", "phi_index", "residual", "tolerance", "pass"),
    "decay-semilog": ("t", "H"),
    "field-snapshot": ("t", "x", "value"),
}

FIGSIZE = (6.4, 4.8)
DPI = 100


class SchemaError(Exception):
    pass


class EmptyDataError(Exception):
    pass


@dataclass
class PlotJob:
    kind: str
    inputs: list
    output: Path
    deterministic: bool = False
    title: str | None = None


@dataclass
class RenderResult:
    output: Path
    fits: dict = field(default_factory=dict)


def read_table(path, kind):
    """Parse one CSV, skipping comment lines, and validate its header."""
    required = SCHEMAS[kind]
    lines = Path(path).read_text().splitlines()
    rows = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise EmptyDataError(f"{path}: no content")
    header = [h.strip() for h in rows[0].split(",")]
    for col in required:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r} for kind {kind!r}")
    data = []
    for ln in rows[1:]:
        data.append([float(tok) for tok in ln.split(",")])
    if not data:
        raise EmptyDataError(f"{path}: header only, no data rows")
    arr = np.asarray(data, dtype=float)
    cols = {name: arr[:, i] for i, name in enumerate(header)}
    return cols


def fit_loglog_order(h, err):
    mask = (h > 0) & (err > 0)
    if np.count_nonzero(mask) < 2:
        raise EmptyDataError("not enough positive points for an order fit")
    A = np.vstack([np.ones(mask.sum()), np.log(h[mask])]).T
    coef, *_ = np.linalg.lstsq(A, np.log(err[mask]), rcond=None)
    return float(coef[1])


def fit_semilog_slope(t, y):
    mask = y > 0
    if np.count_nonzero(mask) < 2:
        raise EmptyDataError("not enough positive points for a slope fit")
    A = np.vstack([np.ones(mask.sum()), t[mask]]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y[mask]), rcond=None)
    return float(coef[0]), float(coef[1])


def _new_axes(title):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    if title:
        ax.set_title(title)
    return fig, ax


def render(job: PlotJob) -> RenderResult:
    if job.kind not in SCHEMAS:
        raise SchemaError(f"unknown plot kind {job.kind!r}")
    tables = [read_table(p, job.kind) for p in job.inputs]
    fits = {}

    if job.kind == "ladder":
        fig, ax = _new_axes(job.title or "refinement ladder")
        for path, tab in zip(job.inputs, tables):
            order = fit_loglog_order(tab["h"], tab["error"])
            fits["order"] = order
            ax.loglog(tab["h"], tab["error"], "o-", label=Path(path).stem)
            ref = tab["error"][0] * (tab["h"] / tab["h"][0]) ** order
            ax.loglog(tab["h"], ref, "k--", alpha=0.6)
        ax.annotate(f"order = {fits['order']:.3f}", xy=(0.05, 0.9),
                    xycoords="axes fraction")
        ax.set_xlabel("h")
        ax.set_ylabel("error")
        ax.legend(loc="lower right")

    elif job.kind == "decay-semilog":
        fig, ax = _new_axes(job.title or "weighted distance decay")
        for path, tab in zip(job.inputs, tables):
            t, y = tab["t"], tab["H"]
            intercept, slope = fit_semilog_slope(t, y)
            fits["slope"] = slope
            ax.semilogy(t, np.maximum(y, 1e-300), "o", ms=2.5,
                        label=Path(path).stem)
            ax.semilogy(t, np.exp(intercept + slope * t), "k--", alpha=0.7)
        ax.annotate(f"slope = {fits['slope']:.3f}", xy=(0.05, 0.9),
                    xycoords="axes fraction")
        ax.set_xlabel("t")
        ax.set_ylabel("H(t)")
        ax.legend(loc="upper right")

    elif job.kind == "residual-bar":
        fig, ax = _new_axes(job.title or "entropy residuals")
        tab = tables[0]
        idx = np.arange(len(tab["residual"]))
        colors = ["tab:blue" if p else "tab:red" for p in tab["pass"]]
        ax.bar(idx, tab["residual"], color=colors)
        ax.plot(idx, -tab["tolerance"], "k--", label="-tolerance")
        fits["min_residual"] = float(np.min(tab["residual"]))
        ax.set_xlabel("(k, test function) index")
        ax.set_ylabel("residual")
        ax.legend(loc="lower right")

    elif job.kind == "field-snapshot":
        fig, ax = _new_axes(job.title or "final snapshot")
        tab = tables[0]
        t_final = np.max(tab["t"])
        mask = tab["t"] == t_final
        if not np.any(mask):
            raise EmptyDataError("no rows at the final time")
        ax.plot(tab["x"][mask], tab["value"][mask], "-")
        fits["t_final"] = float(t_final)
        ax.set_xlabel("x")
        ax.set_ylabel(f"value at t = {t_final:g}")

    job.output.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Software": None} if job.deterministic else None
    fig.savefig(job.output, metadata=metadata)
    plt.close(fig)
    return RenderResult(job.output, fits)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot.py", description="render figures from laboratory CSVs")
    parser.add_argument("kind", choices=sorted(SCHEMAS))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV")
    parser.add_argument("--out", required=True, type=Path, metavar="IMG")
    parser.add_argument("--deterministic", action="store_true",
                        help="strip volatile metadata for byte-stable output")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        result = render(PlotJob(args.kind, args.inputs, args.out,
                                args.deterministic, args.title))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except EmptyDataError as exc:
        print(f"empty data: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA if isinstance(exc, FileNotFoundError) else 4
    for key, val in sorted(result.fits.items()):
        print(f"fit {key}={val:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
