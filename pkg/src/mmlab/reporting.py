"""File emission: delimited output, config hashing, and figure rendering.

Every CSV an experiment emits starts with a ``# config_hash=<hex>`` comment
binding the file to the exact configuration that produced it, followed by a
header row.  Files are written atomically (temp file in the target
directory, then rename), and each experiment finishes by dropping a
``<stem>.done`` marker so consumers can tell complete outputs from
interrupted ones.  Floats are serialized with ``%.17g`` (lossless for
float64), making reruns byte-identical.

Figures are rendered with matplotlib's Agg backend into SVG files next to
the CSVs; matplotlib is imported lazily so CSV-only paths stay light.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

__all__ = [
    "config_hash",
    "atomic_write_text",
    "write_csv",
    "write_done_marker",
    "save_trajectory_csv",
    "save_genrisk_csv",
    "save_stability_csv",
    "save_bound_curve_csv",
    "render_curves_svg",
]


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON serialization of a config dict."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def atomic_write_text(path, text: str) -> None:
    """Write text to ``path`` via a temp file + rename in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_cell(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header: list[str], columns: list[np.ndarray],
              cfg_hash: str | None = None) -> None:
    """Write named columns as CSV, with the binding hash comment first."""
    if len(header) != len(columns):
        raise ValueError("header and columns must have matching lengths")
    n_rows = len(columns[0])
    if any(len(c) != n_rows for c in columns):
        raise ValueError("all columns must have the same length")
    lines = []
    if cfg_hash is not None:
        lines.append(f"# config_hash={cfg_hash}")
    lines.append(",".join(header))
    for i in range(n_rows):
        lines.append(",".join(_format_cell(col[i]) for col in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_done_marker(path) -> None:
    """Drop the terminal ``<stem>.done`` marker for a finished output set."""
    atomic_write_text(path, "done\n")


def save_trajectory_csv(traj, path, cfg_hash: str | None = None) -> None:
    """Trajectory CSV: ``t,w_0..w_{d-1},theta_0..theta_{d-1}``."""
    d = traj.ws.shape[1]
    header = (["t"] + [f"w_{j}" for j in range(d)] + [f"theta_{j}" for j in range(d)])
    columns = [traj.ts] + [traj.ws[:, j] for j in range(d)] + [traj.thetas[:, j] for j in range(d)]
    write_csv(path, header, columns, cfg_hash)


def save_genrisk_csv(curve, path, cfg_hash: str | None = None) -> None:
    """Generalization-risk CSV: ``t,gen_risk`` (signed values)."""
    write_csv(path, ["t", "gen_risk"], [curve.ts, curve.values], cfg_hash)


def save_stability_csv(trace, path, cfg_hash: str | None = None) -> None:
    """Stability CSV: ``t,delta_w,delta_theta,delta``."""
    write_csv(path, ["t", "delta_w", "delta_theta", "delta"],
              [trace.ts, trace.delta_w, trace.delta_theta, trace.delta], cfg_hash)


def save_bound_curve_csv(ts, values, path, cfg_hash: str | None = None) -> None:
    """Bound-curve CSV: ``t,bound``."""
    write_csv(path, ["t", "bound"], [np.asarray(ts), np.asarray(values)], cfg_hash)


def render_curves_svg(path, xs, series, title: str, ylabel: str,
                      logy: bool = False) -> None:
    """Render line series to an SVG file.

    ``series`` is a list of (label, ys, style_kwargs) tuples drawn over the
    shared x axis.  Written atomically like the CSVs.
    """
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context({"svg.hashsalt": path.name}):
        fig, ax = plt.subplots(figsize=(7.0, 4.2))
        try:
            for label, ys, style in series:
                ax.plot(xs, ys, label=label, **style)
            ax.set_xlabel("iteration t")
            ax.set_ylabel(ylabel)
            ax.set_title(title)
            if logy:
                ax.set_yscale("log")
            ax.grid(True, alpha=0.3)
            ax.legend(loc="best", fontsize=9)
            fig.tight_layout()
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            os.close(fd)
            try:
                fig.savefig(tmp, format="svg", metadata={"Date": None})
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        finally:
            plt.close(fig)
