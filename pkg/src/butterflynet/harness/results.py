"""Result tables with provenance, and the emitted file formats.

results.csv: header row, one metric per row (digest, metric, value, std).
results.json: the same rows plus the provenance block.  trace_*.csv: loss
per step.  plotdata_*.csv: x,y[,std] columns.  Float formatting uses
shortest round-trip repr, so identical runs emit byte-identical files.
"""

import hashlib
import json
import subprocess
from pathlib import Path

import numpy as np

from .. import __version__
from ..kernels import active_backend


def config_digest(cfg: dict) -> str:
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _commit() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5
        )
        return out.stdout.strip() if out.returncode == 0 else "unknown"
    except OSError:
        return "unknown"


def provenance(extra: dict | None = None) -> dict:
    info = {
        "package_version": __version__,
        "kernel_backend": active_backend(),
        "kernel_sign_convention": "exp(-2*pi*i*xi*t) forward",
        "dft_normalization": "forward unnormalized, inverse 1/n",
        "float_precision": "float64",
        "adam": {"beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8},
        "numpy_version": np.__version__,
        "commit": _commit(),
    }
    if extra:
        info.update(extra)
    return info


class ResultTable:
    def __init__(self, cfg: dict, extra_provenance: dict | None = None):
        self.digest = config_digest(cfg)
        self.cfg = dict(cfg)
        self.rows = []
        self.provenance = provenance(extra_provenance)

    def add(self, metric: str, value, std=None) -> None:
        self.rows.append(
            {
                "config": self.digest,
                "metric": metric,
                "value": float(value),
                "std": None if std is None else float(std),
            }
        )

    def get(self, metric: str) -> float:
        for row in self.rows:
            if row["metric"] == metric:
                return row["value"]
        raise KeyError(metric)

    def write_csv(self, path) -> None:
        lines = ["config,metric,value,std"]
        for r in self.rows:
            std = "" if r["std"] is None else repr(r["std"])
            lines.append(f"{r['config']},{r['metric']},{r['value']!r},{std}")
        Path(path).write_text("\n".join(lines) + "\n")

    def write_json(self, path) -> None:
        doc = {
            "config": self.cfg,
            "digest": self.digest,
            "rows": self.rows,
            "provenance": self.provenance,
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_trace(path, trace) -> None:
    lines = ["step,loss"]
    lines += [f"{step},{loss!r}" for step, loss in trace]
    Path(path).write_text("\n".join(lines) + "\n")


def write_plotdata(path, columns: dict) -> None:
    """columns: name -> 1D array; emitted as aligned CSV columns."""
    names = list(columns)
    arrays = [np.asarray(columns[n]).ravel() for n in names]
    lines = [",".join(names)]
    for i in range(len(arrays[0])):
        lines.append(",".join(repr(float(a[i])) for a in arrays))
    Path(path).write_text("\n".join(lines) + "\n")
