"""CSV/JSON export with an embedded run manifest.

Manifests go into ``#`` header lines; the CSV body after the header depends
only on the computed numbers, so identical parameters give identical bodies.
"""
from __future__ import annotations

import csv
import io as _io
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .porosity import PorosityProfile


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int = 0
    versions: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)

    @classmethod
    def create(cls, subcommand: str, parameters: dict, seed: int = 0) -> "RunManifest":
        import numba
        import scipy

        from . import __version__
        versions = {"porous_carnot": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                    "numba": numba.__version__, "python": platform.python_version()}
        stamp = {"started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
        return cls(subcommand, _plain(parameters), seed, versions, stamp)

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, "parameters": self.parameters, "seed": self.seed,
                "versions": self.versions, "timestamps": self.timestamps}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str | Path, header: list[str], rows, manifest: RunManifest | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    if manifest is not None:
        buf.write("# manifest: " + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())
    return path


def read_csv_body(path: str | Path) -> str:
    """The CSV text without manifest lines (what the determinism guarantee covers)."""
    return "".join(l for l in Path(path).read_text().splitlines(True) if not l.startswith("#"))


def write_json(path: str | Path, payload: dict, manifest: RunManifest | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"manifest": manifest.to_dict() if manifest else None, "data": _plain(payload)}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def profile_rows(profile: PorosityProfile):
    n = len(profile.base)
    header = ["scale", "lambda_hat"] + [f"witness_x{i + 1}" for i in range(n)] + ["witness_radius", "mode"]
    rows = []
    for s, lam, w in zip(profile.scales, profile.lambda_hat, profile.witnesses):
        c = list(w.center) if w is not None else [float("nan")] * n
        rows.append([s, lam] + c + [w.radius if w is not None else 0.0, profile.mode])
    return header, rows


def export_profile(profile: PorosityProfile, out_dir: str | Path, manifest: RunManifest | None = None,
                   stem: str = "profile", verdict: str | None = None) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    header, rows = profile_rows(profile)
    p_csv = write_csv(out_dir / f"{stem}.csv", header, rows, manifest)
    meta = {"set": profile.set_name, "metric": profile.metric_name, "seed": profile.seed,
            "mode": profile.mode, "search_effort": profile.search_effort, "base": profile.base,
            "verdict": verdict, "rows": [dict(zip(header, r)) for r in rows]}
    p_json = write_json(out_dir / f"{stem}.json", meta, manifest)
    return p_csv, p_json
