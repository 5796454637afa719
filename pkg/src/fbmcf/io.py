"""Trajectory persistence: mesh dumps, snapshot round-trips, CSV series."""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .errors import FbmcfError
from .flow import Trajectory
from .geometry import GraphSurface
from .support import SupportPatch

MONITOR_COLUMNS = ("t", "area", "perimeter", "energy", "max_H", "max_A")


def write_obj(path, surface):
    """ASCII mesh dump: `v x y z` per node, `f i j k` per triangle (1-based)."""
    lines = []
    if isinstance(surface, GraphSurface):
        X = surface.geometry().X
        n1, n2 = X.shape[:2]
        for i in range(n1):
            for j in range(n2):
                x = X[i, j]
                lines.append(f"v {x[0]:.17g} {x[1]:.17g} {x[2]:.17g}")
        for i in range(n1 - 1):
            for j in range(n2 - 1):
                a = i * n2 + j + 1
                b = a + n2
                lines.append(f"f {a} {b} {a + 1}")
                lines.append(f"f {b} {b + 1} {a + 1}")
    else:
        pts = surface.samples().X if hasattr(surface, "samples") else surface
        for x in np.asarray(pts).reshape(-1, 3):
            lines.append(f"v {x[0]:.17g} {x[1]:.17g} {x[2]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _patch_meta(patch):
    return {"phi": patch.profile.name, "kappa": patch.kappa,
            "chart_radius": patch.chart_radius}


def _patch_from_meta(meta):
    return SupportPatch.from_spec(meta["phi"], kappa=meta["kappa"] or None,
                                  chart_radius=meta["chart_radius"])


def save_snapshot(path, surface):
    np.savez(path, u=surface.u, t=surface.t, h=surface.h, r_dom=surface.r_dom,
             half=surface.half, patch=json.dumps(_patch_meta(surface.patch)))


def load_snapshot(path):
    d = np.load(path, allow_pickle=False)
    patch = _patch_from_meta(json.loads(str(d["patch"])))
    return GraphSurface(patch, float(d["h"]), float(d["r_dom"]), d["u"],
                        float(d["t"]), bool(d["half"]))


def write_monitor_csv(path, monitors):
    rows = [",".join(MONITOR_COLUMNS)]
    n = len(monitors["t"])
    for k in range(n):
        rows.append(",".join(f"{monitors[c][k]:.17g}" for c in MONITOR_COLUMNS))
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")


def save_trajectory(outdir, trajectory, scenario_echo=None):
    """Persist monitors, OBJ dumps, and exact-round-trip snapshots."""
    os.makedirs(outdir, exist_ok=True)
    files = []
    mon_path = os.path.join(outdir, "monitors.csv")
    write_monitor_csv(mon_path, trajectory.monitors)
    files.append("monitors.csv")
    meta = {"stop_reason": trajectory.stop_reason, "snapshots": []}
    if scenario_echo is not None:
        meta["scenario"] = scenario_echo
    for k, snap in enumerate(trajectory.snapshots):
        obj = f"snap_{k:05d}.obj"
        npz = f"snap_{k:05d}.npz"
        write_obj(os.path.join(outdir, obj), snap)
        save_snapshot(os.path.join(outdir, npz), snap)
        meta["snapshots"].append({"t": snap.t, "obj": obj, "npz": npz})
        files += [obj, npz]
    with open(os.path.join(outdir, "trajectory.json"), "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
    files.append("trajectory.json")
    return files


def load_trajectory(outdir):
    meta_path = os.path.join(outdir, "trajectory.json")
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"no trajectory.json in {outdir}")
    with open(meta_path) as fh:
        meta = json.load(fh)
    snaps = [load_snapshot(os.path.join(outdir, rec["npz"]))
             for rec in meta["snapshots"]]
    monitors = {}
    mon_path = os.path.join(outdir, "monitors.csv")
    if os.path.exists(mon_path):
        raw = np.genfromtxt(mon_path, delimiter=",", names=True)
        monitors = {c: np.atleast_1d(raw[c]) for c in raw.dtype.names}
    return Trajectory(snaps, monitors, meta.get("stop_reason", "completed"))


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(outdir, scenario_echo, stop_reason, wall_time, files):
    from . import __version__

    manifest = {
        "scenario_hash": hashlib.sha256(
            json.dumps(scenario_echo, sort_keys=True).encode()).hexdigest(),
        "version": __version__,
        "stop_reason": stop_reason,
        "wall_time": wall_time,
        "files": {f: sha256_file(os.path.join(outdir, f)) for f in files},
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return manifest
