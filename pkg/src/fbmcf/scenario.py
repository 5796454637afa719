"""Scenario configuration files: strict YAML with a fixed key catalog.

Unknown keys are errors, not warnings, so stored scenarios stay auditable.
Defaults are filled in and echoed back so the manifest records the complete
effective configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ScenarioError
from .flow import FlowConfig, shrinking_radius
from .geometry import GraphSurface
from .support import SupportPatch

_SECTIONS = {
    "patch": {"phi", "kappa", "chart_radius"},
    "initial": {"kind", "R0", "tilt"},
    "grid": {"h", "r_dom", "half"},
    "flow": {"cfl", "t_end", "snapshot_stride", "outer_bc", "scheme",
             "blowup_threshold"},
}
_TOP_KEYS = set(_SECTIONS) | {"output_dir", "name"}
_INITIAL_KINDS = {"zero", "sphere", "tilted-plane"}

_DEFAULTS = {
    "patch": {"phi": "flat", "kappa": 0.0, "chart_radius": 10.0},
    "initial": {"kind": "zero", "R0": 1.0, "tilt": 0.0},
    "grid": {"half": True},
    "flow": {"cfl": 0.2, "snapshot_stride": 1, "outer_bc": "frozen",
             "scheme": "explicit-euler", "blowup_threshold": 0.5},
}


@dataclass
class Scenario:
    name: str
    patch_spec: dict
    initial_spec: dict
    grid_spec: dict
    flow_spec: dict
    output_dir: str

    def build_patch(self):
        spec = self.patch_spec
        kappa = spec["kappa"] or None
        cr = spec["chart_radius"]
        if spec["phi"] == "flat":
            return SupportPatch.flat(cr)
        return SupportPatch.from_spec(spec["phi"], kappa=kappa, chart_radius=cr)

    def build_initial(self):
        patch = self.build_patch()
        h, r_dom = self.grid_spec["h"], self.grid_spec["r_dom"]
        half = self.grid_spec["half"]
        kind = self.initial_spec["kind"]
        if kind == "zero":
            return GraphSurface.zero(patch, h, r_dom, half=half)
        if kind == "sphere":
            return GraphSurface.sphere_cap(self.initial_spec["R0"], h, r_dom,
                                           t=0.0, patch=patch, half=half)
        if kind == "tilted-plane":
            tilt = self.initial_spec["tilt"]
            return GraphSurface.from_height(lambda a, b: tilt * a, patch,
                                            h, r_dom, half=half)
        raise ScenarioError(f"unknown initial kind {kind!r}", key="initial.kind")

    def build_flow_config(self):
        spec = dict(self.flow_spec)
        if spec["outer_bc"] == "dirichlet-exact":
            if self.initial_spec["kind"] != "sphere":
                raise ScenarioError(
                    "dirichlet-exact needs a sphere initial surface",
                    key="flow.outer_bc")
            return FlowConfig.for_sphere(
                self.initial_spec["R0"], spec["t_end"], cfl=spec["cfl"],
                snapshot_stride=spec["snapshot_stride"],
                outer_bc="dirichlet-exact", scheme=spec["scheme"],
                blowup_threshold=spec["blowup_threshold"])
        return FlowConfig(t_end=spec["t_end"], cfl=spec["cfl"],
                          snapshot_stride=spec["snapshot_stride"],
                          outer_bc=spec["outer_bc"], scheme=spec["scheme"],
                          blowup_threshold=spec["blowup_threshold"])

    def echo(self):
        """Complete effective configuration, defaults filled in."""
        out = {"name": self.name, "patch": self.patch_spec,
               "initial": self.initial_spec, "grid": self.grid_spec,
               "flow": self.flow_spec, "output_dir": self.output_dir}
        if self.initial_spec["kind"] == "sphere":
            out["singular_time"] = self.initial_spec["R0"] ** 2 / 4.0
        return out


def _require(cond, message, key):
    if not cond:
        raise ScenarioError(message, key=key)


def _merge_section(name, data):
    merged = dict(_DEFAULTS.get(name, {}))
    section = data.get(name, {})
    if not isinstance(section, dict):
        raise ScenarioError(f"section {name!r} must be a mapping", key=name)
    for k, v in section.items():
        _require(k in _SECTIONS[name], f"unknown key {name}.{k}", f"{name}.{k}")
        merged[k] = v
    return merged


def load_scenario(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise ScenarioError(
            f"scenario parse error: {err}",
            line=None if mark is None else mark.line + 1,
            column=None if mark is None else mark.column + 1) from err
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a mapping")
    return validate_scenario(data)


def validate_scenario(data):
    for k in data:
        _require(k in _TOP_KEYS, f"unknown key {k}", k)

    patch = _merge_section("patch", data)
    _require(patch["kappa"] >= 0.0, "kappa must be >= 0", "patch.kappa")
    _require(patch["chart_radius"] > 0.0, "chart_radius must be positive",
             "patch.chart_radius")

    initial = _merge_section("initial", data)
    _require(initial["kind"] in _INITIAL_KINDS,
             f"unknown initial kind {initial['kind']!r}", "initial.kind")

    grid = _merge_section("grid", data)
    _require("h" in grid and "r_dom" in grid, "grid needs h and r_dom", "grid")
    _require(grid["h"] > 0.0, "h must be positive", "grid.h")
    _require(grid["r_dom"] > 0.0, "r_dom must be positive", "grid.r_dom")
    ratio = grid["r_dom"] / grid["h"]
    _require(abs(ratio - round(ratio)) < 1e-9,
             "h must divide r_dom commensurably", "grid.h")

    flow = _merge_section("flow", data)
    _require("t_end" in flow, "flow needs t_end", "flow.t_end")
    _require(0.0 < flow["cfl"] <= 0.25, "cfl must lie in (0, 0.25]", "flow.cfl")
    _require(flow["outer_bc"] in ("dirichlet-exact", "frozen"),
             f"unknown outer_bc {flow['outer_bc']!r}", "flow.outer_bc")
    _require(flow["scheme"] in ("explicit-euler", "semi-implicit-linearized"),
             f"unknown scheme {flow['scheme']!r}", "flow.scheme")

    if initial["kind"] == "sphere":
        # the initial graph must exist over the whole footprint rectangle
        corner = np.sqrt(2.0) * grid["r_dom"]
        _require(initial["R0"] > corner,
                 "sphere radius must exceed the footprint diagonal",
                 "initial.R0")

    return Scenario(data.get("name", "scenario"), patch, initial, grid, flow,
                    data.get("output_dir", "out"))
