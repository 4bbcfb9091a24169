"""Scenario files: flat key=value sections describing a complete run.

A scenario pins down the cloud, the star/stencil configuration, the model
coefficients, the initial fields, the time stepping, and the output
directory.  Unknown keys and sections are rejected outright so typos never
silently fall back to defaults.  A handful of built-in presets reproduce
the reference growth experiments.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .cloud import NodeCloud, generate_jittered, generate_regular, load_cloud
from .errors import ScenarioError
from .model import GrowthSpec, ModelParams
from .scheme import SchemeConfig, State
from .stencil import StencilTable, WeightSpec, build_all_stencils

_SECTION_KEYS = {
    "cloud": {"kind", "dim", "nodes_per_axis", "length", "jitter", "seed", "path"},
    "star": {"s", "criterion", "weight", "exponent", "shape"},
    "model": {"alpha1", "alpha2", "p", "q", "delta", "chi", "tech_diffusion",
              "g_kind", "g_level", "g_center", "g_sigma"},
    "initial": {"k0_kind", "k0_value", "k0_points", "k0_bumps", "k0_base", "k0_path",
                "A0_kind", "A0_value", "A0_points", "A0_bumps", "A0_base", "A0_path"},
    "scheme": {"dt", "t_final", "snapshot_times", "stability_mode", "stability_interval"},
    "output": {"dir"},
}
_REQUIRED_SECTIONS = ("cloud", "star", "initial", "scheme")


def _fail(path: str, msg: str):
    raise ScenarioError(f"{path}: {msg}")


def _get_float(sec, section: str, key: str, default=None):
    if key not in sec:
        if default is None:
            _fail(f"{section}.{key}", "required key missing")
        return default
    try:
        return float(sec[key])
    except ValueError:
        _fail(f"{section}.{key}", f"not a number: {sec[key]!r}")


def _get_int(sec, section: str, key: str, default=None):
    if key not in sec:
        if default is None:
            _fail(f"{section}.{key}", "required key missing")
        return default
    try:
        return int(sec[key])
    except ValueError:
        _fail(f"{section}.{key}", f"not an integer: {sec[key]!r}")


def _get_choice(sec, section: str, key: str, choices, default=None):
    if key not in sec:
        if default is None:
            _fail(f"{section}.{key}", "required key missing")
        return default
    val = sec[key].strip()
    if val not in choices:
        _fail(f"{section}.{key}", f"must be one of {sorted(choices)}, got {val!r}")
    return val


def _parse_float_list(raw: str, where: str) -> tuple[float, ...]:
    items = [x.strip() for x in raw.split(",") if x.strip()]
    try:
        return tuple(float(x) for x in items)
    except ValueError:
        _fail(where, f"not a comma-separated number list: {raw!r}")


@dataclass(frozen=True)
class CloudSpec:
    kind: str = "regular"  # regular | jittered | file
    dim: int = 1
    nodes_per_axis: int = 11
    length: float = 1.0
    jitter: float = 0.2
    seed: int = 0
    path: str | None = None

    def build(self) -> NodeCloud:
        if self.kind == "regular":
            return generate_regular(self.nodes_per_axis, self.length, self.dim)
        if self.kind == "jittered":
            return generate_jittered(self.nodes_per_axis, self.length, self.dim,
                                     self.jitter, self.seed)
        if self.kind == "file":
            if not self.path:
                raise ScenarioError("cloud.path: required for kind=file")
            return load_cloud(self.path)
        raise ScenarioError(f"cloud.kind: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class StarSpec:
    s: int
    criterion: str = "distance"
    weight: WeightSpec = field(default_factory=WeightSpec)

    def build_table(self, cloud: NodeCloud) -> StencilTable:
        return build_all_stencils(cloud, self.s, self.criterion, self.weight)


@dataclass(frozen=True)
class FieldSpec:
    """One initial field: constant, 1D piecewise-linear, Gaussian bumps, or file."""

    kind: str
    value: float = 0.0
    points: tuple[tuple[float, float], ...] = ()
    bumps: tuple[tuple[float, ...], ...] = ()  # (amplitude, center..., sigma)
    base: float = 0.0
    path: str | None = None

    def evaluate(self, cloud: NodeCloud) -> np.ndarray:
        if self.kind == "constant":
            return np.full(cloud.n_nodes, float(self.value))
        if self.kind == "piecewise":
            if cloud.dim != 1:
                raise ScenarioError("piecewise initial fields are 1D only")
            xs = np.array([p[0] for p in self.points])
            vs = np.array([p[1] for p in self.points])
            if np.any(np.diff(xs) < 0):
                raise ScenarioError("piecewise breakpoints must be sorted")
            return np.interp(cloud.positions[:, 0], xs, vs)
        if self.kind == "gaussians":
            out = np.full(cloud.n_nodes, float(self.base))
            for bump in self.bumps:
                amp, *center, sigma = bump
                if len(center) != cloud.dim:
                    raise ScenarioError(
                        f"bump center has {len(center)} coordinates on a {cloud.dim}D cloud")
                r2 = ((cloud.positions - np.asarray(center)) ** 2).sum(axis=1)
                out = out + amp * np.exp(-r2 / (2.0 * sigma ** 2))
            return out
        if self.kind == "file":
            return _load_field_file(self.path, cloud.n_nodes)
        raise ScenarioError(f"unknown initial field kind {self.kind!r}")


def _load_field_file(path: str | None, n_nodes: int) -> np.ndarray:
    if not path:
        raise ScenarioError("initial field of kind=file needs a path")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["node", "value"]:
        raise ScenarioError(f"{path}: field file header must be node,value")
    out = np.full(n_nodes, np.nan)
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            idx, val = int(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise ScenarioError(f"{path}:{lineno}: expected node,value") from None
        if not 0 <= idx < n_nodes:
            raise ScenarioError(f"{path}:{lineno}: node {idx} out of range")
        out[idx] = val
    if np.any(np.isnan(out)):
        missing = int(np.flatnonzero(np.isnan(out))[0])
        raise ScenarioError(f"{path}: no value for node {missing}")
    return out


@dataclass(frozen=True)
class InitialSpec:
    k0: FieldSpec
    A0: FieldSpec

    def evaluate(self, cloud: NodeCloud) -> tuple[np.ndarray, np.ndarray]:
        return self.k0.evaluate(cloud), self.A0.evaluate(cloud)


@dataclass(frozen=True)
class Scenario:
    name: str
    cloud: CloudSpec
    star: StarSpec
    model: ModelParams
    initial: InitialSpec
    scheme: SchemeConfig
    output_dir: str

    def with_overrides(self, seed: int | None = None, out: str | None = None,
                       dt: float | None = None) -> "Scenario":
        s = self
        if seed is not None:
            s = replace(s, cloud=replace(s.cloud, seed=seed))
        if out is not None:
            s = replace(s, output_dir=out)
        if dt is not None:
            s = replace(s, scheme=replace(s.scheme, dt=dt))
        return s

    def initial_state(self, cloud: NodeCloud) -> State:
        k0, a0 = self.initial.evaluate(cloud)
        return State(k=k0, A=a0, time=0.0)


def _parse_points(raw: str, where: str) -> tuple[tuple[float, float], ...]:
    pts = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            _fail(where, f"expected x:value pairs, got {chunk!r}")
        try:
            pts.append((float(parts[0]), float(parts[1])))
        except ValueError:
            _fail(where, f"bad number in {chunk!r}")
    if len(pts) < 2:
        _fail(where, "need at least two x:value pairs")
    return tuple(pts)


def _parse_bumps(raw: str, where: str) -> tuple[tuple[float, ...], ...]:
    bumps = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            nums = tuple(float(x) for x in chunk.split(","))
        except ValueError:
            _fail(where, f"bad number in bump {chunk!r}")
        if len(nums) not in (3, 4):  # amp, cx[, cy], sigma
            _fail(where, f"bump needs amplitude,center...,sigma, got {chunk!r}")
        bumps.append(nums)
    if not bumps:
        _fail(where, "no bumps given")
    return tuple(bumps)


def _parse_field(sec, prefix: str) -> FieldSpec:
    kinds = ("constant", "piecewise", "gaussians", "file")
    kind = _get_choice(sec, "initial", f"{prefix}_kind", kinds,
                       default="constant" if prefix == "A0" else None)
    spec = FieldSpec(kind=kind, value=1.0 if prefix == "A0" else 0.0)
    if kind == "constant":
        default = 1.0 if prefix == "A0" else None
        spec = replace(spec, value=_get_float(sec, "initial", f"{prefix}_value", default))
    elif kind == "piecewise":
        if f"{prefix}_points" not in sec:
            _fail(f"initial.{prefix}_points", "required for piecewise fields")
        spec = replace(spec, points=_parse_points(sec[f"{prefix}_points"],
                                                  f"initial.{prefix}_points"))
    elif kind == "gaussians":
        if f"{prefix}_bumps" not in sec:
            _fail(f"initial.{prefix}_bumps", "required for gaussian fields")
        spec = replace(spec,
                       bumps=_parse_bumps(sec[f"{prefix}_bumps"], f"initial.{prefix}_bumps"),
                       base=_get_float(sec, "initial", f"{prefix}_base", 0.0))
    elif kind == "file":
        if f"{prefix}_path" not in sec:
            _fail(f"initial.{prefix}_path", "required for file fields")
        spec = replace(spec, path=sec[f"{prefix}_path"])
    return spec


def parse_scenario_text(text: str, name: str = "scenario") -> Scenario:
    """Parse and validate a scenario from its text form."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                   interpolation=None, strict=True)
    cp.optionxform = str  # keys are case-sensitive; typos must not slip through
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"{name}: {exc}") from exc

    for section in cp.sections():
        if section not in _SECTION_KEYS:
            _fail(section, "unknown section")
        stray = set(cp[section]) - _SECTION_KEYS[section]
        if stray:
            _fail(f"{section}.{sorted(stray)[0]}", "unknown key")
    for section in _REQUIRED_SECTIONS:
        if section not in cp:
            _fail(section, "required section missing")

    sec = cp["cloud"]
    kind = _get_choice(sec, "cloud", "kind", ("regular", "jittered", "file"))
    cloud = CloudSpec(
        kind=kind,
        dim=_get_int(sec, "cloud", "dim", 1),
        nodes_per_axis=_get_int(sec, "cloud", "nodes_per_axis",
                                11 if kind == "file" else None),
        length=_get_float(sec, "cloud", "length", 1.0),
        jitter=_get_float(sec, "cloud", "jitter", 0.2),
        seed=_get_int(sec, "cloud", "seed", 0),
        path=sec.get("path"),
    )
    if cloud.dim not in (1, 2):
        _fail("cloud.dim", f"must be 1 or 2, got {cloud.dim}")

    sec = cp["star"]
    weight_kind = _get_choice(sec, "star", "weight", ("potential", "exponential"),
                              "potential")
    try:
        weight = WeightSpec(kind=weight_kind,
                            exponent=_get_float(sec, "star", "exponent", 3.0),
                            shape=_get_float(sec, "star", "shape", 6.0))
    except ValueError as exc:
        raise ScenarioError(f"star: {exc}") from exc
    star = StarSpec(
        s=_get_int(sec, "star", "s"),
        criterion=_get_choice(sec, "star", "criterion", ("distance", "quadrant"),
                              "distance"),
        weight=weight,
    )

    sec = cp["model"] if "model" in cp else {}
    g_kind = _get_choice(sec, "model", "g_kind", ("constant", "gaussian"), "constant")
    center_raw = sec.get("g_center") or ("0.5" if cloud.dim == 1 else "0.5, 0.5")
    g_center = _parse_float_list(center_raw, "model.g_center")
    if g_kind == "gaussian" and len(g_center) != cloud.dim:
        _fail("model.g_center", f"needs {cloud.dim} coordinates")
    try:
        model = ModelParams(
            alpha1=_get_float(sec, "model", "alpha1", 1.0),
            alpha2=_get_float(sec, "model", "alpha2", 1.0),
            p=_get_float(sec, "model", "p", 2.0),
            q=_get_float(sec, "model", "q", 3.0),
            delta=_get_float(sec, "model", "delta", 0.05),
            chi=_get_float(sec, "model", "chi", 0.0),
            tech_diffusion=_get_float(sec, "model", "tech_diffusion", 0.0),
            g_spec=GrowthSpec(kind=g_kind,
                              level=_get_float(sec, "model", "g_level", 0.0),
                              center=g_center,
                              sigma=_get_float(sec, "model", "g_sigma", 0.2)),
        )
    except ValueError as exc:
        raise ScenarioError(f"model: {exc}") from exc

    sec = cp["initial"]
    initial = InitialSpec(k0=_parse_field(sec, "k0"), A0=_parse_field(sec, "A0"))

    sec = cp["scheme"]
    mode = _get_choice(sec, "scheme", "stability_mode", ("off", "check", "adapt"), "off")
    dt: float | None
    if "dt" in sec:
        dt = _get_float(sec, "scheme", "dt")
    elif mode == "adapt":
        dt = None  # adapt derives the first step from the bound
    else:
        _fail("scheme.dt", "required unless stability_mode=adapt")
    snaps = _parse_float_list(sec.get("snapshot_times", ""), "scheme.snapshot_times")
    try:
        scheme = SchemeConfig(
            dt=dt,
            t_final=_get_float(sec, "scheme", "t_final"),
            snapshot_times=snaps,
            stability_mode=mode,
            stability_interval=_get_int(sec, "scheme", "stability_interval", 10),
        )
    except ValueError as exc:
        raise ScenarioError(f"scheme: {exc}") from exc

    out_dir = cp["output"].get("dir", f"out/{name}") if "output" in cp else f"out/{name}"
    return Scenario(name=name, cloud=cloud, star=star, model=model,
                    initial=initial, scheme=scheme, output_dir=out_dir)


def parse_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    name = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_scenario_text(text, name=name)


# Reference experiment presets.  Production coefficients use the saturating
# p = q = 2 form so capital growth balances depreciation at a finite level;
# exponents stay configurable per scenario.
_PRESET_TEXTS: dict[str, str] = {
    "growth-1d-delta005": """\
# 1D growth, moderate depreciation, no taxis.
# Technology improves fastest mid-domain; capital rises across the interval.
[cloud]
kind = jittered
dim = 1
nodes_per_axis = 13
length = 1.0
jitter = 0.15
seed = 3

[star]
s = 2
criterion = distance
weight = potential
exponent = 3.0

[model]
alpha1 = 1.0
alpha2 = 1.0
p = 2.0
q = 2.0
delta = 0.05
chi = 0.0
g_kind = gaussian
g_level = 0.1
g_center = 0.5
g_sigma = 0.2

[initial]
k0_kind = piecewise
k0_points = 0:5, 0.25:5, 0.75:25, 1:25
A0_kind = constant
A0_value = 1.0

[scheme]
dt = 0.001
# The horizon is simulated time, not a domain length; space stays [0, 1].
t_final = 20.0
snapshot_times = 0, 5, 10, 15, 20
stability_mode = check
stability_interval = 200

[output]
dir = out/growth-1d-delta005
""",
    "growth-1d-delta002": """\
# 1D growth with low depreciation: capital ends above its start everywhere.
[cloud]
kind = jittered
dim = 1
nodes_per_axis = 13
length = 1.0
jitter = 0.15
seed = 3

[star]
s = 2
criterion = distance
weight = potential
exponent = 3.0

[model]
alpha1 = 1.0
alpha2 = 1.0
p = 2.0
q = 2.0
delta = 0.02
chi = 0.0
g_kind = gaussian
g_level = 0.1
g_center = 0.5
g_sigma = 0.2

[initial]
k0_kind = piecewise
k0_points = 0:5, 0.25:5, 0.75:25, 1:25
A0_kind = constant
A0_value = 1.0

[scheme]
dt = 0.001
# The horizon is simulated time, not a domain length; space stays [0, 1].
t_final = 20.0
snapshot_times = 0, 5, 10, 15, 20
stability_mode = check
stability_interval = 200

[output]
dir = out/growth-1d-delta002
""",
    "growth-1d-chi1": """\
# 1D taxis run: technology peaks near x = 0.1 and capital drifts toward it,
# ending with a higher peak than the taxis-free low-depreciation run.
[cloud]
kind = jittered
dim = 1
nodes_per_axis = 13
length = 1.0
jitter = 0.15
seed = 3

[star]
s = 2
criterion = distance
weight = potential
exponent = 3.0

[model]
alpha1 = 1.0
alpha2 = 1.0
p = 2.0
q = 2.0
delta = 0.02
chi = 1.0
g_kind = gaussian
g_level = 0.1
g_center = 0.1
g_sigma = 0.2

[initial]
k0_kind = piecewise
k0_points = 0:5, 0.25:5, 0.75:25, 1:25
A0_kind = constant
A0_value = 1.0

[scheme]
dt = 0.001
# The horizon is simulated time, not a domain length; space stays [0, 1].
t_final = 20.0
snapshot_times = 0, 5, 10, 15, 20
stability_mode = check
stability_interval = 200

[output]
dir = out/growth-1d-chi1
""",
    "growth-2d-delta005": """\
# 2D growth, moderate depreciation, no taxis; long horizon.
[cloud]
kind = jittered
dim = 2
nodes_per_axis = 12
length = 1.0
jitter = 0.1
seed = 11

[star]
s = 8
criterion = quadrant
weight = potential
exponent = 3.0

[model]
alpha1 = 1.0
alpha2 = 1.0
p = 2.0
q = 2.0
delta = 0.05
chi = 0.0
g_kind = gaussian
g_level = 0.1
g_center = 0.5, 0.5
g_sigma = 0.2

[initial]
k0_kind = gaussians
k0_bumps = 1.2, 0.3, 0.3, 0.12; 0.9, 0.7, 0.6, 0.1
k0_base = 0.05
A0_kind = constant
A0_value = 1.0

[scheme]
dt = 0.001
# The horizon is simulated time, not a domain length; space stays the unit square.
t_final = 150.0
snapshot_times = 0, 10, 50, 100, 150
stability_mode = check
stability_interval = 500

[output]
dir = out/growth-2d-delta005
""",
    "growth-2d-delta0085": """\
# 2D poverty trap: frozen technology, depreciation high enough that the
# rich bumps hold for a while and then drain away through diffusion.
[cloud]
kind = jittered
dim = 2
nodes_per_axis = 12
length = 1.0
jitter = 0.1
seed = 11

[star]
s = 8
criterion = quadrant
weight = potential
exponent = 3.0

[model]
alpha1 = 1.0
alpha2 = 1.0
p = 2.0
q = 2.0
delta = 0.085
chi = 0.0
g_kind = constant
g_level = 0.0

[initial]
k0_kind = gaussians
k0_bumps = 1.2, 0.3, 0.3, 0.12; 0.9, 0.7, 0.6, 0.1
k0_base = 0.05
A0_kind = constant
A0_value = 1.0

[scheme]
dt = 0.001
t_final = 50.0
snapshot_times = 0, 5, 15, 30, 50
stability_mode = check
stability_interval = 500

[output]
dir = out/growth-2d-delta0085
""",
    "growth-2d-delta03": """\
# 2D with very high depreciation and no taxis: capital converges to zero
# from the start.  Technology is held constant so nothing re-ignites growth.
[cloud]
kind = jittered
dim = 2
nodes_per_axis = 12
length = 1.0
jitter = 0.1
seed = 11

[star]
s = 8
criterion = quadrant
weight = potential
exponent = 3.0

[model]
alpha1 = 1.0
alpha2 = 1.0
p = 2.0
q = 2.0
delta = 0.3
chi = 0.0
g_kind = constant
g_level = 0.0

[initial]
k0_kind = gaussians
k0_bumps = 0.22, 0.3, 0.3, 0.12; 0.18, 0.7, 0.6, 0.1
k0_base = 0.02
A0_kind = constant
A0_value = 1.0

[scheme]
dt = 0.001
t_final = 30.0
snapshot_times = 0, 1, 5, 10, 30
stability_mode = check
stability_interval = 500

[output]
dir = out/growth-2d-delta03
""",
    "growth-2d-delta03-chi1": """\
# 2D with very high depreciation but taxis on and growing technology:
# capital first decays, then piles up near the technology peak.  Taxis
# spikes tighten the step bound, so the step adapts to stay under it.
[cloud]
kind = jittered
dim = 2
nodes_per_axis = 12
length = 1.0
jitter = 0.1
seed = 11

[star]
s = 8
criterion = quadrant
weight = potential
exponent = 3.0

[model]
alpha1 = 1.0
alpha2 = 1.0
p = 2.0
q = 2.0
delta = 0.3
chi = 1.0
g_kind = gaussian
g_level = 0.1
g_center = 0.5, 0.5
g_sigma = 0.2

[initial]
k0_kind = gaussians
k0_bumps = 0.22, 0.3, 0.3, 0.12; 0.18, 0.7, 0.6, 0.1
k0_base = 0.02
A0_kind = constant
A0_value = 1.0

[scheme]
dt = 0.001
t_final = 30.0
snapshot_times = 0, 1, 5, 10, 30
stability_mode = adapt
stability_interval = 20

[output]
dir = out/growth-2d-delta03-chi1
""",
}

PRESET_NAMES = tuple(sorted(_PRESET_TEXTS))


def get_preset(name: str) -> Scenario:
    if name not in _PRESET_TEXTS:
        raise ScenarioError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return parse_scenario_text(_PRESET_TEXTS[name], name=name)


def preset_text(name: str) -> str:
    if name not in _PRESET_TEXTS:
        raise ScenarioError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return _PRESET_TEXTS[name]
