"""YAML run configuration: process block, analyses, numeric and Monte Carlo settings.

Spatially varying parameters are written as mappings

    alpha: {expr: "1.5 + 0.3 * tanh(x0)", lo: 1.2, hi: 1.8}

where ``expr`` is evaluated with numpy functions and the state
coordinates x0, x1 in scope.  Configs are trusted input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import families as fam
from .asymptotics import DecisionBands, GridSpec
from .core import ParamField, ProcessFamily, RadialDensity
from .criteria import CriteriaConfig
from .errors import ConfigError
from .montecarlo import SimConfig

ANALYSES = ("chung_fuchs", "tails", "p5", "regvar", "perturb", "compare", "montecarlo")
KINDS = ("brownian", "stable", "stable_like", "radial_density", "regvar", "subordinated")

_EXPR_NS = {k: getattr(np, k) for k in ("sin", "cos", "tanh", "exp", "log", "sqrt", "abs", "arctan", "minimum",
                                        "maximum", "hypot")}
_EXPR_NS["pi"] = math.pi


@dataclass
class RunConfig:
    name: str
    process: dict
    analyses: list
    numeric: dict = field(default_factory=dict)
    montecarlo: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    source: Optional[str] = None

    def family(self) -> ProcessFamily:
        return build_family(self.process, self.name)

    def criteria_config(self) -> CriteriaConfig:
        return criteria_config(self.numeric)

    def sim_config(self, seed: Optional[int] = None) -> SimConfig:
        return sim_config(self.montecarlo, self.seed if seed is None else seed)

    @property
    def seed(self) -> int:
        return int(self.numeric.get("seed", 0))

    def as_dict(self):
        return {"name": self.name, "process": self.process, "analyses": list(self.analyses),
                "numeric": self.numeric, "montecarlo": self.montecarlo, "compare": self.compare,
                "output": self.output}


def _where(src, key):
    return f"{src or '<config>'}: field '{key}'"


def _line_of(text: str, key: str) -> Optional[int]:
    for i, line in enumerate(text.splitlines(), 1):
        if line.strip().startswith(f"{key}:"):
            return i
    return None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, str(path))


def parse_config(text: str, source: Optional[str] = None) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}" if mark else ""
        raise ConfigError(f"{source or '<config>'}:{where} YAML parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{source or '<config>'}: top level must be a mapping")
    unknown = set(raw) - {"name", "process", "analyses", "numeric", "montecarlo", "compare", "output"}
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{_where(source, key)} (line {_line_of(text, key)}): unknown section")
    if "process" not in raw or not isinstance(raw["process"], dict):
        raise ConfigError(f"{_where(source, 'process')}: exactly one process mapping is required")
    analyses = raw.get("analyses")
    if not isinstance(analyses, list) or not analyses:
        raise ConfigError(f"{_where(source, 'analyses')} (line {_line_of(text, 'analyses')}): "
                          "must be a non-empty list")
    bad = [a for a in analyses if a not in ANALYSES]
    if bad:
        raise ConfigError(f"{_where(source, 'analyses')}: unknown analyses {bad}; choose from {list(ANALYSES)}")
    cfg = RunConfig(name=str(raw.get("name", raw["process"].get("kind", "process"))), process=raw["process"],
                    analyses=list(analyses), numeric=raw.get("numeric") or {}, montecarlo=raw.get("montecarlo") or {},
                    compare=raw.get("compare") or {}, output=raw.get("output") or {}, source=source)
    validate(cfg, text)
    return cfg


def validate(cfg: RunConfig, text: str = ""):
    src = cfg.source
    kind = cfg.process.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"{_where(src, 'process.kind')} (line {_line_of(text, 'kind')}): "
                          f"expected one of {list(KINDS)}, got {kind!r}")
    if "regvar" in cfg.analyses and kind not in ("regvar", "stable", "radial_density"):
        raise ConfigError(f"{_where(src, 'analyses')}: regvar needs a regvar, stable or radial_density process")
    if "montecarlo" in cfg.analyses and not cfg.montecarlo:
        raise ConfigError(f"{_where(src, 'montecarlo')}: the montecarlo analysis needs a montecarlo block")
    try:
        cfg.family()
        cfg.criteria_config()
        if cfg.montecarlo:
            cfg.sim_config()
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{src or '<config>'}: invalid parameters: {exc}") from exc


# ---------------------------------------------------------------------------
# builders


def param_field(spec, key="parameter") -> ParamField:
    if isinstance(spec, (int, float)):
        return ParamField.constant(float(spec))
    if not isinstance(spec, dict) or not {"lo", "hi"} <= set(spec):
        raise ConfigError(f"field '{key}': expected a number or a mapping with expr, lo, hi")
    lo, hi = float(spec["lo"]), float(spec["hi"])
    expr = spec.get("expr")
    if expr is None:
        mid = 0.5 * (lo + hi)
        return ParamField(lambda x: mid, lo, hi)
    try:
        code = compile(str(expr), f"<{key}>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"field '{key}': cannot parse expression {expr!r}") from exc

    def fn(x):
        x = np.asarray(x, dtype=float)
        ns = dict(_EXPR_NS, x0=x[0], x1=x[1], r=np.hypot(x[0], x[1]))
        return eval(code, {"__builtins__": {}}, ns)

    return ParamField(fn, lo, hi)


def _req(p, key, kind):
    if key not in p:
        raise ConfigError(f"field 'process.{key}': required for kind {kind}")
    return p[key]


def build_family(p: dict, name: str = "process") -> ProcessFamily:
    kind = p.get("kind")
    if kind == "brownian":
        f = fam.brownian(float(p.get("c", 1.0)), name=name)
    elif kind == "stable":
        f = fam.stable(float(_req(p, "alpha", kind)), float(p.get("beta", 1.0)), float(p.get("c", 0.0)), name=name)
    elif kind == "stable_like":
        f = fam.stable_like(param_field(_req(p, "alpha", kind), "alpha"), param_field(p.get("beta", 1.0), "beta"),
                            name=name, param_grid=p.get("param_grid"))
    elif kind == "regvar":
        f = fam.power_tail(float(_req(p, "delta", kind)), float(p.get("gamma", 0.0)), float(p.get("beta", 1.0)),
                           p.get("floor"), name=name)
    elif kind == "radial_density":
        f = _radial_density(p, name)
    elif kind == "subordinated":
        base = str(_req(p, "base", kind))
        code = compile(base, "<base>", "eval")
        f = fam.subordinated(lambda rho: eval(code, {"__builtins__": {}}, dict(_EXPR_NS, rho=rho)),
                             param_field(_req(p, "alpha", kind), "alpha"), name=name,
                             threshold=float(p.get("threshold", 1.0)))
    else:
        raise ConfigError(f"field 'process.kind': unknown kind {kind!r}")
    if "cut_ball" in p:
        f = cut_ball(f, float(p["cut_ball"]))
    if "rings" in p:
        f = fam.with_rings(f, [tuple(map(float, r)) for r in p["rings"]])
    return f


def _radial_density(p, name):
    shape = p.get("shape", "annulus")
    if shape == "annulus":
        return fam.annulus(float(p.get("inner", 1.0)), float(p.get("outer", 2.0)), float(p.get("level", 1.0)),
                           float(p.get("c", 0.0)), name=name)
    if shape == "log_power":
        vals = {k: p.get(k, d) for k, d in (("alpha", None), ("beta", 1.0), ("gamma", 0.0))}
        if vals["alpha"] is None:
            raise ConfigError("field 'process.alpha': required for shape log_power")
        fields = {k: param_field(v, k) if isinstance(v, dict) else float(v) for k, v in vals.items()}
        return fam.log_power(fields["alpha"], fields["beta"], fields["gamma"], name=name)
    raise ConfigError(f"field 'process.shape': expected annulus or log_power, got {shape!r}")


def cut_ball(family: ProcessFamily, r: float) -> ProcessFamily:
    """Remove the jump density inside B_r (constant families only)."""
    from dataclasses import replace
    if family.triplet is None or family.state_mode != "constant":
        raise ConfigError("cut_ball applies to x-independent processes")
    trip = family.triplet
    new = replace(trip, jump_density=trip.jump_density.without_ball(r))
    return ProcessFamily(f"{family.name}", new, kind="radial_density", meta=dict(family.meta, cut_ball=r))


def _grid(spec, default: GridSpec) -> GridSpec:
    if spec is None:
        return default
    if isinstance(spec, dict):
        return GridSpec(float(spec["lo"]), float(spec["hi"]), int(spec.get("points", default.points)))
    lo, hi, *rest = spec
    return GridSpec(float(lo), float(hi), int(rest[0]) if rest else default.points)


def criteria_config(numeric: dict) -> CriteriaConfig:
    base = CriteriaConfig()
    bands = numeric.get("bands") or {}
    return CriteriaConfig(
        origin_grid=_grid(numeric.get("origin_grid"), base.origin_grid),
        infinity_grid=_grid(numeric.get("infinity_grid"), base.infinity_grid),
        bands=DecisionBands(float(bands.get("eps_a", base.bands.eps_a)), float(bands.get("eps_b", base.bands.eps_b)),
                            float(bands.get("residual", base.bands.residual_ceiling))),
        corroborate_a=float(numeric.get("corroborate_a", base.corroborate_a)),
        corroborate_b=float(numeric.get("corroborate_b", base.corroborate_b)),
        use_declared=bool(numeric.get("use_declared", base.use_declared)))


def sim_config(mc: dict, seed: int = 0) -> SimConfig:
    times = mc.get("probe_times")
    if isinstance(times, dict):
        times = tuple(np.geomspace(float(times["start"]), float(times["stop"]), int(times["count"])).tolist())
    horizon = float(mc.get("horizon", times[-1] if times else 1000.0))
    return SimConfig(horizon=horizon, step=mc.get("step"), small_jump_cutoff=float(mc.get("small_jump_cutoff", 0.01)),
                     path_count=int(mc.get("paths", 1000)), seed=int(mc.get("seed", seed)),
                     probe_radius=float(mc.get("probe_radius", 1.0)), probe_times=times,
                     probe_count=int(mc.get("probe_count", 32)), start=tuple(mc.get("start", (0.0, 0.0))))


def dump(obj: Any) -> str:
    return yaml.safe_dump(obj, sort_keys=False)
