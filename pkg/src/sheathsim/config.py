"""Run configuration: flat key = value text, validated all at once.

The format is deliberately minimal: one `key = value` per line, `#` starts
a comment, no sections.  Parsing collects every problem it finds (with line
numbers) before raising, so a config file can be fixed in one pass.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .euler_limit import BoundaryMode, FluidState
from .euler_poisson import PlasmaParams
from .grid import Grid1D

MODES = ("profile", "limit", "simulate", "converge", "entropy")
PRESETS = ("flat", "bump", "pulse")


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected a boolean")


def _parse_eps_list(raw: str):
    vals = [float(tok) for tok in raw.replace(",", " ").split()]
    if not vals:
        raise ValueError("expected at least one value")
    return vals


# key -> (converter, default).  None default means "derived later".
_KEYS = {
    "mode": (str, None),
    "ion_temp": (float, 1.0),
    "epsilon": (float, 0.02),
    "wall_potential": (float, -0.5),
    "bc": (str, "wall"),
    "u_b": (float, -0.3),
    "domain_length": (float, 1.0),
    "limit_cells": (int, 512),
    "interior_cells": (int, 256),
    "grading_ratio": (float, 1.1),
    "first_cell_scale": (float, 1.0 / 24.0),
    "cfl": (float, 0.4),
    "t_end": (float, 0.2),
    "samples": (int, 20),
    "expansion_order": (int, 1),
    "well_prepared": (_parse_bool, False),
    "preset": (str, "bump"),
    "amplitude": (float, 0.1),
    "center": (float, None),
    "width": (float, None),
    "output_dir": (str, "."),
    "eps_list": (_parse_eps_list, None),
    "gamma": (float, 1.0),
    "wall_value": (float, 1.0),
    "layer_tol": (float, 1e-10),
    "layer_nodes": (int, 4097),
}


@dataclass
class RunConfig:
    """Validated settings for one pipeline invocation."""

    mode: str
    ion_temp: float = 1.0
    epsilon: float = 0.02
    wall_potential: float = -0.5
    bc: str = "wall"
    u_b: float = -0.3
    domain_length: float = 1.0
    limit_cells: int = 512
    interior_cells: int = 256
    grading_ratio: float = 1.1
    first_cell_scale: float = 1.0 / 24.0
    cfl: float = 0.4
    t_end: float = 0.2
    samples: int = 20
    expansion_order: int = 1
    well_prepared: bool = False
    preset: str = "bump"
    amplitude: float = 0.1
    center: float = 0.0
    width: float = 0.0
    output_dir: str = "."
    eps_list: list = field(default_factory=list)
    gamma: float = 1.0
    wall_value: float = 1.0
    layer_tol: float = 1e-10
    layer_nodes: int = 4097

    def boundary_mode(self) -> BoundaryMode:
        if self.bc == "outflow":
            return BoundaryMode(kind="outflow", u_b=self.u_b)
        return BoundaryMode()

    def plasma_params(self, epsilon: float | None = None) -> PlasmaParams:
        return PlasmaParams(ion_temp=self.ion_temp,
                            epsilon=self.epsilon if epsilon is None else epsilon,
                            wall_potential=self.wall_potential,
                            bc=self.boundary_mode(),
                            domain_length=self.domain_length)

    def limit_grid(self) -> Grid1D:
        return Grid1D.uniform(self.domain_length, self.limit_cells)

    def full_grid(self, epsilon: float | None = None) -> Grid1D:
        eps = self.epsilon if epsilon is None else epsilon
        return Grid1D.graded(self.domain_length,
                             first_width=self.first_cell_scale * eps,
                             ratio=self.grading_ratio,
                             interior_width=self.domain_length / self.interior_cells)

    def initial_state(self, grid: Grid1D) -> FluidState:
        x = grid.centers
        n = np.ones_like(x)
        u = np.zeros_like(x)
        if self.preset != "flat":
            shape = np.exp(-((x - self.center) / self.width) ** 2)
            if self.preset == "bump":
                n = n + self.amplitude * shape
            else:
                u = -self.amplitude * shape
        return FluidState(n=n, u=u, t=0.0)


def parse_config(text: str, default_mode: str | None = None) -> RunConfig:
    """Parse and validate; raises ConfigError listing every finding.

    When the text has no mode line and default_mode is given (the CLI passes
    its subcommand), that mode is used instead of erroring.
    """
    errors = []
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value")
            continue
        key, _, rest = line.partition("=")
        key = key.strip()
        rest = rest.strip()
        if key not in _KEYS:
            errors.append(f"line {lineno}: unknown key '{key}'")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key '{key}'")
            continue
        conv = _KEYS[key][0]
        try:
            values[key] = conv(rest)
            lines[key] = lineno
        except ValueError:
            errors.append(f"line {lineno}: {key}: cannot parse '{rest}'")

    def where(key):
        return f"line {lines[key]}: " if key in lines else ""

    def check(cond, key, message):
        if not cond:
            errors.append(f"{where(key)}{key}: {message}")

    mode = values.get("mode", default_mode)
    if mode is None:
        errors.append("mode: required")
    elif mode not in MODES:
        check(False, "mode", f"must be one of {', '.join(MODES)}")
        mode = None

    cfg = RunConfig(mode=mode or "profile")
    for key, (_, default) in _KEYS.items():
        if key in ("mode", "center", "width", "eps_list"):
            continue
        setattr(cfg, key, values.get(key, default))
    cfg.eps_list = values.get("eps_list", [])
    cfg.center = values.get("center", cfg.domain_length / 2.0)
    cfg.width = values.get("width", cfg.domain_length / 10.0)

    check(cfg.ion_temp > 0.0, "ion_temp", "must be positive")
    check(0.0 < cfg.epsilon <= 1.0, "epsilon", "must be in (0,1]")
    check(cfg.domain_length > 0.0, "domain_length", "must be positive")
    check(cfg.limit_cells >= 16, "limit_cells", "must be at least 16")
    check(cfg.interior_cells >= 16, "interior_cells", "must be at least 16")
    check(1.0 < cfg.grading_ratio <= 1.2, "grading_ratio",
          "must be in (1, 1.2]")
    check(cfg.first_cell_scale > 0.0, "first_cell_scale", "must be positive")
    check(0.0 < cfg.cfl <= 0.9, "cfl", "must be in (0, 0.9]")
    check(cfg.t_end > 0.0, "t_end", "must be positive")
    check(cfg.samples >= 2, "samples", "must be at least 2")
    check(cfg.expansion_order in (0, 1), "expansion_order", "must be 0 or 1")
    check(cfg.preset in PRESETS, "preset",
          f"must be one of {', '.join(PRESETS)}")
    check(cfg.width > 0.0, "width", "must be positive")
    check(cfg.gamma > 0.0, "gamma", "must be positive")
    check(cfg.layer_tol > 0.0, "layer_tol", "must be positive")
    check(cfg.layer_nodes >= 9, "layer_nodes", "must be at least 9")
    check(cfg.bc in ("wall", "outflow"), "bc", "must be wall or outflow")

    if cfg.bc == "outflow" and cfg.ion_temp > 0.0:
        check(cfg.u_b < 0.0, "u_b", "outflow speed must be negative")
        if mode == "limit":
            limit_sound = math.sqrt(cfg.ion_temp + 1.0)
            check(cfg.u_b > -limit_sound, "u_b",
                  f"must stay above -sqrt(ion_temp + 1) = {-limit_sound:.6g}")
        elif mode in ("simulate", "entropy"):
            sound = math.sqrt(cfg.ion_temp)
            check(cfg.u_b > -sound, "u_b",
                  f"must stay above -sqrt(ion_temp) = {-sound:.6g}")
    if mode in ("converge", "entropy"):
        check(cfg.bc == "wall", "bc", f"mode {mode} requires the wall boundary")
    if mode == "converge":
        if not cfg.eps_list:
            errors.append("eps_list: required when mode = converge")
        else:
            ok = all(e > 0.0 for e in cfg.eps_list)
            check(ok, "eps_list", "entries must be positive")
            if ok:
                check(len(cfg.eps_list) >= 3, "eps_list",
                      "needs at least 3 entries")
                dec = all(b < a for a, b in
                          zip(cfg.eps_list, cfg.eps_list[1:]))
                check(dec, "eps_list", "entries must be strictly decreasing")
                if cfg.domain_length > 0.0:
                    check(cfg.domain_length >= 20.0 * max(cfg.eps_list),
                          "eps_list",
                          "largest entry needs domain_length >= 20*epsilon")
    if mode in ("simulate", "entropy") and cfg.domain_length > 0.0:
        check(cfg.domain_length >= 20.0 * cfg.epsilon, "epsilon",
              "needs domain_length >= 20*epsilon")
    if cfg.preset in ("bump", "pulse") and cfg.width > 0.0:
        check(cfg.center - 3.0 * cfg.width > 0.0, "center",
              "preset must vanish at the wall (center - 3*width > 0)")
        check(cfg.center + 3.0 * cfg.width < cfg.domain_length, "center",
              "preset must vanish at the far end (center + 3*width < "
              "domain_length)")
    parent = os.path.dirname(os.path.abspath(cfg.output_dir)) or "."
    check(os.path.isdir(parent), "output_dir",
          f"parent directory does not exist: {parent}")

    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str, default_mode: str | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), default_mode=default_mode)
