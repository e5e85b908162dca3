"""Run configuration: a TOML document layered over built-in defaults.

Profiles, maps and Orlicz functions are declared by name in their own
tables and referenced from the per-check tables, so a user file only has
to mention what it changes.
"""

from __future__ import annotations

import copy
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import DomainError
from .maps import LinearMap, PowerMap, RadialStretchMap, identity_map
from .profiles import OrliczFunction, StepProfile
from .quadrature import QuadratureConfig

DEFAULT_TOML = """
seed = 20240917

[quadrature]
abs_tol = 1e-10
rel_tol = 1e-10
max_subdivisions = 500
tail_cutoff = 1099511627776.0

[checks]
include = "all"

[profiles.example1]
scheme = "example1"
k_max = 40

[profiles.example4]
scheme = "example4"
k_max = 40

[maps.example1_radial]
kind = "radial"
profile = "example1"
dim = 3

[maps.example4_radial]
kind = "radial"
profile = "example4"
dim = 3

[maps.power1]
kind = "power"
K = 1.0

[maps.power2]
kind = "power"
K = 2.0

[maps.power4]
kind = "power"
K = 4.0

[orlicz.t2]
kind = "power"
p = 2.0

[orlicz.t3]
kind = "power"
p = 3.0

[checks.beta_mass_bound]
profile = "example1"
samples = 200

[checks.example1_ball_mean]
profile = "example1"
eps_min = 0.02
eps_max = 0.3
per_decade = 20
bound = 1.5
slack = 1e-3

[checks.planar_ball_mean]
profile = "example1"
eps_min = 0.02
eps_max = 0.3
per_decade = 20
slack = 1e-3

[checks.cap_area]
eps = [0.1, 0.5, 1.0]
rtol = 1e-4

[checks.beta_cube_integral]
profile = "example1"
lower = "1/2"
bound = "3/2"

[checks.calderon_classification]
cases = [
    { orlicz = "t3", n = 3, expect = "satisfied" },
    { orlicz = "t2", n = 3, expect = "violated" },
    { orlicz = "t3", n = 4, expect = "violated" },
]

[checks.holder_exponent_formula]
C = 1.5
n = 3
atol = 1e-5

[checks.inner_dilatation_field]
map = "example1_radial"
samples = 200
rtol = 1e-3

[checks.conformal_invariance]
maps = ["example1_radial", "power2"]
samples = 100
rtol = 1e-3

[checks.geometric_inclusions]
samples = 10000
inclusion_eps = 0.3
lower_bound_r = 0.4
reflection_radii = [0.1, 0.2, 0.4]
profile = "example1"

[checks.limsup_verdicts]
eps0 = 0.25
example4_profile = "example4"

[checks.empirical_holder]
maps = ["power1", "power2", "power4"]
lipschitz_map = "example4_radial"
radius = 0.5
pairs = 2000
atol = 0.02

[checks.poisson_suite]
points = 20
radius_max = 0.99
unit_atol = 1e-8
coordinate_atol = 1e-6
mean_atol = 1e-8

[checks.poisson_normalization]
points = 8
atol = 1e-8

[checks.i_alpha_law]
alphas = [0.25, 0.5, 0.75]
r_grid = [0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999]
slope_atol = 0.05
center_atol = 1e-6

[checks.privalov]
alpha = 0.5
r_grid = [0.5, 0.75, 0.875, 0.9375, 0.96875, 0.984375, 0.9921875, 0.995]
ratio_bound = 3.0
planar_r_grid = [0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999]
planar_slope = 1.0
planar_slope_atol = 0.1

[checks.beltrami_identities]
ex1_points = [[0.1, 0.0], [0.05, 0.05], [-0.2, 0.1], [0.0, -0.3], [0.4, 0.25]]
mu_atol = 1e-6
ex3_alpha = 0.3
ex3_beta = 0.6
ex3_k = 0.5
samples = 1000
growth_r0 = 0.1
chi_scale = 0.3
chi_exponent = 0.5
"""


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def defaults() -> dict:
    return tomllib.loads(DEFAULT_TOML)


def load_config(path=None, overrides=()) -> dict:
    """Defaults, then the TOML file at ``path``, then ``key.path=value`` overrides."""
    cfg = defaults()
    if path is not None:
        with open(Path(path), "rb") as fh:
            cfg = _merge(cfg, tomllib.load(fh))
    for item in overrides:
        cfg = _merge(cfg, parse_override(item))
    return cfg


def parse_override(item: str) -> dict:
    """Turn ``a.b.c=value`` into a nested dict; the value is read as a TOML value, falling back to a string."""
    if "=" not in item:
        raise DomainError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    parts = [p.strip() for p in key.split(".") if p.strip()]
    if not parts:
        raise DomainError(f"override {item!r} has an empty key")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    node: dict = {parts[-1]: value}
    for part in reversed(parts[:-1]):
        node = {part: node}
    return node


def quadrature_config(cfg: dict) -> QuadratureConfig:
    return QuadratureConfig(**cfg.get("quadrature", {}))


def check_params(cfg: dict, check_id: str) -> dict:
    return dict(cfg.get("checks", {}).get(check_id, {}))


def build_profile(cfg: dict, name: str) -> StepProfile:
    try:
        entry = cfg["profiles"][name]
    except KeyError:
        raise DomainError(f"unknown profile {name!r}") from None
    scheme = entry.get("scheme", "custom")
    if scheme == "example1":
        return StepProfile.example1(int(entry.get("k_max", 40)))
    if scheme == "example4":
        return StepProfile.example4(int(entry.get("k_max", 40)))
    if scheme == "identity":
        return StepProfile.identity()
    if scheme == "custom":
        return StepProfile.from_steps(entry["breakpoints"], entry["values"])
    raise DomainError(f"profile {name!r} has unknown scheme {scheme!r}")


def build_map(cfg: dict, name: str):
    try:
        entry = cfg["maps"][name]
    except KeyError:
        raise DomainError(f"unknown map {name!r}") from None
    kind = entry.get("kind")
    if kind == "radial":
        return RadialStretchMap(build_profile(cfg, entry["profile"]), int(entry.get("dim", 3)), label=name)
    if kind == "power":
        return PowerMap(float(entry["K"]))
    if kind == "linear":
        return LinearMap(entry["matrix"], label=name)
    if kind == "identity":
        return identity_map(int(entry.get("dim", 2)))
    raise DomainError(f"map {name!r} has unknown kind {kind!r}")


def build_orlicz(cfg: dict, name: str) -> OrliczFunction:
    try:
        entry = cfg["orlicz"][name]
    except KeyError:
        raise DomainError(f"unknown Orlicz function {name!r}") from None
    kind = entry.get("kind")
    if kind == "power":
        return OrliczFunction.power(float(entry["p"]))
    if kind == "power_log":
        return OrliczFunction.power_log(float(entry["p"]))
    if kind == "exponential":
        return OrliczFunction.exponential()
    raise DomainError(f"Orlicz function {name!r} has unknown kind {kind!r}")
