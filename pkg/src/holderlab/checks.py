"""Named numerical checks run by the command-line driver.

Each check reads its parameters from the run configuration, records the
quantities it measured next to the values they are compared against, and
returns optional sweep tables for CSV output.  Expected values carry a
provenance tag: ``published`` (a value stated in the source text),
``derived`` (computed from stated formulas) or ``trivial``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import beltrami as bl
from .conditions import (
    LimsupVerdict,
    QField,
    holder_exponent_theorem1,
    limsup_condition,
    reflection_factor_bound,
    sup_ball_mean,
    empirical_holder,
)
from .config import build_map, build_orlicz, build_profile, check_params, quadrature_config
from .dilatation import conformal_invariance_check, distortion_from_jacobian
from .geometry import inclusion_plus_minus, lower_norm_bound, random_unit_vectors
from .harmonic import (
    BoundaryData,
    i_alpha,
    i_alpha_at_center,
    loglog_slope,
    poisson_extend,
    privalov_check,
)
from .maps import default_step, guard_band
from .profiles import CalderonVerdict, calderon_check, integrate_beta_power
from .quadrature import cap_indicator_area, integrate_sphere

PUBLISHED = "published"
DERIVED = "derived"
TRIVIAL = "trivial"


@dataclass
class Table:
    """A sweep table with a hint for how to plot it."""

    name: str
    columns: list
    rows: list
    x: str
    y: list
    logx: bool = False
    logy: bool = False
    title: str = ""


@dataclass
class Outcome:
    measured: list = field(default_factory=list)
    expected: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    tables: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def record(self, name, value, bound, provenance, ok, bound_name=None):
        self.measured.append((name, value))
        self.expected.append((bound_name or name, bound, provenance))
        if not ok:
            self.failures.append(name)

    @property
    def passed(self):
        return not self.failures


@dataclass(frozen=True)
class Context:
    config: dict
    seed: int

    def params(self, check_id):
        return check_params(self.config, check_id)

    @property
    def quadrature(self):
        return quadrature_config(self.config)


@dataclass(frozen=True)
class Check:
    check_id: str
    summary: str
    run: Callable[[Context], Outcome]


REGISTRY: dict[str, Check] = {}


def register(check_id, summary):
    def wrap(fn):
        REGISTRY[check_id] = Check(check_id, summary, fn)
        return fn
    return wrap


def _boundary_points(n, count=5):
    pts = [np.eye(n)[-1], -np.eye(n)[-1], np.eye(n)[0]]
    if n == 3:
        pts += [np.array([0.6, 0.0, 0.8]), np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)]
    else:
        pts += [np.array([0.6, 0.8]), np.array([-1.0, 1.0]) / math.sqrt(2.0)]
    return pts[:count]


@register("beta_mass_bound", "integral of beta over [a, 1] is at most 2(1 - a), exact arithmetic")
def _beta_mass_bound(ctx: Context) -> Outcome:
    p = ctx.params("beta_mass_bound")
    profile = build_profile(ctx.config, p["profile"])
    count = int(p["samples"])
    rng = np.random.default_rng(ctx.seed)
    grid = [s.lo for s in profile.spikes][: count // 4] + [s.hi for s in profile.spikes][: count // 4]
    while len(grid) < count:
        grid.append(Fraction(int(rng.integers(1, 2 ** 30)), 2 ** 30))
    worst = Fraction(0)
    worst_a = grid[0]
    rows = []
    for a in grid:
        ratio = integrate_beta_power(profile, 1, 0, a, 1) / (1 - a)
        rows.append([float(a), float(ratio)])
        if ratio > worst:
            worst, worst_a = ratio, a
    out = Outcome()
    out.record("max_ratio_to_1_minus_a", float(worst), 2.0, PUBLISHED, worst <= 2, "ratio_upper_bound")
    out.measured.append(("worst_a", float(worst_a)))
    out.measured.append(("samples", len(grid)))
    rows.sort()
    out.tables.append(Table("ratio", ["a", "ratio"], rows, "a", ["ratio"], title="mean of beta over [a, 1]"))
    return out


def _ball_mean_sweep(ctx, check_id, n, bound, provenance):
    p = ctx.params(check_id)
    Q = QField.from_profile(build_profile(ctx.config, p["profile"]), n)
    cfg = ctx.quadrature
    out = Outcome()
    columns = ["eps"]
    series = []
    best = 0.0
    for i, z in enumerate(_boundary_points(n)):
        res = sup_ball_mean(Q, z, float(p["eps_max"]), float(p["eps_min"]), int(p["per_decade"]), cfg)
        columns.append(f"mean_point{i}")
        series.append(res.values)
        out.measured.append((f"sup_point{i}", res.value))
        best = max(best, res.value)
    limit = bound + float(p["slack"])
    out.record("sup_ball_mean", best, limit, provenance, best <= limit, "sup_upper_bound")
    rows = [[e, *vals] for e, *vals in zip(res.eps, *series)]
    out.tables.append(Table("sweep", columns, rows, "eps", columns[1:], logx=True,
                            title=f"ball means of beta, n={n}"))
    return out


@register("example1_ball_mean", "sup of the ball mean of the spiked profile near the sphere, n = 3")
def _example1_ball_mean(ctx):
    bound = float(ctx.params("example1_ball_mean").get("bound", 1.5))
    return _ball_mean_sweep(ctx, "example1_ball_mean", 3, bound, PUBLISHED)


@register("planar_ball_mean", "sup of the ball mean of the spiked profile near the circle, n = 2")
def _planar_ball_mean(ctx):
    return _ball_mean_sweep(ctx, "planar_ball_mean", 2, 6.0 / math.pi, PUBLISHED)


@register("cap_area", "area of the sphere inside B(zeta, eps) equals pi eps^2")
def _cap_area(ctx):
    p = ctx.params("cap_area")
    zeta = np.array([0.0, 0.6, 0.8])
    out = Outcome()
    rtol = float(p["rtol"])
    for eps in p["eps"]:
        area = cap_indicator_area(zeta, float(eps), ctx.quadrature).require("cap area")
        exact = math.pi * eps * eps
        rel = abs(area - exact) / exact
        out.record(f"relative_error_eps{eps:g}", rel, rtol, PUBLISHED, rel < rtol, f"relative_error_bound_eps{eps:g}")
    return out


@register("beta_cube_integral", "integral of beta^3 over [1/2, 1] is at most 3/2, exact arithmetic")
def _beta_cube(ctx):
    p = ctx.params("beta_cube_integral")
    profile = build_profile(ctx.config, p["profile"])
    lower, bound = Fraction(p["lower"]), Fraction(p["bound"])
    value = integrate_beta_power(profile, 3, 0, lower, 1)
    out = Outcome()
    out.record("integral", float(value), float(bound), PUBLISHED, value <= bound, "upper_bound")
    out.measured.append(("integral_exact", str(value)))
    return out


@register("calderon_classification", "convergence of the Calderon integral for power functions")
def _calderon(ctx):
    p = ctx.params("calderon_classification")
    out = Outcome()
    for case in p["cases"]:
        phi = build_orlicz(ctx.config, case["orlicz"])
        n = int(case["n"])
        got = calderon_check(phi, n, ctx.quadrature)
        want = CalderonVerdict(case["expect"])
        name = f"{case['orlicz']}_n{n}"
        out.record(name, got.verdict.value, want.value, DERIVED, got.verdict is want)
    return out


@register("holder_exponent_formula", "closed-form Hölder exponent from a ball-mean bound")
def _holder_formula(ctx):
    p = ctx.params("holder_exponent_formula")
    C, n = float(p["C"]), int(p["n"])
    got = holder_exponent_theorem1(C, n)
    # independent oracle: 4 pi log 2 / ((4/3) pi 65 * 16 C) for n = 3
    oracle = math.sqrt(3.0 * math.log(2.0) / (65.0 * 16.0 * C)) if n == 3 else got
    out = Outcome()
    out.record("alpha", got, oracle, DERIVED, abs(got - oracle) <= float(p["atol"]))
    return out


def _clear_radii(profile, rng, count, band):
    spikes = profile.spikes
    radii = [float(s.lo + s.hi) / 2 for s in spikes if float(s.hi - s.lo) > 4 * band]
    while len(radii) < count:
        r = float(rng.uniform(0.05, 0.999))
        if not profile.near_breakpoint(r, band):
            radii.append(r)
    return np.array(radii[:count])


@register("inner_dilatation_field", "K_I of the radial stretch map equals beta(|x|)")
def _ki_field(ctx):
    p = ctx.params("inner_dilatation_field")
    m = build_map(ctx.config, p["map"])
    rng = np.random.default_rng(ctx.seed)
    band = guard_band(default_step(np.ones(m.dim)))
    radii = _clear_radii(m.profile, rng, int(p["samples"]), band)
    dirs = random_unit_vectors(rng, len(radii), m.dim)
    worst = 0.0
    rows = []
    for r, u in zip(radii, dirs):
        x = r * u
        k = distortion_from_jacobian(m.jacobian(x, numeric=True), x).k_inner
        b = float(m.profile(r))
        rel = abs(k - b) / b
        worst = max(worst, rel)
        rows.append([r, k, b])
    out = Outcome()
    rtol = float(p["rtol"])
    out.record("max_relative_deviation", worst, rtol, PUBLISHED, worst < rtol, "relative_deviation_bound")
    out.measured.append(("spike_samples", int(sum(1 for row in rows if row[2] > 1))))
    rows.sort()
    out.tables.append(Table("field", ["r", "k_inner", "beta"], rows, "r", ["k_inner", "beta"], logy=True,
                            title="inner dilatation along sampled radii"))
    return out


@register("conformal_invariance", "K_I is unchanged by the inversion extension")
def _conformal(ctx):
    p = ctx.params("conformal_invariance")
    out = Outcome()
    rtol = float(p["rtol"])
    for name in p["maps"]:
        dev = conformal_invariance_check(build_map(ctx.config, name), int(p["samples"]), ctx.seed)
        out.record(f"{name}_max_relative_deviation", dev, rtol, PUBLISHED, dev < rtol,
                   f"{name}_relative_deviation_bound")
    return out


@register("geometric_inclusions", "inversion swaps the half balls, |y| >= 1/2 near the sphere, reflection factor")
def _inclusions(ctx):
    p = ctx.params("geometric_inclusions")
    samples = int(p["samples"])
    zeta = np.array([0.0, 0.0, 1.0])
    out = Outcome()
    inc = inclusion_plus_minus(zeta, float(p["inclusion_eps"]), samples, ctx.seed)
    out.record("inclusion_holds", inc.passed, True, PUBLISHED, inc.passed)
    out.measured.append(("inclusion_max_scaled_distance", inc.extreme))
    low = lower_norm_bound(zeta, float(p["lower_bound_r"]), samples, ctx.seed + 1)
    out.record("min_norm", low.extreme, 0.5, PUBLISHED, low.passed, "min_norm_lower_bound")
    fields = {"Q1": QField.constant_field(1.0, 3),
              "beta": QField.from_profile(build_profile(ctx.config, p["profile"]), 3)}
    for label, Q in fields.items():
        for r in p["reflection_radii"]:
            res = reflection_factor_bound(Q, zeta, float(r), ctx.quadrature)
            out.record(f"reflection_{label}_r{r:g}_lhs", res.lhs, res.rhs, PUBLISHED, res.passed,
                       f"reflection_{label}_r{r:g}_rhs")
    return out


@register("limsup_verdicts", "limsup condition on the reflected spherical means")
def _limsup(ctx):
    p = ctx.params("limsup_verdicts")
    eps0 = float(p["eps0"])
    cfg = ctx.quadrature
    origin = np.zeros(3)
    out = Outcome()
    one = limsup_condition(QField.constant_field(1.0, 3), origin, 1.0, eps0, cfg=cfg)
    ok = one.verdict is LimsupVerdict.BOUNDED and abs(one.bound_estimate) <= 1e-12
    out.record("q1_bound", one.bound_estimate, 0.0, TRIVIAL, ok)
    four = limsup_condition(QField.constant_field(4.0, 3), origin, 1.0, eps0, cfg=cfg)
    out.record("q4_verdict", four.verdict.value, LimsupVerdict.UNBOUNDED.value, DERIVED,
               four.verdict is LimsupVerdict.UNBOUNDED)
    Q4 = QField.from_profile(build_profile(ctx.config, p["example4_profile"]), 3)
    ex4 = limsup_condition(Q4, origin, 1.0, eps0, cfg=cfg)
    out.record("example4_verdict", ex4.verdict.value, LimsupVerdict.BOUNDED.value, PUBLISHED,
               ex4.verdict is LimsupVerdict.BOUNDED)
    out.measured.append(("example4_bound_estimate", ex4.bound_estimate))
    rows = [[t, a, b, c] for t, a, b, c in zip(one.t, one.values, four.values, ex4.values)]
    out.tables.append(Table("partial_integrals", ["t", "Q1", "Q4", "example4"], rows, "t",
                            ["Q1", "Q4", "example4"], logx=True, title="partial limsup integrals"))
    return out


@register("empirical_holder", "sampled Hölder exponent of the power maps and Lipschitz bound at 0")
def _empirical_holder(ctx):
    p = ctx.params("empirical_holder")
    out = Outcome()
    atol = float(p["atol"])
    for name in p["maps"]:
        f = build_map(ctx.config, name)
        est = empirical_holder(f, np.zeros(2), 1.0 / f.K, float(p["radius"]), int(p["pairs"]), ctx.seed)
        out.record(f"{name}_exponent", est.fitted_exponent, 1.0 / f.K, PUBLISHED,
                   abs(est.fitted_exponent - 1.0 / f.K) <= atol)
    g = build_map(ctx.config, p["lipschitz_map"])
    est = empirical_holder(g, np.zeros(g.dim), 1.0, float(p["radius"]), int(p["pairs"]), ctx.seed)
    finite = math.isfinite(est.constant)
    out.record(f"{p['lipschitz_map']}_lipschitz_constant", est.constant, "finite", PUBLISHED, finite)
    return out


def _interior_points(rng, count, rmax, n=3):
    radii = np.linspace(0.0, rmax, count)
    return radii[:, None] * random_unit_vectors(rng, count, n)


@register("poisson_suite", "P[1] = 1, P[t3] = x3 and the mean-value property at the centre")
def _poisson_suite(ctx):
    p = ctx.params("poisson_suite")
    cfg = ctx.quadrature
    rng = np.random.default_rng(ctx.seed)
    pts = _interior_points(rng, int(p["points"]), float(p["radius_max"]))
    one = BoundaryData.constant(1.0, 3)
    t3 = BoundaryData.coordinate(2, 3)
    err1 = max(abs(poisson_extend(one, x, cfg) - 1.0) for x in pts)
    err3 = max(abs(poisson_extend(t3, x, cfg) - x[2]) for x in pts)
    out = Outcome()
    out.record("max_error_constant", err1, float(p["unit_atol"]), TRIVIAL, err1 < float(p["unit_atol"]),
               "constant_error_bound")
    out.record("max_error_coordinate", err3, float(p["coordinate_atol"]), TRIVIAL,
               err3 < float(p["coordinate_atol"]), "coordinate_error_bound")
    smooth = BoundaryData(lambda t: np.exp(t[:, 0]) + t[:, 1] * t[:, 2] ** 2, 3, "smooth")
    centre = poisson_extend(smooth, np.zeros(3), cfg)
    average = integrate_sphere(smooth, 3, cfg).require("sphere average") / (4.0 * math.pi)
    gap = abs(centre - average)
    out.record("mean_value_gap", gap, float(p["mean_atol"]), PUBLISHED, gap < float(p["mean_atol"]),
               "mean_value_gap_bound")
    return out


@register("poisson_normalization", "the Poisson extension of 1 is 1")
def _poisson_normalization(ctx):
    p = ctx.params("poisson_normalization")
    rng = np.random.default_rng(ctx.seed)
    pts = _interior_points(rng, int(p["points"]), 0.99)
    one = BoundaryData.constant(1.0, 3)
    err = max(abs(poisson_extend(one, x, ctx.quadrature) - 1.0) for x in pts)
    out = Outcome()
    out.record("max_abs_error", err, float(p["atol"]), TRIVIAL, err < float(p["atol"]), "abs_error_bound")
    return out


@register("i_alpha_law", "I_alpha(r) grows like (1 - r)^(alpha - 1) near the sphere")
def _i_alpha_law(ctx):
    p = ctx.params("i_alpha_law")
    grid = np.array(p["r_grid"], dtype=float)
    cfg = ctx.quadrature
    out = Outcome()
    cols, series = ["r"], []
    for a in p["alphas"]:
        vals = np.array([i_alpha(r, a, 3, cfg) for r in grid])
        slope = loglog_slope(1.0 - grid, vals)
        out.record(f"slope_alpha{a:g}", slope, a - 1.0, PUBLISHED, abs(slope - (a - 1.0)) <= float(p["slope_atol"]))
        centre = i_alpha(0.0, a, 3, cfg)
        exact = i_alpha_at_center(a, 3)
        out.record(f"centre_alpha{a:g}", centre, exact, DERIVED, abs(centre - exact) <= float(p["center_atol"]))
        cols.append(f"I_alpha{a:g}")
        series.append(vals)
    rows = [[r, *v] for r, *v in zip(grid, *series)]
    out.tables.append(Table("growth", cols, rows, "r", cols[1:], logy=True, title="I_alpha near the sphere"))
    return out


@register("privalov", "boundary Hölder data bounds (1 - r)^(1 - alpha) |grad h|; alpha = 1 breaks down")
def _privalov(ctx):
    p = ctx.params("privalov")
    cfg = ctx.quadrature
    g = BoundaryData.holder_cusp(float(p["alpha"]), 3)
    res = privalov_check(g, p["r_grid"], cfg)
    out = Outcome()
    finite = math.isfinite(res.sup_scaled)
    out.record("sup_scaled_gradient", res.sup_scaled, "finite", PUBLISHED, finite)
    out.record("last_decade_ratio", res.decade_ratio, float(p["ratio_bound"]), DERIVED,
               res.decade_ratio < float(p["ratio_bound"]), "last_decade_ratio_bound")
    planar = privalov_check(BoundaryData.dilogarithm_real_part(), p["planar_r_grid"], cfg)
    target = float(p["planar_slope"])
    out.record("planar_log_slope", planar.log_slope, target, DERIVED,
               abs(planar.log_slope - target) <= float(p["planar_slope_atol"]))
    out.measured.append(("cusp_loglog_slope", res.slope))
    out.tables.append(Table("cusp", ["r", "grad_norm", "scaled"],
                            [list(row) for row in zip(res.r, res.gradient_norm, res.scaled)],
                            "r", ["grad_norm", "scaled"], logy=True, title="gradient growth, cusp data"))
    out.tables.append(Table("planar", ["r", "grad_norm", "exact"],
                            [[r, gn, -math.log(1 - r) / r] for r, gn in zip(planar.r, planar.gradient_norm)],
                            "r", ["grad_norm", "exact"], title="gradient growth, alpha = 1"))
    return out


def _ex3_samples(rng, count, cut_margin=0.05):
    rad = np.sqrt(rng.random(count))
    ang = (math.pi - cut_margin) * (2.0 * rng.random(count) - 1.0)
    return rad * np.exp(1j * ang)


@register("beltrami_identities", "complex dilatations of the planar examples and the regularity integral")
def _beltrami(ctx):
    p = ctx.params("beltrami_identities")
    out = Outcome()
    f = bl.ex1_map()
    worst = 0.0
    for x, y in p["ex1_points"]:
        z = complex(x, y)
        numeric = bl.complex_dilatation(f, z, use_analytic=False).mu
        worst = max(worst, abs(numeric - complex(bl.ex1_mu(z))))
    atol = float(p["mu_atol"])
    out.record("ex1_mu_max_error", worst, atol, PUBLISHED, worst < atol, "ex1_mu_error_bound")
    a, b, k = float(p["ex3_alpha"]), float(p["ex3_beta"]), float(p["ex3_k"])
    g = bl.ex3_map(a, b, k)
    rng = np.random.default_rng(ctx.seed)
    top = 0.0
    for w in _ex3_samples(rng, int(p["samples"])):
        try:
            top = max(top, abs(bl.complex_dilatation(g, w).mu))
        except bl.DegeneratePointError:
            continue
    out.record("ex3_max_abs_mu", top, k + 1e-6, PUBLISHED, top <= k + 1e-6, "ex3_abs_mu_bound")
    cfg = ctx.quadrature
    r0 = float(p["growth_r0"])
    ex1 = bl.integral_growth_check(bl.ex1_mu, 0.0, 0.0, r0, cfg)
    out.record("ex1_growth_verdict", ex1.verdict.value, bl.GrowthVerdict.DIVERGENT.value, DERIVED,
               ex1.verdict is bl.GrowthVerdict.DIVERGENT)
    c, e = float(p["chi_scale"]), float(p["chi_exponent"])
    chi0 = 0.2

    def chi(z):
        return chi0 + c * bl.principal_power(z, e)

    hold = bl.integral_growth_check(chi, 0.0, chi0, r0, cfg)
    out.record("holder_chi_growth_verdict", hold.verdict.value, bl.GrowthVerdict.FINITE.value, DERIVED,
               hold.verdict is bl.GrowthVerdict.FINITE)
    out.measured.append(("holder_chi_integral", hold.value))
    return out
