"""Monte Carlo harness: averaged imaging maps, goodness-of-fit tests against
the exact laws, and false-alarm-rate (CFAR) experiments.

Per-run seeds come from a stateless splittable scheme keyed on
(base_seed, run_index, frequency), so results are independent of execution
order and bit-identical across repeats of the same configuration.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedStatistic
from .forward import MdmSet, ScattererSet, synthesize_mdm, vectorize
from .imaging import (
    LOG_DEFAULT,
    STATISTICS,
    ImageGridSpec,
    ImageMap,
    XiVector,
    build_steering_field,
    glr_stat,
    gm_stat,
    hm_stat,
    map_values,
    rao_stat,
    steering_sets,
    wald_stat,
)
from .scene import ArrayLayout, FrequencyPlan, Position2D
from .theory import cchi2_cdf, cf_cdf, noncentrality_explicit, stat_law_from_deltas

ADAPTIVE_STATISTICS = ("glr", "rao", "wald", "gm", "hm")
KS_STATISTICS = ("mf", "ml", "na", "xi", "li")

# Asymptotic one-sample Kolmogorov-Smirnov critical factor at the 1% level.
KS_FACTOR_1PCT = 1.628


@dataclass(frozen=True)
class McConfig:
    runs: int
    base_seed: int
    statistics: tuple = ("glr", "rao", "wald", "li")
    noise_scalings: tuple = (0.1, 1.0, 10.0)
    ks_cells: tuple = ()
    ks_samples: int = 2000
    cfar_runs: int = 2000

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        for s in self.statistics:
            if s not in STATISTICS + ("xi",):
                raise ValueError(f"unknown statistic {s!r}")


@dataclass(frozen=True)
class KsResult:
    statistic: str
    probe: tuple  # (x, y)
    freq_index: int | None
    n_samples: int
    distance: float
    critical_value: float
    passed: bool


@dataclass(frozen=True)
class PfaRow:
    statistic: str
    scaling: float
    pfa: float
    std_err: float
    n_trials: int
    threshold: float
    target: float

    @property
    def within_band(self) -> bool:
        return abs(self.pfa - self.target) <= 3.0 * self.std_err


@dataclass
class McReport:
    averaged_maps: dict = field(default_factory=dict)  # name -> ImageMap
    counts: dict = field(default_factory=dict)  # name -> per-cell run counts
    ks_results: list = field(default_factory=list)
    pfa_table: list = field(default_factory=list)

    @property
    def ks_passed(self) -> int:
        return sum(r.passed for r in self.ks_results)


def ks_distance(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance against an exact cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    steps = np.arange(n + 1) / n
    return float(max(np.max(steps[1:] - f), np.max(f - steps[:-1])))


def ks_critical(n_samples: int) -> float:
    """1%-level asymptotic critical value."""
    return float(KS_FACTOR_1PCT / np.sqrt(n_samples))


# ---------------------------------------------------------------------------
# averaged maps


def run_average(
    scene: ScattererSet | None,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    noise_var,
    model: str,
    grid: ImageGridSpec,
    mc: McConfig,
    run_start: int = 0,
    n_threads: int = 1,
    log_domain: bool = True,
):
    """Per-cell arithmetic mean of each requested statistic over runs.

    Log-rendered statistics are averaged after the log, mirroring how the
    maps are displayed; pass log_domain=False to average those in linear
    scale instead. Masked cells are excluded per cell with their run counts
    tracked. Returns (maps, counts) keyed by statistic name.
    """
    field_ = build_steering_field(layout, plan, grid)
    n_cells = field_.n_cells
    stats = tuple(mc.statistics)
    sums = {s: np.zeros(n_cells) for s in stats}
    cnts = {s: np.zeros(n_cells, dtype=int) for s in stats}
    logged = {s: log_domain and s in LOG_DEFAULT for s in stats}

    def one_run(run: int):
        mdm = synthesize_mdm(
            layout, scene, plan, noise_var, model, mc.base_seed, run_index=run
        )
        out = {}
        for s in stats:
            out[s] = map_values(field_, s, mdm, log=logged[s])
        return out

    runs = range(run_start, run_start + mc.runs)
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(one_run, runs))
    else:
        results = [one_run(r) for r in runs]
    for res in results:  # deterministic reduction in run order
        for s in stats:
            vals, mask, _ = res[s]
            sums[s] += np.where(mask, 0.0, vals)
            cnts[s] += ~mask
    maps, counts = {}, {}
    shape = grid.shape
    for s in stats:
        valid = cnts[s] > 0
        mean = np.divide(sums[s], cnts[s], out=np.zeros(n_cells), where=valid)
        maps[s] = ImageMap(
            spec=grid,
            values=mean.reshape(shape),
            statistic_name=s,
            log_applied=logged[s],
            mask=(~valid).reshape(shape),
        )
        counts[s] = cnts[s].reshape(shape)
    return maps, counts


# ---------------------------------------------------------------------------
# sampling statistics at a single probed point


def _stat_from_mdm(mdm: MdmSet, steers, statistic: str, freq_index, noise_var_assumed):
    freqs = range(mdm.n_freq) if freq_index is None else [freq_index]
    num = {}
    resid = {}
    cap = {}
    for ell in freqs:
        x = vectorize(mdm.matrices[ell])
        b = steers[ell].b
        bn = steers[ell].b_norm_sq
        c = abs(np.vdot(b, x)) ** 2
        n = c / bn
        cap[ell] = c
        num[ell] = n
        resid[ell] = float(np.real(np.vdot(x, x))) - n
    if statistic == "mf":
        return sum(cap.values())
    if statistic == "ml":
        return sum(cap[ell] / steers[ell].b_norm_sq ** 2 for ell in freqs)
    if statistic == "na":
        return sum(num[ell] / noise_var_assumed[ell] for ell in freqs)
    if statistic == "li":
        return float(np.prod([1.0 / resid[ell] for ell in freqs]))
    xiv = XiVector(tuple(num[ell] / resid[ell] for ell in freqs))
    if statistic == "xi":
        return xiv.xi[0]
    return {"glr": glr_stat, "rao": rao_stat, "wald": wald_stat, "gm": gm_stat, "hm": hm_stat}[
        statistic
    ](xiv)


def sample_statistic(
    scene: ScattererSet | None,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    noise_var,
    model: str,
    probe: Position2D,
    statistic: str,
    n_samples: int,
    base_seed: int,
    freq_index: int | None = None,
    run_start: int = 0,
    noise_var_assumed=None,
) -> np.ndarray:
    """Monte Carlo draws of one statistic at a fixed probed point, each from
    a fresh synthesized realization."""
    steers = steering_sets(layout, plan, probe)
    assumed = noise_var_assumed if noise_var_assumed is not None else noise_var
    out = np.empty(n_samples)
    for i in range(n_samples):
        mdm = synthesize_mdm(
            layout, scene, plan, noise_var, model, base_seed, run_index=run_start + i
        )
        out[i] = _stat_from_mdm(mdm, steers, statistic, freq_index, assumed)
    return out


# ---------------------------------------------------------------------------
# goodness of fit


def ks_experiment(
    scene: ScattererSet | None,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    noise_var,
    model: str,
    probe: Position2D,
    statistic: str,
    n_samples: int,
    base_seed: int,
    freq_index: int | None = None,
) -> KsResult:
    """One-sample KS test of Monte Carlo draws against the exact law."""
    if statistic not in KS_STATISTICS:
        raise UnsupportedStatistic(f"no closed-form law to test for {statistic!r}")
    if statistic in ("mf", "ml", "xi", "li") and freq_index is None and plan.n_freq > 1:
        raise ValueError(f"{statistic!r} needs freq_index with multiple frequencies")
    samples = sample_statistic(
        scene, layout, plan, noise_var, model, probe, statistic, n_samples, base_seed, freq_index
    )
    if scene is None:
        n_l = plan.n_freq
        dn = np.zeros(n_l)
        dd = np.zeros(n_l)
    else:
        dn, dd = noncentrality_explicit(scene, layout, plan, model, noise_var, probe)
    bnsq = [s.b_norm_sq for s in steering_sets(layout, plan, probe)]
    law = stat_law_from_deltas(
        statistic, dn, dd, noise_var, bnsq, layout.n_total, freq_index
    )
    if statistic == "xi":
        cdf = lambda x: cf_cdf(law, x)
    elif statistic == "li":
        # invert the reciprocal: the scaled residual follows the chi-square law
        ell = freq_index if freq_index is not None else 0
        chi_law = law[0]
        samples = 1.0 / (noise_var[ell] * samples)
        cdf = lambda x: cchi2_cdf(chi_law, x)
    else:
        cdf = lambda x: cchi2_cdf(law, x)
    dist = ks_distance(samples, cdf)
    crit = ks_critical(n_samples)
    return KsResult(
        statistic=statistic,
        probe=(probe.x, probe.y),
        freq_index=freq_index,
        n_samples=n_samples,
        distance=dist,
        critical_value=crit,
        passed=bool(dist < crit),
    )


# ---------------------------------------------------------------------------
# CFAR


def cfar_experiment(
    layout: ArrayLayout,
    plan: FrequencyPlan,
    probe: Position2D,
    noise_var_base,
    scalings,
    statistic: str,
    runs: int,
    base_seed: int,
    target_pfa: float = 0.1,
    calibration_runs: int | None = None,
):
    """Empirical false-alarm rates under rescaled noise power.

    The threshold is calibrated once, as the empirical (1 - target) quantile
    of the statistic over noise-only data at the base noise level; exceedance
    rates are then measured on fresh noise-only batches per scaling. The
    known-noise statistic keeps using the *base* variances, which makes it a
    negative control: its false-alarm rate tracks the actual noise level.
    """
    if statistic not in ADAPTIVE_STATISTICS + ("na",):
        raise ValueError(f"CFAR experiment undefined for {statistic!r}")
    if not 0 < target_pfa < 1:
        raise ValueError("target_pfa must be in (0, 1)")
    cal_runs = calibration_runs if calibration_runs is not None else 2 * runs
    base = [float(v) for v in noise_var_base]
    cal = sample_statistic(
        None, layout, plan, base, "BA", probe, statistic, cal_runs, base_seed,
        noise_var_assumed=base,
    )
    threshold = float(np.quantile(cal, 1.0 - target_pfa))
    rows = []
    offset = cal_runs
    for scaling in scalings:
        scaled = [v * float(scaling) for v in base]
        vals = sample_statistic(
            None, layout, plan, scaled, "BA", probe, statistic, runs, base_seed,
            run_start=offset, noise_var_assumed=base,
        )
        offset += runs
        pfa = float(np.mean(vals > threshold))
        se = float(np.sqrt(target_pfa * (1.0 - target_pfa) / runs))
        rows.append(
            PfaRow(
                statistic=statistic,
                scaling=float(scaling),
                pfa=pfa,
                std_err=se,
                n_trials=runs,
                threshold=threshold,
                target=target_pfa,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# report assembly


def mc_report(
    scene: ScattererSet | None,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    noise_var,
    model: str,
    grid: ImageGridSpec,
    mc: McConfig,
    with_maps: bool = False,
    n_threads: int = 1,
) -> McReport:
    """Full Monte Carlo summary for one scenario.

    KS experiments run for every requested testable statistic at every probed
    cell (per frequency where the law is per-frequency); CFAR experiments run
    for the requested adaptive statistics, with the known-noise statistic
    included as a negative control when requested. Identical inputs yield a
    bit-identical report.
    """
    report = McReport()
    if with_maps:
        report.averaged_maps, report.counts = run_average(
            scene, layout, plan, noise_var, model, grid, mc, n_threads=n_threads
        )
    per_freq = [s for s in mc.statistics if s in ("mf", "ml", "xi", "li")]
    summed = [s for s in mc.statistics if s == "na"]
    lane = 0
    for probe in mc.ks_cells:
        for stat in per_freq + summed:
            freq_list = range(plan.n_freq) if stat in per_freq else [None]
            for ell in freq_list:
                report.ks_results.append(
                    ks_experiment(
                        scene, layout, plan, noise_var, model, probe, stat,
                        mc.ks_samples, base_seed=mc.base_seed + lane, freq_index=ell,
                    )
                )
                lane += 1
    cfar_stats = [s for s in mc.statistics if s in ADAPTIVE_STATISTICS]
    if "na" in mc.statistics:
        cfar_stats.append("na")
    if cfar_stats:
        probe = (
            mc.ks_cells[0]
            if mc.ks_cells
            else Position2D(
                0.5 * (grid.x_min + grid.x_max), 0.5 * (grid.y_min + grid.y_max)
            )
        )
        for k, stat in enumerate(cfar_stats):
            report.pfa_table.extend(
                cfar_experiment(
                    layout, plan, probe, noise_var, mc.noise_scalings, stat,
                    mc.cfar_runs, base_seed=mc.base_seed + 10_000 + k,
                )
            )
    return report
