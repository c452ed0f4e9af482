//! Experiment drivers: build the primitives a config describes, run the
//! experiment, and assemble the report. Every driver is deterministic in
//! (config, master seed) regardless of thread count.

use crate::config::{Expectation, ExperimentConfig, ExperimentKind};
use crate::dimension::{
    self, box_count_curve, box_dimension_fit, default_scales_dyadic, default_scales_ternary,
    BoxFit, DichotomyParams,
};
use crate::engine::{self, Window};
use crate::error::{Error, Result};
use crate::process::{self, dyadic_test_balls, MixingFit};
use crate::report::{ExperimentReport, Flag, Metric};
use crate::schedule::{self, DimensionFunction};
use crate::space::{Point, SpaceKind, SpaceSpec};
use crate::util::trial_seed;

/// Runs the experiment the config names and returns its report.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let kind = cfg
        .experiment
        .ok_or_else(|| Error::Config("experiment: not set".into()))?;
    cfg.validate()?;
    let mut rep = ExperimentReport::new(kind.name(), &cfg.echo(), cfg.master_seed);
    match kind {
        ExperimentKind::Dichotomy => dichotomy(cfg, &mut rep)?,
        ExperimentKind::Dimension => dimension(cfg, &mut rep)?,
        ExperimentKind::Hitting => hitting(cfg, &mut rep)?,
        ExperimentKind::Pz => paley_zygmund(cfg, &mut rep)?,
        ExperimentKind::Density => density(cfg, &mut rep)?,
        ExperimentKind::Mixing => mixing(cfg, &mut rep)?,
        ExperimentKind::Shepp => shepp(cfg, &mut rep)?,
        ExperimentKind::Ahlfors => ahlfors(cfg, &mut rep)?,
    }
    Ok(rep)
}

fn windows_from_exponents(ladder: &[u32]) -> Result<Vec<Window>> {
    ladder
        .iter()
        .map(|&j| Window::new(1u64 << j, (1u64 << (j + 1)) - 1))
        .collect()
}

fn head_seeds(master: u64, trials: usize) -> Vec<u64> {
    (0..trials.min(8) as u64).map(|i| trial_seed(master, i)).collect()
}

/// Binomial standard error of an empirical proportion.
fn prop_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn bool_flag(name: &str, ok: bool) -> Flag {
    Flag::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
}

/// Coverage dichotomy: limsup surrogate over the window ladder plus the
/// covered fraction of one coarse late window. An optional dimension
/// function inflates the schedule first.
fn dichotomy(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let space = cfg.build_space()?;
    let proc = cfg.build_process(&space)?;
    let mut sched = cfg.build_schedule()?;
    if let Some(f) = cfg.build_dimension_function()? {
        sched = schedule::inflate(&sched, &f, space.s)?;
    }
    let ladder = windows_from_exponents(&cfg.ladder)?;
    let cover = engine::limsup_proxy(&proc, &sched, &ladder, cfg.probes, cfg.trials, cfg.master_seed)?;
    rep.seeds = cover.seeds.iter().take(8).copied().collect();
    rep.metrics.push(Metric::sampled(
        "limsup_fraction",
        cover.limsup_fraction,
        cover.limsup_stderr,
        cover.trials,
    ));
    for (i, w) in cover.windows.iter().enumerate() {
        rep.metrics.push(Metric::sampled(
            format!("fraction[{}..{}]", w.first, w.last),
            cover.fraction_by_window[i],
            cover.fraction_stderr[i],
            cover.trials,
        ));
    }
    if cfg.expect != Expectation::Divergent {
        let coarse_w = Window::new(cfg.window.0, cfg.window.1)?;
        let coarse = engine::covered_fraction(
            &proc,
            &sched,
            coarse_w,
            cfg.probes,
            cfg.trials,
            trial_seed(cfg.master_seed, 0x10_0000),
        )?;
        rep.metrics.push(Metric::sampled(
            format!("window_fraction[{}..{}]", coarse_w.first, coarse_w.last),
            coarse.limsup_fraction,
            coarse.limsup_stderr,
            coarse.trials,
        ));
        if cfg.expect == Expectation::Convergent {
            rep.flags.push(Flag::at_most(
                "measure_zero",
                coarse.limsup_fraction,
                cfg.thresholds.measure_zero,
            ));
        }
    } else {
        rep.flags.push(Flag::at_least(
            "full_coverage",
            cover.limsup_fraction,
            cfg.thresholds.full_coverage,
        ));
    }
    Ok(())
}

/// Convergence-exponent bracketing over a grid of power dimension
/// functions, plus a box-counting fit of the covered probes.
fn dimension(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let space = cfg.build_space()?;
    let proc = cfg.build_process(&space)?;
    let sched = cfg.build_schedule()?;
    let grid = cfg
        .dimension_grid
        .iter()
        .map(|&t| DimensionFunction::power(t))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Config(format!("dimension.grid: {e}")))?;
    let params = DichotomyParams {
        ladder: windows_from_exponents(&cfg.ladder)?,
        probes: cfg.probes,
        trials: cfg.trials,
        series_len: cfg.window.1,
        ..DichotomyParams::defaults()
    };
    let dich = dimension::dimension_dichotomy_report(&proc, &sched, &grid, &params, cfg.master_seed)?;
    rep.seeds = head_seeds(cfg.master_seed, cfg.trials);
    for e in &dich.entries {
        rep.metrics.push(Metric::sampled(
            format!("covered[t={}]", e.t),
            e.covered,
            e.covered_stderr,
            cfg.trials,
        ));
        rep.metrics.push(Metric::exact(format!("tail_sum[t={}]", e.t), e.tail_sum));
        let class = if e.divergent {
            1.0
        } else if e.convergent {
            -1.0
        } else {
            0.0
        };
        rep.metrics.push(Metric::exact(format!("class[t={}]", e.t), class));
    }
    if let Some(a) = dich.alpha.value() {
        rep.metrics.push(Metric {
            name: "alpha".into(),
            value: a,
            stderr: Some(dich.alpha.half_width()),
            trials: None,
        });
    }
    if let Some(lo) = dich.bracket_lo {
        rep.metrics.push(Metric::exact("bracket_lo", lo));
    }
    if let Some(hi) = dich.bracket_hi {
        rep.metrics.push(Metric::exact("bracket_hi", hi));
    }
    rep.flags.push(bool_flag("bracket_consistent", dich.consistent));
    rep.flags.push(bool_flag("alpha_in_bracket", dich.alpha_in_bracket));

    // Box-counting fit of the covered probes over the full ladder span.
    let span = Window::new(
        1u64 << cfg.ladder[0],
        (1u64 << (cfg.ladder[cfg.ladder.len() - 1] + 1)) - 1,
    )?;
    let coords = engine::covered_probe_coords(
        &proc,
        &sched,
        span,
        cfg.box_probes,
        trial_seed(cfg.master_seed, 0x20_0000),
    )?;
    rep.metrics.push(Metric::exact("box_covered_probes", coords.len() as f64));
    if coords.len() >= 16 {
        let scales = match space.kind {
            SpaceKind::CantorTernary { .. } => default_scales_ternary(),
            _ => default_scales_dyadic(),
        };
        let curve = box_count_curve(&coords, &scales)?;
        match box_dimension_fit(&curve)? {
            BoxFit::Estimate { dimension, r2, .. } => {
                rep.metrics.push(Metric::exact("box_dimension", dimension));
                rep.metrics.push(Metric::exact("box_r2", r2));
                // The box fit audits the covered set's geometry against the
                // ambient exponent, which only means something when the span
                // actually covers a healthy share of the probes; a convergent
                // schedule legitimately leaves too sparse a sample to grade.
                if coords.len() >= cfg.box_probes / 10 {
                    rep.flags.push(Flag::at_most(
                        "box_dimension_error",
                        (dimension - space.s).abs(),
                        cfg.thresholds.box_tol,
                    ));
                    rep.flags
                        .push(Flag::at_least("box_fit_r2", r2, cfg.thresholds.box_r2));
                }
            }
            BoxFit::Saturated => {
                rep.metrics.push(Metric::exact("box_saturated", 1.0));
            }
        }
    }
    Ok(())
}

/// Decade checkpoints up to `last`: last/100, last/10, last (deduplicated).
fn decade_checkpoints(last: u64) -> Vec<u64> {
    let mut cps: Vec<u64> = [last / 100, last / 10, last]
        .into_iter()
        .filter(|&c| c >= 1)
        .collect();
    cps.dedup();
    cps
}

/// Shrinking-target hitting: counts of d(xi_n, y) < r_n at decade
/// checkpoints and per-window hit indicators.
fn hitting(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let space = cfg.build_space()?;
    let proc = cfg.build_process(&space)?;
    let sched = cfg.build_schedule()?;
    let target = space.nearest_point(cfg.hitting_target);
    rep.metrics.push(Metric::exact("target_coord", space.embed(target)?));
    let ladder = if cfg.expect == Expectation::Convergent {
        vec![Window::new(cfg.window.0, cfg.window.1)?]
    } else {
        windows_from_exponents(&cfg.ladder)?
    };
    let last = ladder.last().map(|w| w.last).unwrap_or(0);
    let checkpoints = decade_checkpoints(last);
    let stats = engine::hit_trials(
        &proc,
        &sched,
        target,
        &checkpoints,
        &ladder,
        cfg.trials,
        cfg.master_seed,
    )?;
    rep.seeds = head_seeds(cfg.master_seed, cfg.trials);
    for (k, &cp) in checkpoints.iter().enumerate() {
        let counts: Vec<f64> = stats.iter().map(|h| h.counts[k] as f64).collect();
        let (mean, se) = crate::util::mean_stderr(&counts);
        rep.metrics
            .push(Metric::sampled(format!("mean_hits[n={cp}]"), mean, se, cfg.trials));
    }
    for (i, w) in ladder.iter().enumerate() {
        let frac = stats.iter().filter(|h| h.window_hits[i]).count() as f64 / cfg.trials as f64;
        rep.metrics.push(Metric::sampled(
            format!("window_hit[{}..{}]", w.first, w.last),
            frac,
            prop_se(frac, cfg.trials),
            cfg.trials,
        ));
    }
    let all = engine::all_windows_hit_fraction(&stats);
    rep.metrics.push(Metric::sampled(
        "all_windows_hit",
        all,
        prop_se(all, cfg.trials),
        cfg.trials,
    ));
    match cfg.expect {
        Expectation::Divergent => {
            rep.flags
                .push(Flag::at_least("all_windows_hit", all, cfg.thresholds.hit));
        }
        Expectation::Convergent => {
            let frac = stats.iter().filter(|h| h.window_hits[0]).count() as f64
                / cfg.trials as f64;
            rep.flags
                .push(Flag::at_most("window_hit", frac, cfg.thresholds.measure_zero));
        }
        _ => {}
    }
    Ok(())
}

/// Second-moment lower bounds on P(S_N >= lambda E S_N) for each lambda.
fn paley_zygmund(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let space = cfg.build_space()?;
    let proc = cfg.build_process(&space)?;
    let sched = cfg.build_schedule()?;
    let target = space.nearest_point(cfg.hitting_target);
    let checkpoints = decade_checkpoints(cfg.pz_n);
    let stats = engine::hit_trials(
        &proc,
        &sched,
        target,
        &checkpoints,
        &[],
        cfg.trials,
        cfg.master_seed,
    )?;
    rep.seeds = head_seeds(cfg.master_seed, cfg.trials);
    let mut moments_reported = false;
    for &lambda in &cfg.pz_lambda {
        let pz = engine::paley_zygmund_report(&stats, lambda)?;
        if !moments_reported {
            let counts: Vec<f64> = stats.iter().map(|h| h.final_count() as f64).collect();
            let (_, se) = crate::util::mean_stderr(&counts);
            rep.metrics
                .push(Metric::sampled("mean_s", pz.mean_s, se, cfg.trials));
            rep.metrics.push(Metric::exact("mean_s2", pz.mean_s2));
            rep.metrics
                .push(Metric::exact("second_moment_slack", pz.second_moment_slack));
            moments_reported = true;
        }
        rep.metrics.push(Metric::sampled(
            format!("empirical[lambda={lambda}]"),
            pz.empirical_prob,
            pz.empirical_stderr,
            cfg.trials,
        ));
        rep.metrics
            .push(Metric::exact(format!("pz_bound[lambda={lambda}]"), pz.pz_bound));
        rep.flags.push(Flag::at_least(
            format!("pz_lower[lambda={lambda}]"),
            pz.empirical_prob,
            pz.pz_bound - 3.0 * pz.empirical_stderr,
        ));
    }
    Ok(())
}

/// Ball-intersection density: does every mesh ball meet some covering ball
/// with index in [start, budget]?
fn density(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let space = cfg.build_space()?;
    let proc = cfg.build_process(&space)?;
    let sched = cfg.build_schedule()?;
    let m = cfg.density_mesh;
    let mesh: Vec<(Point, f64)> = (0..m)
        .map(|i| {
            let x = (2 * i + 1) as f64 / (2 * m) as f64;
            (space.nearest_point(x), cfg.density_radius)
        })
        .collect();
    let d = engine::density_check(
        &proc,
        &sched,
        cfg.density_start,
        cfg.density_budget,
        &mesh,
        cfg.trials,
        cfg.master_seed,
    )?;
    rep.seeds = d.seeds.iter().take(8).copied().collect();
    rep.metrics.push(Metric::sampled(
        "all_balls_hit",
        d.all_hit_probability,
        d.all_hit_stderr,
        d.trials,
    ));
    let min_hit = d.hit_probability.iter().copied().fold(f64::INFINITY, f64::min);
    rep.metrics.push(Metric::sampled(
        "min_ball_hit",
        min_hit,
        prop_se(min_hit, d.trials),
        d.trials,
    ));
    for (i, &p) in d.hit_probability.iter().enumerate() {
        rep.metrics.push(Metric::sampled(
            format!("ball_hit[{i}]"),
            p,
            prop_se(p, d.trials),
            d.trials,
        ));
    }
    for (i, fh) in d.first_hit_mean.iter().enumerate() {
        if let Some(v) = fh {
            rep.metrics
                .push(Metric::exact(format!("first_hit_mean[{i}]"), *v));
        }
    }
    if cfg.expect == Expectation::Divergent {
        rep.flags.push(Flag::at_least(
            "all_balls_hit",
            d.all_hit_probability,
            cfg.thresholds.all_hit,
        ));
    }
    Ok(())
}

/// Dependence-decay profile over dyadic test balls with an exponential fit.
fn mixing(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let space = cfg.build_space()?;
    let proc = cfg.build_process(&space)?;
    let balls: Vec<(Point, f64)> = dyadic_test_balls(cfg.mixing_level)
        .into_iter()
        .map(|(p, r)| match p {
            Point::Coord(x) => (space.nearest_point(x), r),
            other => (other, r),
        })
        .collect();
    let horizon = 1 + *cfg.mixing_lags.last().unwrap() as usize;
    let profile = process::mixing_profile(
        &proc,
        &balls,
        &cfg.mixing_lags,
        cfg.trials,
        horizon,
        cfg.master_seed,
    )?;
    rep.seeds = head_seeds(cfg.master_seed, cfg.trials);
    for i in 0..profile.lags.len() {
        rep.metrics.push(Metric::sampled(
            format!("psi[n={}]", profile.lags[i]),
            profile.psi[i],
            profile.stderr[i],
            cfg.trials,
        ));
    }
    let fit = process::fit_mixing_rate(&profile);
    let (c_hat, gamma_hat) = match fit {
        MixingFit::Exponential { c_hat, gamma_hat, lags_used } => {
            rep.metrics.push(Metric::exact("c_hat", c_hat));
            rep.metrics.push(Metric::exact("gamma_hat", gamma_hat));
            rep.metrics.push(Metric::exact("lags_used", lags_used as f64));
            (c_hat, gamma_hat)
        }
        MixingFit::IndistinguishableFromZero => {
            rep.metrics.push(Metric::exact("zero_profile", 1.0));
            (0.0, 0.0)
        }
    };
    match cfg.expect {
        Expectation::Mixing => {
            rep.flags
                .push(Flag::at_most("gamma_hat", gamma_hat, cfg.thresholds.gamma));
            let excess = profile
                .lags
                .iter()
                .zip(profile.psi.iter().zip(&profile.stderr))
                .map(|(&n, (&psi, &se))| psi - (c_hat * gamma_hat.powi(n as i32) + 3.0 * se))
                .fold(f64::NEG_INFINITY, f64::max);
            rep.flags.push(Flag::at_most("envelope_excess", excess, 0.0));
        }
        Expectation::Zero => {
            let excess = profile
                .psi
                .iter()
                .zip(&profile.stderr)
                .map(|(&psi, &se)| psi - 3.0 * se)
                .fold(f64::NEG_INFINITY, f64::max);
            rep.flags.push(Flag::at_most("noise_excess", excess, 0.0));
        }
        _ => {}
    }
    Ok(())
}

/// Series criterion on sum exp(r_1 + ... + r_n) / n^2: growth ratio and
/// relative tail increment at decade checkpoints.
fn shepp(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let sched = cfg.build_schedule()?;
    let s = sched.shepp_series(
        cfg.shepp_n,
        cfg.thresholds.shepp_growth,
        cfg.thresholds.shepp_tail,
    )?;
    for &(n, v) in &s.checkpoints {
        rep.metrics.push(Metric::exact(format!("partial_sum[n={n}]"), v));
    }
    rep.metrics.push(Metric::exact("growth_ratio", s.growth_ratio));
    rep.metrics
        .push(Metric::exact("tail_increment_rel", s.tail_increment_rel));
    match cfg.expect {
        Expectation::Divergent => {
            rep.flags.push(Flag::at_least(
                "shepp_growth",
                s.growth_ratio,
                cfg.thresholds.shepp_growth,
            ));
        }
        Expectation::Convergent => {
            rep.flags.push(Flag::at_most(
                "shepp_tail",
                s.tail_increment_rel,
                cfg.thresholds.shepp_tail,
            ));
        }
        _ => {}
    }
    Ok(())
}

fn ahlfors_scales(space: &SpaceSpec) -> Vec<f64> {
    match space.kind {
        SpaceKind::CantorTernary { .. } => (2..=9).map(|k| 3f64.powi(-k)).collect(),
        _ => (4..=12).map(|k| 2f64.powi(-k)).collect(),
    }
}

/// Regularity estimation: pooled log-log fit of ball measure against radius
/// over sampled centers; checks the declared exponent and envelope.
fn ahlfors(cfg: &ExperimentConfig, rep: &mut ExperimentReport) -> Result<()> {
    let space = cfg.build_space()?;
    let radii = ahlfors_scales(&space);
    let (s_hat, c_hat) =
        crate::space::ahlfors_estimate(&space, cfg.ahlfors_centers, &radii, cfg.master_seed)?;
    rep.seeds = vec![cfg.master_seed];
    rep.metrics.push(Metric::exact("s_hat", s_hat));
    rep.metrics.push(Metric::exact("c_hat", c_hat));
    rep.metrics.push(Metric::exact("s_declared", space.s));
    rep.metrics.push(Metric::exact("c_declared", space.c));
    rep.flags.push(Flag::at_most(
        "s_error",
        (s_hat - space.s).abs(),
        cfg.thresholds.s_tol,
    ));
    rep.flags
        .push(Flag::at_most("c_hat", c_hat, space.c + 1e-6));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run(text: &str) -> ExperimentReport {
        let cfg = parse_config(text).unwrap();
        run_trials(&cfg).unwrap()
    }

    #[test]
    fn experiment_must_be_named() {
        let cfg = parse_config("trials = 3\n").unwrap();
        assert!(run_trials(&cfg).is_err());
    }

    #[test]
    fn shepp_experiment_reports_growth() {
        let rep = run(
            "experiment = shepp\nradii.kind = power\nradii.a = 1\nradii.alpha = 1\n\
             shepp.n = 10000\nexpect = divergent\nthreshold.shepp_growth = 5\n",
        );
        let growth = rep
            .metrics
            .iter()
            .find(|m| m.name == "growth_ratio")
            .unwrap()
            .value;
        assert!(growth > 5.0, "growth_ratio = {growth}");
        assert!(!rep.failed());
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn report_config_echo_round_trips() {
        let cfg = parse_config(
            "experiment = shepp\nradii.a = 0.5\nradii.alpha = 1\nshepp.n = 100\n",
        )
        .unwrap();
        let rep = run_trials(&cfg).unwrap();
        let again = parse_config(&rep.config_text()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn dichotomy_divergent_flag_passes_on_fat_schedule() {
        let rep = run(
            "experiment = dichotomy\nspace.kind = circle\nprocess.kind = iid\n\
             radii.a = 0.5\nradii.alpha = 0.4\nladder = 5..9\nprobes = 200\n\
             trials = 5\nexpect = divergent\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
        assert!(!rep.seeds.is_empty());
    }

    #[test]
    fn dichotomy_convergent_flag_passes_on_thin_schedule() {
        let rep = run(
            "experiment = dichotomy\nspace.kind = circle\nprocess.kind = iid\n\
             radii.a = 0.1\nradii.alpha = 1.5\nladder = 4..8\nprobes = 300\n\
             trials = 5\nwindow.first = 1000\nwindow.last = 20000\nexpect = convergent\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
        let wf = rep
            .metrics
            .iter()
            .find(|m| m.name.starts_with("window_fraction"))
            .unwrap();
        assert!(wf.value < 0.05, "window fraction = {}", wf.value);
    }

    #[test]
    fn hitting_divergent_flag_passes() {
        let rep = run(
            "experiment = hitting\nspace.kind = circle\nprocess.kind = doubling\n\
             radii.a = 0.3\nradii.alpha = 0.3\nhitting.target = 0.3333333333333333\n\
             ladder = 4..10\ntrials = 40\nexpect = divergent\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
        let all = rep.metrics.iter().find(|m| m.name == "all_windows_hit").unwrap();
        assert!(all.value >= 0.95);
    }

    #[test]
    fn pz_lower_bound_holds_for_iid() {
        let rep = run(
            "experiment = pz\nspace.kind = circle\nprocess.kind = iid\n\
             radii.a = 0.1\nradii.alpha = 1\npz.n = 500\npz.lambda = 0.25,0.5,0.75\n\
             trials = 200\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
        assert_eq!(rep.flags.len(), 3);
        assert!(rep.metrics.iter().any(|m| m.name == "second_moment_slack"));
    }

    #[test]
    fn density_mesh_is_hit_on_divergent_schedule() {
        let rep = run(
            "experiment = density\nspace.kind = circle\nprocess.kind = iid\n\
             radii.a = 0.3\nradii.alpha = 0.5\ndensity.mesh = 8\n\
             density.radius = 0.125\ndensity.start = 50\ndensity.budget = 5000\n\
             trials = 50\nexpect = divergent\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
        let m = rep.metrics.iter().find(|m| m.name == "all_balls_hit").unwrap();
        assert_eq!(m.value, 1.0);
    }

    #[test]
    fn mixing_iid_is_noise() {
        let rep = run(
            "experiment = mixing\nspace.kind = circle\nprocess.kind = iid\n\
             mixing.level = 2\nmixing.lags = 1..4\ntrials = 3000\nexpect = zero\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
    }

    #[test]
    fn mixing_doubling_has_visible_rate() {
        let rep = run(
            "experiment = mixing\nspace.kind = circle\nprocess.kind = doubling\n\
             mixing.level = 3\nmixing.lags = 1..6\ntrials = 20000\nexpect = mixing\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
        let g = rep.metrics.iter().find(|m| m.name == "gamma_hat").unwrap();
        assert!(g.value <= 0.6, "gamma_hat = {}", g.value);
    }

    #[test]
    fn dimension_brackets_the_exponent() {
        let rep = run(
            "experiment = dimension\nspace.kind = circle\nprocess.kind = iid\n\
             radii.a = 0.5\nradii.alpha = 0.9\ndimension.grid = 0.5,0.8\n\
             ladder = 8..12\nprobes = 300\ntrials = 4\nwindow.last = 200000\n\
             dimension.box_probes = 100000\n",
        );
        assert!(!rep.failed(), "{:?}", rep.flags);
        let alpha = rep.metrics.iter().find(|m| m.name == "alpha").unwrap();
        assert!((alpha.value - 1.0).abs() < 1e-12);
        let boxd = rep.metrics.iter().find(|m| m.name == "box_dimension").unwrap();
        assert!((boxd.value - 1.0).abs() < 0.05, "box dim = {}", boxd.value);
    }

    #[test]
    fn ahlfors_flags_pass_on_circle() {
        let rep = run("experiment = ahlfors\nspace.kind = circle\nahlfors.centers = 200\n");
        assert!(!rep.failed(), "{:?}", rep.flags);
        let s_hat = rep.metrics.iter().find(|m| m.name == "s_hat").unwrap();
        assert!((s_hat.value - 1.0).abs() < 1e-9);
    }
}
