//! Dimension estimation: box counting over the embedding interval, truncated
//! natural-cover tail sums (the convergence half of the dimension formula),
//! and the dichotomy report that brackets the convergence exponent between
//! empirically divergent and convergent grid exponents.

use std::collections::HashSet;

use crate::engine::{self, Window};
use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use crate::schedule::{
    terms_diverge, ConvergenceExponent, DimensionFunction, RadiusSchedule,
};
use crate::util::{compensated_sum, linear_fit, trial_seed};

/// Default dyadic box-counting scales 2^-4 .. 2^-14 for interval-like spaces.
pub fn default_scales_dyadic() -> Vec<f64> {
    (4..=14).map(|k| 2f64.powi(-k)).collect()
}

/// Default ternary box-counting scales 3^-2 .. 3^-9, aligned with the
/// middle-thirds construction.
pub fn default_scales_ternary() -> Vec<f64> {
    (2..=9).map(|k| 3f64.powi(-k)).collect()
}

/// Number of occupied cells of the uniform `epsilon`-grid over [0, 1].
/// Cells are half-open [k eps, (k+1) eps); points exactly on a cell boundary
/// land per floating-point floor. A scale wider than the space counts one
/// box.
pub fn box_count(coords: &[f64], epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::BadScaleRange);
    }
    if coords.is_empty() {
        return Err(Error::NoProbes);
    }
    if epsilon >= 1.0 {
        return Ok(1);
    }
    let ncells = (1.0 / epsilon).ceil() as u64;
    let occupied: HashSet<u64> = coords
        .iter()
        .map(|&x| ((x.max(0.0) / epsilon).floor() as u64).min(ncells - 1))
        .collect();
    Ok(occupied.len() as u64)
}

/// Occupied-box counts at a decreasing sequence of scales.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxCountCurve {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
}

pub fn box_count_curve(coords: &[f64], scales: &[f64]) -> Result<BoxCountCurve> {
    if scales.is_empty() || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadScaleRange);
    }
    let counts = scales
        .iter()
        .map(|&eps| box_count(coords, eps))
        .collect::<Result<Vec<u64>>>()?;
    Ok(BoxCountCurve { scales: scales.to_vec(), counts })
}

/// Log-log slope of a box-count curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoxFit {
    Estimate { dimension: f64, intercept: f64, r2: f64 },
    /// Counts identical at every scale — the point set is too small (or the
    /// scales too coarse) to resolve a slope.
    Saturated,
}

impl BoxFit {
    pub fn dimension(&self) -> Option<f64> {
        match self {
            BoxFit::Estimate { dimension, .. } => Some(*dimension),
            BoxFit::Saturated => None,
        }
    }

    pub fn r2(&self) -> Option<f64> {
        match self {
            BoxFit::Estimate { r2, .. } => Some(*r2),
            BoxFit::Saturated => None,
        }
    }
}

/// Least-squares slope of log N(eps) against log(1/eps). Needs at least four
/// scales spanning at least two octaves.
pub fn box_dimension_fit(curve: &BoxCountCurve) -> Result<BoxFit> {
    let m = curve.scales.len();
    if m < 4 || m != curve.counts.len() {
        return Err(Error::BadScaleRange);
    }
    if curve.scales[0] / curve.scales[m - 1] < 4.0 {
        return Err(Error::BadScaleRange);
    }
    if curve.counts.iter().all(|&c| c == curve.counts[0]) {
        return Ok(BoxFit::Saturated);
    }
    let xs: Vec<f64> = curve.scales.iter().map(|&e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = curve.counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(Error::BadScaleRange)?;
    Ok(BoxFit::Estimate { dimension: fit.slope, intercept: fit.intercept, r2: fit.r2 })
}

/// Truncated natural-cover bound: the tail sum over doubled balls and its
/// analytic envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverTail {
    /// sum_{n=n0}^{n1} f(2 r_n) — the generalized-Hausdorff content of the
    /// natural cover by doubled balls.
    pub sum: f64,
    /// 2^s sum_{n=n0}^{n1} f(r_n) >= sum whenever f(r)/r^s is nondecreasing.
    pub envelope: f64,
}

/// Sums f(2 r_n) for n in [n0, n1], with the 2^s-envelope cross-check.
pub fn natural_cover_sum(
    sched: &RadiusSchedule,
    f: &DimensionFunction,
    s: f64,
    n0: u64,
    n1: u64,
) -> Result<CoverTail> {
    if n0 == 0 || n1 < n0 {
        return Err(Error::BadTailRange);
    }
    let radii = sched.prefix(n1 as usize)?;
    let tail = &radii[(n0 - 1) as usize..];
    let sum = compensated_sum(tail.iter().map(|&r| f.eval(2.0 * r)));
    let envelope = s.exp2() * compensated_sum(tail.iter().map(|&r| f.eval(r)));
    Ok(CoverTail { sum, envelope })
}

/// Decade-increment classification of sum_n f(2 r_n): true when the series
/// keeps growing at the finite horizon.
pub fn natural_cover_diverges(
    sched: &RadiusSchedule,
    f: &DimensionFunction,
    len: u64,
) -> Result<bool> {
    if len == 0 {
        return Err(Error::BadTailRange);
    }
    let radii = sched.prefix(len as usize)?;
    let mut sum = 0.0;
    let mut comp = 0.0;
    Ok(terms_diverge(
        radii.iter().map(move |&r| {
            let v = f.eval(2.0 * r);
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
            sum + comp
        }),
        radii.len(),
    ))
}

/// Knobs for the dichotomy experiment.
#[derive(Clone, Debug)]
pub struct DichotomyParams {
    /// Window ladder for the divergence-side coverage runs.
    pub ladder: Vec<Window>,
    pub probes: usize,
    pub trials: usize,
    /// Horizon for the convergence-side series classifier.
    pub series_len: u64,
    /// limsup fraction at or above which an exponent counts as divergent.
    pub coverage_threshold: f64,
}

impl DichotomyParams {
    pub fn defaults() -> DichotomyParams {
        DichotomyParams {
            ladder: engine::geometric_ladder(10, 19).expect("static ladder bounds"),
            probes: 2000,
            trials: 10,
            series_len: 1_000_000,
            coverage_threshold: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyEntry {
    pub t: f64,
    /// Tail of the natural-cover sum over the last decade of the series
    /// horizon (diagnostic; the flag comes from the increment classifier).
    pub tail_sum: f64,
    pub convergent: bool,
    /// limsup fraction of the coverage run on the inflated schedule.
    pub covered: f64,
    pub covered_stderr: f64,
    pub divergent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyReport {
    pub entries: Vec<DichotomyEntry>,
    /// Largest empirically divergent exponent.
    pub bracket_lo: Option<f64>,
    /// Smallest empirically convergent exponent.
    pub bracket_hi: Option<f64>,
    pub alpha: ConvergenceExponent,
    /// False when some convergent exponent sits below a divergent one.
    pub consistent: bool,
    /// True when the closed-form/numeric exponent lies inside the bracket.
    pub alpha_in_bracket: bool,
}

fn resolve_bracket(
    ts: &[f64],
    divergent: &[bool],
    convergent: &[bool],
) -> (Option<f64>, Option<f64>, bool) {
    let lo = ts
        .iter()
        .zip(divergent)
        .filter_map(|(&t, &d)| if d { Some(t) } else { None })
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
    let hi = ts
        .iter()
        .zip(convergent)
        .filter_map(|(&t, &c)| if c { Some(t) } else { None })
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
    let consistent = match (lo, hi) {
        (Some(lo), Some(hi)) => lo < hi,
        _ => true,
    };
    (lo, hi, consistent)
}

/// For each grid exponent t: classifies sum f(2 r_n) (convergence side) and
/// measures coverage of the schedule inflated by r -> f(r)^{1/s}
/// (divergence side), then brackets the convergence exponent between the
/// flags and cross-checks the closed-form/numeric value.
pub fn dimension_dichotomy_report(
    proc: &ProcessSpec,
    sched: &RadiusSchedule,
    grid: &[DimensionFunction],
    params: &DichotomyParams,
    seed: u64,
) -> Result<DichotomyReport> {
    let s = proc.space.s;
    if grid.is_empty() {
        return Err(Error::Config("dimension grid must be nonempty".into()));
    }
    let ts: Vec<f64> = grid.iter().map(|f| f.exponent()).collect();
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("dimension grid exponents must be strictly increasing".into()));
    }
    if ts[0] <= 0.0 || ts[ts.len() - 1] > s + 1e-12 {
        return Err(Error::Config(format!(
            "dimension grid exponents must lie in (0, s]; s = {s}"
        )));
    }

    let mut entries = Vec::with_capacity(grid.len());
    for (i, f) in grid.iter().enumerate() {
        let convergent = !natural_cover_diverges(sched, f, params.series_len)?;
        let tail_sum =
            natural_cover_sum(sched, f, s, params.series_len / 10, params.series_len)?.sum;
        let inflated = crate::schedule::inflate(sched, f, s)?;
        let report = engine::limsup_proxy(
            proc,
            &inflated,
            &params.ladder,
            params.probes,
            params.trials,
            trial_seed(seed, i as u64),
        )?;
        entries.push(DichotomyEntry {
            t: ts[i],
            tail_sum,
            convergent,
            covered: report.limsup_fraction,
            covered_stderr: report.limsup_stderr,
            divergent: report.limsup_fraction >= params.coverage_threshold,
        });
    }

    let divergent: Vec<bool> = entries.iter().map(|e| e.divergent).collect();
    let convergent: Vec<bool> = entries.iter().map(|e| e.convergent).collect();
    let (bracket_lo, bracket_hi, consistent) = resolve_bracket(&ts, &divergent, &convergent);
    let alpha = sched.convergence_exponent(s)?;
    let alpha_in_bracket = match alpha.value() {
        Some(a) => {
            let tol = alpha.half_width() + 1e-12;
            bracket_lo.map_or(true, |lo| a >= lo - tol)
                && bracket_hi.map_or(true, |hi| a <= hi + tol)
        }
        None => false,
    };
    Ok(DichotomyReport {
        entries,
        bracket_lo,
        bracket_hi,
        alpha,
        consistent,
        alpha_in_bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::ProcessKind;
    use crate::space::SpaceSpec;

    #[test]
    fn full_interval_occupies_every_dyadic_cell() {
        let coords: Vec<f64> = (0..=4096).map(|i| i as f64 / 4096.0).collect();
        for k in 0..=8u32 {
            let eps = 2f64.powi(-(k as i32));
            assert_eq!(box_count(&coords, eps).unwrap(), 1u64 << k, "k={k}");
        }
    }

    #[test]
    fn cantor_stage_points_occupy_two_to_the_k_ternary_cells() {
        // One interior point per retained depth-8 cylinder (digit 2 appended
        // keeps it away from cell boundaries).
        let mut coords = Vec::with_capacity(256);
        for mask in 0u32..256 {
            let mut x = 2.0 * 3f64.powi(-9);
            for i in 0..8 {
                if mask & (1 << i) != 0 {
                    x += 2.0 * 3f64.powi(-(i as i32) - 1);
                }
            }
            coords.push(x);
        }
        for k in 0..=8u32 {
            let eps = 3f64.powi(-(k as i32));
            assert_eq!(box_count(&coords, eps).unwrap(), 1u64 << k, "k={k}");
        }
    }

    #[test]
    fn single_point_occupies_one_cell_at_every_scale() {
        for eps in [0.7, 0.1, 1e-3, 1e-6] {
            assert_eq!(box_count(&[0.37], eps).unwrap(), 1);
        }
        assert_eq!(box_count(&[0.37], 3.0).unwrap(), 1);
        assert!(box_count(&[], 0.1).is_err());
        assert!(box_count(&[0.5], 0.0).is_err());
    }

    #[test]
    fn counts_are_antitone_in_scale() {
        let coords: Vec<f64> = (0..500).map(|i| (i as f64 * 0.754877).fract()).collect();
        let curve = box_count_curve(&coords, &default_scales_dyadic()).unwrap();
        for w in curve.counts.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn exact_power_law_curves_fit_their_slopes() {
        let scales: Vec<f64> = (2..=10).map(|k| 2f64.powi(-k)).collect();
        let counts: Vec<u64> = (2..=10).map(|k| 1u64 << k).collect();
        let fit = box_dimension_fit(&BoxCountCurve { scales, counts }).unwrap();
        match fit {
            BoxFit::Estimate { dimension, r2, .. } => {
                assert!((dimension - 1.0).abs() < 1e-12);
                assert!(r2 > 1.0 - 1e-12);
            }
            BoxFit::Saturated => panic!("unexpected saturation"),
        }

        let scales: Vec<f64> = (2..=9).map(|k| 3f64.powi(-k)).collect();
        let counts: Vec<u64> = (2..=9).map(|k| 1u64 << k).collect();
        let fit = box_dimension_fit(&BoxCountCurve { scales, counts }).unwrap();
        let want = 2f64.ln() / 3f64.ln();
        assert!((fit.dimension().unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn saturated_curves_are_flagged() {
        let scales: Vec<f64> = (2..=8).map(|k| 2f64.powi(-k)).collect();
        let counts = vec![7u64; scales.len()];
        assert_eq!(
            box_dimension_fit(&BoxCountCurve { scales, counts }).unwrap(),
            BoxFit::Saturated
        );
    }

    #[test]
    fn fit_validation_rejects_thin_scale_ranges() {
        let curve = BoxCountCurve { scales: vec![0.1, 0.05, 0.04], counts: vec![5, 9, 11] };
        assert!(box_dimension_fit(&curve).is_err());
        let narrow = BoxCountCurve {
            scales: vec![0.1, 0.09, 0.08, 0.07],
            counts: vec![5, 6, 7, 8],
        };
        assert!(box_dimension_fit(&narrow).is_err());
        assert!(box_count_curve(&[0.5], &[0.1, 0.1]).is_err());
    }

    #[test]
    fn natural_cover_tails_match_direct_summation() {
        // t = 0.6 against r_n = n^-2, truncated at 10^6: direct-summation
        // values with exact integral brackets.
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let f = DimensionFunction::power(0.6).unwrap();
        let frozen = [(1_000u64, 1.42567), (10_000, 0.72296), (100_000, 0.27968)];
        let mut last = f64::INFINITY;
        for (n0, want) in frozen {
            let tail = natural_cover_sum(&sched, &f, 1.0, n0, 1_000_000).unwrap();
            assert!((tail.sum - want).abs() < 5e-5, "n0={n0}: {}", tail.sum);
            assert!(tail.sum < last, "tails must decrease in n0");
            last = tail.sum;
            // Integral bracket for a decreasing integrand g(n) = 2^0.6 n^-1.2.
            let g = |x: f64| 2f64.powf(0.6) * x.powf(-1.2);
            let integral = |a: f64, b: f64| 2f64.powf(0.6) * 5.0 * (a.powf(-0.2) - b.powf(-0.2));
            let lower = integral(n0 as f64, 1e6 + 1.0);
            let upper = g(n0 as f64) + integral(n0 as f64, 1e6);
            assert!(tail.sum >= lower && tail.sum <= upper, "bracket failed at n0={n0}");
            // Envelope dominates: f(2r) = 2^0.6 f(r) <= 2^1 f(r).
            assert!(tail.envelope >= tail.sum);
        }
    }

    #[test]
    fn single_term_tail_is_the_doubled_ball_value() {
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let f = DimensionFunction::power(0.6).unwrap();
        let tail = natural_cover_sum(&sched, &f, 1.0, 50, 50).unwrap();
        let r = sched.radius(50).unwrap();
        assert_eq!(tail.sum, f.eval(2.0 * r));
        assert!(natural_cover_sum(&sched, &f, 1.0, 0, 10).is_err());
        assert!(natural_cover_sum(&sched, &f, 1.0, 10, 9).is_err());
    }

    #[test]
    fn doubled_ball_terms_never_exceed_the_envelope_termwise() {
        let s: f64 = 1.0;
        let fns = [
            DimensionFunction::power(0.6).unwrap(),
            DimensionFunction::power_log(0.6, 1.0).unwrap(),
        ];
        for f in &fns {
            for k in 1..=1000u32 {
                let r = 0.5 * (k as f64 / 1000.0).powi(2) + 1e-9;
                assert!(
                    f.eval(2.0 * r) <= s.exp2() * f.eval(r) * (1.0 + 1e-12),
                    "r={r}"
                );
            }
        }
    }

    #[test]
    fn series_classifier_splits_the_grid() {
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        for (t, want) in [(0.3, true), (0.45, true), (0.6, false), (0.8, false)] {
            let f = DimensionFunction::power(t).unwrap();
            assert_eq!(
                natural_cover_diverges(&sched, &f, 1_000_000).unwrap(),
                want,
                "t={t}"
            );
        }
    }

    #[test]
    fn bracket_resolution_and_consistency() {
        let ts = [0.3, 0.4, 0.6, 0.7];
        let (lo, hi, ok) =
            resolve_bracket(&ts, &[true, true, false, false], &[false, false, true, true]);
        assert_eq!((lo, hi), (Some(0.4), Some(0.6)));
        assert!(ok);
        // Unclassified middle point leaves the bracket wider but consistent.
        let (lo, hi, ok) =
            resolve_bracket(&ts, &[true, false, false, false], &[false, false, false, true]);
        assert_eq!((lo, hi), (Some(0.3), Some(0.7)));
        assert!(ok);
        // A convergent exponent below a divergent one is inconsistent.
        let (_, _, ok) =
            resolve_bracket(&ts, &[false, true, false, false], &[true, false, false, true]);
        assert!(!ok);
        // One-sided grids are consistent by convention.
        let (lo, hi, ok) = resolve_bracket(&ts, &[true; 4], &[false; 4]);
        assert_eq!((lo, hi), (Some(0.7), None));
        assert!(ok);
    }

    fn quick_params(j_lo: u32, j_hi: u32) -> DichotomyParams {
        DichotomyParams {
            ladder: engine::geometric_ladder(j_lo, j_hi).unwrap(),
            probes: 500,
            trials: 5,
            series_len: 1_000_000,
            coverage_threshold: 0.9,
        }
    }

    #[test]
    fn circle_dichotomy_brackets_one_half() {
        let proc = ProcessSpec::new(ProcessKind::Iid, SpaceSpec::circle()).unwrap();
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let grid: Vec<DimensionFunction> = [0.3, 0.4, 0.6, 0.7]
            .iter()
            .map(|&t| DimensionFunction::power(t).unwrap())
            .collect();
        let report =
            dimension_dichotomy_report(&proc, &sched, &grid, &quick_params(8, 15), 77).unwrap();
        assert_eq!(report.bracket_lo, Some(0.4), "entries: {:?}", report.entries);
        assert_eq!(report.bracket_hi, Some(0.6));
        assert!(report.consistent);
        assert!(report.alpha_in_bracket);
        assert_eq!(report.alpha.value(), Some(0.5));
    }

    #[test]
    fn cantor_dichotomy_brackets_one_third() {
        let proc =
            ProcessSpec::new(ProcessKind::Iid, SpaceSpec::cantor_ternary(40).unwrap()).unwrap();
        let sched = RadiusSchedule::power(1.0, 3.0).unwrap();
        let grid: Vec<DimensionFunction> = [0.2, 0.5]
            .iter()
            .map(|&t| DimensionFunction::power(t).unwrap())
            .collect();
        let report =
            dimension_dichotomy_report(&proc, &sched, &grid, &quick_params(8, 13), 9).unwrap();
        let lo = report.bracket_lo.expect("0.2 should flag divergent");
        let hi = report.bracket_hi.expect("0.5 should flag convergent");
        assert!(lo < 1.0 / 3.0 && 1.0 / 3.0 < hi, "bracket [{lo}, {hi}]");
        assert!(report.consistent);
        assert!(report.alpha_in_bracket, "alpha: {:?}", report.alpha);
    }

    #[test]
    fn critical_schedule_caps_at_the_space_exponent() {
        // r_n = n^-1 on the circle: every t < 1 diverges, alpha = s = 1.
        let proc = ProcessSpec::new(ProcessKind::Iid, SpaceSpec::circle()).unwrap();
        let sched = RadiusSchedule::power(1.0, 1.0).unwrap();
        let grid: Vec<DimensionFunction> = [0.5, 0.8]
            .iter()
            .map(|&t| DimensionFunction::power(t).unwrap())
            .collect();
        let report =
            dimension_dichotomy_report(&proc, &sched, &grid, &quick_params(8, 13), 3).unwrap();
        assert_eq!(report.bracket_lo, Some(0.8), "entries: {:?}", report.entries);
        assert_eq!(report.bracket_hi, None);
        assert!(report.consistent);
        assert_eq!(report.alpha.value(), Some(1.0));
        assert!(report.alpha_in_bracket);
    }

    #[test]
    fn dichotomy_grid_validation() {
        let proc = ProcessSpec::new(ProcessKind::Iid, SpaceSpec::circle()).unwrap();
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let params = quick_params(4, 6);
        assert!(dimension_dichotomy_report(&proc, &sched, &[], &params, 0).is_err());
        let unsorted = vec![
            DimensionFunction::power(0.6).unwrap(),
            DimensionFunction::power(0.4).unwrap(),
        ];
        assert!(dimension_dichotomy_report(&proc, &sched, &unsorted, &params, 0).is_err());
        let too_big = vec![DimensionFunction::power(1.4).unwrap()];
        assert!(dimension_dichotomy_report(&proc, &sched, &too_big, &params, 0).is_err());
    }
}
