//! Radius schedules r_n, their power-series behavior, dimension functions,
//! and the two series-side oracles: the convergence exponent
//! `alpha = inf{t <= s : sum r_n^t < infinity}` and Shepp's boundary series
//! `sum (1/n^2) exp(r_1 + ... + r_n)`.

use crate::error::{Error, Result};
use crate::util::log_add_exp;

/// Materialization length when an inflated schedule has no closed form.
pub const INFLATE_MATERIALIZE_LEN: usize = 1 << 20;

/// Prefix length used by the numeric convergence classifier.
pub const NUMERIC_SERIES_LEN: usize = 1_000_000;

/// Shortest explicit schedule the numeric classifier will accept.
const NUMERIC_MIN_LEN: usize = 1_000;

/// Width at which the convergence-exponent bisection stops.
const BISECTION_WIDTH: f64 = 0.01;

/// Default Shepp flag thresholds: divergence when the last partial sum
/// exceeds the first by this factor, convergence when the relative
/// last-decade increment falls below this tolerance.
pub const SHEPP_RATIO_THRESHOLD: f64 = 10.0;
pub const SHEPP_TAIL_THRESHOLD: f64 = 1e-3;

/// A positive, nonincreasing radius sequence. Parametric kinds know their
/// convergence behavior in closed form; explicit lists are classified
/// numerically.
#[derive(Clone, Debug, PartialEq)]
pub enum RadiusSchedule {
    /// r_n = a n^-alpha
    Power { a: f64, alpha: f64 },
    /// r_n = a n^-alpha (ln(n+1))^-b
    PowerLog { a: f64, alpha: f64, b: f64 },
    /// r_n read from a list (1-indexed); zero entries are allowed so that
    /// degenerate all-zero schedules can exercise series baselines.
    Explicit(Vec<f64>),
}

impl RadiusSchedule {
    pub fn power(a: f64, alpha: f64) -> Result<RadiusSchedule> {
        if !(a.is_finite() && a > 0.0 && alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "power schedule needs a > 0 and alpha > 0, got a={a}, alpha={alpha}"
            )));
        }
        Ok(RadiusSchedule::Power { a, alpha })
    }

    pub fn power_log(a: f64, alpha: f64, b: f64) -> Result<RadiusSchedule> {
        if !(a.is_finite() && a > 0.0 && alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "power-log schedule needs a > 0 and alpha > 0, got a={a}, alpha={alpha}"
            )));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "power-log schedule needs b >= 0, got b={b}"
            )));
        }
        Ok(RadiusSchedule::PowerLog { a, alpha, b })
    }

    pub fn explicit(radii: Vec<f64>) -> Result<RadiusSchedule> {
        if radii.is_empty() {
            return Err(Error::InvalidSchedule("explicit schedule is empty".into()));
        }
        for w in radii.windows(2) {
            if !(w[0].is_finite() && w[1].is_finite()) || w[0] < 0.0 || w[1] < 0.0 {
                return Err(Error::InvalidSchedule(
                    "explicit radii must be finite and nonnegative".into(),
                ));
            }
            if w[1] > w[0] {
                return Err(Error::InvalidSchedule(
                    "explicit radii must be nonincreasing".into(),
                ));
            }
        }
        if !radii[0].is_finite() || radii[0] < 0.0 {
            return Err(Error::InvalidSchedule(
                "explicit radii must be finite and nonnegative".into(),
            ));
        }
        Ok(RadiusSchedule::Explicit(radii))
    }

    /// True when the convergence exponent is known in closed form.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, RadiusSchedule::Explicit(_))
    }

    /// r_n, 1-indexed.
    pub fn radius(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        match self {
            RadiusSchedule::Power { a, alpha } => Ok(a * (n as f64).powf(-alpha)),
            RadiusSchedule::PowerLog { a, alpha, b } => {
                Ok(a * (n as f64).powf(-alpha) * ((n as f64 + 1.0).ln()).powf(-b))
            }
            RadiusSchedule::Explicit(v) => v.get(n as usize - 1).copied().ok_or_else(|| {
                Error::InvalidSchedule(format!(
                    "index {n} exceeds explicit schedule length {}",
                    v.len()
                ))
            }),
        }
    }

    /// Materializes r_1..r_n.
    pub fn prefix(&self, n: usize) -> Result<Vec<f64>> {
        (1..=n as u64).map(|i| self.radius(i)).collect()
    }

    /// The first n radii as an explicit schedule (loses analytic knowledge).
    pub fn to_explicit(&self, n: usize) -> Result<RadiusSchedule> {
        Ok(RadiusSchedule::Explicit(self.prefix(n)?))
    }

    /// Length cap for index-dependent operations; parametric kinds are
    /// unbounded.
    pub fn len_limit(&self) -> Option<usize> {
        match self {
            RadiusSchedule::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// Compensated partial sum of r_n^t for n = 1..N.
    pub fn partial_power_sum(&self, t: f64, n: u64) -> Result<f64> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "power-sum exponent must be positive, got {t}"
            )));
        }
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        let mut acc = PowerSumAccumulator::new(t);
        for i in 1..=n {
            acc.push(self.radius(i)?);
        }
        Ok(acc.sum())
    }

    /// Convergence exponent alpha = inf{t <= s : sum r_n^t < infinity}.
    ///
    /// Parametric kinds use the p-series threshold 1/alpha capped at s; the
    /// boundary flag records whether the series converges at t = 1/alpha
    /// (possible only through the logarithmic factor). Explicit schedules are
    /// bisected with the decade-increment classifier and carry the bisection
    /// half-width as their uncertainty.
    pub fn convergence_exponent(&self, s: f64) -> Result<ConvergenceExponent> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "regularity exponent must be positive, got {s}"
            )));
        }
        match self {
            RadiusSchedule::Power { alpha, .. } => Ok(ConvergenceExponent::Analytic {
                alpha: (1.0 / alpha).min(s),
                uncapped: 1.0 / alpha,
                boundary_converges: false,
            }),
            RadiusSchedule::PowerLog { alpha, b, .. } => Ok(ConvergenceExponent::Analytic {
                alpha: (1.0 / alpha).min(s),
                uncapped: 1.0 / alpha,
                boundary_converges: b / alpha > 1.0,
            }),
            RadiusSchedule::Explicit(v) => {
                if v.len() < NUMERIC_MIN_LEN {
                    return Ok(ConvergenceExponent::Unresolved { lo: 0.0, hi: s });
                }
                let n = v.len().min(NUMERIC_SERIES_LEN);
                // t = 0 always diverges (unit terms); bisect up to s.
                let mut lo = 0.0f64;
                let mut hi = s;
                if series_diverges(&v[..n], s) {
                    return Ok(ConvergenceExponent::Numeric { alpha: s, half_width: 0.0 });
                }
                while hi - lo > BISECTION_WIDTH {
                    let mid = 0.5 * (lo + hi);
                    if series_diverges(&v[..n], mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(ConvergenceExponent::Numeric {
                    alpha: 0.5 * (lo + hi),
                    half_width: 0.5 * (hi - lo),
                })
            }
        }
    }

    /// Prefix sums of (1/n^2) exp(r_1 + ... + r_n), accumulated in log space
    /// so that fast-growing inner sums cannot overflow, with decade
    /// checkpoints and the divergence/convergence flags.
    pub fn shepp_series(
        &self,
        n: u64,
        ratio_threshold: f64,
        tail_threshold: f64,
    ) -> Result<SheppReport> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        let tail_start = n / 10;
        let mut inner = 0.0f64;
        let mut inner_comp = 0.0f64;
        let mut log_sum = f64::NEG_INFINITY;
        let mut log_first = f64::NEG_INFINITY;
        let mut log_tail_start = f64::NEG_INFINITY;
        let mut checkpoints = Vec::new();
        let mut next_checkpoint = 1u64;
        for i in 1..=n {
            let r = self.radius(i)?;
            // Neumaier step for the inner sum r_1 + ... + r_i.
            let t = inner + r;
            inner_comp += if inner.abs() >= r.abs() { (inner - t) + r } else { (r - t) + inner };
            inner = t;
            let log_term = (inner + inner_comp) - 2.0 * (i as f64).ln();
            log_sum = log_add_exp(log_sum, log_term);
            if i == 1 {
                log_first = log_sum;
            }
            if i == tail_start {
                log_tail_start = log_sum;
            }
            if i == next_checkpoint || i == n {
                checkpoints.push((i, log_sum.exp()));
                while next_checkpoint <= i {
                    next_checkpoint = next_checkpoint.saturating_mul(10);
                }
            }
        }
        let growth_ratio = (log_sum - log_first).exp();
        let tail_increment_rel = if tail_start >= 1 {
            1.0 - (log_tail_start - log_sum).exp()
        } else {
            1.0
        };
        Ok(SheppReport {
            checkpoints,
            growth_ratio,
            tail_increment_rel,
            diverges: growth_ratio > ratio_threshold,
            converges: tail_increment_rel < tail_threshold,
        })
    }
}

/// Streaming Neumaier-compensated sum of r^t terms.
struct PowerSumAccumulator {
    t: f64,
    sum: f64,
    comp: f64,
}

impl PowerSumAccumulator {
    fn new(t: f64) -> Self {
        PowerSumAccumulator { t, sum: 0.0, comp: 0.0 }
    }

    fn push(&mut self, r: f64) {
        let v = if r == 0.0 { 0.0 } else { r.powf(self.t) };
        let t = self.sum + v;
        self.comp += if self.sum.abs() >= v.abs() {
            (self.sum - t) + v
        } else {
            (v - t) + self.sum
        };
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Decade-increment divergence classifier for sum r_n^t on a finite prefix:
/// compares the last-decade increment with the previous decade's. A genuinely
/// convergent tail shrinks geometrically between decades, while any series
/// with exponent at or past the divergence threshold keeps its increments
/// essentially flat or growing. Increments at the floating-point noise floor
/// are treated as converged.
fn series_diverges(radii: &[f64], t: f64) -> bool {
    let n = radii.len();
    let mut acc = PowerSumAccumulator::new(t);
    terms_diverge(radii.iter().map(move |&r| {
        acc.push(r);
        acc.sum()
    }), n)
}

/// The same decade-increment rule over the running partial sums of an
/// arbitrary nonnegative series.
pub(crate) fn terms_diverge(partial_sums: impl Iterator<Item = f64>, n: usize) -> bool {
    let (c2, c1) = (n / 100, n / 10);
    let (mut s2, mut s1, mut s0) = (0.0, 0.0, 0.0);
    for (i, s) in partial_sums.enumerate() {
        if i + 1 == c2 {
            s2 = s;
        }
        if i + 1 == c1 {
            s1 = s;
        }
        s0 = s;
    }
    let inc_last = s0 - s1;
    let inc_prev = s1 - s2;
    if inc_last <= 1e-15 * (1.0 + s0) {
        return false;
    }
    inc_last >= 0.999 * inc_prev
}

/// Result of a convergence-exponent computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvergenceExponent {
    /// Closed form (parametric schedules). `uncapped` is the raw p-series
    /// threshold before the cap at s; `boundary_converges` records whether
    /// the series converges at t equal to the threshold itself.
    Analytic { alpha: f64, uncapped: f64, boundary_converges: bool },
    /// Bisection result on a finite prefix.
    Numeric { alpha: f64, half_width: f64 },
    /// The prefix was too short to classify.
    Unresolved { lo: f64, hi: f64 },
}

impl ConvergenceExponent {
    /// The exponent value, when resolved.
    pub fn value(&self) -> Option<f64> {
        match self {
            ConvergenceExponent::Analytic { alpha, .. }
            | ConvergenceExponent::Numeric { alpha, .. } => Some(*alpha),
            ConvergenceExponent::Unresolved { .. } => None,
        }
    }

    pub fn half_width(&self) -> f64 {
        match self {
            ConvergenceExponent::Analytic { .. } => 0.0,
            ConvergenceExponent::Numeric { half_width, .. } => *half_width,
            ConvergenceExponent::Unresolved { lo, hi } => 0.5 * (hi - lo),
        }
    }
}

/// Shepp-series evaluation: decade-spaced partial sums plus flags.
#[derive(Clone, Debug)]
pub struct SheppReport {
    /// (n, partial sum) at n = 1, 10, 100, ... and at the final index.
    pub checkpoints: Vec<(u64, f64)>,
    /// Final partial sum over the first one.
    pub growth_ratio: f64,
    /// (S_N - S_{N/10}) / S_N.
    pub tail_increment_rel: f64,
    pub diverges: bool,
    pub converges: bool,
}

/// A doubling dimension function f with f(r) -> 0: r^t or r^t (ln 1/r)^b.
/// The raw power-log form decreases on (e^{-b/t}, 1), so the logarithmic
/// factor is frozen at b/t — its stationary value — for larger radii. That
/// keeps f continuous and nondecreasing on the whole half-line without
/// touching the r -> 0 regime, the only one Hausdorff sums care about.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DimensionFunction {
    Power { t: f64 },
    PowerLog { t: f64, b: f64 },
}

impl DimensionFunction {
    pub fn power(t: f64) -> Result<DimensionFunction> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidDimensionFunction(format!(
                "power dimension function needs t > 0, got {t}"
            )));
        }
        Ok(DimensionFunction::Power { t })
    }

    pub fn power_log(t: f64, b: f64) -> Result<DimensionFunction> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidDimensionFunction(format!(
                "power-log dimension function needs t > 0, got {t}"
            )));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidDimensionFunction(format!(
                "power-log dimension function needs b >= 0, got {b}"
            )));
        }
        Ok(DimensionFunction::PowerLog { t, b })
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            DimensionFunction::Power { t } => r.powf(*t),
            DimensionFunction::PowerLog { t, b } => {
                let w = (1.0 / r).ln().max(b / t);
                r.powf(*t) * w.powf(*b)
            }
        }
    }

    /// Doubling constant eta with f(2r) <= eta f(r): exactly 2^t for both
    /// kinds (the log factor only shrinks under doubling).
    pub fn eta(&self) -> f64 {
        match self {
            DimensionFunction::Power { t } | DimensionFunction::PowerLog { t, .. } => t.exp2(),
        }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            DimensionFunction::Power { t } | DimensionFunction::PowerLog { t, .. } => *t,
        }
    }
}

/// Default grid on which the f(r)/r^s monotonicity precondition is probed.
pub fn default_ratio_grid() -> Vec<f64> {
    (1..=40).map(|k| 0.5f64.powi(k)).collect()
}

/// True iff f(r)/r^s is nondecreasing as r decreases through the grid.
pub fn check_ratio_monotone(f: &DimensionFunction, s: f64, grid: &[f64]) -> bool {
    let ratios: Vec<f64> = grid.iter().map(|&r| f.eval(r) / r.powf(s)).collect();
    ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
}

/// The mass-transference inflation: replaces r_n by f(r_n)^{1/s}. Power
/// compositions stay symbolic; f = r^s is the identity (bit-exact); anything
/// else is materialized as an explicit prefix of length
/// [`INFLATE_MATERIALIZE_LEN`].
pub fn inflate(
    sched: &RadiusSchedule,
    f: &DimensionFunction,
    s: f64,
) -> Result<RadiusSchedule> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidSchedule(format!(
            "regularity exponent must be positive, got {s}"
        )));
    }
    if !check_ratio_monotone(f, s, &default_ratio_grid()) {
        return Err(Error::RatioNotMonotone);
    }
    if f.exponent() == s && matches!(f, DimensionFunction::Power { .. }) {
        return Ok(sched.clone());
    }
    match (sched, f) {
        (RadiusSchedule::Power { a, alpha }, DimensionFunction::Power { t }) => {
            RadiusSchedule::power(a.powf(t / s), alpha * t / s)
        }
        (RadiusSchedule::PowerLog { a, alpha, b }, DimensionFunction::Power { t }) => {
            RadiusSchedule::power_log(a.powf(t / s), alpha * t / s, b * t / s)
        }
        (RadiusSchedule::Explicit(v), _) => {
            let inflated = v.iter().map(|&r| f.eval(r).powf(1.0 / s)).collect();
            RadiusSchedule::explicit(inflated)
        }
        _ => {
            let inflated = sched
                .prefix(INFLATE_MATERIALIZE_LEN)?
                .iter()
                .map(|&r| f.eval(r).powf(1.0 / s))
                .collect();
            RadiusSchedule::explicit(inflated)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::compensated_sum;

    const EULER_GAMMA: f64 = 0.5772156649015329;

    #[test]
    fn radius_formulas() {
        let p = RadiusSchedule::power(1.0, 2.0).unwrap();
        assert!((p.radius(10).unwrap() - 0.01).abs() < 1e-15);
        let q = RadiusSchedule::power(0.5, 1.0).unwrap();
        assert_eq!(q.radius(1).unwrap(), 0.5);
        let e = RadiusSchedule::explicit(vec![0.3, 0.2, 0.1]).unwrap();
        assert_eq!(e.radius(2).unwrap(), 0.2);
        assert!(matches!(e.radius(0), Err(Error::ZeroIndex)));
        assert!(e.radius(4).is_err());
        let pl = RadiusSchedule::power_log(2.0, 0.5, 1.0).unwrap();
        let want = 2.0 * 3.0f64.powf(-0.5) * 4.0f64.ln().powf(-1.0);
        assert!((pl.radius(3).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn schedules_reject_bad_parameters() {
        assert!(RadiusSchedule::power(0.0, 1.0).is_err());
        assert!(RadiusSchedule::power(1.0, 0.0).is_err());
        assert!(RadiusSchedule::power_log(1.0, 1.0, -0.5).is_err());
        assert!(RadiusSchedule::explicit(vec![]).is_err());
        assert!(RadiusSchedule::explicit(vec![0.1, 0.2]).is_err());
        assert!(RadiusSchedule::explicit(vec![0.1, -0.1]).is_err());
    }

    #[test]
    fn radii_are_nonincreasing() {
        let scheds = [
            RadiusSchedule::power(3.0, 0.7).unwrap(),
            RadiusSchedule::power_log(0.2, 1.3, 2.0).unwrap(),
            RadiusSchedule::explicit(vec![0.5, 0.5, 0.3, 0.0]).unwrap(),
        ];
        for sched in &scheds {
            let limit = sched.len_limit().unwrap_or(200) as u64;
            for n in 1..limit {
                assert!(sched.radius(n + 1).unwrap() <= sched.radius(n).unwrap());
            }
        }
    }

    #[test]
    fn harmonic_prefix_power_sum() {
        let sched = RadiusSchedule::power(1.0, 1.0).unwrap();
        let s = sched.partial_power_sum(1.0, 3).unwrap();
        assert!((s - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(sched.partial_power_sum(0.7, 1).unwrap(), 1.0);
    }

    #[test]
    fn power_sum_tracks_harmonic_asymptotics() {
        // (n^-2)^(1/2) = 1/n, so the sum is H_N = ln N + gamma + O(1/N).
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let n = 1_000_000u64;
        let s = sched.partial_power_sum(0.5, n).unwrap();
        let want = (n as f64).ln() + EULER_GAMMA;
        assert!((s - want).abs() < 0.01, "{s} vs {want}");
    }

    #[test]
    fn power_sum_monotonicity() {
        let sched = RadiusSchedule::power(0.5, 1.0).unwrap();
        let mut last = 0.0;
        for n in [10u64, 100, 1000] {
            let s = sched.partial_power_sum(0.8, n).unwrap();
            assert!(s > last);
            last = s;
        }
        // r_1 <= 1, so larger exponents give smaller sums.
        let lo = sched.partial_power_sum(1.2, 1000).unwrap();
        assert!(lo < last);
    }

    #[test]
    fn convergence_exponent_closed_forms() {
        let half = RadiusSchedule::power(1.0, 2.0).unwrap().convergence_exponent(1.0).unwrap();
        assert_eq!(
            half,
            ConvergenceExponent::Analytic { alpha: 0.5, uncapped: 0.5, boundary_converges: false }
        );
        let capped = RadiusSchedule::power(1.0, 0.5).unwrap().convergence_exponent(1.0).unwrap();
        match capped {
            ConvergenceExponent::Analytic { alpha, uncapped, .. } => {
                assert_eq!(alpha, 1.0);
                assert_eq!(uncapped, 2.0);
            }
            other => panic!("expected analytic form, got {other:?}"),
        }
        // Scale invariance: the prefactor does not move the exponent.
        let scaled = RadiusSchedule::power(7.0, 2.0).unwrap().convergence_exponent(1.0).unwrap();
        assert_eq!(scaled.value(), Some(0.5));
    }

    #[test]
    fn power_log_boundary_resolution() {
        let conv = RadiusSchedule::power_log(1.0, 2.0, 3.0).unwrap();
        match conv.convergence_exponent(1.0).unwrap() {
            ConvergenceExponent::Analytic { alpha, boundary_converges, .. } => {
                assert_eq!(alpha, 0.5);
                assert!(boundary_converges, "b/alpha = 1.5 > 1 converges at the threshold");
            }
            other => panic!("{other:?}"),
        }
        let div = RadiusSchedule::power_log(1.0, 2.0, 1.0).unwrap();
        match div.convergence_exponent(1.0).unwrap() {
            ConvergenceExponent::Analytic { boundary_converges, .. } => {
                assert!(!boundary_converges);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn numeric_exponent_matches_closed_form() {
        for (alpha_sched, want, tol) in [(2.0, 0.5, 0.05), (4.0, 0.25, 0.02)] {
            let explicit = RadiusSchedule::power(1.0, alpha_sched)
                .unwrap()
                .to_explicit(NUMERIC_SERIES_LEN)
                .unwrap();
            match explicit.convergence_exponent(1.0).unwrap() {
                ConvergenceExponent::Numeric { alpha, half_width } => {
                    assert!((alpha - want).abs() <= tol, "alpha={alpha}, want {want}");
                    assert!(half_width <= BISECTION_WIDTH);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn numeric_exponent_caps_at_s() {
        // 1/alpha = 2 > s = 1: every t <= 1 diverges, so the cap applies.
        let explicit =
            RadiusSchedule::power(1.0, 0.5).unwrap().to_explicit(100_000).unwrap();
        match explicit.convergence_exponent(1.0).unwrap() {
            ConvergenceExponent::Numeric { alpha, half_width } => {
                assert_eq!(alpha, 1.0);
                assert_eq!(half_width, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_explicit_prefix_is_unresolved() {
        let sched = RadiusSchedule::explicit(vec![0.5; 100]).unwrap();
        assert!(matches!(
            sched.convergence_exponent(1.0).unwrap(),
            ConvergenceExponent::Unresolved { lo, hi } if lo == 0.0 && hi == 1.0
        ));
    }

    #[test]
    fn ratio_monotonicity_checks() {
        let grid = default_ratio_grid();
        let below = DimensionFunction::power(0.5).unwrap();
        assert!(check_ratio_monotone(&below, 1.0, &grid));
        let above = DimensionFunction::power(2.0).unwrap();
        assert!(!check_ratio_monotone(&above, 1.0, &grid));
        let log_boost = DimensionFunction::power_log(1.0, 1.0).unwrap();
        assert!(check_ratio_monotone(&log_boost, 1.0, &grid));
    }

    #[test]
    fn inflation_symbolic_paths() {
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let f = DimensionFunction::power(0.5).unwrap();
        let inflated = inflate(&sched, &f, 1.0).unwrap();
        assert_eq!(inflated, RadiusSchedule::Power { a: 1.0, alpha: 1.0 });

        // (f(r))^{1/s} with f = r^0.25, s = 0.5 gives n^{-1} again.
        let inflated = inflate(&sched, &DimensionFunction::power(0.25).unwrap(), 0.5).unwrap();
        match inflated {
            RadiusSchedule::Power { a, alpha } => {
                assert!((a - 1.0).abs() < 1e-15);
                assert!((alpha - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }

        let pl = RadiusSchedule::power_log(0.3, 2.0, 1.0).unwrap();
        match inflate(&pl, &f, 1.0).unwrap() {
            RadiusSchedule::PowerLog { a, alpha, b } => {
                assert!((a - 0.3f64.powf(0.5)).abs() < 1e-15);
                assert!((alpha - 1.0).abs() < 1e-15);
                assert!((b - 0.5).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inflation_identity_is_bit_exact() {
        let scheds = [
            RadiusSchedule::power(0.37, 1.9).unwrap(),
            RadiusSchedule::explicit(vec![0.31, 0.17, 0.05]).unwrap(),
        ];
        for sched in &scheds {
            let f = DimensionFunction::power(1.0).unwrap();
            let inflated = inflate(sched, &f, 1.0).unwrap();
            assert_eq!(&inflated, sched);
        }
        // Identity also at fractional s.
        let sched = RadiusSchedule::power(0.4, 3.0).unwrap();
        let s = 0.6309297535714574;
        let inflated = inflate(&sched, &DimensionFunction::power(s).unwrap(), s).unwrap();
        assert_eq!(inflated, sched);
    }

    #[test]
    fn inflation_rejects_non_monotone_ratio() {
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let f = DimensionFunction::power(2.0).unwrap();
        assert!(matches!(inflate(&sched, &f, 1.0), Err(Error::RatioNotMonotone)));
    }

    #[test]
    fn inflation_materializes_log_functions() {
        let sched = RadiusSchedule::power(1.0, 2.0).unwrap();
        let f = DimensionFunction::power_log(0.5, 1.0).unwrap();
        let inflated = inflate(&sched, &f, 1.0).unwrap();
        match &inflated {
            RadiusSchedule::Explicit(v) => {
                assert_eq!(v.len(), INFLATE_MATERIALIZE_LEN);
                let r5 = sched.radius(5).unwrap();
                assert!((v[4] - f.eval(r5)).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        // Exponent composition: inflated exponent = s * alpha0 / t = 1.0.
        match inflated.convergence_exponent(1.0).unwrap() {
            ConvergenceExponent::Numeric { alpha, .. } => {
                assert!((alpha - 1.0).abs() <= 0.05, "{alpha}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inflated_exponent_composes_with_closed_form() {
        // exponent of inflate(power(a, alpha0), r^t, s) is min(s/(alpha0 t), s).
        for (alpha0, t, s) in [(2.0, 0.5, 1.0), (3.0, 0.25, 0.5), (1.5, 0.4, 0.8)] {
            let sched = RadiusSchedule::power(0.9, alpha0).unwrap();
            let f = DimensionFunction::power(t).unwrap();
            if !check_ratio_monotone(&f, s, &default_ratio_grid()) {
                continue;
            }
            let inflated = inflate(&sched, &f, s).unwrap();
            let got = inflated.convergence_exponent(s).unwrap().value().unwrap();
            let want = (s / (alpha0 * t)).min(s);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn shepp_series_harmonic_radii() {
        // r_n = 1/n: exp(H_n) ~ e^gamma n, so terms behave like c/n and the
        // partial sums grow logarithmically.
        let sched = RadiusSchedule::power(1.0, 1.0).unwrap();
        let report = sched
            .shepp_series(1_000_000, SHEPP_RATIO_THRESHOLD, SHEPP_TAIL_THRESHOLD)
            .unwrap();
        let first = report.checkpoints.first().unwrap();
        assert_eq!(first.0, 1);
        assert!((first.1 - std::f64::consts::E).abs() < 1e-12);
        assert!((report.growth_ratio - 9.99).abs() < 0.05, "{}", report.growth_ratio);
        assert!(!report.converges);

        // Partial sums strictly increase along checkpoints.
        for w in report.checkpoints.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
    }

    #[test]
    fn shepp_series_half_harmonic_tail_shrinks() {
        let sched = RadiusSchedule::power(0.5, 1.0).unwrap();
        let report = sched
            .shepp_series(1_000_000, SHEPP_RATIO_THRESHOLD, SHEPP_TAIL_THRESHOLD)
            .unwrap();
        // Terms behave like c n^{-3/2}; the relative last-decade increment
        // at N = 10^6 sits just above the 10^-3 flag threshold.
        assert!(report.tail_increment_rel > 1.2e-3 && report.tail_increment_rel < 1.8e-3);
        assert!(!report.diverges);
    }

    #[test]
    fn shepp_series_zero_radii_is_basel() {
        let sched = RadiusSchedule::explicit(vec![0.0; 10_000]).unwrap();
        let report = sched.shepp_series(10_000, 10.0, 1e-3).unwrap();
        let last = report.checkpoints.last().unwrap().1;
        let want = std::f64::consts::PI.powi(2) / 6.0 - 1.0 / 10_000.0;
        assert!((last - want).abs() < 1e-6, "{last} vs {want}");
        assert!(report.converges);
    }

    #[test]
    fn shepp_log_space_matches_direct_summation() {
        let sched = RadiusSchedule::power(1.0, 1.0).unwrap();
        let report = sched.shepp_series(10_000, 10.0, 1e-3).unwrap();
        let mut inner = 0.0;
        let direct = compensated_sum((1..=10_000u64).map(|n| {
            inner += sched.radius(n).unwrap();
            inner.exp() / (n as f64 * n as f64)
        }));
        let last = report.checkpoints.last().unwrap().1;
        assert!((last - direct).abs() / direct < 1e-10);
    }

    #[test]
    fn dimension_function_doubling_constant() {
        let f = DimensionFunction::power(0.6).unwrap();
        assert!((f.eta() - 0.6f64.exp2()).abs() < 1e-15);
        for &r in &default_ratio_grid() {
            assert!(f.eval(2.0 * r) <= f.eta() * f.eval(r) + 1e-15);
        }
        let g = DimensionFunction::power_log(0.6, 1.5).unwrap();
        for &r in &default_ratio_grid()[1..] {
            assert!(g.eval(2.0 * r) <= g.eta() * g.eval(r) + 1e-15);
        }
    }

    #[test]
    fn dimension_function_rejects_bad_parameters() {
        assert!(DimensionFunction::power(0.0).is_err());
        assert!(DimensionFunction::power(f64::NAN).is_err());
        assert!(DimensionFunction::power_log(1.0, -1.0).is_err());
    }
}
