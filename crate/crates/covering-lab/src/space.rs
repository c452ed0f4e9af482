//! Ambient spaces: the unit circle, the unit interval carrying the Lebesgue,
//! Gauss, or Parry measure, and the ternary Cantor set.
//!
//! Each space is a compact metric space with a reference probability measure
//! that is Ahlfors regular: `C^-1 r^s <= mu(B(x,r)) <= C r^s` for every center
//! and every radius up to the diameter. The module provides the metric, exact
//! ball-measure and CDF oracles, sampling from the reference measure, and an
//! empirical regularity estimator used to sanity-check the declared `(s, C)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::util::linear_fit;

/// Deepest supported Cantor digit word; 3^40 numerators still fit in a u64.
pub const CANTOR_MAX_DEPTH: u32 = 40;

/// Default Cantor digit depth (resolution 3^-40).
pub const CANTOR_DEFAULT_DEPTH: u32 = 40;

/// Exact golden ratio, the default beta for the Parry measure.
pub const GOLDEN_RATIO: f64 = 1.618033988749895;

/// Number of terms kept in the truncated Parry density series.
const PARRY_SERIES_DEPTH: usize = 60;

/// Knot count of the Gauss inverse-CDF interpolation table.
const GAUSS_TABLE_KNOTS: usize = 1 << 16;

fn pow3(k: u32) -> u64 {
    3u64.pow(k)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind {
    /// R/Z with arc-length metric (circumference 1) and Lebesgue measure.
    Circle,
    /// [0,1) with |x-y| and Lebesgue measure.
    IntervalLebesgue,
    /// [0,1) with |x-y| and the Gauss measure, density 1/((ln 2)(1+x)).
    IntervalGauss,
    /// [0,1) with |x-y| and the Parry measure of the beta-shift.
    IntervalParry { beta: f64 },
    /// Depth-limited ternary Cantor set with its natural uniform measure.
    CantorTernary { depth: u32 },
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::Circle => "circle",
            SpaceKind::IntervalLebesgue => "interval-lebesgue",
            SpaceKind::IntervalGauss => "interval-gauss",
            SpaceKind::IntervalParry { .. } => "interval-parry",
            SpaceKind::CantorTernary { .. } => "cantor-ternary",
        }
    }
}

/// A point of one of the five spaces. `Coord` holds a coordinate in [0,1);
/// `Cantor` holds the numerator of a depth-D ternary word over digits {0,2},
/// embedded in [0,1] as `num / 3^D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Coord(f64),
    Cantor(u64),
}

impl Point {
    /// Builds a Cantor point from explicit digits (validated to be 0 or 2).
    pub fn cantor_from_digits(digits: &[u8]) -> Result<Point> {
        let mut num = 0u64;
        for &d in digits {
            if d != 0 && d != 2 {
                return Err(Error::PointSpaceMismatch("cantor digits must be 0 or 2"));
            }
            num = num * 3 + u64::from(d);
        }
        Ok(Point::Cantor(num))
    }
}

/// Piecewise-constant Parry density for the beta-shift `T x = beta x mod 1`.
///
/// `h(x)` is proportional to `sum_{j >= 0, x < T^j(1)} beta^-j`, truncated at
/// [`PARRY_SERIES_DEPTH`] terms. The density is constant between consecutive
/// orbit points of 1, so the CDF is piecewise linear and inverts exactly.
#[derive(Clone, Debug)]
struct ParryMeasure {
    /// Left endpoints of the density segments; `breaks[0] == 0`.
    breaks: Vec<f64>,
    /// Normalized density on each segment.
    density: Vec<f64>,
    /// CDF value at each segment's left endpoint; final value is 1 at x = 1.
    cum: Vec<f64>,
}

impl ParryMeasure {
    fn new(beta: f64) -> ParryMeasure {
        // Orbit of 1 under the beta-transformation, with snapping: an iterate
        // within 1e-9 of an integer is treated as having hit 0 exactly, which
        // keeps finite orbits (e.g. the golden ratio's 1 -> 1/phi -> 0) finite
        // in floating point.
        let mut orbit = Vec::with_capacity(PARRY_SERIES_DEPTH);
        let mut t = 1.0f64;
        for _ in 0..PARRY_SERIES_DEPTH {
            orbit.push(t);
            if t == 0.0 {
                continue;
            }
            let v = beta * t;
            let mut f = v - v.floor();
            if (v - v.round()).abs() < 1e-9 {
                f = 0.0;
            }
            t = f;
        }

        let mut breaks: Vec<f64> = orbit
            .iter()
            .copied()
            .filter(|&b| b > 1e-12 && b < 1.0 - 1e-12)
            .collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        breaks.insert(0, 0.0);

        let mut weights = Vec::with_capacity(breaks.len());
        let mut norm = 0.0;
        for (i, &left) in breaks.iter().enumerate() {
            let right = breaks.get(i + 1).copied().unwrap_or(1.0);
            let mid = 0.5 * (left + right);
            let w: f64 = orbit
                .iter()
                .enumerate()
                .filter(|&(_, &tj)| tj > mid)
                .map(|(j, _)| beta.powi(-(j as i32)))
                .sum();
            norm += w * (right - left);
            weights.push(w);
        }

        let density: Vec<f64> = weights.iter().map(|w| w / norm).collect();
        let mut cum = Vec::with_capacity(breaks.len() + 1);
        let mut acc = 0.0;
        for (i, &left) in breaks.iter().enumerate() {
            cum.push(acc);
            let right = breaks.get(i + 1).copied().unwrap_or(1.0);
            acc += density[i] * (right - left);
        }
        cum.push(1.0);

        ParryMeasure { breaks, density, cum }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        (self.cum[i] + (x - self.breaks[i]) * self.density[i]).clamp(0.0, 1.0)
    }

    fn invert(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let nseg = self.breaks.len();
        let i = (self.cum[..nseg].partition_point(|&c| c <= u)).saturating_sub(1);
        let x = self.breaks[i] + (u - self.cum[i]) / self.density[i];
        x.clamp(0.0, 1.0 - f64::EPSILON)
    }
}

/// Monotone linear-interpolation table for the Gauss inverse CDF
/// `F^-1(u) = 2^u - 1`, sampled on equispaced knots.
#[derive(Clone, Debug)]
struct InverseCdfTable {
    knots: Vec<f64>,
}

impl InverseCdfTable {
    fn gauss() -> InverseCdfTable {
        let knots = (0..=GAUSS_TABLE_KNOTS)
            .map(|i| (i as f64 / GAUSS_TABLE_KNOTS as f64).exp2() - 1.0)
            .collect();
        InverseCdfTable { knots }
    }

    fn sample(&self, u: f64) -> f64 {
        let pos = u.clamp(0.0, 1.0) * GAUSS_TABLE_KNOTS as f64;
        let idx = (pos as usize).min(GAUSS_TABLE_KNOTS - 1);
        let frac = pos - idx as f64;
        let x = self.knots[idx] + frac * (self.knots[idx + 1] - self.knots[idx]);
        x.min(1.0 - f64::EPSILON)
    }
}

/// A compact Ahlfors-regular metric measure space.
#[derive(Clone, Debug)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    /// Regularity exponent s.
    pub s: f64,
    /// Declared regularity constant C >= 1 (a provable envelope with slack).
    pub c: f64,
    pub diameter: f64,
    parry: Option<ParryMeasure>,
    gauss_inverse: Option<InverseCdfTable>,
}

impl SpaceSpec {
    pub fn circle() -> SpaceSpec {
        SpaceSpec {
            kind: SpaceKind::Circle,
            s: 1.0,
            c: 2.0,
            diameter: 0.5,
            parry: None,
            gauss_inverse: None,
        }
    }

    pub fn interval_lebesgue() -> SpaceSpec {
        SpaceSpec {
            kind: SpaceKind::IntervalLebesgue,
            s: 1.0,
            c: 2.0,
            diameter: 1.0,
            parry: None,
            gauss_inverse: None,
        }
    }

    pub fn interval_gauss() -> SpaceSpec {
        SpaceSpec {
            kind: SpaceKind::IntervalGauss,
            s: 1.0,
            // Density range is [1/(2 ln 2), 1/ln 2]; 2/ln 2 < 3 is an envelope
            // with slack for balls clipped at either endpoint.
            c: 3.0,
            diameter: 1.0,
            parry: None,
            gauss_inverse: Some(InverseCdfTable::gauss()),
        }
    }

    pub fn interval_parry(beta: f64) -> Result<SpaceSpec> {
        if !beta.is_finite() || beta <= 1.0 {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(SpaceSpec {
            kind: SpaceKind::IntervalParry { beta },
            s: 1.0,
            c: 3.0,
            diameter: 1.0,
            parry: Some(ParryMeasure::new(beta)),
            gauss_inverse: None,
        })
    }

    pub fn cantor_ternary(depth: u32) -> Result<SpaceSpec> {
        if depth == 0 || depth > CANTOR_MAX_DEPTH {
            return Err(Error::InvalidCantorDepth(depth));
        }
        Ok(SpaceSpec {
            kind: SpaceKind::CantorTernary { depth },
            s: std::f64::consts::LN_2 / 3.0f64.ln(),
            c: 8.0,
            diameter: 1.0,
            parry: None,
            gauss_inverse: None,
        })
    }

    /// Digit depth for Cantor spaces, `None` otherwise.
    pub fn cantor_depth(&self) -> Option<u32> {
        match self.kind {
            SpaceKind::CantorTernary { depth } => Some(depth),
            _ => None,
        }
    }

    fn point_matches(&self, p: Point) -> bool {
        matches!(
            (&self.kind, p),
            (SpaceKind::CantorTernary { .. }, Point::Cantor(_))
                | (SpaceKind::Circle, Point::Coord(_))
                | (SpaceKind::IntervalLebesgue, Point::Coord(_))
                | (SpaceKind::IntervalGauss, Point::Coord(_))
                | (SpaceKind::IntervalParry { .. }, Point::Coord(_))
        )
    }

    fn require_point(&self, p: Point) -> Result<()> {
        if self.point_matches(p) {
            Ok(())
        } else {
            Err(Error::PointSpaceMismatch(self.kind.name()))
        }
    }

    /// Embedding of a point into [0,1]: the coordinate itself, or `num / 3^D`
    /// for Cantor words. The embedding is isometric for every kind except the
    /// circle, whose metric wraps.
    pub fn embed(&self, p: Point) -> Result<f64> {
        self.require_point(p)?;
        Ok(match p {
            Point::Coord(x) => x,
            Point::Cantor(num) => {
                let depth = self.cantor_depth().unwrap_or(CANTOR_DEFAULT_DEPTH);
                num as f64 / pow3(depth) as f64
            }
        })
    }

    /// Metric on embedded coordinates: wrap-around arc length on the circle,
    /// absolute difference everywhere else.
    pub fn metric_on_coords(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.kind {
            SpaceKind::Circle => d.min(1.0 - d),
            _ => d,
        }
    }

    pub fn distance(&self, p: Point, q: Point) -> Result<f64> {
        self.require_point(p)?;
        self.require_point(q)?;
        match (p, q) {
            (Point::Coord(a), Point::Coord(b)) => Ok(self.metric_on_coords(a, b)),
            (Point::Cantor(a), Point::Cantor(b)) => {
                let depth = self.cantor_depth().unwrap_or(CANTOR_DEFAULT_DEPTH);
                Ok(a.abs_diff(b) as f64 / pow3(depth) as f64)
            }
            _ => Err(Error::PointSpaceMismatch(self.kind.name())),
        }
    }

    /// Distribution function of the embedded coordinate under the reference
    /// measure; the sampling oracle for every kind (Cantor gets the devil's
    /// staircase).
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match &self.kind {
            SpaceKind::Circle | SpaceKind::IntervalLebesgue => x,
            SpaceKind::IntervalGauss => x.ln_1p() / std::f64::consts::LN_2,
            SpaceKind::IntervalParry { .. } => self.parry.as_ref().unwrap().cdf(x),
            SpaceKind::CantorTernary { .. } => devil_staircase(x),
        }
    }

    /// Exact measure of the open ball B(center, r).
    ///
    /// Circle: `min(2r, 1)`. Interval kinds: CDF difference over the clipped
    /// interval. Cantor: the retained depth-k cylinders meeting the ball each
    /// count 2^-k, with `k = ceil(-log3 r)` capped at the digit depth.
    pub fn ball_measure(&self, center: Point, r: f64) -> Result<f64> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::NonPositiveRadius(r));
        }
        self.require_point(center)?;
        match (&self.kind, center) {
            (SpaceKind::Circle, Point::Coord(_)) => Ok((2.0 * r).min(1.0)),
            (SpaceKind::CantorTernary { depth }, Point::Cantor(num)) => {
                Ok(self.cantor_ball_measure(num, r, *depth))
            }
            (_, Point::Coord(x)) => {
                let hi = (x + r).min(1.0);
                let lo = (x - r).max(0.0);
                Ok((self.cdf(hi) - self.cdf(lo)).clamp(0.0, 1.0))
            }
            _ => Err(Error::PointSpaceMismatch(self.kind.name())),
        }
    }

    fn cantor_ball_measure(&self, num: u64, r: f64, depth: u32) -> f64 {
        // Smallest k with 3^-k <= r, capped at the digit depth.
        let mut k = 0u32;
        while k < depth && (pow3(k) as f64) < 1.0 / r {
            k += 1;
        }
        // Split x * 3^k into integer part q and fractional part, exactly.
        let scale = pow3(depth - k);
        let q = num / scale;
        let frac = (num % scale) as f64 / scale as f64;
        let t = pow3(k) as f64 * r; // in [1, 3) unless k is capped

        // Cylinders [m/3^k, (m+1)/3^k] meeting the open ball: m+1 > q+frac-t
        // and m < q+frac+t, i.e. m in [q + floor(frac-t), q + ceil(frac+t) - 1].
        let lo = q as i128 + (frac - t).floor() as i128;
        let hi = q as i128 + (frac + t).ceil() as i128 - 1;
        let lo = lo.max(0) as u64;
        let hi = (hi.max(0) as u64).min(pow3(k) - 1);
        if lo > hi {
            return 0.0;
        }
        let kept = count_no_digit_one_upto(hi, k)
            - if lo == 0 { 0 } else { count_no_digit_one_upto(lo - 1, k) };
        kept as f64 * 0.5f64.powi(k as i32)
    }

    /// Draws one point distributed according to the reference measure.
    pub fn sample_measure<R: Rng>(&self, rng: &mut R) -> Point {
        match &self.kind {
            SpaceKind::Circle | SpaceKind::IntervalLebesgue => Point::Coord(rng.gen::<f64>()),
            SpaceKind::IntervalGauss => {
                Point::Coord(self.gauss_inverse.as_ref().unwrap().sample(rng.gen::<f64>()))
            }
            SpaceKind::IntervalParry { .. } => {
                Point::Coord(self.parry.as_ref().unwrap().invert(rng.gen::<f64>()))
            }
            SpaceKind::CantorTernary { depth } => {
                let bits: u64 = rng.gen();
                let mut num = 0u64;
                for i in 0..*depth {
                    let digit = ((bits >> i) & 1) * 2;
                    num = num * 3 + digit;
                }
                Point::Cantor(num)
            }
        }
    }

    /// Maps a coordinate in [0,1] to a point of the space: identity for
    /// coordinate kinds (clamped into [0,1)), greedy digit choice for Cantor
    /// (middle-third coordinates snap to the nearer retained cylinder).
    pub fn nearest_point(&self, x: f64) -> Point {
        let x = x.clamp(0.0, 1.0);
        match self.kind {
            SpaceKind::CantorTernary { depth } => {
                let mut y = x;
                let mut num = 0u64;
                for _ in 0..depth {
                    if y >= 2.0 / 3.0 {
                        num = num * 3 + 2;
                        y = 3.0 * y - 2.0;
                    } else if y <= 1.0 / 3.0 {
                        num *= 3;
                        y *= 3.0;
                    } else if y < 0.5 {
                        // Middle third, left half: closest support point is
                        // the right edge of the 0-cylinder.
                        num *= 3;
                        y = 1.0;
                    } else {
                        num = num * 3 + 2;
                        y = 0.0;
                    }
                }
                Point::Cantor(num)
            }
            _ => Point::Coord(x.min(1.0 - f64::EPSILON)),
        }
    }
}

/// The Cantor function (devil's staircase), the CDF of the Cantor measure on
/// the embedded interval. Ternary digits are read off until the first 1.
fn devil_staircase(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let mut y = x;
    let mut scale = 0.5;
    let mut acc = 0.0;
    for _ in 0..64 {
        y *= 3.0;
        let d = y.floor().min(2.0);
        y -= d;
        if d == 1.0 {
            return acc + scale;
        }
        if d == 2.0 {
            acc += scale;
        }
        scale *= 0.5;
        if y <= 0.0 {
            break;
        }
    }
    acc
}

/// Number of integers in [0, bound] whose k-digit ternary expansion avoids
/// the digit 1 (the cylinders retained at depth k).
fn count_no_digit_one_upto(bound: u64, k: u32) -> u64 {
    let mut total = 0u64;
    for i in (0..k).rev() {
        let d = (bound / pow3(i)) % 3;
        // Retained digits strictly below d, with the i lower digits free.
        if d >= 1 {
            total += 1 << i;
        }
        if d == 1 {
            // A tight prefix would carry a digit 1; nothing below survives.
            return total;
        }
    }
    total + 1
}

/// Pooled log-log regression of ball measure against radius over sampled
/// centers. Returns `(s_hat, c_hat)` where `c_hat` is the worst observed
/// regularity ratio `max(mu(B)/r^s_hat, r^s_hat/mu(B))`.
pub fn ahlfors_estimate(
    space: &SpaceSpec,
    centers: usize,
    radii: &[f64],
    seed: u64,
) -> Result<(f64, f64)> {
    if centers < 10 {
        return Err(Error::Config(format!(
            "ahlfors estimation needs at least 10 centers, got {centers}"
        )));
    }
    let mut distinct = radii.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateScales);
    }
    if radii.iter().any(|&r| r <= 0.0 || r > space.diameter) {
        return Err(Error::BadScaleRange);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_r = Vec::with_capacity(centers * radii.len());
    let mut log_mu = Vec::with_capacity(centers * radii.len());
    let mut samples = Vec::with_capacity(centers * radii.len());
    for _ in 0..centers {
        let x = space.sample_measure(&mut rng);
        for &r in radii {
            let mu = space.ball_measure(x, r)?;
            log_r.push(r.ln());
            log_mu.push(mu.ln());
            samples.push((r, mu));
        }
    }
    let fit = linear_fit(&log_r, &log_mu).ok_or(Error::DegenerateScales)?;
    let s_hat = fit.slope;
    let c_hat = samples
        .iter()
        .map(|&(r, mu)| {
            let rs = r.powf(s_hat);
            (mu / rs).max(rs / mu)
        })
        .fold(1.0f64, f64::max);
    Ok((s_hat, c_hat))
}
