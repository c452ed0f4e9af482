//! Stationary center processes: iid draws from the reference measure,
//! orbits of the doubling map / beta-shift / Gauss map started from their
//! invariant measures, and a finite-state Markov mixer. Also the empirical
//! mixing-coefficient estimator and its exponential fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::space::{Point, SpaceKind, SpaceSpec};
use crate::util::{linear_fit, trial_seed};

/// Multiplier applied to the argmax pair's binomial standard error so the
/// reported uncertainty covers the max over all tested ball pairs.
fn max_statistic_factor(pairs: usize) -> f64 {
    (2.0 * (pairs.max(1) as f64).ln()).max(1.0).sqrt()
}

#[derive(Clone, Debug)]
pub enum ProcessKind {
    /// Independent draws from the reference measure.
    Iid,
    /// T x = 2x mod 1. Realized through a shared uniform bit stream: point n
    /// is the 53-bit window starting at bit n, which is exactly the
    /// stationary doubling process with 53-bit marginals and avoids the
    /// 2-per-step roundoff amplification of naive orbit iteration.
    Doubling,
    /// T x = beta x mod 1 on its Parry measure.
    BetaShift { beta: f64 },
    /// T x = 1/x mod 1 (frac of the reciprocal) on the Gauss measure,
    /// with T(0) := 0.
    GaussMap,
    /// Finite-state chain on equal-width cells, emitting a uniform point of
    /// the current cell.
    Markov(MarkovMixer),
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::Iid => "iid",
            ProcessKind::Doubling => "doubling",
            ProcessKind::BetaShift { .. } => "beta-shift",
            ProcessKind::GaussMap => "gauss",
            ProcessKind::Markov(_) => "markov",
        }
    }

    fn is_dynamical(&self) -> bool {
        matches!(
            self,
            ProcessKind::Doubling | ProcessKind::BetaShift { .. } | ProcessKind::GaussMap
        )
    }
}

/// An irreducible aperiodic chain on `bins` equal-width cells of [0,1).
#[derive(Clone, Debug)]
pub struct MarkovMixer {
    bins: usize,
    /// Per-row cumulative transition probabilities.
    row_cum: Vec<Vec<f64>>,
    /// Cumulative stationary vector.
    stationary_cum: Vec<f64>,
    stationary: Vec<f64>,
}

impl MarkovMixer {
    pub fn new(transition: Vec<Vec<f64>>) -> Result<MarkovMixer> {
        let bins = transition.len();
        if bins < 2 {
            return Err(Error::InvalidTransition(
                "markov mixer needs at least 2 bins".into(),
            ));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != bins {
                return Err(Error::InvalidTransition(format!(
                    "transition row {i} has {} entries, expected {bins}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidTransition(format!(
                    "transition row {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidTransition(format!(
                    "transition row {i} sums to {sum}, expected 1"
                )));
            }
        }
        if !is_primitive(&transition) {
            return Err(Error::InvalidTransition(
                "transition matrix must be irreducible and aperiodic".into(),
            ));
        }

        // Stationary vector by power iteration (primitive, so it converges).
        let mut pi = vec![1.0 / bins as f64; bins];
        for _ in 0..100_000 {
            let mut next = vec![0.0; bins];
            for (i, &p) in pi.iter().enumerate() {
                for (j, &q) in transition[i].iter().enumerate() {
                    next[j] += p * q;
                }
            }
            let delta: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if delta < 1e-15 {
                break;
            }
        }
        let norm: f64 = pi.iter().sum();
        for p in &mut pi {
            *p /= norm;
        }

        let row_cum = transition.iter().map(|row| cumulative(row)).collect();
        let stationary_cum = cumulative(&pi);
        Ok(MarkovMixer { bins, row_cum, stationary_cum, stationary: pi })
    }

    /// The default mixer: a cyclic doubling pattern i -> {2i, 2i+1} mod bins
    /// blended with an eps-uniform restart. Doubly stochastic, so the
    /// stationary law is uniform and the emitted marginal is the reference
    /// Lebesgue measure.
    pub fn doubling_mixer(bins: usize, eps: f64) -> Result<MarkovMixer> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidTransition(format!(
                "mixer eps must lie in (0, 1], got {eps}"
            )));
        }
        if bins < 2 {
            return Err(Error::InvalidTransition(
                "markov mixer needs at least 2 bins".into(),
            ));
        }
        let u = eps / bins as f64;
        let mut transition = vec![vec![u; bins]; bins];
        for (i, row) in transition.iter_mut().enumerate() {
            row[(2 * i) % bins] += (1.0 - eps) * 0.5;
            row[(2 * i + 1) % bins] += (1.0 - eps) * 0.5;
        }
        MarkovMixer::new(transition)
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    fn sample_state(cum: &[f64], u: f64) -> usize {
        cum.partition_point(|&c| c <= u).min(cum.len() - 1)
    }
}

fn cumulative(row: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    row.iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

/// True when some power of the adjacency pattern is strictly positive
/// (irreducible + aperiodic).
fn is_primitive(transition: &[Vec<f64>]) -> bool {
    let m = transition.len();
    let mut reach: Vec<Vec<bool>> = transition
        .iter()
        .map(|row| row.iter().map(|&p| p > 0.0).collect())
        .collect();
    // Wielandt bound: a primitive matrix has a strictly positive power with
    // exponent at most (m-1)^2 + 1.
    let bound = (m - 1) * (m - 1) + 1;
    let adj = reach.clone();
    for _ in 1..bound {
        if reach.iter().all(|row| row.iter().all(|&b| b)) {
            return true;
        }
        let mut next = vec![vec![false; m]; m];
        for i in 0..m {
            for k in 0..m {
                if reach[i][k] {
                    for j in 0..m {
                        if adj[k][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        reach = next;
    }
    reach.iter().all(|row| row.iter().all(|&b| b))
}

/// A stationary center-generating process bound to its ambient space.
#[derive(Clone, Debug)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub space: SpaceSpec,
}

impl ProcessSpec {
    /// Validates that the process kind lives on a space whose reference
    /// measure is its invariant measure.
    pub fn new(kind: ProcessKind, space: SpaceSpec) -> Result<ProcessSpec> {
        let ok = match &kind {
            ProcessKind::Iid => true,
            ProcessKind::Doubling | ProcessKind::Markov(_) => matches!(
                space.kind,
                SpaceKind::Circle | SpaceKind::IntervalLebesgue
            ),
            ProcessKind::BetaShift { beta } => {
                if !(beta.is_finite() && *beta > 1.0) {
                    return Err(Error::InvalidBeta(*beta));
                }
                matches!(space.kind, SpaceKind::IntervalParry { beta: b } if (b - beta).abs() <= 1e-12)
            }
            ProcessKind::GaussMap => matches!(space.kind, SpaceKind::IntervalGauss),
        };
        if !ok {
            let wanted = match &kind {
                ProcessKind::Doubling | ProcessKind::Markov(_) => "circle or interval-lebesgue",
                ProcessKind::BetaShift { .. } => "interval-parry with the same beta",
                ProcessKind::GaussMap => "interval-gauss",
                ProcessKind::Iid => unreachable!(),
            };
            return Err(Error::ProcessSpaceMismatch {
                kind: kind.name(),
                wanted,
                got: space.kind.name().to_string(),
            });
        }
        Ok(ProcessSpec { kind, space })
    }

    /// One step of the underlying map, for dynamical kinds.
    pub fn step(&self, x: f64) -> Result<f64> {
        match &self.kind {
            ProcessKind::Doubling => Ok(frac_guarded(2.0f64.mul_add(x, 0.0))),
            ProcessKind::BetaShift { beta } => Ok(frac_guarded(beta.mul_add(x, 0.0))),
            ProcessKind::GaussMap => Ok(gauss_step(x)),
            other => Err(Error::NotDynamical(other.name())),
        }
    }

    /// Seeded stationary sample path xi_1..xi_N. Bit-exact reproducible and
    /// prefix-consistent: the first M points match an M-point generation with
    /// the same seed.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Trajectory> {
        if n == 0 {
            return Err(Error::EmptyTrajectory);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = match &self.kind {
            ProcessKind::Iid => (0..n).map(|_| self.space.sample_measure(&mut rng)).collect(),
            ProcessKind::Doubling => doubling_bit_stream(n, &mut rng),
            ProcessKind::BetaShift { .. } | ProcessKind::GaussMap => {
                let mut x = match self.space.sample_measure(&mut rng) {
                    Point::Coord(x) => x,
                    Point::Cantor(_) => unreachable!("dynamical kinds live on interval spaces"),
                };
                let mut points = Vec::with_capacity(n);
                points.push(Point::Coord(x));
                for _ in 1..n {
                    x = self.step(x).expect("kind is dynamical");
                    points.push(Point::Coord(x));
                }
                points
            }
            ProcessKind::Markov(mixer) => {
                let mut points = Vec::with_capacity(n);
                let mut state =
                    MarkovMixer::sample_state(&mixer.stationary_cum, rng.gen::<f64>());
                points.push(Point::Coord((state as f64 + rng.gen::<f64>()) / mixer.bins as f64));
                for _ in 1..n {
                    state = MarkovMixer::sample_state(&mixer.row_cum[state], rng.gen::<f64>());
                    points
                        .push(Point::Coord((state as f64 + rng.gen::<f64>()) / mixer.bins as f64));
                }
                points
            }
        };
        Ok(Trajectory { seed, points })
    }

    /// Deterministic orbit T^0 x0, T^1 x0, ... for dynamical kinds (plain
    /// floating-point iteration; the seeded generator is the authority for
    /// distributional work).
    pub fn orbit_from(&self, x0: Point, n: usize) -> Result<Trajectory> {
        if n == 0 {
            return Err(Error::EmptyTrajectory);
        }
        if !self.kind.is_dynamical() {
            return Err(Error::NotDynamical(self.kind.name()));
        }
        let mut x = match x0 {
            Point::Coord(x) if (0.0..1.0).contains(&x) => x,
            Point::Coord(_) | Point::Cantor(_) => {
                return Err(Error::PointSpaceMismatch(self.space.kind.name()))
            }
        };
        let mut points = Vec::with_capacity(n);
        points.push(Point::Coord(x));
        for _ in 1..n {
            x = self.step(x)?;
            points.push(Point::Coord(x));
        }
        Ok(Trajectory { seed: 0, points })
    }
}

/// A seeded finite sample path.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub points: Vec<Point>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn frac_guarded(v: f64) -> f64 {
    let f = v - v.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn gauss_step(x: f64) -> f64 {
    if x < 2.0f64.powi(-53) {
        return 0.0;
    }
    frac_guarded(x.recip())
}

/// Stationary doubling-process realization: x_n is the 53-bit dyadic window
/// starting at bit n of one shared uniform bit stream (bit 0 is the MSB of
/// the first word).
fn doubling_bit_stream<R: Rng>(n: usize, rng: &mut R) -> Vec<Point> {
    let bits_needed = n + 52;
    let words: Vec<u64> = (0..bits_needed.div_ceil(64)).map(|_| rng.gen()).collect();
    (0..n)
        .map(|pos| {
            let wi = pos / 64;
            let ofs = pos % 64;
            let hi = words[wi] << ofs;
            let lo = if ofs == 0 {
                0
            } else {
                words.get(wi + 1).copied().unwrap_or(0) >> (64 - ofs)
            };
            let window = (hi | lo) >> 11;
            Point::Coord(window as f64 / 9007199254740992.0) // 2^53
        })
        .collect()
}

/// Empirical dependence coefficients psi(n) over a family of test balls.
#[derive(Clone, Debug)]
pub struct MixingProfile {
    pub lags: Vec<u64>,
    /// psi(n) = max over ball pairs (A,B) of
    /// |P(xi_1 in A, xi_{1+n} in B) - mu(A) mu_hat(B)| / mu_hat(B).
    pub psi: Vec<f64>,
    /// Standard error of each psi entry (argmax-pair binomial error scaled
    /// for the maximum over pairs).
    pub stderr: Vec<f64>,
}

/// Estimates the mixing profile from `trials` independent trajectories of
/// length `horizon`. The conditioning event ranges over single future balls,
/// a tractable sub-family of the full future sigma-field, so the estimate is
/// a lower bound on the true coefficient.
pub fn mixing_profile(
    proc: &ProcessSpec,
    test_balls: &[(Point, f64)],
    lags: &[u64],
    trials: usize,
    horizon: usize,
    seed: u64,
) -> Result<MixingProfile> {
    if test_balls.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if lags.is_empty()
        || lags[0] == 0
        || lags.windows(2).any(|w| w[1] <= w[0])
        || horizon < 1 + *lags.last().unwrap() as usize
    {
        return Err(Error::BadLags);
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }

    let nb = test_balls.len();
    let nl = lags.len();
    let mut centers = Vec::with_capacity(nb);
    let mut mu_exact = Vec::with_capacity(nb);
    for &(center, r) in test_balls {
        if r <= 0.0 {
            return Err(Error::NonPositiveRadius(r));
        }
        centers.push((proc.space.embed(center)?, r));
        mu_exact.push(proc.space.ball_measure(center, r)?);
    }

    // counts[l * nb * nb + a * nb + b] = #{trials: xi_1 in A and xi_{1+lag} in B};
    // occupancy[l * nb + b] = #{trials: xi_{1+lag} in B}.
    let len_joint = nl * nb * nb;
    let len_occ = nl * nb;
    let (joint, occupancy) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let traj = proc
                .generate(horizon, trial_seed(seed, i as u64))
                .expect("horizon >= 1");
            let coords: Vec<f64> = traj
                .points
                .iter()
                .map(|&p| proc.space.embed(p).expect("points belong to the space"))
                .collect();
            let in_ball = |x: f64, b: usize| {
                proc.space.metric_on_coords(x, centers[b].0) < centers[b].1
            };
            let mut joint = vec![0u64; len_joint];
            let mut occ = vec![0u64; len_occ];
            let first: Vec<bool> = (0..nb).map(|a| in_ball(coords[0], a)).collect();
            for (l, &lag) in lags.iter().enumerate() {
                let x = coords[lag as usize];
                for b in 0..nb {
                    if in_ball(x, b) {
                        occ[l * nb + b] += 1;
                        for a in 0..nb {
                            if first[a] {
                                joint[l * nb * nb + a * nb + b] += 1;
                            }
                        }
                    }
                }
            }
            (joint, occ)
        })
        .reduce(
            || (vec![0u64; len_joint], vec![0u64; len_occ]),
            |(mut ja, mut oa), (jb, ob)| {
                for (x, y) in ja.iter_mut().zip(&jb) {
                    *x += y;
                }
                for (x, y) in oa.iter_mut().zip(&ob) {
                    *x += y;
                }
                (ja, oa)
            },
        );

    let t = trials as f64;
    let factor = max_statistic_factor(nb * nb);
    let mut psi = Vec::with_capacity(nl);
    let mut stderr = Vec::with_capacity(nl);
    for (l, &lag) in lags.iter().enumerate() {
        let mut best = -1.0f64;
        let mut best_se = 0.0f64;
        for b in 0..nb {
            let occ = occupancy[l * nb + b];
            if occ == 0 {
                return Err(Error::ZeroMeasureTestBall { ball: b, lag: lag as usize });
            }
            let mu_b = occ as f64 / t;
            for a in 0..nb {
                let cnt = joint[l * nb * nb + a * nb + b];
                let p = cnt as f64 / t;
                let value = (p - mu_exact[a] * mu_b).abs() / mu_b;
                if value > best {
                    // Laplace-smoothed binomial error of the joint estimate,
                    // expressed on the normalized scale.
                    let ps = (cnt as f64 + 1.0) / (t + 2.0);
                    best = value;
                    best_se = (ps * (1.0 - ps) / t).sqrt() / mu_b;
                }
            }
        }
        psi.push(best);
        stderr.push(best_se * factor);
    }
    Ok(MixingProfile { lags: lags.to_vec(), psi, stderr })
}

/// Exponential fit of a mixing profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MixingFit {
    /// psi(n) ~= c gamma^n fitted over the lags that rise above noise.
    Exponential { c_hat: f64, gamma_hat: f64, lags_used: usize },
    /// No lag exceeded its noise floor (or only one did).
    IndistinguishableFromZero,
}

/// Least-squares fit of log psi(n) = log c + n log gamma over the lags where
/// the estimate exceeds three standard errors. Needs at least two such lags
/// (systems whose correlations vanish after finitely many steps may expose
/// only two informative lags, e.g. width-1/8 dyadic balls under the doubling
/// map).
pub fn fit_mixing_rate(profile: &MixingProfile) -> MixingFit {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..profile.lags.len() {
        if profile.psi[i] > 3.0 * profile.stderr[i] && profile.psi[i] > 0.0 {
            xs.push(profile.lags[i] as f64);
            ys.push(profile.psi[i].ln());
        }
    }
    if xs.len() < 2 {
        return MixingFit::IndistinguishableFromZero;
    }
    match linear_fit(&xs, &ys) {
        Some(fit) => MixingFit::Exponential {
            c_hat: fit.intercept.exp(),
            gamma_hat: fit.slope.exp().clamp(1e-12, 1.0 - 1e-12),
            lags_used: xs.len(),
        },
        None => MixingFit::IndistinguishableFromZero,
    }
}

/// The dyadic ball family used by the mixing experiments: `2^level` balls of
/// radius `2^-(level+1)` centered mid-cell, i.e. the full dyadic partition at
/// that level, expressed as metric balls.
pub fn dyadic_test_balls(level: u32) -> Vec<(Point, f64)> {
    let cells = 1u64 << level;
    let r = 0.5 / cells as f64;
    (0..cells)
        .map(|j| (Point::Coord((2 * j + 1) as f64 * r), r))
        .collect()
}
