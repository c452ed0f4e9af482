//! Monte Carlo core: hit counting against shrinking targets, covered-measure
//! estimation over index windows, the limsup surrogate built from a geometric
//! window ladder, second-moment (Paley–Zygmund) diagnostics, and density mesh
//! checks. Trials are seeded independently and run in parallel; every
//! aggregate is a deterministic function of the master seed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::process::{ProcessSpec, Trajectory};
use crate::schedule::RadiusSchedule;
use crate::space::{Point, SpaceKind, SpaceSpec};
use crate::util::{mean_stderr, trial_seed};

/// Finest spatial-index resolution: cells never get narrower than 2^-20.
const MIN_CELL_WIDTH: f64 = 1.0 / (1 << 20) as f64;

/// An inclusive index window [first, last] — a finite truncation of the tail
/// union ∪_{n ≥ first} B_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub first: u64,
    pub last: u64,
}

impl Window {
    pub fn new(first: u64, last: u64) -> Result<Window> {
        if first == 0 || last < first {
            return Err(Error::InvalidWindow);
        }
        Ok(Window { first, last })
    }

    pub fn len(&self) -> u64 {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.first..=self.last).contains(&n)
    }
}

/// The default ladder: dyadic windows [2^j, 2^{j+1}) for j in lo..=hi.
/// A probe covered in every rung is the finite surrogate of "covered
/// infinitely often"; geometric windows spread a divergent series' mass
/// evenly across rungs.
pub fn geometric_ladder(j_lo: u32, j_hi: u32) -> Result<Vec<Window>> {
    if j_hi < j_lo || j_hi >= 63 {
        return Err(Error::InvalidLadder);
    }
    (j_lo..=j_hi)
        .map(|j| Window::new(1 << j, (1 << (j + 1)) - 1))
        .collect()
}

fn validate_ladder(ladder: &[Window]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidLadder);
    }
    for w in ladder {
        if w.first == 0 || w.last < w.first {
            return Err(Error::InvalidWindow);
        }
    }
    if ladder.windows(2).any(|p| p[1].first <= p[0].last) {
        return Err(Error::InvalidLadder);
    }
    Ok(())
}

/// Per-trial hit statistics of one trajectory against one shrinking target.
#[derive(Clone, Debug, PartialEq)]
pub struct HitStats {
    pub target: Point,
    pub checkpoints: Vec<u64>,
    /// S_N = #{n ≤ N : d(ξ_n, target) < r_n} at each checkpoint.
    pub counts: Vec<u64>,
    /// Per ladder window: did any index in the window score a hit.
    pub window_hits: Vec<bool>,
}

impl HitStats {
    /// S_N at the final checkpoint.
    pub fn final_count(&self) -> u64 {
        *self.counts.last().expect("checkpoints are validated nonempty")
    }

    pub fn all_windows_hit(&self) -> bool {
        self.window_hits.iter().all(|&b| b)
    }
}

/// Counts trajectory entries into the shrinking balls B(target, r_n).
/// Checkpoints must be strictly increasing; checkpoints and ladder windows
/// must fit inside the trajectory.
pub fn hit_counts(
    space: &SpaceSpec,
    traj: &Trajectory,
    sched: &RadiusSchedule,
    target: Point,
    checkpoints: &[u64],
    ladder: &[Window],
) -> Result<HitStats> {
    if checkpoints.is_empty() || checkpoints[0] == 0 {
        return Err(Error::Config("hit counting needs at least one checkpoint >= 1".into()));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("checkpoints must be strictly increasing".into()));
    }
    for w in ladder {
        if w.first == 0 || w.last < w.first {
            return Err(Error::InvalidWindow);
        }
    }
    let len = traj.len() as u64;
    let need = checkpoints
        .last()
        .copied()
        .unwrap()
        .max(ladder.iter().map(|w| w.last).max().unwrap_or(0));
    if need > len {
        return Err(Error::Config(format!(
            "checkpoint/window end {need} exceeds trajectory length {len}"
        )));
    }

    let target_coord = space.embed(target)?;
    let radii = sched.prefix(need as usize)?;
    let mut counts = Vec::with_capacity(checkpoints.len());
    let mut window_hits = vec![false; ladder.len()];
    let mut s = 0u64;
    let mut next_cp = 0usize;
    for n in 1..=need {
        let x = space.embed(traj.points[(n - 1) as usize])?;
        let r = radii[(n - 1) as usize];
        if space.metric_on_coords(x, target_coord) < r {
            s += 1;
            for (i, w) in ladder.iter().enumerate() {
                if w.contains(n) {
                    window_hits[i] = true;
                }
            }
        }
        while next_cp < checkpoints.len() && checkpoints[next_cp] == n {
            counts.push(s);
            next_cp += 1;
        }
    }
    Ok(HitStats { target, checkpoints: checkpoints.to_vec(), counts, window_hits })
}

/// Runs `trials` independently seeded trajectories through `hit_counts`.
pub fn hit_trials(
    proc: &ProcessSpec,
    sched: &RadiusSchedule,
    target: Point,
    checkpoints: &[u64],
    ladder: &[Window],
    trials: usize,
    seed: u64,
) -> Result<Vec<HitStats>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let need = checkpoints
        .last()
        .copied()
        .unwrap_or(0)
        .max(ladder.iter().map(|w| w.last).max().unwrap_or(0)) as usize;
    if need == 0 {
        return Err(Error::Config("hit counting needs at least one checkpoint >= 1".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let traj = proc.generate(need, trial_seed(seed, i as u64))?;
            hit_counts(&proc.space, &traj, sched, target, checkpoints, ladder)
        })
        .collect()
}

/// Fraction of trials whose trajectory hit the target in every ladder window.
pub fn all_windows_hit_fraction(stats: &[HitStats]) -> f64 {
    if stats.is_empty() {
        return f64::NAN;
    }
    stats.iter().filter(|h| h.all_windows_hit()).count() as f64 / stats.len() as f64
}

/// Second-moment diagnostics of the final hit counts across trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaleyZygmund {
    pub lambda: f64,
    pub trials: usize,
    pub mean_s: f64,
    pub mean_s2: f64,
    /// Fraction of trials with S >= lambda * mean_s.
    pub empirical_prob: f64,
    /// Binomial standard error of `empirical_prob`.
    pub empirical_stderr: f64,
    /// (1-lambda)^2 mean_s^2 / mean_s2 — the second-moment lower bound on
    /// P(S >= lambda E S).
    pub pz_bound: f64,
    /// mean_s2 - mean_s - mean_s^2: zero-ish for independent hits, positive
    /// under positive correlation. (For an independent-indicator sum the
    /// exact value is -Σ p_n^2 <= 0.)
    pub second_moment_slack: f64,
}

/// Evaluates the Paley–Zygmund lower bound on the empirical hit counts.
/// Needs at least 100 trials for the bound's sampling error to be meaningful.
pub fn paley_zygmund_report(stats: &[HitStats], lambda: f64) -> Result<PaleyZygmund> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    if stats.len() < 100 {
        return Err(Error::Config(format!(
            "paley-zygmund diagnostics need >= 100 trials, got {}",
            stats.len()
        )));
    }
    let trials = stats.len();
    let finals: Vec<f64> = stats.iter().map(|h| h.final_count() as f64).collect();
    let mean_s = finals.iter().sum::<f64>() / trials as f64;
    let mean_s2 = finals.iter().map(|s| s * s).sum::<f64>() / trials as f64;
    if mean_s2 == 0.0 {
        return Err(Error::DegenerateHits);
    }
    let threshold = lambda * mean_s;
    let hits = finals.iter().filter(|&&s| s >= threshold).count();
    let p = hits as f64 / trials as f64;
    Ok(PaleyZygmund {
        lambda,
        trials,
        mean_s,
        mean_s2,
        empirical_prob: p,
        empirical_stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        pz_bound: (1.0 - lambda) * (1.0 - lambda) * mean_s * mean_s / mean_s2,
        second_moment_slack: mean_s2 - mean_s - mean_s * mean_s,
    })
}

/// Covered-measure estimate over an index-window ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverReport {
    pub probes: usize,
    pub trials: usize,
    pub windows: Vec<Window>,
    /// Mean fraction of probes covered within each window.
    pub fraction_by_window: Vec<f64>,
    pub fraction_stderr: Vec<f64>,
    /// Mean fraction of probes covered in EVERY window of the ladder.
    pub limsup_fraction: f64,
    pub limsup_stderr: f64,
    pub seeds: Vec<u64>,
}

/// Estimates the measure of ∪_{n in window} B(ξ_n, r_n) with probes drawn
/// from the reference measure (the Fubini reduction: the mean probe coverage
/// is exactly E μ(union)).
pub fn covered_fraction(
    proc: &ProcessSpec,
    sched: &RadiusSchedule,
    window: Window,
    probes: usize,
    trials: usize,
    seed: u64,
) -> Result<CoverReport> {
    limsup_proxy(proc, sched, &[window], probes, trials, seed)
}

/// Estimates the measure of the limsup surrogate: probes covered in every
/// rung of the ladder. Ladder windows must be disjoint and increasing.
pub fn limsup_proxy(
    proc: &ProcessSpec,
    sched: &RadiusSchedule,
    ladder: &[Window],
    probes: usize,
    trials: usize,
    seed: u64,
) -> Result<CoverReport> {
    validate_ladder(ladder)?;
    if probes == 0 {
        return Err(Error::NoProbes);
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let horizon = ladder.last().unwrap().last as usize;
    let radii = sched.prefix(horizon)?;
    let wrap = matches!(proc.space.kind, SpaceKind::Circle);

    let per_trial: Vec<(Vec<f64>, f64, u64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let tseed = trial_seed(seed, i as u64);
            let probe_coords = sample_probe_coords(proc, probes, trial_seed(tseed, 0));
            let coords = trajectory_coords(proc, horizon, trial_seed(tseed, 1));
            let mut all = vec![true; probes];
            let mut fractions = Vec::with_capacity(ladder.len());
            for w in ladder {
                let mask = covered_mask_indexed(
                    &proc.space,
                    &coords,
                    &radii,
                    *w,
                    &probe_coords,
                    wrap,
                );
                let covered = mask.iter().filter(|&&b| b).count();
                fractions.push(covered as f64 / probes as f64);
                for (a, &m) in all.iter_mut().zip(&mask) {
                    *a &= m;
                }
            }
            let limsup = all.iter().filter(|&&b| b).count() as f64 / probes as f64;
            (fractions, limsup, tseed)
        })
        .collect();

    let mut fraction_by_window = Vec::with_capacity(ladder.len());
    let mut fraction_stderr = Vec::with_capacity(ladder.len());
    for wi in 0..ladder.len() {
        let col: Vec<f64> = per_trial.iter().map(|(f, _, _)| f[wi]).collect();
        let (m, se) = mean_stderr(&col);
        fraction_by_window.push(m);
        fraction_stderr.push(se);
    }
    let limsups: Vec<f64> = per_trial.iter().map(|(_, l, _)| *l).collect();
    let (limsup_fraction, limsup_stderr) = mean_stderr(&limsups);
    Ok(CoverReport {
        probes,
        trials,
        windows: ladder.to_vec(),
        fraction_by_window,
        fraction_stderr,
        limsup_fraction,
        limsup_stderr,
        seeds: per_trial.into_iter().map(|(_, _, s)| s).collect(),
    })
}

/// Embedded coordinates of the probes covered within one window, for one
/// seeded trial — the point set handed to box counting.
pub fn covered_probe_coords(
    proc: &ProcessSpec,
    sched: &RadiusSchedule,
    window: Window,
    probes: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if probes == 0 {
        return Err(Error::NoProbes);
    }
    if window.first == 0 || window.last < window.first {
        return Err(Error::InvalidWindow);
    }
    let horizon = window.last as usize;
    let radii = sched.prefix(horizon)?;
    let wrap = matches!(proc.space.kind, SpaceKind::Circle);
    let tseed = trial_seed(seed, 0);
    let probe_coords = sample_probe_coords(proc, probes, trial_seed(tseed, 0));
    let coords = trajectory_coords(proc, horizon, trial_seed(tseed, 1));
    let mask = covered_mask_indexed(&proc.space, &coords, &radii, window, &probe_coords, wrap);
    Ok(probe_coords
        .into_iter()
        .zip(mask)
        .filter_map(|(x, m)| if m { Some(x) } else { None })
        .collect())
}

fn sample_probe_coords(proc: &ProcessSpec, probes: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..probes)
        .map(|_| {
            let p = proc.space.sample_measure(&mut rng);
            proc.space.embed(p).expect("sampled point belongs to the space")
        })
        .collect()
}

fn trajectory_coords(proc: &ProcessSpec, horizon: usize, seed: u64) -> Vec<f64> {
    let traj = proc.generate(horizon, seed).expect("horizon >= 1 by validation");
    traj.points
        .iter()
        .map(|&p| proc.space.embed(p).expect("generated point belongs to the space"))
        .collect()
}

/// CSR bucketing of probe coordinates into a uniform grid over [0,1].
struct ProbeGrid {
    ncells: usize,
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl ProbeGrid {
    fn build(probe_coords: &[f64], target_width: f64) -> ProbeGrid {
        let ncells = (1.0 / target_width.max(MIN_CELL_WIDTH)).floor().max(1.0) as usize;
        let cell = |x: f64| -> usize {
            ((x.max(0.0) * ncells as f64) as usize).min(ncells - 1)
        };
        let mut counts = vec![0u32; ncells + 1];
        for &x in probe_coords {
            counts[cell(x) + 1] += 1;
        }
        for i in 1..=ncells {
            counts[i] += counts[i - 1];
        }
        let offsets = counts;
        let mut cursor = offsets[..ncells].to_vec();
        let mut items = vec![0u32; probe_coords.len()];
        for (p, &x) in probe_coords.iter().enumerate() {
            let c = cell(x);
            items[cursor[c] as usize] = p as u32;
            cursor[c] += 1;
        }
        ProbeGrid { ncells, offsets, items }
    }

    fn cell_items(&self, c: usize) -> &[u32] {
        &self.items[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }
}

/// Marks the probes covered by some ball of the window, using a uniform-grid
/// index sized to the window's final radius. Bit-identical to the naive scan:
/// the candidate cells form a superset of the ball's reach and membership is
/// always decided by the exact metric test.
fn covered_mask_indexed(
    space: &SpaceSpec,
    traj_coords: &[f64],
    radii: &[f64],
    w: Window,
    probe_coords: &[f64],
    wrap: bool,
) -> Vec<bool> {
    let r_end = radii[(w.last - 1) as usize];
    let grid = ProbeGrid::build(probe_coords, r_end);
    let nc = grid.ncells as f64;
    let mut mask = vec![false; probe_coords.len()];
    for n in w.first..=w.last {
        let idx = (n - 1) as usize;
        let r = radii[idx];
        if r <= 0.0 {
            continue;
        }
        let x = traj_coords[idx];
        let lo = ((x - r) * nc).floor() as i64;
        let hi = ((x + r) * nc).floor() as i64;
        let span = hi - lo;
        if wrap {
            if span + 1 >= grid.ncells as i64 {
                for (p, &y) in probe_coords.iter().enumerate() {
                    if !mask[p] && space.metric_on_coords(x, y) < r {
                        mask[p] = true;
                    }
                }
                continue;
            }
            for k in 0..=span {
                let c = (lo + k).rem_euclid(grid.ncells as i64) as usize;
                for &p in grid.cell_items(c) {
                    let p = p as usize;
                    if !mask[p] && space.metric_on_coords(x, probe_coords[p]) < r {
                        mask[p] = true;
                    }
                }
            }
        } else {
            let c_lo = lo.max(0) as usize;
            let c_hi = (hi.min(grid.ncells as i64 - 1)).max(0) as usize;
            for c in c_lo..=c_hi {
                for &p in grid.cell_items(c) {
                    let p = p as usize;
                    if !mask[p] && space.metric_on_coords(x, probe_coords[p]) < r {
                        mask[p] = true;
                    }
                }
            }
        }
    }
    mask
}

/// Reference implementation of the window-coverage mask: test every probe
/// against every ball.
#[allow(dead_code)]
fn covered_mask_naive(
    space: &SpaceSpec,
    traj_coords: &[f64],
    radii: &[f64],
    w: Window,
    probe_coords: &[f64],
) -> Vec<bool> {
    let mut mask = vec![false; probe_coords.len()];
    for n in w.first..=w.last {
        let idx = (n - 1) as usize;
        let r = radii[idx];
        if r <= 0.0 {
            continue;
        }
        let x = traj_coords[idx];
        for (p, &y) in probe_coords.iter().enumerate() {
            if !mask[p] && space.metric_on_coords(x, y) < r {
                mask[p] = true;
            }
        }
    }
    mask
}

/// Density diagnostics: per mesh ball, how often the tail trajectory's balls
/// intersect it.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub trials: usize,
    pub start: u64,
    pub budget: u64,
    /// Per mesh ball: fraction of trials with some n in [start, budget]
    /// satisfying d(ξ_n, a_i) < ρ_i + r_n.
    pub hit_probability: Vec<f64>,
    /// Fraction of trials in which every mesh ball was hit.
    pub all_hit_probability: f64,
    pub all_hit_stderr: f64,
    /// Mean first-hit index per ball, over the trials that hit it.
    pub first_hit_mean: Vec<Option<f64>>,
    pub seeds: Vec<u64>,
}

/// For each mesh ball B(a_i, ρ_i), estimates the probability that some
/// covering ball with index in [start, budget] intersects it — the
/// ball-intersection events behind density and residuality checks.
/// Trajectories are generated in growing prefixes so trials that hit every
/// ball early never pay for the full budget.
pub fn density_check(
    proc: &ProcessSpec,
    sched: &RadiusSchedule,
    start: u64,
    budget: u64,
    mesh: &[(Point, f64)],
    trials: usize,
    seed: u64,
) -> Result<DensityReport> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if start == 0 {
        return Err(Error::ZeroIndex);
    }
    if budget < start {
        return Err(Error::InvalidWindow);
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let nb = mesh.len();
    let mut centers = Vec::with_capacity(nb);
    for &(a, rho) in mesh {
        if rho <= 0.0 {
            return Err(Error::NonPositiveRadius(rho));
        }
        centers.push((proc.space.embed(a)?, rho));
    }
    let radii = sched.prefix(budget as usize)?;

    let per_trial: Vec<(Vec<u64>, u64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let tseed = trial_seed(seed, i as u64);
            let gseed = trial_seed(tseed, 1);
            // first_hit[b] = 0 until ball b is hit.
            let mut first_hit = vec![0u64; nb];
            let mut remaining = nb;
            let mut scanned = start - 1;
            let mut size = (start + 1024).min(budget);
            'grow: loop {
                let coords = trajectory_coords(proc, size as usize, gseed);
                for n in (scanned + 1)..=size {
                    let x = coords[(n - 1) as usize];
                    let r = radii[(n - 1) as usize];
                    for (b, &(a, rho)) in centers.iter().enumerate() {
                        if first_hit[b] == 0 && proc.space.metric_on_coords(x, a) < rho + r {
                            first_hit[b] = n;
                            remaining -= 1;
                        }
                    }
                    if remaining == 0 {
                        break 'grow;
                    }
                }
                scanned = size;
                if size == budget {
                    break;
                }
                size = (size * 2).min(budget);
            }
            (first_hit, tseed)
        })
        .collect();

    let mut hit_probability = Vec::with_capacity(nb);
    let mut first_hit_mean = Vec::with_capacity(nb);
    for b in 0..nb {
        let hits: Vec<u64> = per_trial
            .iter()
            .filter_map(|(fh, _)| if fh[b] > 0 { Some(fh[b]) } else { None })
            .collect();
        hit_probability.push(hits.len() as f64 / trials as f64);
        first_hit_mean.push(if hits.is_empty() {
            None
        } else {
            Some(hits.iter().sum::<u64>() as f64 / hits.len() as f64)
        });
    }
    let all_flags: Vec<f64> = per_trial
        .iter()
        .map(|(fh, _)| if fh.iter().all(|&n| n > 0) { 1.0 } else { 0.0 })
        .collect();
    let (all_hit_probability, all_hit_stderr) = mean_stderr(&all_flags);
    Ok(DensityReport {
        trials,
        start,
        budget,
        hit_probability,
        all_hit_probability,
        all_hit_stderr,
        first_hit_mean,
        seeds: per_trial.into_iter().map(|(_, s)| s).collect(),
    })
}
