//! Experiment configuration: a flat key-value text format with dotted keys,
//! `#` comments, and decimal numbers. Parsing fills documented defaults,
//! validates every constraint with the offending key named, and rejects
//! unknown keys with a nearest-match suggestion.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::process::{MarkovMixer, ProcessKind, ProcessSpec};
use crate::schedule::{DimensionFunction, RadiusSchedule};
use crate::space::{SpaceSpec, GOLDEN_RATIO};
use crate::util::edit_distance;
use crate::DEFAULT_MASTER_SEED;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Dichotomy,
    Dimension,
    Hitting,
    Pz,
    Density,
    Mixing,
    Shepp,
    Ahlfors,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Dichotomy => "dichotomy",
            ExperimentKind::Dimension => "dimension",
            ExperimentKind::Hitting => "hitting",
            ExperimentKind::Pz => "pz",
            ExperimentKind::Density => "density",
            ExperimentKind::Mixing => "mixing",
            ExperimentKind::Shepp => "shepp",
            ExperimentKind::Ahlfors => "ahlfors",
        }
    }

    pub fn parse(s: &str) -> Result<ExperimentKind> {
        Ok(match s {
            "dichotomy" => ExperimentKind::Dichotomy,
            "dimension" => ExperimentKind::Dimension,
            "hitting" => ExperimentKind::Hitting,
            "pz" => ExperimentKind::Pz,
            "density" => ExperimentKind::Density,
            "mixing" => ExperimentKind::Mixing,
            "shepp" => ExperimentKind::Shepp,
            "ahlfors" => ExperimentKind::Ahlfors,
            other => {
                return Err(Error::Config(format!(
                    "experiment: unknown experiment `{other}`"
                )))
            }
        })
    }
}

/// Declared behavioral expectation; failure flags are only emitted when one
/// is declared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Unstated,
    /// Divergent-series behavior: full coverage / certain hitting.
    Divergent,
    /// Convergent-series behavior: vanishing coverage / finitely many hits.
    Convergent,
    /// Exponentially decaying dependence with a visible rate.
    Mixing,
    /// Dependence indistinguishable from zero.
    Zero,
}

impl Expectation {
    fn name(&self) -> &'static str {
        match self {
            Expectation::Unstated => "none",
            Expectation::Divergent => "divergent",
            Expectation::Convergent => "convergent",
            Expectation::Mixing => "mixing",
            Expectation::Zero => "zero",
        }
    }

    fn parse(s: &str) -> Result<Expectation> {
        Ok(match s {
            "none" => Expectation::Unstated,
            "divergent" => Expectation::Divergent,
            "convergent" => Expectation::Convergent,
            "mixing" => Expectation::Mixing,
            "zero" => Expectation::Zero,
            other => {
                return Err(Error::Config(format!(
                    "expect: unknown expectation `{other}` \
                     (use none, divergent, convergent, mixing, or zero)"
                )))
            }
        })
    }
}

/// Pass/fail thresholds, all overridable from the config file.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    pub full_coverage: f64,
    pub measure_zero: f64,
    pub hit: f64,
    pub all_hit: f64,
    pub gamma: f64,
    pub s_tol: f64,
    pub box_tol: f64,
    pub box_r2: f64,
    pub shepp_growth: f64,
    pub shepp_tail: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds {
            full_coverage: 0.95,
            measure_zero: 0.05,
            hit: 0.95,
            all_hit: 0.99,
            gamma: 0.6,
            s_tol: 0.03,
            box_tol: 0.05,
            box_r2: 0.99,
            shepp_growth: 10.0,
            shepp_tail: 1e-3,
        }
    }
}

/// A fully resolved experiment configuration. Every field carries its
/// documented default, so an echoed config parses back to an equal value.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub space_kind: String,
    pub space_beta: f64,
    pub cantor_depth: u32,
    pub process_kind: String,
    pub process_beta: Option<f64>,
    pub markov_bins: usize,
    pub markov_eps: f64,
    pub radii_kind: String,
    pub radii_a: f64,
    pub radii_alpha: f64,
    pub radii_b: f64,
    pub radii_file: Option<PathBuf>,
    pub dimfn: Option<(String, f64, f64)>,
    pub trials: usize,
    pub probes: usize,
    pub ladder: Vec<u32>,
    pub window: (u64, u64),
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub expect: Expectation,
    pub hitting_target: f64,
    pub pz_lambda: Vec<f64>,
    pub pz_n: u64,
    pub density_mesh: usize,
    pub density_radius: f64,
    pub density_start: u64,
    pub density_budget: u64,
    pub mixing_level: u32,
    pub mixing_lags: Vec<u64>,
    pub shepp_n: u64,
    pub ahlfors_centers: usize,
    pub dimension_grid: Vec<f64>,
    pub box_probes: usize,
    pub thresholds: Thresholds,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            experiment: None,
            space_kind: "circle".into(),
            space_beta: GOLDEN_RATIO,
            cantor_depth: 40,
            process_kind: "iid".into(),
            process_beta: None,
            markov_bins: 8,
            markov_eps: 0.2,
            radii_kind: "power".into(),
            radii_a: 0.1,
            radii_alpha: 0.9,
            radii_b: 0.0,
            radii_file: None,
            dimfn: None,
            trials: 20,
            probes: 10_000,
            ladder: (10..=19).collect(),
            window: (10_000, 1_000_000),
            master_seed: DEFAULT_MASTER_SEED,
            output: None,
            expect: Expectation::Unstated,
            hitting_target: 1.0 / 3.0,
            pz_lambda: vec![0.25, 0.5, 0.75],
            pz_n: 10_000,
            density_mesh: 64,
            density_radius: 1.0 / 64.0,
            density_start: 1000,
            density_budget: 1_000_000,
            mixing_level: 3,
            mixing_lags: (1..=12).collect(),
            shepp_n: 1_000_000,
            ahlfors_centers: 1000,
            dimension_grid: vec![0.3, 0.4, 0.6, 0.7],
            box_probes: 100_000,
            thresholds: Thresholds::default(),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "space.kind",
    "space.beta",
    "space.cantor_depth",
    "process.kind",
    "process.beta",
    "process.markov.bins",
    "process.markov.eps",
    "radii.kind",
    "radii.a",
    "radii.alpha",
    "radii.b",
    "radii.file",
    "dimfn.kind",
    "dimfn.t",
    "dimfn.b",
    "trials",
    "probes",
    "ladder",
    "window.first",
    "window.last",
    "master_seed",
    "output",
    "expect",
    "hitting.target",
    "pz.lambda",
    "pz.n",
    "density.mesh",
    "density.radius",
    "density.start",
    "density.budget",
    "mixing.level",
    "mixing.lags",
    "shepp.n",
    "ahlfors.centers",
    "dimension.grid",
    "dimension.box_probes",
    "threshold.full_coverage",
    "threshold.measure_zero",
    "threshold.hit",
    "threshold.all_hit",
    "threshold.gamma",
    "threshold.s_tol",
    "threshold.box_tol",
    "threshold.box_r2",
    "threshold.shepp_growth",
    "threshold.shepp_tail",
];

fn suggest(key: &str) -> Option<&'static str> {
    KNOWN_KEYS
        .iter()
        .map(|&k| (edit_distance(key, k), k))
        .min()
        .filter(|&(d, _)| d <= 2)
        .map(|(_, k)| k)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: expected a number, got `{v}`")))
}

fn parse_count(key: &str, v: &str) -> Result<u64> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    // Accept scientific notation for counts (1e6 and friends).
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => {
            Ok(x as u64)
        }
        _ => Err(Error::Config(format!("{key}: expected a nonnegative integer, got `{v}`"))),
    }
}

fn parse_seed(key: &str, v: &str) -> Result<u64> {
    if let Some(hex) = v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        let cleaned: String = hex.chars().filter(|&c| c != '_').collect();
        return u64::from_str_radix(&cleaned, 16)
            .map_err(|_| Error::Config(format!("{key}: expected a 64-bit integer, got `{v}`")));
    }
    parse_count(key, v)
}

/// "3..7" (inclusive range) or "3,5,9" (explicit list), strictly increasing.
fn parse_index_list(key: &str, v: &str) -> Result<Vec<u64>> {
    let items: Vec<u64> = if let Some((a, b)) = v.split_once("..") {
        let lo = parse_count(key, a.trim())?;
        let hi = parse_count(key, b.trim())?;
        if hi < lo {
            return Err(Error::Config(format!("{key}: empty range `{v}`")));
        }
        (lo..=hi).collect()
    } else {
        v.split(',')
            .map(|p| parse_count(key, p.trim()))
            .collect::<Result<Vec<u64>>>()?
    };
    if items.is_empty() || items.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!(
            "{key}: expected a strictly increasing list, got `{v}`"
        )));
    }
    Ok(items)
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items = v
        .split(',')
        .map(|p| parse_f64(key, p.trim()))
        .collect::<Result<Vec<f64>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: expected a nonempty list")));
    }
    Ok(items)
}

/// Parses the flat key-value document into a validated config with defaults
/// filled. Space/process compatibility is checked eagerly so errors surface
/// at parse time.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut raw: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if raw.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("duplicate key `{key}`")));
        }
    }

    for key in raw.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(match suggest(key) {
                Some(s) => {
                    Error::Config(format!("unknown key `{key}` (did you mean `{s}`?)"))
                }
                None => Error::Config(format!("unknown key `{key}`")),
            });
        }
    }

    let mut cfg = ExperimentConfig::default();
    let mut take = |k: &str| raw.remove(k);

    if let Some(v) = take("experiment") {
        cfg.experiment = Some(ExperimentKind::parse(&v)?);
    }
    if let Some(v) = take("space.kind") {
        cfg.space_kind = v;
    }
    if let Some(v) = take("space.beta") {
        cfg.space_beta = parse_f64("space.beta", &v)?;
    }
    if let Some(v) = take("space.cantor_depth") {
        cfg.cantor_depth = parse_count("space.cantor_depth", &v)? as u32;
    }
    if let Some(v) = take("process.kind") {
        cfg.process_kind = v;
    }
    if let Some(v) = take("process.beta") {
        cfg.process_beta = Some(parse_f64("process.beta", &v)?);
    }
    if let Some(v) = take("process.markov.bins") {
        cfg.markov_bins = parse_count("process.markov.bins", &v)? as usize;
    }
    if let Some(v) = take("process.markov.eps") {
        cfg.markov_eps = parse_f64("process.markov.eps", &v)?;
    }
    if let Some(v) = take("radii.kind") {
        cfg.radii_kind = v;
    }
    if let Some(v) = take("radii.a") {
        cfg.radii_a = parse_f64("radii.a", &v)?;
    }
    if let Some(v) = take("radii.alpha") {
        cfg.radii_alpha = parse_f64("radii.alpha", &v)?;
    }
    if let Some(v) = take("radii.b") {
        cfg.radii_b = parse_f64("radii.b", &v)?;
    }
    if let Some(v) = take("radii.file") {
        cfg.radii_file = Some(PathBuf::from(v));
    }
    let dim_kind = take("dimfn.kind");
    let dim_t = take("dimfn.t");
    let dim_b = take("dimfn.b");
    if dim_kind.is_some() || dim_t.is_some() || dim_b.is_some() {
        let kind = dim_kind.unwrap_or_else(|| "power".into());
        let t = match dim_t {
            Some(v) => parse_f64("dimfn.t", &v)?,
            None => 0.5,
        };
        let b = match dim_b {
            Some(v) => parse_f64("dimfn.b", &v)?,
            None => 0.0,
        };
        cfg.dimfn = Some((kind, t, b));
    }
    if let Some(v) = take("trials") {
        cfg.trials = parse_count("trials", &v)? as usize;
    }
    if let Some(v) = take("probes") {
        cfg.probes = parse_count("probes", &v)? as usize;
    }
    if let Some(v) = take("ladder") {
        cfg.ladder = parse_index_list("ladder", &v)?
            .into_iter()
            .map(|j| j as u32)
            .collect();
    }
    if let Some(v) = take("window.first") {
        cfg.window.0 = parse_count("window.first", &v)?;
    }
    if let Some(v) = take("window.last") {
        cfg.window.1 = parse_count("window.last", &v)?;
    }
    if let Some(v) = take("master_seed") {
        cfg.master_seed = parse_seed("master_seed", &v)?;
    }
    if let Some(v) = take("output") {
        cfg.output = Some(PathBuf::from(v));
    }
    if let Some(v) = take("expect") {
        cfg.expect = Expectation::parse(&v)?;
    }
    if let Some(v) = take("hitting.target") {
        cfg.hitting_target = parse_f64("hitting.target", &v)?;
    }
    if let Some(v) = take("pz.lambda") {
        cfg.pz_lambda = parse_f64_list("pz.lambda", &v)?;
    }
    if let Some(v) = take("pz.n") {
        cfg.pz_n = parse_count("pz.n", &v)?;
    }
    if let Some(v) = take("density.mesh") {
        cfg.density_mesh = parse_count("density.mesh", &v)? as usize;
    }
    if let Some(v) = take("density.radius") {
        cfg.density_radius = parse_f64("density.radius", &v)?;
    }
    if let Some(v) = take("density.start") {
        cfg.density_start = parse_count("density.start", &v)?;
    }
    if let Some(v) = take("density.budget") {
        cfg.density_budget = parse_count("density.budget", &v)?;
    }
    if let Some(v) = take("mixing.level") {
        cfg.mixing_level = parse_count("mixing.level", &v)? as u32;
    }
    if let Some(v) = take("mixing.lags") {
        cfg.mixing_lags = parse_index_list("mixing.lags", &v)?;
    }
    if let Some(v) = take("shepp.n") {
        cfg.shepp_n = parse_count("shepp.n", &v)?;
    }
    if let Some(v) = take("ahlfors.centers") {
        cfg.ahlfors_centers = parse_count("ahlfors.centers", &v)? as usize;
    }
    if let Some(v) = take("dimension.grid") {
        cfg.dimension_grid = parse_f64_list("dimension.grid", &v)?;
    }
    if let Some(v) = take("dimension.box_probes") {
        cfg.box_probes = parse_count("dimension.box_probes", &v)? as usize;
    }
    let th = &mut cfg.thresholds;
    if let Some(v) = take("threshold.full_coverage") {
        th.full_coverage = parse_f64("threshold.full_coverage", &v)?;
    }
    if let Some(v) = take("threshold.measure_zero") {
        th.measure_zero = parse_f64("threshold.measure_zero", &v)?;
    }
    if let Some(v) = take("threshold.hit") {
        th.hit = parse_f64("threshold.hit", &v)?;
    }
    if let Some(v) = take("threshold.all_hit") {
        th.all_hit = parse_f64("threshold.all_hit", &v)?;
    }
    if let Some(v) = take("threshold.gamma") {
        th.gamma = parse_f64("threshold.gamma", &v)?;
    }
    if let Some(v) = take("threshold.s_tol") {
        th.s_tol = parse_f64("threshold.s_tol", &v)?;
    }
    if let Some(v) = take("threshold.box_tol") {
        th.box_tol = parse_f64("threshold.box_tol", &v)?;
    }
    if let Some(v) = take("threshold.box_r2") {
        th.box_r2 = parse_f64("threshold.box_r2", &v)?;
    }
    if let Some(v) = take("threshold.shepp_growth") {
        th.shepp_growth = parse_f64("threshold.shepp_growth", &v)?;
    }
    if let Some(v) = take("threshold.shepp_tail") {
        th.shepp_tail = parse_f64("threshold.shepp_tail", &v)?;
    }

    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Cross-field validation: everything buildable is built once.
    pub fn validate(&self) -> Result<()> {
        let space = self.build_space()?;
        self.build_process(&space)?;
        if self.radii_file.is_none() {
            self.build_schedule()?;
        } else if self.radii_kind != "explicit" {
            return Err(Error::Config(
                "radii.file: only valid with radii.kind = explicit".into(),
            ));
        }
        self.build_dimension_function()?;
        if self.trials == 0 {
            return Err(Error::Config("trials: must be at least 1".into()));
        }
        if self.probes == 0 {
            return Err(Error::Config("probes: must be at least 1".into()));
        }
        if self.ladder.is_empty() || self.ladder.iter().any(|&j| j >= 63) {
            return Err(Error::Config("ladder: exponents must lie below 63".into()));
        }
        if self.window.0 == 0 || self.window.1 < self.window.0 {
            return Err(Error::Config(
                "window.first/window.last: need 1 <= first <= last".into(),
            ));
        }
        if self.pz_lambda.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
            return Err(Error::Config("pz.lambda: values must lie in (0, 1)".into()));
        }
        if !(self.density_radius > 0.0) {
            return Err(Error::Config("density.radius: must be positive".into()));
        }
        if self.density_mesh == 0 {
            return Err(Error::Config("density.mesh: must be at least 1".into()));
        }
        if self.density_start == 0 || self.density_budget < self.density_start {
            return Err(Error::Config(
                "density.start/density.budget: need 1 <= start <= budget".into(),
            ));
        }
        if self.mixing_level == 0 || self.mixing_level > 16 {
            return Err(Error::Config("mixing.level: must lie in 1..=16".into()));
        }
        if self.shepp_n == 0 {
            return Err(Error::Config("shepp.n: must be at least 1".into()));
        }
        if self.ahlfors_centers < 10 {
            return Err(Error::Config("ahlfors.centers: must be at least 10".into()));
        }
        if self.dimension_grid.is_empty()
            || self.dimension_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Config(
                "dimension.grid: must be strictly increasing and nonempty".into(),
            ));
        }
        if self.box_probes == 0 {
            return Err(Error::Config("dimension.box_probes: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn build_space(&self) -> Result<SpaceSpec> {
        match self.space_kind.as_str() {
            "circle" => Ok(SpaceSpec::circle()),
            "interval-lebesgue" => Ok(SpaceSpec::interval_lebesgue()),
            "interval-gauss" => Ok(SpaceSpec::interval_gauss()),
            "interval-parry" => SpaceSpec::interval_parry(self.space_beta)
                .map_err(|e| Error::Config(format!("space.beta: {e}"))),
            "cantor-ternary" => SpaceSpec::cantor_ternary(self.cantor_depth)
                .map_err(|e| Error::Config(format!("space.cantor_depth: {e}"))),
            other => Err(Error::Config(format!("space.kind: unknown space `{other}`"))),
        }
    }

    pub fn build_process(&self, space: &SpaceSpec) -> Result<ProcessSpec> {
        let kind = match self.process_kind.as_str() {
            "iid" => ProcessKind::Iid,
            "doubling" => ProcessKind::Doubling,
            "beta-shift" => ProcessKind::BetaShift {
                beta: self.process_beta.unwrap_or(self.space_beta),
            },
            "gauss" => ProcessKind::GaussMap,
            "markov" => ProcessKind::Markov(
                MarkovMixer::doubling_mixer(self.markov_bins, self.markov_eps).map_err(
                    |e| Error::Config(format!("process.markov.bins/process.markov.eps: {e}")),
                )?,
            ),
            other => {
                return Err(Error::Config(format!(
                    "process.kind: unknown process `{other}`"
                )))
            }
        };
        ProcessSpec::new(kind, space.clone())
            .map_err(|e| Error::Config(format!("process.kind: {e}")))
    }

    /// Builds the radius schedule; explicit schedules read `radii.file`
    /// (one radius per line, `#` comments allowed).
    pub fn build_schedule(&self) -> Result<RadiusSchedule> {
        match self.radii_kind.as_str() {
            "power" => RadiusSchedule::power(self.radii_a, self.radii_alpha)
                .map_err(|e| Error::Config(format!("radii.a/radii.alpha: {e}"))),
            "power-log" => {
                RadiusSchedule::power_log(self.radii_a, self.radii_alpha, self.radii_b)
                    .map_err(|e| Error::Config(format!("radii.a/radii.alpha/radii.b: {e}")))
            }
            "explicit" => {
                let path = self.radii_file.as_ref().ok_or_else(|| {
                    Error::Config("radii.file: required for radii.kind = explicit".into())
                })?;
                let text = std::fs::read_to_string(path)?;
                let radii = text
                    .lines()
                    .map(|l| l.split('#').next().unwrap_or("").trim())
                    .filter(|l| !l.is_empty())
                    .map(|l| parse_f64("radii.file", l))
                    .collect::<Result<Vec<f64>>>()?;
                RadiusSchedule::explicit(radii)
                    .map_err(|e| Error::Config(format!("radii.file: {e}")))
            }
            other => Err(Error::Config(format!(
                "radii.kind: unknown schedule `{other}`"
            ))),
        }
    }

    pub fn build_dimension_function(&self) -> Result<Option<DimensionFunction>> {
        match &self.dimfn {
            None => Ok(None),
            Some((kind, t, b)) => match kind.as_str() {
                "power" => DimensionFunction::power(*t)
                    .map(Some)
                    .map_err(|e| Error::Config(format!("dimfn.t: {e}"))),
                "power-log" => DimensionFunction::power_log(*t, *b)
                    .map(Some)
                    .map_err(|e| Error::Config(format!("dimfn.t/dimfn.b: {e}"))),
                other => Err(Error::Config(format!(
                    "dimfn.kind: unknown dimension function `{other}`"
                ))),
            },
        }
    }

    /// Canonical echo: the complete resolved configuration as config-file
    /// text. Parsing the echo reproduces this config exactly.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let kv = &mut out;
        if let Some(e) = self.experiment {
            writeln!(kv, "experiment = {}", e.name()).unwrap();
        }
        writeln!(kv, "space.kind = {}", self.space_kind).unwrap();
        writeln!(kv, "space.beta = {}", self.space_beta).unwrap();
        writeln!(kv, "space.cantor_depth = {}", self.cantor_depth).unwrap();
        writeln!(kv, "process.kind = {}", self.process_kind).unwrap();
        if let Some(b) = self.process_beta {
            writeln!(kv, "process.beta = {b}").unwrap();
        }
        writeln!(kv, "process.markov.bins = {}", self.markov_bins).unwrap();
        writeln!(kv, "process.markov.eps = {}", self.markov_eps).unwrap();
        writeln!(kv, "radii.kind = {}", self.radii_kind).unwrap();
        writeln!(kv, "radii.a = {}", self.radii_a).unwrap();
        writeln!(kv, "radii.alpha = {}", self.radii_alpha).unwrap();
        writeln!(kv, "radii.b = {}", self.radii_b).unwrap();
        if let Some(p) = &self.radii_file {
            writeln!(kv, "radii.file = {}", p.display()).unwrap();
        }
        if let Some((kind, t, b)) = &self.dimfn {
            writeln!(kv, "dimfn.kind = {kind}").unwrap();
            writeln!(kv, "dimfn.t = {t}").unwrap();
            writeln!(kv, "dimfn.b = {b}").unwrap();
        }
        writeln!(kv, "trials = {}", self.trials).unwrap();
        writeln!(kv, "probes = {}", self.probes).unwrap();
        let ladder = self
            .ladder
            .iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(kv, "ladder = {ladder}").unwrap();
        writeln!(kv, "window.first = {}", self.window.0).unwrap();
        writeln!(kv, "window.last = {}", self.window.1).unwrap();
        writeln!(kv, "master_seed = {}", self.master_seed).unwrap();
        if let Some(p) = &self.output {
            writeln!(kv, "output = {}", p.display()).unwrap();
        }
        writeln!(kv, "expect = {}", self.expect.name()).unwrap();
        writeln!(kv, "hitting.target = {}", self.hitting_target).unwrap();
        let lambdas = self
            .pz_lambda
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(kv, "pz.lambda = {lambdas}").unwrap();
        writeln!(kv, "pz.n = {}", self.pz_n).unwrap();
        writeln!(kv, "density.mesh = {}", self.density_mesh).unwrap();
        writeln!(kv, "density.radius = {}", self.density_radius).unwrap();
        writeln!(kv, "density.start = {}", self.density_start).unwrap();
        writeln!(kv, "density.budget = {}", self.density_budget).unwrap();
        writeln!(kv, "mixing.level = {}", self.mixing_level).unwrap();
        let lags = self
            .mixing_lags
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(kv, "mixing.lags = {lags}").unwrap();
        writeln!(kv, "shepp.n = {}", self.shepp_n).unwrap();
        writeln!(kv, "ahlfors.centers = {}", self.ahlfors_centers).unwrap();
        let grid = self
            .dimension_grid
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(kv, "dimension.grid = {grid}").unwrap();
        writeln!(kv, "dimension.box_probes = {}", self.box_probes).unwrap();
        let th = &self.thresholds;
        writeln!(kv, "threshold.full_coverage = {}", th.full_coverage).unwrap();
        writeln!(kv, "threshold.measure_zero = {}", th.measure_zero).unwrap();
        writeln!(kv, "threshold.hit = {}", th.hit).unwrap();
        writeln!(kv, "threshold.all_hit = {}", th.all_hit).unwrap();
        writeln!(kv, "threshold.gamma = {}", th.gamma).unwrap();
        writeln!(kv, "threshold.s_tol = {}", th.s_tol).unwrap();
        writeln!(kv, "threshold.box_tol = {}", th.box_tol).unwrap();
        writeln!(kv, "threshold.box_r2 = {}", th.box_r2).unwrap();
        writeln!(kv, "threshold.shepp_growth = {}", th.shepp_growth).unwrap();
        writeln!(kv, "threshold.shepp_tail = {}", th.shepp_tail).unwrap();
        out
    }

    /// Reads a config file from disk.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        parse_config(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(
            "space.kind = circle\nprocess.kind = iid\nradii.kind = power\n\
             radii.a = 0.1\nradii.alpha = 0.9\n",
        )
        .unwrap();
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.probes, 10_000);
        assert_eq!(cfg.ladder, (10..=19).collect::<Vec<u32>>());
        assert_eq!(cfg.master_seed, DEFAULT_MASTER_SEED);
        assert_eq!(cfg.expect, Expectation::Unstated);
        assert!(cfg.build_schedule().is_ok());
    }

    #[test]
    fn constraint_errors_name_the_key() {
        let err = parse_config("radii.a = 0.1\nradii.alpha = -1\n").unwrap_err();
        assert!(err.to_string().contains("radii.a"), "{err}");
        let err = parse_config("trials = abc\n").unwrap_err();
        assert!(err.to_string().contains("trials"), "{err}");
        let err = parse_config("pz.lambda = 0.5,1.5\n").unwrap_err();
        assert!(err.to_string().contains("pz.lambda"), "{err}");
        let err = parse_config("space.kind = interval-parry\nspace.beta = 0.7\n").unwrap_err();
        assert!(err.to_string().contains("space.beta"), "{err}");
    }

    #[test]
    fn unknown_keys_get_suggestions() {
        let err = parse_config("procss.kind = iid\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("procss.kind"), "{msg}");
        assert!(msg.contains("process.kind"), "{msg}");
        let err = parse_config("zzzzzzz = 1\n").unwrap_err();
        assert!(!err.to_string().contains("did you mean"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = parse_config("trials = 5\ntrials = 6\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config(
            "# full-line comment\n\n  trials = 30 # trailing comment\nprobes = 100\n",
        )
        .unwrap();
        assert_eq!(cfg.trials, 30);
        assert_eq!(cfg.probes, 100);
    }

    #[test]
    fn ladder_and_list_syntax() {
        let cfg = parse_config("ladder = 8..16\n").unwrap();
        assert_eq!(cfg.ladder, (8..=16).collect::<Vec<u32>>());
        let cfg = parse_config("ladder = 3,5,9\nmixing.lags = 1..4\n").unwrap();
        assert_eq!(cfg.ladder, vec![3, 5, 9]);
        assert_eq!(cfg.mixing_lags, vec![1, 2, 3, 4]);
        assert!(parse_config("ladder = 9..3\n").is_err());
        assert!(parse_config("ladder = 5,5\n").is_err());
    }

    #[test]
    fn process_space_compatibility_is_checked_at_parse_time() {
        let err = parse_config("space.kind = circle\nprocess.kind = gauss\n").unwrap_err();
        assert!(err.to_string().contains("process.kind"), "{err}");
        let ok = parse_config(
            "space.kind = interval-parry\nspace.beta = 1.618033988749895\n\
             process.kind = beta-shift\n",
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn seeds_accept_hex_and_decimal() {
        let cfg = parse_config("master_seed = 0xDEAD_BEEF\n").unwrap();
        assert_eq!(cfg.master_seed, 0xDEAD_BEEF);
        let cfg = parse_config("master_seed = 12345\n").unwrap();
        assert_eq!(cfg.master_seed, 12345);
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = parse_config(
            "experiment = dichotomy\nspace.kind = interval-parry\n\
             space.beta = 1.618033988749895\nprocess.kind = beta-shift\n\
             radii.kind = power\nradii.a = 0.25\nradii.alpha = 1.1\n\
             dimfn.kind = power\ndimfn.t = 0.7\ntrials = 7\nladder = 4..9\n\
             expect = divergent\nmaster_seed = 99\n",
        )
        .unwrap();
        cfg.output = Some(PathBuf::from("out.json"));
        let again = parse_config(&cfg.echo()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn experiment_names_round_trip() {
        for kind in [
            ExperimentKind::Dichotomy,
            ExperimentKind::Dimension,
            ExperimentKind::Hitting,
            ExperimentKind::Pz,
            ExperimentKind::Density,
            ExperimentKind::Mixing,
            ExperimentKind::Shepp,
            ExperimentKind::Ahlfors,
        ] {
            assert_eq!(ExperimentKind::parse(kind.name()).unwrap(), kind);
        }
        assert!(ExperimentKind::parse("frobnicate").is_err());
    }
}
