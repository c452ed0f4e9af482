//! Experiment reports: metrics with their uncertainty, pass/fail flags
//! against declared thresholds, and canonical JSON/CSV emission. Emission is
//! deterministic — map keys are sorted, field order is fixed, and volatile
//! data like wall-clock time never enters the payload — so identical runs
//! produce identical bytes.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// One reported statistic. Sampled quantities carry their standard error
/// and trial count; exact quantities (closed forms, counts) leave them null.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
}

impl Metric {
    pub fn exact(name: impl Into<String>, value: f64) -> Metric {
        Metric { name: name.into(), value, stderr: None, trials: None }
    }

    pub fn sampled(name: impl Into<String>, value: f64, stderr: f64, trials: usize) -> Metric {
        Metric {
            name: name.into(),
            value,
            stderr: Some(stderr),
            trials: Some(trials as u64),
        }
    }
}

/// A pass/fail check of an observed value against a declared threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flag {
    pub name: String,
    pub observed: f64,
    /// Comparison direction: ">=" or "<=".
    pub op: String,
    pub threshold: f64,
    pub pass: bool,
}

impl Flag {
    pub fn at_least(name: impl Into<String>, observed: f64, threshold: f64) -> Flag {
        Flag {
            name: name.into(),
            observed,
            op: ">=".into(),
            threshold,
            pass: observed >= threshold,
        }
    }

    pub fn at_most(name: impl Into<String>, observed: f64, threshold: f64) -> Flag {
        Flag {
            name: name.into(),
            observed,
            op: "<=".into(),
            threshold,
            pass: observed <= threshold,
        }
    }
}

/// A complete experiment result: resolved config echo, metrics, flags, and
/// seed provenance (master seed plus the first per-trial seeds derived from
/// it).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub config: BTreeMap<String, String>,
    pub metrics: Vec<Metric>,
    pub flags: Vec<Flag>,
}

impl ExperimentReport {
    /// Starts an empty report carrying the canonical config echo.
    pub fn new(experiment: &str, config_echo: &str, master_seed: u64) -> ExperimentReport {
        let config = config_echo
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        ExperimentReport {
            experiment: experiment.into(),
            master_seed,
            seeds: Vec::new(),
            config,
            metrics: Vec::new(),
            flags: Vec::new(),
        }
    }

    /// Reassembles the config echo as parseable config-file text.
    pub fn config_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn failed(&self) -> bool {
        self.flags.iter().any(|f| !f.pass)
    }

    /// 0 when every flag passed, 2 otherwise (errors exit 1 upstream).
    pub fn exit_code(&self) -> i32 {
        if self.failed() {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// Flat CSV: one row per config entry, metric, and flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,name,value,stderr,trials,op,threshold,pass\n");
        for (k, v) in &self.config {
            out.push_str(&format!("config,{},{},,,,,\n", csv_field(k), csv_field(v)));
        }
        for m in &self.metrics {
            let stderr = m.stderr.map(|x| x.to_string()).unwrap_or_default();
            let trials = m.trials.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "metric,{},{},{},{},,,\n",
                csv_field(&m.name),
                m.value,
                stderr,
                trials
            ));
        }
        for f in &self.flags {
            out.push_str(&format!(
                "flag,{},{},,,{},{},{}\n",
                csv_field(&f.name),
                f.observed,
                csv_field(&f.op),
                f.threshold,
                f.pass
            ));
        }
        out
    }
}

/// Minimal CSV quoting: wrap fields containing separators or quotes.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let mut rep = ExperimentReport::new("shepp", "trials = 5\npz.lambda = 0.25,0.5\n", 42);
        rep.seeds = vec![1, 2];
        rep.metrics.push(Metric::sampled("coverage", 0.97, 0.01, 5));
        rep.metrics.push(Metric::exact("alpha", 0.5));
        rep.flags.push(Flag::at_least("coverage", 0.97, 0.95));
        rep
    }

    #[test]
    fn json_is_deterministic_and_newline_terminated() {
        let rep = sample_report();
        let a = rep.to_json().unwrap();
        let b = rep.to_json().unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"experiment\": \"shepp\""));
        assert!(a.contains("\"stderr\": null"));
    }

    #[test]
    fn exit_codes_follow_flags() {
        let mut rep = sample_report();
        assert_eq!(rep.exit_code(), 0);
        rep.flags.push(Flag::at_most("noise", 0.5, 0.1));
        assert!(rep.failed());
        assert_eq!(rep.exit_code(), 2);
        rep.flags.clear();
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn csv_flattens_and_quotes() {
        let rep = sample_report();
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        // header + 2 config rows + 2 metrics + 1 flag
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("kind,name"));
        assert!(csv.contains("\"0.25,0.5\""), "{csv}");
        assert!(csv.contains("flag,coverage,0.97,,,>=,0.95,true"));
    }

    #[test]
    fn config_text_round_trips_the_echo_map() {
        let rep = sample_report();
        let text = rep.config_text();
        let again = ExperimentReport::new("shepp", &text, 42);
        assert_eq!(rep.config, again.config);
    }
}
