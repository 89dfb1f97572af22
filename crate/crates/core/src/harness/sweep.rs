use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::draw_paths;
use crate::driver::{run_scheme, Scheme};
use crate::error::{Error, Result};

use super::{derive_seed, RateMetric, SweepSpec};

/// Stream tag for channel draws; trial seeds use the axis index instead.
const CHANNEL_STREAM: u64 = u64::MAX;

/// Largest tolerated fraction of excluded trials.
const MAX_EXCLUSION_RATE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub scheme: Scheme,
    pub trials: usize,
    pub mean_rate: f64,
    pub std_rate: f64,
    /// Half-width of the 95% normal-approximation interval, `1.96 · std / √n`.
    pub ci95: f64,
    pub min_rate: f64,
    pub max_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub axis_index: usize,
    pub axis_value: f64,
    pub trial: usize,
    pub channel_seed: u64,
    pub scheme: Scheme,
    pub rate_full: f64,
    pub rate_simplified: f64,
    pub initial_rate: f64,
    pub trace: Vec<f64>,
    pub outer_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical JSON encoding of the spec.
    pub config_hash: String,
    pub master_seed: u64,
    pub code_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub metric: RateMetric,
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialSummary>,
    /// Trials dropped because the BD precoder could not be formed.
    pub excluded: usize,
    pub attempted: usize,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn schemes(&self) -> Vec<Scheme> {
        let mut s: Vec<Scheme> = self.rows.iter().map(|r| r.scheme).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn row(&self, axis_value: f64, scheme: Scheme) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.axis_value == axis_value && r.scheme == scheme)
    }

    /// Per-trial values of the reported metric, ordered by trial index.
    pub fn trial_rates(&self, axis_index: usize, scheme: Scheme) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = self
            .trials
            .iter()
            .filter(|t| t.axis_index == axis_index && t.scheme == scheme)
            .map(|t| {
                let r = match self.metric {
                    RateMetric::Full => t.rate_full,
                    RateMetric::Simplified => t.rate_simplified,
                };
                (t.trial, r)
            })
            .collect();
        v.sort_by_key(|(t, _)| *t);
        v
    }
}

pub(super) fn config_hash(spec: &SweepSpec) -> String {
    let json = serde_json::to_vec(spec).expect("spec serializes");
    hex::encode(Sha256::digest(&json))
}

fn summarize(values: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let ci = 1.96 * std / (n as f64).sqrt();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean.clamp(min, max), std, ci, min, max)
}

/// Runs every scheme at every axis point for `spec.trials` paired trials.
///
/// Channel draws depend only on `(master_seed, trial)`, so all schemes and all
/// axis points of one trial see the same paths.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.axis_points().to_vec();
    let mut tasks = Vec::new();
    for (a, _) in points.iter().enumerate() {
        for t in 0..spec.trials {
            for &s in &spec.schemes {
                tasks.push((a, t, s));
            }
        }
    }

    let run = |&(a, t, scheme): &(usize, usize, Scheme)| -> (usize, usize, Scheme, u64, Result<_>) {
        let (snr, region) = spec.operating_point(points[a]);
        let channel_seed = derive_seed(spec.master_seed, &[CHANNEL_STREAM, t as u64]);
        let trial_seed = derive_seed(spec.master_seed, &[a as u64, t as u64]);
        let result = spec.system.system_config(snr, region).and_then(|system| {
            let paths = draw_paths(channel_seed, system.users, &spec.channel);
            let opts = spec.driver_options(system.array.lambda);
            run_scheme(scheme, &paths, &system, &opts, trial_seed)
        });
        (a, t, scheme, channel_seed, result)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| tasks.par_iter().map(run).collect());

    let mut excluded = 0;
    let mut trials = Vec::new();
    for (a, t, scheme, channel_seed, result) in outcomes {
        match result {
            Ok(rec) => trials.push(TrialSummary {
                axis_index: a,
                axis_value: points[a],
                trial: t,
                channel_seed,
                scheme,
                rate_full: rec.rate_full,
                rate_simplified: rec.rate_simplified,
                initial_rate: rec.initial_rate,
                trace: rec.trace,
                outer_iterations: rec.outer_iterations,
            }),
            Err(Error::RankDeficient { .. }) | Err(Error::SingularCovariance { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    let attempted = tasks.len();
    if attempted > 0 && excluded as f64 > MAX_EXCLUSION_RATE * attempted as f64 {
        return Err(Error::TooManyExclusions {
            excluded,
            total: attempted,
        });
    }
    trials.sort_by_key(|t| (t.axis_index, t.scheme, t.trial));

    let mut grouped: BTreeMap<(usize, Scheme), Vec<f64>> = BTreeMap::new();
    for t in &trials {
        let r = match spec.metric {
            RateMetric::Full => t.rate_full,
            RateMetric::Simplified => t.rate_simplified,
        };
        grouped.entry((t.axis_index, t.scheme)).or_default().push(r);
    }
    let rows = grouped
        .into_iter()
        .map(|((a, scheme), values)| {
            let (mean_rate, std_rate, ci95, min_rate, max_rate) = summarize(&values);
            SweepRow {
                axis_value: points[a],
                scheme,
                trials: values.len(),
                mean_rate,
                std_rate,
                ci95,
                min_rate,
                max_rate,
            }
        })
        .collect();

    Ok(SweepResult {
        axis_name: spec.axis.name().to_string(),
        metric: spec.metric,
        rows,
        trials,
        excluded,
        attempted,
        provenance: Provenance {
            config_hash: config_hash(spec),
            master_seed: spec.master_seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}
