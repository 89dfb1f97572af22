//! Alternating analog / position optimization for the four benchmark schemes.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analog::{initial_analog, sic_sweep, SicOptions};
use crate::channel::{build_from_basis, noise_variance, PathBasis, PathSet};
use crate::error::{Error, Result};
use crate::geometry::{initial_layout, movable_layout, ArrayConfig, SubarrayLayout};
use crate::position::{optimize_positions, NelderMeadOptions, UpdateOrder};
use crate::precoder::{bd_digital, check_bd_feasible, sum_rate_full, sum_rate_simplified, AnalogMode};

/// Everything about the link that is not a path parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub array: ArrayConfig,
    pub users: usize,
    pub streams: usize,
    pub p_max: f64,
    pub snr_db: f64,
}

impl SystemConfig {
    pub fn noise_var(&self) -> f64 {
        noise_variance(self.snr_db) * self.p_max
    }

    pub fn bd_feasible(&self) -> bool {
        check_bd_feasible(self.users, self.array.n_r, self.streams, self.array.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "SIC-FPA")]
    SicFpa,
    #[serde(rename = "SIC-MA")]
    SicMa,
    #[serde(rename = "U-SIC-FPA")]
    USicFpa,
    #[serde(rename = "U-SIC-MA")]
    USicMa,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::SicFpa, Scheme::SicMa, Scheme::USicFpa, Scheme::USicMa];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::SicFpa => "SIC-FPA",
            Scheme::SicMa => "SIC-MA",
            Scheme::USicFpa => "U-SIC-FPA",
            Scheme::USicMa => "U-SIC-MA",
        }
    }

    pub fn analog_mode(self) -> AnalogMode {
        match self {
            Scheme::SicFpa | Scheme::SicMa => AnalogMode::Constrained,
            Scheme::USicFpa | Scheme::USicMa => AnalogMode::Unconstrained,
        }
    }

    pub fn positions_movable(self) -> bool {
        matches!(self, Scheme::SicMa | Scheme::USicMa)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverOptions {
    pub sic: SicOptions,
    pub outer_rounds: usize,
    /// Stop alternating once a round gains less than this (bits/s/Hz).
    pub outer_tol: f64,
    pub nelder_mead: NelderMeadOptions,
    /// Visit subarrays in a seeded random order each round instead of ascending.
    pub shuffle_order: bool,
}

impl DriverOptions {
    pub fn for_wavelength(lambda: f64) -> Self {
        DriverOptions {
            sic: SicOptions::default(),
            outer_rounds: 10,
            outer_tol: 1e-3,
            nelder_mead: NelderMeadOptions::for_wavelength(lambda),
            shuffle_order: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub scheme: Scheme,
    /// Sum rate with the BD digital precoder and residual interference.
    pub rate_full: f64,
    /// Surrogate rate `log2|I + (1/σ²) H F_RF F_RFᴴ Hᴴ|`.
    pub rate_simplified: f64,
    /// Surrogate rate at the starting point.
    pub initial_rate: f64,
    /// Surrogate rate after each outer round.
    pub trace: Vec<f64>,
    pub outer_iterations: usize,
    pub layout: SubarrayLayout,
    pub max_leakage: f64,
    pub chain_updates: usize,
    pub position_evaluations: usize,
    /// Outer rounds plus analog rounds whose rate dropped.
    pub non_monotone_steps: usize,
    pub wall_time_secs: f64,
    pub round_wall_secs: Vec<f64>,
}

impl TrialRecord {
    /// Copy with all timing fields zeroed, for reproducibility comparisons.
    pub fn without_timing(mut self) -> Self {
        self.wall_time_secs = 0.0;
        self.round_wall_secs.iter_mut().for_each(|t| *t = 0.0);
        self
    }
}

/// Runs one scheme on one trial's paths.
pub fn run_scheme(
    scheme: Scheme,
    paths: &[PathSet],
    system: &SystemConfig,
    opts: &DriverOptions,
    seed: u64,
) -> Result<TrialRecord> {
    let started = Instant::now();
    let cfg = &system.array;
    if !system.bd_feasible() {
        return Err(Error::BdInfeasible {
            c_t: cfg.u,
            interferers: system.users.saturating_sub(1) * cfg.n_r,
            n_s: system.streams,
        });
    }
    let mode = scheme.analog_mode();
    let mut layout = if scheme.positions_movable() {
        movable_layout(cfg)?
    } else {
        initial_layout(cfg)?
    };
    let basis = PathBasis::new(paths, cfg);
    let mut channels = build_from_basis(&basis, &layout, system.noise_var());
    let mut analog = initial_analog(paths, &layout, cfg, mode);
    let initial_rate = sum_rate_simplified(&channels, &analog);

    let mut trace = Vec::new();
    let mut round_wall_secs = Vec::new();
    let mut chain_updates = 0;
    let mut position_evaluations = 0;
    let mut non_monotone_steps = 0;
    let mut previous = initial_rate;
    for round in 0..opts.outer_rounds {
        let round_start = Instant::now();
        let sic = sic_sweep(&channels, &analog, mode, &opts.sic);
        analog = sic.analog;
        chain_updates += sic.chain_updates;
        non_monotone_steps += sic.non_monotone_rounds;

        if scheme.positions_movable() {
            let order = if opts.shuffle_order {
                UpdateOrder::Shuffled(seed ^ (round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
            } else {
                UpdateOrder::Ascending
            };
            let pos = optimize_positions(&basis, &channels, &layout, &analog, &opts.nelder_mead, order);
            layout = pos.layout;
            channels = pos.channels;
            position_evaluations += pos.evaluations;
        }

        let rate = sum_rate_simplified(&channels, &analog);
        trace.push(rate);
        round_wall_secs.push(round_start.elapsed().as_secs_f64());
        let gain = rate - previous;
        if gain < 0.0 {
            non_monotone_steps += 1;
        }
        previous = rate;
        if gain < opts.outer_tol {
            break;
        }
    }

    let hybrid = bd_digital(&channels, &analog, system.streams, system.p_max)?;
    let report = sum_rate_full(&channels, &hybrid)?;
    Ok(TrialRecord {
        seed,
        scheme,
        rate_full: report.sum,
        rate_simplified: sum_rate_simplified(&channels, &analog),
        initial_rate,
        outer_iterations: trace.len(),
        trace,
        layout,
        max_leakage: report.max_leakage(),
        chain_updates,
        position_evaluations,
        non_monotone_steps,
        wall_time_secs: started.elapsed().as_secs_f64(),
        round_wall_secs,
    })
}
