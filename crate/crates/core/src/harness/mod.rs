//! Seeded Monte Carlo sweeps over SNR and movable-region size.
//!
//! A sweep runs every scheme on the same per-trial path draws (paired
//! comparison) and aggregates mean, sample standard deviation and a 95%
//! normal-approximation interval per axis point and scheme.

mod config;
mod emit;
mod seed;
mod sweep;

pub use config::{parse_kv, ConfigEntry};
pub use emit::{emit, render, OutputFormat, CSV_HEADER};
pub use seed::{derive_seed, splitmix64};
pub use sweep::{run_sweep, Provenance, SweepResult, SweepRow, TrialSummary};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelProfile;
use crate::driver::{DriverOptions, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::geometry::ArrayConfig;

/// System dimensions in wavelength units, independent of the swept values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemProfile {
    pub users: usize,
    pub n_r: usize,
    pub n_s: usize,
    pub subarrays: usize,
    pub m_t: usize,
    /// Extra inter-subarray spacing, wavelengths.
    pub l_s: f64,
    /// Minimum subarray spacing, wavelengths.
    pub d_min: f64,
    pub p_max: f64,
    pub carrier_hz: f64,
    /// Base height, meters.
    pub h_t: f64,
}

impl SystemProfile {
    /// Two users, eight 2×2 subarrays; satisfies the BD dimension check.
    pub fn desk() -> Self {
        SystemProfile {
            users: 2,
            n_r: 2,
            n_s: 2,
            subarrays: 8,
            m_t: 32,
            l_s: 0.5,
            d_min: 1.0,
            p_max: 1.0,
            carrier_hz: 28e9,
            h_t: 0.0,
        }
    }

    /// Four users, four 4×4 subarrays, two streams each. Fails the BD
    /// dimension check; kept so that the rejection path is reachable.
    pub fn four_user() -> Self {
        SystemProfile {
            users: 4,
            n_r: 2,
            n_s: 2,
            subarrays: 4,
            m_t: 64,
            l_s: 0.5,
            d_min: 2.0,
            p_max: 1.0,
            carrier_hz: 28e9,
            h_t: 0.0,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Self::desk()),
            "four-user" | "four_user" => Ok(Self::four_user()),
            other => Err(Error::InvalidConfig(format!("unknown profile {other:?}"))),
        }
    }

    /// Concrete system at one SNR and region length.
    pub fn system_config(&self, snr_db: f64, region_len: f64) -> Result<SystemConfig> {
        let mut array = ArrayConfig::at_carrier(self.m_t, self.subarrays, self.carrier_hz)?;
        let lambda = array.lambda;
        array.n_r = self.n_r;
        array.l_s = self.l_s * lambda;
        array.d_min = self.d_min * lambda;
        array.h_t = self.h_t;
        array.region_len = region_len;
        array.validate()?;
        let system = SystemConfig {
            array,
            users: self.users,
            streams: self.n_s,
            p_max: self.p_max,
            snr_db,
        };
        if !system.bd_feasible() {
            return Err(Error::BdInfeasible {
                c_t: self.subarrays,
                interferers: self.users.saturating_sub(1) * self.n_r,
                n_s: self.n_s,
            });
        }
        Ok(system)
    }
}

/// Which quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "snr_db")]
    Snr,
    #[serde(rename = "region_len")]
    Region,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr_db",
            SweepAxis::Region => "region_len",
        }
    }
}

/// Which rate the aggregated statistics report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateMetric {
    /// BD digital precoder with residual interference.
    #[serde(rename = "full")]
    Full,
    /// Analog-only surrogate.
    #[serde(rename = "simplified")]
    Simplified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub snr_points: Vec<f64>,
    pub region_points: Vec<f64>,
    /// SNR held fixed during region sweeps.
    pub snr_db: f64,
    /// Region length held fixed during SNR sweeps, wavelengths.
    pub region_len: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub schemes: Vec<Scheme>,
    pub channel: ChannelProfile,
    pub system: SystemProfile,
    pub metric: RateMetric,
    pub grid_snap: Option<usize>,
    pub shuffle_order: bool,
    /// Worker threads; `0` uses all cores. Does not affect results.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            axis: SweepAxis::Snr,
            snr_points: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            region_points: vec![4.5, 6.0, 8.0, 10.0, 12.0],
            snr_db: 0.0,
            region_len: 12.0,
            trials: 200,
            master_seed: 2024,
            schemes: Scheme::ALL.to_vec(),
            channel: ChannelProfile::default(),
            system: SystemProfile::desk(),
            metric: RateMetric::Full,
            grid_snap: None,
            shuffle_order: false,
            jobs: 0,
        }
    }
}

impl SweepSpec {
    pub fn axis_points(&self) -> &[f64] {
        match self.axis {
            SweepAxis::Snr => &self.snr_points,
            SweepAxis::Region => &self.region_points,
        }
    }

    /// `(snr_db, region_len)` at one axis value.
    pub fn operating_point(&self, value: f64) -> (f64, f64) {
        match self.axis {
            SweepAxis::Snr => (value, self.region_len),
            SweepAxis::Region => (self.snr_db, value),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.axis_points().is_empty() {
            return Err(Error::InvalidConfig(format!(
                "no points on the {} axis",
                self.axis.name()
            )));
        }
        if self.channel.n_cl == 0 || self.channel.n_ray == 0 {
            return Err(Error::InvalidConfig("n_cl and n_ray must be at least 1".into()));
        }
        for &v in self.axis_points() {
            let (snr, region) = self.operating_point(v);
            self.system.system_config(snr, region)?;
        }
        Ok(())
    }

    pub fn driver_options(&self, lambda: f64) -> DriverOptions {
        let mut opts = DriverOptions::for_wavelength(lambda);
        opts.nelder_mead.grid_snap = self.grid_snap;
        opts.shuffle_order = self.shuffle_order;
        opts
    }

    /// Applies `key = value` entries on top of this spec. A `profile` entry
    /// resets the system dimensions before later keys are applied.
    pub fn apply_entries(&mut self, entries: &[ConfigEntry]) -> Result<()> {
        for e in entries {
            config::apply(self, e)?;
        }
        Ok(())
    }

    /// Parses a flat key-value config on top of [`SweepSpec::default`].
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        spec.apply_entries(&parse_kv(text)?)?;
        Ok(spec)
    }
}
