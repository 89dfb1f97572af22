//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Lists are comma separated.

use crate::driver::Scheme;
use crate::error::{Error, Result};

use super::{RateMetric, SweepAxis, SweepSpec, SystemProfile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    /// 1-based source line, 0 for entries not read from a file.
    pub line: usize,
}

impl ConfigEntry {
    pub fn new(key: &str, value: impl Into<String>) -> Self {
        ConfigEntry {
            key: key.to_string(),
            value: value.into(),
            line: 0,
        }
    }
}

pub fn parse_kv(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `key = value`, got {line:?}"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.push(ConfigEntry {
            key: key.to_ascii_lowercase(),
            value: value.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

fn err(e: &ConfigEntry, message: impl Into<String>) -> Error {
    Error::Parse {
        line: e.line,
        message: format!("{}: {}", e.key, message.into()),
    }
}

fn num<T: std::str::FromStr>(e: &ConfigEntry, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| err(e, format!("cannot parse {s:?}")))
}

fn list<T: std::str::FromStr>(e: &ConfigEntry) -> Result<Vec<T>> {
    e.value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(e, s))
        .collect()
}

fn flag(e: &ConfigEntry) -> Result<bool> {
    match e.value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(err(e, "expected a boolean")),
    }
}

pub(super) fn apply(spec: &mut SweepSpec, e: &ConfigEntry) -> Result<()> {
    let v = e.value.as_str();
    match e.key.as_str() {
        "profile" => spec.system = SystemProfile::by_name(v).map_err(|x| err(e, x.to_string()))?,
        "axis" => {
            spec.axis = match v.to_ascii_lowercase().as_str() {
                "snr" | "snr_db" => SweepAxis::Snr,
                "region" | "region_len" => SweepAxis::Region,
                _ => return Err(err(e, "expected `snr` or `region`")),
            }
        }
        "snr_db" => spec.snr_db = num(e, v)?,
        "region_len" => spec.region_len = num(e, v)?,
        "snr_points" => spec.snr_points = list(e)?,
        "region_points" => spec.region_points = list(e)?,
        "trials" => spec.trials = num(e, v)?,
        "seed" => spec.master_seed = num(e, v)?,
        "schemes" => {
            spec.schemes = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<Scheme>().map_err(|x| err(e, x.to_string())))
                .collect::<Result<_>>()?
        }
        "metric" => {
            spec.metric = match v.to_ascii_lowercase().as_str() {
                "full" => RateMetric::Full,
                "simplified" => RateMetric::Simplified,
                _ => return Err(err(e, "expected `full` or `simplified`")),
            }
        }
        "n_cl" => spec.channel.n_cl = num(e, v)?,
        "n_ray" => spec.channel.n_ray = num(e, v)?,
        "spread_deg" => spec.channel.spread = num::<f64>(e, v)?.to_radians(),
        "per_user_departure" => spec.channel.per_user_departure = flag(e)?,
        "users" => spec.system.users = num(e, v)?,
        "n_r" => spec.system.n_r = num(e, v)?,
        "n_s" => spec.system.n_s = num(e, v)?,
        "subarrays" => spec.system.subarrays = num(e, v)?,
        "m_t" => spec.system.m_t = num(e, v)?,
        "l_s" => spec.system.l_s = num(e, v)?,
        "d_min" => spec.system.d_min = num(e, v)?,
        "p_max" => spec.system.p_max = num(e, v)?,
        "carrier_hz" => spec.system.carrier_hz = num(e, v)?,
        "h_t" => spec.system.h_t = num(e, v)?,
        "grid_snap" => {
            let p: usize = num(e, v)?;
            spec.grid_snap = (p > 0).then_some(p);
        }
        "shuffle_order" => spec.shuffle_order = flag(e)?,
        "jobs" => spec.jobs = num(e, v)?,
        _ => return Err(err(e, "unknown key")),
    }
    Ok(())
}
