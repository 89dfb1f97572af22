use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use masim::channel::{build_from_basis, draw_paths, PathBasis};
use masim::driver::{run_scheme, TrialRecord};
use masim::dump::write_dump;
use masim::geometry::initial_layout;
use masim::harness::{derive_seed, emit, parse_kv, render, run_sweep, ConfigEntry, OutputFormat, SweepAxis, SweepSpec};
use masim::selftest::run_selftest;
use masim::{Error, Result};

#[derive(Parser)]
#[command(name = "masim", version, about = "Movable-subarray hybrid beamforming sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep SNR at a fixed region length.
    SweepSnr(Common),
    /// Sweep the movable-region length at a fixed SNR.
    SweepRegion(Common),
    /// Run one trial for every scheme and dump traces and layouts as JSON.
    SingleTrial {
        #[command(flatten)]
        common: Common,
        /// Trial index within the master seed's stream.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Also write the binary channel dump of the nominal layout here.
        #[arg(long)]
        dump_channel: Option<PathBuf>,
    },
    /// Run the oracle and identity checks.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long, env = "MASIM_CONFIG")]
    config: Option<PathBuf>,
    /// SNR points in dB (comma separated); a single value for region sweeps.
    #[arg(long)]
    snr: Option<String>,
    /// Region lengths in wavelengths (comma separated); a single value for SNR sweeps.
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated scheme tags, e.g. SIC-FPA,SIC-MA.
    #[arg(long)]
    schemes: Option<String>,
    /// System profile: desk or four-user.
    #[arg(long)]
    profile: Option<String>,
    /// Output file (or file stem with --format all). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json, plotdata or all.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Restrict positions to a P × P lattice per subregion.
    #[arg(long)]
    grid_snap: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn spec(&self, axis: SweepAxis) -> Result<SweepSpec> {
        let mut spec = SweepSpec {
            axis,
            ..SweepSpec::default()
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            spec.apply_entries(&parse_kv(&text)?)?;
        }
        let mut entries = Vec::new();
        if let Some(p) = &self.profile {
            entries.push(ConfigEntry::new("profile", p.as_str()));
        }
        let (snr_key, region_key) = match axis {
            SweepAxis::Snr => ("snr_points", "region_len"),
            SweepAxis::Region => ("snr_db", "region_points"),
        };
        if let Some(v) = &self.snr {
            entries.push(ConfigEntry::new(snr_key, v.as_str()));
        }
        if let Some(v) = &self.region {
            entries.push(ConfigEntry::new(region_key, v.as_str()));
        }
        if let Some(v) = self.trials {
            entries.push(ConfigEntry::new("trials", v.to_string()));
        }
        if let Some(v) = self.seed {
            entries.push(ConfigEntry::new("seed", v.to_string()));
        }
        if let Some(v) = &self.schemes {
            entries.push(ConfigEntry::new("schemes", v.as_str()));
        }
        if let Some(v) = self.grid_snap {
            entries.push(ConfigEntry::new("grid_snap", v.to_string()));
        }
        if let Some(v) = self.jobs {
            entries.push(ConfigEntry::new("jobs", v.to_string()));
        }
        spec.apply_entries(&entries)?;
        spec.axis = axis;
        Ok(spec)
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep(common: &Common, axis: SweepAxis) -> Result<()> {
    let spec = common.spec(axis)?;
    let result = run_sweep(&spec)?;
    if common.format.eq_ignore_ascii_case("all") {
        let stem = common.out.clone().unwrap_or_else(|| PathBuf::from(axis.name()));
        for fmt in [OutputFormat::Csv, OutputFormat::Json, OutputFormat::PlotData] {
            emit(&result, fmt, &stem.with_extension(fmt.extension()))?;
        }
        return Ok(());
    }
    let fmt: OutputFormat = common.format.parse()?;
    match &common.out {
        Some(path) => emit(&result, fmt, path),
        None => write_text(None, &render(&result, fmt)?),
    }
}

#[derive(Serialize)]
struct SingleTrialReport {
    trial: u64,
    channel_seed: u64,
    snr_db: f64,
    region_len: f64,
    records: Vec<TrialRecord>,
}

fn single_trial(common: &Common, trial: u64, dump: Option<&Path>) -> Result<()> {
    let spec = common.spec(SweepAxis::Snr)?;
    spec.validate()?;
    let snr_db = spec.snr_points.first().copied().unwrap_or(spec.snr_db);
    let system = spec.system.system_config(snr_db, spec.region_len)?;
    // Same stream as the sweeps use for this trial index.
    let channel_seed = derive_seed(spec.master_seed, &[u64::MAX, trial]);
    let paths = draw_paths(channel_seed, system.users, &spec.channel);
    if let Some(path) = dump {
        let basis = PathBasis::new(&paths, &system.array);
        let channels = build_from_basis(&basis, &initial_layout(&system.array)?, system.noise_var());
        write_dump(path, &paths, &channels)?;
    }
    let opts = spec.driver_options(system.array.lambda);
    let trial_seed = derive_seed(spec.master_seed, &[0, trial]);
    let records = spec
        .schemes
        .iter()
        .map(|&s| run_scheme(s, &paths, &system, &opts, trial_seed))
        .collect::<Result<Vec<_>>>()?;
    let report = SingleTrialReport {
        trial,
        channel_seed,
        snr_db,
        region_len: spec.region_len,
        records,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_text(common.out.as_deref(), &text)
}

fn selftest() -> Result<bool> {
    let checks = run_selftest();
    for c in &checks {
        println!(
            "{} {:<48} worst {:.3e} (tol {:.0e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.tolerance
        );
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SweepSnr(c) => sweep(c, SweepAxis::Snr).map(|_| true),
        Command::SweepRegion(c) => sweep(c, SweepAxis::Region).map(|_| true),
        Command::SingleTrial {
            common,
            trial,
            dump_channel,
        } => single_trial(common, *trial, dump_channel.as_deref()).map(|_| true),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(2)
        }
    }
}

