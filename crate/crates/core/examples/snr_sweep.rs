//! Monte Carlo SNR sweep of all schemes, written as CSV to stdout.
//!
//! cargo run --release --example snr_sweep -- [trials]

use masim::harness::{render, run_sweep, OutputFormat, SweepSpec};

fn main() -> masim::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let spec = SweepSpec {
        trials,
        ..SweepSpec::default()
    };
    let result = run_sweep(&spec)?;
    print!("{}", render(&result, OutputFormat::Csv)?);
    eprintln!(
        "{} runs, {} excluded, config hash {}",
        result.attempted, result.excluded, result.provenance.config_hash
    );
    Ok(())
}
