//! Movable-region sweep comparing fixed and movable subarrays, written as
//! plot data (one block per scheme).
//!
//! cargo run --release --example region_sweep -- [trials]

use masim::driver::Scheme;
use masim::harness::{render, run_sweep, OutputFormat, SweepAxis, SweepSpec};

fn main() -> masim::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let spec = SweepSpec {
        axis: SweepAxis::Region,
        trials,
        schemes: vec![Scheme::SicFpa, Scheme::SicMa],
        ..SweepSpec::default()
    };
    let result = run_sweep(&spec)?;
    print!("{}", render(&result, OutputFormat::PlotData)?);
    Ok(())
}
