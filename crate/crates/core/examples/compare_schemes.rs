//! Runs the four schemes on the same channel draw and prints their rates and
//! convergence traces.
//!
//! cargo run --example compare_schemes -- [seed]

use masim::channel::{draw_paths, ChannelProfile};
use masim::driver::{run_scheme, DriverOptions, Scheme};
use masim::harness::SystemProfile;

fn main() -> masim::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let system = SystemProfile::desk().system_config(0.0, 12.0)?;
    let opts = DriverOptions::for_wavelength(system.array.lambda);
    let paths = draw_paths(seed, system.users, &ChannelProfile::default());

    println!("{:<10} {:>8} {:>8} {:>6}  trace", "scheme", "full", "surr.", "outer");
    for scheme in Scheme::ALL {
        let rec = run_scheme(scheme, &paths, &system, &opts, seed)?;
        let trace: Vec<String> = rec.trace.iter().map(|r| format!("{r:.2}")).collect();
        println!(
            "{:<10} {:>8.3} {:>8.3} {:>6}  {:.2} -> {}",
            scheme.tag(),
            rec.rate_full,
            rec.rate_simplified,
            rec.outer_iterations,
            rec.initial_rate,
            trace.join(" ")
        );
    }
    Ok(())
}
