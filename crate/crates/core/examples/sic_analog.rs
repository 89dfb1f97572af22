//! Chain-by-chain analog precoder optimization, constrained (phase-only) and
//! unconstrained, on the nominal layout.
//!
//! cargo run --example sic_analog

use masim::analog::{initial_analog, sic_sweep, SicOptions};
use masim::channel::{draw_paths, rebuild_on_move, ChannelProfile};
use masim::geometry::initial_layout;
use masim::harness::SystemProfile;
use masim::precoder::AnalogMode;

fn main() -> masim::Result<()> {
    let system = SystemProfile::desk().system_config(0.0, 12.0)?;
    let layout = initial_layout(&system.array)?;
    let paths = draw_paths(3, system.users, &ChannelProfile::default());
    let channels = rebuild_on_move(&paths, &layout, &system.array, system.noise_var());

    for mode in [AnalogMode::Constrained, AnalogMode::Unconstrained] {
        let start = initial_analog(&paths, &layout, &system.array, mode);
        let out = sic_sweep(&channels, &start, mode, &SicOptions::default());
        let trace: Vec<String> = out.trace.iter().map(|r| format!("{r:.3}")).collect();
        println!(
            "{mode:?}: {:.3} -> [{}] bits/s/Hz, {} chain updates, max | |f| - 1 | = {:.1e}",
            out.initial,
            trace.join(", "),
            out.chain_updates,
            out.analog.max_modulus_error()
        );
    }
    Ok(())
}
