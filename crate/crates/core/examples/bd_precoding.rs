//! Block-diagonalization digital precoding on top of a fixed analog stage,
//! with per-user rates and residual leakage.
//!
//! cargo run --example bd_precoding

use masim::analog::initial_analog;
use masim::channel::{draw_paths, rebuild_on_move, ChannelProfile};
use masim::geometry::initial_layout;
use masim::harness::SystemProfile;
use masim::precoder::{bd_digital, sum_rate_full, sum_rate_full_with, AnalogMode, Interference};

fn main() -> masim::Result<()> {
    let system = SystemProfile::desk().system_config(5.0, 12.0)?;
    let layout = initial_layout(&system.array)?;
    let paths = draw_paths(11, system.users, &ChannelProfile::default());
    let channels = rebuild_on_move(&paths, &layout, &system.array, system.noise_var());
    let analog = initial_analog(&paths, &layout, &system.array, AnalogMode::Constrained);

    let hybrid = bd_digital(&channels, &analog, system.streams, system.p_max)?;
    println!("transmit power {:.6} (budget {})", hybrid.transmit_power(), system.p_max);
    let report = sum_rate_full(&channels, &hybrid)?;
    for (k, r) in report.per_user.iter().enumerate() {
        println!("user {k}: {r:.3} bits/s/Hz");
    }
    println!("sum rate {:.3} bits/s/Hz, worst leakage {:.2e}", report.sum, report.max_leakage());

    let ideal = sum_rate_full_with(&channels, &hybrid, Interference::Ignore)?;
    println!("ignoring residual interference: {:.3} bits/s/Hz", ideal.sum);
    Ok(())
}
