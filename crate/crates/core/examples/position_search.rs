//! One pass of per-subarray Nelder–Mead position search, compared with a
//! brute-force grid over each subregion.
//!
//! cargo run --example position_search

use masim::analog::initial_analog;
use masim::channel::{draw_paths, rebuild_on_move, ChannelProfile, PathBasis};
use masim::geometry::movable_layout;
use masim::harness::SystemProfile;
use masim::oracle::grid_max;
use masim::position::{optimize_positions, NelderMeadOptions, PositionObjective, UpdateOrder};
use masim::precoder::{sum_rate_simplified, AnalogMode};

fn main() -> masim::Result<()> {
    let system = SystemProfile::desk().system_config(0.0, 12.0)?;
    let cfg = &system.array;
    let layout = movable_layout(cfg)?;
    let paths = draw_paths(21, system.users, &ChannelProfile::default());
    let basis = PathBasis::new(&paths, cfg);
    let channels = rebuild_on_move(&paths, &layout, cfg, system.noise_var());
    let analog = initial_analog(&paths, &layout, cfg, AnalogMode::Constrained);

    let columns = analog.effective_columns(&channels);
    for m in 0..cfg.u {
        let obj = PositionObjective::new(&basis, &analog, &columns, m, channels.noise_var);
        let (_, best) = grid_max(|p| obj.eval(p), &layout.subregions[m], 64);
        println!(
            "subarray {m}: contribution {:.3} at start, {:.3} best on a 64×64 grid",
            obj.eval(layout.positions[m]),
            best
        );
    }

    let opts = NelderMeadOptions::for_wavelength(cfg.lambda);
    let out = optimize_positions(&basis, &channels, &layout, &analog, &opts, UpdateOrder::Ascending);
    println!(
        "surrogate rate {:.3} -> {:.3} bits/s/Hz after {} moves and {} evaluations",
        sum_rate_simplified(&channels, &analog),
        out.trace.last().copied().unwrap_or(out.initial),
        out.moves,
        out.evaluations
    );
    for (a, b) in layout.positions.iter().zip(&out.layout.positions) {
        println!(
            "  ({:+.2}, {:+.2})λ -> ({:+.2}, {:+.2})λ",
            a.x / cfg.lambda,
            a.z / cfg.lambda,
            b.x / cfg.lambda,
            b.z / cfg.lambda
        );
    }
    Ok(())
}
