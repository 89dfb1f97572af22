//! Draws one clustered channel realization and round-trips it through the
//! binary dump format.
//!
//! cargo run --example channel_dump -- [out.bin]

use masim::channel::{draw_paths, rebuild_on_move, ChannelProfile};
use masim::dump::{read_dump, write_dump};
use masim::geometry::initial_layout;
use masim::harness::SystemProfile;

fn main() -> masim::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "channel.bin".into());
    let system = SystemProfile::desk().system_config(10.0, 12.0)?;
    let paths = draw_paths(7, system.users, &ChannelProfile::default());
    let layout = initial_layout(&system.array)?;
    let channels = rebuild_on_move(&paths, &layout, &system.array, system.noise_var());

    for (k, h) in channels.per_user.iter().enumerate() {
        let strongest = paths[k].gains.iter().map(|g| g.norm()).fold(0.0, f64::max);
        println!(
            "user {k}: H is {}×{}, ‖H‖_F = {:.3}, strongest |α| = {:.3}",
            h.nrows(),
            h.ncols(),
            h.norm(),
            strongest
        );
    }

    write_dump(out.as_ref(), &paths, &channels)?;
    let back = read_dump(out.as_ref())?;
    assert_eq!(back.per_user, channels.per_user);
    println!("wrote and re-read {out} (noise variance {:.3})", back.noise_var);
    Ok(())
}
