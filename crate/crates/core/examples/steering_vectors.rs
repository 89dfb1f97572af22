//! Array responses of the two-level transmit array and the receive ULA.
//!
//! cargo run --example steering_vectors

use masim::geometry::{elem_response, initial_layout, rx_response, sub_response, tx_response, ArrayConfig};

fn main() -> masim::Result<()> {
    let cfg = ArrayConfig::at_carrier(32, 8, 28e9)?;
    let layout = initial_layout(&cfg)?;
    println!("λ = {:.3} mm, {} subarrays of {}×{} elements", cfg.lambda * 1e3, cfg.u, cfg.n, cfg.n);
    for (i, p) in layout.positions.iter().enumerate() {
        println!("  subarray {i}: x = {:+.2}λ, z = {:+.2}λ", p.x / cfg.lambda, p.z / cfg.lambda);
    }

    let (theta, phi) = (1.2, 0.4);
    let elem = elem_response(theta, phi, &cfg);
    let sub = sub_response(theta, phi, &layout, &cfg);
    let tx = tx_response(theta, phi, &layout, &cfg);
    let rx = rx_response(theta, phi, &cfg);
    println!("θ = {theta}, φ = {phi}");
    println!("  ‖a_elem‖² = {:.6}", elem.entries.norm_squared());
    println!("  ‖a_sub‖²  = {:.6}", sub.entries.norm_squared());
    println!("  ‖a_t‖²    = {:.6} (= number of subarrays)", tx.entries.norm_squared());
    println!("  ‖a_r‖²    = {:.6}", rx.entries.norm_squared());
    Ok(())
}
