//! Movable-subarray hybrid beamforming for the MU-MIMO downlink.
//!
//! The crate synthesizes clustered channels as a function of subarray
//! positions, designs block-diagonalization digital precoders, optimizes
//! sub-connected phase-only analog precoders and subarray positions one
//! chain / one subarray at a time, and benchmarks four schemes over seeded
//! Monte Carlo sweeps.
//!
//! | module | role |
//! |---|---|
//! | [`geometry`] | array configuration, layouts, subregions, steering vectors |
//! | [`channel`] | path draws and position-dependent channel assembly |
//! | [`precoder`] | BD digital precoder and both sum-rate formulas |
//! | [`analog`] | chain-by-chain analog design |
//! | [`position`] | bounded Nelder–Mead position search |
//! | [`driver`] | the four benchmark schemes |
//! | [`harness`] | sweeps, aggregation and CSV/JSON/plot output |
//!
//! ```
//! use masim::channel::{draw_paths, ChannelProfile};
//! use masim::driver::{run_scheme, DriverOptions, Scheme};
//! use masim::harness::SystemProfile;
//!
//! let system = SystemProfile::desk().system_config(0.0, 12.0).unwrap();
//! let paths = draw_paths(1, system.users, &ChannelProfile::default());
//! let opts = DriverOptions::for_wavelength(system.array.lambda);
//! let fpa = run_scheme(Scheme::SicFpa, &paths, &system, &opts, 1).unwrap();
//! assert!(fpa.rate_full > 0.0);
//! ```

pub mod analog;
pub mod channel;
pub mod driver;
pub mod dump;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod position;
pub mod precoder;
pub mod selftest;

pub use error::{Error, Result};
