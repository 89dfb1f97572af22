//! Successive (one chain at a time) analog precoder design.
//!
//! With every other chain fixed, the surrogate rate splits as
//! `log2|I + A_m| + log2|I + (I + A_m)⁻¹ B_m|`, where only the second term
//! depends on chain `m`. For a rank-one chain that term is
//! `log2(1 + (1/σ²) fᴴ C_m f)` with `C_m = H_mᴴ (I + A_m)⁻¹ H_m`, maximized by
//! the dominant eigenvector of `C_m`.
//!
//! Nothing here reads the digital precoder.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, PathSet};
use crate::geometry::{tx_response, ArrayConfig, SubarrayLayout};
use crate::linalg::{cholesky, dominant_eigenpair, hermitize, phase_project, C64, CMatrix, CVector};
use crate::precoder::{rate_from_columns, AnalogMode, AnalogPrecoder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicOptions {
    pub max_rounds: usize,
    /// Stop once a round improves the surrogate rate by less than this (bits/s/Hz).
    pub tol: f64,
}

impl Default for SicOptions {
    fn default() -> Self {
        SicOptions {
            max_rounds: 20,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SicOutcome {
    pub analog: AnalogPrecoder,
    /// Surrogate rate before the first round.
    pub initial: f64,
    /// Surrogate rate after each completed round.
    pub trace: Vec<f64>,
    /// Rounds whose rate fell below the previous one.
    pub non_monotone_rounds: usize,
    pub chain_updates: usize,
}

/// `A_m = (1/σ²) H (Σ_{i≠m} F_RF,i F_RF,iᴴ) Hᴴ`.
pub fn residual_cov(channels: &ChannelSet, analog: &AnalogPrecoder, m: usize) -> CMatrix {
    let cols = analog.effective_columns(channels);
    residual_from_columns(&cols, m, channels.noise_var)
}

pub(crate) fn residual_from_columns(cols: &[CVector], m: usize, noise_var: f64) -> CMatrix {
    let rows = cols.first().map_or(0, |c| c.len());
    let mut a = CMatrix::zeros(rows, rows);
    let inv = C64::new(1.0 / noise_var, 0.0);
    for (i, h) in cols.iter().enumerate() {
        if i != m {
            a += (h * h.adjoint()) * inv;
        }
    }
    hermitize(&mut a);
    a
}

/// `C_m = H_mᴴ (I + A_m)⁻¹ H_m`, restricted to the columns of subarray `m`.
pub fn effective_channel(channels: &ChannelSet, a_m: &CMatrix, m: usize) -> CMatrix {
    let h_m = channels.block(m);
    let rows = a_m.nrows();
    let shifted = a_m + CMatrix::identity(rows, rows);
    let chol = cholesky(&shifted).expect("I + A_m is positive definite");
    let mut c = h_m.adjoint() * chol.solve(&h_m);
    hermitize(&mut c);
    c
}

/// New analog vector for one chain from its effective channel.
///
/// `norm` is the per-chain norm used in unconstrained mode (`sqrt(m_t/u)`).
pub fn chain_update(c_m: &CMatrix, mode: AnalogMode, norm: f64) -> CVector {
    let (_, v) = dominant_eigenpair(c_m);
    match mode {
        AnalogMode::Unconstrained => v * C64::new(norm, 0.0),
        AnalogMode::Constrained => phase_project(&v),
    }
}

/// Phase-only start: `exp(j∠a_t)` toward the strongest path's departure angle.
pub fn initial_analog(
    paths: &[PathSet],
    layout: &SubarrayLayout,
    cfg: &ArrayConfig,
    mode: AnalogMode,
) -> AnalogPrecoder {
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for ps in paths {
        for (g, d) in ps.gains.iter().zip(&ps.departure) {
            if g.norm() > best.2 {
                best = (d.theta, d.phi, g.norm());
            }
        }
    }
    let a_t = tx_response(best.0, best.1, layout, cfg).entries;
    let w = cfg.elements_per_subarray();
    let blocks = (0..cfg.u)
        .map(|m| phase_project(&a_t.rows(m * w, w).into_owned()))
        .collect();
    AnalogPrecoder { blocks, mode }
}

/// Cyclic chain-by-chain ascent on the surrogate rate.
pub fn sic_sweep(
    channels: &ChannelSet,
    start: &AnalogPrecoder,
    mode: AnalogMode,
    opts: &SicOptions,
) -> SicOutcome {
    let mut analog = AnalogPrecoder {
        blocks: start.blocks.clone(),
        mode,
    };
    let rows = channels.stacked.nrows();
    let sigma2 = channels.noise_var;
    let norm = (analog.block_width() as f64).sqrt();
    let mut cols = analog.effective_columns(channels);
    let initial = rate_from_columns(&cols, rows, sigma2);

    let mut trace = Vec::new();
    let mut non_monotone_rounds = 0;
    let mut chain_updates = 0;
    let mut previous = initial;
    for _ in 0..opts.max_rounds {
        for m in 0..analog.chains() {
            let a_m = residual_from_columns(&cols, m, sigma2);
            let c_m = effective_channel(channels, &a_m, m);
            let f = chain_update(&c_m, mode, norm);
            cols[m] = channels.block(m) * &f;
            analog.blocks[m] = f;
            chain_updates += 1;
        }
        let rate = rate_from_columns(&cols, rows, sigma2);
        trace.push(rate);
        let gain = rate - previous;
        if gain < 0.0 {
            non_monotone_rounds += 1;
        }
        previous = rate;
        if gain < opts.tol {
            break;
        }
    }
    SicOutcome {
        analog,
        initial,
        trace,
        non_monotone_rounds,
        chain_updates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_paths, rebuild_on_move, ChannelProfile};
    use crate::geometry::{initial_layout, SPEED_OF_LIGHT};
    use crate::linalg::log2_det_hpd;
    use crate::precoder::sum_rate_simplified;

    fn scenario(u: usize, seed: u64) -> (ArrayConfig, Vec<PathSet>, SubarrayLayout, ChannelSet) {
        let cfg = ArrayConfig::new(4 * u, u, SPEED_OF_LIGHT / 28e9).unwrap();
        let layout = initial_layout(&cfg).unwrap();
        let paths = draw_paths(seed, 2, &ChannelProfile::default());
        let ch = rebuild_on_move(&paths, &layout, &cfg, 1.0);
        (cfg, paths, layout, ch)
    }

    #[test]
    fn single_chain_has_no_residual() {
        let (cfg, paths, layout, ch) = scenario(1, 2);
        let analog = initial_analog(&paths, &layout, &cfg, AnalogMode::Constrained);
        assert_eq!(residual_cov(&ch, &analog, 0).norm(), 0.0);
    }

    #[test]
    fn residual_matches_subtraction() {
        let (cfg, paths, layout, ch) = scenario(2, 4);
        let analog = initial_analog(&paths, &layout, &cfg, AnalogMode::Constrained);
        let hf = &ch.stacked * analog.matrix();
        let full = &hf * hf.adjoint();
        let h1 = ch.block(0) * &analog.blocks[0];
        let want = (full - &h1 * h1.adjoint()) / C64::new(ch.noise_var, 0.0);
        assert!((residual_cov(&ch, &analog, 0) - want).norm() < 1e-10);
    }

    #[test]
    fn zero_residual_gives_gram() {
        let (_, _, _, ch) = scenario(4, 6);
        let rows = ch.stacked.nrows();
        let c = effective_channel(&ch, &CMatrix::zeros(rows, rows), 1);
        let h = ch.block(1);
        assert!((c - h.adjoint() * &h).norm() < 1e-10);
    }

    #[test]
    fn diagonal_effective_channel_updates() {
        let mut c = CMatrix::zeros(4, 4);
        for (i, v) in [4.0, 1.0, 1.0, 1.0].into_iter().enumerate() {
            c[(i, i)] = C64::new(v, 0.0);
        }
        let f = chain_update(&c, AnalogMode::Unconstrained, 2.0);
        assert!((f[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(f.rows(1, 3).norm() < 1e-12);
        let f = chain_update(&c, AnalogMode::Constrained, 2.0);
        for z in f.iter() {
            assert!((z - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn determinant_lemma_split() {
        let (cfg, paths, layout, ch) = scenario(4, 8);
        let analog = initial_analog(&paths, &layout, &cfg, AnalogMode::Constrained);
        let a = residual_cov(&ch, &analog, 2);
        let c = effective_channel(&ch, &a, 2);
        let f = &analog.blocks[2];
        let h = ch.block(2) * f;
        let rows = a.nrows();
        let base = &a + CMatrix::identity(rows, rows);
        let direct = log2_det_hpd(&(&base + (&h * h.adjoint()) / C64::new(ch.noise_var, 0.0))).unwrap()
            - log2_det_hpd(&base).unwrap();
        let quad = f.dotc(&(&c * f)).re;
        let split = (1.0 + quad / ch.noise_var).log2();
        assert!((direct - split).abs() < 1e-9);
    }

    #[test]
    fn unconstrained_sweep_is_monotone() {
        for seed in 0..5 {
            let (cfg, paths, layout, ch) = scenario(4, seed);
            let start = initial_analog(&paths, &layout, &cfg, AnalogMode::Unconstrained);
            let out = sic_sweep(&ch, &start, AnalogMode::Unconstrained, &SicOptions::default());
            let mut prev = out.initial;
            for &r in &out.trace {
                assert!(r >= prev - 1e-9);
                prev = r;
            }
            assert_eq!(out.non_monotone_rounds, 0);
        }
    }

    #[test]
    fn constrained_sweep_keeps_unit_modulus() {
        let (cfg, paths, layout, ch) = scenario(4, 3);
        let start = initial_analog(&paths, &layout, &cfg, AnalogMode::Constrained);
        let out = sic_sweep(&ch, &start, AnalogMode::Constrained, &SicOptions::default());
        assert!(out.analog.max_modulus_error() <= 1e-12);
        let last = *out.trace.last().unwrap();
        assert!((last - sum_rate_simplified(&ch, &out.analog)).abs() < 1e-9);
    }

    #[test]
    fn zero_rounds_returns_start() {
        let (cfg, paths, layout, ch) = scenario(4, 3);
        let start = initial_analog(&paths, &layout, &cfg, AnalogMode::Constrained);
        let opts = SicOptions {
            max_rounds: 0,
            tol: 1e-4,
        };
        let out = sic_sweep(&ch, &start, AnalogMode::Constrained, &opts);
        assert_eq!(out.analog, start);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn single_chain_unconstrained_hits_eigen_bound() {
        let (cfg, paths, layout, ch) = scenario(1, 10);
        let start = initial_analog(&paths, &layout, &cfg, AnalogMode::Unconstrained);
        let out = sic_sweep(&ch, &start, AnalogMode::Unconstrained, &SicOptions::default());
        let h = ch.block(0);
        let gram = h.adjoint() * &h;
        let (lmax, _) = dominant_eigenpair(&gram);
        let want = (1.0 + lmax * cfg.elements_per_subarray() as f64 / ch.noise_var).log2();
        assert!((out.trace[0] - want).abs() < 1e-8);
    }
}
