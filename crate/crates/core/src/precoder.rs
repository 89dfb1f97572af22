//! Block-diagonalization digital precoding and sum-rate evaluation.
//!
//! The analog precoder `F_RF = blkdiag(f_1, …, f_U)` is stored as its `U`
//! diagonal blocks. The digital stage nulls inter-user interference on the
//! effective channels `H̃_k = H_k F_RF`.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{log2_det_hpd, right_singular_basis, C64, CMatrix, CVector};

/// Singular values at or below this fraction of the largest count as zero.
pub const NULL_SPACE_RTOL: f64 = 1e-10;

/// Analog update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnalogMode {
    /// Phase-only entries, modulus exactly one.
    Constrained,
    /// Free modulus, each block scaled to norm `sqrt(m_t / u)`.
    Unconstrained,
}

/// Sub-connected analog precoder: one vector per RF chain.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogPrecoder {
    pub blocks: Vec<CVector>,
    pub mode: AnalogMode,
}

impl AnalogPrecoder {
    pub fn chains(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_width(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.len())
    }

    /// Dense `m_t × C_t` block-diagonal matrix.
    pub fn matrix(&self) -> CMatrix {
        let w = self.block_width();
        let u = self.chains();
        let mut f = CMatrix::zeros(w * u, u);
        for (m, b) in self.blocks.iter().enumerate() {
            f.view_mut((m * w, m), (w, 1)).copy_from(b);
        }
        f
    }

    /// Largest deviation of any entry's modulus from one.
    pub fn max_modulus_error(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Stacked effective columns `h_m = H_m f_m`, one per chain.
    pub fn effective_columns(&self, channels: &ChannelSet) -> Vec<CVector> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(m, f)| channels.block(m) * f)
            .collect()
    }
}

/// Analog plus per-user digital precoders.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoder {
    pub analog: AnalogPrecoder,
    /// `F_BB,k`, each `C_t × N_s`.
    pub digital: Vec<CMatrix>,
    pub p_max: f64,
}

impl HybridPrecoder {
    /// `F_RF F_BB,k`.
    pub fn transmit_matrix(&self, k: usize) -> CMatrix {
        self.analog.matrix() * &self.digital[k]
    }

    /// `‖F_RF F_BB‖_F²`.
    pub fn transmit_power(&self) -> f64 {
        let f_rf = self.analog.matrix();
        self.digital
            .iter()
            .map(|d| (&f_rf * d).norm_squared())
            .sum()
    }
}

/// Per-user rates plus residual-interference diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub per_user: Vec<f64>,
    pub sum: f64,
    /// `leakage[k][j] = ‖H_k F_RF F_BB,j‖_F / (‖H_k‖_F ‖F_BB,j‖_F)`, zero on the diagonal.
    pub leakage: Vec<Vec<f64>>,
}

impl RateReport {
    pub fn max_leakage(&self) -> f64 {
        self.leakage
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Whether residual inter-user interference enters the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interference {
    Include,
    /// Treat `R_k` as `σ² I`.
    Ignore,
}

/// Null space of the `(K − 1) n_r × C_t` interference matrix must hold `N_s` streams.
pub fn check_bd_feasible(k: usize, n_r: usize, n_s: usize, c_t: usize) -> bool {
    let interferers = k.saturating_sub(1) * n_r;
    c_t >= interferers && c_t - interferers >= n_s
}

fn effective_channels(channels: &ChannelSet, f_rf: &CMatrix) -> Vec<CMatrix> {
    channels.per_user.iter().map(|h| h * f_rf).collect()
}

/// BD-SVD digital precoder for a fixed analog stage, scaled so that
/// `‖F_RF F_BB‖_F² = P_max` with equal power on every stream.
pub fn bd_digital(
    channels: &ChannelSet,
    analog: &AnalogPrecoder,
    n_s: usize,
    p_max: f64,
) -> Result<HybridPrecoder> {
    let k_users = channels.users();
    let n_r = channels.n_r();
    let c_t = analog.chains();
    if !check_bd_feasible(k_users, n_r, n_s, c_t) {
        return Err(Error::BdInfeasible {
            c_t,
            interferers: k_users.saturating_sub(1) * n_r,
            n_s,
        });
    }
    let f_rf = analog.matrix();
    let eff = effective_channels(channels, &f_rf);

    let mut digital = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let null_basis = if k_users == 1 {
            CMatrix::identity(c_t, c_t)
        } else {
            let mut h_int = CMatrix::zeros((k_users - 1) * n_r, c_t);
            let mut row = 0;
            for (j, h) in eff.iter().enumerate() {
                if j != k {
                    h_int.rows_mut(row, n_r).copy_from(h);
                    row += n_r;
                }
            }
            let (sv, v) = right_singular_basis(&h_int);
            let cutoff = NULL_SPACE_RTOL * sv.first().copied().unwrap_or(0.0);
            let rank = sv.iter().filter(|&&s| s > cutoff).count();
            let dim = c_t - rank;
            if dim < n_s {
                return Err(Error::RankDeficient { user: k, dim, n_s });
            }
            v.columns(rank, dim).into_owned()
        };
        let projected = &eff[k] * &null_basis;
        let (_, w) = right_singular_basis(&projected);
        let w_k = w.columns(0, n_s).into_owned();
        digital.push(null_basis * w_k);
    }

    let mut pre = HybridPrecoder {
        analog: analog.clone(),
        digital,
        p_max,
    };
    let power = pre.transmit_power();
    if power > 0.0 {
        let s = C64::new((p_max / power).sqrt(), 0.0);
        for d in &mut pre.digital {
            *d *= s;
        }
    }
    Ok(pre)
}

/// Per-user rates `log2|I + R_k⁻¹ H_k F_RF F_BB,k F_BB,kᴴ F_RFᴴ H_kᴴ|`.
pub fn sum_rate_full(channels: &ChannelSet, precoder: &HybridPrecoder) -> Result<RateReport> {
    sum_rate_full_with(channels, precoder, Interference::Include)
}

pub fn sum_rate_full_with(
    channels: &ChannelSet,
    precoder: &HybridPrecoder,
    interference: Interference,
) -> Result<RateReport> {
    let k_users = channels.users();
    let n_r = channels.n_r();
    let sigma2 = channels.noise_var;
    let f_rf = precoder.analog.matrix();
    // received[k][j] = H_k F_RF F_BB,j
    let received: Vec<Vec<CMatrix>> = channels
        .per_user
        .iter()
        .map(|h| {
            let hf = h * &f_rf;
            precoder.digital.iter().map(|d| &hf * d).collect()
        })
        .collect();

    let mut per_user = Vec::with_capacity(k_users);
    let mut leakage = vec![vec![0.0; k_users]; k_users];
    for k in 0..k_users {
        let h_norm = channels.per_user[k].norm();
        let mut r_k = CMatrix::identity(n_r, n_r) * C64::new(sigma2, 0.0);
        for j in 0..k_users {
            if j == k {
                continue;
            }
            let denom = h_norm * precoder.digital[j].norm();
            leakage[k][j] = if denom > 0.0 {
                received[k][j].norm() / denom
            } else {
                0.0
            };
            if interference == Interference::Include {
                r_k += &received[k][j] * received[k][j].adjoint();
            }
        }
        let signal = &received[k][k] * received[k][k].adjoint();
        let log_r = log2_det_hpd(&r_k).ok_or(Error::SingularCovariance { user: k })?;
        let log_total =
            log2_det_hpd(&(&r_k + signal)).ok_or(Error::SingularCovariance { user: k })?;
        per_user.push((log_total - log_r).max(0.0));
    }
    let sum = per_user.iter().sum();
    Ok(RateReport {
        per_user,
        sum,
        leakage,
    })
}

/// Surrogate objective `log2|I_{K n_r} + (1/σ²) H F_RF F_RFᴴ Hᴴ|`.
pub fn sum_rate_simplified(channels: &ChannelSet, analog: &AnalogPrecoder) -> f64 {
    let cols = analog.effective_columns(channels);
    rate_from_columns(&cols, channels.stacked.nrows(), channels.noise_var)
}

/// Same objective evaluated on the `C_t` side, `log2|I_{C_t} + (1/σ²) F_RFᴴ Hᴴ H F_RF|`.
pub fn sum_rate_simplified_dual(channels: &ChannelSet, analog: &AnalogPrecoder) -> f64 {
    let hf = &channels.stacked * analog.matrix();
    let c_t = hf.ncols();
    let mut g = hf.adjoint() * &hf;
    g /= C64::new(channels.noise_var, 0.0);
    for i in 0..c_t {
        g[(i, i)] += C64::new(1.0, 0.0);
    }
    log2_det_hpd(&g).unwrap_or(f64::NAN)
}

/// `log2|I + (1/σ²) Σ_m h_m h_mᴴ|` from the per-chain effective columns.
pub fn rate_from_columns(cols: &[CVector], rows: usize, noise_var: f64) -> f64 {
    let mut g = CMatrix::identity(rows, rows);
    let inv = C64::new(1.0 / noise_var, 0.0);
    for h in cols {
        g += (h * h.adjoint()) * inv;
    }
    log2_det_hpd(&g).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_paths, rebuild_on_move, ChannelProfile};
    use crate::geometry::{initial_layout, ArrayConfig, SPEED_OF_LIGHT};
    use crate::linalg::cis;

    fn setup(m_t: usize, u: usize, k: usize, seed: u64, sigma2: f64) -> (ChannelSet, AnalogPrecoder) {
        let cfg = ArrayConfig::new(m_t, u, SPEED_OF_LIGHT / 28e9).unwrap();
        let layout = initial_layout(&cfg).unwrap();
        let paths = draw_paths(seed, k, &ChannelProfile::default());
        let ch = rebuild_on_move(&paths, &layout, &cfg, sigma2);
        let w = cfg.elements_per_subarray();
        let blocks = (0..u)
            .map(|m| CVector::from_fn(w, |i, _| cis(0.3 * (m * w + i) as f64)))
            .collect();
        (
            ch,
            AnalogPrecoder {
                blocks,
                mode: AnalogMode::Constrained,
            },
        )
    }

    #[test]
    fn feasibility_arithmetic() {
        assert!(check_bd_feasible(2, 2, 2, 8));
        assert!(!check_bd_feasible(4, 2, 2, 4));
        assert!(check_bd_feasible(1, 4, 2, 2));
        assert!(!check_bd_feasible(1, 4, 3, 2));
    }

    #[test]
    fn infeasible_dimensions_are_rejected() {
        let (ch, analog) = setup(16, 4, 4, 1, 1.0);
        assert!(matches!(
            bd_digital(&ch, &analog, 2, 1.0),
            Err(Error::BdInfeasible { .. })
        ));
    }

    #[test]
    fn two_user_leakage_is_nulled_and_power_met() {
        let (ch, analog) = setup(32, 8, 2, 3, 1.0);
        let pre = bd_digital(&ch, &analog, 2, 1.0).unwrap();
        assert!((pre.transmit_power() - 1.0).abs() < 1e-12);
        let report = sum_rate_full(&ch, &pre).unwrap();
        assert!(report.max_leakage() <= 1e-9, "{}", report.max_leakage());
        assert!((report.sum - report.per_user.iter().sum::<f64>()).abs() < 1e-12);
        let ignored = sum_rate_full_with(&ch, &pre, Interference::Ignore).unwrap();
        assert!((ignored.sum - report.sum).abs() <= 1e-6 * report.sum.abs().max(1e-12));
    }

    #[test]
    fn single_user_uses_top_right_singular_vectors() {
        let (ch, analog) = setup(16, 4, 1, 5, 1.0);
        let pre = bd_digital(&ch, &analog, 2, 1.0).unwrap();
        let eff = &ch.per_user[0] * analog.matrix();
        let (_, v) = right_singular_basis(&eff);
        // F_BB spans the same subspace as the top-2 right singular vectors.
        let top = v.columns(0, 2);
        let proj = top * (top.adjoint() * &pre.digital[0]);
        assert!((proj - &pre.digital[0]).norm() < 1e-10);
    }

    #[test]
    fn zero_channel_gives_zero_rates() {
        let (mut ch, analog) = setup(16, 4, 2, 5, 1.0);
        ch.stacked.fill(C64::new(0.0, 0.0));
        for h in &mut ch.per_user {
            h.fill(C64::new(0.0, 0.0));
        }
        let pre = bd_digital(&ch, &analog, 2, 1.0).unwrap();
        let report = sum_rate_full(&ch, &pre).unwrap();
        assert_eq!(report.sum, 0.0);
        assert_eq!(sum_rate_simplified(&ch, &analog), 0.0);
    }

    #[test]
    fn zero_noise_single_user_is_singular() {
        let (mut ch, analog) = setup(16, 4, 1, 5, 0.0);
        ch.noise_var = 0.0;
        let pre = bd_digital(&ch, &analog, 1, 1.0).unwrap();
        assert!(matches!(
            sum_rate_full(&ch, &pre),
            Err(Error::SingularCovariance { .. })
        ));
    }

    #[test]
    fn zero_analog_gives_zero_surrogate() {
        let (ch, mut analog) = setup(16, 4, 2, 5, 1.0);
        analog.mode = AnalogMode::Unconstrained;
        for b in &mut analog.blocks {
            b.fill(C64::new(0.0, 0.0));
        }
        assert_eq!(sum_rate_simplified(&ch, &analog), 0.0);
    }

    #[test]
    fn surrogate_sides_agree() {
        for seed in 0..10 {
            let (ch, analog) = setup(32, 8, 2, seed, 0.5);
            let a = sum_rate_simplified(&ch, &analog);
            let b = sum_rate_simplified_dual(&ch, &analog);
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn single_user_single_stream_matches_scalar_formula() {
        let (ch, analog) = setup(16, 4, 1, 12, 0.7);
        let pre = bd_digital(&ch, &analog, 1, 1.0).unwrap();
        let f = pre.transmit_matrix(0);
        let hf = &ch.per_user[0] * &f;
        let want = (1.0 + hf.norm_squared() / 0.7).log2();
        let got = sum_rate_full(&ch, &pre).unwrap().sum;
        assert!((got - want).abs() < 1e-10);
    }
}
