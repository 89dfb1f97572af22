//! Clustered narrowband channel synthesis.
//!
//! Path parameters are drawn once per trial and held fixed; channel matrices
//! are rebuilt from them whenever subarray positions change. Column block `u`
//! of every `H_k` depends only on the position of subarray `u`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    elem_response, rx_response, subarray_phase, wave_vector, ArrayConfig, Position,
    SubarrayLayout,
};
use crate::linalg::{cis, C64, CMatrix, CVector};

/// Elevation/azimuth pair in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub theta: f64,
    pub phi: f64,
}

/// Cluster statistics used when drawing paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub n_cl: usize,
    pub n_ray: usize,
    /// Full angular spread of rays about their cluster center, radians.
    pub spread: f64,
    /// Draw departure angles independently per user instead of sharing them.
    pub per_user_departure: bool,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        ChannelProfile {
            n_cl: 2,
            n_ray: 5,
            spread: 15f64.to_radians(),
            per_user_departure: false,
        }
    }
}

/// Path parameters of one user; every field is indexed `i * n_ray + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub n_cl: usize,
    pub n_ray: usize,
    pub spread: f64,
    pub gains: Vec<C64>,
    pub departure: Vec<Angles>,
    pub arrival: Vec<Angles>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// `sqrt(M_t N_r / (N_cl N_ray))`.
    pub fn scale(&self, cfg: &ArrayConfig) -> f64 {
        ((cfg.m_t * cfg.n_r) as f64 / (self.n_cl * self.n_ray) as f64).sqrt()
    }
}

fn draw_cluster_angles<R: Rng>(rng: &mut R, n_cl: usize, n_ray: usize, spread: f64) -> Vec<Angles> {
    let mut out = Vec::with_capacity(n_cl * n_ray);
    for _ in 0..n_cl {
        let theta_c = rng.random_range(PI / 4.0..=3.0 * PI / 4.0);
        let phi_c = rng.random_range(-PI / 2.0..=PI / 2.0);
        for _ in 0..n_ray {
            let dt: f64 = rng.random_range(-0.5..=0.5);
            let dp: f64 = rng.random_range(-0.5..=0.5);
            out.push(Angles {
                theta: theta_c + spread * dt,
                phi: phi_c + spread * dp,
            });
        }
    }
    out
}

fn draw_gains<R: Rng>(rng: &mut R, count: usize) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..count)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * s, im * s)
        })
        .collect()
}

/// Draws `k` users' path sets from a ChaCha8 stream seeded with `seed`.
///
/// Cluster elevations are uniform on `[π/4, 3π/4]`, azimuths on `[−π/2, π/2]`,
/// ray offsets uniform on `±spread/2` per angle, gains i.i.d. `CN(0, 1)`.
pub fn draw_paths(seed: u64, k: usize, profile: &ChannelProfile) -> Vec<PathSet> {
    assert!(profile.n_cl >= 1 && profile.n_ray >= 1, "need at least one path");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_cl, n_ray, spread) = (profile.n_cl, profile.n_ray, profile.spread);
    let shared = draw_cluster_angles(&mut rng, n_cl, n_ray, spread);
    (0..k)
        .map(|_| {
            let departure = if profile.per_user_departure {
                draw_cluster_angles(&mut rng, n_cl, n_ray, spread)
            } else {
                shared.clone()
            };
            let arrival = draw_cluster_angles(&mut rng, n_cl, n_ray, spread);
            let gains = draw_gains(&mut rng, n_cl * n_ray);
            PathSet {
                n_cl,
                n_ray,
                spread,
                gains,
                departure,
                arrival,
            }
        })
        .collect()
}

/// Per-path quantities that do not depend on subarray positions.
#[derive(Debug, Clone)]
struct PathTerm {
    /// `scale · α`.
    coeff: C64,
    wave: [f64; 3],
    a_r: CVector,
    a_elem: CVector,
}

/// Position-independent factorization of every user's channel.
///
/// Block `m` of the stacked channel is
/// `Σ_p coeff_p · a_r,p · conj(e^{jψ_p(m)}) · a_elem,pᴴ`, so moving a subarray
/// only re-evaluates one phase per path.
#[derive(Debug, Clone)]
pub struct PathBasis {
    cfg: ArrayConfig,
    users: Vec<Vec<PathTerm>>,
}

impl PathBasis {
    pub fn new(paths: &[PathSet], cfg: &ArrayConfig) -> Self {
        let users = paths
            .iter()
            .map(|ps| {
                let scale = ps.scale(cfg);
                (0..ps.len())
                    .map(|p| {
                        let d = ps.departure[p];
                        let a = ps.arrival[p];
                        PathTerm {
                            coeff: ps.gains[p] * scale,
                            wave: wave_vector(d.theta, d.phi),
                            a_r: rx_response(a.theta, a.phi, cfg).entries,
                            a_elem: elem_response(d.theta, d.phi, cfg).entries,
                        }
                    })
                    .collect()
            })
            .collect();
        PathBasis {
            cfg: cfg.clone(),
            users,
        }
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn users(&self) -> usize {
        self.users.len()
    }

    /// Stacked rows `K · n_r`.
    pub fn rows(&self) -> usize {
        self.users.len() * self.cfg.n_r
    }

    /// Stacked `(K n_r) × (m_t/u)` column block of a subarray placed at `pos`.
    pub fn block(&self, pos: Position) -> CMatrix {
        let n_r = self.cfg.n_r;
        let n_e = self.cfg.elements_per_subarray();
        let mut out = CMatrix::zeros(self.rows(), n_e);
        for (k, terms) in self.users.iter().enumerate() {
            for t in terms {
                let w = t.coeff * cis(-subarray_phase(&t.wave, pos, self.cfg.lambda));
                for c in 0..n_e {
                    let tc = w * t.a_elem[c].conj();
                    for r in 0..n_r {
                        out[(k * n_r + r, c)] += t.a_r[r] * tc;
                    }
                }
            }
        }
        out
    }

    /// Precomputes `H_m(pos) f` as a function of `pos` for a fixed analog vector `f`.
    pub fn beam_synth(&self, f: &CVector) -> BeamSynth {
        let n_r = self.cfg.n_r;
        let mut waves = Vec::new();
        let mut weights = Vec::new();
        for (k, terms) in self.users.iter().enumerate() {
            for t in terms {
                let g = t.a_elem.dotc(f) * t.coeff;
                let mut v = CVector::zeros(self.rows());
                for r in 0..n_r {
                    v[k * n_r + r] = t.a_r[r] * g;
                }
                waves.push(t.wave);
                weights.push(v);
            }
        }
        BeamSynth {
            lambda: self.cfg.lambda,
            waves,
            weights,
        }
    }
}

/// `pos ↦ H_m(pos) f_m` for a fixed analog vector.
#[derive(Debug, Clone)]
pub struct BeamSynth {
    lambda: f64,
    waves: Vec<[f64; 3]>,
    weights: Vec<CVector>,
}

impl BeamSynth {
    pub fn eval(&self, pos: Position) -> CVector {
        let rows = self.weights.first().map_or(0, |w| w.len());
        let mut out = CVector::zeros(rows);
        for (k, w) in self.waves.iter().zip(&self.weights) {
            out.axpy(cis(-subarray_phase(k, pos, self.lambda)), w, C64::new(1.0, 0.0));
        }
        out
    }
}

/// Channel matrices of all users at one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub per_user: Vec<CMatrix>,
    pub stacked: CMatrix,
    /// Linear noise variance σ².
    pub noise_var: f64,
    /// Elements per subarray, the width of each column block.
    pub block_width: usize,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.per_user.len()
    }

    pub fn n_r(&self) -> usize {
        self.per_user.first().map_or(0, |h| h.nrows())
    }

    /// Columns of the stacked channel owned by subarray `m`.
    pub fn block(&self, m: usize) -> CMatrix {
        self.stacked
            .columns(m * self.block_width, self.block_width)
            .into_owned()
    }

    /// Replaces the column block of subarray `m` in both views.
    pub fn set_block(&mut self, m: usize, block: &CMatrix) {
        let w = self.block_width;
        self.stacked.columns_mut(m * w, w).copy_from(block);
        let n_r = self.n_r();
        for (k, h) in self.per_user.iter_mut().enumerate() {
            h.columns_mut(m * w, w)
                .copy_from(&block.rows(k * n_r, n_r));
        }
    }
}

/// Linear noise variance for `P_max = 1`: `σ² = 10^(−SNR_dB/10)`.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// `H_k = sqrt(M_t N_r / (N_cl N_ray)) Σ_i Σ_j α a_r a_tᴴ` at the given layout.
pub fn assemble_channel(paths: &PathSet, layout: &SubarrayLayout, cfg: &ArrayConfig) -> CMatrix {
    let basis = PathBasis::new(std::slice::from_ref(paths), cfg);
    let n_e = cfg.elements_per_subarray();
    let mut h = CMatrix::zeros(cfg.n_r, cfg.m_t);
    for (m, &pos) in layout.positions.iter().enumerate() {
        h.columns_mut(m * n_e, n_e).copy_from(&basis.block(pos));
    }
    h
}

/// Rebuilds every user's channel from fixed paths at `layout`.
pub fn rebuild_on_move(
    paths: &[PathSet],
    layout: &SubarrayLayout,
    cfg: &ArrayConfig,
    noise_var: f64,
) -> ChannelSet {
    build_from_basis(&PathBasis::new(paths, cfg), layout, noise_var)
}

pub fn build_from_basis(basis: &PathBasis, layout: &SubarrayLayout, noise_var: f64) -> ChannelSet {
    let cfg = basis.config();
    let n_e = cfg.elements_per_subarray();
    let mut stacked = CMatrix::zeros(basis.rows(), cfg.m_t);
    for (m, &pos) in layout.positions.iter().enumerate() {
        stacked.columns_mut(m * n_e, n_e).copy_from(&basis.block(pos));
    }
    let per_user = (0..basis.users())
        .map(|k| stacked.rows(k * cfg.n_r, cfg.n_r).into_owned())
        .collect();
    ChannelSet {
        per_user,
        stacked,
        noise_var,
        block_width: n_e,
    }
}
