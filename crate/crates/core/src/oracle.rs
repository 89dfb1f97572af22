//! Literal scalar evaluations used as independent references.
//!
//! Nothing here shares code with the vectorized paths in [`crate::geometry`]
//! or [`crate::channel`]: every entry is computed from its closed form with
//! explicit loops.

use std::f64::consts::PI;

use crate::channel::PathSet;
use crate::geometry::{ArrayConfig, Position, Rect};
use crate::linalg::{C64, CMatrix};

fn expj(phase: f64) -> C64 {
    C64::new(phase.cos(), phase.sin())
}

/// Entry `(ix, iz)` of the element-level response.
pub fn elem_entry(theta: f64, phi: f64, cfg: &ArrayConfig, ix: usize, iz: usize) -> C64 {
    let n = cfg.n as f64;
    let px = 2.0 * PI / cfg.lambda * ix as f64 * cfg.d_x * theta.sin() * phi.cos();
    let pz = 2.0 * PI / cfg.lambda * iz as f64 * cfg.d_z * theta.cos();
    expj(px) * expj(pz) / n
}

pub fn elem_response(theta: f64, phi: f64, cfg: &ArrayConfig) -> Vec<C64> {
    let mut out = Vec::with_capacity(cfg.n * cfg.n);
    for ix in 0..cfg.n {
        for iz in 0..cfg.n {
            out.push(elem_entry(theta, phi, cfg, ix, iz));
        }
    }
    out
}

pub fn sub_entry(theta: f64, phi: f64, pos: Position, lambda: f64) -> C64 {
    let kx = theta.sin() * phi.cos();
    let kz = theta.cos();
    expj(2.0 * PI / lambda * (kx * pos.x + kz * pos.z))
}

pub fn tx_response(theta: f64, phi: f64, positions: &[Position], cfg: &ArrayConfig) -> Vec<C64> {
    let mut out = Vec::with_capacity(cfg.m_t);
    for &p in positions {
        let s = sub_entry(theta, phi, p, cfg.lambda);
        for ix in 0..cfg.n {
            for iz in 0..cfg.n {
                out.push(s * elem_entry(theta, phi, cfg, ix, iz));
            }
        }
    }
    out
}

pub fn rx_entry(theta: f64, phi: f64, cfg: &ArrayConfig, r: usize) -> C64 {
    let phase = PI * r as f64 * theta.sin() * phi.cos();
    expj(phase) / (cfg.n_r as f64).sqrt()
}

/// `H_k[r][c] = sqrt(M_t N_r / (N_cl N_ray)) Σ_i Σ_j α_ij a_r[r] conj(a_t[c])`.
pub fn channel(paths: &PathSet, positions: &[Position], cfg: &ArrayConfig) -> CMatrix {
    let scale = ((cfg.m_t * cfg.n_r) as f64 / (paths.n_cl * paths.n_ray) as f64).sqrt();
    let per_sub = cfg.n * cfg.n;
    let mut h = CMatrix::zeros(cfg.n_r, cfg.m_t);
    for r in 0..cfg.n_r {
        for c in 0..cfg.m_t {
            let (sub, e) = (c / per_sub, c % per_sub);
            let (ix, iz) = (e / cfg.n, e % cfg.n);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..paths.n_cl {
                for j in 0..paths.n_ray {
                    let p = i * paths.n_ray + j;
                    let (d, a) = (paths.departure[p], paths.arrival[p]);
                    let at = sub_entry(d.theta, d.phi, positions[sub], cfg.lambda)
                        * elem_entry(d.theta, d.phi, cfg, ix, iz);
                    acc += paths.gains[p] * rx_entry(a.theta, a.phi, cfg, r) * at.conj();
                }
            }
            h[(r, c)] = acc * scale;
        }
    }
    h
}

/// `log2|det M|` through an LU factorization.
pub fn log2_det_lu(m: &CMatrix) -> f64 {
    m.clone().lu().determinant().norm().log2()
}

/// Maximum of `f` over a `points × points` lattice covering `region`.
pub fn grid_max<F: FnMut(Position) -> f64>(mut f: F, region: &Rect, points: usize) -> (Position, f64) {
    let mut best = (region.center(), f64::NEG_INFINITY);
    let step = |lo: f64, hi: f64, i: usize| {
        if points < 2 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (points - 1) as f64
        }
    };
    for i in 0..points {
        for k in 0..points {
            let p = Position::new(
                step(region.x_min, region.x_max, i),
                step(region.z_min, region.z_max, k),
            );
            let v = f(p);
            if v > best.1 {
                best = (p, v);
            }
        }
    }
    best
}
