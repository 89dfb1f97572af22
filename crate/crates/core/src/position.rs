//! Subarray position search.
//!
//! Because `F_RF` is block diagonal, the surrogate rate separates into a term
//! fixed by every other subarray (`A′_m`) and the contribution of subarray `m`:
//! `log2|I + A′_m + B_m| − log2|I + A′_m|` with `B_m = (1/σ²) h_m h_mᴴ` and
//! `h_m = H_m(x_m, z_m) f_m`. Each subarray is then moved by a bounded
//! Nelder–Mead search inside its own shrunk subregion, which keeps every
//! intermediate layout feasible.

use std::cell::Cell;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analog::residual_from_columns;
use crate::channel::{BeamSynth, ChannelSet, PathBasis};
use crate::geometry::{Position, Rect, SubarrayLayout};
use crate::linalg::{cholesky, log2_det_hpd, CMatrix, CVector, C64};
use crate::precoder::{rate_from_columns, AnalogPrecoder};

/// Maximization Nelder–Mead settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub iters: usize,
    /// Stop when the vertex values span less than this.
    pub ftol: f64,
    /// Leg length of the initial isosceles right triangle, meters.
    pub leg: f64,
    /// Stop when every vertex is within this distance of the best, meters.
    pub xtol: f64,
    /// Restrict trial points to a `P × P` lattice over the subregion.
    pub grid_snap: Option<usize>,
}

impl NelderMeadOptions {
    /// Defaults scaled to a wavelength: λ/4 legs, 100 iterations, `ftol = 1e−5`.
    pub fn for_wavelength(lambda: f64) -> Self {
        NelderMeadOptions {
            iters: 100,
            ftol: 1e-5,
            leg: lambda / 4.0,
            xtol: lambda * 1e-9,
            grid_snap: None,
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Three vertices ordered worst → best (maximization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex2D {
    pub vertices: [Position; 3],
    pub values: [f64; 3],
}

impl Simplex2D {
    fn sort(&mut self) {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = idx.map(|i| self.vertices[i]);
        self.values = idx.map(|i| self.values[i]);
    }

    pub fn best(&self) -> (Position, f64) {
        (self.vertices[2], self.values[2])
    }

    pub fn spread(&self) -> f64 {
        self.values[2] - self.values[0]
    }

    pub fn size(&self) -> f64 {
        let b = self.vertices[2];
        self.vertices[0].distance(&b).max(self.vertices[1].distance(&b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOutcome {
    pub best: Position,
    pub value: f64,
    pub start_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn project(region: &Rect, p: Position, snap: Option<usize>) -> Position {
    let c = region.clamp(p);
    match snap {
        Some(pts) if pts >= 2 => {
            let s = |v: f64, lo: f64, hi: f64| {
                if hi <= lo {
                    lo
                } else {
                    let step = (hi - lo) / (pts - 1) as f64;
                    (lo + ((v - lo) / step).round() * step).clamp(lo, hi)
                }
            };
            Position::new(
                s(c.x, region.x_min, region.x_max),
                s(c.z, region.z_min, region.z_max),
            )
        }
        Some(_) => region.center(),
        None => c,
    }
}

fn lerp(from: Position, to: Position, t: f64) -> Position {
    Position::new(from.x + t * (to.x - from.x), from.z + t * (to.z - from.z))
}

fn seed_simplex<E>(eval: &mut E, region: &Rect, leg: f64, at: Position, value: f64) -> Simplex2D
where
    E: FnMut(Position) -> (Position, f64),
{
    // Legs point toward the interior so clipping does not collapse the triangle.
    let dx = if at.x + leg <= region.x_max { leg } else { -leg };
    let dz = if at.z + leg <= region.z_max { leg } else { -leg };
    let (p1, f1) = eval(Position::new(at.x + dx, at.z));
    let (p2, f2) = eval(Position::new(at.x, at.z + dz));
    let mut s = Simplex2D {
        vertices: [at, p1, p2],
        values: [value, f1, f2],
    };
    s.sort();
    s
}

/// Bounded maximization of `f` over `region`, starting from `start`.
///
/// Every trial point is clipped (and optionally snapped) into the region
/// before evaluation. The returned value is never below `f(start)`.
pub fn nelder_mead_2d<F>(mut f: F, region: &Rect, start: Position, opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(Position) -> f64,
{
    let start = project(region, start, opts.grid_snap);
    let start_value = f(start);
    if opts.iters == 0 {
        return NelderMeadOutcome {
            best: start,
            value: start_value,
            start_value,
            iterations: 0,
            evaluations: 1,
        };
    }
    let evaluations = Cell::new(1usize);
    let mut eval = |p: Position| {
        let q = project(region, p, opts.grid_snap);
        evaluations.set(evaluations.get() + 1);
        (q, f(q))
    };
    let mut s = seed_simplex(&mut eval, region, opts.leg, start, start_value);
    let mut anchor = start;

    let mut iterations = 0;
    while iterations < opts.iters {
        if s.spread() < opts.ftol || s.size() <= opts.xtol {
            // Clipping can flatten the simplex against the boundary long before
            // the optimum. Re-seed around the best point and only stop once a
            // fresh simplex settles where the previous one started.
            let (best, value) = s.best();
            if best == anchor {
                break;
            }
            anchor = best;
            s = seed_simplex(&mut eval, region, opts.leg, best, value);
            continue;
        }
        iterations += 1;
        let [worst, mid, best] = s.vertices;
        let [f_worst, f_mid, f_best] = s.values;
        let centroid = lerp(mid, best, 0.5);
        let (pr, fr) = eval(lerp(centroid, worst, -REFLECT));

        if fr > f_best {
            let (pe, fe) = eval(lerp(centroid, pr, EXPAND));
            if fe > fr {
                s.vertices[0] = pe;
                s.values[0] = fe;
            } else {
                s.vertices[0] = pr;
                s.values[0] = fr;
            }
        } else if fr > f_mid {
            s.vertices[0] = pr;
            s.values[0] = fr;
        } else {
            let contracted = if fr > f_worst {
                let (pc, fc) = eval(lerp(centroid, pr, CONTRACT));
                (fc >= fr).then_some((pc, fc))
            } else {
                let (pc, fc) = eval(lerp(centroid, worst, CONTRACT));
                (fc > f_worst).then_some((pc, fc))
            };
            match contracted {
                Some((pc, fc)) => {
                    s.vertices[0] = pc;
                    s.values[0] = fc;
                }
                None => {
                    for i in 0..2 {
                        let (p, v) = eval(lerp(best, s.vertices[i], SHRINK));
                        s.vertices[i] = p;
                        s.values[i] = v;
                    }
                }
            }
        }
        s.sort();
    }

    let (best, value) = s.best();
    NelderMeadOutcome {
        best,
        value,
        start_value,
        iterations,
        evaluations: evaluations.get(),
    }
}

/// Contribution of subarray `m` to the surrogate rate as a function of its position.
///
/// `(I + A′_m)` is factored once; each evaluation costs one path-phase sweep
/// and one triangular solve.
pub struct PositionObjective {
    synth: BeamSynth,
    base: CMatrix,
    base_inv: CMatrix,
    log_det_base: f64,
    noise_var: f64,
}

impl PositionObjective {
    pub fn new(
        basis: &PathBasis,
        analog: &AnalogPrecoder,
        columns: &[CVector],
        m: usize,
        noise_var: f64,
    ) -> Self {
        let a = residual_from_columns(columns, m, noise_var);
        let rows = a.nrows();
        let base = a + CMatrix::identity(rows, rows);
        let chol = cholesky(&base).expect("I + A′ is positive definite");
        let base_inv = chol.inverse();
        let log_det_base = log2_det_hpd(&base).expect("I + A′ is positive definite");
        PositionObjective {
            synth: basis.beam_synth(&analog.blocks[m]),
            base,
            base_inv,
            log_det_base,
            noise_var,
        }
    }

    /// `h_m` at a candidate position.
    pub fn column(&self, pos: Position) -> CVector {
        self.synth.eval(pos)
    }

    /// `log2(1 + (1/σ²) h_mᴴ (I + A′_m)⁻¹ h_m)`.
    pub fn eval(&self, pos: Position) -> f64 {
        let h = self.synth.eval(pos);
        let q = h.dotc(&(&self.base_inv * &h)).re.max(0.0);
        (q / self.noise_var).ln_1p() / std::f64::consts::LN_2
    }

    /// The same quantity as an explicit log-determinant difference.
    pub fn eval_split(&self, pos: Position) -> f64 {
        let h = self.synth.eval(pos);
        let b = (&h * h.adjoint()) / C64::new(self.noise_var, 0.0);
        log2_det_hpd(&(&self.base + b)).unwrap_or(f64::NAN) - self.log_det_base
    }

    /// The constant `log2|I + A′_m|`.
    pub fn base_rate(&self) -> f64 {
        self.log_det_base
    }
}

/// Order in which subarrays are visited within a position pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateOrder {
    Ascending,
    /// Fresh random permutation per pass, seeded.
    Shuffled(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionOutcome {
    pub layout: SubarrayLayout,
    pub channels: ChannelSet,
    /// Surrogate rate before the pass.
    pub initial: f64,
    /// Surrogate rate after each subarray update.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub moves: usize,
}

/// One cyclic pass of per-subarray Nelder–Mead searches.
pub fn optimize_positions(
    basis: &PathBasis,
    channels: &ChannelSet,
    layout: &SubarrayLayout,
    analog: &AnalogPrecoder,
    opts: &NelderMeadOptions,
    order: UpdateOrder,
) -> PositionOutcome {
    let mut layout = layout.clone();
    let mut channels = channels.clone();
    let sigma2 = channels.noise_var;
    let rows = channels.stacked.nrows();
    let mut columns = analog.effective_columns(&channels);
    let initial = rate_from_columns(&columns, rows, sigma2);

    let mut visit: Vec<usize> = (0..analog.chains()).collect();
    if let UpdateOrder::Shuffled(seed) = order {
        visit.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let mut trace = Vec::with_capacity(visit.len());
    let mut evaluations = 0;
    let mut moves = 0;
    let mut current = initial;
    for &m in &visit {
        let region = layout.subregions[m];
        let start = layout.positions[m];
        if !region.is_point() {
            let obj = PositionObjective::new(basis, analog, &columns, m, sigma2);
            let out = nelder_mead_2d(|p| obj.eval(p), &region, start, opts);
            evaluations += out.evaluations;
            if out.value > obj.eval(start) && out.best != start {
                layout.positions[m] = out.best;
                channels.set_block(m, &basis.block(out.best));
                columns[m] = channels.block(m) * &analog.blocks[m];
                current = rate_from_columns(&columns, rows, sigma2);
                moves += 1;
            }
        }
        trace.push(current);
    }
    PositionOutcome {
        layout,
        channels,
        initial,
        trace,
        evaluations,
        moves,
    }
}
