//! Quick oracle and identity checks, run by `masim selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::analog::{effective_channel, initial_analog, residual_cov, sic_sweep, SicOptions};
use crate::channel::{assemble_channel, draw_paths, rebuild_on_move, ChannelProfile};
use crate::geometry::{initial_layout, tx_response, ArrayConfig, Position, Rect, SubarrayLayout, SPEED_OF_LIGHT};
use crate::harness::SystemProfile;
use crate::linalg::{C64, CMatrix, CVector};
use crate::oracle;
use crate::position::{nelder_mead_2d, NelderMeadOptions};
use crate::precoder::{bd_digital, sum_rate_full, sum_rate_simplified, sum_rate_simplified_dual, AnalogMode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error, or the failing quantity.
    pub worst: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, worst: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

fn random_cmatrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn random_layout<R: Rng>(rng: &mut R, u: usize, lambda: f64) -> SubarrayLayout {
    SubarrayLayout::fixed(
        (0..u)
            .map(|_| Position::new(rng.random_range(-6.0..6.0) * lambda, rng.random_range(-6.0..6.0) * lambda))
            .collect(),
    )
}

pub fn run_selftest() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let lambda = SPEED_OF_LIGHT / 28e9;
    let mut out = Vec::new();

    let cfg = ArrayConfig::new(16, 4, lambda).expect("valid config");
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (theta, phi) = (rng.random_range(0.0..std::f64::consts::PI), rng.random_range(-3.0..3.0));
        let layout = random_layout(&mut rng, 4, lambda);
        let fast = tx_response(theta, phi, &layout, &cfg).entries;
        let slow = oracle::tx_response(theta, phi, &layout.positions, &cfg);
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).norm());
        }
    }
    out.push(check("steering vector vs scalar oracle", worst, 1e-12));

    let mut worst = 0.0f64;
    for (m_t, u) in [(16, 4), (36, 4), (64, 16)] {
        let cfg = ArrayConfig::new(m_t, u, lambda).expect("valid config");
        let profile = ChannelProfile::default();
        let ps = &draw_paths(rng.random(), 1, &profile)[0];
        let layout = random_layout(&mut rng, u, lambda);
        let fast = assemble_channel(ps, &layout, &cfg);
        let slow = oracle::channel(ps, &layout.positions, &cfg);
        worst = worst.max((&fast - &slow).norm() / slow.norm());
    }
    out.push(check("channel vs triple-loop oracle (relative)", worst, 1e-10));

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 4;
        let x = random_cmatrix(&mut rng, n, 3);
        let a = &x * x.adjoint();
        let b_vec = random_cmatrix(&mut rng, n, 1);
        let b = &b_vec * b_vec.adjoint();
        let eye = CMatrix::identity(n, n);
        let direct = oracle::log2_det_lu(&(&eye + &a + &b));
        let base = &eye + &a;
        let lu = base.clone().lu();
        let inv = lu.try_inverse().expect("I + A invertible");
        let split = oracle::log2_det_lu(&base) + oracle::log2_det_lu(&(&eye + inv * &b));
        worst = worst.max((direct - split).abs());
    }
    out.push(check("determinant lemma split", worst, 1e-9));

    let system = SystemProfile::desk().system_config(0.0, 12.0).expect("desk profile");
    let layout = initial_layout(&system.array).expect("nominal layout");
    let mut sylvester = 0.0f64;
    let mut leakage = 0.0f64;
    let mut ascent = 0.0f64;
    let mut lemma = 0.0f64;
    for trial in 0..30u64 {
        let paths = draw_paths(trial, system.users, &ChannelProfile::default());
        let ch = rebuild_on_move(&paths, &layout, &system.array, system.noise_var());
        let analog = initial_analog(&paths, &layout, &system.array, AnalogMode::Unconstrained);
        sylvester = sylvester.max((sum_rate_simplified(&ch, &analog) - sum_rate_simplified_dual(&ch, &analog)).abs());

        let m = (trial as usize) % analog.chains();
        let a = residual_cov(&ch, &analog, m);
        let c = effective_channel(&ch, &a, m);
        let h = ch.block(m) * &analog.blocks[m];
        let rows = a.nrows();
        let base = &a + CMatrix::identity(rows, rows);
        let direct = oracle::log2_det_lu(&(&base + (&h * h.adjoint()) / C64::new(ch.noise_var, 0.0)))
            - oracle::log2_det_lu(&base);
        let f: &CVector = &analog.blocks[m];
        let split = (1.0 + f.dotc(&(&c * f)).re / ch.noise_var).log2();
        lemma = lemma.max((direct - split).abs());

        let sweep = sic_sweep(&ch, &analog, AnalogMode::Unconstrained, &SicOptions::default());
        let mut prev = sweep.initial;
        for &r in &sweep.trace {
            ascent = ascent.max(prev - r);
            prev = r;
        }
        let hybrid = bd_digital(&ch, &sweep.analog, system.streams, system.p_max).expect("feasible");
        let report = sum_rate_full(&ch, &hybrid).expect("positive noise");
        leakage = leakage.max(report.max_leakage());
    }
    out.push(check("Sylvester identity for the surrogate rate", sylvester, 1e-9));
    out.push(check("effective-channel determinant lemma", lemma, 1e-9));
    out.push(check("unconstrained analog ascent (max drop)", ascent.max(0.0), 1e-9));
    out.push(check("BD inter-user leakage", leakage, 1e-9));

    let region = Rect {
        x_min: 0.0,
        x_max: 4.0 * lambda,
        z_min: 0.0,
        z_max: 4.0 * lambda,
    };
    let target = Position::new(1.7 * lambda, 0.6 * lambda);
    let opts = NelderMeadOptions {
        iters: 200,
        ftol: 0.0,
        ..NelderMeadOptions::for_wavelength(lambda)
    };
    let nm = nelder_mead_2d(
        |p| -(p.x - target.x).powi(2) - (p.z - target.z).powi(2),
        &region,
        Position::new(3.0 * lambda, 3.0 * lambda),
        &opts,
    );
    out.push(check(
        "Nelder-Mead quadratic maximizer (wavelengths)",
        nm.best.distance(&target) / lambda,
        1e-3,
    ));
    out
}
