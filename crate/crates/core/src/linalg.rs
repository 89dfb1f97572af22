//! Small complex linear-algebra helpers shared by the precoder and SIC code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// `exp(j * phase)`.
#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// log2 of the determinant of a Hermitian positive-definite matrix.
///
/// Returns `None` when the Cholesky factorization fails.
pub fn log2_det_hpd(m: &CMatrix) -> Option<f64> {
    let chol = Cholesky::new(m.clone())?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        // nalgebra takes complex square roots, so an indefinite input shows
        // up as a diagonal entry that is (almost) purely imaginary.
        let d = l[(i, i)];
        if !(d.re > 0.0) || !d.re.is_finite() || d.im.abs() > 1e-6 * d.re {
            return None;
        }
        acc += d.re.ln();
    }
    Some(2.0 * acc / std::f64::consts::LN_2)
}

/// Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky(m: &CMatrix) -> Option<Cholesky<C64, Dyn>> {
    Cholesky::new(m.clone())
}

/// `I + scale * X Xᴴ`.
pub fn identity_plus_gram(x: &CMatrix, scale: f64) -> CMatrix {
    let n = x.nrows();
    let mut g = x * x.adjoint();
    g *= C64::new(scale, 0.0);
    for i in 0..n {
        g[(i, i)] += C64::new(1.0, 0.0);
    }
    g
}

/// Force exact Hermitian symmetry, `(M + Mᴴ) / 2`.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Dominant eigenpair of a Hermitian matrix.
///
/// The eigenvector is unit-norm with its largest-magnitude entry rotated to be
/// real and positive, so the result is independent of the solver's phase choice.
pub fn dominant_eigenpair(m: &CMatrix) -> (f64, CVector) {
    let mut h = m.clone();
    hermitize(&mut h);
    let eig = h.symmetric_eigen();
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    let mut v: CVector = eig.eigenvectors.column(idx).into_owned();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        v *= rot;
    }
    let norm = v.norm();
    if norm > 0.0 {
        v /= C64::new(norm, 0.0);
    }
    (value, v)
}

/// Right singular vectors of `m`, as columns of a square unitary matrix, paired
/// with the singular values sorted in descending order (zero-padded to `ncols`).
pub fn right_singular_basis(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let cols = m.ncols();
    // Pad wide matrices with zero rows so the thin SVD returns a full V.
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut values = Vec::with_capacity(cols);
    let mut basis = CMatrix::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        values.push(svd.singular_values[src]);
        let row = v_t.row(src);
        for r in 0..cols {
            basis[(r, dst)] = row[r].conj();
        }
    }
    (values, basis)
}

/// Phase-only projection `exp(j∠v)`, with `∠0 := 0`.
pub fn phase_project(v: &CVector) -> CVector {
    v.map(|z| if z.norm() == 0.0 { C64::new(1.0, 0.0) } else { cis(z.arg()) })
}
