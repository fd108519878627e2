use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::topology::{expected_laplacian, Network, ProbabilityProfile};

/// Default threshold below which an eigenvalue counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Expected drift update matrix `N^zeta diag(p_i^-zeta) diag(alpha) Gamma`.
///
/// Rows of nodes with no weighted in-arcs (a reference node) are zero; any
/// other row with `p_i = 0` is rejected.
pub fn build_b_bar(net: &Network, profile: &ProbabilityProfile, zeta: f64) -> Result<DMatrix<f64>> {
    let mut b = expected_laplacian(net, profile);
    let scale = profile.n_bar.powf(zeta);
    for i in 0..net.n() {
        let row_is_zero = b.row(i).iter().all(|&x| x == 0.0);
        if row_is_zero {
            continue;
        }
        let p = profile.p_update[i];
        if p <= 0.0 {
            return Err(Error::ZeroUpdateProbability(i));
        }
        let w = scale * p.powf(-zeta) * net.node(i).clock.alpha;
        b.row_mut(i).scale_mut(w);
    }
    Ok(b)
}

/// Eigenstructure of the expected update matrix.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Complex<f64>>,
    pub zero_multiplicity: usize,
    /// One zero eigenvalue and every block eigenvalue strictly in the left
    /// half plane.
    pub hurwitz_ok: bool,
    /// Largest real part among the eigenvalues of `b_star`.
    pub max_real: f64,
    /// `[1 | basis of the column space]`.
    pub transform: DMatrix<f64>,
    /// Lower-right `(n-1) x (n-1)` block of `T^-1 B T`.
    pub b_star: DMatrix<f64>,
}

/// Eigenvalues and the consensus decomposition of `b`.
///
/// The column space basis comes from the left singular vectors of the `n-1`
/// largest singular values. With a simple zero eigenvalue the transform
/// block-diagonalizes `b` into `diag(0, B*)`.
pub fn spectral_check(b: &DMatrix<f64>, tol: f64) -> SpectralReport {
    let n = b.nrows();
    let eigenvalues: Vec<Complex<f64>> = b.complex_eigenvalues().iter().copied().collect();
    let zero_multiplicity = eigenvalues.iter().filter(|z| z.norm() < tol).count();

    let u = b.clone().svd(true, false).u.expect("requested U");
    let mut transform = DMatrix::zeros(n, n);
    transform.column_mut(0).fill(1.0);
    for c in 1..n {
        transform.set_column(c, &u.column(c - 1));
    }
    let (b_star, max_real) = match transform.clone().try_inverse() {
        Some(inv) if n > 1 => {
            let full = &inv * b * &transform;
            let block = full.view((1, 1), (n - 1, n - 1)).into_owned();
            let max_real = block
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max);
            (block, max_real)
        }
        _ => (DMatrix::zeros(n.saturating_sub(1), n.saturating_sub(1)), f64::INFINITY),
    };
    let hurwitz_ok = zero_multiplicity == 1 && max_real < -tol;
    SpectralReport {
        eigenvalues,
        zero_multiplicity,
        hurwitz_ok,
        max_real,
        transform,
        b_star,
    }
}

/// Largest real part of the eigenvalues of `m`.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `R B + B^T R + Q = 0` for symmetric positive definite `R`.
///
/// Vectorizes into `(B^T (x) I + I (x) B^T) vec R = -vec Q` and solves the
/// dense system by LU, which costs `O(m^6)` and is meant for `m` up to a few
/// dozen.
pub fn lyapunov_solve(b: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = b.nrows();
    if b.ncols() != m || q.shape() != (m, m) {
        return Err(Error::InvalidParameter("lyapunov: shape mismatch".into()));
    }
    let abscissa = spectral_abscissa(b);
    if !(abscissa < 0.0) {
        return Err(Error::NotHurwitz(abscissa));
    }
    if (q - q.transpose()).abs().max() > 1e-12 * (1.0 + q.abs().max()) || q.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let eye = DMatrix::<f64>::identity(m, m);
    let bt = b.transpose();
    let system = bt.kronecker(&eye) + eye.kronecker(&bt);
    let rhs = -DVector::from_column_slice(q.as_slice());
    let x = system
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("lyapunov system"))?;
    let r = DMatrix::from_column_slice(m, m, x.as_slice());
    Ok((&r + r.transpose()) * 0.5)
}

/// `||R B + B^T R + Q|| / ||Q||` in the Frobenius norm.
pub fn lyapunov_residual(b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> f64 {
    (r * b + b.transpose() * r + q).norm() / q.norm()
}
