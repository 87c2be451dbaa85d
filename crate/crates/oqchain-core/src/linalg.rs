//! Small dense complex linear-algebra helpers shared across the crate.
//!
//! Everything here operates on `ndarray` matrices of `Complex64`; sizes are
//! tiny (3x3 blocks up to a few hundred for joint system-bath states), so
//! plain LAPACK-backed dense routines are used throughout.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, Eig, Eigh, Inverse, Solve, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

/// Conjugate transpose.
pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `|m - m^dag|_max <= tol * max(1, |m|_max)`.
pub fn is_hermitian(m: &Array2<C64>, tol: f64) -> bool {
    let (r, c) = m.dim();
    if r != c {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    for i in 0..r {
        for j in i..c {
            if (m[[i, j]] - m[[j, i]].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Symmetrise away anti-Hermitian roundoff dust.
pub fn hermitize(m: &Array2<C64>) -> Array2<C64> {
    (m + &adjoint(m)).mapv(|z| 0.5 * z)
}

pub fn diag(values: &Array1<C64>) -> Array2<C64> {
    Array2::from_diag(values)
}

/// Row-major vectorisation, matching `vec(A X B) = (A (x) B^T) vec(X)`.
pub fn vec_row_major(m: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(m.iter().cloned())
}

pub fn unvec_row_major(v: &Array1<C64>, n: usize) -> Array2<C64> {
    Array2::from_shape_vec((n, n), v.to_vec()).expect("unvec: length mismatch")
}

/// `exp(factor * H)` for Hermitian `H`, via its eigendecomposition.
pub fn expm_hermitian(h: &Array2<C64>, factor: C64) -> Result<Array2<C64>> {
    let (evals, evecs) = h.eigh(UPLO::Lower)?;
    let phases: Array1<C64> = evals.mapv(|e| (factor * e).exp());
    let scaled = &evecs * &phases; // column-scales the eigenvector matrix
    Ok(scaled.dot(&adjoint(&evecs)))
}

/// Principal matrix exponential of a general complex square matrix.
///
/// Diagonalises when the eigenvector basis is well conditioned and falls back
/// to scaling-and-squaring on (numerically) defective input.
pub fn expm(m: &Array2<C64>) -> Result<Array2<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::invalid_argument("expm: matrix must be square"));
    }
    if let Some(res) = try_expm_eig(m) {
        return Ok(res);
    }
    Ok(expm_taylor_scaled(m))
}

fn try_expm_eig(m: &Array2<C64>) -> Option<Array2<C64>> {
    let (evals, evecs) = m.eig().ok()?;
    let vinv = evecs.inv().ok()?;
    // Reject the route if V Lambda V^-1 does not reproduce the input.
    let recon = evecs.dot(&diag(&evals)).dot(&vinv);
    if max_abs_diff(&recon, m) > 1e-10 * max_abs(m).max(1.0) {
        return None;
    }
    let expd = diag(&evals.mapv(|z| z.exp()));
    Some(evecs.dot(&expd).dot(&vinv))
}

/// Scaling-and-squaring with a machine-precision Taylor series on the scaled
/// matrix; adequate for the small, moderate-norm blocks used here.
fn expm_taylor_scaled(m: &Array2<C64>) -> Array2<C64> {
    let n = m.nrows();
    let norm = max_abs(m) * n as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.mapv(|z| z / 2f64.powi(s as i32));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=40 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result = &result + &term;
        if max_abs(&term) < 1e-18 * max_abs(&result).max(1.0) {
            break;
        }
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

/// Solve `M X + X M^dag = RHS` by LU on the Kronecker form
/// `(M (x) I + I (x) M^*) vec(X) = vec(RHS)` (row-major vectorisation).
///
/// Fails with `IllConditioned` when the Kronecker operator is numerically
/// singular, which happens when `M` has eigenvalue pairs summing to ~0.
pub fn solve_sylvester_dagger(m: &Array2<C64>, rhs: &Array2<C64>) -> Result<Array2<C64>> {
    let n = m.nrows();
    if m.ncols() != n || rhs.dim() != (n, n) {
        return Err(Error::invalid_argument(
            "solve_sylvester_dagger: dimension mismatch",
        ));
    }
    let eye = identity(n);
    let f = ndarray::linalg::kron(m, &eye) + ndarray::linalg::kron(&eye, &m.mapv(|z| z.conj()));
    let cond_scale = max_abs(&f).max(f64::MIN_POSITIVE);
    let x = f.solve(&vec_row_major(rhs)).map_err(|_| {
        Error::IllConditioned("Sylvester operator M(x)I + I(x)M* is singular".into())
    })?;
    // LU succeeded; verify the residual instead of trusting the factorisation.
    let sol = unvec_row_major(&x, n);
    let resid = m.dot(&sol) + sol.dot(&adjoint(m)) - rhs;
    if max_abs(&resid) > 1e-8 * cond_scale.max(max_abs(rhs)) {
        return Err(Error::IllConditioned(format!(
            "Sylvester solve residual {:.3e} too large",
            max_abs(&resid)
        )));
    }
    Ok(sol)
}

/// Hermitian PSD square root; eigenvalues in `[-clip_tol, 0)` are clipped to
/// zero, anything more negative is an error.
pub fn sqrtm_hermitian_psd(m: &Array2<C64>, clip_tol: f64) -> Result<Array2<C64>> {
    let (evals, evecs) = m.eigh(UPLO::Lower)?;
    let scale = evals.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let mut roots = Array1::<C64>::zeros(evals.len());
    for (r, &e) in roots.iter_mut().zip(evals.iter()) {
        if e < -clip_tol * scale {
            return Err(Error::InvalidState(format!(
                "matrix is not PSD: eigenvalue {e:.3e}"
            )));
        }
        *r = C64::new(e.max(0.0).sqrt(), 0.0);
    }
    let scaled = &evecs * &roots;
    Ok(scaled.dot(&adjoint(&evecs)))
}

/// Principal square root by the Denman-Beavers iteration; used when an
/// eigenvector-based root is unreliable. Requires no eigenvalues on the
/// closed negative real axis.
pub fn sqrtm_denman_beavers(a: &Array2<C64>, max_iter: usize) -> Result<Array2<C64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = identity(n);
    for _ in 0..max_iter {
        let y_inv = y.inv().map_err(|_| {
            Error::Singular("Denman-Beavers iterate became singular".into())
        })?;
        let z_inv = z.inv().map_err(|_| {
            Error::Singular("Denman-Beavers iterate became singular".into())
        })?;
        let y_next = (&y + &z_inv).mapv(|v| 0.5 * v);
        let z_next = (&z + &y_inv).mapv(|v| 0.5 * v);
        let delta = max_abs_diff(&y_next, &y);
        y = y_next;
        z = z_next;
        if delta < 1e-14 * max_abs(&y).max(1.0) {
            break;
        }
    }
    let resid = max_abs_diff(&y.dot(&y), a);
    if resid > 1e-9 * max_abs(a).max(1.0) {
        return Err(Error::Singular(format!(
            "matrix square root did not converge, residual {resid:.3e}"
        )));
    }
    Ok(y)
}

/// Determinant of a complex matrix expected to be real up to roundoff dust.
/// Returns the real part after checking `|Im| <= 1e-9 |Re|`.
pub fn det_real_checked(m: &Array2<C64>) -> Result<f64> {
    let d = m.det()?;
    if d.im.abs() > 1e-9 * d.re.abs().max(1e-300) {
        return Err(Error::Singular(format!(
            "determinant has a non-negligible imaginary part: {d}"
        )));
    }
    Ok(d.re)
}
