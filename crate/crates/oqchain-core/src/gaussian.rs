//! Gaussian states in the annihilation-first ordering and the operations the
//! rest of the crate needs: constructors, physicality checks, partial trace,
//! basis changes and the Uhlmann fidelity between Gaussian states.
//!
//! Conventions. A state of `N` modes is described against the operator vector
//! `xi = (a_1..a_N, a_1^dag..a_N^dag)`. The covariance matrix is
//! `C_ij = <xi_i xi_j^dag + xi_j^dag xi_i> - 2 <xi_i><xi_j^dag>` and the
//! displacement vector is `d_i = <xi_i>`, so the vacuum has `C = I_2N` and a
//! thermal mode has `C = (2 nbar + 1) I_2`.

use ndarray::{Array1, Array2, s};
use ndarray_linalg::{Eig, Eigh, Inverse, Solve, UPLO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

const HERMITICITY_TOL: f64 = 1e-12;

/// The three structural matrices of the `(a, a^dag)` ordering, each built
/// from its own block definition.
#[derive(Debug, Clone)]
pub struct StructuralMatrices {
    /// Commutator matrix `[xi_i, xi_j] = Omega_ij`; `Omega^2 = -I`.
    pub omega: Array2<C64>,
    /// Signature matrix `diag(I_N, -I_N)`; `Z^2 = I`.
    pub zmat: Array2<C64>,
    /// Swap matrix `[[0, I],[I, 0]]`; `X^2 = I`.
    pub xmat: Array2<C64>,
}

impl StructuralMatrices {
    pub fn new(n_modes: usize) -> Self {
        StructuralMatrices {
            omega: omega_matrix(n_modes),
            zmat: z_matrix(n_modes),
            xmat: x_matrix(n_modes),
        }
    }
}

pub fn omega_matrix(n: usize) -> Array2<C64> {
    let mut m = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        m[[i, n + i]] = C64::new(1.0, 0.0);
        m[[n + i, i]] = C64::new(-1.0, 0.0);
    }
    m
}

pub fn z_matrix(n: usize) -> Array2<C64> {
    let mut m = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        m[[i, i]] = C64::new(1.0, 0.0);
        m[[n + i, n + i]] = C64::new(-1.0, 0.0);
    }
    m
}

pub fn x_matrix(n: usize) -> Array2<C64> {
    let mut m = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        m[[i, n + i]] = C64::new(1.0, 0.0);
        m[[n + i, i]] = C64::new(1.0, 0.0);
    }
    m
}

/// Mean photon number of a mode with frequency `omega` at temperature `t`
/// (natural units, k_B = 1). `t = 0` is the vacuum limit.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid_argument(format!(
            "thermal_occupation: frequency must be positive, got {omega}"
        )));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::invalid_argument(format!(
            "thermal_occupation: temperature must be >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    // 1/(e^{w/T} - 1); exp_m1 keeps precision at small w/T, and the large
    // w/T overflow collapses cleanly to 0.
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// A Gaussian state: covariance matrix plus displacement vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    cov: Array2<C64>,
    disp: Array1<C64>,
}

impl GaussianState {
    /// Validates the structural invariants (Hermiticity, the
    /// `[[C1, C2],[C2^dag, C1^T]]` block form, displacement conjugation) but
    /// not physicality, which callers check via [`symplectic_eigenvalues`]
    /// where required.
    pub fn new(cov: Array2<C64>, disp: Array1<C64>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || dim % 2 != 0 || cov.ncols() != dim {
            return Err(Error::invalid_argument(format!(
                "covariance must be square with even dimension, got {:?}",
                cov.dim()
            )));
        }
        if disp.len() != dim {
            return Err(Error::invalid_argument(format!(
                "displacement length {} does not match covariance dimension {dim}",
                disp.len()
            )));
        }
        let n = dim / 2;
        let scale = linalg::max_abs(&cov).max(1.0);
        if !linalg::is_hermitian(&cov, HERMITICITY_TOL) {
            return Err(Error::InvalidState(
                "covariance matrix is not Hermitian".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                // lower-right block mirrors the upper-left transpose
                if (cov[[n + i, n + j]] - cov[[j, i]]).norm() > HERMITICITY_TOL * scale {
                    return Err(Error::InvalidState(
                        "covariance lacks the C1/C1^T block structure".into(),
                    ));
                }
                // the aa block is symmetric
                if (cov[[i, n + j]] - cov[[j, n + i]]).norm() > HERMITICITY_TOL * scale {
                    return Err(Error::InvalidState(
                        "covariance aa-block is not symmetric".into(),
                    ));
                }
            }
        }
        let dscale = disp.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..n {
            if (disp[n + i] - disp[i].conj()).norm() > HERMITICITY_TOL * dscale {
                return Err(Error::InvalidState(
                    "displacement must satisfy d[N+i] = conj(d[i])".into(),
                ));
            }
        }
        Ok(GaussianState {
            n_modes: n,
            cov,
            disp,
        })
    }

    /// Assemble from the upper blocks; the lower half is filled in by the
    /// conjugation structure, so the invariants hold by construction.
    pub fn from_blocks(c1: Array2<C64>, c2: Array2<C64>, d: Array1<C64>) -> Result<Self> {
        let n = c1.nrows();
        if c1.ncols() != n || c2.dim() != (n, n) || d.len() != n {
            return Err(Error::invalid_argument(
                "from_blocks: inconsistent block dimensions",
            ));
        }
        let c1 = linalg::hermitize(&c1);
        let c2 = (&c2 + &c2.t()).mapv(|z| 0.5 * z);
        let mut cov = Array2::zeros((2 * n, 2 * n));
        cov.slice_mut(s![..n, ..n]).assign(&c1);
        cov.slice_mut(s![..n, n..]).assign(&c2);
        cov.slice_mut(s![n.., ..n]).assign(&c2.mapv(|z| z.conj()));
        cov.slice_mut(s![n.., n..]).assign(&c1.t());
        let mut disp = Array1::zeros(2 * n);
        disp.slice_mut(s![..n]).assign(&d);
        disp.slice_mut(s![n..]).assign(&d.mapv(|z| z.conj()));
        GaussianState::new(cov, disp)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cov(&self) -> &Array2<C64> {
        &self.cov
    }

    pub fn disp(&self) -> &Array1<C64> {
        &self.disp
    }

    /// Upper-left `aa^dag` block.
    pub fn block_c1(&self) -> Array2<C64> {
        self.cov.slice(s![..self.n_modes, ..self.n_modes]).to_owned()
    }

    /// Upper-right `aa` block.
    pub fn block_c2(&self) -> Array2<C64> {
        self.cov.slice(s![..self.n_modes, self.n_modes..]).to_owned()
    }

    /// First `N` components of the displacement.
    pub fn disp_upper(&self) -> Array1<C64> {
        self.disp.slice(s![..self.n_modes]).to_owned()
    }

    pub fn is_physical(&self, tol: f64) -> Result<bool> {
        let nu = symplectic_eigenvalues(self)?;
        Ok(nu.iter().all(|&v| v >= 1.0 - tol))
    }
}

/// Vacuum of `n_modes` modes: `C = I`, `d = 0`.
pub fn vacuum_state(n_modes: usize) -> Result<GaussianState> {
    if n_modes == 0 {
        return Err(Error::invalid_argument("vacuum_state: n_modes must be >= 1"));
    }
    GaussianState::new(Array2::eye(2 * n_modes), Array1::zeros(2 * n_modes))
}

/// Product of thermal modes at a common temperature:
/// `C = diag(2 nbar(w_i) + 1)` on both diagonal blocks, `d = 0`.
pub fn thermal_state(frequencies: &[f64], temperature: f64) -> Result<GaussianState> {
    if frequencies.is_empty() {
        return Err(Error::invalid_argument(
            "thermal_state: at least one frequency required",
        ));
    }
    let n = frequencies.len();
    let mut cov = Array2::zeros((2 * n, 2 * n));
    for (i, &w) in frequencies.iter().enumerate() {
        let tau = 2.0 * thermal_occupation(w, temperature)? + 1.0;
        cov[[i, i]] = C64::new(tau, 0.0);
        cov[[n + i, n + i]] = C64::new(tau, 0.0);
    }
    GaussianState::new(cov, Array1::zeros(2 * n))
}

/// Moduli of the eigenvalue pairs of `Z_N C`, sorted ascending; all `>= 1`
/// for physical states.
///
/// Computed as the spectrum of the Hermitian matrix `C^{1/2} Z C^{1/2}`,
/// which is similar to `Z C`.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<Vec<f64>> {
    let cov = state.cov();
    if !linalg::is_hermitian(cov, HERMITICITY_TOL) {
        return Err(Error::InvalidState(
            "symplectic_eigenvalues: covariance is not Hermitian".into(),
        ));
    }
    let root = linalg::sqrtm_hermitian_psd(cov, 1e-9)?;
    let z = z_matrix(state.n_modes());
    let prod = root.dot(&z).dot(&root);
    let (evals, _) = prod.eigh(UPLO::Lower)?;
    let mut mags: Vec<f64> = evals.iter().map(|e| e.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // eigenvalues come in +/- pairs; average each pair to kill roundoff skew
    let n = state.n_modes();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(0.5 * (mags[2 * k] + mags[2 * k + 1]));
    }
    Ok(out)
}

/// Restriction of a state to a subset of modes (0-based indices). The kept
/// modes are reindexed in ascending order.
pub fn partial_trace(state: &GaussianState, kept_modes: &[usize]) -> Result<GaussianState> {
    let n = state.n_modes();
    if kept_modes.is_empty() {
        return Err(Error::invalid_argument("partial_trace: empty mode set"));
    }
    let mut kept: Vec<usize> = kept_modes.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != kept_modes.len() {
        return Err(Error::invalid_argument(
            "partial_trace: duplicate mode indices",
        ));
    }
    if *kept.last().unwrap() >= n {
        return Err(Error::invalid_argument(format!(
            "partial_trace: mode index out of range (N = {n})"
        )));
    }
    let m = kept.len();
    let mut cov = Array2::zeros((2 * m, 2 * m));
    let mut disp = Array1::zeros(2 * m);
    for (a, &i) in kept.iter().enumerate() {
        disp[a] = state.disp[i];
        disp[m + a] = state.disp[n + i];
        for (b, &j) in kept.iter().enumerate() {
            cov[[a, b]] = state.cov[[i, j]];
            cov[[a, m + b]] = state.cov[[i, n + j]];
            cov[[m + a, b]] = state.cov[[n + i, j]];
            cov[[m + a, m + b]] = state.cov[[n + i, n + j]];
        }
    }
    GaussianState::new(cov, disp)
}

/// Re-express a state under the block-diagonal unitary `U = B (+) B^*`:
/// `C -> U^dag C U`, `d -> U^dag d`. With `U = T (+) T^*` this takes a
/// normal-mode-basis state back to the site basis.
pub fn basis_change(state: &GaussianState, u: &Array2<C64>) -> Result<GaussianState> {
    let dim = 2 * state.n_modes();
    if u.dim() != (dim, dim) {
        return Err(Error::invalid_argument(format!(
            "basis_change: U must be {dim}x{dim}"
        )));
    }
    let udag = linalg::adjoint(u);
    let gram = udag.dot(u);
    if linalg::max_abs_diff(&gram, &Array2::eye(dim)) > 1e-12 {
        return Err(Error::invalid_argument("basis_change: U is not unitary"));
    }
    let n = state.n_modes();
    let scale = linalg::max_abs(u).max(1.0);
    for i in 0..n {
        for j in 0..n {
            if u[[i, n + j]].norm() > 1e-12 * scale || u[[n + i, j]].norm() > 1e-12 * scale {
                return Err(Error::invalid_argument(
                    "basis_change: U mixes annihilation and creation sectors",
                ));
            }
            if (u[[n + i, n + j]] - u[[i, j]].conj()).norm() > 1e-12 * scale {
                return Err(Error::invalid_argument(
                    "basis_change: lower block must be the conjugate of the upper block",
                ));
            }
        }
    }
    let cov = udag.dot(state.cov()).dot(u);
    let disp = udag.dot(state.disp());
    GaussianState::new(linalg::hermitize(&cov), disp)
}

/// Uhlmann fidelity between two Gaussian states of the same mode count.
///
/// Uses the determinant/matrix-root expression for Gaussian fidelity. That
/// expression is stated for covariances normalised so the vacuum is `I/2`;
/// our convention has vacuum `I`, so the inputs are halved internally. The
/// result is the non-squared fidelity, e.g. `sqrt(1/(nbar+1))` between the
/// vacuum and a thermal mode.
pub fn fidelity(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    let n = s1.n_modes();
    if s2.n_modes() != n {
        return Err(Error::invalid_argument(format!(
            "fidelity: mode count mismatch ({} vs {})",
            n,
            s2.n_modes()
        )));
    }
    let g1 = s1.cov().mapv(|z| 0.5 * z);
    let g2 = s2.cov().mapv(|z| 0.5 * z);
    let z = z_matrix(n);
    let sum = &g1 + &g2;
    let sum_inv = sum
        .inv()
        .map_err(|_| Error::Singular("fidelity: C1 + C2 is singular".into()))?;

    // C_aux = Z (G1+G2)^-1 (Z/4 + G2 Z G1)
    let inner = z.mapv(|v| 0.25 * v) + g2.dot(&z).dot(&g1);
    let c_aux = z.dot(&sum_inv).dot(&inner);
    let a = c_aux.dot(&z);

    // sqrt(I - (A^-2)/4) via the eigenbasis of A, with an iterative root as
    // fallback when A is numerically defective.
    let dim = 2 * n;
    let sqrt_term = match sqrt_branch_eig(&a, dim) {
        Some(m) => m,
        None => {
            let a2inv = a
                .dot(&a)
                .inv()
                .map_err(|_| Error::Singular("fidelity: auxiliary matrix is singular".into()))?;
            let b = Array2::eye(dim) - a2inv.mapv(|v| 0.25 * v);
            linalg::sqrtm_denman_beavers(&b, 80)?
        }
    };

    let f_tot4_mat = (sqrt_term + Array2::eye(dim)).mapv(|v| 2.0 * v).dot(&c_aux);
    let f_tot4 = linalg::det_real_checked(&f_tot4_mat)?;
    let den = linalg::det_real_checked(&sum)?;
    if f_tot4 < 0.0 || den <= 0.0 {
        return Err(Error::Singular(format!(
            "fidelity: negative determinant (F_tot^4 = {f_tot4:.3e}, det = {den:.3e})"
        )));
    }
    let f0 = f_tot4.powf(0.25) / den.powf(0.25);

    let delta = s2.disp() - s1.disp();
    let w = sum_inv.dot(&delta);
    let quad: C64 = delta.iter().zip(w.iter()).map(|(d, w)| d.conj() * w).sum();
    let f = f0 * (-0.25 * quad.re).exp();
    // roundoff can push identical-state fidelity marginally above 1
    if f > 1.0 && f < 1.0 + 1e-8 {
        return Ok(1.0);
    }
    Ok(f)
}

fn sqrt_branch_eig(a: &Array2<C64>, dim: usize) -> Option<Array2<C64>> {
    let (evals, evecs) = a.eig().ok()?;
    let vinv = evecs.inv().ok()?;
    let recon = evecs.dot(&linalg::diag(&evals)).dot(&vinv);
    if linalg::max_abs_diff(&recon, a) > 1e-8 * linalg::max_abs(a).max(1.0) {
        return None;
    }
    let amin = evals.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if amin < 1e-14 * linalg::max_abs(a).max(1.0) {
        return None;
    }
    let roots: Array1<C64> = evals.mapv(|lam| {
        let b = C64::new(1.0, 0.0) - 0.25 / (lam * lam);
        b.sqrt() // principal branch
    });
    Some(evecs.dot(&linalg::diag(&roots)).dot(&vinv))
}

/// Closed-form fidelity between the local and global steady states at equal
/// bath temperatures. Valid for any `0 <= g < omega0/sqrt(2)`; reduces to 1
/// at `g = 0` where the two steady states coincide.
pub fn analytic_equal_temp_fidelity(omega0: f64, g: f64, temperature: f64) -> Result<f64> {
    if !(omega0 > 0.0) {
        return Err(Error::invalid_argument("omega0 must be positive"));
    }
    if !(g >= 0.0) || g >= omega0 / std::f64::consts::SQRT_2 {
        return Err(Error::invalid_argument(format!(
            "g must lie in [0, omega0/sqrt(2)), got {g}"
        )));
    }
    let eps = [
        omega0 - std::f64::consts::SQRT_2 * g,
        omega0,
        omega0 + std::f64::consts::SQRT_2 * g,
    ];
    let tau: Vec<f64> = eps
        .iter()
        .map(|&e| thermal_occupation(e, temperature).map(|n| 2.0 * n + 1.0))
        .collect::<Result<_>>()?;
    // product over modes of the single-mode thermal fidelity^4 between
    // occupations tau(eps_2) and tau(eps_i)
    let t2 = tau[1];
    let mut prod = 1.0;
    for &ti in &tau {
        let root = ((t2 * t2 - 1.0) * (ti * ti - 1.0)).sqrt();
        let num = root + t2 * ti + 1.0;
        prod *= 4.0 * num * num / (t2 + ti).powi(4);
    }
    Ok(prod.powf(0.25))
}

/// Flat JSON form of a Gaussian state, used for test fixtures and metadata.
/// Matrices are row-major `2N x 2N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianStateData {
    pub n_modes: usize,
    pub cov_re: Vec<f64>,
    pub cov_im: Vec<f64>,
    pub disp_re: Vec<f64>,
    pub disp_im: Vec<f64>,
}

impl From<&GaussianState> for GaussianStateData {
    fn from(s: &GaussianState) -> Self {
        GaussianStateData {
            n_modes: s.n_modes(),
            cov_re: s.cov().iter().map(|z| z.re).collect(),
            cov_im: s.cov().iter().map(|z| z.im).collect(),
            disp_re: s.disp().iter().map(|z| z.re).collect(),
            disp_im: s.disp().iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<&GaussianStateData> for GaussianState {
    type Error = Error;

    fn try_from(d: &GaussianStateData) -> Result<GaussianState> {
        let dim = 2 * d.n_modes;
        if d.cov_re.len() != dim * dim
            || d.cov_im.len() != dim * dim
            || d.disp_re.len() != dim
            || d.disp_im.len() != dim
        {
            return Err(Error::invalid_argument(
                "GaussianStateData: field lengths inconsistent with n_modes",
            ));
        }
        let cov = Array2::from_shape_vec(
            (dim, dim),
            d.cov_re
                .iter()
                .zip(d.cov_im.iter())
                .map(|(&re, &im)| C64::new(re, im))
                .collect(),
        )
        .expect("shape checked above");
        let disp = Array1::from_vec(
            d.disp_re
                .iter()
                .zip(d.disp_im.iter())
                .map(|(&re, &im)| C64::new(re, im))
                .collect(),
        );
        GaussianState::new(cov, disp)
    }
}

/// Solve `(C1+C2) x = delta` style systems in tests without exposing the
/// solver choice; kept here so fixtures and tests share one code path.
pub(crate) fn solve_hermitian(m: &Array2<C64>, rhs: &Array1<C64>) -> Result<Array1<C64>> {
    Ok(m.solve(rhs)?)
}
