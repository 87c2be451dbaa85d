//! Spectral-density models, the principal-value Lamb-shift integral and the
//! discretisation of a continuum bath into a finite star of modes.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::thermal_occupation;

/// Boundary exclusion for the principal-value integral: the pole must sit
/// strictly inside the support.
const PV_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralModel {
    /// `J(w) = eta` up to the cutoff.
    Flat,
    /// `J(w) = eta w` up to the cutoff.
    Ohmic,
}

/// A bath spectral density with hard cutoff: `J(w) = 0` for `w > cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub model: SpectralModel,
    pub amplitude: f64,
    pub cutoff: f64,
}

impl SpectralDensity {
    pub fn new(model: SpectralModel, amplitude: f64, cutoff: f64) -> Result<Self> {
        let j = SpectralDensity {
            model,
            amplitude,
            cutoff,
        };
        j.validate()?;
        Ok(j)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::invalid_argument(format!(
                "spectral amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::invalid_argument(format!(
                "spectral cutoff must be positive, got {}",
                self.cutoff
            )));
        }
        Ok(())
    }

    /// `J(omega)`; zero above the hard cutoff.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::invalid_argument(format!(
                "spectral density is defined for omega > 0, got {omega}"
            )));
        }
        if omega > self.cutoff {
            return Ok(0.0);
        }
        Ok(match self.model {
            SpectralModel::Flat => self.amplitude,
            SpectralModel::Ohmic => self.amplitude * omega,
        })
    }

    /// Lamb shift `S(w) = PV int_0^wmax J(w') / (w - w') dw'` for a pole
    /// strictly inside `(0, wmax)`.
    ///
    /// The singularity is removed analytically: the smooth part
    /// `(J(w') - J(w)) / (w - w')` is integrated by Gauss-Legendre panels on
    /// either side of the pole and the remainder contributes
    /// `J(w) ln(w / (wmax - w))`.
    pub fn lamb_shift(&self, omega: f64) -> Result<f64> {
        let wmax = self.cutoff;
        if omega < PV_BOUNDARY_TOL || omega > wmax - PV_BOUNDARY_TOL {
            return Err(Error::Singular(format!(
                "lamb_shift: pole at {omega} must lie strictly inside (0, {wmax})"
            )));
        }
        let j_pole = self.evaluate(omega)?;
        let smooth = |wp: f64| -> f64 {
            let jw = match self.model {
                SpectralModel::Flat => self.amplitude,
                SpectralModel::Ohmic => self.amplitude * wp,
            };
            if (omega - wp).abs() < 1e-13 {
                // limit is -J'(omega)
                match self.model {
                    SpectralModel::Flat => 0.0,
                    SpectralModel::Ohmic => -self.amplitude,
                }
            } else {
                (jw - j_pole) / (omega - wp)
            }
        };
        let left = gauss_legendre_integrate(&smooth, 0.0, omega, 64);
        let right = gauss_legendre_integrate(&smooth, omega, wmax, 64);
        Ok(left + right + j_pole * (omega / (wmax - omega)).ln())
    }
}

/// A finite star discretisation of one bath: midpoint frequency grid,
/// couplings `h_k = sqrt(J(w_k) dw)` and the thermal covariance diagonal
/// `2 nbar(w_k) + 1`.
#[derive(Debug, Clone)]
pub struct DiscretizedBath {
    pub mode_freqs: Array1<f64>,
    pub couplings: Array1<f64>,
    pub temperature: f64,
    pub cov_diag: Array1<f64>,
}

impl DiscretizedBath {
    pub fn n_modes(&self) -> usize {
        self.mode_freqs.len()
    }
}

/// Discretise `J` into `modes` bath oscillators on the midpoint grid
/// `w_k = (k - 1/2) wmax / M`, which avoids the diverging occupation of a
/// zero-frequency mode.
pub fn discretize(j: &SpectralDensity, modes: usize, temperature: f64) -> Result<DiscretizedBath> {
    if modes == 0 {
        return Err(Error::invalid_argument("discretize: mode count must be >= 1"));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::invalid_argument(format!(
            "discretize: temperature must be >= 0, got {temperature}"
        )));
    }
    j.validate()?;
    let dw = j.cutoff / modes as f64;
    let mut freqs = Array1::zeros(modes);
    let mut couplings = Array1::zeros(modes);
    let mut cov = Array1::zeros(modes);
    for k in 0..modes {
        let w = (k as f64 + 0.5) * dw;
        freqs[k] = w;
        couplings[k] = (j.evaluate(w)? * dw).sqrt();
        cov[k] = 2.0 * thermal_occupation(w, temperature)? + 1.0;
    }
    Ok(DiscretizedBath {
        mode_freqs: freqs,
        couplings,
        temperature,
        cov_diag: cov,
    })
}

/// Fixed-order Gauss-Legendre quadrature of `f` on `[a, b]`.
fn gauss_legendre_integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre_rule(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// three-term recurrence.
fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat() -> SpectralDensity {
        SpectralDensity::new(SpectralModel::Flat, 1.0, 3.0).unwrap()
    }

    fn ohmic() -> SpectralDensity {
        SpectralDensity::new(SpectralModel::Ohmic, 1.0, 3.0).unwrap()
    }

    // closed-form antiderivatives, used only as oracles
    fn s_flat(eta: f64, wmax: f64, w: f64) -> f64 {
        eta * (w / (wmax - w)).ln()
    }

    fn s_ohmic(eta: f64, wmax: f64, w: f64) -> f64 {
        eta * (-wmax + w * (w / (wmax - w)).ln())
    }

    #[test]
    fn evaluate_models_and_cutoff() {
        assert_eq!(flat().evaluate(1.0).unwrap(), 1.0);
        assert_eq!(ohmic().evaluate(2.0).unwrap(), 2.0);
        assert_eq!(flat().evaluate(5.0).unwrap(), 0.0);
        assert_eq!(ohmic().evaluate(5.0).unwrap(), 0.0);
        assert!(flat().evaluate(0.0).is_err());
        assert!(flat().evaluate(-1.0).is_err());
    }

    #[test]
    fn lamb_shift_matches_closed_forms() {
        assert_abs_diff_eq!(
            flat().lamb_shift(1.0).unwrap(),
            -std::f64::consts::LN_2,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            ohmic().lamb_shift(1.0).unwrap(),
            -3.0 - std::f64::consts::LN_2,
            epsilon = 1e-10
        );
        // symmetric pole cancels for the flat model
        assert_abs_diff_eq!(flat().lamb_shift(1.5).unwrap(), 0.0, epsilon = 1e-12);

        // 20 interior frequencies for both models
        for k in 1..=20 {
            let w = 3.0 * k as f64 / 21.0;
            assert_abs_diff_eq!(
                flat().lamb_shift(w).unwrap(),
                s_flat(1.0, 3.0, w),
                epsilon = 1e-8
            );
            assert_abs_diff_eq!(
                ohmic().lamb_shift(w).unwrap(),
                s_ohmic(1.0, 3.0, w),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn lamb_shift_rejects_boundary_poles() {
        assert!(flat().lamb_shift(0.0).is_err());
        assert!(flat().lamb_shift(3.0).is_err());
        assert!(flat().lamb_shift(3.0 - 1e-10).is_err());
        assert!(flat().lamb_shift(4.0).is_err());
    }

    #[test]
    fn discretize_midpoint_grid_and_couplings() {
        let b = discretize(&flat(), 3, 0.0).unwrap();
        assert_abs_diff_eq!(b.mode_freqs[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.mode_freqs[1], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.mode_freqs[2], 2.5, epsilon = 1e-15);
        for k in 0..3 {
            assert_abs_diff_eq!(b.couplings[k], 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(b.cov_diag[k], 1.0, epsilon = 1e-15);
        }

        let b = discretize(&ohmic(), 3, 0.0).unwrap();
        for (k, w) in [(0usize, 0.5f64), (1, 1.5), (2, 2.5)] {
            assert_abs_diff_eq!(b.couplings[k], w.sqrt(), epsilon = 1e-15);
        }

        assert!(discretize(&flat(), 0, 1.0).is_err());
    }

    #[test]
    fn coupling_sum_converges_to_spectral_integral() {
        // sum_k h_k^2 -> int_0^wmax J dw, relative error < 1/M
        for j in [flat(), ohmic()] {
            let exact = match j.model {
                SpectralModel::Flat => j.amplitude * j.cutoff,
                SpectralModel::Ohmic => 0.5 * j.amplitude * j.cutoff * j.cutoff,
            };
            for m in [4usize, 16, 64, 256] {
                let b = discretize(&j, m, 0.0).unwrap();
                let sum: f64 = b.couplings.iter().map(|h| h * h).sum();
                let rel = (sum - exact).abs() / exact;
                assert!(
                    rel < 1.0 / m as f64,
                    "model {:?}, M = {m}: rel err {rel:.3e}",
                    j.model
                );
            }
        }
    }
}
