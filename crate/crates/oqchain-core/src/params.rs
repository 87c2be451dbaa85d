use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::bath::SpectralDensity;
use crate::error::{Error, Result};

/// Physical parameters of the three-oscillator chain.
///
/// All three oscillators share the on-site frequency `omega0`; nearest
/// neighbours couple with strength `g` and the end sites couple to their baths
/// with the dimensionless scale `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub omega0: f64,
    pub g: f64,
    pub lambda: f64,
}

impl ChainParams {
    pub fn new(omega0: f64, g: f64, lambda: f64) -> Result<Self> {
        let p = ChainParams { omega0, g, lambda };
        p.validate()?;
        Ok(p)
    }

    /// `omega0 > 0`, `lambda > 0` and `0 <= g < omega0/sqrt(2)`; the upper
    /// bound keeps all normal-mode energies positive.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::invalid_argument(format!(
                "omega0 must be positive, got {}",
                self.omega0
            )));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid_argument(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        let g_max = self.omega0 / std::f64::consts::SQRT_2;
        if !(self.g >= 0.0) || self.g >= g_max {
            return Err(Error::invalid_argument(format!(
                "g must lie in [0, omega0/sqrt(2)) = [0, {g_max}), got {}",
                self.g
            )));
        }
        Ok(())
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        ChainParams::new(self.omega0, g, self.lambda)
    }

    /// Single-particle chain Hamiltonian: `omega0` on the diagonal, `g` on
    /// the nearest-neighbour off-diagonals.
    pub fn single_particle_hamiltonian(&self) -> Array2<f64> {
        let mut h = Array2::zeros((3, 3));
        for i in 0..3 {
            h[[i, i]] = self.omega0;
        }
        h[[0, 1]] = self.g;
        h[[1, 0]] = self.g;
        h[[1, 2]] = self.g;
        h[[2, 1]] = self.g;
        h
    }
}

/// One thermal bath: its spectral density and its temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub spectral: SpectralDensity,
    pub temperature: f64,
}

impl BathParams {
    pub fn new(spectral: SpectralDensity, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::invalid_argument(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        spectral.validate()?;
        Ok(BathParams {
            spectral,
            temperature,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{SpectralDensity, SpectralModel};

    #[test]
    fn chain_params_bounds() {
        assert!(ChainParams::new(1.0, 0.3, 0.1).is_ok());
        assert!(ChainParams::new(1.0, 0.0, 0.1).is_ok());
        // g at the bound is rejected, just below is accepted
        assert!(ChainParams::new(1.0, 1.0 / 2.0_f64.sqrt(), 0.1).is_err());
        assert!(ChainParams::new(1.0, 1.0 / 2.0_f64.sqrt() - 1e-9, 0.1).is_ok());
        assert!(ChainParams::new(0.0, 0.1, 0.1).is_err());
        assert!(ChainParams::new(1.0, -0.1, 0.1).is_err());
        assert!(ChainParams::new(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn bath_params_temperature() {
        let j = SpectralDensity::new(SpectralModel::Ohmic, 1.0, 3.0).unwrap();
        assert!(BathParams::new(j.clone(), 0.0).is_ok());
        assert!(BathParams::new(j, -1.0).is_err());
    }
}
