//! Monomer vibronic structure.
//!
//! A monomer is described by the vibronic ladders of its ground and excited
//! electronic states and by the Franck-Condon overlap matrix between them,
//! `fc[(n, m)] = <phi_n^(g) | phi_m^(e)>`. Everything downstream consumes the
//! monomer only through these numbers, so arbitrary potentials are supported
//! as long as the caller supplies the overlaps; the displaced harmonic
//! oscillator is provided as the common special case.
//!
//! Sign convention: the excited surface is displaced by `+sqrt(S)`, which fixes
//! `fc[(0, m)] = exp(-S/2) sqrt(S)^m / sqrt(m!)`. Spectra depend on products
//! `fc[(n, m~)] * fc[(n~, m)]`, so the whole matrix must come from a single
//! convention. Never flip the sign of individual columns.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on the row norms of the overlap matrix.
const FC_NORM_SLACK: f64 = 1e-12;

/// Equal-frequency displaced harmonic oscillator pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacedOscillatorSpec {
    /// Vibrational quantum (eV), shared by both surfaces.
    pub vib_freq: f64,
    /// Huang-Rhys factor (dimensionless squared displacement).
    pub huang_rhys: f64,
    /// 0-0 electronic transition energy (eV).
    pub zero_zero_energy: f64,
    /// Highest retained ground-state vibrational level.
    pub m_g: usize,
    /// Highest retained excited-state vibrational level.
    pub m_e: usize,
}

impl DisplacedOscillatorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.vib_freq.is_finite() && self.vib_freq > 0.0) {
            return Err(Error::InvalidModel(format!(
                "omega_v must be positive, got {}",
                self.vib_freq
            )));
        }
        if !(self.huang_rhys.is_finite() && self.huang_rhys >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "huang_rhys must be non-negative, got {}",
                self.huang_rhys
            )));
        }
        if !self.zero_zero_energy.is_finite() {
            return Err(Error::InvalidModel("omega_00 must be finite".into()));
        }
        Ok(())
    }
}

/// Overlaps between the vibrational eigenstates of two equal-frequency
/// harmonic surfaces displaced by `sqrt(S)` in dimensionless units.
///
/// Row 0 is built by the ratio `fc[0][m] = fc[0][m-1] sqrt(S/m)`, then each
/// further row from the previous one via
/// `sqrt(n+1) fc[n+1][m] = sqrt(m) fc[n][m-1] - sqrt(S) fc[n][m]`.
/// No factorials appear, so high levels do not overflow.
pub fn franck_condon_matrix(spec: &DisplacedOscillatorSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let rows = spec.m_g + 1;
    let cols = spec.m_e + 1;
    let d = spec.huang_rhys.sqrt();
    let mut fc = DMatrix::zeros(rows, cols);

    fc[(0, 0)] = (-0.5 * spec.huang_rhys).exp();
    for m in 1..cols {
        fc[(0, m)] = fc[(0, m - 1)] * d / (m as f64).sqrt();
    }
    for n in 0..rows - 1 {
        let norm = ((n + 1) as f64).sqrt();
        for m in 0..cols {
            let down = if m > 0 {
                (m as f64).sqrt() * fc[(n, m - 1)]
            } else {
                0.0
            };
            fc[(n + 1, m)] = (down - d * fc[(n, m)]) / norm;
        }
    }
    Ok(fc)
}

/// Vibronic description of a single monomer.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomerModel {
    ground_energies: Vec<f64>,
    excited_energies: Vec<f64>,
    fc: DMatrix<f64>,
    dipole_mag: f64,
}

impl MonomerModel {
    pub fn new(
        ground_energies: Vec<f64>,
        excited_energies: Vec<f64>,
        fc: DMatrix<f64>,
        dipole_mag: f64,
    ) -> Result<Self> {
        let model = Self {
            ground_energies,
            excited_energies,
            fc,
            dipole_mag,
        };
        model.validate()?;
        Ok(model)
    }

    /// Minimal model with two ground levels, one excited level and unit
    /// Franck-Condon overlaps.
    pub fn lambda_system(omega_g1: f64, omega_e0: f64) -> Result<Self> {
        Self::new(
            vec![0.0, omega_g1],
            vec![omega_e0],
            DMatrix::from_element(2, 1, 1.0),
            1.0,
        )
    }

    fn validate(&self) -> Result<()> {
        let g = &self.ground_energies;
        if g.is_empty() || self.excited_energies.is_empty() {
            return Err(Error::InvalidModel(
                "need at least one ground and one excited level".into(),
            ));
        }
        if g[0] != 0.0 {
            return Err(Error::InvalidModel(format!(
                "ground_energies[0] must be 0, got {}",
                g[0]
            )));
        }
        if g.iter().chain(&self.excited_energies).any(|e| !e.is_finite()) {
            return Err(Error::InvalidModel("energies must be finite".into()));
        }
        if g.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidModel(
                "ground_energies must be nondecreasing".into(),
            ));
        }
        if self.fc.shape() != (g.len(), self.excited_energies.len()) {
            return Err(Error::InvalidModel(format!(
                "fc has shape {:?}, expected ({}, {})",
                self.fc.shape(),
                g.len(),
                self.excited_energies.len()
            )));
        }
        if self.fc.iter().any(|x| !x.is_finite() || x.abs() > 1.0 + FC_NORM_SLACK) {
            return Err(Error::InvalidModel(
                "every Franck-Condon overlap must satisfy |fc| <= 1".into(),
            ));
        }
        for (n, row) in self.fc.row_iter().enumerate() {
            let norm = row.norm_squared();
            if norm > 1.0 + FC_NORM_SLACK {
                return Err(Error::InvalidModel(format!(
                    "fc row {n} has squared norm {norm} > 1"
                )));
            }
        }
        if !(self.dipole_mag.is_finite() && self.dipole_mag > 0.0) {
            return Err(Error::InvalidModel(format!(
                "dipole_mag must be positive, got {}",
                self.dipole_mag
            )));
        }
        Ok(())
    }

    /// Replace the overlap matrix, keeping the energies.
    pub fn with_fc(self, fc: DMatrix<f64>) -> Result<Self> {
        Self::new(self.ground_energies, self.excited_energies, fc, self.dipole_mag)
    }

    pub fn ground_energies(&self) -> &[f64] {
        &self.ground_energies
    }

    pub fn excited_energies(&self) -> &[f64] {
        &self.excited_energies
    }

    pub fn fc(&self) -> &DMatrix<f64> {
        &self.fc
    }

    pub fn dipole_mag(&self) -> f64 {
        self.dipole_mag
    }

    /// Highest ground vibrational level index (M_g).
    pub fn m_g(&self) -> usize {
        self.ground_energies.len() - 1
    }

    /// Highest excited vibrational level index (M_e).
    pub fn m_e(&self) -> usize {
        self.excited_energies.len() - 1
    }

    /// Overlaps of the vibrational ground state with every excited level,
    /// i.e. row 0 of the Franck-Condon matrix.
    pub fn bright_overlaps(&self) -> Vec<f64> {
        self.fc.row(0).iter().copied().collect()
    }

    /// `sum_m fc[0][m]^2`, the fraction of oscillator strength retained by
    /// the truncated excited ladder.
    pub fn bright_weight(&self) -> f64 {
        self.fc.row(0).norm_squared()
    }
}

/// Ladder energies `n * omega_v` and `omega_00 + m * omega_v` together with the
/// displaced-oscillator overlaps.
pub fn build_model(spec: &DisplacedOscillatorSpec, dipole_mag: f64) -> Result<MonomerModel> {
    let fc = franck_condon_matrix(spec)?;
    let ground = (0..=spec.m_g).map(|n| n as f64 * spec.vib_freq).collect();
    let excited = (0..=spec.m_e)
        .map(|m| spec.zero_zero_energy + m as f64 * spec.vib_freq)
        .collect();
    MonomerModel::new(ground, excited, fc, dipole_mag)
}

/// Scalar monomer Green's function
/// `g(omega) = sum_m fc[0][m]^2 / (omega - omega_{e,m} + i gamma/2)`.
pub fn monomer_green(model: &MonomerModel, omega: f64, gamma: f64) -> Result<Complex64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let half = 0.5 * gamma;
    Ok(model
        .fc
        .row(0)
        .iter()
        .zip(&model.excited_energies)
        .map(|(c, e)| Complex64::new(c * c, 0.0) / Complex64::new(omega - e, half))
        .sum())
}
