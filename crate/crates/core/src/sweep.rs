//! Spectra along a collective-coupling axis `N J / omega_v`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::AggregateConfig;
use crate::response::compute;
use crate::spectrum::{fmt_sig, FrequencyGrid, Method};
use crate::vibronic::MonomerModel;

/// Intensities with one row per coupling value and one column per frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSurface {
    /// Values of `N J / omega_v`.
    pub coupling_axis: Vec<f64>,
    pub grid: FrequencyGrid,
    pub intensity: DMatrix<f64>,
}

impl SweepSurface {
    /// Row `i` of the surface.
    pub fn spectrum(&self, i: usize) -> Vec<f64> {
        self.intensity.row(i).iter().copied().collect()
    }

    /// `log10` of the intensity, floored at the smallest positive double.
    pub fn log_intensity(&self) -> DMatrix<f64> {
        self.intensity.map(|x| x.max(f64::MIN_POSITIVE).log10())
    }

    /// Long format: `coupling_over_omegav,omega_eV,log10_intensity`.
    pub fn to_long_csv(&self) -> String {
        self.long_table("log10_intensity", &self.log_intensity())
    }

    /// Long format with raw intensities: `coupling_over_omegav,omega_eV,intensity`.
    pub fn to_linear_csv(&self) -> String {
        self.long_table("intensity", &self.intensity)
    }

    fn long_table(&self, name: &str, values: &DMatrix<f64>) -> String {
        let mut out = format!("coupling_over_omegav,omega_eV,{name}\n");
        for (i, x) in self.coupling_axis.iter().enumerate() {
            let xs = fmt_sig(*x);
            for j in 0..self.grid.count() {
                out.push_str(&xs);
                out.push(',');
                out.push_str(&fmt_sig(self.grid.point(j)));
                out.push(',');
                out.push_str(&fmt_sig(values[(i, j)]));
                out.push('\n');
            }
        }
        out
    }
}

/// Evenly spaced axis including both ends.
pub fn coupling_axis(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok(FrequencyGrid::new(start, stop, count)
        .map_err(|e| Error::InvalidConfig(format!("sweep axis: {e}")))?
        .points())
}

/// For each `x` in `axis`, sets `J = x omega_v / N` on `config` and computes
/// the `method` spectrum.
pub fn sweep(
    model: &MonomerModel,
    config: &AggregateConfig,
    omega_v: f64,
    axis: &[f64],
    grid: &FrequencyGrid,
    method: Method,
) -> Result<SweepSurface> {
    if axis.is_empty() || axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig(
            "coupling axis must be non-empty and finite".into(),
        ));
    }
    let mut intensity = DMatrix::zeros(axis.len(), grid.count());
    for (i, &x) in axis.iter().enumerate() {
        let cfg = AggregateConfig {
            coupling: x * omega_v / config.n_ground as f64,
            ..*config
        };
        let row = compute(method, model, &cfg, grid)?;
        for (j, v) in row.into_iter().enumerate() {
            intensity[(i, j)] = v;
        }
    }
    Ok(SweepSurface {
        coupling_axis: axis.to_vec(),
        grid: *grid,
        intensity,
    })
}
