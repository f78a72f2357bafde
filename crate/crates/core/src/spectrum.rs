//! Frequency grids, spectrum tables and the small amount of post-processing
//! the tests and CLI need (peak picking, quadrature, sum rule).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hamiltonian::AggregateConfig;
use crate::vibronic::MonomerModel;

/// Relative peak threshold used by [`find_peaks`] callers by default.
pub const PEAK_THRESHOLD: f64 = 1e-4;

/// Uniform grid on `[start, stop]` with `count` points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    stop: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if start >= stop {
            return Err(Error::InvalidGrid(format!(
                "start ({start}) must be below stop ({stop})"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!(
                "count must be at least 2, got {count}"
            )));
        }
        Ok(Self { start, stop, count })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

/// How a spectrum column is computed.
///
/// The derived ordering (exact, truncation orders ascending, CPA) is the
/// column order of every output table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Every populated sector.
    Exact,
    /// Sectors `0..=k` only.
    Order(usize),
    /// Classical-optics closed form from the monomer Green's function.
    Cpa,
}

impl Method {
    pub fn column_name(&self) -> String {
        match self {
            Method::Exact => "sigma_exact".into(),
            Method::Order(k) => format!("sigma_k{k}"),
            Method::Cpa => "sigma_cpa".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Exact => f.write_str("exact"),
            Method::Order(k) => write!(f, "order:{k}"),
            Method::Cpa => f.write_str("cpa"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "exact" => Ok(Method::Exact),
            "cpa" => Ok(Method::Cpa),
            _ => s
                .strip_prefix("order:")
                .and_then(|k| k.trim().parse().ok())
                .map(Method::Order)
                .ok_or_else(|| format!("unknown method `{s}` (expected exact, cpa or order:<k>)")),
        }
    }
}

/// Intensity columns on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub columns: Vec<(Method, Vec<f64>)>,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            columns: Vec::new(),
        }
    }

    /// Insert a column, keeping canonical column order.
    pub fn push(&mut self, method: Method, values: Vec<f64>) -> Result<()> {
        if values.len() != self.grid.count() {
            return Err(Error::DimensionMismatch(format!(
                "column has {} values for a {}-point grid",
                values.len(),
                self.grid.count()
            )));
        }
        let pos = self.columns.partition_point(|(m, _)| *m < method);
        if self.columns.get(pos).is_some_and(|(m, _)| *m == method) {
            self.columns[pos].1 = values;
        } else {
            self.columns.insert(pos, (method, values));
        }
        Ok(())
    }

    pub fn column(&self, method: Method) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, v)| v.as_slice())
    }

    /// Comma-separated table with a header row, 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega_eV");
        for (m, _) in &self.columns {
            out.push(',');
            out.push_str(&m.column_name());
        }
        out.push('\n');
        for i in 0..self.grid.count() {
            out.push_str(&fmt_sig(self.grid.point(i)));
            for (_, v) in &self.columns {
                out.push(',');
                out.push_str(&fmt_sig(v[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Scientific notation with 15 significant digits.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.14e}")
}

/// Interior local maxima above `rel_threshold * max`, refined by a parabola
/// through the three samples around each maximum.
pub fn find_peaks(grid: &FrequencyGrid, values: &[f64], rel_threshold: f64) -> Vec<f64> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = rel_threshold * top;
    let h = grid.step();
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        if c > l && c >= r && c >= floor {
            let curvature = l - 2.0 * c + r;
            let shift = if curvature < 0.0 {
                0.5 * (l - r) / curvature
            } else {
                0.0
            };
            peaks.push(grid.point(i) + h * shift);
        }
    }
    peaks
}

/// Trapezoidal integral over the grid.
pub fn integrate(grid: &FrequencyGrid, values: &[f64]) -> f64 {
    let h = grid.step();
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Integrated intensity against the oscillator strength of `mu|ground>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRule {
    pub integral: f64,
    /// `pi (N+1) |mu_M|^2 sum_m fc[0][m]^2`.
    pub expected: f64,
    /// `|integral - expected| / expected`.
    pub deficit: f64,
    /// Share of the integral in the outer 5% of the window on either side.
    pub edge_fraction: f64,
}

impl SumRule {
    /// True when the window edges hold more than 1% of the weight, meaning the
    /// window probably clips spectral weight.
    pub fn edge_warning(&self) -> bool {
        self.edge_fraction > 0.01
    }
}

pub fn sum_rule(
    grid: &FrequencyGrid,
    values: &[f64],
    model: &MonomerModel,
    config: &AggregateConfig,
) -> Result<SumRule> {
    if values.len() != grid.count() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {}-point grid",
            values.len(),
            grid.count()
        )));
    }
    let integral = integrate(grid, values);
    let expected =
        PI * config.monomers() as f64 * model.dipole_mag().powi(2) * model.bright_weight();
    let edge = (grid.count() / 20).max(1);
    let h = grid.step();
    let edge_weight: f64 = values[..edge].iter().chain(&values[values.len() - edge..]).sum::<f64>() * h;
    Ok(SumRule {
        integral,
        expected,
        deficit: (integral - expected).abs() / expected,
        edge_fraction: if integral > 0.0 { edge_weight / integral } else { 0.0 },
    })
}
