//! Run configuration: TOML files and compiled-in presets.

use std::path::Path;

use nalgebra::DMatrix;
use permagg::{
    build_model, AggregateConfig, DisplacedOscillatorSpec, FrequencyGrid, Method, MonomerModel,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Preset names accepted by `--preset`.
pub const PRESETS: [&str; 3] = ["dimer-pdi", "lambda", "fig3-sweep"];

/// Monomer description. Either the displaced-oscillator keys
/// (`omega_v`, `huang_rhys`, `omega_00`, `m_g`, `m_e`) or the explicit keys
/// (`ground_energies`, `excited_energies`, `fc`) must be given, not both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MonomerSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub huang_rhys: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_00: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_g: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_e: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_energies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excited_energies: Option<Vec<f64>>,
    /// Rows are ground levels, columns excited levels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fc: Option<Vec<Vec<f64>>>,
    #[serde(default = "unit")]
    pub dipole_mag: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateSection {
    /// Number of ground-state molecules; the aggregate has `n + 1` monomers.
    pub n: usize,
    pub coupling: f64,
    pub gamma: f64,
    pub gamma_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub methods: Vec<String>,
    /// Standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Log10,
    Linear,
}

/// Coupling axis in units of `N J / omega_v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub method: String,
    /// Defaults to `monomer.omega_v`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_v: Option<f64>,
    #[serde(default)]
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub monomer: MonomerSection,
    pub aggregate: AggregateSection,
    pub grid: GridSection,
    pub output: OutputSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn lambda_monomer() -> MonomerSection {
    MonomerSection {
        ground_energies: Some(vec![0.0, 0.16]),
        excited_energies: Some(vec![2.3]),
        fc: Some(vec![vec![1.0], vec![1.0]]),
        dipole_mag: 1.0,
        ..Default::default()
    }
}

/// Expand a compiled-in preset.
pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let spectrum_output = || OutputSection {
        methods: vec!["exact".into(), "cpa".into()],
        path: None,
    };
    match name {
        "dimer-pdi" => Ok(RunConfig {
            preset: Some(name.into()),
            monomer: lambda_monomer(),
            aggregate: AggregateSection {
                n: 1,
                coupling: -0.06,
                gamma: 0.01,
                gamma_v: 1e-5,
            },
            grid: GridSection {
                start: 1.8,
                stop: 2.9,
                count: 4001,
            },
            output: spectrum_output(),
            sweep: None,
        }),
        "lambda" => Ok(RunConfig {
            preset: Some(name.into()),
            monomer: lambda_monomer(),
            aggregate: AggregateSection {
                n: 10,
                coupling: -0.006,
                gamma: 0.01,
                gamma_v: 1e-5,
            },
            grid: GridSection {
                start: 1.8,
                stop: 2.9,
                count: 4001,
            },
            output: spectrum_output(),
            sweep: None,
        }),
        "fig3-sweep" => Ok(RunConfig {
            preset: Some(name.into()),
            monomer: MonomerSection {
                omega_v: Some(0.16),
                huang_rhys: Some(0.5),
                omega_00: Some(2.3),
                m_g: Some(1),
                m_e: Some(4),
                dipole_mag: 1.0,
                ..Default::default()
            },
            aggregate: AggregateSection {
                n: 100,
                coupling: 0.0,
                gamma: 0.02,
                gamma_v: 1e-5,
            },
            grid: GridSection {
                start: 1.5,
                stop: 3.5,
                count: 2001,
            },
            output: OutputSection {
                methods: vec!["order:0".into()],
                path: None,
            },
            sweep: Some(SweepSection {
                start: -3.0,
                stop: 3.0,
                count: 121,
                method: "order:0".into(),
                omega_v: None,
                scale: Scale::Log10,
            }),
        }),
        _ => Err(CliError::Config(format!(
            "unknown preset `{name}` (known: {})",
            PRESETS.join(", ")
        ))),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// Validate everything that can be checked without computing.
    pub fn check(&self) -> Result<(), CliError> {
        self.model()?;
        self.aggregate()?;
        self.grid()?;
        self.methods()?;
        if let Some(s) = &self.sweep {
            s.method
                .parse::<Method>()
                .map_err(|e| CliError::Config(format!("sweep.method: {e}")))?;
            self.sweep_omega_v()?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<MonomerModel, CliError> {
        let m = &self.monomer;
        let explicit = [
            m.ground_energies.is_some(),
            m.excited_energies.is_some(),
            m.fc.is_some(),
        ];
        let displaced = [
            m.omega_v.is_some(),
            m.huang_rhys.is_some(),
            m.omega_00.is_some(),
            m.m_g.is_some(),
            m.m_e.is_some(),
        ];
        let model = if explicit.iter().any(|&x| x) {
            if displaced.iter().any(|&x| x) {
                return Err(CliError::Config(
                    "monomer: give either omega_v/huang_rhys/omega_00/m_g/m_e or \
                     ground_energies/excited_energies/fc, not both"
                        .into(),
                ));
            }
            let ground = required(&m.ground_energies, "monomer.ground_energies")?;
            let excited = required(&m.excited_energies, "monomer.excited_energies")?;
            let rows = required(&m.fc, "monomer.fc")?;
            let ncols = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != ncols) {
                return Err(CliError::Config("monomer.fc: rows differ in length".into()));
            }
            let fc = DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]);
            MonomerModel::new(ground.clone(), excited.clone(), fc, m.dipole_mag)
        } else {
            let spec = DisplacedOscillatorSpec {
                vib_freq: *required(&m.omega_v, "monomer.omega_v")?,
                huang_rhys: *required(&m.huang_rhys, "monomer.huang_rhys")?,
                zero_zero_energy: *required(&m.omega_00, "monomer.omega_00")?,
                m_g: *required(&m.m_g, "monomer.m_g")?,
                m_e: *required(&m.m_e, "monomer.m_e")?,
            };
            build_model(&spec, m.dipole_mag)
        };
        model.map_err(|e| CliError::Config(format!("monomer: {e}")))
    }

    pub fn aggregate(&self) -> Result<AggregateConfig, CliError> {
        let a = &self.aggregate;
        AggregateConfig::new(a.n, a.coupling, a.gamma, a.gamma_v)
            .map_err(|e| CliError::Config(format!("aggregate: {e}")))
    }

    pub fn grid(&self) -> Result<FrequencyGrid, CliError> {
        let g = &self.grid;
        FrequencyGrid::new(g.start, g.stop, g.count)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    /// Requested methods, deduplicated, in output column order.
    pub fn methods(&self) -> Result<Vec<Method>, CliError> {
        if self.output.methods.is_empty() {
            return Err(CliError::Config("output.methods: at least one method is required".into()));
        }
        let mut out = self
            .output
            .methods
            .iter()
            .map(|s| s.parse::<Method>().map_err(|e| CliError::Config(format!("output.methods: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn sweep_omega_v(&self) -> Result<f64, CliError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
        let w = s.omega_v.or(self.monomer.omega_v).ok_or_else(|| {
            CliError::Config("sweep.omega_v is required when monomer.omega_v is absent".into())
        })?;
        if !(w.is_finite() && w > 0.0) {
            return Err(CliError::Config(format!("sweep.omega_v must be positive, got {w}")));
        }
        Ok(w)
    }

    /// Replace the method list with a comma-separated `--methods` value.
    pub fn set_methods(&mut self, list: &str) {
        self.output.methods = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
    }

    pub fn set_grid(&mut self, spec: &str) -> Result<(), CliError> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let bad = || CliError::Config(format!("--grid expects start,stop,count, got `{spec}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        self.grid = GridSection {
            start: parts[0].parse().map_err(|_| bad())?,
            stop: parts[1].parse().map_err(|_| bad())?,
            count: parts[2].parse().map_err(|_| bad())?,
        };
        Ok(())
    }
}

fn required<'a, T>(v: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
}
