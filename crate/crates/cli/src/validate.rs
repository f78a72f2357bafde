//! Built-in cross-implementation checks behind the `validate` subcommand.

use std::fmt::Write;

use rayon::prelude::*;

use permagg::oracle::{oracle_spectrum, symmetric_counterpart, SiteBasis};
use permagg::{
    build_chain, build_model, compare, cpa_spectrum, dense_resolvent_k0, resolvent_k0, spectrum,
    AggregateConfig, DisplacedOscillatorSpec, FrequencyGrid, MonomerModel, Result,
};

/// Default tolerances: oracle agreement, continued fraction against dense
/// inversion, classical-optics identity.
pub const ORACLE_TOL: f64 = 1e-8;
pub const CHAIN_TOL: f64 = 1e-10;
pub const CPA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub name: String,
    pub dim: usize,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tolerance: f64,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.max_abs <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub cases: Vec<CaseResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(CaseResult::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<36} {:>7} {:>10} {:>10} {:>8}  status",
            "case", "dim", "max_abs", "max_rel", "tol"
        );
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{:<36} {:>7} {:>10.3e} {:>10.3e} {:>8.1e}  {}",
                c.name,
                c.dim,
                c.max_abs,
                c.max_rel,
                c.tolerance,
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        let passed = self.cases.iter().filter(|c| c.passed()).count();
        let _ = writeln!(
            out,
            "result: {} ({passed}/{} cases)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases.len()
        );
        out
    }
}

fn displaced(m_g: usize, m_e: usize) -> Result<MonomerModel> {
    build_model(
        &DisplacedOscillatorSpec {
            vib_freq: 0.16,
            huang_rhys: 0.5,
            zero_zero_energy: 2.3,
            m_g,
            m_e,
        },
        1.0,
    )
}

fn oracle_case(
    name: String,
    model: &MonomerModel,
    cfg: &AggregateConfig,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<CaseResult> {
    let dev = compare(
        &oracle_spectrum(model, cfg, grid)?,
        &symmetric_counterpart(model, cfg, grid)?,
    )?;
    Ok(CaseResult {
        name,
        dim: SiteBasis::new(model, cfg).checked_dim().unwrap_or(usize::MAX),
        max_abs: dev.max_abs,
        max_rel: dev.max_rel,
        tolerance: tol,
    })
}

fn chain_case(
    name: String,
    model: &MonomerModel,
    cfg: &AggregateConfig,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<CaseResult> {
    let chain = build_chain(model, cfg, cfg.n_ground)?;
    let pairs = grid
        .points()
        .into_par_iter()
        .map(|w| {
            let cf = resolvent_k0(w, &chain, cfg)?;
            let dense = dense_resolvent_k0(w, &chain, cfg)?;
            let scale = dense.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let abs = (cf - dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok((abs, scale))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let scale = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(CaseResult {
        name,
        dim: chain.total_dim(),
        max_abs,
        max_rel: if scale > 0.0 { max_abs / scale } else { 0.0 },
        tolerance: tol,
    })
}

fn cpa_case(
    name: String,
    model: &MonomerModel,
    cfg: &AggregateConfig,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<CaseResult> {
    let dev = compare(&cpa_spectrum(model, cfg, grid)?, &spectrum(model, cfg, grid, 0)?)?;
    Ok(CaseResult {
        name,
        dim: model.m_e() + 1,
        max_abs: dev.max_abs,
        max_rel: dev.max_rel,
        tolerance: tol,
    })
}

/// Run the fixed suite. `tolerance` replaces every default tolerance.
pub fn run_validate(tolerance: Option<f64>) -> Result<Report> {
    let tol = |default: f64| tolerance.unwrap_or(default);
    let wide = FrequencyGrid::new(1.8, 3.2, 1001)?;
    let dimer_grid = FrequencyGrid::new(1.8, 2.9, 1001)?;
    let lambda = MonomerModel::lambda_system(0.16, 2.3)?;
    let mut cases = Vec::new();

    let cfg = AggregateConfig::new(1, -0.06, 0.01, 1e-5)?;
    cases.push(oracle_case(
        "oracle lambda dimer".into(),
        &lambda,
        &cfg,
        &dimer_grid,
        tol(ORACLE_TOL),
    )?);
    for (n, m_g, m_e) in [(1, 1, 1), (2, 1, 1), (2, 2, 1)] {
        let model = displaced(m_g, m_e)?;
        let cfg = AggregateConfig::new(n, 0.05, 0.01, 0.0)?;
        cases.push(oracle_case(
            format!("oracle S=0.5 N+1={} Mg+1={} Me+1={}", n + 1, m_g + 1, m_e + 1),
            &model,
            &cfg,
            &wide,
            tol(ORACLE_TOL),
        )?);
    }

    for n in [1, 5, 20, 50] {
        let cfg = AggregateConfig::new(n, -0.06, 0.01, 1e-5)?;
        cases.push(chain_case(
            format!("chain vs dense lambda N={n}"),
            &lambda,
            &cfg,
            &dimer_grid,
            tol(CHAIN_TOL),
        )?);
    }
    let model = displaced(2, 2)?;
    let cfg = AggregateConfig::new(4, 0.04, 0.01, 1e-3)?;
    cases.push(chain_case(
        "chain vs dense S=0.5 N=4 Mg=2 Me=2".into(),
        &model,
        &cfg,
        &wide,
        tol(CHAIN_TOL),
    )?);

    let model = displaced(1, 4)?;
    for nj in [-0.32, 0.32] {
        let cfg = AggregateConfig::new(20, nj / 20.0, 0.02, 1e-5)?;
        cases.push(cpa_case(
            format!("cpa identity S=0.5 N=20 NJ={nj}"),
            &model,
            &cfg,
            &FrequencyGrid::new(1.5, 3.5, 1001)?,
            tol(CPA_TOL),
        )?);
    }
    Ok(Report { cases })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_layout() {
        let r = Report {
            cases: vec![CaseResult {
                name: "x".into(),
                dim: 4,
                max_abs: 1e-12,
                max_rel: 1e-14,
                tolerance: 1e-10,
            }],
        };
        let text = r.render();
        assert!(text.lines().nth(1).unwrap().ends_with("PASS"));
        assert!(text.ends_with("result: PASS (1/1 cases)\n"));
    }

    #[test]
    fn tight_tolerance_fails() {
        let r = CaseResult {
            name: "x".into(),
            dim: 1,
            max_abs: 1e-12,
            max_rel: 0.0,
            tolerance: 1e-13,
        };
        assert!(!r.passed());
    }
}
