//! Second-quantized aggregate Hamiltonian on the symmetric basis.
//!
//! The interaction `J sum fc[n][m~] fc[n~][m] b_n^+ B_m^+ B_m~ b_n~` moves one
//! ground-state molecule from level `n~` to `n` while the exciton hops from
//! vibronic level `m~` to `m`. Such a move changes the sector label by at most
//! one, so the projected Hamiltonian is block tridiagonal: diagonal blocks
//! `H_{e,k}` and couplings `v_k` between sectors `k` and `k + 1`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::basis::{enumerate_manifold, max_sector, ManifoldBasis, OccState};
use crate::error::{Error, Result};
use crate::vibronic::MonomerModel;

/// Default cap on the summed dimension of all sectors in a chain.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// Aggregate of `n_ground + 1` identical, all-to-all coupled monomers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateConfig {
    /// N; the aggregate holds N + 1 monomers.
    pub n_ground: usize,
    /// Pair coupling J (eV), sign-carrying.
    pub coupling: f64,
    /// Electronic linewidth gamma (eV).
    pub gamma: f64,
    /// Extra vibrational linewidth gamma_v (eV).
    pub gamma_v: f64,
}

impl AggregateConfig {
    pub fn new(n_ground: usize, coupling: f64, gamma: f64, gamma_v: f64) -> Result<Self> {
        let cfg = Self {
            n_ground,
            coupling,
            gamma,
            gamma_v,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ground < 1 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidConfig("coupling must be finite".into()));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.gamma_v.is_finite() && self.gamma_v >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma_v must be non-negative, got {}",
                self.gamma_v
            )));
        }
        Ok(())
    }

    /// Number of monomers, N + 1.
    pub fn monomers(&self) -> usize {
        self.n_ground + 1
    }

    /// Collective coupling N J.
    pub fn collective_coupling(&self) -> f64 {
        self.n_ground as f64 * self.coupling
    }

    /// Imaginary shift of sector `k`: gamma/2 for k = 0, (gamma + gamma_v)/2 above.
    pub fn damping(&self, k: usize) -> f64 {
        if k == 0 {
            0.5 * self.gamma
        } else {
            0.5 * (self.gamma + self.gamma_v)
        }
    }
}

fn check_state(state: &OccState, model: &MonomerModel, config: &AggregateConfig) -> Result<()> {
    if state.ground_occ.len() != model.m_g() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "state {state} has {} ground levels, model has {}",
            state.ground_occ.len(),
            model.m_g() + 1
        )));
    }
    if state.excited_level > model.m_e() {
        return Err(Error::DimensionMismatch(format!(
            "state {state} excites level {}, model has M_e = {}",
            state.excited_level,
            model.m_e()
        )));
    }
    if state.n_ground() != config.n_ground {
        return Err(Error::DimensionMismatch(format!(
            "state {state} holds {} ground molecules, config has N = {}",
            state.n_ground(),
            config.n_ground
        )));
    }
    Ok(())
}

/// Bare (J = 0) energy `sum_i n_i omega_{g,i} + omega_{e,m}`.
pub fn bare_energy(state: &OccState, model: &MonomerModel) -> f64 {
    let ground: f64 = state
        .ground_occ
        .iter()
        .zip(model.ground_energies())
        .map(|(&n, &e)| n as f64 * e)
        .sum();
    ground + model.excited_energies()[state.excited_level]
}

/// `<dst| H_int |src>`.
pub fn interaction_element(
    src: &OccState,
    dst: &OccState,
    model: &MonomerModel,
    config: &AggregateConfig,
) -> Result<f64> {
    check_state(src, model, config)?;
    check_state(dst, model, config)?;
    let fc = model.fc();
    let j = config.coupling;
    let m_src = src.excited_level;
    let m_dst = dst.excited_level;

    // levels that lost / gained a molecule
    let mut lost = None;
    let mut gained = None;
    for (level, (&a, &b)) in src.ground_occ.iter().zip(&dst.ground_occ).enumerate() {
        match a as isize - b as isize {
            0 => {}
            1 if lost.is_none() => lost = Some(level),
            -1 if gained.is_none() => gained = Some(level),
            _ => return Ok(0.0),
        }
    }
    Ok(match (lost, gained) {
        (None, None) => src
            .ground_occ
            .iter()
            .enumerate()
            .map(|(n, &occ)| j * fc[(n, m_src)] * fc[(n, m_dst)] * occ as f64)
            .sum(),
        (Some(from), Some(to)) => {
            let a = src.ground_occ[from] as f64;
            let c = src.ground_occ[to] as f64 + 1.0;
            j * fc[(to, m_src)] * fc[(from, m_dst)] * (a * c).sqrt()
        }
        _ => 0.0,
    })
}

/// Every state reached from `src` by one application of the interaction,
/// with its amplitude. The same target may appear more than once.
fn apply_interaction(src: &OccState, model: &MonomerModel, coupling: f64) -> Vec<(OccState, f64)> {
    let fc = model.fc();
    let levels = src.ground_occ.len();
    let mut out = Vec::with_capacity(levels * levels * (model.m_e() + 1));
    for from in 0..levels {
        let occ_from = src.ground_occ[from];
        if occ_from == 0 {
            continue;
        }
        let mut lowered = src.ground_occ.clone();
        lowered[from] -= 1;
        for to in 0..levels {
            let mut occ = lowered.clone();
            let norm = (occ_from as f64 * (occ[to] + 1) as f64).sqrt();
            occ[to] += 1;
            let left = coupling * fc[(to, src.excited_level)] * norm;
            for m in 0..=model.m_e() {
                let amp = left * fc[(from, m)];
                if amp != 0.0 {
                    out.push((OccState::new(occ.clone(), m), amp));
                }
            }
        }
    }
    out
}

fn check_basis(basis: &ManifoldBasis, model: &MonomerModel, config: &AggregateConfig) -> Result<()> {
    let (n, m_g, m_e) = basis.shape();
    if n != config.n_ground || m_g != model.m_g() || m_e != model.m_e() {
        return Err(Error::DimensionMismatch(format!(
            "basis built for (N, M_g, M_e) = ({n}, {m_g}, {m_e}), model/config give ({}, {}, {})",
            config.n_ground,
            model.m_g(),
            model.m_e()
        )));
    }
    Ok(())
}

/// Diagonal block `H_{e,k}` on the given sector basis.
pub fn assemble_diag_block(
    model: &MonomerModel,
    config: &AggregateConfig,
    basis: &ManifoldBasis,
) -> Result<DMatrix<f64>> {
    check_basis(basis, model, config)?;
    let dim = basis.len();
    let mut h = DMatrix::zeros(dim, dim);
    for (b, state) in basis.states().iter().enumerate() {
        h[(b, b)] += bare_energy(state, model);
        for (target, amp) in apply_interaction(state, model, config.coupling) {
            if target.sector() == basis.k() {
                let a = basis.locate(&target)?;
                h[(a, b)] += amp;
            }
        }
    }
    // products are accumulated in different orders above and below the diagonal
    let sym = (&h + h.transpose()) * 0.5;
    Ok(sym)
}

/// Coupling from sector `from.k()` into sector `to.k()`; rows index `to`,
/// columns index `from`. Sectors further apart than one come out as zero.
pub fn assemble_coupling(
    model: &MonomerModel,
    config: &AggregateConfig,
    from: &ManifoldBasis,
    to: &ManifoldBasis,
) -> Result<DMatrix<f64>> {
    check_basis(from, model, config)?;
    check_basis(to, model, config)?;
    let mut v = DMatrix::zeros(to.len(), from.len());
    for (b, state) in from.states().iter().enumerate() {
        for (target, amp) in apply_interaction(state, model, config.coupling) {
            if target.sector() == to.k() {
                let a = to.locate(&target)?;
                v[(a, b)] += amp;
            }
        }
    }
    Ok(v)
}

/// Sector bases, diagonal blocks and nearest-neighbour couplings for sectors
/// `0..=k_max`.
#[derive(Debug, Clone)]
pub struct BlockChain {
    bases: Vec<ManifoldBasis>,
    diag_blocks: Vec<DMatrix<f64>>,
    /// `couplings[k]` maps sector `k` into sector `k + 1`.
    couplings: Vec<DMatrix<f64>>,
}

impl BlockChain {
    pub fn k_max(&self) -> usize {
        self.diag_blocks.len() - 1
    }

    pub fn bases(&self) -> &[ManifoldBasis] {
        &self.bases
    }

    pub fn diag_blocks(&self) -> &[DMatrix<f64>] {
        &self.diag_blocks
    }

    pub fn couplings(&self) -> &[DMatrix<f64>] {
        &self.couplings
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(ManifoldBasis::len).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().sum()
    }

    /// Offset of each sector in the concatenated basis.
    pub fn offsets(&self) -> Vec<usize> {
        self.bases
            .iter()
            .scan(0, |acc, b| {
                let start = *acc;
                *acc += b.len();
                Some(start)
            })
            .collect()
    }

    /// The full truncated Hamiltonian as one dense matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.total_dim();
        let offsets = self.offsets();
        let mut h = DMatrix::zeros(n, n);
        for (k, block) in self.diag_blocks.iter().enumerate() {
            let o = offsets[k];
            h.view_mut((o, o), block.shape()).copy_from(block);
        }
        for (k, v) in self.couplings.iter().enumerate() {
            let (lo, hi) = (offsets[k], offsets[k + 1]);
            h.view_mut((hi, lo), v.shape()).copy_from(v);
            h.view_mut((lo, hi), (v.ncols(), v.nrows()))
                .copy_from(&v.transpose());
        }
        h
    }

    /// Plain-text dump: a header line per block followed by its rows.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut write_block = |title: String, m: &DMatrix<f64>| {
            out.push_str(&format!("# {title} {}x{}\n", m.nrows(), m.ncols()));
            for row in m.row_iter() {
                let line: Vec<String> = row.iter().map(|x| format!("{x:.15e}")).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        };
        for (k, h) in self.diag_blocks.iter().enumerate() {
            write_block(format!("H_e,{k}"), h);
        }
        for (k, v) in self.couplings.iter().enumerate() {
            write_block(format!("v_{k} sector {k}->{}", k + 1), v);
        }
        out
    }
}

pub fn build_chain(
    model: &MonomerModel,
    config: &AggregateConfig,
    k_max: usize,
) -> Result<BlockChain> {
    build_chain_with_cap(model, config, k_max, DEFAULT_DIMENSION_CAP)
}

/// As [`build_chain`], refusing chains whose total dimension exceeds `cap`.
/// `k_max` is clamped to the largest populated sector.
pub fn build_chain_with_cap(
    model: &MonomerModel,
    config: &AggregateConfig,
    k_max: usize,
    cap: usize,
) -> Result<BlockChain> {
    config.validate()?;
    let k_max = k_max.min(max_sector(config.n_ground, model.m_g()));
    let (m_g, m_e) = (model.m_g(), model.m_e());

    let mut dim = 0usize;
    for k in 0..=k_max {
        dim += crate::basis::manifold_dimension(m_g, m_e, k)?;
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
    }

    let bases = (0..=k_max)
        .into_par_iter()
        .map(|k| enumerate_manifold(config.n_ground, m_g, m_e, k))
        .collect::<Result<Vec<_>>>()?;
    let diag_blocks = bases
        .par_iter()
        .map(|b| assemble_diag_block(model, config, b))
        .collect::<Result<Vec<_>>>()?;
    let couplings = bases
        .par_windows(2)
        .map(|w| assemble_coupling(model, config, &w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockChain {
        bases,
        diag_blocks,
        couplings,
    })
}
