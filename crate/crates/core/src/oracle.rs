//! Brute-force check of the symmetric reduction.
//!
//! The aggregate is rebuilt in the product basis of distinguishable monomers,
//! `H = sum_i H_m^(i) + J sum_{i != j} |e_i><e_j|`, restricted to one electronic
//! excitation, and diagonalized densely. Its absorption must agree with the
//! symmetric-basis engine once both use a single uniform linewidth, so the
//! comparison always runs the symmetric side with `gamma_v = 0`.

use nalgebra::DMatrix;

use crate::basis::{max_sector, OccState};
use crate::error::{Error, Result};
use crate::hamiltonian::{AggregateConfig, BlockChain};
use crate::response::{map_grid, spectrum};
use crate::spectrum::FrequencyGrid;
use crate::vibronic::MonomerModel;

/// Default cap on the product-basis dimension.
pub const DEFAULT_SITE_CAP: usize = 20_000;

/// Product state with exactly one excited monomer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteState {
    pub excited_site: usize,
    pub excited_vib: usize,
    /// Ground vibrational level of every other site, in site order.
    pub ground_vibs: Vec<usize>,
}

impl SiteState {
    /// Per-site levels; the excited site carries its excited vibrational level.
    fn levels(&self) -> Vec<usize> {
        let mut out = self.ground_vibs.clone();
        out.insert(self.excited_site, self.excited_vib);
        out
    }

    fn from_levels(mut levels: Vec<usize>, excited_site: usize) -> Self {
        let excited_vib = levels.remove(excited_site);
        Self {
            excited_site,
            excited_vib,
            ground_vibs: levels,
        }
    }

    /// Symmetric-basis label: ground-level occupations and the exciton level.
    pub fn occupation(&self, m_g: usize) -> OccState {
        let mut occ = vec![0; m_g + 1];
        for &n in &self.ground_vibs {
            occ[n] += 1;
        }
        OccState::new(occ, self.excited_vib)
    }
}

/// Mixed-radix indexing of the single-excitation product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteBasis {
    pub sites: usize,
    pub ground_levels: usize,
    pub excited_levels: usize,
}

impl SiteBasis {
    pub fn new(model: &MonomerModel, config: &AggregateConfig) -> Self {
        Self {
            sites: config.monomers(),
            ground_levels: model.m_g() + 1,
            excited_levels: model.m_e() + 1,
        }
    }

    /// `(N+1)(M_e+1)(M_g+1)^N`, or `None` on overflow.
    pub fn checked_dim(&self) -> Option<usize> {
        let ground = u32::try_from(self.sites - 1)
            .ok()
            .and_then(|p| self.ground_levels.checked_pow(p))?;
        self.sites
            .checked_mul(self.excited_levels)?
            .checked_mul(ground)
    }

    fn ground_block(&self) -> usize {
        self.ground_levels.pow((self.sites - 1) as u32)
    }

    pub fn index(&self, s: &SiteState) -> usize {
        let mut g = 0;
        for &n in &s.ground_vibs {
            g = g * self.ground_levels + n;
        }
        (s.excited_site * self.excited_levels + s.excited_vib) * self.ground_block() + g
    }

    pub fn state(&self, index: usize) -> SiteState {
        let block = self.ground_block();
        let (head, mut g) = (index / block, index % block);
        let mut ground_vibs = vec![0; self.sites - 1];
        for slot in ground_vibs.iter_mut().rev() {
            *slot = g % self.ground_levels;
            g /= self.ground_levels;
        }
        SiteState {
            excited_site: head / self.excited_levels,
            excited_vib: head % self.excited_levels,
            ground_vibs,
        }
    }
}

fn checked_basis(model: &MonomerModel, config: &AggregateConfig, cap: usize) -> Result<(SiteBasis, usize)> {
    config.validate()?;
    let basis = SiteBasis::new(model, config);
    let dim = basis.checked_dim().unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok((basis, dim))
}

pub fn site_hamiltonian(model: &MonomerModel, config: &AggregateConfig) -> Result<DMatrix<f64>> {
    site_hamiltonian_with_cap(model, config, DEFAULT_SITE_CAP)
}

/// Dense single-excitation Hamiltonian in the product basis.
///
/// Off-diagonal elements connect (site i excited in `m~`, site j at ground
/// level `n~`) with (site j excited in `m`, site i at ground level `n`) with
/// amplitude `J fc[n][m~] fc[n~][m]`.
pub fn site_hamiltonian_with_cap(
    model: &MonomerModel,
    config: &AggregateConfig,
    cap: usize,
) -> Result<DMatrix<f64>> {
    let (basis, dim) = checked_basis(model, config, cap)?;
    let fc = model.fc();
    let (eg, ee) = (model.ground_energies(), model.excited_energies());
    let mut h = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let s = basis.state(col);
        h[(col, col)] = ee[s.excited_vib] + s.ground_vibs.iter().map(|&n| eg[n]).sum::<f64>();
        if config.coupling == 0.0 {
            continue;
        }
        let levels = s.levels();
        let i = s.excited_site;
        for j in (0..basis.sites).filter(|&j| j != i) {
            let from = levels[j];
            for n in 0..basis.ground_levels {
                for m in 0..basis.excited_levels {
                    let amp = config.coupling * fc[(n, s.excited_vib)] * fc[(from, m)];
                    let mut next = levels.clone();
                    next[i] = n;
                    next[j] = m;
                    let row = basis.index(&SiteState::from_levels(next, j));
                    h[(row, col)] += amp;
                }
            }
        }
    }
    Ok(h)
}

/// `mu|ground>` in the product basis: `|mu_M| fc[0][m]` on every state with
/// one site excited in level `m` and all others in the vibrational ground state.
pub fn site_dipole(model: &MonomerModel, config: &AggregateConfig) -> Vec<(usize, f64)> {
    let basis = SiteBasis::new(model, config);
    let c = model.bright_overlaps();
    let mut out = Vec::with_capacity(basis.sites * basis.excited_levels);
    for site in 0..basis.sites {
        for (m, &cm) in c.iter().enumerate() {
            let s = SiteState {
                excited_site: site,
                excited_vib: m,
                ground_vibs: vec![0; basis.sites - 1],
            };
            out.push((basis.index(&s), model.dipole_mag() * cm));
        }
    }
    out
}

/// Product-basis absorption with the uniform linewidth `gamma`.
pub fn oracle_spectrum(
    model: &MonomerModel,
    config: &AggregateConfig,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    oracle_spectrum_with_cap(model, config, grid, DEFAULT_SITE_CAP)
}

pub fn oracle_spectrum_with_cap(
    model: &MonomerModel,
    config: &AggregateConfig,
    grid: &FrequencyGrid,
    cap: usize,
) -> Result<Vec<f64>> {
    let h = site_hamiltonian_with_cap(model, config, cap)?;
    let eig = h.symmetric_eigen();
    let mu = site_dipole(model, config);
    let poles: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &e)| {
            let overlap: f64 = mu.iter().map(|&(i, a)| eig.eigenvectors[(i, j)] * a).sum();
            (e, overlap * overlap)
        })
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let half = 0.5 * config.gamma;
    map_grid(grid, |w| {
        Ok(poles
            .iter()
            .map(|&(e, weight)| weight * half / ((w - e).powi(2) + half * half))
            .sum())
    })
}

/// Symmetric-basis spectrum with `gamma_v = 0`, the counterpart of
/// [`oracle_spectrum`].
pub fn symmetric_counterpart(
    model: &MonomerModel,
    config: &AggregateConfig,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    let uniform = AggregateConfig {
        gamma_v: 0.0,
        ..*config
    };
    spectrum(model, &uniform, grid, max_sector(config.n_ground, model.m_g()))
}

/// Columns whose `i`-th entry is the normalized symmetrization of the `i`-th
/// state of `chain` (concatenated sector order) in the product basis.
pub fn symmetric_embedding(
    model: &MonomerModel,
    config: &AggregateConfig,
    chain: &BlockChain,
) -> Result<DMatrix<f64>> {
    let (basis, dim) = checked_basis(model, config, DEFAULT_SITE_CAP)?;
    let offsets = chain.offsets();
    let mut p = DMatrix::zeros(dim, chain.total_dim());
    for idx in 0..dim {
        let occ = basis.state(idx).occupation(model.m_g());
        let k = occ.sector();
        if k > chain.k_max() {
            continue;
        }
        let col = offsets[k] + chain.bases()[k].locate(&occ)?;
        p[(idx, col)] = 1.0;
    }
    for mut column in p.column_iter_mut() {
        let norm = column.norm();
        if norm > 0.0 {
            column /= norm;
        }
    }
    Ok(p)
}

/// Largest pointwise deviation between two columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub max_abs: f64,
    /// `max_abs` divided by the largest magnitude in either column.
    pub max_rel: f64,
}

pub fn compare(a: &[f64], b: &[f64]) -> Result<Deviation> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "columns have {} and {} points",
            a.len(),
            b.len()
        )));
    }
    let max_abs = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|x| x.abs()).fold(0.0, f64::max);
    Ok(Deviation {
        max_abs,
        max_rel: if scale > 0.0 { max_abs / scale } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_chain;
    use crate::response::monomer_spectrum;
    use crate::vibronic::{build_model, DisplacedOscillatorSpec};

    fn displaced(s: f64, m_g: usize, m_e: usize) -> MonomerModel {
        build_model(
            &DisplacedOscillatorSpec {
                vib_freq: 0.16,
                huang_rhys: s,
                zero_zero_energy: 2.3,
                m_g,
                m_e,
            },
            1.0,
        )
        .unwrap()
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn index_round_trip() {
        let model = displaced(0.5, 2, 1);
        let cfg = AggregateConfig::new(3, 0.1, 0.01, 0.0).unwrap();
        let basis = SiteBasis::new(&model, &cfg);
        let dim = basis.checked_dim().unwrap();
        assert_eq!(dim, 4 * 2 * 27);
        for i in 0..dim {
            assert_eq!(basis.index(&basis.state(i)), i);
        }
    }

    #[test]
    fn site_hamiltonian_symmetric() {
        let model = displaced(0.8, 2, 2);
        let cfg = AggregateConfig::new(2, -0.07, 0.01, 0.0).unwrap();
        let h = site_hamiltonian(&model, &cfg).unwrap();
        assert!((&h - h.transpose()).amax() < 1e-15);
    }

    #[test]
    fn uncoupled_is_block_diagonal_per_site() {
        let model = displaced(0.5, 1, 1);
        let cfg = AggregateConfig::new(2, 0.0, 0.01, 0.0).unwrap();
        let h = site_hamiltonian(&model, &cfg).unwrap();
        let basis = SiteBasis::new(&model, &cfg);
        for r in 0..h.nrows() {
            for c in 0..h.ncols() {
                if basis.state(r).excited_site != basis.state(c).excited_site {
                    assert_eq!(h[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn commutes_with_site_transposition() {
        let model = displaced(0.5, 2, 1);
        let cfg = AggregateConfig::new(2, 0.08, 0.01, 0.0).unwrap();
        let h = site_hamiltonian(&model, &cfg).unwrap();
        let basis = SiteBasis::new(&model, &cfg);
        let dim = h.nrows();
        // swap sites 0 and 2
        let mut p = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let s = basis.state(col);
            let mut levels = s.levels();
            levels.swap(0, 2);
            let site = match s.excited_site {
                0 => 2,
                2 => 0,
                x => x,
            };
            p[(basis.index(&SiteState::from_levels(levels, site)), col)] = 1.0;
        }
        let commutator = &h * &p - &p * &h;
        assert_eq!(commutator.amax(), 0.0);
    }

    #[test]
    fn projection_reproduces_chain() {
        for (n, m_g, m_e) in [(1, 1, 1), (2, 1, 1), (2, 2, 1), (3, 2, 2), (2, 2, 2)] {
            let model = displaced(0.5, m_g, m_e);
            let cfg = AggregateConfig::new(n, 0.09, 0.01, 0.0).unwrap();
            let chain = build_chain(&model, &cfg, n).unwrap();
            let p = symmetric_embedding(&model, &cfg, &chain).unwrap();
            let gram = p.transpose() * &p;
            assert!((gram - DMatrix::identity(p.ncols(), p.ncols())).amax() < 1e-14);
            let h = site_hamiltonian(&model, &cfg).unwrap();
            let projected = p.transpose() * h * &p;
            assert!((projected - chain.to_dense()).amax() < 1e-13, "N={n} M_g={m_g} M_e={m_e}");
        }
    }

    #[test]
    fn symmetric_eigenvalues_in_site_spectrum() {
        for (n, m_g, m_e) in [(1, 2, 2), (2, 2, 2), (3, 2, 1), (3, 1, 2)] {
            let model = displaced(0.5, m_g, m_e);
            let cfg = AggregateConfig::new(n, -0.05, 0.01, 0.0).unwrap();
            let chain = build_chain(&model, &cfg, n).unwrap();
            let sym = sorted(chain.to_dense().symmetric_eigenvalues().iter().copied().collect());
            let site = sorted(site_hamiltonian(&model, &cfg).unwrap().symmetric_eigenvalues().iter().copied().collect());
            for e in sym {
                let nearest = site.iter().map(|x| (x - e).abs()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-10);
            }
        }
    }

    #[test]
    fn dimer_and_trimer_agree() {
        let grid = FrequencyGrid::new(1.8, 3.0, 601).unwrap();
        let lambda = MonomerModel::lambda_system(0.16, 2.3).unwrap();
        let cfg = AggregateConfig::new(1, -0.06, 0.01, 1e-5).unwrap();
        let d = compare(
            &oracle_spectrum(&lambda, &cfg, &grid).unwrap(),
            &symmetric_counterpart(&lambda, &cfg, &grid).unwrap(),
        )
        .unwrap();
        assert!(d.max_abs < 1e-8, "{d:?}");

        let model = displaced(0.5, 1, 1);
        let cfg = AggregateConfig::new(2, 0.05, 0.01, 0.0).unwrap();
        let d = compare(
            &oracle_spectrum(&model, &cfg, &grid).unwrap(),
            &symmetric_counterpart(&model, &cfg, &grid).unwrap(),
        )
        .unwrap();
        assert!(d.max_abs < 1e-8, "{d:?}");
    }

    #[test]
    fn uncoupled_oracle_is_additive() {
        let model = displaced(0.5, 1, 2);
        let cfg = AggregateConfig::new(2, 0.0, 0.01, 0.0).unwrap();
        let grid = FrequencyGrid::new(2.0, 3.0, 201).unwrap();
        let oracle = oracle_spectrum(&model, &cfg, &grid).unwrap();
        let mono = monomer_spectrum(&model, 0.01, &grid).unwrap();
        let scaled: Vec<f64> = mono.iter().map(|x| 3.0 * x).collect();
        assert!(compare(&oracle, &scaled).unwrap().max_rel < 1e-12);
    }

    #[test]
    fn relabeling_invariance() {
        // the embedded dipole and H are permutation symmetric, so reversing the
        // site order (conjugating H by the reversal) leaves the spectrum fixed
        let model = displaced(0.5, 1, 1);
        let cfg = AggregateConfig::new(2, 0.07, 0.01, 0.0).unwrap();
        let h = site_hamiltonian(&model, &cfg).unwrap();
        let basis = SiteBasis::new(&model, &cfg);
        let dim = h.nrows();
        let reverse = |i: usize| {
            let s = basis.state(i);
            let mut levels = s.levels();
            levels.reverse();
            basis.index(&SiteState::from_levels(levels, basis.sites - 1 - s.excited_site))
        };
        let hr = DMatrix::from_fn(dim, dim, |r, c| h[(reverse(r), reverse(c))]);
        let mu = site_dipole(&model, &cfg);
        let weights = |m: &DMatrix<f64>| {
            let eig = m.clone().symmetric_eigen();
            let mut out: Vec<(f64, f64)> = (0..dim)
                .map(|j| {
                    let o: f64 = mu.iter().map(|&(i, a)| eig.eigenvectors[(i, j)] * a).sum();
                    (eig.eigenvalues[j], o * o)
                })
                .collect();
            out.sort_by(|a, b| a.0.total_cmp(&b.0));
            out
        };
        for ((e1, w1), (e2, w2)) in weights(&h).into_iter().zip(weights(&hr)) {
            assert!((e1 - e2).abs() < 1e-12);
            // degenerate eigenvalues mix, so compare weights only where they are isolated
            if w1 > 1e-8 || w2 > 1e-8 {
                assert!((w1 - w2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cap_enforced() {
        let model = displaced(0.5, 3, 3);
        let cfg = AggregateConfig::new(6, 0.1, 0.01, 0.0).unwrap();
        assert!(matches!(
            site_hamiltonian(&model, &cfg),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn compare_examples() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(compare(&a, &a).unwrap().max_abs, 0.0);
        let b = [1.0, 2.0 + 1e-9, 3.0];
        assert!((compare(&a, &b).unwrap().max_abs - 1e-9).abs() < 1e-15);
        assert!(compare(&a, &b[..2]).is_err());
    }
}
