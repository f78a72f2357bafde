//! Linear absorption from the k = 0 block of the aggregate resolvent.
//!
//! The dipole operator only reaches sector 0 from the global ground state, so
//! `sigma(omega) = -Im d^T G_00(omega) d`. `G_00` is obtained by eliminating
//! sectors from the top down: with `Gamma_0 = gamma/2` and
//! `Gamma_k = (gamma + gamma_v)/2` for `k >= 1`,
//!
//! ```text
//! S_kmax = (omega - H_kmax + i Gamma_kmax)^-1
//! S_k    = (omega - H_k + i Gamma_k - v_k^T S_{k+1} v_k)^-1
//! ```
//!
//! and `G_00 = S_0`. Each step is a Schur complement of the remaining lower
//! right corner, which is exact because only neighbouring sectors couple.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::max_sector;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_chain, AggregateConfig, BlockChain};
use crate::spectrum::{FrequencyGrid, Method, Spectrum};
use crate::vibronic::{monomer_green, MonomerModel};

/// `mu|ground>` expressed on the sector-0 basis:
/// `sqrt(N+1) |mu_M| fc[0][m]` for the state with the exciton in level `m`.
pub fn dipole_vector(model: &MonomerModel, config: &AggregateConfig) -> DVector<f64> {
    let scale = (config.monomers() as f64).sqrt() * model.dipole_mag();
    DVector::from_iterator(
        model.m_e() + 1,
        model.bright_overlaps().into_iter().map(|c| scale * c),
    )
}

fn shifted_block(h: &DMatrix<f64>, omega: f64, damping: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| {
        if r == c {
            Complex64::new(omega - h[(r, c)], damping)
        } else {
            Complex64::new(-h[(r, c)], 0.0)
        }
    })
}

fn invert(a: DMatrix<Complex64>, sector: usize, omega: f64) -> Result<DMatrix<Complex64>> {
    a.try_inverse()
        .filter(|inv| inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        .ok_or(Error::SingularBlock { sector, omega })
}

/// Sector-0 block of the resolvent by backward continued-fraction recursion.
pub fn resolvent_k0(
    omega: f64,
    chain: &BlockChain,
    config: &AggregateConfig,
) -> Result<DMatrix<Complex64>> {
    let blocks = chain.diag_blocks();
    let couplings = chain.couplings();
    let mut lower: Option<DMatrix<Complex64>> = None;
    for k in (0..blocks.len()).rev() {
        let mut a = shifted_block(&blocks[k], omega, config.damping(k));
        if let Some(s) = lower.take() {
            let v = couplings[k].map(|x| Complex64::new(x, 0.0));
            a -= v.transpose() * s * v;
        }
        lower = Some(invert(a, k, omega)?);
    }
    Ok(lower.expect("chain has at least one sector"))
}

/// Same quantity as [`resolvent_k0`] from one dense LU solve of the full
/// truncated matrix. Cubic in the total dimension; meant as a cross-check.
pub fn dense_resolvent_k0(
    omega: f64,
    chain: &BlockChain,
    config: &AggregateConfig,
) -> Result<DMatrix<Complex64>> {
    let h = chain.to_dense();
    let mut a = shifted_block(&h, omega, 0.0);
    for (k, (&offset, &dim)) in chain.offsets().iter().zip(&chain.dims()).enumerate() {
        for i in offset..offset + dim {
            a[(i, i)].im = config.damping(k);
        }
    }
    let d0 = chain.dims()[0];
    let rhs = DMatrix::<Complex64>::identity(h.nrows(), d0);
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularBlock { sector: 0, omega })?;
    Ok(sol.rows(0, d0).into_owned())
}

/// `-Im d^T S d` for a complex matrix `S` and real vector `d`.
fn absorption(d: &DVector<f64>, s: &DMatrix<Complex64>) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..d.len() {
        for c in 0..d.len() {
            acc += s[(r, c)] * (d[r] * d[c]);
        }
    }
    -acc.im
}

/// Absorption at a single frequency from a prebuilt chain.
pub fn absorption_at(
    omega: f64,
    chain: &BlockChain,
    config: &AggregateConfig,
    dipole: &DVector<f64>,
) -> Result<f64> {
    Ok(absorption(dipole, &resolvent_k0(omega, chain, config)?))
}

/// Evaluate `f` on every grid point in parallel, preserving grid order.
pub fn map_grid<F>(grid: &FrequencyGrid, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    (0..grid.count())
        .into_par_iter()
        .map(|i| f(grid.point(i)))
        .collect()
}

/// Spectrum of the chain truncated at sector `k_max` (clamped to the largest
/// populated sector).
pub fn spectrum(
    model: &MonomerModel,
    config: &AggregateConfig,
    grid: &FrequencyGrid,
    k_max: usize,
) -> Result<Vec<f64>> {
    let chain = build_chain(model, config, k_max)?;
    let d = dipole_vector(model, config);
    map_grid(grid, |w| absorption_at(w, &chain, config, &d))
}

/// `(N+1) |mu_M|^2 * -Im[g / (1 - N J g)]` with `g` the monomer Green's function.
pub fn cpa_spectrum(
    model: &MonomerModel,
    config: &AggregateConfig,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    let scale = config.monomers() as f64 * model.dipole_mag().powi(2);
    let nj = config.collective_coupling();
    map_grid(grid, |w| {
        let g = monomer_green(model, w, config.gamma)?;
        Ok(-scale * (g / (1.0 - nj * g)).im)
    })
}

/// Absorption of a single isolated monomer, `|mu_M|^2 * -Im g`.
pub fn monomer_spectrum(
    model: &MonomerModel,
    gamma: f64,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    let scale = model.dipole_mag().powi(2);
    map_grid(grid, |w| Ok(-scale * monomer_green(model, w, gamma)?.im))
}

/// Collective coupling `N~ J~` of the all-to-all aggregate whose classical-optics
/// response equals that of an aggregate in which each monomer sees couplings
/// summing to `sum_of_couplings` (e.g. `2 J` for a nearest-neighbour chain).
pub fn surrogate_coupling(sum_of_couplings: f64) -> f64 {
    sum_of_couplings
}

/// One column for `method`.
pub fn compute(
    method: Method,
    model: &MonomerModel,
    config: &AggregateConfig,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    match method {
        Method::Exact => spectrum(model, config, grid, max_sector(config.n_ground, model.m_g())),
        Method::Order(k) => spectrum(model, config, grid, k),
        Method::Cpa => cpa_spectrum(model, config, grid),
    }
}

/// A table with one column per requested method.
pub fn compute_spectrum(
    methods: &[Method],
    model: &MonomerModel,
    config: &AggregateConfig,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    let mut out = Spectrum::new(*grid);
    for &m in methods {
        out.push(m, compute(m, model, config, grid)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{find_peaks, integrate, sum_rule, PEAK_THRESHOLD};
    use crate::vibronic::{build_model, DisplacedOscillatorSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lambda() -> MonomerModel {
        MonomerModel::lambda_system(0.16, 2.3).unwrap()
    }

    fn dimer() -> AggregateConfig {
        AggregateConfig::new(1, -0.06, 0.01, 1e-5).unwrap()
    }

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

    fn c(z: Complex64) -> (f64, f64) {
        (z.re, z.im)
    }

    #[test]
    fn dipole_examples() {
        let d = dipole_vector(&lambda(), &dimer());
        assert_eq!(d.len(), 1);
        assert_relative_eq!(d[0], 2f64.sqrt(), epsilon = 1e-15);

        let cfg = AggregateConfig::new(9, 0.01, 0.01, 0.0).unwrap();
        let d = dipole_vector(&displaced(0.0, 1, 3), &cfg);
        assert!(d[0] > 0.0 && d.iter().skip(1).all(|&x| x == 0.0));

        // sqrt(10) e^{-1/4} [1, sqrt(1/2), 1/2] (mpmath)
        let d = dipole_vector(&displaced(0.5, 2, 2), &cfg);
        let expect = [2.462784318028343755, 1.741451491877728737, 0.870725745938864369];
        for (x, e) in d.iter().zip(expect) {
            assert_relative_eq!(*x, e, max_relative = 1e-14);
        }
    }

    #[test]
    fn zeroth_order_lambda_closed_form() {
        let n = 12;
        let cfg = AggregateConfig::new(n, 0.02, 0.01, 1e-5).unwrap();
        let chain = build_chain(&lambda(), &cfg, 0).unwrap();
        for w in [2.0, 2.54, 2.6, 3.1] {
            let s = resolvent_k0(w, &chain, &cfg).unwrap();
            let expect = 1.0 / Complex64::new(w - (2.3 + n as f64 * 0.02), 0.005);
            assert_relative_eq!(s[(0, 0)].re, expect.re, max_relative = 1e-13);
            assert_relative_eq!(s[(0, 0)].im, expect.im, max_relative = 1e-13);
        }
    }

    #[test]
    fn dimer_two_level_fraction() {
        let cfg = dimer();
        let chain = build_chain(&lambda(), &cfg, 1).unwrap();
        for w in [2.1, 2.22, 2.3, 2.42, 2.7] {
            let s = resolvent_k0(w, &chain, &cfg).unwrap();
            let inner = Complex64::new(w - 2.40, 0.5 * (0.01 + 1e-5));
            let expect = 1.0 / (Complex64::new(w - 2.24, 0.005) - 0.0036 / inner);
            let (re, im) = c(s[(0, 0)]);
            assert_relative_eq!(re, expect.re, max_relative = 1e-9);
            assert_relative_eq!(im, expect.im, max_relative = 1e-9);
        }
    }

    #[test]
    fn lambda_matches_dense_inverse() {
        let n = 10;
        let cfg = AggregateConfig::new(n, -0.03, 0.01, 1e-3).unwrap();
        let chain = build_chain(&lambda(), &cfg, n).unwrap();
        let grid = FrequencyGrid::new(1.5, 4.5, 301).unwrap();
        for w in grid.points() {
            let cf = resolvent_k0(w, &chain, &cfg).unwrap();
            let dense = dense_resolvent_k0(w, &chain, &cfg).unwrap();
            assert!((cf - dense).camax() < 1e-10);
        }
    }

    #[test]
    fn general_chain_matches_dense_inverse() {
        for (n, m_g, m_e) in [(1, 2, 2), (4, 2, 1), (6, 1, 2), (20, 1, 2), (8, 2, 2)] {
            let model = displaced(0.6, m_g, m_e);
            let cfg = AggregateConfig::new(n, 0.25 / n as f64, 0.02, 0.005).unwrap();
            let chain = build_chain(&model, &cfg, n).unwrap();
            for w in [1.9, 2.31, 2.5, 2.77, 3.4] {
                let cf = resolvent_k0(w, &chain, &cfg).unwrap();
                let dense = dense_resolvent_k0(w, &chain, &cfg).unwrap();
                assert!((cf - dense).camax() < 1e-10, "N={n} M_g={m_g} M_e={m_e} w={w}");
            }
        }
    }

    #[test]
    fn lambda_lorentzian_at_zeroth_order() {
        let n = 4;
        let cfg = AggregateConfig::new(n, 0.05, 0.01, 0.0).unwrap();
        let grid = FrequencyGrid::new(2.2, 2.8, 6001).unwrap();
        let s = spectrum(&lambda(), &cfg, &grid, 0).unwrap();
        let peaks = find_peaks(&grid, &s, PEAK_THRESHOLD);
        assert_eq!(peaks.len(), 1);
        assert_relative_eq!(peaks[0], 2.5, epsilon = 1e-9);
        let max = s.iter().copied().fold(0.0, f64::max);
        // (N+1) |mu|^2 / (gamma/2)
        assert_relative_eq!(max, 5.0 / 0.005, max_relative = 1e-9);
    }

    #[test]
    fn dimer_exact_two_peaks() {
        let grid = FrequencyGrid::new(1.8, 2.9, 4001).unwrap();
        let s = compute(Method::Exact, &lambda(), &dimer(), &grid).unwrap();
        let peaks = find_peaks(&grid, &s, PEAK_THRESHOLD);
        assert_eq!(peaks.len(), 2);
        let half = 0.5 * grid.step();
        assert!((peaks[0] - 2.22).abs() < half);
        assert!((peaks[1] - 2.42).abs() < half);
    }

    #[test]
    fn uncoupled_aggregate_is_additive() {
        let model = displaced(0.5, 2, 3);
        let cfg = AggregateConfig::new(5, 0.0, 0.01, 0.003).unwrap();
        let grid = FrequencyGrid::new(2.0, 3.0, 201).unwrap();
        let mono = monomer_spectrum(&model, cfg.gamma, &grid).unwrap();
        for method in [Method::Exact, Method::Order(1), Method::Cpa] {
            let agg = compute(method, &model, &cfg, &grid).unwrap();
            for (a, m) in agg.iter().zip(&mono) {
                assert_relative_eq!(*a, 6.0 * m, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn cpa_equals_zeroth_order() {
        let grid = FrequencyGrid::new(1.6, 3.4, 901).unwrap();
        for (s, j) in [(0.5, 0.04), (1.2, -0.07), (0.0, 0.02)] {
            let model = displaced(s, 2, 4);
            let cfg = AggregateConfig::new(8, j, 0.015, 0.0).unwrap();
            let cpa = cpa_spectrum(&model, &cfg, &grid).unwrap();
            let zeroth = spectrum(&model, &cfg, &grid, 0).unwrap();
            for (a, b) in cpa.iter().zip(&zeroth) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cpa_single_level_and_uncoupled() {
        let model = MonomerModel::new(vec![0.0], vec![2.3], DMatrix::from_element(1, 1, 1.0), 1.0)
            .unwrap();
        let cfg = AggregateConfig::new(3, -0.02, 0.01, 0.0).unwrap();
        let grid = FrequencyGrid::new(2.0, 2.6, 6001).unwrap();
        let s = cpa_spectrum(&model, &cfg, &grid).unwrap();
        let peaks = find_peaks(&grid, &s, PEAK_THRESHOLD);
        assert_eq!(peaks.len(), 1);
        assert_relative_eq!(peaks[0], 2.24, epsilon = 1e-9);

        let free = AggregateConfig::new(3, 0.0, 0.01, 0.0).unwrap();
        let s = cpa_spectrum(&model, &free, &grid).unwrap();
        let mono = monomer_spectrum(&model, 0.01, &grid).unwrap();
        for (a, m) in s.iter().zip(&mono) {
            assert_relative_eq!(*a, 4.0 * m, max_relative = 1e-12);
        }
    }

    /// Eigenvalues of diag(omega_e) + NJ c c^T, computed independently.
    fn rank_one_eigenvalues(model: &MonomerModel, nj: f64) -> Vec<f64> {
        let c = DVector::from_vec(model.bright_overlaps());
        let h = DMatrix::from_diagonal(&DVector::from_column_slice(model.excited_energies()))
            + &c * c.transpose() * nj;
        let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn cpa_peaks_are_rank_one_eigenvalues() {
        let model = displaced(0.5, 1, 4);
        let grid = FrequencyGrid::new(1.4, 3.4, 8001).unwrap();
        for x in [-2.0, 2.0] {
            let nj = x * 0.16;
            let cfg = AggregateConfig::new(10, nj / 10.0, 0.01, 0.0).unwrap();
            let s = cpa_spectrum(&model, &cfg, &grid).unwrap();
            let eig = rank_one_eigenvalues(&model, nj);
            let peaks = find_peaks(&grid, &s, PEAK_THRESHOLD);
            assert!(!peaks.is_empty());
            for p in peaks {
                let nearest = eig.iter().map(|e| (e - p).abs()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 0.5 * grid.step(), "peak {p} vs {eig:?}");
            }
        }
    }

    #[test]
    fn surrogate_examples() {
        assert_eq!(surrogate_coupling(2.0 * -0.06), -0.12);
        assert_eq!(surrogate_coupling(0.0), 0.0);
        let cfg = AggregateConfig::new(7, 0.03, 0.01, 0.0).unwrap();
        assert_relative_eq!(surrogate_coupling(7.0 * 0.03), cfg.collective_coupling());
    }

    #[test]
    fn single_lorentzian_sum_rule() {
        let model = MonomerModel::new(vec![0.0], vec![2.3], DMatrix::from_element(1, 1, 1.0), 1.0)
            .unwrap();
        let cfg = AggregateConfig::new(1, 0.0, 0.01, 0.0).unwrap();
        let grid = FrequencyGrid::new(2.3 - 5.0, 2.3 + 5.0, 100_001).unwrap();
        let s = cpa_spectrum(&model, &cfg, &grid).unwrap();
        let rule = sum_rule(&grid, &s, &model, &cfg).unwrap();
        assert!(rule.deficit < 1e-2);
        assert!(!rule.edge_warning());
    }

    #[test]
    fn dimer_sum_rule_and_quadrature() {
        let grid = FrequencyGrid::new(1.8, 2.9, 4001).unwrap();
        let s = compute(Method::Exact, &lambda(), &dimer(), &grid).unwrap();
        let rule = sum_rule(&grid, &s, &lambda(), &dimer()).unwrap();
        assert!(rule.deficit < 2e-2, "deficit {}", rule.deficit);
        // Lorentzian tails beyond the window, from the 2x2 eigen-decomposition
        let h = build_chain(&lambda(), &dimer(), 1).unwrap().to_dense();
        let eig = h.symmetric_eigen();
        let d = dipole_vector(&lambda(), &dimer());
        let half = 0.005;
        let mut analytic = 0.0;
        for j in 0..2 {
            let w = eig.eigenvectors[(0, j)].powi(2) * d[0] * d[0];
            let e = eig.eigenvalues[j];
            analytic += w * (((2.9 - e) / half).atan() - ((1.8 - e) / half).atan());
        }
        // damping differs slightly between sectors (gamma_v = 1e-5)
        assert_relative_eq!(integrate(&grid, &s), analytic, max_relative = 2e-3);
    }

    #[test]
    fn exactness_plateau() {
        let model = displaced(0.5, 2, 2);
        let cfg = AggregateConfig::new(3, 0.05, 0.02, 0.01).unwrap();
        let grid = FrequencyGrid::new(2.0, 3.0, 101).unwrap();
        let at_n = spectrum(&model, &cfg, &grid, 3).unwrap();
        let beyond = spectrum(&model, &cfg, &grid, 40).unwrap();
        assert_eq!(at_n, beyond);
        let exact = compute(Method::Exact, &model, &cfg, &grid).unwrap();
        assert_eq!(at_n, exact);
    }

    #[test]
    fn ordering_independent_spectrum() {
        // reversing the basis order of every sector is a permutation similarity
        let model = displaced(0.7, 2, 2);
        let cfg = AggregateConfig::new(4, 0.06, 0.02, 0.004).unwrap();
        let chain = build_chain(&model, &cfg, 4).unwrap();
        let d = dipole_vector(&model, &cfg);
        let h = chain.to_dense();
        let n = h.nrows();
        let perm: Vec<usize> = (0..n).rev().collect();
        let hp = DMatrix::from_fn(n, n, |r, c| h[(perm[r], perm[c])]);
        let offsets = chain.offsets();
        let dims = chain.dims();
        for w in [2.2, 2.45, 2.9] {
            let mut a = shifted_block(&hp, w, 0.0);
            let mut rhs = DVector::<Complex64>::zeros(n);
            for (k, (&o, &dim)) in offsets.iter().zip(&dims).enumerate() {
                for i in o..o + dim {
                    let p = n - 1 - i;
                    a[(p, p)].im = cfg.damping(k);
                    if k == 0 {
                        rhs[p] = Complex64::new(d[i - o], 0.0);
                    }
                }
            }
            let x = a.lu().solve(&rhs).unwrap();
            let permuted = -(rhs.transpose() * x)[(0, 0)].im;
            let ours = absorption_at(w, &chain, &cfg, &d).unwrap();
            assert!((ours - permuted).abs() < 1e-12 * ours.abs().max(1.0));
        }
    }

    #[test]
    fn singular_block_reported() {
        // gamma is validated positive, so force a singular shift directly
        let h = DMatrix::from_element(1, 1, 2.0);
        let err = invert(shifted_block(&h, 2.0, 0.0), 3, 2.0).unwrap_err();
        assert_eq!(err, Error::SingularBlock { sector: 3, omega: 2.0 });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn continued_fraction_equals_dense(
            n in 1usize..=20,
            m_g in 1usize..=2,
            m_e in 0usize..=2,
            s in 0.0f64..1.5,
            nj in -0.5f64..0.5,
            omega in 1.8f64..3.2,
        ) {
            prop_assume!(m_g == 1 || n <= 8);
            let model = displaced(s, m_g, m_e);
            let cfg = AggregateConfig::new(n, nj / n as f64, 0.02, 0.003).unwrap();
            let chain = build_chain(&model, &cfg, n).unwrap();
            let cf = resolvent_k0(omega, &chain, &cfg).unwrap();
            let dense = dense_resolvent_k0(omega, &chain, &cfg).unwrap();
            prop_assert!((cf - dense).camax() < 1e-10);
        }

        #[test]
        fn absorption_nonnegative(
            n in 1usize..=6,
            s in 0.0f64..1.5,
            j in -0.1f64..0.1,
            gamma in 1e-3f64..0.1,
            gamma_v in 0.0f64..0.01,
            omega in 1.5f64..3.5,
        ) {
            let model = displaced(s, 2, 2);
            let cfg = AggregateConfig::new(n, j, gamma, gamma_v).unwrap();
            let chain = build_chain(&model, &cfg, n).unwrap();
            let d = dipole_vector(&model, &cfg);
            prop_assert!(absorption_at(omega, &chain, &cfg, &d).unwrap() >= 0.0);
        }
    }
}
