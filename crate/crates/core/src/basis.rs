//! Permutation-symmetric occupation basis of the single-excitation manifold.
//!
//! With `N + 1` identical monomers and exactly one electronic excitation, a
//! symmetric state is fixed by how many of the `N` ground-state molecules sit
//! in each ground vibrational level and by the vibrational level of the single
//! excited molecule. Sector `k` collects the states with `k` vibrationally
//! excited ground-state molecules, `sum_{i>=1} n_i = k`.

use std::fmt;

use crate::error::{Error, Result};

/// One symmetric configuration `|n_0 ... n_{M_g}; 1_m>`.
///
/// Ordering is lexicographic in `(ground_occ, excited_level)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccState {
    pub ground_occ: Vec<usize>,
    pub excited_level: usize,
}

impl OccState {
    pub fn new(ground_occ: Vec<usize>, excited_level: usize) -> Self {
        Self {
            ground_occ,
            excited_level,
        }
    }

    /// Number of ground-state molecules, `sum_i n_i`.
    pub fn n_ground(&self) -> usize {
        self.ground_occ.iter().sum()
    }

    /// Sector label: molecules outside the vibrational ground level.
    pub fn sector(&self) -> usize {
        self.ground_occ.iter().skip(1).sum()
    }
}

/// Debug-dump form `[n0 n1 ... | m]`.
impl fmt::Display for OccState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, n) in self.ground_occ.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, " | {}]", self.excited_level)
    }
}

/// All symmetric states of one sector, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldBasis {
    n_ground: usize,
    m_g: usize,
    m_e: usize,
    k: usize,
    states: Vec<OccState>,
}

impl ManifoldBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_ground(&self) -> usize {
        self.n_ground
    }

    pub fn states(&self) -> &[OccState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Position of `state` in this sector.
    pub fn locate(&self, state: &OccState) -> Result<usize> {
        self.states
            .binary_search(state)
            .map_err(|_| Error::StateNotFound(state.to_string()))
    }

    /// One state per line in the `[n0 n1 ... | m]` format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.states {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    pub(crate) fn shape(&self) -> (usize, usize, usize) {
        (self.n_ground, self.m_g, self.m_e)
    }
}

/// Free-function form of [`ManifoldBasis::locate`].
pub fn locate(state: &OccState, basis: &ManifoldBasis) -> Result<usize> {
    basis.locate(state)
}

/// Largest populated sector: `N` when there is an excited ground level,
/// otherwise only `k = 0` exists.
pub fn max_sector(n_ground: usize, m_g: usize) -> usize {
    if m_g == 0 {
        0
    } else {
        n_ground
    }
}

fn binomial(n: usize, r: usize) -> usize {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `(M_e + 1) * C(k + M_g - 1, M_g - 1)`: the ways to spread `k` molecules over
/// the `M_g` excited ground levels, times the excited-level choices.
pub fn manifold_dimension(m_g: usize, m_e: usize, k: usize) -> Result<usize> {
    if m_g == 0 {
        return if k == 0 {
            Ok(m_e + 1)
        } else {
            Err(Error::SectorOutOfRange { k, max: 0 })
        };
    }
    Ok((m_e + 1) * binomial(k + m_g - 1, m_g - 1))
}

/// Sector `k` of the symmetric single-excitation space for `N` ground-state
/// molecules.
pub fn enumerate_manifold(
    n_ground: usize,
    m_g: usize,
    m_e: usize,
    k: usize,
) -> Result<ManifoldBasis> {
    let max = max_sector(n_ground, m_g);
    if k > max {
        return Err(Error::SectorOutOfRange { k, max });
    }

    // compositions of k into levels 1..=m_g, generated in ascending lexicographic order
    let mut tails = Vec::new();
    let mut current = vec![0usize; m_g];
    compositions(k, 0, &mut current, &mut tails);

    let mut states = Vec::with_capacity(tails.len() * (m_e + 1));
    for tail in tails {
        let mut occ = Vec::with_capacity(m_g + 1);
        occ.push(n_ground - k);
        occ.extend_from_slice(&tail);
        for m in 0..=m_e {
            states.push(OccState::new(occ.clone(), m));
        }
    }
    debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
    Ok(ManifoldBasis {
        n_ground,
        m_g,
        m_e,
        k,
        states,
    })
}

fn compositions(remaining: usize, pos: usize, current: &mut [usize], out: &mut Vec<Vec<usize>>) {
    if pos == current.len() {
        if remaining == 0 {
            out.push(current.to_vec());
        }
        return;
    }
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        current[pos] = 0;
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        compositions(remaining - v, pos + 1, current, out);
    }
    current[pos] = 0;
}
